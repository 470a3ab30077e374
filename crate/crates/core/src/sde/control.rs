//! Control matrices of co-adapted couplings.
//!
//! The second Brownian motion is driven as `dV = K dU + K̂ dW`, where `U` and
//! `W` are independent planar Brownian motions and the 2×2 matrices satisfy
//! `K Kᵀ + K̂ K̂ᵀ = I`, so that `V` is again a Brownian motion.  Components are
//! expressed in the oriented geodesic frames: index 1 is radial (along the
//! geodesic joining the two points), index 2 tangential.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CouplingError, Result};
use crate::surface::{cs, sn};

/// Tolerance on `|K Kᵀ + K̂ K̂ᵀ − I|` accepted by [`ControlPair::new`].
pub const CONTROL_TOLERANCE: f64 = 1e-12;

/// Gaussian increments `(dU, dW)` of one time step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Increments {
    pub du: [f64; 2],
    pub dw: [f64; 2],
}

/// A pair `(K, K̂)` of row-major 2×2 control matrices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlPair {
    pub k: [[f64; 2]; 2],
    pub k_hat: [[f64; 2]; 2],
}

impl ControlPair {
    /// Validates `K Kᵀ + K̂ K̂ᵀ = I` to within [`CONTROL_TOLERANCE`].
    pub fn new(k: [[f64; 2]; 2], k_hat: [[f64; 2]; 2]) -> Result<Self> {
        let pair = Self { k, k_hat };
        let residual = pair.residual();
        if residual.is_nan() || residual > CONTROL_TOLERANCE {
            return Err(CouplingError::InvalidControl { residual });
        }
        Ok(pair)
    }

    /// Largest entry of `|K Kᵀ + K̂ K̂ᵀ − I|`.
    pub fn residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for l in 0..2 {
                    s += self.k[i][l] * self.k[j][l] + self.k_hat[i][l] * self.k_hat[j][l];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }

    /// The increment `dV = K dU + K̂ dW`.
    pub fn apply(&self, inc: &Increments) -> [f64; 2] {
        let row = |i: usize| {
            self.k[i][0] * inc.du[0]
                + self.k[i][1] * inc.du[1]
                + self.k_hat[i][0] * inc.dw[0]
                + self.k_hat[i][1] * inc.dw[1]
        };
        [row(0), row(1)]
    }

    /// Row `i` of the 2×4 matrix `[K K̂]`.
    pub fn row(&self, i: usize) -> [f64; 4] {
        [self.k[i][0], self.k[i][1], self.k_hat[i][0], self.k_hat[i][1]]
    }
}

/// The named couplings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// `K = I`, `K̂ = 0`: the distance contracts deterministically.
    Synchronous,
    /// `K = diag(−1, 1)`, `K̂ = 0`: the radial noise is mirrored.
    Reflection,
    /// `K = diag(1, −1)`, `K̂ = 0`: the distance grows towards the cut locus.
    Perverse,
    /// `K = diag(1, cos √k R)`, `K̂ = diag(0, sin √k R)`: the distance is frozen.
    FixedDistance,
    /// `K = diag(−1, cos √k R)`, `K̂ = diag(0, sin √k R)`: reflection with
    /// independent tangential noise, driftless distance.
    ReflectionNoise,
}

impl Strategy {
    /// All strategies, in a stable order.
    pub const ALL: [Strategy; 5] = [
        Strategy::Synchronous,
        Strategy::Reflection,
        Strategy::Perverse,
        Strategy::FixedDistance,
        Strategy::ReflectionNoise,
    ];

    /// Stable lowercase identifier.
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Synchronous => "synchronous",
            Strategy::Reflection => "reflection",
            Strategy::Perverse => "perverse",
            Strategy::FixedDistance => "fixed_distance",
            Strategy::ReflectionNoise => "reflection_noise",
        }
    }

    /// Control pair at separation `r` on the surface of curvature `k`.
    ///
    /// The two variants carrying extra tangential noise need
    /// `cos² √k R + sin² √k R = 1`, hence `k ≥ 0`.
    pub fn control(self, r: f64, k: f64) -> Result<ControlPair> {
        let id = [[1.0, 0.0], [0.0, 1.0]];
        let zero = [[0.0, 0.0], [0.0, 0.0]];
        match self {
            Strategy::Synchronous => ControlPair::new(id, zero),
            Strategy::Reflection => ControlPair::new([[-1.0, 0.0], [0.0, 1.0]], zero),
            Strategy::Perverse => ControlPair::new([[1.0, 0.0], [0.0, -1.0]], zero),
            Strategy::FixedDistance | Strategy::ReflectionNoise => {
                if k < 0.0 {
                    return Err(CouplingError::UnsupportedCurvature {
                        strategy: self.name(),
                        k,
                    });
                }
                let radial = if self == Strategy::FixedDistance { 1.0 } else { -1.0 };
                let c = cs(k, r);
                let s = if k == 0.0 { 0.0 } else { k.sqrt() * sn(k, r) };
                ControlPair::new([[radial, 0.0], [0.0, c]], [[0.0, 0.0], [0.0, s]])
            }
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = CouplingError;
    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s || st.name().replace('_', "-") == s)
            .ok_or_else(|| CouplingError::InvalidParameter(format!("unknown strategy '{s}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_strategies_are_valid_controls() {
        for st in Strategy::ALL {
            for r in [0.1, 1.0, 2.5] {
                let c = st.control(r, 1.0).unwrap();
                assert!(c.residual() <= CONTROL_TOLERANCE, "{st} at {r}");
            }
        }
    }

    #[test]
    fn invalid_control_rejected() {
        let err = ControlPair::new([[1.0, 0.0], [0.0, 1.0]], [[0.1, 0.0], [0.0, 0.0]]);
        assert!(matches!(err, Err(CouplingError::InvalidControl { .. })));
    }

    #[test]
    fn tangential_noise_variants_need_nonnegative_curvature() {
        assert!(Strategy::FixedDistance.control(1.0, -1.0).is_err());
        assert!(Strategy::ReflectionNoise.control(1.0, 0.0).is_ok());
    }

    #[test]
    fn strategy_names_round_trip() {
        for st in Strategy::ALL {
            assert_eq!(st.name().parse::<Strategy>().unwrap(), st);
        }
        assert_eq!("fixed-distance".parse::<Strategy>().unwrap(), Strategy::FixedDistance);
        assert!("mirror".parse::<Strategy>().is_err());
    }
}
