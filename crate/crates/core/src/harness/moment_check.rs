//! Monte Carlo validation of one-step moments.
//!
//! For a strategy and a grid of separations, many independent single steps of
//! length `dt` are taken from the same configuration and the empirical mean,
//! variance and covariance of `(ΔR, ΔA)` are compared with their predictions
//! through z-scores.  The reduced backend is compared with the exact
//! Euler moments `rate · dt`; the surface backend with the same rates plus the
//! second-order contributions of the distance and area Hessians (see
//! [`manifold_step_moments`]), which is what makes degenerate directions such
//! as the synchronous `Var ΔR = O(dt²)` testable.

use serde::{Deserialize, Serialize};

use super::Backend;
use crate::error::Result;
use crate::sde::moments::{manifold_step_moments, reduced_step_moments};
use crate::sde::{
    moments, CouplingBackend, CouplingState, GaussianNoise, MomentSet, NoiseSource, ReducedState,
    StepMoments, Strategy,
};
use crate::surface::Surface;

/// One compared statistic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentZ {
    pub empirical: f64,
    pub predicted: f64,
    /// Monte Carlo standard error of the empirical value.
    pub se: f64,
    /// `(empirical − predicted)/se`; zero when both agree exactly.
    pub z: f64,
    /// The statistic is deterministic (`se` at rounding level) and matches
    /// its prediction to `1e-12`.
    pub exact: bool,
}

impl MomentZ {
    fn new(empirical: f64, predicted: f64, se: f64) -> Self {
        let diff = empirical - predicted;
        // A standard error at rounding level means every sample was equal.
        let deterministic = se <= 1e-12 * empirical.abs().max(predicted.abs());
        if !deterministic {
            Self {
                empirical,
                predicted,
                se,
                z: diff / se,
                exact: false,
            }
        } else {
            let exact = diff.abs() <= 1e-12 * (1.0 + predicted.abs());
            Self {
                empirical,
                predicted,
                se,
                z: if exact { 0.0 } else { f64::INFINITY },
                exact,
            }
        }
    }
}

/// Comparison at one separation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub strategy: Strategy,
    pub r: f64,
    /// Continuous-time rates of the reduced diffusion.
    pub rates: MomentSet,
    pub mean_r: MomentZ,
    pub var_r: MomentZ,
    pub mean_a: MomentZ,
    pub var_a: MomentZ,
    pub cov_ra: MomentZ,
}

impl MomentCheck {
    pub fn all(&self) -> [(&'static str, MomentZ); 5] {
        [
            ("mean_r", self.mean_r),
            ("var_r", self.var_r),
            ("mean_a", self.mean_a),
            ("var_a", self.var_a),
            ("cov_ra", self.cov_ra),
        ]
    }

    pub fn max_abs_z(&self) -> f64 {
        self.all().iter().map(|(_, m)| m.z.abs()).fold(0.0, f64::max)
    }
}

/// Result of [`validate_moments`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub backend: Backend,
    pub k: f64,
    pub dt: f64,
    pub n_samples: u64,
    pub checks: Vec<MomentCheck>,
}

impl MomentReport {
    pub fn max_abs_z(&self) -> f64 {
        self.checks.iter().map(MomentCheck::max_abs_z).fold(0.0, f64::max)
    }

    /// Whether every `|z|` is at most `z_max`.
    pub fn passes(&self, z_max: f64) -> bool {
        self.max_abs_z() <= z_max
    }
}

fn one_step(backend: Backend, strategy: Strategy, k: f64, r: f64, dt: f64, noise: &mut GaussianNoise) -> Result<(f64, f64)> {
    let inc = noise.increments(dt);
    let mut state: Box<dyn CouplingBackend> = match backend {
        Backend::Reduced => Box::new(ReducedState::new(k, r, 0.0)?),
        Backend::Manifold => Box::new(CouplingState::at_distance(Surface::new(k)?, r, 0.0)?),
    };
    let r0 = state.distance();
    state.step(strategy, &inc, dt)?;
    Ok((state.distance() - r0, state.area()))
}

fn compare(samples: &[(f64, f64)], predicted: &StepMoments) -> [MomentZ; 5] {
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let centered: Vec<(f64, f64)> = samples.iter().map(|&(x, y)| (x - mx, y - my)).collect();
    let mean_of = |f: &dyn Fn(f64, f64) -> f64| centered.iter().map(|&(x, y)| f(x, y)).sum::<f64>() / n;
    let vx = mean_of(&|x, _| x * x);
    let vy = mean_of(&|_, y| y * y);
    let cxy = mean_of(&|x, y| x * y);
    let se_var = |v: f64, f: &dyn Fn(f64, f64) -> f64| {
        (mean_of(&|x, y| (f(x, y) - v).powi(2)) / n).sqrt()
    };
    [
        MomentZ::new(mx, predicted.mean_r, (vx / n).sqrt()),
        MomentZ::new(vx, predicted.var_r, se_var(vx, &|x, _| x * x)),
        MomentZ::new(my, predicted.mean_a, (vy / n).sqrt()),
        MomentZ::new(vy, predicted.var_a, se_var(vy, &|_, y| y * y)),
        MomentZ::new(cxy, predicted.cov_ra, se_var(cxy, &|x, y| x * y)),
    ]
}

/// Empirical one-step moments of `backend` under `strategy` at each
/// separation of `r_grid`, against their predictions.
pub fn validate_moments(
    backend: Backend,
    strategy: Strategy,
    k: f64,
    r_grid: &[f64],
    n_samples: u64,
    dt: f64,
    seed: u64,
) -> Result<MomentReport> {
    let mut checks = Vec::with_capacity(r_grid.len());
    for (i, &r) in r_grid.iter().enumerate() {
        let ctrl = strategy.control(r, k)?;
        let predicted = match backend {
            Backend::Reduced => reduced_step_moments(&ctrl, r, k, dt),
            Backend::Manifold => manifold_step_moments(&ctrl, r, k, dt),
        };
        let mut noise = GaussianNoise::new(seed, i as u64);
        let samples = (0..n_samples)
            .map(|_| one_step(backend, strategy, k, r, dt, &mut noise))
            .collect::<Result<Vec<_>>>()?;
        let [mean_r, var_r, mean_a, var_a, cov_ra] = compare(&samples, &predicted);
        checks.push(MomentCheck {
            strategy,
            r,
            rates: moments(&ctrl, r, k),
            mean_r,
            var_r,
            mean_a,
            var_a,
            cov_ra,
        });
    }
    Ok(MomentReport {
        backend,
        k,
        dt,
        n_samples,
        checks,
    })
}
