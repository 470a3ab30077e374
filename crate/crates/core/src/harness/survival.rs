//! Survival curves of the coupling time.
//!
//! By Aldous' inequality `P(τ > t) ≥ d_TV(law of X_t, law of Y_t)`, so the
//! empirical survival curve of a coupling bounds the total-variation distance
//! between the two marginal laws from above.

use serde::{Deserialize, Serialize};

use crate::error::{CouplingError, Result};
use crate::kendall::{Outcome, StoppingRecord};

/// Estimates of `P(τ > t)` on a grid with 95% normal-approximation
/// half-widths `1.96 √(p(1−p)/n)`.
///
/// Runs that did not couple count as surviving at every grid point.  The
/// normal approximation is unreliable where fewer than 20 trials survive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    pub grid: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub ci_half_width: Vec<f64>,
    pub n: u64,
}

/// Empirical survival function of `records` on `grid` (sorted ascending).
pub fn survival_curve(records: &[StoppingRecord], grid: &[f64]) -> Result<SurvivalCurve> {
    if records.is_empty() {
        return Err(CouplingError::InvalidParameter(
            "survival curve needs at least one record".into(),
        ));
    }
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(CouplingError::InvalidParameter("survival grid must be sorted".into()));
    }
    let n = records.len();
    let mut taus: Vec<f64> = records
        .iter()
        .map(|r| match r.outcome {
            Outcome::Coupled => r.tau,
            _ => f64::INFINITY,
        })
        .collect();
    taus.sort_by(f64::total_cmp);
    let mut p_hat = Vec::with_capacity(grid.len());
    let mut ci = Vec::with_capacity(grid.len());
    let mut done = 0;
    for &t in grid {
        while done < n && taus[done] <= t {
            done += 1;
        }
        let p = (n - done) as f64 / n as f64;
        p_hat.push(p);
        ci.push(1.96 * (p * (1.0 - p) / n as f64).sqrt());
    }
    Ok(SurvivalCurve {
        grid: grid.to_vec(),
        p_hat,
        ci_half_width: ci,
        n: n as u64,
    })
}

/// Upper bounds `(t, bound, ci)` on the total-variation distance between
/// the marginal laws at time `t`: the survival estimates themselves.
pub fn tv_upper_bound(curve: &SurvivalCurve) -> Vec<(f64, f64, f64)> {
    curve
        .grid
        .iter()
        .zip(&curve.p_hat)
        .zip(&curve.ci_half_width)
        .map(|((&t, &p), &c)| (t, p, c))
        .collect()
}

/// `points` equally spaced times from 0 to the largest finite `tau`.
pub fn default_grid(records: &[StoppingRecord], points: usize) -> Vec<f64> {
    let t_end = records
        .iter()
        .map(|r| r.tau)
        .filter(|t| t.is_finite())
        .fold(0.0, f64::max);
    let points = points.max(2);
    (0..points)
        .map(|i| t_end * i as f64 / (points - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kendall::{Diagnostics, PathAudit};

    fn rec(outcome: Outcome, tau: f64) -> StoppingRecord {
        StoppingRecord {
            outcome,
            tau,
            phase_switch_count: 0,
            final_r: 0.0,
            final_a: 0.0,
            restarts: 0,
            audit: PathAudit::default(),
            diagnostics: Diagnostics::default(),
        }
    }

    #[test]
    fn curve_is_a_monotone_step_function() {
        let recs = vec![
            rec(Outcome::Coupled, 1.0),
            rec(Outcome::Coupled, 2.0),
            rec(Outcome::TimedOut, 5.0),
            rec(Outcome::Coupled, 3.0),
        ];
        let c = survival_curve(&recs, &[0.0, 1.0, 2.5, 10.0]).unwrap();
        assert_eq!(c.p_hat, vec![1.0, 0.75, 0.5, 0.25]);
        assert_eq!(c.ci_half_width[0], 0.0);
        assert!(survival_curve(&[], &[0.0]).is_err());
    }

    #[test]
    fn all_coupled_gives_zero_tail() {
        let recs = vec![rec(Outcome::Coupled, 1.0), rec(Outcome::Coupled, 0.5)];
        let c = survival_curve(&recs, &default_grid(&recs, 5)).unwrap();
        assert_eq!(*c.p_hat.last().unwrap(), 0.0);
        assert_eq!(tv_upper_bound(&c).len(), 5);
    }
}
