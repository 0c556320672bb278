//! One-dimensional search and limit extrapolation kernels.

use crate::error::{Error, Result};

const INV_GOLD: f64 = 0.381_966_011_250_105_2; // 2 - phi

/// Golden-section minimization of `f` on `[a, b]`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut x1 = a + INV_GOLD * (b - a);
    let mut x2 = b - INV_GOLD * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0usize;
    while (b - a).abs() > tol && iters < 200 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + INV_GOLD * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - INV_GOLD * (b - a);
            f2 = f(x2);
        }
        iters += 1;
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Aitken delta-squared acceleration of three consecutive iterates.
pub fn aitken(a0: f64, a1: f64, a2: f64) -> f64 {
    let d1 = a1 - a0;
    let d2 = a2 - a1;
    let denom = d2 - d1;
    if denom.abs() < 1e-3 * d2.abs().max(d1.abs()) || denom == 0.0 {
        return a2;
    }
    a2 - d2 * d2 / denom
}

/// Parameters of the geometric limit schedule `t_j = 2^j`.
#[derive(Debug, Clone, Copy)]
pub struct LimitSchedule {
    pub max_steps: usize,
    pub tolerance: f64,
}

impl Default for LimitSchedule {
    fn default() -> Self {
        Self {
            max_steps: 40,
            tolerance: 1e-8,
        }
    }
}

/// Result of a converged limit computation.
#[derive(Debug, Clone)]
pub struct LimitOutcome {
    /// Aitken-extrapolated limit.
    pub value: f64,
    /// Number of schedule steps actually taken.
    pub steps: usize,
    /// Raw iterates along the schedule.
    pub iterates: Vec<f64>,
}

/// Runs `f` along the geometric schedule `t = 2^j` until two successive
/// values differ by less than the tolerance, then extrapolates the last
/// three iterates with Aitken's formula.
pub fn geometric_limit(
    schedule: &LimitSchedule,
    context: &str,
    f: impl Fn(f64) -> f64,
) -> Result<LimitOutcome> {
    let mut iterates = Vec::with_capacity(schedule.max_steps);
    for j in 0..schedule.max_steps {
        let t = (j as f64).exp2();
        let a = f(t);
        if !a.is_finite() {
            return Err(Error::NonConvergence {
                steps: j + 1,
                prev: iterates.last().copied().unwrap_or(f64::NAN),
                last: a,
                context: context.to_string(),
            });
        }
        iterates.push(a);
        let n = iterates.len();
        if n >= 3 && (iterates[n - 1] - iterates[n - 2]).abs() < schedule.tolerance {
            let value = aitken(iterates[n - 3], iterates[n - 2], iterates[n - 1]);
            return Ok(LimitOutcome {
                value,
                steps: n,
                iterates,
            });
        }
    }
    let n = iterates.len();
    Err(Error::NonConvergence {
        steps: n,
        prev: if n >= 2 { iterates[n - 2] } else { f64::NAN },
        last: if n >= 1 { iterates[n - 1] } else { f64::NAN },
        context: context.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_min() {
        let (x, fx) = golden_section_min(|x| (x - 1.25).powi(2), 0.0, 3.0, 1e-12);
        assert!((x - 1.25).abs() < 1e-9);
        assert!(fx < 1e-18);
    }

    #[test]
    fn aitken_accelerates_geometric_tail() {
        // a + c * 2^{-j}
        let seq: Vec<f64> = (0..3).map(|j| 3.0 + 0.5 * (0.5f64).powi(j + 10)).collect();
        let v = aitken(seq[0], seq[1], seq[2]);
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_limit_converges_on_inverse_decay() {
        let out = geometric_limit(&LimitSchedule::default(), "test", |t| 2.0 + 1.0 / t).unwrap();
        assert!((out.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn geometric_limit_reports_oscillation() {
        let sched = LimitSchedule {
            max_steps: 20,
            tolerance: 1e-10,
        };
        let err = geometric_limit(&sched, "osc", |t| {
            if (t.log2().round() as u64) % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        });
        assert!(err.is_err());
    }
}
