//! Damped Newton iteration with a central-difference Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub struct NewtonOptions {
    pub tol: f64,
    /// Residual accepted once the iteration stops making progress; at least `tol`.
    pub accept: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub context: &'static str,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Solves `residual(x) = 0` from `x0`. Trial points where `residual` fails are
/// treated like an increase of the residual and trigger step halving.
pub fn solve<F>(x0: Vec<f64>, opts: &NewtonOptions, mut residual: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let dim = x0.len();
    let mut x = x0;
    let mut r = residual(&x)?;
    let mut norm = max_norm(&r);
    for iter in 0..opts.max_iter {
        if norm <= opts.tol {
            return Ok(x);
        }
        let m = r.len();
        let mut jac = DMatrix::zeros(m, dim);
        let mut xp = x.clone();
        for j in 0..dim {
            let step = opts.fd_step * x[j].abs().max(1.0);
            xp[j] = x[j] + step;
            let rp = residual(&xp);
            xp[j] = x[j] - step;
            let rm = residual(&xp);
            xp[j] = x[j];
            let (rp, rm, denom) = match (rp, rm) {
                (Ok(a), Ok(b)) => (a, b, 2.0 * step),
                (Ok(a), Err(_)) => (a, r.clone(), step),
                (Err(_), Ok(b)) => (r.clone(), b, step),
                (Err(e), Err(_)) => return Err(e),
            };
            for i in 0..m {
                jac[(i, j)] = (rp[i] - rm[i]) / denom;
            }
        }
        let rhs = DVector::from_iterator(m, r.iter().map(|v| -v));
        let delta = jac.lu().solve(&rhs).ok_or(Error::NewtonDiverged {
            context: opts.context,
            residual: norm,
            iterations: iter,
        })?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + lambda * d).collect();
            if let Ok(rt) = residual(&trial) {
                let nt = max_norm(&rt);
                if nt.is_finite() && (nt < norm || nt <= opts.tol) {
                    x = trial;
                    r = rt;
                    norm = nt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm <= opts.tol.max(opts.accept) {
        Ok(x)
    } else {
        Err(Error::NewtonDiverged {
            context: opts.context,
            residual: norm,
            iterations: opts.max_iter,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_small_nonlinear_system() {
        let opts = NewtonOptions {
            tol: 1e-12,
            accept: 1e-12,
            max_iter: 50,
            fd_step: 1e-7,
            context: "test",
        };
        let x = solve(vec![1.0, 1.0], &opts, |x| {
            Ok(vec![x[0] * x[0] + x[1] * x[1] - 4.0, x[0] - x[1]])
        })
        .unwrap();
        assert!((x[0] - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn reports_divergence() {
        let opts = NewtonOptions {
            tol: 1e-12,
            accept: 1e-12,
            max_iter: 50,
            fd_step: 1e-7,
            context: "test",
        };
        let err = solve(vec![1.0], &opts, |x| Ok(vec![x[0] * x[0] + 1.0])).unwrap_err();
        assert!(matches!(err, Error::NewtonDiverged { .. }));
    }
}
