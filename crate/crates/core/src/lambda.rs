//! Smallest root of exp(p * lambda) = lambda.
//!
//! For p in [0, 1/e] the smallest root lies in [1, e]; the two roots merge at
//! the tangency p = 1/e (lambda = e) and no real root exists beyond it. The
//! tangency is resolved analytically: near p = 1/e bisection residuals are
//! dominated by cancellation noise, so the argmin of exp(p*l) - l (which is
//! ln(1/p)/p) is used instead.

use std::f64::consts::E;
use thiserror::Error;

pub const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaStar {
    pub p: f64,
    pub lambda: f64,
    /// |exp(p * lambda) - lambda|
    pub residual: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum LambdaError {
    #[error("no real root of exp({p} * x) = x: the liminf constant exceeds 1/e")]
    NoRealRoot { p: f64 },
    #[error("liminf constant must be nonnegative and finite (got {0})")]
    BadInput(f64),
}

/// Smallest root via bisection on [1, argmin], with the tangency handled
/// analytically. Residual <= 1e-12 guaranteed on success.
pub fn lambda_star(p: f64) -> Result<LambdaStar, LambdaError> {
    if !p.is_finite() || p < 0.0 {
        return Err(LambdaError::BadInput(p));
    }
    if p == 0.0 {
        return Ok(LambdaStar {
            p,
            lambda: 1.0,
            residual: 0.0,
        });
    }
    // exact tangency up to floating error in p itself
    if (p * E - 1.0).abs() <= 1e-13 {
        return Ok(LambdaStar {
            p,
            lambda: E,
            residual: ((p * E).exp() - E).abs(),
        });
    }
    let g = |l: f64| (p * l).exp() - l;
    let lo0 = 1.0;
    let hi0 = E;
    if g(hi0) > 0.0 {
        // no sign change on [1, e]: either near-tangent or no root at all
        let lmin = (1.0 / p).ln() / p;
        let gm = g(lmin);
        if gm.abs() <= RESIDUAL_TOL {
            return Ok(LambdaStar {
                p,
                lambda: lmin.min(E),
                residual: gm.abs(),
            });
        }
        return Err(LambdaError::NoRealRoot { p });
    }
    let (mut lo, mut hi) = (lo0, hi0);
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * lo {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let residual = g(lambda).abs();
    debug_assert!(residual <= RESIDUAL_TOL, "residual {residual} at p = {p}");
    Ok(LambdaStar {
        p,
        lambda,
        residual,
    })
}
