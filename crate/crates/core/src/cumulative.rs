//! Cumulative-integral tables and the two cache layers that make the nested
//! triple integrals tractable.
//!
//! `CumulativeFn` stores the running integral of an integrand at a knot grid
//! (knots include every integrand breakpoint) and answers interior queries
//! with cubic Hermite interpolation, which matches the integrand values at
//! the knots because C'(t) = f(t).

use crate::problem::{CoeffSum, Problem};
use crate::quad::{integrate, IntegralValue, QuadError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("query {t} outside cache range [{lo}, {hi}]; rebuild with a wider range")]
    CacheMiss { t: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// Running integral C(t) = int_{t0}^{t} f with per-interval error bounds.
#[derive(Debug, Clone)]
pub struct CumulativeFn {
    pub t0: f64,
    knots: Vec<f64>,
    values: Vec<f64>,
    /// integrand at knots, for Hermite slopes
    slopes: Vec<f64>,
    /// max interpolation + quadrature error per interval
    interval_err: Vec<f64>,
    pub tol: f64,
}

impl CumulativeFn {
    /// Build a table over `[t0, t_end]`. Knots: supplied breakpoints plus
    /// uniform refinement until the interpolation check meets `tol`.
    pub fn build(
        f: &mut dyn FnMut(f64) -> f64,
        t0: f64,
        t_end: f64,
        tol: f64,
        breakpoints: &[f64],
    ) -> Result<Self, CacheError> {
        assert!(t_end > t0, "cumulative table needs t_end > t0");
        let mut knots: Vec<f64> = vec![t0];
        for &b in breakpoints {
            if b > t0 && b < t_end {
                knots.push(b);
            }
        }
        knots.push(t_end);
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        knots.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (1.0 + a.abs()));

        // cap knot spacing so interpolation error stays in check
        let max_h = ((t_end - t0) / 64.0).min(1.0).max(1e-6);
        let mut refined = Vec::with_capacity(knots.len() * 2);
        for w in knots.windows(2) {
            refined.push(w[0]);
            let gap = w[1] - w[0];
            if gap > max_h {
                let parts = (gap / max_h).ceil() as usize;
                for k in 1..parts {
                    refined.push(w[0] + gap * k as f64 / parts as f64);
                }
            }
        }
        refined.push(t_end);
        let knots = refined;

        let n = knots.len();
        let mut values = vec![0.0; n];
        let mut slopes = vec![0.0; n];
        let mut interval_err = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            slopes[i] = f(knots[i]);
        }
        let per_interval_tol = tol / n as f64;
        for i in 1..n {
            let seg = integrate(f, knots[i - 1], knots[i], per_interval_tol, &[])?;
            values[i] = values[i - 1] + seg.value;
            // interpolation check at the midpoint
            let mid = 0.5 * (knots[i - 1] + knots[i]);
            let direct = integrate(f, knots[i - 1], mid, per_interval_tol, &[])?;
            let hermite = hermite_eval(
                knots[i - 1],
                knots[i],
                values[i - 1],
                values[i],
                slopes[i - 1],
                slopes[i],
                mid,
            );
            let interp_err = (hermite - (values[i - 1] + direct.value)).abs();
            interval_err[i - 1] = seg.error_bound + interp_err + direct.error_bound;
        }
        Ok(CumulativeFn {
            t0,
            knots,
            values,
            slopes,
            interval_err,
            tol,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.t0, *self.knots.last().unwrap())
    }

    pub fn query(&self, t: f64) -> Result<f64, CacheError> {
        let (lo, hi) = self.range();
        // tolerate float slop at the edges
        if t < lo - 1e-9 || t > hi + 1e-9 {
            return Err(CacheError::CacheMiss { t, lo, hi });
        }
        let t = t.clamp(lo, hi);
        let i = match self
            .knots
            .binary_search_by(|k| k.partial_cmp(&t).unwrap())
        {
            Ok(i) => return Ok(self.values[i]),
            Err(i) => i.clamp(1, self.knots.len() - 1),
        };
        Ok(hermite_eval(
            self.knots[i - 1],
            self.knots[i],
            self.values[i - 1],
            self.values[i],
            self.slopes[i - 1],
            self.slopes[i],
            t,
        ))
    }

    pub fn query_err(&self, t: f64) -> f64 {
        let (lo, hi) = self.range();
        let t = t.clamp(lo, hi);
        match self.knots.binary_search_by(|k| k.partial_cmp(&t).unwrap()) {
            Ok(i) => {
                if i == 0 {
                    0.0
                } else {
                    self.cumulative_err(i)
                }
            }
            Err(i) => self.cumulative_err(i.clamp(1, self.knots.len() - 1)),
        }
    }

    fn cumulative_err(&self, up_to_interval: usize) -> f64 {
        self.interval_err[..up_to_interval].iter().sum()
    }

    pub fn max_err(&self) -> f64 {
        self.interval_err.iter().sum()
    }

    pub fn knot_count(&self) -> usize {
        self.knots.len()
    }
}

#[allow(clippy::too_many_arguments)]
fn hermite_eval(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    /// Running integral of the total coefficient sum.
    P,
    /// Running integral of sum_k p_k(xi) * exp(P(xi) - P(tau_k(xi))).
    Q,
}

/// Shared immutable caches for the nested exponent layers.
///
/// Lower integration limits clamp to t0: data before the start of the
/// equation contributes nothing, which only weakens values near startup and
/// leaves the periodic steady state untouched.
pub struct LayerCaches {
    pub p_total: CumulativeFn,
    pub per_term: Vec<CumulativeFn>,
    pub q: CumulativeFn,
}

impl LayerCaches {
    pub fn build(problem: &Problem, t_end: f64, tol: f64) -> Result<Self, CacheError> {
        let t0 = problem.t0_f64();
        let bks = problem.breakpoints_in(t0, t_end);
        let sum = CoeffSum::new(problem);
        let p_total = CumulativeFn::build(&mut |t| sum.value(t), t0, t_end, tol / 100.0, &bks)?;
        let mut per_term = Vec::with_capacity(problem.m());
        for term in &problem.terms {
            let c = term.coeff.compile();
            per_term.push(CumulativeFn::build(
                &mut |t| c.value(t),
                t0,
                t_end,
                tol / 100.0,
                &bks,
            )?);
        }
        // Q layer: integrand needs tau preimages as additional kink locations;
        // the knot refinement and adaptive panels absorb the rest.
        let coeffs: Vec<_> = problem.terms.iter().map(|t| t.coeff.compile()).collect();
        let args: Vec<_> = problem.terms.iter().map(|t| t.arg.clone()).collect();
        let p_ref = &p_total;
        let q = CumulativeFn::build(
            &mut |xi| {
                let mut acc = 0.0;
                for (c, a) in coeffs.iter().zip(&args) {
                    let tau = xi - a.amount.compile().value(xi);
                    let lower = tau.max(t0);
                    let inner = p_ref.query(xi).unwrap_or(0.0) - p_ref.query(lower).unwrap_or(0.0);
                    acc += c.value(xi) * inner.exp();
                }
                acc
            },
            t0,
            t_end,
            tol / 10.0,
            &bks,
        )?;
        Ok(LayerCaches {
            p_total,
            per_term,
            q,
        })
    }

    /// Integral of the requested layer over `[from, to]` via cache differences.
    pub fn layer_integral(&self, layer: Layer, from: f64, to: f64) -> Result<IntegralValue, CacheError> {
        let table = match layer {
            Layer::P => &self.p_total,
            Layer::Q => &self.q,
        };
        let hi = table.query(to)?;
        let lo = table.query(from)?;
        Ok(IntegralValue {
            value: hi - lo,
            error_bound: table.query_err(to) + table.query_err(from),
            evaluations: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delay::DelayArg;
    use crate::piecewise::{rat, rat_i, PiecewiseFn};
    use crate::problem::Term;

    fn const_problem(p: f64, d: f64) -> Problem {
        Problem::new(
            rat_i(0),
            vec![Term {
                coeff: PiecewiseFn::constant(rat_i(0), rat(p)),
                arg: DelayArg::constant(rat_i(0), rat(d)),
            }],
        )
    }

    #[test]
    fn zero_integrand_gives_zero_table() {
        let c = CumulativeFn::build(&mut |_| 0.0, 0.0, 10.0, 1e-10, &[]).unwrap();
        for t in [0.0, 3.7, 10.0] {
            assert_eq!(c.query(t).unwrap(), 0.0);
        }
    }

    #[test]
    fn constant_integrand_is_exact_at_knots() {
        let c = CumulativeFn::build(&mut |_| 0.7, 0.0, 20.0, 1e-10, &[5.0]).unwrap();
        assert!((c.query(5.0).unwrap() - 3.5).abs() < 1e-12);
        assert!((c.query(20.0).unwrap() - 14.0).abs() < 1e-12);
        assert!((c.query(13.3).unwrap() - 0.7 * 13.3).abs() < 1e-10);
    }

    #[test]
    fn cache_and_direct_quadrature_agree() {
        use rand::{Rng, SeedableRng};
        let mut f = |t: f64| (0.5 * t).sin().abs() + 0.1;
        let c = CumulativeFn::build(&mut f, 0.0, 30.0, 1e-8, &[]).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let t = rng.gen_range(0.0..30.0);
            let direct = integrate(&mut f, 0.0, t, 1e-10, &[]).unwrap();
            let delta = (c.query(t).unwrap() - direct.value).abs();
            assert!(
                delta <= c.query_err(t) + direct.error_bound + 1e-9,
                "t = {t}: delta {delta}"
            );
        }
    }

    #[test]
    fn refining_halves_the_error() {
        // builder refinement is driven by breakpoints: compare coarse/fine
        let mut f = |t: f64| (t * t * t * t).sin() * 0.0 + t.exp() / 1e3;
        let coarse = CumulativeFn::build(&mut f, 0.0, 4.0, 1e-6, &[]).unwrap();
        let fine_bks: Vec<f64> = (1..40).map(|k| k as f64 * 0.1).collect();
        let fine = CumulativeFn::build(&mut f, 0.0, 4.0, 1e-6, &fine_bks).unwrap();
        assert!(fine.max_err() * 2.0 <= coarse.max_err() + 1e-15);
    }

    #[test]
    fn cache_miss_reported() {
        let c = CumulativeFn::build(&mut |_| 1.0, 0.0, 5.0, 1e-8, &[]).unwrap();
        assert!(matches!(c.query(5.5), Err(CacheError::CacheMiss { .. })));
    }

    #[test]
    fn q_layer_unit_coefficient_unit_delay() {
        // p = 1, tau = t - 1: Q'(xi) = e for xi >= 1, so Q(t) - Q(t-1) = e
        let p = const_problem(1.0, 1.0);
        let caches = LayerCaches::build(&p, 40.0, 1e-8).unwrap();
        let v = caches.layer_integral(Layer::Q, 19.0, 20.0).unwrap();
        assert!((v.value - std::f64::consts::E).abs() < 1e-7, "{}", v.value);
    }

    #[test]
    fn p_layer_constant_sum() {
        let p = Problem::new(
            rat_i(0),
            vec![
                Term {
                    coeff: PiecewiseFn::constant(rat_i(0), rat(0.1)),
                    arg: DelayArg::constant(rat_i(0), rat_i(1)),
                },
                Term {
                    coeff: PiecewiseFn::constant(rat_i(0), rat(0.2)),
                    arg: DelayArg::constant(rat_i(0), rat_i(2)),
                },
            ],
        );
        let caches = LayerCaches::build(&p, 10.0, 1e-8).unwrap();
        let v = caches.layer_integral(Layer::P, 2.0, 4.0).unwrap();
        assert!((v.value - 0.6).abs() < 1e-10);
    }

    #[test]
    fn p_layer_zero_over_gap() {
        use crate::piecewise::{Continuation, Pattern, Piece};
        // bursty coefficient: 0.9 on [3k, 3k+0.6), 0 elsewhere
        let bursty = PiecewiseFn::new(
            rat_i(0),
            vec![],
            Continuation::Periodic(Pattern {
                start: rat_i(0),
                period: rat_i(3),
                pieces: vec![
                    Piece::constant(rat_i(0), rat(0.6), rat(0.9)),
                    Piece::constant(rat(0.6), rat_i(3), rat_i(0)),
                ],
            }),
        )
        .unwrap();
        let p = Problem::new(
            rat_i(0),
            vec![Term {
                coeff: bursty,
                arg: DelayArg::constant(rat_i(0), rat(0.6)),
            }],
        );
        let caches = LayerCaches::build(&p, 30.0, 1e-8).unwrap();
        let v = caches.layer_integral(Layer::P, 7.0, 8.9).unwrap();
        assert!(v.value.abs() < 1e-10, "{}", v.value);
    }
}
