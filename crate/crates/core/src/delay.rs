//! Retarded arguments tau(t) = t - d(t) and their non-decreasing sup-envelopes.
//!
//! A `DelayArg` stores the delay amount d(t) >= 0, which makes tau(t) <= t
//! structural. The envelope sigma(t) = sup_{s<=t} tau(s) is computed exactly
//! for piecewise-affine arguments by a running-max sweep over rational affine
//! pieces; a fine-grid fallback covers higher-degree pieces.

use crate::piecewise::{
    rat, rat_i, to_f64, AffinePiece, Continuation, Pattern, Piece, PiecewiseError, PiecewiseFn,
    Rational,
};
use num::{BigInt, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct DelayArg {
    /// The delay amount d(t) = t - tau(t), in time units.
    pub amount: PiecewiseFn,
}

#[derive(Debug, Error)]
pub enum DelayError {
    #[error("delay amount dips to {min} (must stay >= 0)")]
    NegativeDelay { min: f64 },
    #[error("retarded argument does not tend to +inf (tail slope of t - d(t) is {slope})")]
    ArgumentBounded { slope: f64 },
    #[error(transparent)]
    Piecewise(#[from] PiecewiseError),
}

impl DelayArg {
    pub fn new(amount: PiecewiseFn) -> Result<Self, DelayError> {
        if !amount.is_nonnegative(0.0) {
            let (min, _) = amount.extrema_in(to_f64(&amount.t0), to_f64(&amount.t0) + 1.0);
            return Err(DelayError::NegativeDelay { min });
        }
        // tau(t) = t - d(t) must tend to +inf: bounded d on the pattern is
        // enough; a tail needs slope(d) < 1.
        if let Continuation::Tail(tail) = &amount.continuation {
            let slope = tail.coeffs.get(1).cloned().unwrap_or_else(Rational::zero);
            if slope >= rat_i(1) {
                return Err(DelayError::ArgumentBounded {
                    slope: to_f64(&slope),
                });
            }
        }
        Ok(DelayArg { amount })
    }

    pub fn constant(t0: Rational, d: Rational) -> Self {
        DelayArg {
            amount: PiecewiseFn::constant(t0, d),
        }
    }

    pub fn t0(&self) -> f64 {
        to_f64(&self.amount.t0)
    }

    pub fn tau(&self, t: f64) -> Result<f64, PiecewiseError> {
        Ok(t - self.amount.eval(t)?)
    }

    /// Exact decision for piecewise-affine arguments; derivative sign analysis
    /// on each piece otherwise.
    pub fn is_nondecreasing(&self, a: f64, b: f64) -> bool {
        match self.amount.affine_pieces_in(&rat(a), &rat(b)) {
            Ok(pieces) => {
                let mut prev_end_val: Option<(Rational, Rational)> = None;
                for p in &pieces {
                    // tau slope = 1 - c1
                    if p.c1 > rat_i(1) {
                        return false;
                    }
                    let tau_at = |t: &Rational| t - p.eval(t);
                    if let Some((edge, left)) = prev_end_val.take() {
                        if tau_at(&edge) < left {
                            return false;
                        }
                    }
                    prev_end_val = Some((p.to.clone(), tau_at(&p.to)));
                }
                true
            }
            Err(_) => {
                // nonlinear pieces: sample the derivative sign on a fine grid
                let n = 4000;
                let mut prev = None;
                for i in 0..=n {
                    let t = a + (b - a) * i as f64 / n as f64;
                    let tau = t - self.amount.eval(t).unwrap_or(f64::NAN);
                    if let Some(p) = prev {
                        if tau < p - 1e-12 {
                            return false;
                        }
                    }
                    prev = Some(tau);
                }
                true
            }
        }
    }

    /// Tight (min, max) of the delay amount over `[a, b]`.
    pub fn bounds(&self, a: f64, b: f64) -> (f64, f64) {
        self.amount.extrema_in(a, b)
    }

    /// True when the delay is constant over the whole pattern / tail.
    pub fn is_constant(&self) -> Option<f64> {
        let horizon = to_f64(&self.amount.t0) + pattern_span(&self.amount);
        let (lo, hi) = self.bounds(to_f64(&self.amount.t0), horizon);
        if (hi - lo).abs() <= 1e-12 {
            Some(lo)
        } else {
            None
        }
    }
}

fn pattern_span(f: &PiecewiseFn) -> f64 {
    match &f.continuation {
        Continuation::Periodic(p) => {
            let prelude = f
                .prelude
                .iter()
                .map(|q| to_f64(&q.to) - to_f64(&q.from))
                .sum::<f64>();
            prelude + 2.0 * to_f64(&p.period)
        }
        Continuation::Tail(_) => 100.0,
    }
}

/// Non-decreasing majorant sigma of a retarded argument, stored in delay form
/// g(t) = t - sigma(t) so that sigma <= t stays structural.
#[derive(Debug, Clone)]
pub struct Envelope {
    pub arg: DelayArg,
    /// True when built by the exact affine sweep.
    pub exact: bool,
    /// Grid spacing of the numeric fallback, when used.
    pub resolution: Option<f64>,
}

impl Envelope {
    pub fn sigma(&self, t: f64) -> Result<f64, PiecewiseError> {
        self.arg.tau(t)
    }
}

#[derive(Debug, Error)]
pub enum EnvelopeError {
    #[error("piece degree {0} not supported by the exact envelope sweep")]
    UnsupportedPieceDegree(usize),
    #[error("envelope did not reach a periodic steady state within {0} periods")]
    NoSteadyState(usize),
    #[error(transparent)]
    Piecewise(#[from] PiecewiseError),
    #[error(transparent)]
    Delay(#[from] DelayError),
}

/// Exact running maximum of tau(t) = t - d(t).
///
/// Rising pieces pass through; falling pieces freeze the running max until tau
/// recrosses it. For pattern-periodic d the sweep runs until the envelope
/// increments repeat exactly, then emits an envelope with the same period.
/// Degree >= 2 pieces fall back to a fine-grid numeric running max.
pub fn sup_envelope(tau: &DelayArg) -> Result<Envelope, EnvelopeError> {
    let d = &tau.amount;
    let t0 = d.t0.clone();
    match &d.continuation {
        Continuation::Tail(tail) => {
            if tail.degree() > 1 {
                return grid_fallback(tau, to_f64(&t0) + 100.0);
            }
            let end = {
                let mut e = tail.from.clone() + rat_i(1);
                for p in &d.prelude {
                    if p.degree() > 1 {
                        return grid_fallback(tau, to_f64(&tail.from) + 100.0);
                    }
                    e = e.clone().max(p.to.clone() + rat_i(1));
                }
                e
            };
            let tau_pieces = tau_affine(d, &t0, &end)?;
            let mut sweep = sweep_running_max(&tau_pieces);
            // the final (tail) piece of sigma: tau slope = 1 - c1 with c1 < 1
            // so tau eventually rises; the sweep's last piece is either flat
            // (still frozen, impossible for rising tau at infinity) or tau.
            let last = sweep.pop().ok_or(EnvelopeError::NoSteadyState(0))?;
            let g_tail = Piece::new(
                last.from.clone(),
                last.from.clone(),
                vec![
                    -&last.c0,
                    rat_i(1) - &last.c1,
                ],
            );
            let mut g_pieces = Vec::new();
            for s in &sweep {
                // g = t - sigma = -c0 + (1 - c1) t
                g_pieces.push(Piece::new(
                    s.from.clone(),
                    s.to.clone(),
                    vec![-&s.c0, rat_i(1) - &s.c1],
                ));
            }
            let g = PiecewiseFn::new(t0, g_pieces, Continuation::Tail(g_tail))?;
            Ok(Envelope {
                arg: DelayArg::new(g)?,
                exact: true,
                resolution: None,
            })
        }
        Continuation::Periodic(pat) => {
            for p in d.prelude.iter().chain(pat.pieces.iter()) {
                if p.degree() > 1 {
                    let span = to_f64(&pat.start) + 3.0 * to_f64(&pat.period) + 1.0;
                    return grid_fallback(tau, span);
                }
            }
            let max_periods: usize = 64;
            let period = pat.period.clone();
            for periods in [4usize, 8, 16, 32, max_periods] {
                let end = &pat.start + rat_i(periods as i64) * &period;
                let tau_pieces = tau_affine(d, &t0, &end)?;
                let sweep = sweep_running_max(&tau_pieces);
                if let Some(env) = periodic_from_sweep(&t0, &sweep, &period, &pat.start) {
                    return Ok(env);
                }
                if periods == max_periods {
                    return Err(EnvelopeError::NoSteadyState(max_periods));
                }
            }
            unreachable!()
        }
    }
}

fn tau_affine(
    d: &PiecewiseFn,
    a: &Rational,
    b: &Rational,
) -> Result<Vec<AffinePiece>, EnvelopeError> {
    let pieces = d
        .affine_pieces_in(a, b)
        .map_err(EnvelopeError::UnsupportedPieceDegree)?;
    // tau = t - d = (-c0) + (1 - c1) t
    Ok(pieces
        .into_iter()
        .map(|p| AffinePiece {
            from: p.from,
            to: p.to,
            c0: -p.c0,
            c1: rat_i(1) - p.c1,
        })
        .collect())
}

/// Running max of contiguous affine pieces; output is again affine pieces
/// (flat segments where the max is frozen).
fn sweep_running_max(pieces: &[AffinePiece]) -> Vec<AffinePiece> {
    let mut out: Vec<AffinePiece> = Vec::new();
    let mut m: Option<Rational> = None;
    let mut push = |from: Rational, to: Rational, c0: Rational, c1: Rational| {
        if from >= to {
            return;
        }
        if let Some(last) = out.last_mut() {
            if last.c0 == c0 && last.c1 == c1 && last.to == from {
                last.to = to;
                return;
            }
        }
        out.push(AffinePiece { from, to, c0, c1 });
    };
    for p in pieces {
        let va = p.eval(&p.from);
        let vb = p.eval(&p.to);
        let cur = m.take().unwrap_or_else(|| va.clone());
        let cur = cur.max(va.clone());
        if p.c1 >= Rational::zero() {
            if va >= cur {
                push(p.from.clone(), p.to.clone(), p.c0.clone(), p.c1.clone());
                m = Some(vb.max(cur));
            } else if vb <= cur {
                push(p.from.clone(), p.to.clone(), cur.clone(), Rational::zero());
                m = Some(cur);
            } else {
                // rising from below the frozen max: crossing at x = (cur - c0)/c1
                let x = (&cur - &p.c0) / &p.c1;
                push(p.from.clone(), x.clone(), cur.clone(), Rational::zero());
                push(x, p.to.clone(), p.c0.clone(), p.c1.clone());
                m = Some(vb);
            }
        } else {
            // falling piece: freeze at the running max
            let top = cur.max(va);
            push(p.from.clone(), p.to.clone(), top.clone(), Rational::zero());
            m = Some(top);
        }
    }
    out
}

/// Try to factor the sweep into prelude + a period-P pattern, in delay form.
fn periodic_from_sweep(
    t0: &Rational,
    sweep: &[AffinePiece],
    period: &Rational,
    pattern_start: &Rational,
) -> Option<Envelope> {
    if sweep.is_empty() {
        return None;
    }
    let end = sweep.last().unwrap().to.clone();
    // candidate anchors: pattern_start + k * period
    let mut anchor = pattern_start.clone();
    while &anchor + period + period <= end {
        let a2 = &anchor + period;
        let w1 = clip_window(sweep, &anchor, &a2);
        let w2 = clip_window(sweep, &a2, &(&a2 + period));
        if windows_equal_shifted(&w1, &w2, period) {
            // emit: prelude = sweep on [t0, anchor), pattern local pieces from w1
            let mut g_prelude = Vec::new();
            for s in clip_window(sweep, t0, &anchor) {
                g_prelude.push(Piece::new(
                    s.from.clone(),
                    s.to.clone(),
                    vec![-&s.c0, rat_i(1) - &s.c1],
                ));
            }
            let mut g_local = Vec::new();
            for s in &w1 {
                // local u = t - anchor; sigma = c0 + c1 t = c0 + c1(anchor + u)
                // g = t - sigma = (anchor + u) - c0 - c1 anchor - c1 u
                //   = (anchor - c0 - c1*anchor) + (1 - c1) u
                let g0 = &anchor - &s.c0 - &s.c1 * &anchor;
                g_local.push(Piece::new(
                    &s.from - &anchor,
                    &s.to - &anchor,
                    vec![g0, rat_i(1) - &s.c1],
                ));
            }
            let g = PiecewiseFn::new(
                t0.clone(),
                g_prelude,
                Continuation::Periodic(Pattern {
                    start: anchor.clone(),
                    period: period.clone(),
                    pieces: g_local,
                }),
            )
            .ok()?;
            return Some(Envelope {
                arg: DelayArg::new(g).ok()?,
                exact: true,
                resolution: None,
            });
        }
        anchor = a2;
    }
    None
}

fn clip_window(sweep: &[AffinePiece], a: &Rational, b: &Rational) -> Vec<AffinePiece> {
    let mut out = Vec::new();
    for p in sweep {
        let f = p.from.clone().max(a.clone());
        let t = p.to.clone().min(b.clone());
        if f < t {
            out.push(AffinePiece {
                from: f,
                to: t,
                c0: p.c0.clone(),
                c1: p.c1.clone(),
            });
        }
    }
    out
}

/// Does w2 equal w1 shifted right by `period` (as graphs of tau-like pieces
/// whose values also shift by `period`)?
fn windows_equal_shifted(w1: &[AffinePiece], w2: &[AffinePiece], period: &Rational) -> bool {
    if w1.len() != w2.len() {
        return false;
    }
    for (p, q) in w1.iter().zip(w2) {
        if &p.from + period != q.from || &p.to + period != q.to || p.c1 != q.c1 {
            return false;
        }
        // value shift: q(t + P) = p(t) + P  =>  q.c0 = p.c0 + P - c1 P
        let want = &p.c0 + period - &p.c1 * period;
        if want != q.c0 {
            return false;
        }
    }
    true
}

/// Numeric running max on a fine grid, linearly interpolated.
fn grid_fallback(tau: &DelayArg, span_end: f64) -> Result<Envelope, EnvelopeError> {
    let t0 = tau.t0();
    let n = 10_000usize;
    let h = (span_end - t0) / n as f64;
    let mut pieces = Vec::with_capacity(n);
    let mut m = f64::NEG_INFINITY;
    let mut prev_g = None::<f64>;
    let mut prev_t = t0;
    for i in 0..=n {
        let t = t0 + i as f64 * h;
        m = m.max(tau.tau(t).map_err(DelayError::from)?);
        let g = t - m;
        if let Some(pg) = prev_g {
            let c1 = rat((g - pg) / h);
            let c0 = rat(pg) - &c1 * rat(prev_t);
            pieces.push(Piece::new(rat(prev_t), rat(t), vec![c0, c1]));
        }
        prev_g = Some(g);
        prev_t = t;
    }
    let last_g = prev_g.unwrap();
    let tail = Piece::new(rat(prev_t), rat(prev_t), vec![rat(last_g)]);
    let g = PiecewiseFn::new(rat(t0), pieces, Continuation::Tail(tail))?;
    Ok(Envelope {
        arg: DelayArg::new(g)?,
        exact: false,
        resolution: Some(h),
    })
}

/// Combine per-term arguments pointwise: t - max_i d_i(t) (the latest of the
/// arguments) or t - min_i d_i(t) (the earliest), exact for affine pieces.
pub fn combine_args(
    args: &[&DelayArg],
    take_earliest: bool,
    a: &Rational,
    b: &Rational,
) -> Result<DelayArg, EnvelopeError> {
    assert!(!args.is_empty());
    let mut lists = Vec::new();
    for arg in args {
        lists.push(
            arg.amount
                .affine_pieces_in(a, b)
                .map_err(EnvelopeError::UnsupportedPieceDegree)?,
        );
    }
    // collect all edges
    let mut edges: Vec<Rational> = Vec::new();
    for l in &lists {
        for p in l {
            edges.push(p.from.clone());
            edges.push(p.to.clone());
        }
    }
    edges.sort();
    edges.dedup();
    // on each cell, the candidate affine functions; add crossing points
    let mut cells: Vec<(Rational, Rational)> = Vec::new();
    for w in edges.windows(2) {
        if w[0] < w[1] {
            cells.push((w[0].clone(), w[1].clone()));
        }
    }
    let mut refined: Vec<(Rational, Rational, Rational, Rational)> = Vec::new(); // from,to,c0,c1 of d
    for (f, t) in cells {
        let mut active: Vec<(Rational, Rational)> = Vec::new(); // (c0, c1) per term
        for l in &lists {
            let p = l
                .iter()
                .find(|p| p.from <= f && t <= p.to)
                .expect("cell inside term pieces");
            active.push((p.c0.clone(), p.c1.clone()));
        }
        // subdivide at pairwise crossings inside (f, t)
        let mut cuts = vec![f.clone(), t.clone()];
        for i in 0..active.len() {
            for j in (i + 1)..active.len() {
                let (a0, a1) = &active[i];
                let (b0, b1) = &active[j];
                if a1 != b1 {
                    let x = (b0 - a0) / (a1 - b1);
                    if f < x && x < t {
                        cuts.push(x);
                    }
                }
            }
        }
        cuts.sort();
        cuts.dedup();
        for w in cuts.windows(2) {
            let mid = (&w[0] + &w[1]) / rat_i(2);
            let mut best: Option<(Rational, Rational, Rational)> = None; // (val, c0, c1)
            for (c0, c1) in &active {
                let v = c0 + c1 * &mid;
                let better = match &best {
                    None => true,
                    Some((bv, _, _)) => {
                        if take_earliest {
                            v > *bv
                        } else {
                            v < *bv
                        }
                    }
                };
                if better {
                    best = Some((v, c0.clone(), c1.clone()));
                }
            }
            let (_, c0, c1) = best.unwrap();
            if let Some(last) = refined.last_mut() {
                if last.2 == c0 && last.3 == c1 && last.1 == w[0] {
                    last.1 = w[1].clone();
                    continue;
                }
            }
            refined.push((w[0].clone(), w[1].clone(), c0, c1));
        }
    }
    let mut pieces = Vec::new();
    for (f, t, c0, c1) in &refined {
        pieces.push(Piece::new(f.clone(), t.clone(), vec![c0.clone(), c1.clone()]));
    }
    let tail_from = refined.last().unwrap().1.clone();
    let (c0, c1) = {
        let last = refined.last().unwrap();
        (last.2.clone(), last.3.clone())
    };
    let _ = &pieces.pop(); // last refined cell becomes the tail
    let tail = Piece::new(tail_from.clone(), tail_from, vec![c0, c1]);
    let tail_start = pieces
        .last()
        .map(|p: &Piece| p.to.clone())
        .unwrap_or_else(|| a.clone());
    let tail = Piece::new(tail_start, tail.to.clone(), tail.coeffs.clone());
    let f = PiecewiseFn::new(a.clone(), pieces, Continuation::Tail(tail))?;
    Ok(DelayArg::new(f)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::{rat, rat_i};

    fn sawtooth() -> DelayArg {
        DelayArg::new(
            PiecewiseFn::new(
                rat_i(0),
                vec![],
                Continuation::Periodic(Pattern {
                    start: rat_i(0),
                    period: rat_i(3),
                    pieces: vec![
                        Piece::constant(rat_i(0), rat_i(1), rat_i(1)),
                        Piece::new(rat_i(1), rat_i(2), vec![rat_i(-3), rat_i(4)]),
                        Piece::new(rat_i(2), rat_i(3), vec![rat_i(13), rat_i(-4)]),
                    ],
                }),
            )
            .unwrap(),
        )
        .unwrap()
    }

    fn second_sawtooth() -> DelayArg {
        DelayArg::new(
            PiecewiseFn::new(
                rat_i(0),
                vec![],
                Continuation::Periodic(Pattern {
                    start: rat_i(0),
                    period: rat_i(3),
                    pieces: vec![
                        Piece::constant(rat_i(0), rat_i(1), rat_i(2)),
                        Piece::new(rat_i(1), rat_i(2), vec![rat_i(0), rat_i(2)]),
                        Piece::new(rat_i(2), rat_i(3), vec![rat_i(8), rat_i(-2)]),
                    ],
                }),
            )
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn negative_delay_rejected() {
        let r = DelayArg::new(PiecewiseFn::constant(rat_i(0), rat(-0.5)));
        assert!(matches!(r, Err(DelayError::NegativeDelay { .. })));
    }

    #[test]
    fn unit_delay_is_nondecreasing() {
        let d = DelayArg::constant(rat_i(0), rat_i(1));
        assert!(d.is_nondecreasing(0.0, 50.0));
    }

    #[test]
    fn sawtooth_is_not_nondecreasing() {
        assert!(!sawtooth().is_nondecreasing(0.0, 9.0));
    }

    #[test]
    fn constant_delay_detection() {
        assert_eq!(DelayArg::constant(rat_i(0), rat(0.25)).is_constant(), Some(0.25));
        assert_eq!(sawtooth().is_constant(), None);
    }

    #[test]
    fn sawtooth_bounds() {
        let (lo, hi) = sawtooth().bounds(3.0, 6.0);
        assert_eq!((lo, hi), (1.0, 5.0));
    }

    #[test]
    fn envelope_of_monotone_is_identity() {
        let d = DelayArg::constant(rat_i(0), rat_i(1));
        let env = sup_envelope(&d).unwrap();
        assert!(env.exact);
        for t in [0.0, 1.3, 17.0, 99.5] {
            assert_eq!(env.sigma(t).unwrap(), t - 1.0);
        }
    }

    #[test]
    fn sawtooth_envelope_matches_hand_computation() {
        // sigma: t-1 on [3n, 3n+1], 3n on [3n+1, 3n+2.6], 5t-(12n+13) on [3n+2.6, 3n+3]
        let env = sup_envelope(&sawtooth()).unwrap();
        assert!(env.exact);
        for n in [1i64, 3, 10] {
            let b = 3.0 * n as f64;
            assert!((env.sigma(b + 0.5).unwrap() - (b - 0.5)).abs() < 1e-12);
            assert!((env.sigma(b + 1.0).unwrap() - b).abs() < 1e-12);
            assert!((env.sigma(b + 2.0).unwrap() - b).abs() < 1e-12);
            assert!((env.sigma(b + 2.5).unwrap() - b).abs() < 1e-12);
            // just past 2.6 the envelope follows 5t - (12n + 13)
            let t = b + 2.8;
            assert!((env.sigma(t).unwrap() - (5.0 * t - (12.0 * n as f64 + 13.0))).abs() < 1e-9);
            assert!((env.sigma(b + 3.0).unwrap() - (b + 2.0)).abs() < 1e-12);
        }
        // the plateau must end exactly at local 2.6 = 13/5
        let g = &env.arg.amount;
        let bks = g.breakpoints_in(3.0, 6.0);
        assert!(bks.iter().any(|&x| (x - (3.0 + 2.6)).abs() < 1e-12));
    }

    #[test]
    fn second_sawtooth_envelope_plateau() {
        // plateau value 3n-1 on [3n+1, 3n+7/3]
        let env = sup_envelope(&second_sawtooth()).unwrap();
        assert!(env.exact);
        for n in [2i64, 5] {
            let b = 3.0 * n as f64;
            assert!((env.sigma(b + 1.5).unwrap() - (b - 1.0)).abs() < 1e-12);
            assert!((env.sigma(b + 7.0 / 3.0).unwrap() - (b - 1.0)).abs() < 1e-9);
            assert!((env.sigma(b + 2.5).unwrap() - (3.0 * (b + 2.5) - (2.0 * b + 8.0))).abs() < 1e-9);
        }
    }

    #[test]
    fn envelope_is_idempotent() {
        let env = sup_envelope(&sawtooth()).unwrap();
        let env2 = sup_envelope(&env.arg).unwrap();
        for i in 0..10_000 {
            let t = 0.002 * i as f64;
            let a = env.sigma(t).unwrap();
            let b = env2.sigma(t).unwrap();
            assert!((a - b).abs() < 1e-12, "t = {t}: {a} vs {b}");
        }
        // exact at breakpoints
        for t in [1.0, 2.0, 3.0, 4.0, 7.0] {
            assert_eq!(env.sigma(t).unwrap(), env2.sigma(t).unwrap());
        }
    }

    #[test]
    fn envelope_majorizes_and_is_monotone() {
        let tau = sawtooth();
        let env = sup_envelope(&tau).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=20_000 {
            let t = 0.001 * i as f64;
            let s = env.sigma(t).unwrap();
            assert!(s >= tau.tau(t).unwrap() - 1e-12);
            assert!(s <= t + 1e-12);
            assert!(s >= prev - 1e-12);
            prev = s;
        }
    }

    #[test]
    fn envelope_equals_brute_force_scan() {
        let tau = sawtooth();
        let env = sup_envelope(&tau).unwrap();
        let mut m = f64::NEG_INFINITY;
        let mut i = 0;
        while i <= 50_000 {
            let t = 0.001 * i as f64;
            m = m.max(tau.tau(t).unwrap());
            assert!((env.sigma(t).unwrap() - m).abs() < 1e-9, "t = {t}");
            i += 1;
        }
    }

    #[test]
    fn envelope_with_prelude_then_pattern() {
        // prelude forces a transient: big delay at the start
        let d = DelayArg::new(
            PiecewiseFn::new(
                rat_i(0),
                vec![Piece::constant(rat_i(0), rat_i(2), rat_i(4))],
                Continuation::Periodic(Pattern {
                    start: rat_i(2),
                    period: rat_i(3),
                    pieces: vec![
                        Piece::constant(rat_i(0), rat_i(1), rat_i(1)),
                        Piece::new(rat_i(1), rat_i(2), vec![rat_i(-3), rat_i(4)]),
                        Piece::new(rat_i(2), rat_i(3), vec![rat_i(13), rat_i(-4)]),
                    ],
                }),
            )
            .unwrap(),
        )
        .unwrap();
        let env = sup_envelope(&d).unwrap();
        let mut m = f64::NEG_INFINITY;
        for i in 0..=30_000 {
            let t = 0.001 * i as f64;
            m = m.max(d.tau(t).unwrap());
            assert!((env.sigma(t).unwrap() - m).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn combine_picks_latest_argument() {
        let t1 = sawtooth();
        let t2 = second_sawtooth();
        let latest = combine_args(&[&t1, &t2], true, &rat_i(0), &rat_i(30)).unwrap();
        for i in 0..=2900 {
            let t = 0.01 * i as f64;
            let want = t1.tau(t).unwrap().max(t2.tau(t).unwrap());
            assert!((latest.tau(t).unwrap() - want).abs() < 1e-9, "t = {t}");
        }
    }
}
