//! Piecewise-polynomial functions of time with an optional eventually-periodic
//! tail pattern.
//!
//! Breakpoints and polynomial coefficients are kept as exact rationals so that
//! envelope construction and pattern arithmetic stay exact; evaluation converts
//! to binary floating point once, at `compile` time.

use num::rational::BigRational;
use num::{BigInt, FromPrimitive, Signed, ToPrimitive, Zero};
use std::fmt;
use thiserror::Error;

pub type Rational = BigRational;

/// Exact conversion: every finite f64 is a dyadic rational.
pub fn rat(x: f64) -> Rational {
    BigRational::from_f64(x).expect("finite float")
}

pub fn rat_i(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parse "7/3", "2.6" or plain integers into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        if frac.is_empty() {
            return Some(BigRational::from_integer(int));
        }
        let fnum: BigInt = frac.parse().ok()?;
        if fnum.is_negative() {
            return None;
        }
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part = BigRational::new(fnum, den);
        let whole = BigRational::from_integer(int);
        return Some(if neg { whole - frac_part } else { whole + frac_part });
    }
    let n: BigInt = s.parse().ok()?;
    Some(BigRational::from_integer(n))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("rational in f64 range")
}

pub const MAX_DEGREE: usize = 3;

/// One polynomial piece on `[from, to)`. For pattern pieces the coordinates are
/// local to the pattern (offsets into `[0, period)`), otherwise absolute time.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub from: Rational,
    pub to: Rational,
    /// c0 + c1 u + c2 u^2 + c3 u^3, low-order first; at most MAX_DEGREE + 1 entries.
    pub coeffs: Vec<Rational>,
}

impl Piece {
    pub fn new(from: Rational, to: Rational, coeffs: Vec<Rational>) -> Self {
        Piece { from, to, coeffs }
    }

    pub fn constant(from: Rational, to: Rational, c: Rational) -> Self {
        Piece::new(from, to, vec![c])
    }

    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| !c.is_zero())
            .unwrap_or(0)
    }

    pub fn eval_rational(&self, u: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * u + c;
        }
        acc
    }

    fn coeffs_f64(&self) -> [f64; 4] {
        let mut c = [0.0; 4];
        for (i, v) in self.coeffs.iter().enumerate().take(4) {
            c[i] = to_f64(v);
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    /// Absolute time at which the pattern takes over.
    pub start: Rational,
    pub period: Rational,
    /// Pieces in local coordinates, covering exactly `[0, period)`.
    pub pieces: Vec<Piece>,
}

/// How the function continues after the last explicit piece.
#[derive(Debug, Clone, PartialEq)]
pub enum Continuation {
    /// Repeat `Pattern.pieces` with the pattern period forever.
    Periodic(Pattern),
    /// Extend a final polynomial (degree <= 1) from `from` to +inf.
    Tail(Piece),
}

#[derive(Debug, Error, PartialEq)]
pub enum PiecewiseError {
    #[error("piece {index}: empty or reversed interval")]
    EmptyInterval { index: usize },
    #[error("piece {index}: gap or overlap at its start (expected {expected}, got {got})")]
    NotContiguous {
        index: usize,
        expected: f64,
        got: f64,
    },
    #[error("piece {index}: polynomial degree {degree} exceeds {MAX_DEGREE}")]
    DegreeTooHigh { index: usize, degree: usize },
    #[error("pattern pieces must cover [0, period) exactly (cover [{lo}, {hi}))")]
    PatternCoverage { lo: f64, hi: f64 },
    #[error("pattern period must be positive")]
    NonpositivePeriod,
    #[error("tail piece must have degree <= 1 to extend to infinity")]
    TailDegree,
    #[error("evaluation at t = {t} is before the domain start {t0}")]
    OutOfDomain { t: f64, t0: f64 },
}

/// Piecewise-polynomial function on `[t0, +inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFn {
    pub t0: Rational,
    /// Absolute-coordinate pieces covering `[t0, continuation start)`.
    pub prelude: Vec<Piece>,
    pub continuation: Continuation,
}

impl PiecewiseFn {
    pub fn constant(t0: Rational, c: Rational) -> Self {
        let tail = Piece::constant(t0.clone(), t0.clone(), c);
        PiecewiseFn {
            t0,
            prelude: Vec::new(),
            continuation: Continuation::Tail(tail),
        }
    }

    pub fn new(
        t0: Rational,
        prelude: Vec<Piece>,
        continuation: Continuation,
    ) -> Result<Self, PiecewiseError> {
        let f = PiecewiseFn {
            t0,
            prelude,
            continuation,
        };
        f.check()?;
        Ok(f)
    }

    fn check(&self) -> Result<(), PiecewiseError> {
        let mut cursor = self.t0.clone();
        for (i, p) in self.prelude.iter().enumerate() {
            if p.to <= p.from {
                return Err(PiecewiseError::EmptyInterval { index: i });
            }
            if p.from != cursor {
                return Err(PiecewiseError::NotContiguous {
                    index: i,
                    expected: to_f64(&cursor),
                    got: to_f64(&p.from),
                });
            }
            if p.degree() > MAX_DEGREE || p.coeffs.len() > MAX_DEGREE + 1 {
                return Err(PiecewiseError::DegreeTooHigh {
                    index: i,
                    degree: p.degree().max(p.coeffs.len().saturating_sub(1)),
                });
            }
            cursor = p.to.clone();
        }
        match &self.continuation {
            Continuation::Periodic(pat) => {
                if pat.period <= Rational::zero() {
                    return Err(PiecewiseError::NonpositivePeriod);
                }
                if pat.start != cursor {
                    return Err(PiecewiseError::NotContiguous {
                        index: self.prelude.len(),
                        expected: to_f64(&cursor),
                        got: to_f64(&pat.start),
                    });
                }
                let mut local = Rational::zero();
                for (i, p) in pat.pieces.iter().enumerate() {
                    if p.to <= p.from {
                        return Err(PiecewiseError::EmptyInterval { index: i });
                    }
                    if p.from != local {
                        return Err(PiecewiseError::NotContiguous {
                            index: i,
                            expected: to_f64(&local),
                            got: to_f64(&p.from),
                        });
                    }
                    if p.degree() > MAX_DEGREE || p.coeffs.len() > MAX_DEGREE + 1 {
                        return Err(PiecewiseError::DegreeTooHigh {
                            index: i,
                            degree: p.degree().max(p.coeffs.len().saturating_sub(1)),
                        });
                    }
                    local = p.to.clone();
                }
                if local != pat.period || pat.pieces.is_empty() {
                    return Err(PiecewiseError::PatternCoverage {
                        lo: 0.0,
                        hi: to_f64(&local),
                    });
                }
            }
            Continuation::Tail(tail) => {
                if tail.from != cursor {
                    return Err(PiecewiseError::NotContiguous {
                        index: self.prelude.len(),
                        expected: to_f64(&cursor),
                        got: to_f64(&tail.from),
                    });
                }
                if tail.degree() > 1 {
                    return Err(PiecewiseError::TailDegree);
                }
            }
        }
        Ok(())
    }

    /// Exact evaluation at a rational time.
    pub fn eval_rational(&self, t: &Rational) -> Result<Rational, PiecewiseError> {
        if *t < self.t0 {
            return Err(PiecewiseError::OutOfDomain {
                t: to_f64(t),
                t0: to_f64(&self.t0),
            });
        }
        for p in &self.prelude {
            if *t < p.to {
                return Ok(p.eval_rational(t));
            }
        }
        match &self.continuation {
            Continuation::Tail(tail) => Ok(tail.eval_rational(t)),
            Continuation::Periodic(pat) => {
                let rel = t - &pat.start;
                let k = (&rel / &pat.period).floor();
                let u = rel - &k * &pat.period;
                for p in &pat.pieces {
                    if u < p.to {
                        return Ok(p.eval_rational(&u));
                    }
                }
                // u == period can only arise from rounding; fold to 0
                Ok(pat.pieces[0].eval_rational(&Rational::zero()))
            }
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64, PiecewiseError> {
        let t0 = to_f64(&self.t0);
        if t < t0 {
            return Err(PiecewiseError::OutOfDomain { t, t0 });
        }
        Ok(self.compile().value(t))
    }

    /// Breakpoints (piece edges) inside `[a, b]`, in increasing order.
    pub fn breakpoints_in(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut push = |x: f64| {
            if x >= a && x <= b {
                out.push(x);
            }
        };
        for p in &self.prelude {
            push(to_f64(&p.from));
        }
        match &self.continuation {
            Continuation::Tail(tail) => push(to_f64(&tail.from)),
            Continuation::Periodic(pat) => {
                let period = to_f64(&pat.period);
                let start = to_f64(&pat.start);
                if b >= start {
                    let k0 = (((a - start) / period).floor() as i64).max(0);
                    let k1 = ((b - start) / period).ceil() as i64 + 1;
                    for k in k0..=k1 {
                        let base = &pat.start + rat_i(k) * &pat.period;
                        for p in &pat.pieces {
                            push(to_f64(&(&base + &p.from)));
                        }
                    }
                }
            }
        }
        out.sort_by(|x, y| x.partial_cmp(y).unwrap());
        out.dedup();
        out
    }

    /// Lower the function onto plain f64 pieces for fast evaluation.
    pub fn compile(&self) -> Compiled {
        let mut prelude = Vec::with_capacity(self.prelude.len());
        for p in &self.prelude {
            prelude.push(CompiledPiece {
                from: to_f64(&p.from),
                to: to_f64(&p.to),
                c: p.coeffs_f64(),
            });
        }
        let continuation = match &self.continuation {
            Continuation::Tail(t) => CompiledCont::Tail(CompiledPiece {
                from: to_f64(&t.from),
                to: f64::INFINITY,
                c: t.coeffs_f64(),
            }),
            Continuation::Periodic(pat) => CompiledCont::Periodic {
                start: to_f64(&pat.start),
                period: to_f64(&pat.period),
                pieces: pat
                    .pieces
                    .iter()
                    .map(|p| CompiledPiece {
                        from: to_f64(&p.from),
                        to: to_f64(&p.to),
                        c: p.coeffs_f64(),
                    })
                    .collect(),
            },
        };
        Compiled {
            t0: to_f64(&self.t0),
            prelude,
            continuation,
        }
    }

    /// True if every piece polynomial stays >= -tol on its interval, checked at
    /// endpoints and interior critical points.
    pub fn is_nonnegative(&self, tol: f64) -> bool {
        self.min_over_pieces() >= -tol
    }

    fn min_over_pieces(&self) -> f64 {
        let mut m = f64::INFINITY;
        for p in &self.prelude {
            m = m.min(piece_min(p, to_f64(&p.from), to_f64(&p.to)));
        }
        match &self.continuation {
            Continuation::Tail(t) => {
                let from = to_f64(&t.from);
                // degree <= 1: the infimum over [from, inf) is at `from` or -inf
                let c = t.coeffs_f64();
                m = m.min(horner(&c, from));
                if c[1] < 0.0 {
                    m = f64::NEG_INFINITY;
                }
            }
            Continuation::Periodic(pat) => {
                for p in &pat.pieces {
                    m = m.min(piece_min(p, to_f64(&p.from), to_f64(&p.to)));
                }
            }
        }
        m
    }

    /// (min, max) of the function over `[a, b]`, from piece endpoints and
    /// interior critical points; exact at extrema of affine pieces.
    pub fn extrema_in(&self, a: f64, b: f64) -> (f64, f64) {
        let compiled = self.compile();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut visit = |x: f64| {
            let v = compiled.value(x.clamp(compiled.t0, f64::MAX));
            lo = lo.min(v);
            hi = hi.max(v);
        };
        visit(a);
        visit(b);
        for bk in self.breakpoints_in(a, b) {
            visit(bk);
        }
        // interior critical points piece by piece
        let probe = |c: &[f64; 4], from: f64, to: f64, visit: &mut dyn FnMut(f64)| {
            for r in derivative_roots(c) {
                if r > from && r < to && r > a && r < b {
                    visit(r);
                }
            }
        };
        for p in &compiled.prelude {
            probe(&p.c, p.from.max(a), p.to.min(b), &mut visit);
        }
        match &compiled.continuation {
            CompiledCont::Tail(t) => probe(&t.c, t.from.max(a), b, &mut visit),
            CompiledCont::Periodic {
                start,
                period,
                pieces,
            } => {
                if b >= *start {
                    let k0 = (((a - start) / period).floor() as i64).max(0);
                    let k1 = ((b - start) / period).ceil() as i64;
                    for k in k0..=k1 {
                        let base = start + k as f64 * period;
                        for p in pieces {
                            let (f, t) = (base + p.from, base + p.to);
                            if t < a || f > b {
                                continue;
                            }
                            for r in derivative_roots(&p.c) {
                                let x = base + r;
                                if x > f && x < t && x > a && x < b {
                                    visit(x);
                                }
                            }
                            // clipped edges
                            visit(f.max(a));
                            visit(t.min(b));
                        }
                    }
                }
            }
        }
        (lo, hi)
    }

    /// Affine pieces (absolute coordinates) covering `[a, b]`.
    /// Errors with the offending degree when any overlapping piece is nonlinear.
    pub fn affine_pieces_in(
        &self,
        a: &Rational,
        b: &Rational,
    ) -> Result<Vec<AffinePiece>, usize> {
        let mut out = Vec::new();
        let mut clip = |from: &Rational, to: &Rational, c0: Rational, c1: Rational| {
            let f = from.clone().max(a.clone());
            let t = to.clone().min(b.clone());
            if f < t {
                out.push(AffinePiece { from: f, to: t, c0, c1 });
            }
        };
        for p in &self.prelude {
            if p.degree() > 1 {
                return Err(p.degree());
            }
            let c0 = p.coeffs.first().cloned().unwrap_or_else(Rational::zero);
            let c1 = p.coeffs.get(1).cloned().unwrap_or_else(Rational::zero);
            clip(&p.from, &p.to, c0, c1);
        }
        match &self.continuation {
            Continuation::Tail(t) => {
                if t.degree() > 1 {
                    return Err(t.degree());
                }
                let c0 = t.coeffs.first().cloned().unwrap_or_else(Rational::zero);
                let c1 = t.coeffs.get(1).cloned().unwrap_or_else(Rational::zero);
                clip(&t.from, &b.clone().max(t.from.clone()), c0, c1);
            }
            Continuation::Periodic(pat) => {
                if *b > pat.start {
                    let rel = b - &pat.start;
                    let k1 = (&rel / &pat.period).ceil();
                    let k0 = {
                        let rel_a = a - &pat.start;
                        let k = (&rel_a / &pat.period).floor();
                        if k < Rational::zero() {
                            Rational::zero()
                        } else {
                            k
                        }
                    };
                    let mut k = k0;
                    while k <= k1 {
                        let base = &pat.start + &k * &pat.period;
                        for p in &pat.pieces {
                            if p.degree() > 1 {
                                return Err(p.degree());
                            }
                            let c0l = p.coeffs.first().cloned().unwrap_or_else(Rational::zero);
                            let c1 = p.coeffs.get(1).cloned().unwrap_or_else(Rational::zero);
                            // local u = t - base: c0l + c1 (t - base)
                            let c0 = &c0l - &c1 * &base;
                            clip(&(&base + &p.from), &(&base + &p.to), c0, c1);
                        }
                        k += Rational::from_integer(BigInt::from(1));
                    }
                }
            }
        }
        out.sort_by(|x, y| x.from.cmp(&y.from));
        Ok(out)
    }

    pub fn period(&self) -> Option<&Rational> {
        match &self.continuation {
            Continuation::Periodic(p) => Some(&p.period),
            Continuation::Tail(_) => None,
        }
    }

    pub fn pattern_start(&self) -> Option<&Rational> {
        match &self.continuation {
            Continuation::Periodic(p) => Some(&p.start),
            Continuation::Tail(_) => None,
        }
    }

    /// True if the function has a jump at any interior breakpoint.
    pub fn has_discontinuity(&self) -> bool {
        let eq = |left: Rational, right: Rational| left == right;
        let mut prev: Option<(Rational, Rational)> = None; // (edge, left value)
        for p in &self.prelude {
            if let Some((edge, lv)) = prev.take() {
                debug_assert_eq!(edge, p.from);
                if !eq(lv, p.eval_rational(&p.from)) {
                    return true;
                }
            }
            prev = Some((p.to.clone(), p.eval_rational(&p.to)));
        }
        match &self.continuation {
            Continuation::Tail(t) => {
                if let Some((_, lv)) = prev {
                    if !eq(lv, t.eval_rational(&t.from)) {
                        return true;
                    }
                }
                false
            }
            Continuation::Periodic(pat) => {
                let first = pat.pieces[0].eval_rational(&Rational::zero());
                if let Some((_, lv)) = prev {
                    if lv != first {
                        return true;
                    }
                }
                let mut local_prev: Option<(Rational, Rational)> = None;
                for p in &pat.pieces {
                    if let Some((_, lv)) = local_prev.take() {
                        if lv != p.eval_rational(&p.from) {
                            return true;
                        }
                    }
                    local_prev = Some((p.to.clone(), p.eval_rational(&p.to)));
                }
                // seam: end of period vs start of next
                if let Some((edge, lv)) = local_prev {
                    debug_assert_eq!(edge, pat.period);
                    if lv != first {
                        return true;
                    }
                }
                false
            }
        }
    }
}

/// An affine piece `c0 + c1 t` in absolute coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePiece {
    pub from: Rational,
    pub to: Rational,
    pub c0: Rational,
    pub c1: Rational,
}

impl AffinePiece {
    pub fn eval(&self, t: &Rational) -> Rational {
        &self.c0 + &self.c1 * t
    }
}

pub fn horner(c: &[f64; 4], u: f64) -> f64 {
    ((c[3] * u + c[2]) * u + c[1]) * u + c[0]
}

/// Real roots of the derivative of the cubic with coefficients `c` (as a
/// polynomial in the same variable).
fn derivative_roots(c: &[f64; 4]) -> Vec<f64> {
    let (a, b, lin) = (3.0 * c[3], 2.0 * c[2], c[1]);
    if a == 0.0 {
        if b == 0.0 {
            return vec![];
        }
        return vec![-lin / b];
    }
    let disc = b * b - 4.0 * a * lin;
    if disc < 0.0 {
        return vec![];
    }
    let s = disc.sqrt();
    vec![(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)]
}

fn piece_min(p: &Piece, from: f64, to: f64) -> f64 {
    let c = p.coeffs_f64();
    let mut m = horner(&c, from).min(horner(&c, to));
    for r in derivative_roots(&c) {
        if r > from && r < to {
            m = m.min(horner(&c, r));
        }
    }
    m
}

#[derive(Debug, Clone)]
pub struct CompiledPiece {
    pub from: f64,
    pub to: f64,
    pub c: [f64; 4],
}

#[derive(Debug, Clone)]
enum CompiledCont {
    Periodic {
        start: f64,
        period: f64,
        pieces: Vec<CompiledPiece>,
    },
    Tail(CompiledPiece),
}

/// f64-lowered evaluator.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub t0: f64,
    prelude: Vec<CompiledPiece>,
    continuation: CompiledCont,
}

impl Compiled {
    /// Evaluate at `t >= t0`; times before `t0` clamp to the first piece.
    pub fn value(&self, t: f64) -> f64 {
        for p in &self.prelude {
            if t < p.to {
                return horner(&p.c, t);
            }
        }
        match &self.continuation {
            CompiledCont::Tail(p) => horner(&p.c, t),
            CompiledCont::Periodic {
                start,
                period,
                pieces,
            } => {
                let rel = t - start;
                let mut u = rel - (rel / period).floor() * period;
                if u < 0.0 {
                    u += period;
                }
                if u >= *period {
                    u -= period;
                }
                for p in pieces {
                    if u < p.to {
                        return horner(&p.c, u);
                    }
                }
                horner(&pieces.last().unwrap().c, u)
            }
        }
    }
}

impl fmt::Display for PiecewiseFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "piecewise[{} prelude", self.prelude.len())?;
        match &self.continuation {
            Continuation::Periodic(p) => write!(
                f,
                ", pattern {} pieces, period {}]",
                p.pieces.len(),
                to_f64(&p.period)
            ),
            Continuation::Tail(_) => write!(f, ", tail]"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sawtooth_delay() -> PiecewiseFn {
        // d(u) = 1 on [0,1), 4u-3 on [1,2), -4u+13 on [2,3); period 3
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
        .unwrap()
    }

    #[test]
    fn constant_evaluates_everywhere() {
        let f = PiecewiseFn::constant(rat_i(0), rat(0.0));
        assert_eq!(f.eval(0.0).unwrap(), 0.0);
        assert_eq!(f.eval(123.456).unwrap(), 0.0);
    }

    #[test]
    fn out_of_domain_is_an_error() {
        let f = PiecewiseFn::constant(rat_i(2), rat(1.0));
        assert!(matches!(
            f.eval(1.9),
            Err(PiecewiseError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn sawtooth_values() {
        let d = sawtooth_delay();
        // d at 3n + 1.5 is 4*1.5 - 3 = 3
        for n in [0i64, 1, 7, 40] {
            let t = 3.0 * n as f64 + 1.5;
            assert!((d.eval(t).unwrap() - 3.0).abs() < 1e-12, "t = {t}");
        }
        assert_eq!(d.eval(0.5).unwrap(), 1.0);
        assert_eq!(d.eval(2.0).unwrap(), 5.0);
    }

    #[test]
    fn pattern_eval_is_periodic_at_exact_breakpoints() {
        // dyadic breakpoints so t and t + P are exactly representable
        let f = PiecewiseFn::new(
            rat_i(0),
            vec![],
            Continuation::Periodic(Pattern {
                start: rat_i(0),
                period: rat_i(4),
                pieces: vec![
                    Piece::new(rat_i(0), rat(1.5), vec![rat_i(2), rat_i(1)]),
                    Piece::new(rat(1.5), rat_i(4), vec![rat(3.5)]),
                ],
            }),
        )
        .unwrap();
        for t in [0.0, 0.75, 1.5, 2.25, 3.0] {
            let a = f.eval(t).unwrap();
            let b = f.eval(t + 4.0).unwrap();
            let c = f.eval(t + 40.0).unwrap();
            assert_eq!(a, b);
            assert_eq!(a, c);
        }
    }

    #[test]
    fn gap_is_rejected() {
        let r = PiecewiseFn::new(
            rat_i(0),
            vec![
                Piece::constant(rat_i(0), rat_i(1), rat_i(1)),
                Piece::constant(rat_i(2), rat_i(3), rat_i(1)),
            ],
            Continuation::Tail(Piece::constant(rat_i(3), rat_i(3), rat_i(1))),
        );
        assert!(matches!(r, Err(PiecewiseError::NotContiguous { .. })));
    }

    #[test]
    fn degree_cap_enforced() {
        let r = PiecewiseFn::new(
            rat_i(0),
            vec![],
            Continuation::Tail(Piece::new(
                rat_i(0),
                rat_i(0),
                vec![rat_i(0), rat_i(0), rat_i(1)],
            )),
        );
        assert!(matches!(r, Err(PiecewiseError::TailDegree)));
    }

    #[test]
    fn nonnegativity_check_sees_interior_dips() {
        // (u-1)^2 - 0.25 dips below zero inside [0, 2]
        let f = PiecewiseFn::new(
            rat_i(0),
            vec![Piece::new(
                rat_i(0),
                rat_i(2),
                vec![rat(0.75), rat_i(-2), rat_i(1)],
            )],
            Continuation::Tail(Piece::constant(rat_i(2), rat_i(2), rat_i(1))),
        )
        .unwrap();
        assert!(!f.is_nonnegative(1e-12));
        assert!(f.is_nonnegative(0.3));
    }

    #[test]
    fn breakpoints_enumerate_pattern_instances() {
        let d = sawtooth_delay();
        let bks = d.breakpoints_in(5.5, 9.5);
        assert_eq!(bks, vec![6.0, 7.0, 8.0, 9.0]);
    }

    #[test]
    fn extrema_of_sawtooth() {
        let d = sawtooth_delay();
        let (lo, hi) = d.extrema_in(0.0, 3.0);
        assert_eq!(lo, 1.0);
        assert_eq!(hi, 5.0);
        let (lo, hi) = d.extrema_in(10.0, 10.5);
        assert_eq!((lo, hi), (1.0, 1.0));
    }

    #[test]
    fn affine_expansion_covers_window() {
        let d = sawtooth_delay();
        let pieces = d.affine_pieces_in(&rat_i(2), &rat_i(7)).unwrap();
        assert_eq!(pieces[0].from, rat_i(2));
        assert_eq!(pieces.last().unwrap().to, rat_i(7));
        // contiguous
        for w in pieces.windows(2) {
            assert_eq!(w[0].to, w[1].from);
        }
        // value check at t = 4.5 (local 1.5 in second period): 4*1.5-3 = 3
        let v = pieces
            .iter()
            .find(|p| p.from <= rat(4.5) && rat(4.5) < p.to)
            .unwrap()
            .eval(&rat(4.5));
        assert_eq!(v, rat_i(3));
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("7/3"), Some(Rational::new(7.into(), 3.into())));
        assert_eq!(parse_rational("2.6"), Some(Rational::new(13.into(), 5.into())));
        assert_eq!(parse_rational("-1.25"), Some(rat(-1.25)));
        assert_eq!(parse_rational("4"), Some(rat_i(4)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn discontinuity_detection() {
        let cont = sawtooth_delay();
        assert!(!cont.has_discontinuity());
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
        assert!(bursty.has_discontinuity());
    }
}
