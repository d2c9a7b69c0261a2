//! Numerical estimation of limsup_{t->inf} F(t) and liminf_{t->inf} F(t) for
//! criterion functionals built from eventually-periodic data.
//!
//! The estimate is the max (resp. min) over the tail window of the samples.
//! Stabilization compares the extremum over the last window against the same
//! extremum over the preceding window of equal size; periodic functionals
//! settle to a two-window difference near zero, transients do not.

use thiserror::Error;

pub const STABILIZATION_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum SamplingStrategy {
    /// Uniform grid over [t_start, t_end] (n >= 100), augmented with supplied
    /// breakpoints and local extremum refinement.
    Grid { t_start: f64, t_end: f64, n: usize },
    /// t_n = step * n + offset for n in [n_from, n_to].
    Candidates {
        step: f64,
        offset: f64,
        n_from: i64,
        n_to: i64,
    },
    /// Samples confined to the final two periods before t_end: breakpoints
    /// plus `per_period` uniform points per period, refined at local extrema.
    PeriodicExact {
        period: f64,
        t_end: f64,
        per_period: usize,
    },
}

impl SamplingStrategy {
    pub fn label(&self) -> String {
        match self {
            SamplingStrategy::Grid { t_start, t_end, n } => {
                format!("grid[{t_start}, {t_end}] n={n}")
            }
            SamplingStrategy::Candidates {
                step,
                offset,
                n_from,
                n_to,
            } => format!("candidates t_n={step}n+{offset}, n in [{n_from}, {n_to}]"),
            SamplingStrategy::PeriodicExact {
                period,
                t_end,
                per_period,
            } => format!("periodic period={period} end={t_end} per_period={per_period}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("functional evaluation failed at t = {t}: {msg}")]
    EvalFailed { t: f64, msg: String },
    #[error("need at least {need} samples in the tail window, have {have}")]
    InsufficientSamples { need: usize, have: usize },
    #[error("grid strategy needs n >= 100 (got {0})")]
    GridTooCoarse(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub t: f64,
    pub value: f64,
    pub error_bound: f64,
}

/// Evaluate `F` on the strategy's points. Breakpoints inside the window are
/// always included; for grid and periodic modes the top local maxima and
/// minima are refined by golden-section search so kinked and smooth ridges
/// are both resolved.
pub fn sample_functional(
    f: &mut dyn FnMut(f64) -> Result<(f64, f64), String>,
    strategy: &SamplingStrategy,
    breakpoints: &[f64],
) -> Result<Vec<Sample>, SampleError> {
    let mut points: Vec<f64> = Vec::new();
    let refine_window: Option<(f64, f64)>;
    match strategy {
        SamplingStrategy::Grid { t_start, t_end, n } => {
            if *n < 100 {
                return Err(SampleError::GridTooCoarse(*n));
            }
            for i in 0..=*n {
                points.push(t_start + (t_end - t_start) * i as f64 / *n as f64);
            }
            for &b in breakpoints {
                if b >= *t_start && b <= *t_end {
                    points.push(b);
                }
            }
            refine_window = Some((*t_start, *t_end));
        }
        SamplingStrategy::Candidates {
            step,
            offset,
            n_from,
            n_to,
        } => {
            for k in *n_from..=*n_to {
                points.push(step * k as f64 + offset);
            }
            refine_window = None;
        }
        SamplingStrategy::PeriodicExact {
            period,
            t_end,
            per_period,
        } => {
            let t_start = t_end - 2.0 * period;
            let n = (2 * per_period.max(8)).max(16);
            for i in 0..=n {
                points.push(t_start + (t_end - t_start) * i as f64 / n as f64);
            }
            for &b in breakpoints {
                if b >= t_start && b <= *t_end {
                    points.push(b);
                }
            }
            refine_window = Some((t_start, *t_end));
        }
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (1.0 + a.abs()));

    let mut samples = Vec::with_capacity(points.len());
    for &t in &points {
        let (value, error_bound) =
            f(t).map_err(|msg| SampleError::EvalFailed { t, msg })?;
        samples.push(Sample {
            t,
            value,
            error_bound,
        });
    }

    if let Some((w0, w1)) = refine_window {
        refine_extrema(f, &mut samples, w0, w1, true)?;
        refine_extrema(f, &mut samples, w0, w1, false)?;
        samples.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
    }
    Ok(samples)
}

/// Golden-section refinement around the top three local maxima (or minima).
fn refine_extrema(
    f: &mut dyn FnMut(f64) -> Result<(f64, f64), String>,
    samples: &mut Vec<Sample>,
    w0: f64,
    w1: f64,
    maximize: bool,
) -> Result<(), SampleError> {
    let n = samples.len();
    if n < 3 {
        return Ok(());
    }
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
    let mut local: Vec<usize> = (1..n - 1)
        .filter(|&i| {
            better(samples[i].value, samples[i - 1].value)
                && better(samples[i].value, samples[i + 1].value)
        })
        .collect();
    local.sort_by(|&a, &b| {
        if maximize {
            samples[b].value.partial_cmp(&samples[a].value).unwrap()
        } else {
            samples[a].value.partial_cmp(&samples[b].value).unwrap()
        }
    });
    const PHI: f64 = 0.618_033_988_749_894_8;
    let mut extra = Vec::new();
    for &i in local.iter().take(3) {
        let mut a = samples[i - 1].t.max(w0);
        let mut b = samples[i + 1].t.min(w1);
        let eval = |f: &mut dyn FnMut(f64) -> Result<(f64, f64), String>,
                    t: f64|
         -> Result<(f64, f64), SampleError> {
            f(t).map_err(|msg| SampleError::EvalFailed { t, msg })
        };
        let mut x1 = b - PHI * (b - a);
        let mut x2 = a + PHI * (b - a);
        let mut f1 = eval(f, x1)?;
        let mut f2 = eval(f, x2)?;
        for _ in 0..48 {
            if better(f1.0, f2.0) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - PHI * (b - a);
                f1 = eval(f, x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + PHI * (b - a);
                f2 = eval(f, x2)?;
            }
            if (b - a).abs() < 1e-11 * (1.0 + a.abs()) {
                break;
            }
        }
        let (t, v) = if better(f1.0, f2.0) { (x1, f1) } else { (x2, f2) };
        extra.push(Sample {
            t,
            value: v.0,
            error_bound: v.1,
        });
    }
    samples.extend(extra);
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct TailEstimate {
    pub estimate: f64,
    /// Two-window stabilization measure: |extremum(last window) -
    /// extremum(previous window)|.
    pub spread: f64,
    pub stabilized: bool,
    pub samples_used: usize,
    /// Max quadrature error bound among tail samples.
    pub error_bound: f64,
}

fn tail_estimate(
    samples: &[Sample],
    tail_fraction: f64,
    maximize: bool,
) -> Result<TailEstimate, SampleError> {
    let n = samples.len();
    let tail_len = ((n as f64 * tail_fraction).ceil() as usize).max(1);
    if tail_len < 10 {
        return Err(SampleError::InsufficientSamples {
            need: 10,
            have: tail_len,
        });
    }
    let tail = &samples[n - tail_len..];
    let half = tail_len / 2;
    let (w1, w2) = tail.split_at(tail_len - half);
    let ext = |xs: &[Sample]| -> f64 {
        xs.iter()
            .map(|s| s.value)
            .fold(if maximize { f64::NEG_INFINITY } else { f64::INFINITY }, |a, b| {
                if maximize {
                    a.max(b)
                } else {
                    a.min(b)
                }
            })
    };
    let estimate = ext(tail);
    let spread = (ext(w2) - ext(w1)).abs();
    let error_bound = tail
        .iter()
        .map(|s| s.error_bound)
        .fold(0.0_f64, f64::max);
    Ok(TailEstimate {
        estimate,
        spread,
        stabilized: spread <= STABILIZATION_RTOL * (1.0 + estimate.abs()),
        samples_used: tail_len,
        error_bound,
    })
}

/// Max over the tail window (last `tail_fraction` of the samples).
pub fn estimate_limsup(samples: &[Sample], tail_fraction: f64) -> Result<TailEstimate, SampleError> {
    tail_estimate(samples, tail_fraction, true)
}

/// Min over the tail window.
pub fn estimate_liminf(samples: &[Sample], tail_fraction: f64) -> Result<TailEstimate, SampleError> {
    tail_estimate(samples, tail_fraction, false)
}

pub const DEFAULT_TAIL_FRACTION: f64 = 0.3;
pub const MARGIN_FACTOR: f64 = 10.0;

/// The verdict margin: a strict inequality `value > threshold` is asserted
/// only when the estimate clears the threshold by MARGIN_FACTOR times the
/// total numerical uncertainty.
pub fn clears_threshold(est: &TailEstimate, threshold: f64) -> bool {
    est.estimate - threshold > MARGIN_FACTOR * (est.error_bound + est.spread)
}

/// Mirror for strict `value < threshold` claims.
pub fn below_threshold(est: &TailEstimate, threshold: f64) -> bool {
    threshold - est.estimate > MARGIN_FACTOR * (est.error_bound + est.spread)
}
