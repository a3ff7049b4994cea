use crate::emd::extrema::{extrema_into, extrema_of, zero_crossings, ExtremaSet};
use crate::emd::spline::{envelope_into, SplineWork};
use crate::emd::SiftConfig;
use crate::{Error, Real, Result, Signal};

/// One sifting step: subtracts the mean of the upper and lower envelopes.
pub fn sift_once<T: Real>(signal: &Signal<T>, config: &SiftConfig) -> Result<Signal<T>> {
    let x = signal.samples();
    let mut ws = Workspace::default();
    ws.prepare(x, config)?;
    let half = T::lit(0.5);
    let h = x
        .iter()
        .zip(&ws.upper)
        .zip(&ws.lower)
        .map(|((&v, &u), &l)| v - (u + l) * half)
        .collect();
    Ok(Signal::from_raw(h, signal.sample_rate()))
}

/// Extrema and zero-crossing counts differ by at most one.
pub fn is_imf<T: Real>(candidate: &Signal<T>) -> bool {
    let x = candidate.samples();
    counts_match(x, &extrema_of(x))
}

fn counts_match<T: Real>(x: &[T], ext: &ExtremaSet<T>) -> bool {
    ext.count().abs_diff(zero_crossings(x)) <= 1
}

/// Cauchy-type convergence measure between successive sifting iterates:
/// `Σ (prev - curr)² / prev²`, skipping samples where `prev` is zero.
pub fn sd_criterion<T: Real>(prev: &Signal<T>, curr: &Signal<T>) -> Result<T> {
    if prev.len() != curr.len() {
        return Err(Error::LengthMismatch(prev.len(), curr.len()));
    }
    Ok(sd_of(prev.samples(), curr.samples()))
}

fn sd_of<T: Real>(prev: &[T], curr: &[T]) -> T {
    prev.iter()
        .zip(curr)
        .filter(|(&p, _)| p != T::zero())
        .map(|(&p, &c)| (p - c) * (p - c) / (p * p))
        .sum()
}

#[derive(Default)]
struct Workspace<T> {
    ext: ExtremaSet<T>,
    spline: SplineWork<T>,
    upper: Vec<T>,
    lower: Vec<T>,
}

impl<T: Real> Workspace<T> {
    /// Extrema of `x` and both envelopes.
    fn prepare(&mut self, x: &[T], config: &SiftConfig) -> Result<()> {
        extrema_into(x, &mut self.ext);
        if !self.ext.supports_envelopes() {
            return Err(Error::InsufficientExtrema);
        }
        let b = config.envelope_boundary;
        envelope_into(x.len(), &self.ext.maxima, b, &mut self.spline, &mut self.upper)?;
        envelope_into(x.len(), &self.ext.minima, b, &mut self.spline, &mut self.lower)
    }

    /// Mean envelope small relative to the half span between envelopes:
    /// below `mean_tolerance` on all but `mean_tolerance_fraction` of the
    /// samples and below `mean_tolerance_peak` everywhere.
    fn mean_is_negligible(&self, config: &SiftConfig) -> bool {
        let tol = T::lit(config.mean_tolerance);
        let peak = T::lit(config.mean_tolerance_peak);
        let mut above = 0usize;
        for (&u, &l) in self.upper.iter().zip(&self.lower) {
            // both sides carry the same factor of one half
            let m = (u + l).abs();
            let a = u - l;
            if a <= T::zero() {
                if m > T::zero() {
                    return false;
                }
                continue;
            }
            if m >= peak * a {
                return false;
            }
            if m > tol * a {
                above += 1;
            }
        }
        (above as f64) <= config.mean_tolerance_fraction * self.upper.len() as f64
    }
}

/// Sifts `x` into one IMF. `None` when `x` cannot support both envelopes.
///
/// An iterate is only returned once it satisfies the extrema/zero-crossing
/// condition. When the iteration cap is reached, the latest such iterate is
/// returned; if there is none yet, sifting continues until one appears or a
/// hard bound of `HARD_CAP_FACTOR` times the cap is hit.
pub(crate) fn extract_imf<T: Real>(x: &[T], config: &SiftConfig) -> Option<Vec<T>> {
    const HARD_CAP_FACTOR: usize = 20;
    let hard_cap = config.max_sift_iterations.saturating_mul(HARD_CAP_FACTOR);
    let mut h = x.to_vec();
    let mut ws = Workspace::default();
    let half = T::lit(0.5);
    let threshold = T::lit(config.sd_threshold);
    let mut last_valid: Option<Vec<T>> = None;
    let mut iterations = 0;
    let mut converged = false;
    loop {
        if ws.prepare(&h, config).is_err() {
            return (iterations > 0).then(|| last_valid.unwrap_or(h));
        }
        let counts_ok = counts_match(&h, &ws.ext);
        if counts_ok && (converged || ws.mean_is_negligible(config)) {
            return Some(h);
        }
        if iterations >= config.max_sift_iterations {
            if counts_ok {
                return Some(h);
            }
            if let Some(v) = last_valid {
                return Some(v);
            }
            if iterations >= hard_cap {
                return Some(h);
            }
        }
        if counts_ok {
            match &mut last_valid {
                Some(v) => v.copy_from_slice(&h),
                None => last_valid = Some(h.clone()),
            }
        }
        let mut sd = T::zero();
        for ((v, &u), &l) in h.iter_mut().zip(&ws.upper).zip(&ws.lower) {
            let prev = *v;
            *v = prev - (u + l) * half;
            // the terms are non-negative: once past the threshold the rest
            // cannot change the outcome
            if sd < threshold && prev != T::zero() {
                let d = prev - *v;
                sd = sd + d * d / (prev * prev);
            }
        }
        iterations += 1;
        converged |= sd < threshold;
    }
}
