//! Plain empirical mode decomposition.

pub(crate) mod extrema;
mod sift;
mod spline;

use serde::{Deserialize, Serialize};

pub use extrema::{find_local_extrema, ExtremaSet};
pub use sift::{is_imf, sd_criterion, sift_once};
pub use spline::{envelope, Boundary};

pub(crate) use extrema::extrema_of;
pub(crate) use sift::extract_imf;

use crate::num::max_abs;
use crate::{Error, Real, Result, Signal};

/// Parameters of the sifting loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SiftConfig {
    /// Stop sifting once the SD measure between iterates drops below this.
    pub sd_threshold: f64,
    pub max_sift_iterations: usize,
    pub envelope_boundary: Boundary,
    /// Mean envelope / half envelope span tolerated on most samples.
    pub mean_tolerance: f64,
    /// Ratio that must hold at every sample.
    pub mean_tolerance_peak: f64,
    /// Share of samples allowed above `mean_tolerance`.
    pub mean_tolerance_fraction: f64,
}

impl Default for SiftConfig {
    fn default() -> Self {
        Self {
            sd_threshold: 0.2,
            max_sift_iterations: 100,
            envelope_boundary: Boundary::Mirror,
            mean_tolerance: 0.05,
            mean_tolerance_peak: 0.5,
            mean_tolerance_fraction: 0.05,
        }
    }
}

impl SiftConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sd_threshold > 0.0) {
            return Err(Error::invalid("sd_threshold must be positive"));
        }
        if self.max_sift_iterations == 0 {
            return Err(Error::invalid("max_sift_iterations must be at least 1"));
        }
        if !(self.mean_tolerance > 0.0
            && self.mean_tolerance_peak >= self.mean_tolerance
            && (0.0..=1.0).contains(&self.mean_tolerance_fraction))
        {
            return Err(Error::invalid("inconsistent mean-envelope tolerances"));
        }
        Ok(())
    }
}

/// Intrinsic mode functions (highest frequency first) plus final residue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition<T> {
    pub imfs: Vec<Signal<T>>,
    pub residue: Signal<T>,
    pub source_length: usize,
}

impl<T: Real> Decomposition<T> {
    pub(crate) fn from_parts(imfs: Vec<Vec<T>>, residue: Vec<T>, sample_rate: u32) -> Self {
        let source_length = residue.len();
        Self {
            imfs: imfs
                .into_iter()
                .map(|m| Signal::from_raw(m, sample_rate))
                .collect(),
            residue: Signal::from_raw(residue, sample_rate),
            source_length,
        }
    }

    pub fn mode_count(&self) -> usize {
        self.imfs.len()
    }

    pub fn sample_rate(&self) -> u32 {
        self.residue.sample_rate()
    }

    /// IMFs followed by the residue.
    pub fn modes_with_residue(&self) -> impl Iterator<Item = &Signal<T>> {
        self.imfs.iter().chain(std::iter::once(&self.residue))
    }

    /// Sum of all IMFs and the residue.
    pub fn reconstruct(&self) -> Signal<T> {
        let mut acc = self.residue.samples().to_vec();
        for imf in &self.imfs {
            for (a, &v) in acc.iter_mut().zip(imf.samples()) {
                *a = *a + v;
            }
        }
        Signal::from_raw(acc, self.sample_rate())
    }

    /// `max |original - reconstruction| / max |original|` (absolute error
    /// when the original is identically zero).
    pub fn reconstruction_error(&self, original: &Signal<T>) -> f64 {
        let rec = self.reconstruct();
        let diff: Vec<T> = original
            .samples()
            .iter()
            .zip(rec.samples())
            .map(|(&a, &b)| a - b)
            .collect();
        let scale = max_abs(original.samples());
        let err = max_abs(&diff);
        if scale > T::zero() {
            (err / scale).to_f64_lossy()
        } else {
            err.to_f64_lossy()
        }
    }
}

/// Hard cap on extracted modes; a guard for degenerate inputs only.
pub(crate) fn mode_guard(len: usize) -> usize {
    4 * ceil_log2(len) + 8
}

pub(crate) fn ceil_log2(len: usize) -> usize {
    len.max(1).next_power_of_two().trailing_zeros() as usize
}

/// Empirical mode decomposition of `signal`.
pub fn emd<T: Real>(signal: &Signal<T>, config: &SiftConfig) -> Result<Decomposition<T>> {
    config.validate()?;
    let (imfs, residue) = emd_raw(signal.samples(), config, None);
    Ok(Decomposition::from_parts(imfs, residue, signal.sample_rate()))
}

/// Works on raw samples; `max_imfs` stops early when set.
pub(crate) fn emd_raw<T: Real>(
    x: &[T],
    config: &SiftConfig,
    max_imfs: Option<usize>,
) -> (Vec<Vec<T>>, Vec<T>) {
    let cap = max_imfs.unwrap_or(usize::MAX).min(mode_guard(x.len()));
    let mut residue = x.to_vec();
    let mut imfs = Vec::new();
    while imfs.len() < cap {
        let Some(imf) = extract_imf(&residue, config) else {
            break;
        };
        for (r, &v) in residue.iter_mut().zip(&imf) {
            *r = *r - v;
        }
        imfs.push(imf);
    }
    (imfs, residue)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{mix, synth_sine};

    #[test]
    fn ramp_is_undecomposable() {
        let ramp = Signal::new((0..500).map(|k| 0.01 * k as f64).collect(), 8000).unwrap();
        let dec = emd(&ramp, &SiftConfig::default()).unwrap();
        assert_eq!(dec.mode_count(), 0);
        assert_eq!(dec.residue, ramp);
    }

    #[test]
    fn reconstruction_is_exact() {
        let a: Signal<f64> = synth_sine(700.0, 1.0, 0.0, 0.5, 8000).unwrap();
        let b: Signal<f64> = synth_sine(90.0, 2.0, 0.4, 0.5, 8000).unwrap();
        let x = mix(&a, &b, 1.0, 1.0).unwrap();
        let dec = emd(&x, &SiftConfig::default()).unwrap();
        assert!(dec.mode_count() >= 2);
        assert!(dec.reconstruction_error(&x) <= 1e-10);
        for imf in &dec.imfs {
            assert_eq!(imf.len(), x.len());
            assert_eq!(imf.sample_rate(), 8000);
        }
        let ext = find_local_extrema(&dec.residue);
        assert!(!ext.supports_envelopes());
    }

    #[test]
    fn deterministic() {
        let a: Signal<f64> = synth_sine(300.0, 1.0, 0.0, 0.25, 8000).unwrap();
        let b: Signal<f64> = synth_sine(1300.0, 0.5, 0.0, 0.25, 8000).unwrap();
        let x = mix(&a, &b, 1.0, 1.0).unwrap();
        let cfg = SiftConfig::default();
        assert_eq!(emd(&x, &cfg).unwrap(), emd(&x, &cfg).unwrap());
    }

    #[test]
    fn f32_decomposition_works() {
        let a: Signal<f32> = synth_sine(700.0, 1.0, 0.0, 0.25, 8000).unwrap();
        let b: Signal<f32> = synth_sine(150.0, 1.0, 0.0, 0.25, 8000).unwrap();
        let x = mix(&a, &b, 1.0, 1.0).unwrap();
        let dec = emd(&x, &SiftConfig::default()).unwrap();
        assert!(dec.mode_count() >= 2);
        assert!(dec.reconstruction_error(&x) < 1e-5);
    }

    #[test]
    fn config_validation() {
        let bad = SiftConfig {
            sd_threshold: 0.0,
            ..SiftConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SiftConfig {
            max_sift_iterations: 0,
            ..SiftConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn log2_helper() {
        assert_eq!(ceil_log2(8000), 13);
        assert_eq!(ceil_log2(8192), 13);
        assert_eq!(ceil_log2(8193), 14);
        assert_eq!(ceil_log2(1), 0);
    }
}
