//! Uniformly sampled signals and the synthesis/mixing helpers used by the
//! experiments.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::num::{energy, std_dev};
use crate::{Error, Real, Result};

/// Sample rate used for synthetic experiments (matches 8 kHz speech corpora).
pub const DEFAULT_SAMPLE_RATE: u32 = 8000;

/// A non-empty, finite, uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal<T> {
    samples: Vec<T>,
    sample_rate: u32,
}

impl<T: Real> Signal<T> {
    pub fn new(samples: Vec<T>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("signal has no samples"));
        }
        if sample_rate == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(Self { samples, sample_rate })
    }

    /// Builds a signal from arithmetic on already-validated signals.
    pub(crate) fn from_raw(samples: Vec<T>, sample_rate: u32) -> Self {
        debug_assert!(!samples.is_empty() && sample_rate > 0);
        Self { samples, sample_rate }
    }

    pub fn zeros(len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(vec![T::zero(); len], sample_rate)
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false for a constructed signal; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / f64::from(self.sample_rate)
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> T {
        energy(&self.samples)
    }

    pub fn std_dev(&self) -> T {
        std_dev(&self.samples)
    }

    pub fn scaled(&self, gain: T) -> Self {
        Self::from_raw(
            self.samples.iter().map(|&x| x * gain).collect(),
            self.sample_rate,
        )
    }

    /// First `len` samples (or the whole signal if it is shorter).
    pub fn truncated(&self, len: usize) -> Self {
        let len = len.clamp(1, self.len());
        Self::from_raw(self.samples[..len].to_vec(), self.sample_rate)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self::from_raw(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            self.sample_rate,
        ))
    }

    /// Same sample rate and the same length.
    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.sample_rate != other.sample_rate {
            return Err(Error::SampleRateMismatch(self.sample_rate, other.sample_rate));
        }
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        Ok(())
    }

    /// Sample-wise sum of `parts`, all of which must be compatible.
    pub fn sum_of<'a>(parts: impl IntoIterator<Item = &'a Self>) -> Result<Option<Self>> {
        let mut acc: Option<Self> = None;
        for p in parts {
            acc = Some(match acc {
                None => p.clone(),
                Some(a) => a.add(p)?,
            });
        }
        Ok(acc)
    }

    pub fn to_f64(&self) -> Signal<f64> {
        Signal::from_raw(
            self.samples.iter().map(|x| x.to_f64_lossy()).collect(),
            self.sample_rate,
        )
    }
}

impl Signal<f64> {
    pub fn cast<U: Real>(&self) -> Signal<U> {
        Signal::from_raw(
            self.samples.iter().map(|&x| U::lit(x)).collect(),
            self.sample_rate,
        )
    }
}

/// `amplitude * sin(2π f n / fs + phase)` for `round(duration_s * fs)` samples.
pub fn synth_sine<T: Real>(
    freq_hz: f64,
    amplitude: f64,
    phase_rad: f64,
    duration_s: f64,
    sample_rate: u32,
) -> Result<Signal<T>> {
    let nyquist = f64::from(sample_rate) / 2.0;
    if sample_rate == 0 {
        return Err(Error::invalid("sample rate must be positive"));
    }
    if !(freq_hz > 0.0 && freq_hz < nyquist) {
        return Err(Error::invalid(format!(
            "frequency {freq_hz} Hz outside (0, {nyquist}) Hz for sample rate {sample_rate}"
        )));
    }
    if !(duration_s > 0.0) || !amplitude.is_finite() || !phase_rad.is_finite() {
        return Err(Error::invalid("duration must be positive and parameters finite"));
    }
    let len = (duration_s * f64::from(sample_rate)).round() as usize;
    if len == 0 {
        return Err(Error::invalid("duration shorter than one sample"));
    }
    let w = 2.0 * std::f64::consts::PI * freq_hz / f64::from(sample_rate);
    let samples = (0..len)
        .map(|n| T::lit(amplitude * (w * n as f64 + phase_rad).sin()))
        .collect();
    Signal::new(samples, sample_rate)
}

/// Truncates both signals to the shorter length, warning when that drops samples.
fn align<T: Real>(a: &Signal<T>, b: &Signal<T>) -> Result<(Signal<T>, Signal<T>)> {
    if a.sample_rate() != b.sample_rate() {
        return Err(Error::SampleRateMismatch(a.sample_rate(), b.sample_rate()));
    }
    if a.len() == b.len() {
        return Ok((a.clone(), b.clone()));
    }
    let n = a.len().min(b.len());
    warn!(
        "mixing signals of length {} and {}; truncating to {n}",
        a.len(),
        b.len()
    );
    Ok((a.truncated(n), b.truncated(n)))
}

/// `gain_a * a + gain_b * b`, truncated to the shorter input.
pub fn mix<T: Real>(a: &Signal<T>, b: &Signal<T>, gain_a: T, gain_b: T) -> Result<Signal<T>> {
    let (a, b) = align(a, b)?;
    a.scaled(gain_a).add(&b.scaled(gain_b))
}

/// Scales `noise` so that `clean` sits `snr_db` above it and returns
/// `(clean + g * noise, g * noise)`.
pub fn mix_at_snr<T: Real>(
    clean: &Signal<T>,
    noise: &Signal<T>,
    snr_db: T,
) -> Result<(Signal<T>, Signal<T>)> {
    let (clean, noise) = align(clean, noise)?;
    let ec = clean.energy();
    let en = noise.energy();
    if ec <= T::zero() {
        return Err(Error::ZeroEnergy("clean signal"));
    }
    if en <= T::zero() {
        return Err(Error::ZeroEnergy("noise signal"));
    }
    if !snr_db.is_finite() {
        return Err(Error::invalid("target SNR must be finite"));
    }
    let ten = T::lit(10.0);
    let gain = (ec / (en * ten.powf(snr_db / ten))).sqrt();
    let scaled = noise.scaled(gain);
    let noisy = clean.add(&scaled)?;
    Ok((noisy, scaled))
}

/// A weighted sum of components with an optional SNR target.
///
/// With a target, the first component is the clean signal and the weighted
/// sum of the remaining ones is rescaled as noise.
#[derive(Debug, Clone)]
pub struct MixSpec<T> {
    pub components: Vec<(Signal<T>, T)>,
    pub target_snr_db: Option<T>,
}

impl<T: Real> MixSpec<T> {
    pub fn render(&self) -> Result<Signal<T>> {
        let Some((first, _)) = self.components.first() else {
            return Err(Error::invalid("mix has no components"));
        };
        let rate = first.sample_rate();
        if let Some(c) = self.components.iter().find(|(s, _)| s.sample_rate() != rate) {
            return Err(Error::SampleRateMismatch(rate, c.0.sample_rate()));
        }
        let n = self.components.iter().map(|(s, _)| s.len()).min().unwrap_or(0);
        if self.components.iter().any(|(s, _)| s.len() != n) {
            warn!("mix components differ in length; truncating to {n}");
        }
        let weighted = |parts: &[(Signal<T>, T)]| -> Option<Signal<T>> {
            parts.iter().fold(None, |acc: Option<Signal<T>>, (s, g)| {
                let term = s.truncated(n).scaled(*g);
                Some(match acc {
                    None => term,
                    Some(a) => a.add(&term).expect("aligned"),
                })
            })
        };
        match self.target_snr_db {
            None => Ok(weighted(&self.components).expect("non-empty")),
            Some(snr) => {
                let clean = weighted(&self.components[..1]).expect("non-empty");
                let noise = weighted(&self.components[1..])
                    .ok_or_else(|| Error::invalid("SNR target needs at least one noise component"))?;
                Ok(mix_at_snr(&clean, &noise, snr)?.0)
            }
        }
    }
}
