//! Deterministic stand-ins for recorded speech and environmental noise, used
//! when no corpus is available.
//!
//! The speech model is a glottal harmonic series shaped by vowel formants and
//! a syllabic envelope. It is crude, but it reproduces the properties that
//! matter for mode-based separation: a wandering fundamental, broadband
//! harmonic structure and strong amplitude modulation.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Signal};

/// (F1, F2, F3) in Hz for a handful of vowels.
const VOWELS: [[f64; 3]; 6] = [
    [730.0, 1090.0, 2440.0],
    [270.0, 2290.0, 3010.0],
    [300.0, 870.0, 2240.0],
    [530.0, 1840.0, 2480.0],
    [570.0, 840.0, 2410.0],
    [660.0, 1720.0, 2410.0],
];
const FORMANT_BW_HZ: [f64; 3] = [90.0, 120.0, 170.0];
const HARMONIC_CEILING_HZ: f64 = 3600.0;
const PAUSE_PROBABILITY: f64 = 0.15;
/// Syllable pitch targets spread uniformly over ±this fraction of the mean f0.
const PITCH_SPREAD: f64 = 0.2;
/// Time constant of the glide between syllable pitch targets.
const PITCH_GLIDE_S: f64 = 0.04;
const PEAK_LEVEL: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerProfile {
    /// Mean fundamental frequency.
    pub f0_hz: f64,
    /// Multiplies every formant frequency (vocal tract length).
    pub formant_scale: f64,
    pub syllables_per_s: f64,
    pub seed: u64,
}

impl SpeakerProfile {
    pub fn male(seed: u64) -> Self {
        Self {
            f0_hz: 115.0,
            formant_scale: 1.0,
            syllables_per_s: 4.0,
            seed,
        }
    }

    pub fn female(seed: u64) -> Self {
        Self {
            f0_hz: 210.0,
            formant_scale: 1.17,
            syllables_per_s: 4.5,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(self.f0_hz) && ok(self.formant_scale) && ok(self.syllables_per_s)) {
            return Err(Error::invalid("speaker parameters must be positive"));
        }
        Ok(())
    }
}

struct Syllable {
    start: usize,
    len: usize,
    formants: Option<[f64; 3]>,
    /// Pitch of the syllable relative to the speaker mean.
    pitch: f64,
}

fn syllables(profile: &SpeakerProfile, len: usize, rate: f64, rng: &mut ChaCha8Rng) -> Vec<Syllable> {
    let mean = rate / profile.syllables_per_s;
    let mut out = Vec::new();
    let mut start = 0usize;
    while start < len {
        let dur = (mean * rng.random_range(0.6..1.4)).max(1.0) as usize;
        // an utterance never opens with a pause
        let voiced = start == 0 || rng.random::<f64>() >= PAUSE_PROBABILITY;
        let formants = voiced.then(|| {
            let v = VOWELS[rng.random_range(0..VOWELS.len())];
            v.map(|f| f * profile.formant_scale * rng.random_range(0.95..1.05))
        });
        let pitch = rng.random_range(1.0 - PITCH_SPREAD..1.0 + PITCH_SPREAD);
        out.push(Syllable {
            start,
            len: dur.min(len - start),
            formants,
            pitch,
        });
        start += dur;
    }
    out
}

/// Relative amplitude of a harmonic at `f` under the given formants, with a
/// -6 dB/octave source tilt folded in by the caller.
fn formant_gain(f: f64, formants: &[f64; 3]) -> f64 {
    formants
        .iter()
        .zip(FORMANT_BW_HZ)
        .enumerate()
        .map(|(j, (&fc, bw))| {
            let z = (f - fc) / bw;
            (-0.5 * z * z).exp() / (j as f64 + 1.0)
        })
        .sum::<f64>()
        + 0.02
}

/// A voiced utterance for `profile`, peak-normalized to 0.5.
pub fn synthetic_speech(profile: &SpeakerProfile, duration_s: f64, sample_rate: u32) -> Result<Signal<f64>> {
    profile.validate()?;
    let len = sample_len(duration_s, sample_rate)?;
    let fs = f64::from(sample_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let sylls = syllables(profile, len, fs, &mut rng);
    let vibrato_phase: f64 = rng.random_range(0.0..TAU);
    let ceiling = HARMONIC_CEILING_HZ.min(0.45 * fs);

    // instantaneous fundamental: syllable pitch targets joined by a first-order
    // glide, slow intonation and declination
    let mut target = vec![1.0; len];
    for s in &sylls {
        target[s.start..s.start + s.len].fill(s.pitch);
    }
    let glide = 1.0 - (-1.0 / (PITCH_GLIDE_S * fs)).exp();
    let mut pitch = sylls.first().map_or(1.0, |s| s.pitch);
    let mut phase = 0.0;
    let f0: Vec<f64> = (0..len)
        .map(|n| {
            let t = n as f64 / fs;
            pitch += glide * (target[n] - pitch);
            let intonation = 1.0 + 0.08 * (TAU * 0.7 * t + vibrato_phase).sin();
            let declination = 1.0 - 0.05 * t / duration_s;
            profile.f0_hz * pitch * intonation * declination
        })
        .collect();
    let phases: Vec<f64> = f0
        .iter()
        .map(|&f| {
            let p = phase;
            phase = (phase + TAU * f / fs) % TAU;
            p
        })
        .collect();

    let mut x = vec![0.0; len];
    for s in &sylls {
        let Some(formants) = s.formants else { continue };
        let lowest = f0[s.start..s.start + s.len].iter().copied().fold(f64::INFINITY, f64::min);
        let harmonics = (ceiling / lowest).floor() as usize;
        for (off, n) in (s.start..s.start + s.len).enumerate() {
            // raised-cosine syllable envelope
            let env = (std::f64::consts::PI * (off as f64 + 0.5) / s.len as f64).sin().powi(2);
            let mut v = 0.0;
            for k in 1..=harmonics {
                let f = k as f64 * f0[n];
                if f >= ceiling {
                    break;
                }
                v += formant_gain(f, &formants) / k as f64 * (k as f64 * phases[n]).sin();
            }
            x[n] = env * v;
        }
        // short fricative burst at the syllable onset
        let burst = (0.03 * fs) as usize;
        let mut prev = 0.0;
        for n in s.start..(s.start + burst).min(s.start + s.len) {
            let w: f64 = rng.sample(StandardNormal);
            x[n] += 0.02 * (w - prev);
            prev = w;
        }
    }
    normalized(x, sample_rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Babble,
    Airport,
    Car,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 3] = [NoiseKind::Babble, NoiseKind::Airport, NoiseKind::Car];

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Babble => "babble",
            NoiseKind::Airport => "airport",
            NoiseKind::Car => "car",
        }
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown noise type '{s}'")))
    }
}

/// Environmental noise of the given kind, peak-normalized to 0.5.
///
/// Babble is a sum of six synthetic talkers. Car noise is low-passed rumble
/// with an engine hum. Airport noise is distant babble over a broadband
/// pink-ish floor.
pub fn synthetic_noise(kind: NoiseKind, duration_s: f64, sample_rate: u32, seed: u64) -> Result<Signal<f64>> {
    let len = sample_len(duration_s, sample_rate)?;
    let fs = f64::from(sample_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e6f_6973_65);
    let x = match kind {
        NoiseKind::Babble => babble(6, duration_s, sample_rate, &mut rng)?,
        NoiseKind::Car => {
            let mut x = lowpass(&white(len, &mut rng), 150.0, fs);
            x = lowpass(&x, 150.0, fs);
            let rms = (x.iter().map(|v| v * v).sum::<f64>() / len as f64).sqrt();
            let hum = rng.random_range(25.0..35.0);
            for (n, v) in x.iter_mut().enumerate() {
                let t = n as f64 / fs;
                let wobble = 1.0 + 0.02 * (TAU * 0.3 * t).sin();
                *v += rms * (0.6 * (TAU * hum * wobble * t).sin() + 0.3 * (TAU * 2.0 * hum * t).sin());
            }
            x
        }
        NoiseKind::Airport => {
            let talk = babble(4, duration_s, sample_rate, &mut rng)?;
            let floor = lowpass(&white(len, &mut rng), 1200.0, fs);
            let scale = rms(&talk) / rms(&floor).max(f64::MIN_POSITIVE);
            talk.iter().zip(&floor).map(|(a, b)| a + 0.7 * scale * b).collect()
        }
    };
    normalized(x, sample_rate)
}

/// White noise through a two-pole resonance near 500 Hz and a gentle
/// low-pass, giving a long-term spectrum similar to speech.
pub fn speech_shaped_noise(len: usize, sample_rate: u32, seed: u64) -> Result<Signal<f64>> {
    if len == 0 {
        return Err(Error::invalid("noise length must be positive"));
    }
    let fs = f64::from(sample_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = white(len, &mut rng);
    let r: f64 = 0.95;
    let theta = TAU * 500.0 / fs;
    let (a1, a2) = (2.0 * r * theta.cos(), -r * r);
    let (mut y1, mut y2) = (0.0, 0.0);
    let resonant: Vec<f64> = w
        .iter()
        .map(|&v| {
            let y = v + a1 * y1 + a2 * y2;
            y2 = y1;
            y1 = y;
            y
        })
        .collect();
    let shaped: Vec<f64> = lowpass(&resonant, 2500.0, fs)
        .iter()
        .zip(&w)
        .map(|(a, b)| a + 0.5 * b)
        .collect();
    normalized(shaped, sample_rate)
}

fn babble(talkers: usize, duration_s: f64, sample_rate: u32, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let mut acc: Vec<f64> = Vec::new();
    for _ in 0..talkers {
        let profile = SpeakerProfile {
            f0_hz: rng.random_range(95.0..240.0),
            formant_scale: rng.random_range(0.95..1.2),
            syllables_per_s: rng.random_range(3.5..5.5),
            seed: rng.random(),
        };
        let s = synthetic_speech(&profile, duration_s, sample_rate)?;
        let gain = rng.random_range(0.5..1.0);
        if acc.is_empty() {
            acc = vec![0.0; s.len()];
        }
        for (a, v) in acc.iter_mut().zip(s.samples()) {
            *a += gain * v;
        }
    }
    Ok(acc)
}

fn white(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// One-pole low-pass with the given -3 dB frequency.
fn lowpass(x: &[f64], cutoff_hz: f64, fs: f64) -> Vec<f64> {
    let a = (-TAU * cutoff_hz / fs).exp();
    let mut y = 0.0;
    x.iter()
        .map(|&v| {
            y = (1.0 - a) * v + a * y;
            y
        })
        .collect()
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt()
}

fn sample_len(duration_s: f64, sample_rate: u32) -> Result<usize> {
    let len = (duration_s * f64::from(sample_rate)).round();
    if !(duration_s.is_finite() && sample_rate > 0 && len >= 1.0) {
        return Err(Error::invalid("duration must cover at least one sample"));
    }
    Ok(len as usize)
}

fn normalized(mut x: Vec<f64>, sample_rate: u32) -> Result<Signal<f64>> {
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        x.iter_mut().for_each(|v| *v *= PEAK_LEVEL / peak);
    }
    Signal::new(x, sample_rate)
}
