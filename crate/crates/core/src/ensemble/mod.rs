//! Noise-assisted decompositions: EEMD and CEEMDAN.
//!
//! Every trial draws its white noise from a stream keyed by
//! `(base_seed, trial_index)`. Trials run on the rayon pool, but their
//! outputs are always summed in trial order, so results are bit-identical
//! for any thread count.

mod noise;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use noise::{gaussian_noise, NoiseRealization};

use crate::emd::{ceil_log2, emd_raw, extract_imf, extrema_of, Decomposition, SiftConfig};
use crate::num::std_dev;
use crate::{Error, Real, Result, Signal};

/// Trials processed concurrently by EEMD before folding into the average.
const EEMD_BATCH: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleConfig {
    pub trials: usize,
    /// Noise amplitude relative to the standard deviation of the signal
    /// being perturbed (the current residue in CEEMDAN).
    pub epsilon0: f64,
    pub base_seed: u64,
    pub sift: SiftConfig,
    /// Defaults to `ceil(log2 N) + 2` when unset.
    pub max_imfs: Option<usize>,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            epsilon0: 0.2,
            base_seed: 0,
            sift: SiftConfig::default(),
            max_imfs: None,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("ensemble needs at least one trial"));
        }
        if !(self.epsilon0 > 0.0 && self.epsilon0.is_finite()) {
            return Err(Error::invalid("epsilon0 must be positive"));
        }
        if self.max_imfs == Some(0) {
            return Err(Error::invalid("max_imfs must be at least 1"));
        }
        self.sift.validate()
    }

    pub fn imf_cap(&self, len: usize) -> usize {
        self.max_imfs.unwrap_or_else(|| ceil_log2(len) + 2)
    }
}

/// An ensemble decomposition together with the residue the raw trial
/// averages produce.
///
/// For EEMD the stored `decomposition.residue` closes the sum exactly, while
/// `raw_residue` is the trial average of the per-trial residues; the gap
/// between the signal and `Σ IMF + raw_residue` is the EEMD reconstruction
/// defect. CEEMDAN has no such gap and both residues coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOutput<T> {
    pub decomposition: Decomposition<T>,
    pub raw_residue: Signal<T>,
}

impl<T: Real> EnsembleOutput<T> {
    /// `max |x - (Σ IMF + raw_residue)| / max |x|`.
    pub fn raw_defect(&self, original: &Signal<T>) -> f64 {
        let raw = Decomposition {
            imfs: self.decomposition.imfs.clone(),
            residue: self.raw_residue.clone(),
            source_length: self.decomposition.source_length,
        };
        raw.reconstruction_error(original)
    }
}

/// The k-th (1-based) IMF of the EMD of `noise`, or zeros if the
/// decomposition has fewer than `k` modes.
pub fn noise_mode<T: Real>(k: usize, noise: &Signal<T>, sift: &SiftConfig) -> Result<Signal<T>> {
    if k == 0 {
        return Err(Error::invalid("mode index is 1-based"));
    }
    sift.validate()?;
    let (mut imfs, _) = emd_raw(noise.samples(), sift, Some(k));
    let mode = if imfs.len() >= k {
        imfs.swap_remove(k - 1)
    } else {
        vec![T::zero(); noise.len()]
    };
    Ok(Signal::from_raw(mode, noise.sample_rate()))
}

/// Ensemble EMD: average of the k-th IMFs of `signal + ε0·σ·w_i`.
pub fn eemd<T: Real>(signal: &Signal<T>, config: &EnsembleConfig) -> Result<EnsembleOutput<T>> {
    config.validate()?;
    let x = signal.samples();
    let n = x.len();
    let cap = config.imf_cap(n);
    let amp = T::lit(config.epsilon0) * std_dev(x);
    let inv_trials = T::one() / T::from_usize_lossy(config.trials);

    let mut sums: Vec<Vec<T>> = Vec::new();
    let mut residue_sum = vec![T::zero(); n];
    let trial_ids: Vec<u64> = (0..config.trials as u64).collect();
    for batch in trial_ids.chunks(EEMD_BATCH) {
        let results: Vec<(Vec<Vec<T>>, Vec<T>)> = batch
            .par_iter()
            .map(|&i| {
                let w = noise::noise_vec::<T>(n, config.base_seed, i);
                let xi: Vec<T> = x.iter().zip(&w).map(|(&v, &e)| v + amp * e).collect();
                emd_raw(&xi, &config.sift, Some(cap))
            })
            .collect();
        for (imfs, residue) in results {
            if sums.len() < imfs.len() {
                sums.resize(imfs.len(), vec![T::zero(); n]);
            }
            for (acc, imf) in sums.iter_mut().zip(&imfs) {
                add_into(acc, imf);
            }
            add_into(&mut residue_sum, &residue);
        }
    }

    let imfs: Vec<Vec<T>> = sums
        .into_iter()
        .map(|s| s.into_iter().map(|v| v * inv_trials).collect())
        .collect();
    let mut residue = x.to_vec();
    for imf in &imfs {
        sub_from(&mut residue, imf);
    }
    let raw_residue: Vec<T> = residue_sum.into_iter().map(|v| v * inv_trials).collect();
    Ok(EnsembleOutput {
        decomposition: Decomposition::from_parts(imfs, residue, signal.sample_rate()),
        raw_residue: Signal::from_raw(raw_residue, signal.sample_rate()),
    })
}

/// White-noise realizations and their EMD modes for one ensemble
/// configuration and signal length.
///
/// The bank depends only on the length, seed, trial count, sifting
/// parameters and mode cap, so it can be built once and shared by every
/// CEEMDAN run over signals of the same length.
#[derive(Debug, Clone)]
pub struct NoiseBank<T> {
    len: usize,
    config: EnsembleConfig,
    noises: Vec<Vec<T>>,
    /// `modes[i][k - 1]` is `E_k(w_i)` for `k = 1..cap-1`.
    modes: Vec<Vec<Vec<T>>>,
}

impl<T: Real> NoiseBank<T> {
    pub fn new(len: usize, config: &EnsembleConfig) -> Result<Self> {
        config.validate()?;
        if len == 0 {
            return Err(Error::invalid("noise bank needs a positive length"));
        }
        let cap = config.imf_cap(len);
        let noises: Vec<Vec<T>> = (0..config.trials as u64)
            .into_par_iter()
            .map(|i| noise::noise_vec(len, config.base_seed, i))
            .collect();
        let modes = if cap > 1 {
            noises
                .par_iter()
                .map(|w| emd_raw(w, &config.sift, Some(cap - 1)).0)
                .collect()
        } else {
            vec![Vec::new(); noises.len()]
        };
        Ok(Self {
            len,
            config: config.clone(),
            noises,
            modes,
        })
    }

    /// Placeholder for inputs that are returned before any noise is drawn.
    fn empty(len: usize, config: &EnsembleConfig) -> Self {
        Self {
            len,
            config: config.clone(),
            noises: Vec::new(),
            modes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Whether a run of `config` on `len` samples would draw exactly this bank.
    pub fn matches(&self, len: usize, config: &EnsembleConfig) -> bool {
        self.len == len
            && self.config.trials == config.trials
            && self.config.base_seed == config.base_seed
            && self.config.sift == config.sift
            && self.config.imf_cap(len) == config.imf_cap(len)
    }
}

/// Complete ensemble EMD with adaptive noise.
///
/// The first mode is the trial average of the first IMF of `x + ε0·σ(x)·w_i`.
/// Each later mode is the trial average of the first IMF of
/// `r_k + ε_k·E_k(w_i)`, where `E_k` is the k-th EMD mode of the i-th noise
/// realization and `ε_k = ε0·σ(r_k)`. The residue is updated by subtraction
/// after every stage, so the modes and final residue sum to the input.
pub fn ceemdan<T: Real>(signal: &Signal<T>, config: &EnsembleConfig) -> Result<EnsembleOutput<T>> {
    config.validate()?;
    if !extrema_of(signal.samples()).supports_envelopes() {
        return ceemdan_with(signal, config, &NoiseBank::empty(signal.len(), config));
    }
    ceemdan_with(signal, config, &NoiseBank::new(signal.len(), config)?)
}

/// [`ceemdan`] drawing its noise from a prebuilt bank.
pub fn ceemdan_with<T: Real>(
    signal: &Signal<T>,
    config: &EnsembleConfig,
    bank: &NoiseBank<T>,
) -> Result<EnsembleOutput<T>> {
    config.validate()?;
    let x = signal.samples();
    let n = x.len();
    let cap = config.imf_cap(n);
    let rate = signal.sample_rate();
    let eps0 = T::lit(config.epsilon0);

    let mut imfs: Vec<Vec<T>> = Vec::new();
    let mut residue = x.to_vec();
    if !extrema_of(x).supports_envelopes() {
        let residue = Signal::from_raw(residue, rate);
        return Ok(EnsembleOutput {
            decomposition: Decomposition::from_parts(imfs, residue.samples().to_vec(), rate),
            raw_residue: residue,
        });
    }
    if !bank.matches(n, config) {
        return Err(Error::invalid(
            "noise bank was built for a different length or configuration",
        ));
    }

    let first = ceemdan_stage(x, eps0 * std_dev(x), config, |i| {
        Some(bank.noises[i].as_slice())
    });
    sub_from(&mut residue, &first);
    imfs.push(first);

    while imfs.len() < cap && extrema_of(&residue).supports_envelopes() {
        let k = imfs.len(); // 1-based index of the noise mode for this stage
        let eps = eps0 * std_dev(&residue);
        let mode = ceemdan_stage(&residue, eps, config, |i| {
            bank.modes[i].get(k - 1).map(Vec::as_slice)
        });
        if mode.iter().all(|v| *v == T::zero()) {
            break;
        }
        sub_from(&mut residue, &mode);
        imfs.push(mode);
    }

    let decomposition = Decomposition::from_parts(imfs, residue, rate);
    let raw_residue = decomposition.residue.clone();
    Ok(EnsembleOutput {
        decomposition,
        raw_residue,
    })
}

/// Trial average of the first IMF of `base + eps * noise_of(i)`. Trials
/// whose noise is missing use `base` unperturbed; trials that cannot be
/// sifted contribute zeros.
fn ceemdan_stage<'a, T: Real>(
    base: &[T],
    eps: T,
    config: &EnsembleConfig,
    noise_of: impl Fn(usize) -> Option<&'a [T]> + Sync,
) -> Vec<T> {
    let trial_modes: Vec<Option<Vec<T>>> = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let perturbed: Vec<T> = match noise_of(i) {
                Some(w) => base.iter().zip(w).map(|(&v, &e)| v + eps * e).collect(),
                None => base.to_vec(),
            };
            extract_imf(&perturbed, &config.sift)
        })
        .collect();
    let mut acc = vec![T::zero(); base.len()];
    for mode in trial_modes.iter().flatten() {
        add_into(&mut acc, mode);
    }
    let inv_trials = T::one() / T::from_usize_lossy(config.trials);
    acc.iter_mut().for_each(|v| *v = *v * inv_trials);
    acc
}

fn add_into<T: Real>(acc: &mut [T], v: &[T]) {
    for (a, &b) in acc.iter_mut().zip(v) {
        *a = *a + b;
    }
}

fn sub_from<T: Real>(acc: &mut [T], v: &[T]) {
    for (a, &b) in acc.iter_mut().zip(v) {
        *a = *a - b;
    }
}

/// Which decomposition to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Emd,
    Eemd,
    Ceemdan,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "emd" => Ok(Method::Emd),
            "eemd" => Ok(Method::Eemd),
            "ceemdan" => Ok(Method::Ceemdan),
            other => Err(Error::invalid(format!(
                "unknown method '{other}' (expected emd, eemd or ceemdan)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Emd => "emd",
            Method::Eemd => "eemd",
            Method::Ceemdan => "ceemdan",
        })
    }
}

/// Runs `method`; plain EMD ignores the ensemble parameters.
pub fn decompose<T: Real>(
    signal: &Signal<T>,
    method: Method,
    config: &EnsembleConfig,
) -> Result<EnsembleOutput<T>> {
    match method {
        Method::Emd => {
            let decomposition = crate::emd(signal, &config.sift)?;
            let raw_residue = decomposition.residue.clone();
            Ok(EnsembleOutput {
                decomposition,
                raw_residue,
            })
        }
        Method::Eemd => eemd(signal, config),
        Method::Ceemdan => ceemdan(signal, config),
    }
}

/// Reproducibility record written next to every decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub method: Method,
    pub config: EnsembleConfig,
    pub seed: u64,
    pub sample_rate: u32,
    pub source_length: usize,
    pub mode_count: usize,
    pub reconstruction_error: f64,
    /// Raw trial-average defect; differs from `reconstruction_error` only for EEMD.
    pub raw_reconstruction_defect: f64,
}

impl RunManifest {
    pub fn new<T: Real>(
        method: Method,
        config: &EnsembleConfig,
        original: &Signal<T>,
        output: &EnsembleOutput<T>,
    ) -> Self {
        Self {
            method,
            config: config.clone(),
            seed: config.base_seed,
            sample_rate: original.sample_rate(),
            source_length: original.len(),
            mode_count: output.decomposition.mode_count(),
            reconstruction_error: output.decomposition.reconstruction_error(original),
            raw_reconstruction_defect: output.raw_defect(original),
        }
    }
}
