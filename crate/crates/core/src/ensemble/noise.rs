use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Real, Result, Signal};

/// One white-noise realization of an ensemble, keyed by trial index.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization<T> {
    pub trial_index: u64,
    pub samples: Signal<T>,
}

impl<T: Real> NoiseRealization<T> {
    pub fn generate(length: usize, base_seed: u64, trial_index: u64, sample_rate: u32) -> Result<Self> {
        let samples = gaussian_noise(length, base_seed, trial_index)?;
        Ok(Self {
            trial_index,
            samples: Signal::new(samples.into_samples(), sample_rate)?,
        })
    }
}

/// I.i.d. standard normal samples. Each `(base_seed, trial_index)` pair
/// selects its own ChaCha stream, so realizations do not depend on the
/// order or thread in which they are drawn.
pub fn gaussian_noise<T: Real>(length: usize, base_seed: u64, trial_index: u64) -> Result<Signal<T>> {
    if length == 0 {
        return Err(Error::invalid("noise length must be at least 1"));
    }
    Ok(Signal::from_raw(
        noise_vec(length, base_seed, trial_index),
        crate::DEFAULT_SAMPLE_RATE,
    ))
}

pub(crate) fn noise_vec<T: Real>(length: usize, base_seed: u64, trial_index: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(trial_index);
    (0..length)
        .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
        .collect()
}
