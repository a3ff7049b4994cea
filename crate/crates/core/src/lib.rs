//! Empirical mode decomposition toolkit for single-channel source separation.
//!
//! The crate provides plain EMD, ensemble EMD (EEMD) and complete ensemble
//! EMD with adaptive noise (CEEMDAN), the SDR/SAR/SNR metric family used to
//! score separations, and a harness that runs two-tone sweeps and
//! speech-denoising studies on top of them.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`). The `*64`
//! aliases at the crate root pin the common double-precision instantiation.
//!
//! ```
//! use emdsep::{emd, mix, synth_sine, SiftConfig, Signal64};
//!
//! let a: Signal64 = synth_sine(700.0, 1.0, 0.0, 0.25, 8000).unwrap();
//! let b: Signal64 = synth_sine(300.0, 1.0, 0.0, 0.25, 8000).unwrap();
//! let x = mix(&a, &b, 1.0, 1.0).unwrap();
//! let dec = emd(&x, &SiftConfig::default()).unwrap();
//! assert!(dec.reconstruction_error(&x) < 1e-10);
//! ```

pub mod emd;
pub mod ensemble;
mod error;
pub mod experiments;
pub mod format;
pub mod metrics;
mod num;
pub mod signal;
pub mod spectrogram;
pub mod wav;

pub use emd::{
    emd, envelope, find_local_extrema, is_imf, sd_criterion, sift_once, Boundary, Decomposition,
    ExtremaSet, SiftConfig,
};
pub use ensemble::{
    ceemdan, ceemdan_with, decompose, eemd, gaussian_noise, noise_mode, EnsembleConfig,
    EnsembleOutput, Method, NoiseBank, NoiseRealization, RunManifest,
};
pub use error::{Error, Result};
pub use metrics::{
    assign_greedy, assign_imfs, decompose_error, sar, sdr, snr, Assignment, ErrorDecomposition,
    MetricsReport,
};
pub use num::Real;
pub use signal::{mix, mix_at_snr, synth_sine, MixSpec, Signal, DEFAULT_SAMPLE_RATE};
pub use spectrogram::spectrogram;
pub use wav::{load_wav, save_wav};

pub type Signal64 = Signal<f64>;
pub type Signal32 = Signal<f32>;
pub type Decomposition64 = Decomposition<f64>;
pub type Decomposition32 = Decomposition<f32>;
pub type ErrorDecomposition64 = ErrorDecomposition<f64>;
