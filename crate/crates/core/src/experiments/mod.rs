//! Reproductions of the two-tone separability studies and the speech
//! denoising / speech-on-speech evaluations.
//!
//! Everything here is concrete `f64`: these are end-to-end studies, not
//! numeric kernels.

mod denoise;
mod sweep;
pub mod synthetic;

pub use denoise::{
    denoise_eval, denoise_noisy, speech_speech_demo, write_denoise_csv, DenoiseRow,
    SpeechSpeechReport, TABLE3_SNR_DB,
};
pub use sweep::{
    amplitude_sweep, frequency_sweep, separability_verdict, two_tone_separation, SeparabilityVerdict,
    SweepConfig, SweepKind, SweepRow, write_sweep_csv, TABLE1_F2_HZ, TABLE2_A2,
};
