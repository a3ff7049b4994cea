use std::path::{Path, PathBuf};

use emdsep::experiments::{SweepConfig, TABLE1_F2_HZ, TABLE2_A2, TABLE3_SNR_DB};
use emdsep::{EnsembleConfig, Method, DEFAULT_SAMPLE_RATE};
use serde::{Deserialize, Serialize};

/// Everything a run depends on. Written to `run_config.json` in the output
/// directory; passing that file back with `--config` repeats the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub method: Method,
    pub ensemble: EnsembleConfig,
    /// Rate assumed for CSV inputs and synthesized signals.
    pub sample_rate: u32,
    pub out_dir: PathBuf,
    pub decompose: DecomposeArgs,
    pub sweep: SweepArgs,
    pub denoise: DenoiseArgs,
    pub separate: SeparateArgs,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: Method::Ceemdan,
            ensemble: EnsembleConfig::default(),
            sample_rate: DEFAULT_SAMPLE_RATE,
            out_dir: PathBuf::from("out"),
            decompose: DecomposeArgs::default(),
            sweep: SweepArgs::default(),
            denoise: DenoiseArgs::default(),
            separate: SeparateArgs::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeArgs {
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepArgs {
    pub fixed_freq_hz: f64,
    pub variable_freqs_hz: Vec<f64>,
    pub fixed_amp: f64,
    pub variable_amps: Vec<f64>,
    pub amp_sweep_freq_hz: f64,
    pub duration_s: f64,
    pub phase_rad: f64,
}

impl Default for SweepArgs {
    fn default() -> Self {
        let d = SweepConfig::default();
        Self {
            fixed_freq_hz: d.fixed_freq_hz,
            variable_freqs_hz: TABLE1_F2_HZ.to_vec(),
            fixed_amp: d.fixed_amp,
            variable_amps: TABLE2_A2.to_vec(),
            amp_sweep_freq_hz: d.amp_sweep_freq_hz,
            duration_s: d.duration_s,
            phase_rad: d.phase_rad,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenoiseArgs {
    /// Clean speech; synthetic speech when unset.
    pub clean: Option<PathBuf>,
    /// Noise to mix in at each SNR.
    pub noise: Option<PathBuf>,
    /// A recorded noisy version of `clean`, used as is.
    pub noisy: Option<PathBuf>,
    /// Synthetic noise type used when neither `noise` nor `noisy` is set.
    pub noise_type: String,
    pub snr_db: Vec<f64>,
    /// Length of synthesized signals.
    pub duration_s: f64,
}

impl Default for DenoiseArgs {
    fn default() -> Self {
        Self {
            clean: None,
            noise: None,
            noisy: None,
            noise_type: "babble".into(),
            snr_db: TABLE3_SNR_DB.to_vec(),
            duration_s: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeparateArgs {
    /// Talker recordings; synthetic male and female talkers when unset.
    pub speech_a: Option<PathBuf>,
    pub speech_b: Option<PathBuf>,
    pub duration_s: f64,
}

impl Default for SeparateArgs {
    fn default() -> Self {
        Self {
            speech_a: None,
            speech_b: None,
            duration_s: 1.0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn sweep_config(&self) -> SweepConfig {
        let s = &self.sweep;
        SweepConfig {
            fixed_freq_hz: s.fixed_freq_hz,
            variable_freqs_hz: s.variable_freqs_hz.clone(),
            fixed_amp: s.fixed_amp,
            variable_amps: s.variable_amps.clone(),
            amp_sweep_freq_hz: s.amp_sweep_freq_hz,
            sample_rate: self.sample_rate,
            duration_s: s.duration_s,
            phase_rad: s.phase_rad,
            ensemble: self.ensemble.clone(),
        }
    }
}
