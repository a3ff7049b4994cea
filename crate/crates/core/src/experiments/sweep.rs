use std::io::Write;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::ensemble::{ceemdan_with, EnsembleConfig, NoiseBank};
use crate::format::fmt_sig;
use crate::metrics::{assign_imfs, Assignment};
use crate::{mix, synth_sine, Error, Result, Signal, DEFAULT_SAMPLE_RATE};

/// Second-tone frequencies of the frequency sweep (first tone at 700 Hz).
pub const TABLE1_F2_HZ: [f64; 21] = [
    300.0, 350.0, 400.0, 450.0, 500.0, 550.0, 600.0, 650.0, 750.0, 800.0, 850.0, 900.0, 950.0,
    1000.0, 1050.0, 1100.0, 1150.0, 1200.0, 1250.0, 1300.0, 1350.0,
];

/// Second-tone amplitudes of the amplitude sweep (first tone at amplitude 1).
pub const TABLE2_A2: [f64; 18] = [
    0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.2, 1.5, 1.9, 2.0, 2.5, 3.0, 3.5, 4.0, 4.1,
];

const FREQ_RATIO_LOW: f64 = 0.6;
const FREQ_RATIO_HIGH: f64 = 1.6;
const AMP_RATIO_LOW: f64 = 0.3;
const AMP_RATIO_HIGH: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub fixed_freq_hz: f64,
    pub variable_freqs_hz: Vec<f64>,
    pub fixed_amp: f64,
    pub variable_amps: Vec<f64>,
    /// Second-tone frequency held during the amplitude sweep.
    pub amp_sweep_freq_hz: f64,
    pub sample_rate: u32,
    pub duration_s: f64,
    pub phase_rad: f64,
    pub ensemble: EnsembleConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            fixed_freq_hz: 700.0,
            variable_freqs_hz: TABLE1_F2_HZ.to_vec(),
            fixed_amp: 1.0,
            variable_amps: TABLE2_A2.to_vec(),
            amp_sweep_freq_hz: 300.0,
            sample_rate: DEFAULT_SAMPLE_RATE,
            duration_s: 1.0,
            phase_rad: 0.0,
            ensemble: EnsembleConfig::default(),
        }
    }
}

impl SweepConfig {
    /// Samples per synthesized tone.
    pub fn sample_count(&self) -> usize {
        (self.duration_s * f64::from(self.sample_rate)).round() as usize
    }

    pub fn validate(&self, kind: SweepKind) -> Result<()> {
        let grid_empty = match kind {
            SweepKind::Frequency => self.variable_freqs_hz.is_empty(),
            SweepKind::Amplitude => self.variable_amps.is_empty(),
        };
        if grid_empty {
            return Err(Error::invalid("sweep grid is empty"));
        }
        if !(self.duration_s.is_finite() && self.sample_count() > 0) {
            return Err(Error::invalid("tone duration must cover at least one sample"));
        }
        let nyquist = f64::from(self.sample_rate) / 2.0;
        let freqs = std::iter::once(self.fixed_freq_hz)
            .chain(std::iter::once(self.amp_sweep_freq_hz))
            .chain(self.variable_freqs_hz.iter().copied());
        for f in freqs {
            if !(f > 0.0 && f < nyquist) {
                return Err(Error::invalid(format!(
                    "frequency {f} Hz outside (0, {nyquist}) Hz"
                )));
            }
        }
        if self.fixed_amp <= 0.0 || self.variable_amps.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::invalid("amplitudes must be positive"));
        }
        self.ensemble.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    #[serde(rename = "freq")]
    Frequency,
    #[serde(rename = "amp")]
    Amplitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparabilityVerdict {
    pub freq_condition_met: bool,
    pub amp_condition_met: bool,
    pub predicted_separable: bool,
}

/// Two tones are predicted separable when their frequency ratio lies
/// outside `[0.6, 1.6]` and their amplitude ratio inside `[0.3, 3]`.
pub fn separability_verdict(f1: f64, f2: f64, a1: f64, a2: f64) -> Result<SeparabilityVerdict> {
    if [f1, f2, a1, a2].iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("frequencies and amplitudes must be positive"));
    }
    let fr = f2 / f1;
    let ar = a2 / a1;
    let freq_condition_met = !(FREQ_RATIO_LOW..=FREQ_RATIO_HIGH).contains(&fr);
    let amp_condition_met = (AMP_RATIO_LOW..=AMP_RATIO_HIGH).contains(&ar);
    Ok(SeparabilityVerdict {
        freq_condition_met,
        amp_condition_met,
        predicted_separable: freq_condition_met && amp_condition_met,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub f1_hz: f64,
    pub f2_hz: f64,
    pub a1: f64,
    pub a2: f64,
    /// F2/F1 for frequency sweeps, A2/A1 for amplitude sweeps.
    pub ratio: f64,
    /// Mean of the two per-tone SDRs under the best mode grouping.
    #[serde(with = "crate::metrics::report::db")]
    pub sdr_db: f64,
    #[serde(with = "crate::metrics::report::db_vec")]
    pub per_source_sdr_db: Vec<f64>,
    pub mode_count: usize,
    pub verdict: SeparabilityVerdict,
    /// Set when this row could not be computed; the sweep carries on.
    pub error: Option<String>,
}

/// Synthesizes `a1·sin(2πf1 t) + a2·sin(2πf2 t)`, runs CEEMDAN and groups
/// the modes against the two tones.
pub fn two_tone_separation(
    f1: f64,
    a1: f64,
    f2: f64,
    a2: f64,
    config: &SweepConfig,
) -> Result<(Assignment, usize)> {
    let bank = NoiseBank::new(config.sample_count(), &config.ensemble)?;
    two_tone_with(f1, a1, f2, a2, config, &bank)
}

fn two_tone_with(
    f1: f64,
    a1: f64,
    f2: f64,
    a2: f64,
    config: &SweepConfig,
    bank: &NoiseBank<f64>,
) -> Result<(Assignment, usize)> {
    let s1: Signal<f64> = synth_sine(f1, a1, config.phase_rad, config.duration_s, config.sample_rate)?;
    let s2: Signal<f64> = synth_sine(f2, a2, config.phase_rad, config.duration_s, config.sample_rate)?;
    let x = mix(&s1, &s2, 1.0, 1.0)?;
    let out = ceemdan_with(&x, &config.ensemble, bank)?;
    let asg = assign_imfs(&out.decomposition, &[s1, s2])?;
    Ok((asg, out.decomposition.mode_count()))
}

fn row(
    (f1, a1): (f64, f64),
    (f2, a2): (f64, f64),
    ratio: f64,
    config: &SweepConfig,
    bank: &NoiseBank<f64>,
) -> SweepRow {
    let verdict = separability_verdict(f1, f2, a1, a2).unwrap_or(SeparabilityVerdict {
        freq_condition_met: false,
        amp_condition_met: false,
        predicted_separable: false,
    });
    let mut r = SweepRow {
        f1_hz: f1,
        f2_hz: f2,
        a1,
        a2,
        ratio,
        sdr_db: f64::NAN,
        per_source_sdr_db: Vec::new(),
        mode_count: 0,
        verdict,
        error: None,
    };
    match two_tone_with(f1, a1, f2, a2, config, bank) {
        Ok((asg, modes)) => {
            r.sdr_db = asg.mean_sdr_db();
            r.per_source_sdr_db = asg.per_source_sdr_db;
            r.mode_count = modes;
        }
        Err(e) => {
            warn!("sweep row f2={f2} a2={a2} failed: {e}");
            r.error = Some(e.to_string());
        }
    }
    r
}

/// Equal-amplitude tones at `fixed_freq_hz` and each of `variable_freqs_hz`.
pub fn frequency_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate(SweepKind::Frequency)?;
    let (f1, a) = (config.fixed_freq_hz, config.fixed_amp);
    let bank = NoiseBank::new(config.sample_count(), &config.ensemble)?;
    Ok(config
        .variable_freqs_hz
        .iter()
        .map(|&f2| row((f1, a), (f2, a), f2 / f1, config, &bank))
        .collect())
}

/// Tones at `fixed_freq_hz` / `amp_sweep_freq_hz` with amplitudes
/// `fixed_amp` and each of `variable_amps`.
pub fn amplitude_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate(SweepKind::Amplitude)?;
    let (f1, f2, a1) = (config.fixed_freq_hz, config.amp_sweep_freq_hz, config.fixed_amp);
    let bank = NoiseBank::new(config.sample_count(), &config.ensemble)?;
    Ok(config
        .variable_amps
        .iter()
        .map(|&a2| row((f1, a1), (f2, a2), a2 / a1, config, &bank))
        .collect())
}

impl SweepRow {
    /// Header matching [`SweepRow::csv_record`]; the leading columns follow
    /// the published table layout for each sweep kind.
    pub fn csv_header(kind: SweepKind) -> Vec<&'static str> {
        let lead: [&str; 3] = match kind {
            SweepKind::Frequency => ["F1(Hz)", "F2(Hz)", "SDR(dB)"],
            SweepKind::Amplitude => ["A1", "A2", "SDR(dB)"],
        };
        let mut h = lead.to_vec();
        h.extend([
            "ratio",
            "SDR1(dB)",
            "SDR2(dB)",
            "modes",
            "freq_condition",
            "amp_condition",
            "predicted_separable",
        ]);
        h
    }

    pub fn csv_record(&self, kind: SweepKind) -> Vec<String> {
        let (a, b) = match kind {
            SweepKind::Frequency => (self.f1_hz, self.f2_hz),
            SweepKind::Amplitude => (self.a1, self.a2),
        };
        let src = |i: usize| self.per_source_sdr_db.get(i).map_or_else(String::new, |v| fmt_sig(*v));
        vec![
            fmt_sig(a),
            fmt_sig(b),
            fmt_sig(self.sdr_db),
            fmt_sig(self.ratio),
            src(0),
            src(1),
            self.mode_count.to_string(),
            self.verdict.freq_condition_met.to_string(),
            self.verdict.amp_condition_met.to_string(),
            self.verdict.predicted_separable.to_string(),
        ]
    }
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], kind: SweepKind, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SweepRow::csv_header(kind))?;
    for r in rows {
        w.write_record(r.csv_record(kind))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_examples() {
        assert!(separability_verdict(700.0, 300.0, 1.0, 1.0).unwrap().predicted_separable);
        let v = separability_verdict(700.0, 650.0, 1.0, 1.0).unwrap();
        assert!(!v.freq_condition_met && v.amp_condition_met && !v.predicted_separable);
        let v = separability_verdict(700.0, 300.0, 1.0, 4.0).unwrap();
        assert!(v.freq_condition_met && !v.amp_condition_met && !v.predicted_separable);
        assert!(separability_verdict(0.0, 300.0, 1.0, 1.0).is_err());
        assert!(separability_verdict(700.0, 300.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn grids_have_published_sizes() {
        assert_eq!(TABLE1_F2_HZ.len(), 21);
        assert_eq!(TABLE2_A2.len(), 18);
    }

    #[test]
    fn empty_or_invalid_grids_rejected() {
        let cfg = SweepConfig {
            variable_freqs_hz: vec![],
            ..SweepConfig::default()
        };
        assert!(frequency_sweep(&cfg).is_err());
        let cfg = SweepConfig {
            variable_amps: vec![],
            ..SweepConfig::default()
        };
        assert!(amplitude_sweep(&cfg).is_err());
        let cfg = SweepConfig {
            variable_freqs_hz: vec![4100.0],
            ..SweepConfig::default()
        };
        assert!(frequency_sweep(&cfg).is_err());
    }

    #[test]
    fn small_sweep_runs_in_order() {
        let cfg = SweepConfig {
            variable_freqs_hz: vec![300.0, 700.0],
            duration_s: 0.1,
            ensemble: EnsembleConfig {
                trials: 4,
                ..EnsembleConfig::default()
            },
            ..SweepConfig::default()
        };
        let rows = frequency_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].f2_hz, 300.0);
        assert!(rows[0].error.is_none());
        // identical tones collapse into one: the split into two equal
        // halves is not recoverable
        assert!(rows[1].sdr_db < 10.0, "{}", rows[1].sdr_db);
        assert!(rows[0].sdr_db > rows[1].sdr_db + 5.0);
        let mut buf = Vec::new();
        write_sweep_csv(&rows, SweepKind::Frequency, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("F1(Hz),F2(Hz),SDR(dB),ratio"));
        assert_eq!(text.lines().count(), 3);
    }
}
