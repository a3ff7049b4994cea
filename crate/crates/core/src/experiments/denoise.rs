use std::io::Write;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::ensemble::{ceemdan_with, EnsembleConfig, NoiseBank};
use crate::format::{fmt_sig, write_columns_csv};
use crate::metrics::{assign_imfs, decompose_error, sar, sdr};
use crate::{mix, mix_at_snr, Error, Result, Signal};

/// Input SNRs of the published denoising table.
pub const TABLE3_SNR_DB: [f64; 4] = [0.0, 5.0, 10.0, 15.0];

/// One denoising run: the speech estimate and its quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseRow {
    /// Requested input SNR; `None` when the noisy signal was supplied as is.
    #[serde(with = "crate::metrics::report::db_opt")]
    pub snr_db: Option<f64>,
    #[serde(with = "crate::metrics::report::db")]
    pub sdr_db: f64,
    #[serde(with = "crate::metrics::report::db")]
    pub sar_db: f64,
    pub mode_count: usize,
    /// Mode indices (IMFs, then the residue) grouped into the speech estimate.
    pub speech_modes: Vec<usize>,
    #[serde(skip)]
    pub enhanced: Option<Signal<f64>>,
}

impl DenoiseRow {
    pub const CSV_HEADER: [&'static str; 5] = ["snr_db", "sdr_db", "sar_db", "modes", "speech_modes"];

    pub fn csv_record(&self) -> [String; 5] {
        let groups: Vec<String> = self.speech_modes.iter().map(|m| (m + 1).to_string()).collect();
        [
            self.snr_db.map_or_else(String::new, fmt_sig),
            fmt_sig(self.sdr_db),
            fmt_sig(self.sar_db),
            self.mode_count.to_string(),
            groups.join(" "),
        ]
    }
}

pub fn write_denoise_csv<W: Write>(rows: &[DenoiseRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DenoiseRow::CSV_HEADER)?;
    for r in rows {
        w.write_record(r.csv_record())?;
    }
    w.flush()?;
    Ok(())
}

/// Mixes `noise` into `clean` at each SNR, decomposes the mixture with
/// CEEMDAN, groups the modes against the clean speech and the scaled noise,
/// and scores the speech group.
pub fn denoise_eval(
    clean: &Signal<f64>,
    noise: &Signal<f64>,
    snr_db_list: &[f64],
    ensemble: &EnsembleConfig,
) -> Result<Vec<DenoiseRow>> {
    ensemble.validate()?;
    clean.check_compatible(noise)?;
    let bank = NoiseBank::new(clean.len(), ensemble)?;
    snr_db_list
        .iter()
        .map(|&snr| {
            let (noisy, scaled) = mix_at_snr(clean, noise, snr)?;
            let mut row = separate(clean, &noisy, &scaled, ensemble, &bank)?;
            row.snr_db = Some(snr);
            Ok(row)
        })
        .collect()
}

/// Denoises a recorded noisy signal against its clean reference; the noise
/// reference is their difference.
pub fn denoise_noisy(
    clean: &Signal<f64>,
    noisy: &Signal<f64>,
    ensemble: &EnsembleConfig,
) -> Result<DenoiseRow> {
    ensemble.validate()?;
    clean.check_compatible(noisy)?;
    let noise = noisy.sub(clean)?;
    if noise.energy() <= 0.0 {
        // nothing to remove: the input is already the clean signal
        let err = decompose_error(clean, noisy, None, &[])?;
        return Ok(DenoiseRow {
            snr_db: None,
            sdr_db: sdr(clean, noisy)?,
            sar_db: sar(&err)?,
            mode_count: 0,
            speech_modes: Vec::new(),
            enhanced: Some(noisy.clone()),
        });
    }
    let bank = NoiseBank::new(clean.len(), ensemble)?;
    separate(clean, noisy, &noise, ensemble, &bank)
}

fn separate(
    clean: &Signal<f64>,
    noisy: &Signal<f64>,
    noise: &Signal<f64>,
    ensemble: &EnsembleConfig,
    bank: &NoiseBank<f64>,
) -> Result<DenoiseRow> {
    let out = ceemdan_with(noisy, ensemble, bank)?;
    let dec = &out.decomposition;
    let asg = assign_imfs(dec, &[clean.clone(), noise.clone()])?;
    let enhanced = asg.estimates(dec).swap_remove(0);
    let sdr_db = sdr(clean, &enhanced)?;
    let sar_db = match decompose_error(clean, &enhanced, Some(noise), &[]).and_then(|e| sar(&e)) {
        Ok(v) => v,
        Err(Error::ZeroEnergy(what)) => {
            warn!("SAR undefined: {what} has no energy");
            f64::NAN
        }
        Err(e) => return Err(e),
    };
    Ok(DenoiseRow {
        snr_db: None,
        sdr_db,
        sar_db,
        mode_count: dec.mode_count(),
        speech_modes: asg.groups[0].clone(),
        enhanced: Some(enhanced),
    })
}

/// Outcome of decomposing an instantaneous mixture of two talkers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeechSpeechReport {
    /// SDR of each source estimate, in input order; NaN for a silent source.
    #[serde(with = "crate::metrics::report::db_vec")]
    pub per_source_sdr_db: Vec<f64>,
    pub groups: Vec<Vec<usize>>,
    pub mode_count: usize,
    /// Set when one input is silent, so there is nothing to separate.
    pub degenerate: bool,
    #[serde(skip)]
    pub sources: Vec<Signal<f64>>,
    #[serde(skip)]
    pub mixture: Option<Signal<f64>>,
    #[serde(skip)]
    pub estimates: Vec<Signal<f64>>,
}

impl SpeechSpeechReport {
    /// Time-domain panels: both sources, the mixture and both estimates.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let Some(mixture) = &self.mixture else {
            return Err(Error::invalid("report carries no signals"));
        };
        let fs = f64::from(mixture.sample_rate());
        let time: Vec<f64> = (0..mixture.len()).map(|n| n as f64 / fs).collect();
        let names = ["source_a", "source_b", "estimate_a", "estimate_b"];
        let mut cols: Vec<(&str, &[f64])> = vec![("time_s", &time)];
        cols.extend(names[..2].iter().zip(&self.sources).map(|(n, s)| (*n, s.samples())));
        cols.push(("mixture", mixture.samples()));
        cols.extend(names[2..].iter().zip(&self.estimates).map(|(n, s)| (*n, s.samples())));
        write_columns_csv(&cols, out)
    }
}

/// Mixes two talkers 1:1, decomposes with CEEMDAN and scores the best
/// grouping of modes against each talker.
pub fn speech_speech_demo(
    speech_a: &Signal<f64>,
    speech_b: &Signal<f64>,
    ensemble: &EnsembleConfig,
) -> Result<SpeechSpeechReport> {
    ensemble.validate()?;
    let mixture = mix(speech_a, speech_b, 1.0, 1.0)?;
    let sources = vec![speech_a.truncated(mixture.len()), speech_b.truncated(mixture.len())];
    let silent: Vec<bool> = sources.iter().map(|s| s.energy() <= 0.0).collect();
    if silent[0] && silent[1] {
        return Err(Error::ZeroEnergy("both talkers"));
    }
    let bank = NoiseBank::new(mixture.len(), ensemble)?;
    let out = ceemdan_with(&mixture, ensemble, &bank)?;
    let dec = &out.decomposition;

    if silent.contains(&true) {
        // the mixture is the active talker; every mode belongs to it
        let active = usize::from(silent[0]);
        let all: Vec<usize> = (0..=dec.mode_count()).collect();
        let mut groups = vec![Vec::new(), Vec::new()];
        groups[active] = all;
        let mut estimates = vec![Signal::zeros(mixture.len(), mixture.sample_rate())?; 2];
        estimates[active] = dec.reconstruct();
        let mut per_source_sdr_db = vec![f64::NAN; 2];
        per_source_sdr_db[active] = sdr(&sources[active], &estimates[active])?;
        return Ok(SpeechSpeechReport {
            per_source_sdr_db,
            groups,
            mode_count: dec.mode_count(),
            degenerate: true,
            sources,
            mixture: Some(mixture),
            estimates,
        });
    }

    let asg = assign_imfs(dec, &sources)?;
    Ok(SpeechSpeechReport {
        estimates: asg.estimates(dec),
        per_source_sdr_db: asg.per_source_sdr_db,
        groups: asg.groups,
        mode_count: dec.mode_count(),
        degenerate: false,
        sources,
        mixture: Some(mixture),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::synthetic::{synthetic_noise, synthetic_speech, NoiseKind, SpeakerProfile};

    fn small() -> EnsembleConfig {
        EnsembleConfig {
            trials: 8,
            ..EnsembleConfig::default()
        }
    }

    #[test]
    fn rows_follow_the_snr_list() {
        let clean = synthetic_speech(&SpeakerProfile::male(1), 0.25, 8000).unwrap();
        let noise = synthetic_noise(NoiseKind::Car, 0.25, 8000, 2).unwrap();
        let rows = denoise_eval(&clean, &noise, &[0.0, 15.0], &small()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].snr_db, Some(0.0));
        assert!(rows[1].sdr_db > rows[0].sdr_db);
        for r in &rows {
            assert_eq!(r.enhanced.as_ref().unwrap().len(), clean.len());
            assert!(!r.speech_modes.is_empty());
        }
        let mut buf = Vec::new();
        write_denoise_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("snr_db,sdr_db,sar_db,modes,speech_modes\n0,"));
    }

    #[test]
    fn clean_input_scores_infinite() {
        let clean = synthetic_speech(&SpeakerProfile::female(3), 0.3, 8000).unwrap();
        assert!(clean.energy() > 0.0);
        let row = denoise_noisy(&clean, &clean, &small()).unwrap();
        assert_eq!(row.sdr_db, f64::INFINITY);
        assert_eq!(row.sar_db, f64::INFINITY);
        assert_eq!(fmt_sig(row.sdr_db), "inf");
    }

    #[test]
    fn silent_partner_is_degenerate() {
        let a = synthetic_speech(&SpeakerProfile::male(5), 0.1, 8000).unwrap();
        let silence = Signal::zeros(a.len(), 8000).unwrap();
        let rep = speech_speech_demo(&a, &silence, &small()).unwrap();
        assert!(rep.degenerate);
        assert!(rep.per_source_sdr_db[0] > 100.0);
        assert!(rep.per_source_sdr_db[1].is_nan());
        assert!(speech_speech_demo(&silence, &silence, &small()).is_err());
    }

    #[test]
    fn swapping_talkers_permutes_sdrs() {
        let a = synthetic_speech(&SpeakerProfile::male(7), 0.15, 8000).unwrap();
        let b = synthetic_speech(&SpeakerProfile::female(8), 0.15, 8000).unwrap();
        let ab = speech_speech_demo(&a, &b, &small()).unwrap();
        let ba = speech_speech_demo(&b, &a, &small()).unwrap();
        assert!(!ab.degenerate);
        assert!((ab.per_source_sdr_db[0] - ba.per_source_sdr_db[1]).abs() < 1e-9);
        assert!((ab.per_source_sdr_db[1] - ba.per_source_sdr_db[0]).abs() < 1e-9);
        let mut buf = Vec::new();
        ab.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("time_s,source_a,source_b,mixture,estimate_a,estimate_b\n"));
        assert_eq!(text.lines().count(), a.len() + 1);
    }
}
