use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::Context;
use emdsep::experiments::synthetic::{synthetic_noise, synthetic_speech, NoiseKind, SpeakerProfile};
use emdsep::experiments::{
    amplitude_sweep, denoise_eval, denoise_noisy, frequency_sweep, speech_speech_demo,
    write_denoise_csv, write_sweep_csv, DenoiseRow, SweepKind,
};
use emdsep::format::{fmt_sig, read_signal_csv, write_decomposition_csv};
use emdsep::spectrogram::{spectrogram, write_spectrogram_csv};
use emdsep::{decompose as run_decomposition, load_wav, save_wav, RunManifest, Signal64};
use serde::Serialize;

use crate::config::RunConfig;

const SPECTROGRAM_FRAME: usize = 256;
const SPECTROGRAM_HOP: usize = 128;

/// A problem with the command line itself.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Loads a WAV file, or a CSV file whose first column holds the samples.
fn load_signal(path: &Path, sample_rate: u32) -> anyhow::Result<Signal64> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    let signal = match ext.as_str() {
        "wav" => load_wav(path)?,
        "csv" => read_signal_csv(File::open(path)?, sample_rate)?,
        _ => {
            return Err(emdsep::Error::Format(format!(
                "{}: expected a .wav or .csv file",
                path.display()
            ))
            .into())
        }
    };
    Ok(signal)
}

fn load(path: &Path, sample_rate: u32) -> anyhow::Result<Signal64> {
    load_signal(path, sample_rate).with_context(|| format!("reading {}", path.display()))
}

fn out_path(cfg: &RunConfig, name: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    Ok(cfg.out_dir.join(name))
}

fn create(cfg: &RunConfig, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = out_path(cfg, name)?;
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

#[derive(Serialize)]
struct Manifest<'a, R: Serialize> {
    command: &'a str,
    config: &'a RunConfig,
    result: R,
}

/// Writes `run_config.json` (re-runnable with `--config`) and
/// `manifest.json` (config plus results).
fn write_manifest<R: Serialize>(cfg: &RunConfig, command: &str, result: R) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(create(cfg, "run_config.json")?, cfg)?;
    let m = Manifest {
        command,
        config: cfg,
        result,
    };
    serde_json::to_writer_pretty(create(cfg, "manifest.json")?, &m)?;
    Ok(())
}

pub fn decompose(cfg: &RunConfig) -> anyhow::Result<()> {
    let input = cfg
        .decompose
        .input
        .as_deref()
        .ok_or_else(|| usage("decompose needs an input file"))?;
    let x = load(input, cfg.sample_rate)?;
    let out = run_decomposition(&x, cfg.method, &cfg.ensemble)?;
    write_decomposition_csv(&out.decomposition, create(cfg, "decomposition.csv")?)?;
    let manifest = RunManifest::new(cfg.method, &cfg.ensemble, &x, &out);
    println!(
        "{} modes, reconstruction error {}",
        manifest.mode_count,
        fmt_sig(manifest.reconstruction_error)
    );
    write_manifest(cfg, "decompose", manifest)
}

pub fn sweep(cfg: &RunConfig, amplitude: bool) -> anyhow::Result<()> {
    let sc = cfg.sweep_config();
    let (kind, rows) = if amplitude {
        (SweepKind::Amplitude, amplitude_sweep(&sc)?)
    } else {
        (SweepKind::Frequency, frequency_sweep(&sc)?)
    };
    let name = match kind {
        SweepKind::Frequency => "sweep_freq.csv",
        SweepKind::Amplitude => "sweep_amp.csv",
    };
    write_sweep_csv(&rows, kind, create(cfg, name)?)?;
    for r in &rows {
        let verdict = if r.verdict.predicted_separable {
            "separable"
        } else {
            "not separable"
        };
        let lead = match kind {
            SweepKind::Frequency => format!("F2 = {} Hz", fmt_sig(r.f2_hz)),
            SweepKind::Amplitude => format!("A2 = {}", fmt_sig(r.a2)),
        };
        match &r.error {
            None => println!(
                "{lead}  ratio {}  SDR {} dB  predicted {verdict}",
                fmt_sig(r.ratio),
                fmt_sig(r.sdr_db)
            ),
            Some(e) => println!("{lead}  failed: {e}"),
        }
    }
    write_manifest(cfg, "sweep", &rows)
}

fn synthetic_clean(cfg: &RunConfig, duration_s: f64, seed: u64) -> anyhow::Result<Signal64> {
    Ok(synthetic_speech(&SpeakerProfile::male(seed), duration_s, cfg.sample_rate)?)
}

fn write_spectrogram(cfg: &RunConfig, name: &str, x: &Signal64) -> anyhow::Result<()> {
    if x.len() < SPECTROGRAM_FRAME {
        return Ok(());
    }
    let spec = spectrogram(x, SPECTROGRAM_FRAME, SPECTROGRAM_HOP)?;
    let out = create(cfg, name)?;
    write_spectrogram_csv(&spec, x.sample_rate(), SPECTROGRAM_FRAME, SPECTROGRAM_HOP, out)?;
    Ok(())
}

fn snr_tag(row: &DenoiseRow) -> String {
    row.snr_db
        .map_or_else(String::new, |s| format!("_snr{}", fmt_sig(s)))
}

pub fn denoise(cfg: &RunConfig) -> anyhow::Result<()> {
    let d = &cfg.denoise;
    let clean = match &d.clean {
        Some(p) => load(p, cfg.sample_rate)?,
        None => synthetic_clean(cfg, d.duration_s, 1)?,
    };
    let rows = if let Some(p) = &d.noisy {
        let noisy = load(p, cfg.sample_rate)?;
        write_spectrogram(cfg, "spectrogram_noisy.csv", &noisy)?;
        vec![denoise_noisy(&clean, &noisy, &cfg.ensemble)?]
    } else {
        if d.snr_db.is_empty() {
            return Err(usage("no input SNRs given"));
        }
        let noise = match &d.noise {
            Some(p) => load(p, cfg.sample_rate)?,
            None => {
                let kind: NoiseKind = d.noise_type.parse()?;
                synthetic_noise(kind, clean.duration_s(), clean.sample_rate(), 2)?
            }
        };
        denoise_eval(&clean, &noise, &d.snr_db, &cfg.ensemble)?
    };
    write_denoise_csv(&rows, create(cfg, "denoise.csv")?)?;
    write_spectrogram(cfg, "spectrogram_clean.csv", &clean)?;
    for r in &rows {
        if let Some(enhanced) = &r.enhanced {
            let tag = snr_tag(r);
            save_wav(enhanced, out_path(cfg, &format!("enhanced{tag}.wav"))?)?;
            write_spectrogram(cfg, &format!("spectrogram_enhanced{tag}.csv"), enhanced)?;
        }
        let snr = r.snr_db.map_or_else(|| "recorded".to_string(), |s| format!("{} dB", fmt_sig(s)));
        println!(
            "input SNR {snr}  SDR {} dB  SAR {} dB",
            fmt_sig(r.sdr_db),
            fmt_sig(r.sar_db)
        );
    }
    write_manifest(cfg, "denoise", &rows)
}

pub fn separate_speech(cfg: &RunConfig) -> anyhow::Result<()> {
    let s = &cfg.separate;
    let a = match &s.speech_a {
        Some(p) => load(p, cfg.sample_rate)?,
        None => synthetic_clean(cfg, s.duration_s, 1)?,
    };
    let b = match &s.speech_b {
        Some(p) => load(p, cfg.sample_rate)?,
        None => synthetic_speech(&SpeakerProfile::female(2), s.duration_s, cfg.sample_rate)?,
    };
    let report = speech_speech_demo(&a, &b, &cfg.ensemble)?;
    report.write_csv(create(cfg, "separate_speech.csv")?)?;
    let mut w = csv::Writer::from_writer(create(cfg, "separate_speech_metrics.csv")?);
    w.write_record(["source", "sdr_db", "modes"])?;
    for (i, (sdr, group)) in report.per_source_sdr_db.iter().zip(&report.groups).enumerate() {
        let modes: Vec<String> = group.iter().map(|m| (m + 1).to_string()).collect();
        let name = if i == 0 { "a" } else { "b" };
        w.write_record([name.to_string(), fmt_sig(*sdr), modes.join(" ")])?;
        println!("talker {name}: SDR {} dB", fmt_sig(*sdr));
    }
    w.flush()?;
    if report.degenerate {
        println!("one input is silent; nothing to separate");
    }
    write_manifest(cfg, "separate-speech", &report)
}
