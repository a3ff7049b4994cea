//! `emdsep` command-line front end.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::UsageError;
use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "emdsep", version, about = "EMD, EEMD and CEEMDAN decomposition and separation studies")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. They override values from `--config`,
/// which in turn override the built-in defaults.
#[derive(Args, Debug)]
struct Common {
    /// Decomposition method: emd, eemd or ceemdan.
    #[arg(long, global = true, value_parser = parse_method)]
    method: Option<emdsep::Method>,
    /// Ensemble size.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Noise amplitude relative to the standard deviation of the residue.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    sd_threshold: Option<f64>,
    /// Sample rate for CSV inputs and synthesized signals.
    #[arg(long, global = true)]
    sample_rate: Option<u32>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// JSON run configuration, e.g. a `run_config.json` from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decompose a WAV or single-column CSV signal.
    Decompose {
        input: Option<PathBuf>,
    },
    /// Two-tone separability sweep over frequency or amplitude ratio.
    Sweep {
        #[arg(value_enum)]
        kind: SweepKindArg,
        /// Comma-separated second-tone frequencies (freq) or amplitudes (amp).
        #[arg(long)]
        grid: Option<String>,
        /// Tone duration in seconds.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Separate speech from noise and score the speech estimate.
    Denoise {
        #[arg(long)]
        clean: Option<PathBuf>,
        /// Noise mixed into the clean speech at each SNR.
        #[arg(long, conflicts_with = "noisy")]
        noise: Option<PathBuf>,
        /// A noisy recording of the clean speech, used as is.
        #[arg(long)]
        noisy: Option<PathBuf>,
        /// Synthetic noise (babble, airport, car) when no noise file is given.
        #[arg(long)]
        noise_type: Option<String>,
        /// Comma-separated input SNRs in dB.
        #[arg(long)]
        snr: Option<String>,
    },
    /// Mix two talkers 1:1 and try to separate them.
    SeparateSpeech {
        speech_a: Option<PathBuf>,
        speech_b: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SweepKindArg {
    Freq,
    Amp,
}

fn parse_method(s: &str) -> Result<emdsep::Method, String> {
    s.parse().map_err(|e: emdsep::Error| e.to_string())
}

fn parse_list(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| UsageError(format!("'{v}' is not a number")).into())
        })
        .collect()
}

fn resolve(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let c = &cli.common;
    if let Some(m) = c.method {
        cfg.method = m;
    }
    if let Some(v) = c.trials {
        cfg.ensemble.trials = v;
    }
    if let Some(v) = c.epsilon {
        cfg.ensemble.epsilon0 = v;
    }
    if let Some(v) = c.seed {
        cfg.ensemble.base_seed = v;
    }
    if let Some(v) = c.sd_threshold {
        cfg.ensemble.sift.sd_threshold = v;
    }
    if let Some(v) = c.sample_rate {
        cfg.sample_rate = v;
    }
    if let Some(v) = &c.out_dir {
        cfg.out_dir = v.clone();
    }
    match &cli.command {
        Command::Decompose { input } => {
            if let Some(p) = input {
                cfg.decompose.input = Some(p.clone());
            }
        }
        Command::Sweep { kind, grid, duration } => {
            if let Some(g) = grid {
                let values = parse_list(g)?;
                match kind {
                    SweepKindArg::Freq => cfg.sweep.variable_freqs_hz = values,
                    SweepKindArg::Amp => cfg.sweep.variable_amps = values,
                }
            }
            if let Some(d) = duration {
                cfg.sweep.duration_s = *d;
            }
        }
        Command::Denoise { clean, noise, noisy, noise_type, snr } => {
            let d = &mut cfg.denoise;
            if clean.is_some() {
                d.clean = clean.clone();
            }
            if noise.is_some() {
                d.noise = noise.clone();
                d.noisy = None;
            }
            if noisy.is_some() {
                d.noisy = noisy.clone();
                d.noise = None;
            }
            if let Some(t) = noise_type {
                d.noise_type = t.clone();
            }
            if let Some(s) = snr {
                d.snr_db = parse_list(s)?;
            }
        }
        Command::SeparateSpeech { speech_a, speech_b } => {
            if speech_a.is_some() {
                cfg.separate.speech_a = speech_a.clone();
            }
            if speech_b.is_some() {
                cfg.separate.speech_b = speech_b.clone();
            }
        }
    }
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = resolve(&cli)?;
    cfg.ensemble.validate()?;
    match cli.command {
        Command::Decompose { .. } => commands::decompose(&cfg),
        Command::Sweep { kind, .. } => commands::sweep(&cfg, kind == SweepKindArg::Amp),
        Command::Denoise { .. } => commands::denoise(&cfg),
        Command::SeparateSpeech { .. } => commands::separate_speech(&cfg),
    }
}

/// 1 for usage errors, 2 for unreadable or malformed files, 3 for numeric
/// failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    use emdsep::Error as E;
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    if let Some(e) = err.downcast_ref::<E>() {
        return match e {
            E::InvalidInput(_) => 1,
            E::SampleRateMismatch(..) | E::LengthMismatch(..) => 2,
            e if e.is_io() => 2,
            _ => 3,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() || err.downcast_ref::<serde_json::Error>().is_some() {
        return 2;
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("emdsep").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"ensemble": {"trials": 3, "epsilon0": 0.4}, "sample_rate": 16000}"#).unwrap();
        let p = path.to_str().unwrap();
        let cfg = resolve(&parse(&["sweep", "freq", "--config", p, "--trials", "9"])).unwrap();
        assert_eq!(cfg.ensemble.trials, 9);
        assert_eq!(cfg.ensemble.epsilon0, 0.4);
        assert_eq!(cfg.sample_rate, 16000);
        assert_eq!(cfg.ensemble.base_seed, 0);
    }

    #[test]
    fn lists_and_methods_parse() {
        let cfg = resolve(&parse(&["sweep", "amp", "--grid", "0.5, 2"])).unwrap();
        assert_eq!(cfg.sweep.variable_amps, vec![0.5, 2.0]);
        let cfg = resolve(&parse(&["sweep", "freq", "--grid", ""])).unwrap();
        assert!(cfg.sweep.variable_freqs_hz.is_empty());
        assert!(resolve(&parse(&["sweep", "freq", "--grid", "1,x"])).is_err());
        assert!(Cli::try_parse_from(["emdsep", "decompose", "--method", "vmd"]).is_err());
        let cfg = resolve(&parse(&["decompose", "a.wav", "--method", "EEMD"])).unwrap();
        assert_eq!(cfg.method, emdsep::Method::Eemd);
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        let usage: anyhow::Error = UsageError("x".into()).into();
        assert_eq!(exit_code(&usage), 1);
        let io: anyhow::Error = emdsep::Error::Format("bad".into()).into();
        assert_eq!(exit_code(&io), 2);
        let num: anyhow::Error = emdsep::Error::ZeroEnergy("noise").into();
        assert_eq!(exit_code(&num), 3);
    }
}
