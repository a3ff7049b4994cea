//! Mono PCM WAV input/output.
//!
//! 16-bit integer samples are normalized by 32768 so they land in `[-1, 1)`;
//! 32-bit float files are read as-is.

use std::path::Path;

use hound::{SampleFormat, WavSpec, WavWriter};

use crate::{Error, Real, Result, Signal};

const PCM16_SCALE: f64 = 32768.0;
const MIN_RATE: u32 = 8000;
const MAX_RATE: u32 = 48000;

fn format_err(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io)
            if matches!(
                io.kind(),
                std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied
            ) =>
        {
            Error::Io(io)
        }
        other => Error::Format(other.to_string()),
    }
}

pub fn load_wav<T: Real>(path: impl AsRef<Path>) -> Result<Signal<T>> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(format_err)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::Format(format!(
            "{}: {} channels, only mono is supported",
            path.display(),
            spec.channels
        )));
    }
    if !(MIN_RATE..=MAX_RATE).contains(&spec.sample_rate) {
        return Err(Error::Format(format!(
            "{}: sample rate {} Hz outside {MIN_RATE}-{MAX_RATE} Hz",
            path.display(),
            spec.sample_rate
        )));
    }
    let samples: Vec<T> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| T::lit(f64::from(v) / PCM16_SCALE)))
            .collect::<std::result::Result<_, _>>()
            .map_err(format_err)?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| T::lit(f64::from(v))))
            .collect::<std::result::Result<_, _>>()
            .map_err(format_err)?,
        (fmt, bits) => {
            return Err(Error::Format(format!(
                "{}: {bits}-bit {fmt:?} samples; expected 16-bit PCM or 32-bit float",
                path.display()
            )))
        }
    };
    if samples.is_empty() {
        return Err(Error::Format(format!("{}: no samples", path.display())));
    }
    Signal::new(samples, spec.sample_rate).map_err(|e| Error::Format(e.to_string()))
}

/// Writes 16-bit PCM, clipping to the representable range.
pub fn save_wav<T: Real>(signal: &Signal<T>, path: impl AsRef<Path>) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec).map_err(format_err)?;
    for &x in signal.samples() {
        let v = (x.to_f64_lossy() * PCM16_SCALE)
            .round()
            .clamp(f64::from(i16::MIN), f64::from(i16::MAX));
        writer.write_sample(v as i16).map_err(format_err)?;
    }
    writer.finalize().map_err(format_err)
}

/// Writes 32-bit float samples without quantization.
pub fn save_wav_f32<T: Real>(signal: &Signal<T>, path: impl AsRef<Path>) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate(),
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut writer = WavWriter::create(path, spec).map_err(format_err)?;
    for &x in signal.samples() {
        writer
            .write_sample(x.to_f64_lossy() as f32)
            .map_err(format_err)?;
    }
    writer.finalize().map_err(format_err)
}
