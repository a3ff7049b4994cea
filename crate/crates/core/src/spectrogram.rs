use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::{Error, Real, Result, Signal};

/// Hann-windowed short-time magnitude spectrum, one row per frame and
/// `frame_len / 2 + 1` bins per row.
pub fn spectrogram<T: Real>(signal: &Signal<T>, frame_len: usize, hop: usize) -> Result<Vec<Vec<T>>> {
    if frame_len < 2 {
        return Err(Error::invalid("frame length must be at least 2"));
    }
    if hop == 0 || hop > frame_len {
        return Err(Error::invalid("hop must be in 1..=frame_len"));
    }
    let x = signal.samples();
    if x.len() < frame_len {
        return Err(Error::invalid(format!(
            "signal of {} samples is shorter than one frame ({frame_len})",
            x.len()
        )));
    }
    // periodic Hann
    let two_pi = T::PI() + T::PI();
    let len_t = T::from_usize_lossy(frame_len);
    let window: Vec<T> = (0..frame_len)
        .map(|n| T::lit(0.5) * (T::one() - (two_pi * T::from_usize_lossy(n) / len_t).cos()))
        .collect();

    let fft = FftPlanner::new().plan_fft_forward(frame_len);
    let frames = (x.len() - frame_len) / hop + 1;
    let bins = frame_len / 2 + 1;
    let mut buf = vec![Complex::new(T::zero(), T::zero()); frame_len];
    let mut out = Vec::with_capacity(frames);
    for f in 0..frames {
        let start = f * hop;
        for (b, (&s, &w)) in buf.iter_mut().zip(x[start..start + frame_len].iter().zip(&window)) {
            *b = Complex::new(s * w, T::zero());
        }
        fft.process(&mut buf);
        out.push(buf[..bins].iter().map(|c| c.norm()).collect());
    }
    Ok(out)
}

/// Writes a spectrogram as CSV with a `frame,time_s,<bin frequencies...>` header.
pub fn write_spectrogram_csv<T: Real, W: Write>(
    spec: &[Vec<T>],
    sample_rate: u32,
    frame_len: usize,
    hop: usize,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let bins = frame_len / 2 + 1;
    let mut header = vec!["frame".to_string(), "time_s".to_string()];
    header.extend((0..bins).map(|k| {
        crate::format::fmt_sig(k as f64 * f64::from(sample_rate) / frame_len as f64)
    }));
    w.write_record(&header)?;
    for (i, row) in spec.iter().enumerate() {
        let t = (i * hop) as f64 / f64::from(sample_rate);
        let mut rec = vec![i.to_string(), crate::format::fmt_sig(t)];
        rec.extend(row.iter().map(|v| crate::format::fmt_sig(v.to_f64_lossy())));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth_sine;

    #[test]
    fn tone_peaks_at_expected_bin() {
        let s: Signal<f64> = synth_sine(700.0, 1.0, 0.0, 1.0, 8000).unwrap();
        let spec = spectrogram(&s, 256, 128).unwrap();
        let expected = (700.0f64 * 256.0 / 8000.0).round() as usize;
        assert_eq!(expected, 22);
        for row in &spec {
            let peak = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            assert_eq!(peak, expected);
        }
    }

    #[test]
    fn frame_count_and_shape() {
        let s = Signal::<f64>::zeros(1000, 8000).unwrap();
        let spec = spectrogram(&s, 256, 128).unwrap();
        assert_eq!(spec.len(), (1000 - 256) / 128 + 1);
        assert!(spec.iter().all(|r| r.len() == 129));
        assert!(spec.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn short_signal_and_bad_params() {
        let s = Signal::<f32>::zeros(100, 8000).unwrap();
        assert!(spectrogram(&s, 256, 128).is_err());
        assert!(spectrogram(&s, 1, 1).is_err());
        assert!(spectrogram(&s, 64, 0).is_err());
        assert!(spectrogram(&s, 64, 65).is_err());
    }

    #[test]
    fn csv_layout() {
        let s: Signal<f64> = synth_sine(700.0, 1.0, 0.0, 0.1, 8000).unwrap();
        let spec = spectrogram(&s, 64, 32).unwrap();
        let mut buf = Vec::new();
        write_spectrogram_csv(&spec, 8000, 64, 32, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("frame,time_s,0,125,"));
        assert_eq!(lines.count(), spec.len());
    }
}
