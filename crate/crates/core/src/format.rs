//! Stable text rendering of numbers and CSV emission helpers.

use std::io::{Read, Write};

use crate::{Decomposition, Error, Real, Result, Signal};

/// Six significant digits in `%g` style; infinities render as `inf`/`-inf`.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    const DIGITS: i32 = 6;
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= DIGITS {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One column per IMF (`imf1..imfM`) followed by a `residue` column.
pub fn write_decomposition_csv<T: Real, W: Write>(dec: &Decomposition<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=dec.imfs.len()).map(|k| format!("imf{k}")).collect();
    header.push("residue".into());
    w.write_record(&header)?;
    for n in 0..dec.source_length {
        let rec = dec
            .imfs
            .iter()
            .chain(std::iter::once(&dec.residue))
            .map(|s| fmt_sig(s.samples()[n].to_f64_lossy()));
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Named columns of equal length, written with a header row.
pub fn write_columns_csv<W: Write>(columns: &[(&str, &[f64])], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns.iter().map(|(name, _)| *name))?;
    let rows = columns.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
    for n in 0..rows {
        w.write_record(
            columns
                .iter()
                .map(|(_, c)| c.get(n).map_or_else(String::new, |v| fmt_sig(*v))),
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the first column of a CSV file as a signal. The header row is
/// required and skipped; extra columns are ignored.
pub fn read_signal_csv<R: Read>(input: R, sample_rate: u32) -> Result<Signal<f64>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(input);
    let mut samples = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = rec.get(0).unwrap_or("").trim();
        let v: f64 = field.parse().map_err(|_| {
            Error::Format(format!("row {}: '{field}' is not a number", line + 2))
        })?;
        samples.push(v);
    }
    if samples.is_empty() {
        return Err(Error::Format("CSV has no samples".into()));
    }
    Signal::new(samples, sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(6.020599913279624), "6.0206");
        assert_eq!(fmt_sig(24.67), "24.67");
        assert_eq!(fmt_sig(-1.0), "-1");
        assert_eq!(fmt_sig(123456789.0), "1.23457e8");
        assert_eq!(fmt_sig(0.000012345678), "1.23457e-5");
        assert_eq!(fmt_sig(0.001), "0.001");
        assert_eq!(fmt_sig(100000.0), "100000");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
        assert_eq!(fmt_sig(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn columns_csv() {
        let a = [1.0, 2.5];
        let b = [f64::INFINITY];
        let mut buf = Vec::new();
        write_columns_csv(&[("a", &a), ("b", &b)], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,inf\n2.5,\n");
    }

    #[test]
    fn signal_csv_first_column() {
        let text = "x,y\n1,9\n-2.5,9\n3e-1,9\n";
        let s = read_signal_csv(text.as_bytes(), 8000).unwrap();
        assert_eq!(s.samples(), &[1.0, -2.5, 0.3]);
        assert!(matches!(read_signal_csv("x\n".as_bytes(), 8000), Err(Error::Format(_))));
        assert!(matches!(read_signal_csv("x\nabc\n".as_bytes(), 8000), Err(Error::Format(_))));
    }
}
