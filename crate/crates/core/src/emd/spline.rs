use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result, Signal};

/// How extrema are extended past the signal ends before spline fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Reflect the two extrema nearest each end about the end sample.
    #[default]
    Mirror,
}

const MIRRORED: usize = 2;

/// Natural cubic spline through `extrema` (after boundary extension),
/// evaluated at every sample index of `signal`.
pub fn envelope<T: Real>(
    signal: &Signal<T>,
    extrema: &[(usize, T)],
    boundary: Boundary,
) -> Result<Signal<T>> {
    let env = envelope_of(signal.len(), extrema, boundary)?;
    Ok(Signal::from_raw(env, signal.sample_rate()))
}

pub(crate) fn envelope_of<T: Real>(
    len: usize,
    extrema: &[(usize, T)],
    boundary: Boundary,
) -> Result<Vec<T>> {
    let mut out = Vec::new();
    envelope_into(len, extrema, boundary, &mut SplineWork::default(), &mut out)?;
    Ok(out)
}

/// Scratch buffers reused across envelope evaluations.
#[derive(Debug, Default)]
pub(crate) struct SplineWork<T> {
    knots: Vec<isize>,
    xs: Vec<T>,
    ys: Vec<T>,
    second: Vec<T>,
    inv_diag: Vec<T>,
    rhs: Vec<T>,
}

/// Writes the envelope through `extrema` into `out` (resized to `len`).
pub(crate) fn envelope_into<T: Real>(
    len: usize,
    extrema: &[(usize, T)],
    boundary: Boundary,
    work: &mut SplineWork<T>,
    out: &mut Vec<T>,
) -> Result<()> {
    extend(len, extrema, boundary, &mut work.knots, &mut work.ys);
    if work.knots.len() < 2 {
        return Err(Error::InsufficientExtrema);
    }
    work.xs.clear();
    work.xs.extend(work.knots.iter().map(|&k| T::from_isize(k).expect("knot representable")));
    solve_second(&work.xs, &work.ys, &mut work.second, &mut work.inv_diag, &mut work.rhs);
    sample_into(&work.knots, &work.ys, &work.second, len, out);
    Ok(())
}

fn extend<T: Real>(
    len: usize,
    extrema: &[(usize, T)],
    boundary: Boundary,
    knots: &mut Vec<isize>,
    ys: &mut Vec<T>,
) {
    let Boundary::Mirror = boundary;
    let k = extrema.len().min(MIRRORED);
    let last = len.saturating_sub(1) as isize;
    knots.clear();
    ys.clear();
    for &(i, v) in extrema[..k].iter().rev() {
        knots.push(-(i as isize));
        ys.push(v);
    }
    for &(i, v) in extrema {
        knots.push(i as isize);
        ys.push(v);
    }
    for &(i, v) in extrema[extrema.len() - k..].iter().rev() {
        knots.push(2 * last - i as isize);
        ys.push(v);
    }
}

/// Second derivatives at the knots of a natural spline (Thomas algorithm).
fn solve_second<T: Real>(
    xs: &[T],
    ys: &[T],
    second: &mut Vec<T>,
    inv_diag: &mut Vec<T>,
    rhs: &mut Vec<T>,
) {
    let n = xs.len();
    second.clear();
    second.resize(n, T::zero());
    if n <= 2 {
        return;
    }
    let m = n - 2;
    let (two, six) = (T::lit(2.0), T::lit(6.0));
    inv_diag.clear();
    rhs.clear();
    let mut h0 = xs[1] - xs[0];
    let mut s0 = (ys[1] - ys[0]) / h0;
    let (mut prev_inv, mut prev_rhs) = (T::zero(), T::zero());
    for i in 1..=m {
        let h1 = xs[i + 1] - xs[i];
        let s1 = (ys[i + 1] - ys[i]) / h1;
        let mut d = two * (h0 + h1);
        let mut r = six * (s1 - s0);
        if i > 1 {
            let w = h0 * prev_inv;
            d = d - w * h0;
            r = r - w * prev_rhs;
        }
        prev_inv = d.recip();
        prev_rhs = r;
        inv_diag.push(prev_inv);
        rhs.push(r);
        h0 = h1;
        s0 = s1;
    }
    second[m] = rhs[m - 1] * inv_diag[m - 1];
    for r in (0..m - 1).rev() {
        second[r + 1] = (rhs[r] - (xs[r + 2] - xs[r + 1]) * second[r + 2]) * inv_diag[r];
    }
}

/// Evaluates the spline at `0, 1, ..., len - 1`; knots lie on integers.
fn sample_into<T: Real>(knots: &[isize], ys: &[T], second: &[T], len: usize, out: &mut Vec<T>) {
    out.clear();
    out.reserve(len);
    let sixth = T::lit(1.0 / 6.0);
    let half = T::lit(0.5);
    let segs = knots.len() - 1;
    let mut t = 0usize;
    for seg in 0..segs {
        let (x0, x1) = (knots[seg], knots[seg + 1]);
        let end = if seg + 1 == segs {
            len
        } else {
            usize::try_from(x1 + 1).unwrap_or(0).min(len)
        };
        if end <= t {
            continue;
        }
        let (m0, m1) = (second[seg], second[seg + 1]);
        let h = T::from_isize(x1 - x0).expect("knot gap representable");
        let inv_h = h.recip();
        // y0 + b·d + c·d² + e·d³ with d = t - x0
        let b = (ys[seg + 1] - ys[seg]) * inv_h - h * (m0 + m0 + m1) * sixth;
        let c = m0 * half;
        let e = (m1 - m0) * inv_h * sixth;
        let y0 = ys[seg];
        let first = t as isize - x0;
        out.extend((first..first + (end - t) as isize).map(|k| {
            let d = T::from_isize(k).expect("offset representable");
            y0 + d * (b + d * (c + d * e))
        }));
        t = end;
        if t == len {
            break;
        }
    }
}

/// Cubic spline with zero second derivative at both ends.
#[cfg(test)]
pub(crate) struct NaturalSpline<T> {
    knots: Vec<isize>,
    ys: Vec<T>,
    second: Vec<T>,
}

#[cfg(test)]
impl<T: Real> NaturalSpline<T> {
    /// `knots` must be strictly increasing and at least two long.
    pub(crate) fn fit(knots: Vec<isize>, ys: Vec<T>) -> Self {
        let xs: Vec<T> = knots.iter().map(|&k| T::from_isize(k).unwrap()).collect();
        let mut second = Vec::new();
        solve_second(&xs, &ys, &mut second, &mut Vec::new(), &mut Vec::new());
        Self { knots, ys, second }
    }

    pub(crate) fn sample(&self, len: usize) -> Vec<T> {
        let mut out = Vec::new();
        sample_into(&self.knots, &self.ys, &self.second, len, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emd::extrema::extrema_of;
    use crate::synth_sine;

    #[test]
    fn constant_knots_give_constant_envelope() {
        let knots = [(3usize, 0.7), (10, 0.7), (17, 0.7), (30, 0.7)];
        let env = envelope_of(40, &knots, Boundary::Mirror).unwrap();
        assert!(env.iter().all(|v: &f64| (v - 0.7).abs() < 1e-12));
    }

    #[test]
    fn two_knots_are_linear() {
        let spline = NaturalSpline::fit(vec![0, 10], vec![1.0, 3.0]);
        let vals = spline.sample(11);
        for (t, v) in vals.iter().enumerate() {
            assert!((v - (1.0 + 0.2 * t as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn passes_through_knots() {
        let knots = [(2usize, 0.3), (9, -1.0), (15, 2.0), (21, 0.5), (33, 1.5)];
        let env: Vec<f64> = envelope_of(40, &knots, Boundary::Mirror).unwrap();
        for &(i, v) in &knots {
            assert!((env[i] - v).abs() < 1e-12);
        }
    }

    #[test]
    fn natural_end_conditions_and_continuity() {
        // second derivative at the ends is zero, and C1 continuity at knots
        let xs = vec![0.0, 1.5, 4.0, 5.0, 9.0];
        let ys = vec![1.0, -2.0, 0.5, 3.0, 1.0];
        let mut second = Vec::new();
        solve_second(&xs, &ys, &mut second, &mut Vec::new(), &mut Vec::new());
        assert_eq!(second[0], 0.0);
        assert_eq!(second[4], 0.0);
        // finite-difference slopes either side of the interior knots
        let eval = |t: f64| {
            let seg = (0..xs.len() - 1).find(|&k| t <= xs[k + 1]).unwrap();
            let (x0, x1) = (xs[seg], xs[seg + 1]);
            let h = x1 - x0;
            let a = (x1 - t) / h;
            let b = (t - x0) / h;
            a * ys[seg]
                + b * ys[seg + 1]
                + ((a.powi(3) - a) * second[seg] + (b.powi(3) - b) * second[seg + 1]) * h * h
                    / 6.0
        };
        for &k in &xs[1..4] {
            let d = 1e-6;
            let left = (eval(k) - eval(k - d)) / d;
            let right = (eval(k + d + 1e-12) - eval(k + 1e-12)) / d;
            assert!((left - right).abs() < 1e-4, "slope jump at {k}");
        }
    }

    #[test]
    fn sine_upper_envelope_is_near_one() {
        let s: Signal<f64> = synth_sine(50.0, 1.0, 0.0, 1.0, 8000).unwrap();
        let e = extrema_of(s.samples());
        let up = envelope(&s, &e.maxima, Boundary::Mirror).unwrap();
        let n = s.len();
        for v in &up.samples()[n / 10..n - n / 10] {
            assert!((v - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn no_knots_is_an_error() {
        assert!(matches!(
            envelope_of::<f64>(10, &[], Boundary::Mirror),
            Err(Error::InsufficientExtrema)
        ));
    }
}
