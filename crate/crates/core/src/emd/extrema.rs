use serde::{Deserialize, Serialize};

use crate::{Real, Signal};

/// Strict local maxima and minima of a signal, in increasing index order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtremaSet<T> {
    pub maxima: Vec<(usize, T)>,
    pub minima: Vec<(usize, T)>,
}

impl<T> ExtremaSet<T> {
    pub fn count(&self) -> usize {
        self.maxima.len() + self.minima.len()
    }

    /// Both envelopes can be built from at least two knots each.
    pub fn supports_envelopes(&self) -> bool {
        self.maxima.len() >= 2 && self.minima.len() >= 2
    }
}

/// Local extrema of `signal`. Endpoints are never extrema; a flat run
/// bounded on both sides by lower (higher) samples yields a single maximum
/// (minimum) at the first index of the run.
pub fn find_local_extrema<T: Real>(signal: &Signal<T>) -> ExtremaSet<T> {
    extrema_of(signal.samples())
}

pub(crate) fn extrema_of<T: Real>(x: &[T]) -> ExtremaSet<T> {
    let mut out = ExtremaSet::default();
    extrema_into(x, &mut out);
    out
}

/// Like [`extrema_of`], reusing the buffers of `out`.
pub(crate) fn extrema_into<T: Real>(x: &[T], out: &mut ExtremaSet<T>) {
    out.maxima.clear();
    out.minima.clear();
    if x.len() < 3 {
        return;
    }
    if x.windows(2).any(|w| w[0] == w[1]) {
        return extrema_with_plateaus(x, out);
    }
    // strict extrema of each 64-sample block as bit masks
    let interior = &x[1..x.len() - 1];
    for (b, block) in interior.chunks(64).enumerate() {
        let base = b * 64;
        let (mut up, mut down) = (0u64, 0u64);
        for (j, &v) in block.iter().enumerate() {
            let (prev, next) = (x[base + j], x[base + j + 2]);
            up |= u64::from((v > prev) & (v > next)) << j;
            down |= u64::from((v < prev) & (v < next)) << j;
        }
        for (mut mask, dst) in [(up, &mut out.maxima), (down, &mut out.minima)] {
            while mask != 0 {
                let i = base + mask.trailing_zeros() as usize + 1;
                dst.push((i, x[i]));
                mask &= mask - 1;
            }
        }
    }
}

fn extrema_with_plateaus<T: Real>(x: &[T], out: &mut ExtremaSet<T>) {
    let n = x.len();
    let mut i = 1;
    while i + 1 < n {
        let rising = x[i] > x[i - 1];
        let falling = x[i] < x[i - 1];
        if !(rising || falling) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < n && x[j + 1] == x[i] {
            j += 1;
        }
        if j + 1 < n {
            if rising && x[j + 1] < x[i] {
                out.maxima.push((i, x[i]));
            } else if falling && x[j + 1] > x[i] {
                out.minima.push((i, x[i]));
            }
        }
        i = j + 1;
    }
}

/// Sign changes between consecutive samples; a zero sample takes the sign
/// of the next non-zero sample, so zeros never add or remove a crossing.
pub(crate) fn zero_crossings<T: Real>(x: &[T]) -> usize {
    let zero = T::zero();
    let mut crossings = 0;
    let mut has_zero = false;
    for w in x.windows(2) {
        crossings += usize::from((w[0] > zero) != (w[1] > zero));
        has_zero |= w[1] == zero;
    }
    if x.first().is_none_or(|&v| v != zero) && !has_zero {
        return crossings;
    }
    let mut crossings = 0;
    let mut last: Option<bool> = None;
    for &v in x {
        if v == zero {
            continue;
        }
        let positive = v > zero;
        if last.is_some_and(|p| p != positive) {
            crossings += 1;
        }
        last = Some(positive);
    }
    crossings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth_sine;

    fn sig(v: &[f64]) -> Signal<f64> {
        Signal::new(v.to_vec(), 8000).unwrap()
    }

    #[test]
    fn two_periods_of_sine() {
        // 2 Hz at 400 Hz sampling for 1 s: exactly two periods
        let s: Signal<f64> = synth_sine(2.0, 1.0, 0.1, 1.0, 400).unwrap();
        let e = find_local_extrema(&s);
        assert_eq!(e.maxima.len(), 2);
        assert_eq!(e.minima.len(), 2);
    }

    #[test]
    fn ramp_has_no_extrema() {
        let s = sig(&(0..50).map(f64::from).collect::<Vec<_>>());
        assert_eq!(find_local_extrema(&s).count(), 0);
    }

    #[test]
    fn plateau_maximum_at_first_index() {
        let e = find_local_extrema(&sig(&[0.0, 1.0, 1.0, 0.0]));
        assert_eq!(e.maxima, vec![(1, 1.0)]);
        assert!(e.minima.is_empty());
    }

    /// Run-length oracle: collapse equal runs, then a run is an extremum iff
    /// it has neighbours on both sides that are both lower (or both higher).
    fn oracle(x: &[f64]) -> (Vec<usize>, Vec<usize>) {
        let mut runs: Vec<(usize, f64)> = Vec::new();
        for (i, &v) in x.iter().enumerate() {
            if runs.last().map_or(true, |r| r.1 != v) {
                runs.push((i, v));
            }
        }
        let (mut maxima, mut minima) = (Vec::new(), Vec::new());
        for w in runs.windows(3) {
            let (prev, cur, next) = (w[0].1, w[1], w[2].1);
            if prev < cur.1 && next < cur.1 {
                maxima.push(cur.0);
            }
            if prev > cur.1 && next > cur.1 {
                minima.push(cur.0);
            }
        }
        (maxima, minima)
    }

    #[test]
    fn plateau_rule_exhaustive_binary_length_four() {
        for bits in 0u32..16 {
            let x: Vec<f64> = (0..4).map(|k| f64::from((bits >> k) & 1)).collect();
            let e = extrema_of(&x);
            let got = (
                e.maxima.iter().map(|m| m.0).collect::<Vec<_>>(),
                e.minima.iter().map(|m| m.0).collect::<Vec<_>>(),
            );
            assert_eq!(got, oracle(&x), "input {x:?}");
        }
    }

    #[test]
    fn plateau_rule_exhaustive_ternary_length_six() {
        for code in 0..3usize.pow(6) {
            let x: Vec<f64> = (0..6).map(|k| ((code / 3usize.pow(k)) % 3) as f64).collect();
            let e = extrema_of(&x);
            let got = (
                e.maxima.iter().map(|m| m.0).collect::<Vec<_>>(),
                e.minima.iter().map(|m| m.0).collect::<Vec<_>>(),
            );
            assert_eq!(got, oracle(&x), "input {x:?}");
        }
    }

    #[test]
    fn zero_crossing_counting() {
        assert_eq!(zero_crossings(&[1.0, -1.0, 1.0]), 2);
        assert_eq!(zero_crossings(&[1.0, 0.0, -1.0]), 1);
        assert_eq!(zero_crossings(&[1.0, 0.0, 1.0]), 0);
        assert_eq!(zero_crossings(&[-1.0, 0.0, 0.0, 2.0]), 1);
        assert_eq!(zero_crossings(&[0.0, 0.0]), 0);
        assert_eq!(zero_crossings(&[1.0, 0.0]), 0);
    }

    fn slow_zero_crossings(x: &[f64]) -> usize {
        let signs: Vec<bool> = x.iter().filter(|v| **v != 0.0).map(|v| *v > 0.0).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    proptest::proptest! {
        #[test]
        fn block_scan_matches_oracle(x in proptest::collection::vec(-1e3f64..1e3, 0..300)) {
            let e = extrema_of(&x);
            let got = (
                e.maxima.iter().map(|m| m.0).collect::<Vec<_>>(),
                e.minima.iter().map(|m| m.0).collect::<Vec<_>>(),
            );
            proptest::prop_assert_eq!(got, oracle(&x));
            proptest::prop_assert!(e.maxima.iter().chain(&e.minima).all(|&(i, v)| x[i] == v));
        }

        #[test]
        fn zero_crossings_match_sign_filter(x in proptest::collection::vec(-2i8..=2, 0..200)) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            proptest::prop_assert_eq!(zero_crossings(&x), slow_zero_crossings(&x));
        }
    }
}
