//! Separation-quality metrics.
//!
//! `sdr` is the plain energy ratio `‖s‖² / ‖s - ŝ‖²`: a gain mismatch
//! between estimate and reference counts as distortion. Only `sar` goes
//! through the projection-based error decomposition. Zero-error cases
//! return `+∞` rather than a large finite cap.

mod assign;
pub(crate) mod report;

pub use assign::{assign_greedy, assign_imfs, Assignment, EXHAUSTIVE_MAX_IMFS};
pub use report::{MetricsReport, SourceMetrics};

use crate::num::{dot, energy};
use crate::{Error, Real, Result, Signal};

fn ratio_db<T: Real>(num: T, den: T) -> T {
    if den <= T::zero() {
        T::infinity()
    } else {
        T::lit(10.0) * (num / den).log10()
    }
}

/// Signal-to-distortion ratio in dB.
pub fn sdr<T: Real>(reference: &Signal<T>, estimate: &Signal<T>) -> Result<T> {
    reference.check_compatible(estimate)?;
    let e = reference.energy();
    if e <= T::zero() {
        return Err(Error::ZeroEnergy("reference"));
    }
    let dist: T = reference
        .samples()
        .iter()
        .zip(estimate.samples())
        .map(|(&s, &h)| (s - h) * (s - h))
        .sum();
    Ok(ratio_db(e, dist))
}

/// `10 log10(‖clean‖² / ‖degraded - clean‖²)`.
pub fn snr<T: Real>(clean: &Signal<T>, degraded: &Signal<T>) -> Result<T> {
    clean.check_compatible(degraded)?;
    if clean.energy() <= T::zero() {
        return Err(Error::ZeroEnergy("clean signal"));
    }
    sdr(clean, degraded)
}

/// Split of an estimate into target, interference, noise and artifact parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDecomposition<T> {
    pub target: Signal<T>,
    pub e_interf: Signal<T>,
    pub e_noise: Signal<T>,
    pub e_artif: Signal<T>,
}

impl<T: Real> ErrorDecomposition<T> {
    /// Sum of all four parts, equal to the estimate up to rounding.
    pub fn total(&self) -> Signal<T> {
        let n = self.target.len();
        let s: Vec<T> = (0..n)
            .map(|i| {
                self.target.samples()[i]
                    + self.e_interf.samples()[i]
                    + self.e_noise.samples()[i]
                    + self.e_artif.samples()[i]
            })
            .collect();
        Signal::from_raw(s, self.target.sample_rate())
    }
}

/// Decomposes `estimate` relative to `reference`.
///
/// The target is the orthogonal projection of the estimate on the
/// reference. Interference is what the projection on the span of the
/// reference and `interferers` adds beyond the target, noise is what
/// adding `noise_ref` to that span adds further, and artifacts are the
/// remaining residual. Projections are least squares on the given spans.
pub fn decompose_error<T: Real>(
    reference: &Signal<T>,
    estimate: &Signal<T>,
    noise_ref: Option<&Signal<T>>,
    interferers: &[Signal<T>],
) -> Result<ErrorDecomposition<T>> {
    reference.check_compatible(estimate)?;
    for s in interferers.iter().chain(noise_ref) {
        reference.check_compatible(s)?;
    }
    let s = reference.samples();
    let h = estimate.samples();
    let ss = energy(s);
    if ss <= T::zero() {
        return Err(Error::ZeroEnergy("reference"));
    }
    let gain = dot(h, s) / ss;
    let target: Vec<T> = s.iter().map(|&v| gain * v).collect();

    let mut basis: Vec<&[T]> = vec![s];
    basis.extend(interferers.iter().map(Signal::samples));
    let p_sources = if interferers.is_empty() {
        target.clone()
    } else {
        project(h, &basis)
    };
    let p_all = match noise_ref {
        Some(nr) => {
            basis.push(nr.samples());
            project(h, &basis)
        }
        None => p_sources.clone(),
    };

    let diff = |a: &[T], b: &[T]| -> Vec<T> { a.iter().zip(b).map(|(&x, &y)| x - y).collect() };
    let rate = reference.sample_rate();
    Ok(ErrorDecomposition {
        e_interf: Signal::from_raw(diff(&p_sources, &target), rate),
        e_noise: Signal::from_raw(diff(&p_all, &p_sources), rate),
        e_artif: Signal::from_raw(diff(h, &p_all), rate),
        target: Signal::from_raw(target, rate),
    })
}

/// Least-squares projection of `y` on the span of `basis`. Linearly
/// dependent basis vectors are dropped during elimination.
fn project<T: Real>(y: &[T], basis: &[&[T]]) -> Vec<T> {
    let k = basis.len();
    let mut gram = vec![vec![T::zero(); k + 1]; k];
    for i in 0..k {
        for j in i..k {
            let g = dot(basis[i], basis[j]);
            gram[i][j] = g;
            gram[j][i] = g;
        }
        gram[i][k] = dot(basis[i], y);
    }
    let coef = solve_gram(gram);
    let mut out = vec![T::zero(); y.len()];
    for (c, b) in coef.iter().zip(basis) {
        for (o, &v) in out.iter_mut().zip(*b) {
            *o = *o + *c * v;
        }
    }
    out
}

/// Gauss-Jordan with partial pivoting on an augmented `k × (k+1)` system.
fn solve_gram<T: Real>(mut a: Vec<Vec<T>>) -> Vec<T> {
    let k = a.len();
    let scale = (0..k).map(|i| a[i][i]).fold(T::zero(), T::max);
    let tiny = scale * T::lit(1e-12);
    let mut pivot_of_col = vec![None; k];
    let mut row = 0;
    for col in 0..k {
        let Some(p) = (row..k).max_by(|&x, &y| {
            a[x][col]
                .abs()
                .partial_cmp(&a[y][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        }) else {
            break;
        };
        if a[p][col].abs() <= tiny {
            continue;
        }
        a.swap(row, p);
        let pv = a[row][col];
        for c in col..=k {
            a[row][c] = a[row][c] / pv;
        }
        for r in 0..k {
            if r != row {
                let f = a[r][col];
                if f != T::zero() {
                    for c in col..=k {
                        a[r][c] = a[r][c] - f * a[row][c];
                    }
                }
            }
        }
        pivot_of_col[col] = Some(row);
        row += 1;
    }
    pivot_of_col
        .iter()
        .map(|p| p.map_or(T::zero(), |r| a[r][k]))
        .collect()
}

/// Signal-to-artifact ratio in dB.
pub fn sar<T: Real>(error: &ErrorDecomposition<T>) -> Result<T> {
    let wanted: Vec<T> = (0..error.target.len())
        .map(|i| error.target.samples()[i] + error.e_interf.samples()[i] + error.e_noise.samples()[i])
        .collect();
    let num = energy(&wanted);
    if num <= T::zero() {
        return Err(Error::ZeroEnergy("target plus interference plus noise"));
    }
    Ok(ratio_db(num, error.e_artif.energy()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth_sine;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sine(f: f64, phase: f64) -> Signal<f64> {
        // 0.1 s at 8 kHz: whole periods for multiples of 10 Hz
        synth_sine(f, 1.0, phase, 0.1, 8000).unwrap()
    }

    #[test]
    fn sdr_closed_forms() {
        let s = sine(100.0, 0.0);
        assert_eq!(sdr(&s, &s).unwrap(), f64::INFINITY);
        let half = sdr(&s, &s.scaled(0.5)).unwrap();
        assert!((half - 10.0 * 4f64.log10()).abs() < 1e-9);
        assert!((half - 6.0206).abs() < 1e-4);
        // cosine of same frequency is orthogonal over whole periods
        let c = sine(100.0, std::f64::consts::FRAC_PI_2);
        let est = s.add(&c).unwrap();
        assert!(sdr(&s, &est).unwrap().abs() < 1e-9);
    }

    #[test]
    fn sdr_rejects_silent_reference() {
        let z = Signal::<f64>::zeros(10, 8000).unwrap();
        assert!(matches!(sdr(&z, &z), Err(Error::ZeroEnergy(_))));
        let s = sine(100.0, 0.0);
        assert!(sdr(&s, &s.truncated(10)).is_err());
    }

    #[test]
    fn sdr_scale_sensitivity() {
        let s = sine(130.0, 0.3);
        for c in [-1.0, 0.0, 0.25, 0.9, 1.1, 3.0] {
            let expected = -10.0 * ((1.0f64 - c) * (1.0 - c)).log10();
            assert!((sdr(&s, &s.scaled(c)).unwrap() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn snr_cases() {
        let s = sine(100.0, 0.0);
        assert_eq!(snr(&s, &s).unwrap(), f64::INFINITY);
        let c = sine(300.0, 0.0);
        assert!(snr(&s, &s.add(&c).unwrap()).unwrap().abs() < 1e-9);
        let z = Signal::<f64>::zeros(s.len(), 8000).unwrap();
        assert!(snr(&z, &s).is_err());
    }

    #[test]
    fn pure_rescale_has_no_error_terms() {
        let s = sine(100.0, 0.2);
        let d = decompose_error(&s, &s.scaled(2.0), None, &[]).unwrap();
        for (a, b) in d.target.samples().iter().zip(s.samples()) {
            assert!((a - 2.0 * b).abs() < 1e-12);
        }
        for part in [&d.e_interf, &d.e_noise, &d.e_artif] {
            assert!(part.samples().iter().all(|v| v.abs() < 1e-12));
        }
        assert_eq!(sar(&d).unwrap(), f64::INFINITY);
    }

    #[test]
    fn additive_noise_is_fully_explained() {
        let s = sine(100.0, 0.2);
        // deliberately correlated with the reference
        let n = sine(100.0, 1.0).scaled(0.3).add(&sine(740.0, 0.0)).unwrap();
        let est = s.add(&n).unwrap();
        let d = decompose_error(&s, &est, Some(&n), &[]).unwrap();
        assert!(d.e_artif.samples().iter().all(|v| v.abs() < 1e-10));
        assert!(sar(&d).unwrap() > 200.0);
        // orthogonal noise lands entirely in e_noise
        let n = sine(740.0, 0.0);
        let d = decompose_error(&s, &s.add(&n).unwrap(), Some(&n), &[]).unwrap();
        for (a, b) in d.e_noise.samples().iter().zip(n.samples()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn components_sum_to_estimate() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut rand_sig = |n: usize| {
            Signal::<f64>::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect(), 8000).unwrap()
        };
        for _ in 0..20 {
            let s = rand_sig(300);
            let est = rand_sig(300);
            let noise = rand_sig(300);
            let interf = vec![rand_sig(300), rand_sig(300)];
            let d = decompose_error(&s, &est, Some(&noise), &interf).unwrap();
            for (a, b) in d.total().samples().iter().zip(est.samples()) {
                assert!((a - b).abs() <= 1e-10);
            }
            let sar_db = sar(&d).unwrap();
            assert!(sar_db.is_finite());
        }
    }

    #[test]
    fn interference_projection() {
        let s = sine(100.0, 0.0);
        let i = sine(500.0, 0.0);
        let est = s.add(&i.scaled(0.5)).unwrap();
        let d = decompose_error(&s, &est, None, std::slice::from_ref(&i)).unwrap();
        for (a, b) in d.e_interf.samples().iter().zip(i.samples()) {
            assert!((a - 0.5 * b).abs() < 1e-10);
        }
        assert!(d.e_artif.energy() < 1e-18);
    }

    #[test]
    fn dependent_basis_is_handled() {
        let s = sine(100.0, 0.0);
        let est = s.add(&sine(350.0, 0.0)).unwrap();
        let d = decompose_error(&s, &est, Some(&s.scaled(2.0)), &[s.clone()]).unwrap();
        for (a, b) in d.total().samples().iter().zip(est.samples()) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn sar_unit_ratio_and_zero_denominator() {
        let s = sine(100.0, 0.0);
        let a = sine(300.0, 0.0);
        let d = decompose_error(&s, &s.add(&a).unwrap(), None, &[]).unwrap();
        assert!(sar(&d).unwrap().abs() < 1e-9);
        let silent = Signal::zeros(s.len(), 8000).unwrap();
        let d = decompose_error(&s, &silent, None, &[]).unwrap();
        assert!(sar(&d).is_err());
    }

    #[test]
    fn ratios_invariant_under_joint_rescaling() {
        let s = sine(100.0, 0.0);
        let est = s.scaled(0.8).add(&sine(600.0, 0.1).scaled(0.2)).unwrap();
        let d1 = decompose_error(&s, &est, None, &[]).unwrap();
        let d2 = decompose_error(&s.scaled(7.0), &est.scaled(7.0), None, &[]).unwrap();
        assert!((sdr(&s, &est).unwrap() - sdr(&s.scaled(7.0), &est.scaled(7.0)).unwrap()).abs() < 1e-9);
        assert!((sar(&d1).unwrap() - sar(&d2).unwrap()).abs() < 1e-9);
    }
}
