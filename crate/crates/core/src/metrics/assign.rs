use serde::{Deserialize, Serialize};

use crate::num::dot;
use crate::{sdr, Decomposition, Error, Real, Result, Signal};

/// Largest IMF count (residue excluded) searched exhaustively.
pub const EXHAUSTIVE_MAX_IMFS: usize = 16;
/// Upper bound on enumerated assignments when there are more than two references.
const EXHAUSTIVE_MAX_ASSIGNMENTS: usize = 1 << 20;

/// Grouping of decomposition modes into one estimate per reference.
///
/// Mode indices `0..M` are the IMFs; index `M` is the residue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub groups: Vec<Vec<usize>>,
    #[serde(with = "super::report::db_vec")]
    pub per_source_sdr_db: Vec<f64>,
    #[serde(with = "super::report::db")]
    pub total_sdr_db: f64,
    pub exhaustive: bool,
}

impl Assignment {
    /// Mean of the per-reference SDRs.
    pub fn mean_sdr_db(&self) -> f64 {
        self.total_sdr_db / self.per_source_sdr_db.len() as f64
    }

    /// Sum of the modes in each group (all-zero for an empty group).
    pub fn estimates<T: Real>(&self, dec: &Decomposition<T>) -> Vec<Signal<T>> {
        let modes: Vec<&Signal<T>> = dec.modes_with_residue().collect();
        self.groups
            .iter()
            .map(|g| {
                let mut acc = vec![T::zero(); dec.source_length];
                for &j in g {
                    for (a, &v) in acc.iter_mut().zip(modes[j].samples()) {
                        *a = *a + v;
                    }
                }
                Signal::from_raw(acc, dec.sample_rate())
            })
            .collect()
    }
}

fn check_inputs<T: Real>(dec: &Decomposition<T>, references: &[Signal<T>]) -> Result<()> {
    if references.is_empty() {
        return Err(Error::invalid("no reference signals"));
    }
    if dec.source_length == 0 {
        return Err(Error::invalid("empty decomposition"));
    }
    for r in references {
        r.check_compatible(&dec.residue)?;
        if r.energy() <= T::zero() {
            return Err(Error::ZeroEnergy("reference"));
        }
    }
    Ok(())
}

/// Best grouping of the IMFs and residue against `references`, maximizing
/// the sum of per-reference SDRs. Exhaustive up to
/// [`EXHAUSTIVE_MAX_IMFS`] IMFs, greedy by correlation beyond that.
pub fn assign_imfs<T: Real>(dec: &Decomposition<T>, references: &[Signal<T>]) -> Result<Assignment> {
    check_inputs(dec, references)?;
    let modes = dec.mode_count() + 1;
    let r = references.len();
    let feasible = dec.mode_count() <= EXHAUSTIVE_MAX_IMFS
        && (r as f64).powi(modes as i32) <= EXHAUSTIVE_MAX_ASSIGNMENTS as f64 * 2.0;
    if !feasible {
        return assign_greedy(dec, references);
    }

    let tables = Tables::new(dec, references);
    let mut labels = vec![0usize; modes];
    let mut best_labels = labels.clone();
    let mut best_total = f64::NEG_INFINITY;
    loop {
        let total: f64 = (0..r).map(|k| tables.sdr_db(k, &labels)).sum();
        if total > best_total {
            best_total = total;
            best_labels.clone_from(&labels);
        }
        // odometer increment
        let mut pos = 0;
        while pos < modes {
            labels[pos] += 1;
            if labels[pos] < r {
                break;
            }
            labels[pos] = 0;
            pos += 1;
        }
        if pos == modes {
            break;
        }
    }
    finish(dec, references, &best_labels, true)
}

/// Each mode goes to the reference it is most correlated with.
pub fn assign_greedy<T: Real>(dec: &Decomposition<T>, references: &[Signal<T>]) -> Result<Assignment> {
    check_inputs(dec, references)?;
    let labels: Vec<usize> = dec
        .modes_with_residue()
        .map(|m| {
            let mm = m.energy().to_f64_lossy();
            if mm <= 0.0 {
                return 0;
            }
            let mut best = (0, f64::NEG_INFINITY);
            for (k, s) in references.iter().enumerate() {
                let corr = dot(m.samples(), s.samples()).to_f64_lossy()
                    / (mm * s.energy().to_f64_lossy()).sqrt();
                if corr > best.1 {
                    best = (k, corr);
                }
            }
            best.0
        })
        .collect();
    finish(dec, references, &labels, false)
}

fn finish<T: Real>(
    dec: &Decomposition<T>,
    references: &[Signal<T>],
    labels: &[usize],
    exhaustive: bool,
) -> Result<Assignment> {
    let mut groups = vec![Vec::new(); references.len()];
    for (j, &k) in labels.iter().enumerate() {
        groups[k].push(j);
    }
    let mut a = Assignment {
        groups,
        per_source_sdr_db: Vec::new(),
        total_sdr_db: 0.0,
        exhaustive,
    };
    // exact values from the summed signals, not the Gram shortcut
    a.per_source_sdr_db = a
        .estimates(dec)
        .iter()
        .zip(references)
        .map(|(e, s)| sdr(s, e).map(Real::to_f64_lossy))
        .collect::<Result<_>>()?;
    a.total_sdr_db = a.per_source_sdr_db.iter().sum();
    Ok(a)
}

/// Inner products that let every candidate grouping be scored in
/// `O(modes²)` instead of `O(modes · N)`.
struct Tables {
    gram: Vec<Vec<f64>>,
    cross: Vec<Vec<f64>>,
    ref_energy: Vec<f64>,
}

impl Tables {
    fn new<T: Real>(dec: &Decomposition<T>, references: &[Signal<T>]) -> Self {
        let modes: Vec<&Signal<T>> = dec.modes_with_residue().collect();
        let m = modes.len();
        let mut gram = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in i..m {
                let g = dot(modes[i].samples(), modes[j].samples()).to_f64_lossy();
                gram[i][j] = g;
                gram[j][i] = g;
            }
        }
        let cross = references
            .iter()
            .map(|s| {
                modes
                    .iter()
                    .map(|md| dot(s.samples(), md.samples()).to_f64_lossy())
                    .collect()
            })
            .collect();
        let ref_energy = references.iter().map(|s| s.energy().to_f64_lossy()).collect();
        Self {
            gram,
            cross,
            ref_energy,
        }
    }

    fn sdr_db(&self, k: usize, labels: &[usize]) -> f64 {
        let mut dist = self.ref_energy[k];
        for (i, &li) in labels.iter().enumerate() {
            if li != k {
                continue;
            }
            dist -= 2.0 * self.cross[k][i];
            for (j, &lj) in labels.iter().enumerate() {
                if lj == k {
                    dist += self.gram[i][j];
                }
            }
        }
        let floor = self.ref_energy[k] * f64::EPSILON * f64::EPSILON;
        if dist <= floor {
            f64::INFINITY
        } else {
            10.0 * (self.ref_energy[k] / dist).log10()
        }
    }
}
