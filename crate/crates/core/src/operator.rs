//! Diagonal decomposition of a matrix and the multiplier action on it.
//!
//! With the coordinate resolution of the identity, the `k`-th Fourier
//! coefficient of an operator is its `k`-th diagonal `{(m, n) : m - n = k}`
//! (modulo `M` for circulant topology), and a multiplier acts by scaling each
//! diagonal by a weight.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ONE, ZERO};
use crate::topology::{Topology, TopologyKind};

/// `d(k) = max_{m-n = k} |A_mn|`, stored for the offsets where it is nonzero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalProfile {
    pub topology: Topology,
    pub values: BTreeMap<i64, f64>,
}

impl DiagonalProfile {
    pub fn get(&self, k: i64) -> f64 {
        self.values.get(&k).copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.values().copied().fold(0.0, f64::max)
    }

    /// Sum over offsets, in ascending offset order.
    pub fn sum(&self) -> f64 {
        self.values.values().sum()
    }

    /// Largest `|k|` with `d(k) > 0`; zero for the zero matrix.
    pub fn bandwidth(&self) -> usize {
        self.values
            .keys()
            .map(|k| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }
}

/// Offset-indexed weights. Offsets missing from the map carry weight zero.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierMap {
    pub values: BTreeMap<i64, Complex64>,
    /// Where the weights came from (window, exponential, composite, ...).
    pub descriptor: String,
    /// Real exponents when every weight is `exp(x_k)`; lets compositions of
    /// exponential maps add exponents before exponentiating.
    log_weights: Option<BTreeMap<i64, f64>>,
}

impl MultiplierMap {
    pub fn new(values: BTreeMap<i64, Complex64>, descriptor: impl Into<String>) -> Self {
        Self {
            values,
            descriptor: descriptor.into(),
            log_weights: None,
        }
    }

    /// Builds `k -> exp(x_k)` and remembers the exponents.
    pub fn from_exponents(exponents: BTreeMap<i64, f64>, descriptor: impl Into<String>) -> Self {
        let values = exponents
            .iter()
            .map(|(&k, &x)| (k, Complex64::new(x.exp(), 0.0)))
            .collect();
        Self {
            values,
            descriptor: descriptor.into(),
            log_weights: Some(exponents),
        }
    }

    pub fn identity(topo: &Topology) -> Self {
        Self::from_exponents(topo.offsets().map(|k| (k, 0.0)).collect(), "identity")
    }

    #[inline]
    pub fn weight(&self, k: i64) -> Complex64 {
        self.values.get(&k).copied().unwrap_or(ZERO)
    }

    pub fn exponents(&self) -> Option<&BTreeMap<i64, f64>> {
        self.log_weights.as_ref()
    }

    /// Pointwise product; applying the result equals applying `self` then `other`.
    pub fn compose(&self, other: &Self) -> Self {
        let descriptor = format!("composite({}, {})", self.descriptor, other.descriptor);
        if let (Some(a), Some(b)) = (&self.log_weights, &other.log_weights) {
            let exps = a
                .iter()
                .filter_map(|(k, x)| b.get(k).map(|y| (*k, x + y)))
                .collect();
            return Self::from_exponents(exps, descriptor);
        }
        let values = self
            .values
            .iter()
            .filter_map(|(k, w)| other.values.get(k).map(|v| (*k, w * v)))
            .collect();
        Self::new(values, descriptor)
    }

    pub fn is_identity_on(&self, topo: &Topology) -> bool {
        topo.offsets().all(|k| self.weight(k) == ONE)
    }
}

/// The matrix keeping exactly the entries on diagonal `k`.
pub fn extract_diagonal(a: &ComplexMatrix, topo: &Topology, k: i64) -> Result<ComplexMatrix> {
    topo.check_matrix(a)?;
    topo.check_offset(k)?;
    let m = topo.size;
    Ok(ComplexMatrix::from_fn(m, m, |i, j| {
        if topo.offset(i, j) == k {
            a[(i, j)]
        } else {
            ZERO
        }
    }))
}

pub fn diagonal_profile(a: &ComplexMatrix, topo: &Topology) -> Result<DiagonalProfile> {
    let m = topo.check_matrix(a)?;
    let mut values = BTreeMap::new();
    for i in 0..m {
        for j in 0..m {
            let v = a[(i, j)].norm();
            if v > 0.0 {
                let slot = values.entry(topo.offset(i, j)).or_insert(0.0f64);
                *slot = slot.max(v);
            }
        }
    }
    Ok(DiagonalProfile {
        topology: *topo,
        values,
    })
}

/// Scales diagonal `k` of `a` by `mult.weight(k)`.
pub fn apply_multiplier(
    a: &ComplexMatrix,
    topo: &Topology,
    mult: &MultiplierMap,
) -> Result<ComplexMatrix> {
    let m = topo.check_matrix(a)?;
    // Weight lookup per offset, not per entry.
    let (lo, hi) = topo.offset_range();
    let table: Vec<Complex64> = (lo..=hi).map(|k| mult.weight(k)).collect();
    Ok(ComplexMatrix::from_fn(m, m, |i, j| {
        let w = table[(topo.offset(i, j) - lo) as usize];
        if w == ONE {
            a[(i, j)]
        } else {
            a[(i, j)] * w
        }
    }))
}

/// Offsets whose diagonal carries more than `rel_tol` of the largest one.
pub fn beurling_spectrum(
    a: &ComplexMatrix,
    topo: &Topology,
    rel_tol: f64,
) -> Result<BTreeSet<i64>> {
    if !(0.0..1.0).contains(&rel_tol) {
        return Err(Error::InvalidArgument(format!(
            "rel_tol must lie in [0, 1), got {rel_tol}"
        )));
    }
    let profile = diagonal_profile(a, topo)?;
    let cut = rel_tol * profile.max();
    Ok(profile
        .values
        .iter()
        .filter(|(_, &d)| d > cut)
        .map(|(&k, _)| k)
        .collect())
}

/// `DA - AD` with `D = diag(0, 1, ..., M-1)`: entry `(m, n)` becomes `(m - n) A_mn`.
pub fn commutator_with_position(a: &ComplexMatrix, topo: &Topology) -> Result<ComplexMatrix> {
    if topo.kind == TopologyKind::Circulant {
        return Err(Error::TopologyUnsupported {
            op: "commutator_with_position",
        });
    }
    let m = topo.check_matrix(a)?;
    Ok(ComplexMatrix::from_fn(m, m, |i, j| {
        a[(i, j)] * (i as f64 - j as f64)
    }))
}

/// Iterated commutator `ad_D^order(A)`.
pub fn position_derivative(
    a: &ComplexMatrix,
    topo: &Topology,
    order: usize,
) -> Result<ComplexMatrix> {
    let mut out = a.clone();
    for _ in 0..order {
        out = commutator_with_position(&out, topo)?;
    }
    Ok(out)
}
