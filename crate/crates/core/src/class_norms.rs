//! Windowed pieces and the norms of the Wiener, Beurling and Sobolev-Wiener
//! classes, plus exponential-decay fitting and classification.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{operator_norm, NormMode};
use crate::matrix::{ComplexMatrix, ZERO};
use crate::operator::{apply_multiplier, diagonal_profile, position_derivative, MultiplierMap};
use crate::topology::Topology;
use crate::windows::TriangleWindow;

/// Prefactor `5^d` of the series Wiener norm (d = 1).
pub const WIENER_PREFACTOR: f64 = 5.0;
/// Pieces below this fraction of the largest one count as absent when
/// deciding bandedness.
pub const BANDED_FLOOR_REL: f64 = 1e-12;
/// A banded support must end from a piece at least this fraction of the
/// largest; a profile that fades out geometrically is not a band.
pub const BANDED_EDGE_REL: f64 = 1e-6;
pub const FIT_RESIDUAL_MAX: f64 = 0.1;
pub const WIENER_TAIL_FRACTION: f64 = 0.01;
/// Sample floor used by [`class_report`] for the decay fit.
pub const CLASSIFY_FLOOR_REL: f64 = 1e-8;
pub const GAMMA_CLAMP: f64 = 1.5;

/// `phi_{N,n} A`: diagonal `k` scaled by `max(0, 1 - |k - N n| / N)`.
///
/// Every offset is covered by at most two windows. The window with the larger
/// weight `w >= 1/2` stores the rounded product `w a`, the other stores
/// `a - w a`, which is exact; the pieces therefore sum to `A` bit for bit.
/// Each entry agrees with `apply_multiplier(A, window_multiplier(N, n))` up to
/// one rounding.
pub fn windowed_piece(
    a: &ComplexMatrix,
    topo: &Topology,
    scale: usize,
    n: i64,
) -> Result<ComplexMatrix> {
    if scale == 0 {
        return Err(Error::InvalidArgument(
            "window scale must be positive".into(),
        ));
    }
    let m = topo.check_matrix(a)?;
    topo.check_window(scale)?;
    let w = TriangleWindow::new(scale);
    let centre = n * scale as i64;
    let mut out = ComplexMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let v = a[(i, j)];
            if v == ZERO {
                continue;
            }
            let k = topo.offset(i, j);
            let weight = w.value_1d(n, k as f64);
            if weight == 0.0 {
                continue;
            }
            out[(i, j)] = if weight >= 0.5 {
                v * weight
            } else {
                let neighbour = if k > centre { n + 1 } else { n - 1 };
                v - v * w.value_1d(neighbour, k as f64)
            };
        }
    }
    Ok(out)
}

/// `||phi_{N,n} A||` for every shift `n` whose window meets the offset range.
///
/// Pieces are evaluated in parallel; the map is ordered by `n`.
pub fn piece_norms(
    a: &ComplexMatrix,
    topo: &Topology,
    scale: usize,
    mode: NormMode,
) -> Result<BTreeMap<i64, f64>> {
    if scale == 0 {
        return Err(Error::InvalidArgument(
            "window scale must be positive".into(),
        ));
    }
    topo.check_window(scale)?;
    let profile = diagonal_profile(a, topo)?;
    let (lo, hi) = topo.offset_range();
    let w = TriangleWindow::new(scale);
    let s = scale as i64;
    let shifts: Vec<i64> = w.shifts_covering(lo, hi).collect();
    let norms = shifts
        .par_iter()
        .map(|&n| {
            let touches = profile
                .values
                .range((n * s - s + 1)..=(n * s + s - 1))
                .next()
                .is_some();
            if !touches {
                return Ok(0.0);
            }
            operator_norm(&windowed_piece(a, topo, scale, n)?, mode)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(shifts.into_iter().zip(norms).collect())
}

/// `||A||_{1,N} = 5 sum_n ||phi_{N,n} A||`, summed in ascending `n`.
pub fn wiener_norm(
    a: &ComplexMatrix,
    topo: &Topology,
    scale: usize,
    mode: NormMode,
) -> Result<f64> {
    Ok(WIENER_PREFACTOR * piece_norms(a, topo, scale, mode)?.values().sum::<f64>())
}

/// Trapezoid rule for `int ||phi_{1,s} A|| ds` with real shifts `s`.
///
/// The integrand vanishes outside `[-(K+1), K+1]` where `K` is the largest
/// occupied offset; the grid spans `[-(K+2), K+2]` with spacing at most `step`.
pub fn integral_wiener_norm(
    a: &ComplexMatrix,
    topo: &Topology,
    mode: NormMode,
    step: f64,
) -> Result<f64> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "quadrature step must lie in (0, 0.5], got {step}"
        )));
    }
    topo.check_window(1)?;
    let profile = diagonal_profile(a, topo)?;
    if profile.values.is_empty() {
        return Ok(0.0);
    }
    let half = profile.bandwidth() as f64 + 2.0;
    let intervals = (2.0 * half / step).ceil() as usize;
    let h = 2.0 * half / intervals as f64;
    let (lo, hi) = topo.offset_range();
    let samples = (0..=intervals)
        .into_par_iter()
        .map(|i| {
            let s = -half + i as f64 * h;
            let values = ((s.floor() as i64)..=(s.ceil() as i64))
                .filter(|k| (lo..=hi).contains(k))
                .map(|k| {
                    (
                        k,
                        Complex64::new((1.0 - (k as f64 - s).abs()).max(0.0), 0.0),
                    )
                })
                .filter(|(_, w)| *w != ZERO)
                .collect();
            let mult = MultiplierMap::new(values, "triangle(real shift)");
            operator_norm(&apply_multiplier(a, topo, &mult)?, mode)
        })
        .collect::<Result<Vec<f64>>>()?;
    let inner: f64 = samples[1..intervals].iter().sum();
    Ok(h * (inner + 0.5 * (samples[0] + samples[intervals])))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorNorm {
    L2,
    LInf,
}

/// `sum_n ||(hat(N, n, j) x_j)_j||_p` over the coordinate resolution of `x`.
/// No `5^d` prefactor.
pub fn vector_wiener_norm(x: &[Complex64], scale: usize, p: VectorNorm) -> Result<f64> {
    if scale == 0 {
        return Err(Error::InvalidArgument(
            "window scale must be positive".into(),
        ));
    }
    if x.is_empty() {
        return Ok(0.0);
    }
    let w = TriangleWindow::new(scale);
    let s = scale as i64;
    let last = x.len() as i64 - 1;
    Ok(w.shifts_covering(0, last)
        .map(|n| {
            let weighted = ((n * s - s + 1).max(0)..=(n * s + s - 1).min(last))
                .map(|j| w.value_1d(n, j as f64) * x[j as usize].norm());
            match p {
                VectorNorm::L2 => weighted.map(|v| v * v).sum::<f64>().sqrt(),
                VectorNorm::LInf => weighted.fold(0.0, f64::max),
            }
        })
        .sum())
}

/// `sum_k max_{|n| >= |k|} w_n` for scale-1 piece norms `w`.
pub fn beurling_from_pieces(pieces: &BTreeMap<i64, f64>) -> f64 {
    let reach = pieces.keys().map(|n| n.unsigned_abs()).max().unwrap_or(0) as usize;
    let mut by_radius = vec![0.0f64; reach + 1];
    for (&n, &w) in pieces {
        let r = n.unsigned_abs() as usize;
        by_radius[r] = by_radius[r].max(w);
    }
    // tail[r] = max over radii >= r
    let mut tail = by_radius.clone();
    for r in (0..reach).rev() {
        tail[r] = tail[r].max(tail[r + 1]);
    }
    tail.iter()
        .enumerate()
        .map(|(r, &t)| if r == 0 { t } else { 2.0 * t })
        .sum()
}

pub fn beurling_norm(a: &ComplexMatrix, topo: &Topology, mode: NormMode) -> Result<f64> {
    Ok(beurling_from_pieces(&piece_norms(a, topo, 1, mode)?))
}

/// `sum_{j=0}^{m} ||ad_D^j(A)||_{1,1}` with `D` the position operator.
pub fn sobolev_wiener_norm(
    a: &ComplexMatrix,
    topo: &Topology,
    order: usize,
    mode: NormMode,
) -> Result<f64> {
    let mut total = 0.0;
    let mut current = a.clone();
    for j in 0..=order {
        if j > 0 {
            current = position_derivative(&current, topo, 1)?;
        } else if topo.is_circulant() {
            return Err(Error::TopologyUnsupported {
                op: "sobolev_wiener_norm",
            });
        }
        total += wiener_norm(&current, topo, 1, mode)?;
    }
    Ok(total)
}

/// Splits into the causal part (offsets `k >= 0`) and the anticausal part (`k < 0`).
pub fn causal_split(a: &ComplexMatrix, topo: &Topology) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let m = topo.check_matrix(a)?;
    let plus = ComplexMatrix::from_fn(m, m, |i, j| {
        if topo.offset(i, j) >= 0 {
            a[(i, j)]
        } else {
            ZERO
        }
    });
    let minus = ComplexMatrix::from_fn(m, m, |i, j| {
        if topo.offset(i, j) < 0 {
            a[(i, j)]
        } else {
            ZERO
        }
    });
    Ok((plus, minus))
}

/// Log-linear fit `w_n ~ M gamma^{|n|}` on each side of `n = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub amplitude: f64,
    /// `None` when fewer than three samples on `n > 0` exceed the floor.
    pub gamma_plus: Option<f64>,
    pub gamma_minus: Option<f64>,
    /// Root-mean-square residual of `ln w` over all fitted samples.
    pub residual: f64,
    pub floor: f64,
}

struct SideFit {
    gamma: f64,
    intercept: f64,
    sq_residuals: Vec<f64>,
}

fn fit_side(samples: &[(f64, f64)]) -> Option<SideFit> {
    if samples.len() < 3 {
        return None;
    }
    let len = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / len;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / len;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sq_residuals = samples
        .iter()
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .collect();
    Some(SideFit {
        gamma: slope.exp().clamp(0.0, GAMMA_CLAMP),
        intercept,
        sq_residuals,
    })
}

pub fn exp_decay_fit(piece_norms: &BTreeMap<i64, f64>, floor_rel: f64) -> Result<DecayFit> {
    if !(floor_rel > 0.0 && floor_rel < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "floor_rel must lie in (0, 1), got {floor_rel}"
        )));
    }
    let max = piece_norms.values().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::InsufficientData("no positive piece norm".into()));
    }
    let floor = floor_rel * max;
    let side = |positive: bool| -> Vec<(f64, f64)> {
        piece_norms
            .iter()
            .filter(|(&n, &w)| (if positive { n > 0 } else { n < 0 }) && w > floor)
            .map(|(&n, &w)| (n.unsigned_abs() as f64, w.ln()))
            .collect()
    };
    let plus = fit_side(&side(true));
    let minus = fit_side(&side(false));
    let fitted: Vec<&SideFit> = plus.iter().chain(minus.iter()).collect();
    let amplitude = fitted
        .iter()
        .map(|f| f.intercept.exp())
        .reduce(f64::max)
        .unwrap_or(max);
    let sq: Vec<f64> = fitted
        .iter()
        .flat_map(|f| f.sq_residuals.iter().copied())
        .collect();
    let residual = if sq.is_empty() {
        0.0
    } else {
        (sq.iter().sum::<f64>() / sq.len() as f64).sqrt()
    };
    Ok(DecayFit {
        amplitude,
        gamma_plus: plus.map(|f| f.gamma),
        gamma_minus: minus.map(|f| f.gamma),
        residual,
        floor,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Offsets `k >= 0`.
    Causal,
    /// Offsets `k < 0`.
    Anticausal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "label", rename_all = "snake_case")]
pub enum Classification {
    Banded { bandwidth: usize },
    Exponential { gamma: f64 },
    OneSidedExponential { side: Side, gamma: f64 },
    Wiener,
    Unclassified,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::Banded { bandwidth } => write!(f, "banded({bandwidth})"),
            Classification::Exponential { gamma } => write!(f, "exponential({gamma:.6})"),
            Classification::OneSidedExponential { side, gamma } => {
                write!(f, "one_sided_exponential({side:?}, {gamma:.6})")
            }
            Classification::Wiener => f.write_str("wiener"),
            Classification::Unclassified => f.write_str("unclassified"),
        }
    }
}

/// Applies the decision rules in order: banded, exponential, one-sided
/// exponential, Wiener, unclassified. `piece_norms` are scale-1 pieces.
pub fn classify_decay(piece_norms: &BTreeMap<i64, f64>, fit: Option<&DecayFit>) -> Classification {
    let max = piece_norms.values().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Classification::Banded { bandwidth: 0 };
    }
    let radius_of = |cut: f64| {
        piece_norms
            .iter()
            .filter(|(_, &w)| w >= cut)
            .map(|(n, _)| n.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    };
    let band = radius_of(BANDED_FLOOR_REL * max);
    let edge = [band as i64, -(band as i64)]
        .iter()
        .filter_map(|n| piece_norms.get(n))
        .copied()
        .fold(0.0, f64::max);
    if edge >= BANDED_EDGE_REL * max {
        return Classification::Banded { bandwidth: band };
    }
    if let Some(fit) = fit {
        if fit.residual < FIT_RESIDUAL_MAX {
            match (fit.gamma_plus, fit.gamma_minus) {
                (Some(gp), Some(gm)) if gp.max(gm) < 1.0 => {
                    return Classification::Exponential { gamma: gp.max(gm) }
                }
                (Some(g), None) if g < 1.0 => {
                    return Classification::OneSidedExponential {
                        side: Side::Causal,
                        gamma: g,
                    }
                }
                (None, Some(g)) if g < 1.0 => {
                    return Classification::OneSidedExponential {
                        side: Side::Anticausal,
                        gamma: g,
                    }
                }
                _ => {}
            }
        }
    }
    let reach = radius_of(f64::MIN_POSITIVE);
    let total: f64 = piece_norms.values().sum();
    let tail: f64 = piece_norms
        .iter()
        .filter(|(n, _)| 2 * n.unsigned_abs() as usize > reach)
        .map(|(_, w)| w)
        .sum();
    if tail < WIENER_TAIL_FRACTION * total {
        Classification::Wiener
    } else {
        Classification::Unclassified
    }
}

/// Everything `analyze` reports about one operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub operator_norm: f64,
    pub wiener_1_1: f64,
    pub wiener_1_n: BTreeMap<usize, f64>,
    pub beurling: f64,
    pub sobolev: BTreeMap<usize, f64>,
    pub piece_norms: BTreeMap<i64, f64>,
    pub fit: Option<DecayFit>,
    pub classification: Classification,
    pub causal_mass: f64,
    pub anticausal_mass: f64,
}

/// Computes the class norms and the decay classification. Sobolev norms are
/// only computed on linear topology.
pub fn class_report(
    a: &ComplexMatrix,
    topo: &Topology,
    mode: NormMode,
    scales: &[usize],
    sobolev_order: usize,
) -> Result<ClassReport> {
    let pieces = piece_norms(a, topo, 1, mode)?;
    let wiener_1_1 = WIENER_PREFACTOR * pieces.values().sum::<f64>();
    let mut wiener_1_n = BTreeMap::new();
    for &s in scales {
        let v = if s == 1 {
            wiener_1_1
        } else {
            wiener_norm(a, topo, s, mode)?
        };
        wiener_1_n.insert(s, v);
    }
    let mut sobolev = BTreeMap::new();
    if !topo.is_circulant() {
        for m in 0..=sobolev_order {
            sobolev.insert(m, sobolev_wiener_norm(a, topo, m, mode)?);
        }
    }
    let fit = exp_decay_fit(&pieces, CLASSIFY_FLOOR_REL).ok();
    let classification = classify_decay(&pieces, fit.as_ref());
    let profile = diagonal_profile(a, topo)?;
    Ok(ClassReport {
        operator_norm: operator_norm(a, mode)?,
        wiener_1_1,
        wiener_1_n,
        beurling: beurling_from_pieces(&pieces),
        sobolev,
        piece_norms: pieces,
        fit,
        classification,
        causal_mass: profile.values.range(0..).map(|(_, v)| v).sum(),
        anticausal_mass: profile.values.range(..0).map(|(_, v)| v).sum(),
    })
}
