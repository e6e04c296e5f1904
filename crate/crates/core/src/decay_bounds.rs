//! A-priori decay certificates for inverses.
//!
//! Two certificates are issued:
//!
//! * [`BandedInverseCertificate`]: for `A` with diagonals confined to
//!   `|k| <= a`, every window piece of `B = A^{-1}` obeys
//!   `||phi_{N,n} B|| <= inf_alpha exp(alpha N (1 - |n|)) ||B|| / (1 - (exp(alpha a) - 1) kappa)`
//!   for `|n| > 1`, with `alpha` ranging over `(0, ln(1 + 1/kappa) / a)`.
//! * [`WienerInverseCertificate`]: for `A` in the Wiener class,
//!   `||B||_{1,1} <= (2N+1)^d ||B||_{1,N} <= (||B|| / eps_A) (2N+1)^d`
//!   with `N = psi_A(eps_A / ||B||)`.
//!
//! Both are checked against the directly computed inverse by the `verify_*`
//! functions.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::class_norms::{piece_norms, wiener_norm, windowed_piece};
use crate::error::{Error, Result};
use crate::inverse_engine::band_split;
use crate::linalg::{invert, operator_norm, Inverse, NormMode};
use crate::matrix::ComplexMatrix;
use crate::operator::{apply_multiplier, diagonal_profile};
use crate::topology::Topology;
use crate::windows::{exp_multiplier, ExpShape, TriangleWindow};

/// Distance kept from both ends of the open interval `(0, alpha_max)`.
pub const ALPHA_MARGIN: f64 = 1e-9;
pub const GRID_POINTS: usize = 64;
pub const GOLDEN_REL_TOL: f64 = 1e-12;
/// Relative slack allowed when comparing measured norms to certified bounds.
pub const VERIFY_SLACK: f64 = 1e-8;
pub const KAPPA_SLACK: f64 = 1e-9;

/// Upper end of the admissible decay rates, `ln(1 + 1/kappa) / a`.
pub fn alpha_domain(a: f64, kappa: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive, got {a}"
        )));
    }
    if !(kappa >= 1.0 - KAPPA_SLACK) {
        return Err(Error::InvalidKappa(kappa));
    }
    Ok((1.0 / kappa.max(1.0)).ln_1p() / a)
}

/// `M_n(alpha) = sum_{k : n_k != 0} alpha_k (1 - |n_k|)`.
pub fn m_n_exponent(alpha: &[f64], n: &[i64]) -> Result<f64> {
    if alpha.len() != n.len() {
        return Err(Error::DimensionMismatch {
            left: alpha.len(),
            right: n.len(),
        });
    }
    Ok(alpha
        .iter()
        .zip(n)
        .filter(|(_, &nk)| nk != 0)
        .map(|(&ak, &nk)| ak * (1.0 - nk.unsigned_abs() as f64))
        .sum())
}

/// Inputs of the banded bound that do not depend on the shift `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    /// Half-width of the box containing the diagonals of `A`.
    pub bandwidth: f64,
    pub scale: usize,
    pub norm_a: f64,
    pub norm_b: f64,
    pub dim: usize,
}

impl BoundParams {
    pub fn kappa(&self) -> f64 {
        self.norm_a * self.norm_b
    }

    /// Largest admissible rate; in `d` dimensions the search runs along the
    /// diagonal `alpha = (t, ..., t)`, so `alpha . a = t d a`.
    pub fn alpha_max(&self) -> Result<f64> {
        alpha_domain(self.bandwidth * self.dim as f64, self.kappa())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub n: i64,
    /// Optimising rate; absent where the bound reduces to `||B||`.
    pub alpha_star: Option<f64>,
    pub bound: f64,
}

/// `ln` of the bound at rate `t` (per coordinate).
fn log_objective(p: &BoundParams, m_coeff: f64, t: f64) -> f64 {
    let denom = 1.0 - (t * p.dim as f64 * p.bandwidth).exp_m1() * p.kappa();
    p.scale as f64 * t * m_coeff + p.norm_b.ln() - denom.ln()
}

/// Minimises the certified bound for one shift `n` (a `d`-vector).
pub fn banded_inverse_bound(p: &BoundParams, n: &[i64]) -> Result<BoundEntry> {
    if n.len() != p.dim {
        return Err(Error::DimensionMismatch {
            left: p.dim,
            right: n.len(),
        });
    }
    let head = n.first().copied().unwrap_or(0);
    // M_n(alpha) = t * m_coeff along the search direction
    let m_coeff = m_n_exponent(&vec![1.0; p.dim], n)?;
    if m_coeff == 0.0 {
        return Ok(BoundEntry {
            n: head,
            alpha_star: None,
            bound: p.norm_b,
        });
    }
    let alpha_max = p.alpha_max()?;
    if alpha_max <= 2.0 * ALPHA_MARGIN {
        return Err(Error::EmptyDomain { alpha_max });
    }
    let (lo, hi) = (ALPHA_MARGIN, alpha_max - ALPHA_MARGIN);
    let f = |t: f64| log_objective(p, m_coeff, t);

    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS).map(|i| lo + i as f64 * step).collect();
    let best = (0..GRID_POINTS)
        .map(|i| (i, f(grid[i])))
        .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
        .0;
    let mut left = grid[best.saturating_sub(1)];
    let mut right = grid[(best + 1).min(GRID_POINTS - 1)];

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = right - inv_phi * (right - left);
    let mut x2 = left + inv_phi * (right - left);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while right - left > GOLDEN_REL_TOL * right.abs().max(f64::MIN_POSITIVE) {
        if f1 <= f2 {
            right = x2;
            x2 = x1;
            f2 = f1;
            x1 = right - inv_phi * (right - left);
            f1 = f(x1);
        } else {
            left = x1;
            x1 = x2;
            f1 = f2;
            x2 = left + inv_phi * (right - left);
            f2 = f(x2);
        }
    }
    // Keep the best of the final bracket and the grid optimum.
    let candidates = [left, right, 0.5 * (left + right), grid[best]];
    let t = candidates
        .iter()
        .copied()
        .fold((grid[best], f64::INFINITY), |b, x| {
            let v = f(x);
            if v < b.1 {
                (x, v)
            } else {
                b
            }
        })
        .0;
    Ok(BoundEntry {
        n: head,
        alpha_star: Some(t),
        bound: f(t).exp(),
    })
}

/// Norms of `A` and of its direct inverse, shared by the certificates.
#[derive(Clone, Debug)]
pub struct InverseContext {
    pub topology: Topology,
    pub mode: NormMode,
    pub inverse: Inverse,
    pub norm_a: f64,
    pub norm_b: f64,
    pub bandwidth: usize,
}

impl InverseContext {
    pub fn new(a: &ComplexMatrix, topo: &Topology, mode: NormMode) -> Result<Self> {
        topo.check_matrix(a)?;
        let inverse = invert(a)?;
        Ok(Self {
            topology: *topo,
            mode,
            norm_a: operator_norm(a, mode)?,
            norm_b: operator_norm(&inverse.matrix, mode)?,
            bandwidth: diagonal_profile(a, topo)?.bandwidth(),
            inverse,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.norm_a * self.norm_b
    }

    pub fn b(&self) -> &ComplexMatrix {
        &self.inverse.matrix
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandedInverseCertificate {
    pub bandwidth: usize,
    pub scale: usize,
    pub norm_a: f64,
    pub norm_b: f64,
    pub kappa: f64,
    /// `None` for a diagonal `A` (bandwidth 0), where every rate is admissible.
    pub alpha_max: Option<f64>,
    pub entries: Vec<BoundEntry>,
    /// `exp(-alpha_max)`; zero for bandwidth 0.
    pub asymptotic_rate: f64,
}

impl BandedInverseCertificate {
    pub fn bound(&self, n: i64) -> Option<f64> {
        self.entries.iter().find(|e| e.n == n).map(|e| e.bound)
    }
}

/// Certificate for the given norms; `shifts` lists the `n` to certify.
pub fn banded_certificate_from_norms(
    bandwidth: usize,
    scale: usize,
    norm_a: f64,
    norm_b: f64,
    shifts: &[i64],
) -> Result<BandedInverseCertificate> {
    let kappa = norm_a * norm_b;
    if !(kappa >= 1.0 - KAPPA_SLACK) {
        return Err(Error::InvalidKappa(kappa));
    }
    if bandwidth == 0 {
        return Ok(BandedInverseCertificate {
            bandwidth,
            scale,
            norm_a,
            norm_b,
            kappa,
            alpha_max: None,
            entries: shifts
                .iter()
                .map(|&n| BoundEntry {
                    n,
                    alpha_star: None,
                    bound: norm_b,
                })
                .collect(),
            asymptotic_rate: 0.0,
        });
    }
    let params = BoundParams {
        bandwidth: bandwidth as f64,
        scale,
        norm_a,
        norm_b,
        dim: 1,
    };
    let alpha_max = params.alpha_max()?;
    if alpha_max <= 2.0 * ALPHA_MARGIN {
        return Err(Error::EmptyDomain { alpha_max });
    }
    let entries = shifts
        .par_iter()
        .map(|&n| banded_inverse_bound(&params, &[n]))
        .collect::<Result<Vec<_>>>()?;
    Ok(BandedInverseCertificate {
        bandwidth,
        scale,
        norm_a,
        norm_b,
        kappa,
        alpha_max: Some(alpha_max),
        entries,
        asymptotic_rate: (-alpha_max).exp(),
    })
}

fn certified_shifts(topo: &Topology, scale: usize) -> Vec<i64> {
    let (lo, hi) = topo.offset_range();
    TriangleWindow::new(scale).shifts_covering(lo, hi).collect()
}

pub fn banded_inverse_certificate_with(
    ctx: &InverseContext,
    scale: usize,
) -> Result<BandedInverseCertificate> {
    ctx.topology.check_window(scale)?;
    banded_certificate_from_norms(
        ctx.bandwidth,
        scale,
        ctx.norm_a,
        ctx.norm_b,
        &certified_shifts(&ctx.topology, scale),
    )
}

pub fn banded_inverse_certificate(
    a: &ComplexMatrix,
    topo: &Topology,
    scale: usize,
    mode: NormMode,
) -> Result<BandedInverseCertificate> {
    banded_inverse_certificate_with(&InverseContext::new(a, topo, mode)?, scale)
}

/// Outcome of comparing certified bounds with measured norms of the inverse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub checked: usize,
    pub max_relative_violation: f64,
    pub passed: bool,
}

impl Default for Verification {
    fn default() -> Self {
        Self {
            checked: 0,
            max_relative_violation: 0.0,
            passed: true,
        }
    }
}

impl Verification {
    pub fn record(&mut self, measured: f64, bound: f64) {
        self.checked += 1;
        let violation = if measured <= bound {
            0.0
        } else if bound > 0.0 {
            measured / bound - 1.0
        } else {
            f64::INFINITY
        };
        self.max_relative_violation = self.max_relative_violation.max(violation);
        self.passed = self.max_relative_violation <= VERIFY_SLACK;
    }

    pub fn merge(&mut self, other: &Verification) {
        self.checked += other.checked;
        self.max_relative_violation = self
            .max_relative_violation
            .max(other.max_relative_violation);
        self.passed = self.max_relative_violation <= VERIFY_SLACK;
    }
}

/// Measured `||phi_{N,n} B||` against the certificate, for every certified `n`.
pub fn verify_banded(
    cert: &BandedInverseCertificate,
    b: &ComplexMatrix,
    topo: &Topology,
    mode: NormMode,
) -> Result<(Verification, BTreeMap<i64, f64>)> {
    let measured = piece_norms(b, topo, cert.scale, mode)?;
    let mut v = Verification::default();
    for e in &cert.entries {
        v.record(measured.get(&e.n).copied().unwrap_or(0.0), e.bound);
    }
    Ok((v, measured))
}

/// `delta_A = ((4 kappa + 3) / (4 kappa + 2))^{1/(3d)}` and
/// `eps_A = 5^{-d} (16 ((2 delta_A - 1)/(delta_A - 1))^d - 12)^{-1}`.
pub fn wiener_constants(kappa: f64, dim: usize) -> Result<(f64, f64)> {
    if !(kappa >= 1.0 - KAPPA_SLACK) {
        return Err(Error::InvalidKappa(kappa));
    }
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let d = dim as f64;
    let delta = ((4.0 * kappa + 3.0) / (4.0 * kappa + 2.0)).powf(1.0 / (3.0 * d));
    let ratio = (2.0 * delta - 1.0) / (delta - 1.0);
    let eps = 5f64.powf(-d) / (16.0 * ratio.powf(d) - 12.0);
    Ok((delta, eps))
}

/// Smallest scale `K` whose out-of-band remainder
/// `A - sum_{|k| <= 2} phi_{K,k} A` has `||.||_{1,K} <= t`.
pub fn psi_a(a: &ComplexMatrix, topo: &Topology, t: f64, mode: NormMode) -> Result<usize> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "psi_A needs t > 0, got {t}"
        )));
    }
    topo.check_matrix(a)?;
    for k in 1.. {
        topo.check_window(k)?;
        let (_, d) = band_split(a, topo, k)?;
        if d.is_zero() || wiener_norm(&d, topo, k, mode)? <= t {
            return Ok(k);
        }
    }
    unreachable!("the remainder vanishes once 2K covers the bandwidth")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WienerInverseCertificate {
    pub dim: usize,
    pub kappa: f64,
    pub norm_a: f64,
    pub norm_b: f64,
    pub delta_a: f64,
    pub epsilon_a: f64,
    /// `psi_A(epsilon_A / ||B||)`.
    pub scale: usize,
    /// `(||B|| / eps_A) (2N + 1)^d`.
    pub bound_1_1: f64,
}

pub fn wiener_inverse_certificate_with(
    ctx: &InverseContext,
    a: &ComplexMatrix,
) -> Result<WienerInverseCertificate> {
    let kappa = ctx.kappa();
    let (delta_a, epsilon_a) = wiener_constants(kappa, 1)?;
    let scale = psi_a(a, &ctx.topology, epsilon_a / ctx.norm_b, ctx.mode)?;
    Ok(WienerInverseCertificate {
        dim: 1,
        kappa,
        norm_a: ctx.norm_a,
        norm_b: ctx.norm_b,
        delta_a,
        epsilon_a,
        scale,
        bound_1_1: ctx.norm_b / epsilon_a * (2 * scale + 1) as f64,
    })
}

pub fn wiener_inverse_certificate(
    a: &ComplexMatrix,
    topo: &Topology,
    mode: NormMode,
) -> Result<WienerInverseCertificate> {
    wiener_inverse_certificate_with(&InverseContext::new(a, topo, mode)?, a)
}

/// Measured norms of `B` for the Wiener certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WienerMeasurement {
    pub wiener_1_1: f64,
    pub wiener_1_n: f64,
}

/// Checks `||B||_{1,1} <= bound`, `(2N+1) ||B||_{1,N} <= bound` and
/// `||B||_{1,1} <= (2N+1) ||B||_{1,N}`.
pub fn verify_wiener(
    cert: &WienerInverseCertificate,
    b: &ComplexMatrix,
    topo: &Topology,
    mode: NormMode,
) -> Result<(Verification, WienerMeasurement)> {
    let w11 = wiener_norm(b, topo, 1, mode)?;
    let w1n = if cert.scale == 1 {
        w11
    } else {
        wiener_norm(b, topo, cert.scale, mode)?
    };
    let middle = (2 * cert.scale + 1) as f64 * w1n;
    let mut v = Verification::default();
    v.record(w11, cert.bound_1_1);
    v.record(middle, cert.bound_1_1);
    v.record(w11, middle);
    Ok((
        v,
        WienerMeasurement {
            wiener_1_1: w11,
            wiener_1_n: w1n,
        },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OneSide {
    Right,
    Left,
}

/// `(||phi_{N,±n} A||, exp(N M_n(alpha)) ||e_{±alpha} A||)` for `n >= 1`, linear topology.
pub fn one_sided_window_bound(
    a: &ComplexMatrix,
    topo: &Topology,
    scale: usize,
    n: u64,
    alpha: f64,
    side: OneSide,
    mode: NormMode,
) -> Result<(f64, f64)> {
    if topo.is_circulant() {
        return Err(Error::TopologyUnsupported {
            op: "one_sided_window_bound",
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "one-sided window bound needs n >= 1".into(),
        ));
    }
    let (shift, shape) = match side {
        OneSide::Right => (n as i64, ExpShape::Right),
        OneSide::Left => (-(n as i64), ExpShape::Left),
    };
    let weighted = apply_multiplier(a, topo, &exp_multiplier(alpha, shape, topo)?)?;
    let lhs = operator_norm(&windowed_piece(a, topo, scale, shift)?, mode)?;
    let exponent = scale as f64 * m_n_exponent(&[alpha], &[n as i64])?;
    Ok((lhs, exponent.exp() * operator_norm(&weighted, mode)?))
}

/// `(||phi_{N,n} A||, exp(N M_n(alpha)) ||h_alpha A||)` on linear topology;
/// the exponent is `alpha N (1 - |n|)` for `n != 0` and zero for `n = 0`.
pub fn two_sided_window_bound(
    a: &ComplexMatrix,
    topo: &Topology,
    scale: usize,
    n: i64,
    alpha: f64,
    mode: NormMode,
) -> Result<(f64, f64)> {
    if topo.is_circulant() {
        return Err(Error::TopologyUnsupported {
            op: "two_sided_window_bound",
        });
    }
    let weighted = apply_multiplier(a, topo, &exp_multiplier(alpha, ExpShape::TwoSided, topo)?)?;
    let lhs = operator_norm(&windowed_piece(a, topo, scale, n)?, mode)?;
    let exponent = scale as f64 * m_n_exponent(&[alpha], &[n])?;
    Ok((lhs, exponent.exp() * operator_norm(&weighted, mode)?))
}
