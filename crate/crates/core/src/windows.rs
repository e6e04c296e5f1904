//! Triangle windows, the periodic comparison kernel `eta` and exponential
//! multipliers.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::MultiplierMap;
use crate::topology::Topology;

/// Largest exponent magnitude accepted before `exp` leaves the double range.
pub const MAX_EXPONENT: f64 = 700.0;

/// Triangle window of scale `N` in `dim` dimensions:
/// `prod_j max(0, 1 - |lambda_j| / N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleWindow {
    pub scale: usize,
    pub dim: usize,
}

impl TriangleWindow {
    pub fn new(scale: usize) -> Self {
        Self { scale, dim: 1 }
    }

    pub fn with_dim(scale: usize, dim: usize) -> Self {
        Self { scale, dim }
    }

    /// One-dimensional value of the window shifted to `scale * shift`.
    #[inline]
    pub fn value_1d(&self, shift: i64, lambda: f64) -> f64 {
        let n = self.scale as f64;
        (1.0 - (lambda - n * shift as f64).abs() / n).max(0.0)
    }

    /// Integer shifts `n` whose open support `(N n - N, N n + N)` meets `[lo, hi]`.
    pub fn shifts_covering(&self, lo: i64, hi: i64) -> std::ops::RangeInclusive<i64> {
        let n = self.scale as i64;
        (lo.div_euclid(n))..=((hi + n - 1).div_euclid(n))
    }
}

/// `prod_j max(0, 1 - |lambda_j - N n_j| / N)`.
pub fn hat_value(w: &TriangleWindow, shift: &[i64], lambda: &[f64]) -> Result<f64> {
    if shift.len() != w.dim {
        return Err(Error::DimensionMismatch {
            left: w.dim,
            right: shift.len(),
        });
    }
    if lambda.len() != w.dim {
        return Err(Error::DimensionMismatch {
            left: w.dim,
            right: lambda.len(),
        });
    }
    if w.scale == 0 {
        return Err(Error::InvalidArgument(
            "window scale must be positive".into(),
        ));
    }
    Ok(shift
        .iter()
        .zip(lambda)
        .map(|(&n, &l)| w.value_1d(n, l))
        .product())
}

/// Weights `k -> hat(N, n, k)` on the topology's offsets (nonzero ones only).
pub fn window_multiplier(w: &TriangleWindow, shift: i64, topo: &Topology) -> Result<MultiplierMap> {
    if w.dim != 1 {
        return Err(Error::DimensionMismatch {
            left: 1,
            right: w.dim,
        });
    }
    if w.scale == 0 {
        return Err(Error::InvalidArgument(
            "window scale must be positive".into(),
        ));
    }
    topo.check_window(w.scale)?;
    let n = w.scale as i64;
    let (lo, hi) = topo.offset_range();
    let values = ((n * shift - n + 1).max(lo)..=(n * shift + n - 1).min(hi))
        .map(|k| (k, Complex64::new(w.value_1d(shift, k as f64), 0.0)))
        .collect();
    Ok(MultiplierMap::new(
        values,
        format!("triangle(N={}, n={shift})", w.scale),
    ))
}

/// Parameters of the `4a`-periodic kernel that equals `exp(-alpha * lambda)` on `[-a, a]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaParams {
    pub a: f64,
    pub alpha: f64,
}

impl EtaParams {
    pub fn new(a: f64, alpha: f64) -> Result<Self> {
        if !(a > 0.0 && alpha > 0.0 && a.is_finite() && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "eta needs a > 0 and alpha > 0, got a = {a}, alpha = {alpha}"
            )));
        }
        Ok(Self { a, alpha })
    }

    pub fn period(&self) -> f64 {
        4.0 * self.a
    }
}

/// Periodic extension of `exp(-alpha l)` on `[-a, a]`, `exp(alpha (2a + l))` on `[-3a, -a)`.
pub fn eta_value(p: &EtaParams, lambda: f64) -> f64 {
    let a = p.a;
    let reduced = (lambda + 3.0 * a).rem_euclid(p.period()) - 3.0 * a;
    if reduced >= -a {
        (-p.alpha * reduced).exp()
    } else {
        (p.alpha * (2.0 * a + reduced)).exp()
    }
}

/// `c_n = 2 int_0^{2a} exp(alpha (a - l)) cos(pi n l / 2a) dl`, in closed form.
pub fn eta_fourier_coeff(p: &EtaParams, n: u64) -> f64 {
    let (a, alpha) = (p.a, p.alpha);
    let pn = std::f64::consts::PI * n as f64;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    8.0 * alpha * a * a * (alpha * a).exp() * (1.0 - (-2.0 * alpha * a).exp() * sign)
        / (4.0 * alpha * alpha * a * a + pn * pn)
}

/// Cosine-series coefficient `a_n = c_n / (2a)` of `eta(. - a)` on its period;
/// the series `a_0/2 + sum a_n cos(pi n l / 2a)` synthesises the kernel.
pub fn eta_synthesis_coeff(p: &EtaParams, n: u64) -> f64 {
    eta_fourier_coeff(p, n) / (2.0 * p.a)
}

/// Zeroth coefficient of `h = eta - 1`, i.e. `c_0 - 4a = (4/alpha)(sinh(alpha a) - alpha a)`.
pub fn h_zeroth_coeff(p: &EtaParams) -> f64 {
    let x = p.alpha * p.a;
    4.0 / p.alpha * (x.sinh() - x)
}

/// Partial sum `a_0/2 + sum_{n=1}^{terms} a_n cos(pi n l / 2a)` evaluated at `l`.
pub fn eta_partial_sum(p: &EtaParams, lambda: f64, terms: u64) -> f64 {
    let w = std::f64::consts::PI * lambda / (2.0 * p.a);
    let head = eta_synthesis_coeff(p, 0) / 2.0;
    // Ascending order; small terms last.
    (1..=terms).fold(head, |acc, n| {
        acc + eta_synthesis_coeff(p, n) * (w * n as f64).cos()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpShape {
    /// `exp(alpha |k|)`
    TwoSided,
    /// `exp(alpha k)`
    Right,
    /// `exp(-alpha k)`
    Left,
}

/// Exponential diagonal weights on the topology's offsets.
pub fn exp_multiplier(alpha: f64, shape: ExpShape, topo: &Topology) -> Result<MultiplierMap> {
    let (lo, hi) = topo.offset_range();
    let reach = lo.unsigned_abs().max(hi.unsigned_abs()) as f64;
    if !alpha.is_finite() || alpha.abs() * reach > MAX_EXPONENT {
        return Err(Error::Overflow(format!(
            "|alpha| * max|k| = {} exceeds {MAX_EXPONENT}",
            alpha.abs() * reach
        )));
    }
    let exponents: BTreeMap<i64, f64> = topo
        .offsets()
        .map(|k| {
            let x = match shape {
                ExpShape::TwoSided => alpha * k.abs() as f64,
                ExpShape::Right => alpha * k as f64,
                ExpShape::Left => -alpha * k as f64,
            };
            (k, x)
        })
        .collect();
    Ok(MultiplierMap::from_exponents(
        exponents,
        format!("exp({shape:?}, alpha={alpha})"),
    ))
}
