//! Constructive inversion by a band split and a Neumann series, and
//! spectral-radius sequences in the Wiener and Beurling norms.

use serde::{Deserialize, Serialize};

use crate::class_norms::{
    beurling_from_pieces, piece_norms, wiener_norm, windowed_piece, WIENER_PREFACTOR,
};
use crate::error::{Error, Result};
use crate::linalg::{direct_inverse, operator_norm, NormMode};
use crate::matrix::{ComplexMatrix, ONE};
use crate::operator::diagonal_profile;
use crate::topology::Topology;

/// Largest power accepted by [`spectral_radius_sequence`].
pub const MAX_POWER: usize = 24;
/// The automatic scale accepts `N` once `||D||_{1,N} ||L||_{1,N}` drops below this.
pub const AUTO_CONTRACTION: f64 = 0.5;

/// `C = sum_{|k| <= 2} phi_{N,k} A` and `D = A - C`; `C` equals `A` on
/// `|j| <= 2N` and `D` vanishes there.
pub fn band_split(
    a: &ComplexMatrix,
    topo: &Topology,
    scale: usize,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    topo.check_matrix(a)?;
    topo.check_window(scale)?;
    let m = a.rows();
    let mut c = ComplexMatrix::zeros(m, m);
    for k in -2..=2 {
        c = &c + &windowed_piece(a, topo, scale, k)?;
    }
    let d = a - &c;
    Ok((c, d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleChoice {
    Fixed(usize),
    Auto,
}

impl std::str::FromStr for ScaleChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(ScaleChoice::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(ScaleChoice::Fixed(n)),
            _ => Err(Error::InvalidArgument(format!(
                "scale must be a positive integer or 'auto', got '{s}'"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeumannOptions {
    pub scale: ScaleChoice,
    pub tol: f64,
    pub max_iter: usize,
    pub mode: NormMode,
}

impl Default for NeumannOptions {
    fn default() -> Self {
        Self {
            scale: ScaleChoice::Auto,
            tol: 1e-10,
            max_iter: 200,
            mode: NormMode::Spectral,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeumannTrace {
    #[serde(rename = "N")]
    pub scale: usize,
    /// Number of partial sums formed, `L` itself counting as the first.
    pub iterations: usize,
    /// `||S_J||_{1,N}` for `J = 0, 1, ...`.
    pub wiener_norm_partials: Vec<f64>,
    /// `||S_J - S_{J-1}||_{1,N}` for `J = 1, 2, ...`.
    pub increments: Vec<f64>,
    /// `||D||_{1,N} ||L||_{1,N}`.
    pub contraction_bound: f64,
    /// `||D L||_{1,N}`, the predicted geometric ratio of the increments.
    pub dl_norm: f64,
    /// `||A S - I||` in the row-sum norm.
    pub residual: f64,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct NeumannResult {
    pub matrix: ComplexMatrix,
    pub trace: NeumannTrace,
}

impl NeumannResult {
    pub fn ensure_converged(self) -> Result<Self> {
        if self.trace.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                iterations: self.trace.iterations,
                residual: self.trace.residual,
            })
        }
    }
}

struct Split {
    scale: usize,
    d: ComplexMatrix,
    l: ComplexMatrix,
    contraction: f64,
}

fn split_at(a: &ComplexMatrix, topo: &Topology, scale: usize, mode: NormMode) -> Result<Split> {
    let (c, d) = band_split(a, topo, scale)?;
    let l = direct_inverse(&c)?;
    let contraction = if d.is_zero() {
        0.0
    } else {
        wiener_norm(&d, topo, scale, mode)? * wiener_norm(&l, topo, scale, mode)?
    };
    Ok(Split {
        scale,
        d,
        l,
        contraction,
    })
}

/// Largest scale worth trying: from `2N >= bandwidth` on, `D = 0` and `C = A`.
fn last_useful_scale(a: &ComplexMatrix, topo: &Topology) -> Result<usize> {
    let bw = diagonal_profile(a, topo)?.bandwidth();
    let mut last = bw.div_ceil(2).max(1);
    if topo.is_circulant() {
        last = last.min(topo.size / 2);
    }
    Ok(last)
}

fn choose_split(
    a: &ComplexMatrix,
    topo: &Topology,
    scale: ScaleChoice,
    mode: NormMode,
) -> Result<Split> {
    match scale {
        ScaleChoice::Fixed(n) => split_at(a, topo, n, mode),
        ScaleChoice::Auto => {
            let last = last_useful_scale(a, topo)?;
            for scale in 1..=last {
                match split_at(a, topo, scale, mode) {
                    Ok(s) if s.contraction < AUTO_CONTRACTION => return Ok(s),
                    Ok(s) => log::debug!("scale {scale}: contraction {:.3e}", s.contraction),
                    Err(Error::Singular { .. }) => log::debug!("scale {scale}: band part singular"),
                    Err(e) => return Err(e),
                }
            }
            Err(Error::NoConvergentScale { max_scale: last })
        }
    }
}

/// `B = L sum_j (-D L)^j` with `L = C^{-1}`, summed until the Wiener norm of
/// the increment drops below `tol`. A run that exhausts `max_iter` is
/// returned with `converged = false`; see [`NeumannResult::ensure_converged`].
pub fn neumann_inverse(
    a: &ComplexMatrix,
    topo: &Topology,
    opts: &NeumannOptions,
) -> Result<NeumannResult> {
    let m = topo.check_matrix(a)?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    if opts.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    let split = choose_split(a, topo, opts.scale, opts.mode)?;
    let scale = split.scale;
    let mut sum = split.l.clone();
    let mut partials = vec![wiener_norm(&sum, topo, scale, opts.mode)?];
    let mut increments = Vec::new();
    let mut iterations = 1;
    let mut dl_norm = 0.0;
    let mut converged = split.d.is_zero();

    if !converged {
        let step = split.d.try_matmul(&split.l)?.scale(-ONE);
        dl_norm = wiener_norm(&step, topo, scale, opts.mode)?;
        let mut term = split.l.clone();
        while iterations < opts.max_iter {
            term = term.try_matmul(&step)?;
            sum = &sum + &term;
            iterations += 1;
            let inc = wiener_norm(&term, topo, scale, opts.mode)?;
            if !inc.is_finite() {
                return Err(Error::NonFinite(format!(
                    "Neumann increment at iteration {iterations}"
                )));
            }
            increments.push(inc);
            partials.push(wiener_norm(&sum, topo, scale, opts.mode)?);
            if inc < opts.tol {
                converged = true;
                break;
            }
        }
    }

    let residual = operator_norm(
        &(&a.try_matmul(&sum)? - &ComplexMatrix::identity(m)),
        NormMode::RowSum,
    )?;
    if !converged {
        log::warn!("Neumann series stopped after {iterations} iterations, residual {residual:.3e}");
    }
    Ok(NeumannResult {
        matrix: sum,
        trace: NeumannTrace {
            scale,
            iterations,
            wiener_norm_partials: partials,
            increments,
            contraction_bound: split.contraction,
            dl_norm,
            residual,
            converged,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusNorm {
    Wiener,
    Beurling,
}

/// Wiener (`||.||_{1,1}`) and Beurling norms of one power of `A`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerNorms {
    pub power: usize,
    pub wiener: f64,
    pub beurling: f64,
}

/// Norms of `A^m` for `m = 1..=m_max`, powers formed by repeated multiplication.
pub fn power_norms(
    a: &ComplexMatrix,
    topo: &Topology,
    m_max: usize,
    mode: NormMode,
) -> Result<Vec<PowerNorms>> {
    topo.check_matrix(a)?;
    if m_max == 0 || m_max > MAX_POWER {
        return Err(Error::InvalidArgument(format!(
            "power count must be in 1..={MAX_POWER}, got {m_max}"
        )));
    }
    let mut out = Vec::with_capacity(m_max);
    let mut power = a.clone();
    for m in 1..=m_max {
        if m > 1 {
            power = power.try_matmul(a)?;
        }
        if !power.all_finite() {
            return Err(Error::Overflow(format!("A^{m} has non-finite entries")));
        }
        let pieces = piece_norms(&power, topo, 1, mode)?;
        let wiener = WIENER_PREFACTOR * pieces.values().sum::<f64>();
        let beurling = beurling_from_pieces(&pieces);
        if !wiener.is_finite() || !beurling.is_finite() {
            return Err(Error::Overflow(format!("norm of A^{m} is not finite")));
        }
        out.push(PowerNorms {
            power: m,
            wiener,
            beurling,
        });
    }
    Ok(out)
}

/// `r_m = ||A^m||^{1/m}` for `m = 1..=m_max`.
pub fn spectral_radius_sequence(
    a: &ComplexMatrix,
    topo: &Topology,
    norm: RadiusNorm,
    m_max: usize,
    mode: NormMode,
) -> Result<Vec<f64>> {
    Ok(power_norms(a, topo, m_max, mode)?
        .into_iter()
        .map(|p| {
            let v = match norm {
                RadiusNorm::Wiener => p.wiener,
                RadiusNorm::Beurling => p.beurling,
            };
            v.powf(1.0 / p.power as f64)
        })
        .collect())
}
