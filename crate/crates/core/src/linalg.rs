//! Operator norms, LU inversion and condition numbers.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ONE, ZERO};

/// Above this order the spectral norm falls back to power iteration.
pub const SVD_MAX_ORDER: usize = 512;
pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITER: usize = 10_000;
/// A pivot below this fraction of the largest entry modulus is singular.
pub const SINGULAR_PIVOT_REL: f64 = 1e-13;
pub const RESIDUAL_REL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    /// Largest singular value (the `l2 -> l2` operator norm).
    #[default]
    Spectral,
    /// Maximum absolute row sum (`l_inf -> l_inf`).
    RowSum,
    /// Maximum absolute column sum (`l1 -> l1`).
    ColSum,
}

impl std::fmt::Display for NormMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormMode::Spectral => "spectral",
            NormMode::RowSum => "row-sum",
            NormMode::ColSum => "col-sum",
        })
    }
}

impl std::str::FromStr for NormMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(NormMode::Spectral),
            "row-sum" | "row_sum" => Ok(NormMode::RowSum),
            "col-sum" | "col_sum" => Ok(NormMode::ColSum),
            other => Err(Error::InvalidArgument(format!(
                "unknown norm mode `{other}`"
            ))),
        }
    }
}

pub fn operator_norm(a: &ComplexMatrix, mode: NormMode) -> Result<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0.0);
    }
    if !a.all_finite() {
        return Err(Error::NonFinite("operator_norm input".into()));
    }
    match mode {
        NormMode::RowSum => Ok(row_sum_norm(a)),
        NormMode::ColSum => Ok((0..a.cols())
            .map(|j| (0..a.rows()).map(|i| a[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)),
        NormMode::Spectral => {
            if let Some(v) = monomial_norm(a) {
                return Ok(v);
            }
            if a.rows().max(a.cols()) <= SVD_MAX_ORDER {
                Ok(svd_spectral_norm(a))
            } else {
                power_spectral_norm(a, POWER_TOL, POWER_MAX_ITER)
            }
        }
    }
}

fn row_sum_norm(a: &ComplexMatrix) -> f64 {
    (0..a.rows())
        .map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrices with at most one nonzero per row and per column (a weighted
/// partial permutation) have every induced norm equal to the largest modulus.
/// Single diagonals, which dominate the class-norm workload, are of this form.
fn monomial_norm(a: &ComplexMatrix) -> Option<f64> {
    let mut col_used = vec![false; a.cols()];
    let mut best = 0.0f64;
    for i in 0..a.rows() {
        let mut seen = false;
        for (j, z) in a.row(i).iter().enumerate() {
            if *z != ZERO {
                if seen || col_used[j] {
                    return None;
                }
                seen = true;
                col_used[j] = true;
                best = best.max(z.norm());
            }
        }
    }
    Some(best)
}

fn to_nalgebra(a: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.entries())
}

fn svd_spectral_norm(a: &ComplexMatrix) -> f64 {
    to_nalgebra(a)
        .svd_unordered(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Power iteration on `A^* A`; stops once successive estimates of the largest
/// eigenvalue agree to `tol` relative.
pub fn power_spectral_norm(a: &ComplexMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    let n = a.cols();
    if n == 0 || a.is_zero() {
        return Ok(0.0);
    }
    let adj = a.adjoint();
    // Deterministic start vector with no special alignment.
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + (i as f64 * 0.618_033_988_749_895).fract(), 0.25))
        .collect();
    normalize(&mut x);
    let mut lambda = 0.0f64;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let y = adj.mat_vec(&a.mat_vec(&x)?)?;
        let next = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if next == 0.0 {
            return Ok(0.0);
        }
        residual = (next - lambda).abs() / next;
        lambda = next;
        x = y;
        normalize(&mut x);
        if residual < tol {
            return Ok(lambda.sqrt());
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
    })
}

fn normalize(x: &mut [Complex64]) {
    let n = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|z| *z /= n);
    }
}

/// LU factors with partial pivoting, stored in place.
#[derive(Clone, Debug)]
pub struct LuFactors {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        let n = a.require_square()?;
        let threshold = SINGULAR_PIVOT_REL * a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (pivot_row, pivot) =
                (col..n)
                    .map(|r| (r, lu[(r, col)].norm()))
                    .fold(
                        (col, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pivot <= threshold || pivot == 0.0 {
                return Err(Error::Singular {
                    column: col,
                    pivot,
                    threshold,
                });
            }
            if pivot_row != col {
                perm.swap(pivot_row, col);
                let e = lu.entries_mut();
                for j in 0..n {
                    e.swap(pivot_row * n + j, col * n + j);
                }
            }
            let inv_pivot = ONE / lu[(col, col)];
            for r in col + 1..n {
                let factor = lu[(r, col)] * inv_pivot;
                if factor == ZERO {
                    continue;
                }
                lu[(r, col)] = factor;
                for j in col + 1..n {
                    let u = lu[(col, j)];
                    lu[(r, j)] -= factor * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.perm.len();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.perm.len();
        let mut inv = ComplexMatrix::zeros(n, n);
        let mut e = vec![ZERO; n];
        for col in 0..n {
            e.fill(ZERO);
            e[col] = ONE;
            for (row, v) in self.solve(&e).into_iter().enumerate() {
                inv[(row, col)] = v;
            }
        }
        inv
    }
}

/// Result of [`invert`] together with its residual diagnostics.
#[derive(Clone, Debug)]
pub struct Inverse {
    pub matrix: ComplexMatrix,
    /// `||A B - I||` in the row-sum norm.
    pub residual: f64,
    /// Set when the residual exceeds `1e-8` times the row-sum condition estimate.
    pub ill_conditioned: bool,
}

pub fn invert(a: &ComplexMatrix) -> Result<Inverse> {
    let n = a.require_square()?;
    let b = LuFactors::new(a)?.inverse();
    let mut r = a * &b;
    for i in 0..n {
        r[(i, i)] -= ONE;
    }
    let residual = row_sum_norm(&r);
    let cond = row_sum_norm(a) * row_sum_norm(&b);
    let ill_conditioned = !(residual <= RESIDUAL_REL * cond.max(1.0)) || !b.all_finite();
    if ill_conditioned {
        log::warn!("inverse residual {residual:e} exceeds budget for condition estimate {cond:e}");
    }
    Ok(Inverse {
        matrix: b,
        residual,
        ill_conditioned,
    })
}

pub fn direct_inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    invert(a).map(|inv| inv.matrix)
}

/// `||A|| ||A^{-1}||` in the given mode.
pub fn condition_number(a: &ComplexMatrix, mode: NormMode) -> Result<f64> {
    let b = direct_inverse(a)?;
    Ok(operator_norm(a, mode)? * operator_norm(&b, mode)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn norms_of_small_matrices() {
        let two = ComplexMatrix::identity(3).scale(c(2.0));
        for mode in [NormMode::Spectral, NormMode::RowSum, NormMode::ColSum] {
            assert_eq!(operator_norm(&two, mode).unwrap(), 2.0);
        }
        let d = ComplexMatrix::from_diagonal(&[c(1.0), c(-3.0), c(2.0)]);
        assert_eq!(operator_norm(&d, NormMode::Spectral).unwrap(), 3.0);
    }

    #[test]
    fn spectral_norm_of_dense_matrix() {
        // [[1, 2], [3, 4]] has sigma_max = sqrt(15 + sqrt(221))
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let expected = (15.0 + 221f64.sqrt()).sqrt();
        let got = operator_norm(&a, NormMode::Spectral).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected);
        let p = power_spectral_norm(&a, POWER_TOL, POWER_MAX_ITER).unwrap();
        assert!((p - expected).abs() <= 1e-10 * expected);
        assert_eq!(operator_norm(&a, NormMode::RowSum).unwrap(), 7.0);
        assert_eq!(operator_norm(&a, NormMode::ColSum).unwrap(), 6.0);
    }

    #[test]
    fn power_iteration_reports_nonconvergence() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.999_999]]).unwrap();
        let a = &a * &ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(
            power_spectral_norm(&a, 1e-300, 3),
            Err(Error::NonConvergence { iterations: 3, .. })
        ));
    }

    #[test]
    fn inverses() {
        let two = ComplexMatrix::identity(4).scale(c(2.0));
        assert_eq!(
            direct_inverse(&two).unwrap(),
            ComplexMatrix::identity(4).scale(c(0.5))
        );
        let a = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]).unwrap();
        let b = direct_inverse(&a).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[1.0, -1.0], &[-1.0, 2.0]]).unwrap();
        assert!(b.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(direct_inverse(&a), Err(Error::Singular { .. })));
        assert!(matches!(
            condition_number(&ComplexMatrix::zeros(3, 3), NormMode::Spectral),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn condition_numbers() {
        let two = ComplexMatrix::identity(4).scale(c(2.0));
        assert_eq!(condition_number(&two, NormMode::Spectral).unwrap(), 1.0);
        let d = ComplexMatrix::from_diagonal(&[c(1.0), c(10.0)]);
        let k = condition_number(&d, NormMode::Spectral).unwrap();
        assert!((k - 10.0).abs() < 1e-14);
    }
}
