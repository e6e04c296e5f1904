//! Seeded test matrices and the FFT symbol inverse.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ONE, ZERO};
use crate::topology::Topology;

/// Grid samples of the symbol at or below this modulus are treated as zeros.
pub const SYMBOL_ZERO_TOL: f64 = 1e-12;

/// splitmix64 stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterministicRng {
    state: u64,
}

impl DeterministicRng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Real and imaginary parts drawn in that order from `[lo, hi)`.
    pub fn complex(&mut self, lo: f64, hi: f64) -> Complex64 {
        let re = self.uniform(lo, hi);
        let im = self.uniform(lo, hi);
        Complex64::new(re, im)
    }

    pub fn phase(&mut self) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * self.next_f64())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Identity,
    Diagonal,
    BandedRandom,
    CirculantSymbol,
    ToeplitzSymbol,
    ShiftCausal,
    GeometricProfile,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolTerm {
    pub offset: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl SymbolTerm {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Kind-specific parameters; each kind reads only the fields it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorParams {
    /// Band half-width `w` (banded_random).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<usize>,
    /// Multiple of the identity added to a banded_random matrix; defaults to `2w + 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dominance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<SymbolTerm>>,
    /// Shift weight `lambda` in `I - lambda S` (shift_causal).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Decay ratio of geometric_profile.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// geometric_profile builds `shift I + scale G`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    /// Explicit diagonal (diagonal); random in `[1, 2)` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: GeneratorParams,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, size: usize) -> Self {
        Self {
            kind,
            size,
            seed: 0,
            params: GeneratorParams::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_params(mut self, params: GeneratorParams) -> Self {
        self.params = params;
        self
    }

    pub fn topology(&self) -> Topology {
        match self.kind {
            GeneratorKind::CirculantSymbol | GeneratorKind::ShiftCausal => {
                Topology::circulant(self.size)
            }
            _ => Topology::linear(self.size),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidSpec(msg.into())
}

fn required<T: Copy>(v: Option<T>, name: &str, kind: GeneratorKind) -> Result<T> {
    v.ok_or_else(|| invalid(format!("{kind:?} needs parameter '{name}'")))
}

fn finite(v: f64, name: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("parameter '{name}' must be finite")))
    }
}

/// Coefficient table keyed by offset; offsets must be representable and unique.
pub fn symbol_map(terms: &[SymbolTerm], topo: &Topology) -> Result<BTreeMap<i64, Complex64>> {
    let mut map = BTreeMap::new();
    for t in terms {
        if !topo.contains_offset(t.offset) {
            let (lo, hi) = topo.offset_range();
            return Err(invalid(format!(
                "symbol offset {} outside [{lo}, {hi}]",
                t.offset
            )));
        }
        if !(t.re.is_finite() && t.im.is_finite()) {
            return Err(invalid(format!(
                "symbol coefficient at offset {} is not finite",
                t.offset
            )));
        }
        if map.insert(t.offset, t.value()).is_some() {
            return Err(invalid(format!("duplicate symbol offset {}", t.offset)));
        }
    }
    Ok(map)
}

/// Builds the matrix described by `spec`; identical specs give identical matrices.
pub fn generate(spec: &GeneratorSpec) -> Result<(ComplexMatrix, Topology)> {
    let m = spec.size;
    if m < 2 {
        return Err(invalid(format!("size must be at least 2, got {m}")));
    }
    let p = &spec.params;
    let topo = spec.topology();
    let mut rng = DeterministicRng::new(spec.seed);
    let a = match spec.kind {
        GeneratorKind::Identity => ComplexMatrix::identity(m),
        GeneratorKind::Diagonal => {
            let values: Vec<Complex64> = match &p.values {
                Some(v) if v.len() == m => v
                    .iter()
                    .map(|&x| finite(x, "values").map(|x| ONE * x))
                    .collect::<Result<_>>()?,
                Some(v) => {
                    return Err(invalid(format!(
                        "diagonal needs {m} values, got {}",
                        v.len()
                    )))
                }
                None => (0..m).map(|_| ONE * rng.uniform(1.0, 2.0)).collect(),
            };
            ComplexMatrix::from_diagonal(&values)
        }
        GeneratorKind::BandedRandom => {
            let w = required(p.bandwidth, "bandwidth", spec.kind)?;
            let dominance = finite(p.dominance.unwrap_or((2 * w + 1) as f64), "dominance")?;
            ComplexMatrix::from_fn(m, m, |i, j| {
                let mut v = if i.abs_diff(j) <= w {
                    rng.complex(-1.0, 1.0)
                } else {
                    ZERO
                };
                if i == j {
                    v += dominance;
                }
                v
            })
        }
        GeneratorKind::CirculantSymbol | GeneratorKind::ToeplitzSymbol => {
            let terms = p.coefficients.as_deref().ok_or_else(|| {
                invalid(format!("{:?} needs parameter 'coefficients'", spec.kind))
            })?;
            let coeffs = symbol_map(terms, &topo)?;
            ComplexMatrix::from_fn(m, m, |i, j| {
                coeffs.get(&topo.offset(i, j)).copied().unwrap_or(ZERO)
            })
        }
        GeneratorKind::ShiftCausal => {
            let lambda = finite(required(p.lambda, "lambda", spec.kind)?, "lambda")?;
            ComplexMatrix::from_fn(m, m, |i, j| match topo.offset(i, j) {
                0 => ONE,
                1 => -ONE * lambda,
                _ => ZERO,
            })
        }
        GeneratorKind::GeometricProfile => {
            let gamma = finite(required(p.gamma, "gamma", spec.kind)?, "gamma")?;
            if gamma < 0.0 {
                return Err(invalid("gamma must be nonnegative"));
            }
            let scale = finite(p.scale.unwrap_or(1.0), "scale")?;
            let shift = finite(p.shift.unwrap_or(0.0), "shift")?;
            ComplexMatrix::from_fn(m, m, |i, j| {
                let mut v = rng.phase() * (scale * gamma.powi(i.abs_diff(j) as i32));
                if i == j {
                    v += shift;
                }
                v
            })
        }
    };
    Ok((a, topo))
}

/// Fourier coefficients of `1/f` for `f(theta) = sum_k c_k e^{i k theta}`,
/// computed on the `M`-point grid. The result holds every representable
/// circulant offset and equals the diagonals of the inverse circulant.
pub fn symbol_inverse_coefficients(
    coeffs: &BTreeMap<i64, Complex64>,
    m: usize,
) -> Result<BTreeMap<i64, Complex64>> {
    if m < 2 {
        return Err(invalid(format!("grid size must be at least 2, got {m}")));
    }
    let topo = Topology::circulant(m);
    let mut buf = vec![ZERO; m];
    for (&k, &c) in coeffs {
        topo.check_offset(k)?;
        buf[k.rem_euclid(m as i64) as usize] += c;
    }
    let mut planner = FftPlanner::<f64>::new();
    // f(theta_j) = sum_k c_k e^{+2 pi i k j / M}
    planner.plan_fft_inverse(m).process(&mut buf);
    for (j, v) in buf.iter_mut().enumerate() {
        let magnitude = v.norm();
        if !(magnitude > SYMBOL_ZERO_TOL) {
            return Err(Error::SymbolVanishes {
                index: j,
                magnitude,
            });
        }
        *v = v.inv();
    }
    planner.plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    Ok(topo
        .offsets()
        .map(|k| (k, buf[k.rem_euclid(m as i64) as usize] * scale))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::diagonal_profile;

    #[test]
    fn splitmix_reference_values() {
        // first outputs of splitmix64 seeded with 0
        let mut rng = DeterministicRng::new(0);
        assert_eq!(rng.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(rng.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(rng.next_u64(), 0x06C4_5D18_8009_454F);
        let mut a = DeterministicRng::new(42);
        let mut b = DeterministicRng::new(42);
        for _ in 0..100 {
            let u = a.next_f64();
            assert!((0.0..1.0).contains(&u));
            assert_eq!(u.to_bits(), b.next_f64().to_bits());
        }
    }

    #[test]
    fn identity_spec() {
        let (a, t) = generate(&GeneratorSpec::new(GeneratorKind::Identity, 4)).unwrap();
        assert_eq!(a, ComplexMatrix::identity(4));
        assert!(!t.is_circulant());
        assert!(generate(&GeneratorSpec::new(GeneratorKind::Identity, 1)).is_err());
    }

    #[test]
    fn shift_causal_support() {
        let spec = GeneratorSpec::new(GeneratorKind::ShiftCausal, 8).with_params(GeneratorParams {
            lambda: Some(2.0),
            ..Default::default()
        });
        let (a, t) = generate(&spec).unwrap();
        assert!(t.is_circulant());
        let p = diagonal_profile(&a, &t).unwrap();
        assert_eq!(p.values.keys().copied().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(a[(0, 7)], -ONE * 2.0);
        assert!(generate(&GeneratorSpec::new(GeneratorKind::ShiftCausal, 8)).is_err());
    }

    #[test]
    fn banded_random_is_reproducible_and_banded() {
        let spec = GeneratorSpec::new(GeneratorKind::BandedRandom, 20)
            .with_seed(7)
            .with_params(GeneratorParams {
                bandwidth: Some(2),
                ..Default::default()
            });
        let (a, t) = generate(&spec).unwrap();
        let (b, _) = generate(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(diagonal_profile(&a, &t).unwrap().bandwidth(), 2);
        let (c, _) = generate(&spec.clone().with_seed(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn symbol_offsets_validated() {
        let spec =
            GeneratorSpec::new(GeneratorKind::CirculantSymbol, 8).with_params(GeneratorParams {
                coefficients: Some(vec![SymbolTerm {
                    offset: 5,
                    re: 1.0,
                    im: 0.0,
                }]),
                ..Default::default()
            });
        assert!(matches!(generate(&spec), Err(Error::InvalidSpec(_))));
        let dup =
            GeneratorSpec::new(GeneratorKind::CirculantSymbol, 8).with_params(GeneratorParams {
                coefficients: Some(vec![
                    SymbolTerm {
                        offset: 1,
                        re: 1.0,
                        im: 0.0
                    };
                    2
                ]),
                ..Default::default()
            });
        assert!(generate(&dup).is_err());
    }

    #[test]
    fn constant_symbol_inverse() {
        let c = BTreeMap::from([(0, ONE)]);
        let inv = symbol_inverse_coefficients(&c, 16).unwrap();
        for (k, v) in inv {
            let expected = if k == 0 { 1.0 } else { 0.0 };
            assert!((v - ONE * expected).norm() < 1e-15);
        }
    }

    #[test]
    fn vanishing_symbol_is_reported() {
        // 1 + cos(theta) vanishes at theta = pi, a grid point for even M
        let c = BTreeMap::from([(0, ONE), (1, ONE * 0.5), (-1, ONE * 0.5)]);
        assert!(matches!(
            symbol_inverse_coefficients(&c, 16),
            Err(Error::SymbolVanishes { index: 8, .. })
        ));
    }

    #[test]
    fn json_round_trip_rejects_unknown_fields() {
        let spec = GeneratorSpec::new(GeneratorKind::GeometricProfile, 16)
            .with_seed(3)
            .with_params(GeneratorParams {
                gamma: Some(0.5),
                scale: Some(0.25),
                shift: Some(1.0),
                ..Default::default()
            });
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<GeneratorSpec>(&text).unwrap(), spec);
        assert!(serde_json::from_str::<GeneratorSpec>(
            r#"{"kind":"identity","size":4,"colour":1}"#
        )
        .is_err());
        assert!(serde_json::from_str::<GeneratorSpec>(
            r#"{"kind":"identity","size":4,"params":{"gama":1}}"#
        )
        .is_err());
    }
}
