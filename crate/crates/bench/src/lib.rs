//! Fixed benchmark inputs shared by the criterion benches.

use std::collections::BTreeMap;

use memdecay_core::{
    generate, Complex64, ComplexMatrix, GeneratorKind, GeneratorParams, GeneratorSpec, Topology,
};

pub const SIZES: [usize; 3] = [64, 128, 256];

/// Diagonally dominant random band matrix of half-bandwidth `w`.
pub fn banded(size: usize, w: usize) -> (ComplexMatrix, Topology) {
    let spec = GeneratorSpec::new(GeneratorKind::BandedRandom, size)
        .with_seed(7)
        .with_params(GeneratorParams {
            bandwidth: Some(w),
            ..GeneratorParams::default()
        });
    generate(&spec).expect("banded fixture")
}

/// Symbol coefficients of `4 + 2 cos(theta)`.
pub fn symbol() -> BTreeMap<i64, Complex64> {
    BTreeMap::from([
        (-1, Complex64::new(1.0, 0.0)),
        (0, Complex64::new(4.0, 0.0)),
        (1, Complex64::new(1.0, 0.0)),
    ])
}
