//! Memory-decay analysis of matrix operators.
//!
//! The crate measures how fast the diagonals of a square complex matrix fade
//! away from the main diagonal, sorts the matrix into decay classes through
//! triangle-window norms, and issues a-priori decay certificates for the
//! inverse that can be checked against a direct inversion.
//!
//! Diagonal offsets are `k = row - col`: `k > 0` lies below the main
//! diagonal. On a circulant topology offsets wrap modulo the size `M` and are
//! represented in `(-ceil(M/2), floor(M/2)]`.
//!
//! ```
//! use memdecay_core::{wiener_norm, ComplexMatrix, NormMode, Topology, ONE};
//!
//! let a = ComplexMatrix::identity(4).scale(ONE * 2.0);
//! let w = wiener_norm(&a, &Topology::linear(4), 1, NormMode::Spectral).unwrap();
//! assert_eq!(w, 10.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod class_norms;
pub mod decay_bounds;
pub mod error;
pub mod generators;
pub mod inverse_engine;
pub mod linalg;
pub mod matrix;
pub mod mtx;
pub mod operator;
pub mod topology;
pub mod windows;

pub use num_complex::Complex64;

pub use class_norms::{
    beurling_norm, causal_split, class_report, classify_decay, exp_decay_fit, integral_wiener_norm,
    piece_norms, sobolev_wiener_norm, vector_wiener_norm, wiener_norm, windowed_piece, ClassReport,
    Classification, DecayFit, Side, VectorNorm,
};
pub use decay_bounds::{
    banded_inverse_bound, banded_inverse_certificate, psi_a, verify_banded, verify_wiener,
    wiener_constants, wiener_inverse_certificate, BandedInverseCertificate, BoundEntry,
    BoundParams, InverseContext, Verification, WienerInverseCertificate,
};
pub use error::{Error, Result};
pub use generators::{
    generate, symbol_inverse_coefficients, DeterministicRng, GeneratorKind, GeneratorParams,
    GeneratorSpec, SymbolTerm,
};
pub use inverse_engine::{
    band_split, neumann_inverse, spectral_radius_sequence, NeumannOptions, NeumannResult,
    NeumannTrace, RadiusNorm, ScaleChoice,
};
pub use linalg::{condition_number, direct_inverse, invert, operator_norm, Inverse, NormMode};
pub use matrix::{ComplexMatrix, ONE, ZERO};
pub use mtx::{
    read_comments, read_matrix_file, read_matrix_market, write_matrix_file, write_matrix_market,
    write_matrix_market_with_comments,
};
pub use operator::{
    apply_multiplier, beurling_spectrum, commutator_with_position, diagonal_profile,
    extract_diagonal, position_derivative, DiagonalProfile, MultiplierMap,
};
pub use topology::{Topology, TopologyKind};
pub use windows::{
    exp_multiplier, hat_value, window_multiplier, EtaParams, ExpShape, TriangleWindow,
};
