use std::collections::BTreeMap;
use std::io::Write;

use memdecay_core::decay_bounds::{Verification, WienerMeasurement};
use memdecay_core::{
    BandedInverseCertificate, Classification, DecayFit, TopologyKind, WienerInverseCertificate,
};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixMeta {
    pub path: String,
    pub size: usize,
    pub topology: TopologyKind,
    pub bandwidth: usize,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub operator: f64,
    pub wiener_1_1: f64,
    #[serde(rename = "wiener_1_N")]
    pub wiener_1_n: BTreeMap<usize, f64>,
    /// Only computed by `analyze`.
    pub integral_wiener: Option<f64>,
    pub beurling: f64,
    pub sobolev: BTreeMap<usize, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub k: i64,
    pub d_k: f64,
    pub piece_norm: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    pub banded: Option<BandedInverseCertificate>,
    /// Why the banded certificate is absent.
    pub banded_omitted: Option<String>,
    pub wiener: Option<WienerInverseCertificate>,
    pub wiener_omitted: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checked: usize,
    pub max_relative_violation: f64,
    pub passed: bool,
    pub banded: Option<Verification>,
    pub wiener: Option<Verification>,
    pub wiener_measured: Option<WienerMeasurement>,
    /// `||phi_{N,n} B||` at the certificate scale, by `n`.
    pub inverse_piece_norms: BTreeMap<i64, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub matrix_meta: MatrixMeta,
    pub norms: Norms,
    pub profile: Vec<ProfileEntry>,
    pub fit: Option<DecayFit>,
    pub classification: Classification,
    pub certificates: Option<Certificates>,
    pub verification: Option<VerificationReport>,
    pub warnings: Vec<String>,
    pub tool_version: String,
    pub wall_time_ms: u64,
}

/// One CSV row per profile entry.
pub fn write_profile_csv<W: Write>(
    mut w: W,
    profile: &[ProfileEntry],
    bound: impl Fn(i64) -> Option<f64>,
    measured: impl Fn(i64) -> Option<f64>,
) -> std::io::Result<()> {
    let cell = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    writeln!(
        w,
        "k,d_k,piece_norm_N1,certified_bound,measured_inverse_piece_norm"
    )?;
    for e in profile {
        writeln!(
            w,
            "{},{:e},{:e},{},{}",
            e.k,
            e.d_k,
            e.piece_norm,
            cell(bound(e.k)),
            cell(measured(e.k))
        )?;
    }
    w.flush()
}
