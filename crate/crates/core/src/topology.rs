use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    /// Index set `0..M` on the integer line; offsets `m - n` in `[-(M-1), M-1]`.
    Linear,
    /// Index set `Z/MZ`; offsets are taken modulo `M`.
    Circulant,
}

impl std::fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TopologyKind::Linear => "linear",
            TopologyKind::Circulant => "circulant",
        })
    }
}

impl std::str::FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(TopologyKind::Linear),
            "circulant" => Ok(TopologyKind::Circulant),
            other => Err(Error::InvalidArgument(format!(
                "unknown topology `{other}`"
            ))),
        }
    }
}

/// How diagonal offsets of an `M x M` matrix are labelled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Topology {
    pub kind: TopologyKind,
    pub size: usize,
}

impl Topology {
    pub fn linear(size: usize) -> Self {
        Self {
            kind: TopologyKind::Linear,
            size,
        }
    }

    pub fn circulant(size: usize) -> Self {
        Self {
            kind: TopologyKind::Circulant,
            size,
        }
    }

    pub fn is_circulant(&self) -> bool {
        self.kind == TopologyKind::Circulant
    }

    /// Smallest and largest offset representative.
    ///
    /// Circulant representatives live in `(-ceil(M/2), floor(M/2)]`.
    pub fn offset_range(&self) -> (i64, i64) {
        let m = self.size as i64;
        match self.kind {
            TopologyKind::Linear => (-(m - 1), m - 1),
            TopologyKind::Circulant => (-((m + 1) / 2) + 1, m / 2),
        }
    }

    pub fn offsets(&self) -> impl Iterator<Item = i64> {
        let (lo, hi) = self.offset_range();
        lo..=hi
    }

    pub fn contains_offset(&self, k: i64) -> bool {
        let (lo, hi) = self.offset_range();
        (lo..=hi).contains(&k)
    }

    pub fn check_offset(&self, k: i64) -> Result<()> {
        let (min, max) = self.offset_range();
        if self.contains_offset(k) {
            Ok(())
        } else {
            Err(Error::OffsetOutOfRange {
                offset: k,
                min,
                max,
            })
        }
    }

    /// Diagonal label of entry `(row, col)`.
    #[inline]
    pub fn offset(&self, row: usize, col: usize) -> i64 {
        let k = row as i64 - col as i64;
        match self.kind {
            TopologyKind::Linear => k,
            TopologyKind::Circulant => {
                let m = self.size as i64;
                let r = k.rem_euclid(m);
                if r > m / 2 {
                    r - m
                } else {
                    r
                }
            }
        }
    }

    /// Verifies that `a` is square with the topology's size.
    pub fn check_matrix(&self, a: &ComplexMatrix) -> Result<usize> {
        let m = a.require_square()?;
        if m != self.size {
            return Err(Error::shape(
                format!("{0}x{0} for {1} topology", self.size, self.kind),
                format!("{m}x{m}"),
            ));
        }
        if m == 0 {
            return Err(Error::shape("non-empty matrix", "0x0"));
        }
        Ok(m)
    }

    /// Every window of scale `scale` must fit inside one period.
    pub fn check_window(&self, scale: usize) -> Result<()> {
        if self.is_circulant() && 2 * scale > self.size {
            return Err(Error::WindowTooWide {
                scale,
                size: self.size,
            });
        }
        Ok(())
    }
}
