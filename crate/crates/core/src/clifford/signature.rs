use serde::{Deserialize, Serialize};

use super::CliffordError;

/// Largest total dimension accepted; dense storage holds `2^d` complex values.
pub const MAX_DIM: usize = 12;

/// Split `Cl_{n+m}` signature: generators `e_1..e_n` are tangent, `e_{n+1}..e_{n+m}` normal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlgebraSignature {
    n: usize,
    m: usize,
}

impl AlgebraSignature {
    pub fn new(n: usize, m: usize) -> Result<Self, CliffordError> {
        let d = n + m;
        if n == 0 || d > MAX_DIM {
            return Err(CliffordError::InvalidSignature { n, m });
        }
        Ok(Self { n, m })
    }

    /// Tangent rank.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Normal rank.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Total number of generators.
    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    /// Number of basis blades, `2^d`.
    pub fn blade_count(&self) -> usize {
        1 << self.dim()
    }

    /// Zero-based generator index of the `a`-th normal direction.
    pub fn normal_generator(&self, a: usize) -> usize {
        debug_assert!(a < self.m);
        self.n + a
    }
}

impl std::fmt::Display for AlgebraSignature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Cl({}+{})", self.n, self.m)
    }
}
