//! CR jet machinery: signatures, algebraic models, holomorphic map jets,
//! linear normalization, pullback, and the graph-solving iteration.

mod map;
mod model;
mod pullback;

pub use map::{identity_map, GraphGerm, MapJet};
pub use model::AlgebraicModel;
pub use pullback::{
    flat_model, graph_iteration, heisenberg_model, is_jet_preimage, jet_pullback,
    normalize_linear_part, pullback_defining_series, PullbackResult,
};

use crate::error::JetError;
use crate::series::MAX_ORDER;

/// Dimensional data of a pullback problem: source CR dimension m and
/// codimension d (n = m + d), target CR dimension m′ (n′ = m′ + d, same
/// codimension), model degree bound ν, and truncation order k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrSignature {
    m: usize,
    d: usize,
    m_prime: usize,
    nu: u32,
    k: u32,
}

impl CrSignature {
    pub fn new(m: usize, d: usize, m_prime: usize, nu: u32, k: u32) -> Result<Self, JetError> {
        if m < 1 {
            return Err(JetError::InvalidSignature("m must be at least 1".into()));
        }
        if d < 1 {
            return Err(JetError::InvalidSignature("d must be at least 1".into()));
        }
        if m_prime < m {
            return Err(JetError::InvalidSignature(
                "target CR dimension m' must be at least m".into(),
            ));
        }
        if nu < 2 {
            return Err(JetError::InvalidSignature("nu must be at least 2".into()));
        }
        if k < 2 {
            return Err(JetError::InvalidSignature("k must be at least 2".into()));
        }
        if k > MAX_ORDER || nu > MAX_ORDER {
            return Err(JetError::InvalidSignature(format!(
                "orders are capped at {MAX_ORDER}"
            )));
        }
        Ok(CrSignature { m, d, m_prime, nu, k })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m_prime(&self) -> usize {
        self.m_prime
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Source complex dimension n = m + d.
    pub fn n(&self) -> usize {
        self.m + self.d
    }

    /// Target complex dimension n′ = m′ + d.
    pub fn n_prime(&self) -> usize {
        self.m_prime + self.d
    }

    /// Same signature at a different truncation order.
    pub fn at_order(&self, k: u32) -> Result<Self, JetError> {
        Self::new(self.m, self.d, self.m_prime, self.nu, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_validation() {
        assert!(CrSignature::new(1, 1, 1, 2, 2).is_ok());
        assert!(CrSignature::new(0, 1, 1, 2, 4).is_err());
        assert!(CrSignature::new(1, 0, 1, 2, 4).is_err());
        assert!(CrSignature::new(2, 1, 1, 2, 4).is_err());
        assert!(CrSignature::new(1, 1, 1, 1, 4).is_err());
        assert!(CrSignature::new(1, 1, 1, 2, 1).is_err());
        let s = CrSignature::new(1, 2, 3, 4, 5).unwrap();
        assert_eq!((s.n(), s.n_prime()), (3, 5));
    }
}
