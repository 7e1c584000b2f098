//! Real algebraic CR models Im w′ + ρ̃(z′, z̄′, w′, w̄′) = 0.
//!
//! Only ρ̃ is stored; the Im w′ part is implicit in the normal form. The
//! defining polynomials are conjugation-symmetric (real-valued), free of
//! constant and linear terms, and of total degree at most ν.

use crate::coeff::CoeffMode;
use crate::error::JetError;
use crate::jets::CrSignature;
use crate::series::SeriesVector;
use crate::space::{same_space, VariableSpace};

/// A d-tuple of defining polynomials ρ̃ over the target doubled space.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicModel {
    signature: CrSignature,
    rho_tilde: SeriesVector,
}

impl AlgebraicModel {
    /// Validates reality, the absence of constant/linear terms, and the
    /// degree bound, then takes ownership.
    pub fn new(signature: CrSignature, rho_tilde: SeriesVector) -> Result<Self, JetError> {
        let expected = VariableSpace::doubled(signature.m_prime(), signature.d());
        if !same_space(rho_tilde.space(), &expected) {
            return Err(JetError::Series(crate::error::SeriesError::SpaceMismatch));
        }
        if rho_tilde.len() != signature.d() {
            return Err(JetError::InvalidSignature(format!(
                "model has {} components, signature demands d = {}",
                rho_tilde.len(),
                signature.d()
            )));
        }
        if rho_tilde.mode() != CoeffMode::Exact {
            return Err(JetError::ExactModeRequired);
        }
        if rho_tilde.order() < signature.nu() {
            return Err(JetError::ModelOrderBelowDegreeBound {
                order: rho_tilde.order(),
                nu: signature.nu(),
            });
        }
        let model = AlgebraicModel { signature, rho_tilde };
        model.validate()?;
        Ok(model)
    }

    /// Re-check the model invariants: conjugation symmetry of every
    /// component, no terms below degree 2, no terms above degree ν.
    pub fn validate(&self) -> Result<(), JetError> {
        for comp in self.rho_tilde.iter() {
            if comp.conjugate()? != *comp {
                return Err(JetError::NonRealModel);
            }
            if let Some(min) = comp.min_degree() {
                if min < 2 {
                    return Err(JetError::HasLowOrderTerms);
                }
            }
            if let Some(max) = comp.max_degree() {
                if max > self.signature.nu() {
                    return Err(JetError::DegreeExceeded {
                        found: max,
                        max: self.signature.nu(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn signature(&self) -> &CrSignature {
        &self.signature
    }

    pub fn rho_tilde(&self) -> &SeriesVector {
        &self.rho_tilde
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coefficient as C;
    use crate::series::{MultiIndex, TruncatedSeries};

    fn sig() -> CrSignature {
        CrSignature::new(1, 1, 1, 2, 4).unwrap()
    }

    fn model_space() -> std::sync::Arc<VariableSpace> {
        VariableSpace::doubled(1, 1)
    }

    #[test]
    fn heisenberg_model_is_valid() {
        // rho_tilde = -z ~z
        let s = TruncatedSeries::monomial(
            &model_space(),
            &[1, 1, 0, 0],
            C::from_integer(-1),
            2,
        )
        .unwrap();
        let m = AlgebraicModel::new(sig(), SeriesVector::new(vec![s]).unwrap());
        assert!(m.is_ok());
    }

    #[test]
    fn non_real_models_are_rejected() {
        // i z^2 is not conjugation-symmetric.
        let s = TruncatedSeries::monomial(&model_space(), &[2, 0, 0, 0], C::i(), 2).unwrap();
        let err = AlgebraicModel::new(sig(), SeriesVector::new(vec![s]).unwrap());
        assert!(matches!(err, Err(JetError::NonRealModel)));
    }

    #[test]
    fn duplicate_terms_merge_before_validation() {
        // z ~z + ~z z arrives as a single merged term with coefficient 2.
        let sp = model_space();
        let s = TruncatedSeries::from_terms(
            &sp,
            2,
            CoeffMode::Exact,
            vec![
                (MultiIndex::new(&[1, 1, 0, 0]).unwrap(), C::from_integer(1)),
                (MultiIndex::new(&[1, 1, 0, 0]).unwrap(), C::from_integer(1)),
            ],
        )
        .unwrap();
        assert_eq!(s.coefficient_at(&[1, 1, 0, 0]), C::from_integer(2));
        assert!(AlgebraicModel::new(sig(), SeriesVector::new(vec![s]).unwrap()).is_ok());
    }

    #[test]
    fn low_order_and_high_degree_terms_are_rejected() {
        let sp = model_space();
        let linear = TruncatedSeries::from_terms(
            &sp,
            2,
            CoeffMode::Exact,
            vec![
                (MultiIndex::new(&[1, 0, 0, 0]).unwrap(), C::from_integer(1)),
                (MultiIndex::new(&[0, 1, 0, 0]).unwrap(), C::from_integer(1)),
            ],
        )
        .unwrap();
        assert!(matches!(
            AlgebraicModel::new(sig(), SeriesVector::new(vec![linear]).unwrap()),
            Err(JetError::HasLowOrderTerms)
        ));

        let cubic = TruncatedSeries::from_terms(
            &sp,
            3,
            CoeffMode::Exact,
            vec![
                (MultiIndex::new(&[2, 1, 0, 0]).unwrap(), C::from_integer(1)),
                (MultiIndex::new(&[1, 2, 0, 0]).unwrap(), C::from_integer(1)),
            ],
        )
        .unwrap();
        assert!(matches!(
            AlgebraicModel::new(sig(), SeriesVector::new(vec![cubic]).unwrap()),
            Err(JetError::DegreeExceeded { found: 3, max: 2 })
        ));
    }
}
