//! JSON interchange format for jet data, schema version "1".
//!
//! A document carries one signature, the map jet (f components first, then
//! g), the model, and optionally a graph germ. Truncation orders are not
//! stored: the map and germ live at order k, the model at order ν, all
//! recoverable from the signature. Coefficients are serialized as integer
//! numerator/denominator pairs, never as decimal strings, so exact mode
//! survives the round trip. Target variables drop their primes in the file;
//! the `space` tag on each block says which space the exponents index.

use std::collections::BTreeSet;
use std::str::FromStr;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;
use serde::{Deserialize, Serialize};

use crate::coeff::{CoeffMode, Coefficient};
use crate::error::DocumentError;
use crate::jets::{AlgebraicModel, CrSignature, GraphGerm, MapJet};
use crate::series::{MultiIndex, SeriesVector, TruncatedSeries};
use crate::space::VariableSpace;

pub const SCHEMA_VERSION: &str = "1";

/// Space tags: source jet variables (z1..zm, w1..wd), doubled target
/// variables (z1..zm', ~z1.., w1..wd, ~w1..), graph coordinates (x, y, u).
const TAG_SOURCE: &str = "source";
const TAG_TARGET_DOUBLED: &str = "target_doubled";
const TAG_GRAPH: &str = "graph";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetDocument {
    pub schema_version: String,
    pub signature: SignatureBlock,
    pub map: SeriesBlock,
    pub model: SeriesBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub germ: Option<SeriesBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureBlock {
    pub m: usize,
    pub d: usize,
    pub m_prime: usize,
    pub nu: u32,
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesBlock {
    pub space: String,
    pub components: Vec<Vec<TermDoc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub exponents: Vec<u32>,
    pub coeff: CoeffDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffDoc {
    pub num_re: serde_json::Number,
    pub den_re: serde_json::Number,
    pub num_im: serde_json::Number,
    pub den_im: serde_json::Number,
}

fn number_to_bigint(n: &serde_json::Number, what: &str) -> Result<BigInt, DocumentError> {
    BigInt::from_str(&n.to_string()).map_err(|_| {
        DocumentError::Validation(format!("{what} must be an integer, got {n}"))
    })
}

fn bigint_to_number(x: &BigInt) -> serde_json::Number {
    x.to_string()
        .parse()
        .expect("integer text is a valid JSON number")
}

fn rational_from_parts(
    num: &serde_json::Number,
    den: &serde_json::Number,
    what: &str,
) -> Result<BigRational, DocumentError> {
    let n = number_to_bigint(num, what)?;
    let d = number_to_bigint(den, what)?;
    if d.is_zero() {
        return Err(DocumentError::Validation(format!(
            "{what} has a zero denominator"
        )));
    }
    Ok(BigRational::new(n, d))
}

impl CoeffDoc {
    fn from_coefficient(c: &Coefficient) -> Result<Self, DocumentError> {
        let (re, im) = match (c.exact_re(), c.exact_im()) {
            (Some(re), Some(im)) => (re, im),
            _ => {
                return Err(DocumentError::Validation(
                    "float coefficients cannot be serialized".into(),
                ))
            }
        };
        Ok(CoeffDoc {
            num_re: bigint_to_number(re.numer()),
            den_re: bigint_to_number(re.denom()),
            num_im: bigint_to_number(im.numer()),
            den_im: bigint_to_number(im.denom()),
        })
    }

    fn to_coefficient(&self) -> Result<Coefficient, DocumentError> {
        let re = rational_from_parts(&self.num_re, &self.den_re, "real part")?;
        let im = rational_from_parts(&self.num_im, &self.den_im, "imaginary part")?;
        Ok(Coefficient::from_rationals(re, im))
    }
}

fn vector_to_block(vec: &SeriesVector, tag: &str) -> Result<SeriesBlock, DocumentError> {
    let mut components = Vec::with_capacity(vec.len());
    for comp in vec.iter() {
        let mut terms = Vec::new();
        for (idx, c) in comp.terms() {
            terms.push(TermDoc {
                exponents: idx.exponents(),
                coeff: CoeffDoc::from_coefficient(c)?,
            });
        }
        components.push(terms);
    }
    Ok(SeriesBlock {
        space: tag.to_string(),
        components,
    })
}

fn block_to_vector(
    block: &SeriesBlock,
    tag: &str,
    space: &Arc<VariableSpace>,
    order: u32,
    expected_components: usize,
    label: &str,
) -> Result<SeriesVector, DocumentError> {
    if block.space != tag {
        return Err(DocumentError::Validation(format!(
            "{label} block has space tag `{}`, expected `{tag}`",
            block.space
        )));
    }
    if block.components.len() != expected_components {
        return Err(DocumentError::Validation(format!(
            "{label} block has {} components, signature demands {expected_components}",
            block.components.len()
        )));
    }
    let mut comps = Vec::with_capacity(expected_components);
    for (j, terms) in block.components.iter().enumerate() {
        let mut seen = BTreeSet::new();
        let mut pairs = Vec::with_capacity(terms.len());
        for term in terms {
            if term.exponents.len() != space.len() {
                return Err(DocumentError::Validation(format!(
                    "{label} component {} has an exponent vector of length {}, space has {} variables",
                    j + 1,
                    term.exponents.len(),
                    space.len()
                )));
            }
            let degree: u32 = term.exponents.iter().sum();
            if degree > order {
                return Err(DocumentError::Validation(format!(
                    "{label} component {} has a degree-{degree} term beyond order {order}",
                    j + 1
                )));
            }
            if !seen.insert(term.exponents.clone()) {
                return Err(DocumentError::Validation(format!(
                    "{label} component {} repeats an exponent vector",
                    j + 1
                )));
            }
            let c = term.coeff.to_coefficient()?;
            if c.is_zero() {
                return Err(DocumentError::Validation(format!(
                    "{label} component {} stores a zero coefficient",
                    j + 1
                )));
            }
            pairs.push((MultiIndex::new(&term.exponents)?, c));
        }
        comps.push(TruncatedSeries::from_terms(
            space,
            order,
            CoeffMode::Exact,
            pairs,
        )?);
    }
    Ok(SeriesVector::new(comps)?)
}

impl JetDocument {
    /// Serialize in-memory values. The model must sit at order ν, its
    /// canonical storage order, since the file does not record orders.
    pub fn from_values(
        map: &MapJet,
        model: &AlgebraicModel,
        germ: Option<&GraphGerm>,
    ) -> Result<Self, DocumentError> {
        let sig = *map.signature();
        if *model.signature() != sig || germ.is_some_and(|g| *g.signature() != sig) {
            return Err(DocumentError::Validation(
                "map, model, and germ must share one signature".into(),
            ));
        }
        if model.rho_tilde().order() != sig.nu() {
            return Err(DocumentError::Validation(format!(
                "model is stored at order {}, expected ν = {}",
                model.rho_tilde().order(),
                sig.nu()
            )));
        }
        let mut map_block = vector_to_block(map.f(), TAG_SOURCE)?;
        map_block
            .components
            .extend(vector_to_block(map.g(), TAG_SOURCE)?.components);
        Ok(JetDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            signature: SignatureBlock {
                m: sig.m(),
                d: sig.d(),
                m_prime: sig.m_prime(),
                nu: sig.nu(),
                k: sig.k(),
            },
            map: map_block,
            model: vector_to_block(model.rho_tilde(), TAG_TARGET_DOUBLED)?,
            germ: germ
                .map(|g| vector_to_block(g.r(), TAG_GRAPH))
                .transpose()?,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        let doc: JetDocument = serde_json::from_str(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(DocumentError::SchemaVersion {
                found: doc.schema_version,
            });
        }
        Ok(doc)
    }

    /// Canonical byte form: pretty-printed JSON plus a trailing newline.
    /// Parsing followed by this is the identity on canonical documents.
    pub fn to_json_string(&self) -> String {
        let mut s =
            serde_json::to_string_pretty(self).expect("document serialization is infallible");
        s.push('\n');
        s
    }

    pub fn signature(&self) -> Result<CrSignature, DocumentError> {
        let s = &self.signature;
        Ok(CrSignature::new(s.m, s.d, s.m_prime, s.nu, s.k)?)
    }

    /// The map jet: the first m' document components are f, the last d are g.
    pub fn map_jet(&self) -> Result<MapJet, DocumentError> {
        let sig = self.signature()?;
        let space = VariableSpace::holomorphic_jet(sig.m(), sig.d());
        let vec = block_to_vector(
            &self.map,
            TAG_SOURCE,
            &space,
            sig.k(),
            sig.m_prime() + sig.d(),
            "map",
        )?;
        let mut comps = vec.components().to_vec();
        let g = SeriesVector::new(comps.split_off(sig.m_prime()))?;
        let f = SeriesVector::new(comps)?;
        Ok(MapJet::new(sig, f, g)?)
    }

    pub fn model(&self) -> Result<AlgebraicModel, DocumentError> {
        let sig = self.signature()?;
        let space = VariableSpace::doubled(sig.m_prime(), sig.d());
        let vec = block_to_vector(
            &self.model,
            TAG_TARGET_DOUBLED,
            &space,
            sig.nu(),
            sig.d(),
            "model",
        )?;
        Ok(AlgebraicModel::new(sig, vec)?)
    }

    pub fn germ(&self) -> Result<Option<GraphGerm>, DocumentError> {
        let Some(block) = &self.germ else {
            return Ok(None);
        };
        let sig = self.signature()?;
        let space = VariableSpace::graph_coords(sig.m(), sig.d());
        let vec = block_to_vector(block, TAG_GRAPH, &space, sig.k(), sig.d(), "germ")?;
        Ok(Some(GraphGerm::new(sig, vec)?))
    }

    /// Full validation: every block realizes as a well-formed value.
    pub fn validate(&self) -> Result<(), DocumentError> {
        self.map_jet()?;
        self.model()?;
        self.germ()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{heisenberg_model, identity_map, jet_pullback};

    fn sig() -> CrSignature {
        CrSignature::new(1, 1, 1, 2, 4).unwrap()
    }

    fn heisenberg_document() -> JetDocument {
        let sig = sig();
        let map = identity_map(&sig).unwrap();
        let model = heisenberg_model(&sig).unwrap();
        let germ = jet_pullback(&map, &model).unwrap().germ;
        JetDocument::from_values(&map, &model, Some(&germ)).unwrap()
    }

    #[test]
    fn serialization_round_trips_through_text() {
        let doc = heisenberg_document();
        let text = doc.to_json_string();
        let back = JetDocument::from_json(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_json_string(), text);

        let map = back.map_jet().unwrap();
        let model = back.model().unwrap();
        let germ = back.germ().unwrap().unwrap();
        assert_eq!(
            JetDocument::from_values(&map, &model, Some(&germ)).unwrap(),
            doc
        );
        assert_eq!(germ.r().component(0).to_text(), "x1^2 + y1^2");
    }

    #[test]
    fn huge_numerators_survive_the_round_trip() {
        let sig = sig();
        let space = VariableSpace::holomorphic_jet(1, 1);
        let big = BigInt::from(1u64 << 62) * BigInt::from(1u64 << 62);
        let f = SeriesVector::new(vec![TruncatedSeries::from_terms(
            &space,
            4,
            CoeffMode::Exact,
            vec![
                (
                    MultiIndex::new(&[1, 0]).unwrap(),
                    Coefficient::from_integer(1),
                ),
                (
                    MultiIndex::new(&[2, 0]).unwrap(),
                    Coefficient::from_rationals(
                        BigRational::new(big.clone(), BigInt::from(7)),
                        BigRational::new(BigInt::from(-3), big),
                    ),
                ),
            ],
        )
        .unwrap()])
        .unwrap();
        let g = identity_map(&sig).unwrap().g().clone();
        let map = MapJet::new(sig, f, g).unwrap();
        let model = heisenberg_model(&sig).unwrap();
        let doc = JetDocument::from_values(&map, &model, None).unwrap();
        let back = JetDocument::from_json(&doc.to_json_string()).unwrap();
        assert_eq!(back.map_jet().unwrap().f(), map.f());
    }

    #[test]
    fn schema_version_is_enforced() {
        let text = heisenberg_document().to_json_string().replace(
            "\"schema_version\": \"1\"",
            "\"schema_version\": \"2\"",
        );
        assert!(matches!(
            JetDocument::from_json(&text),
            Err(DocumentError::SchemaVersion { found }) if found == "2"
        ));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = heisenberg_document()
            .to_json_string()
            .replace("\"schema_version\"", "\"extra\": 1,\n  \"schema_version\"");
        assert!(matches!(
            JetDocument::from_json(&text),
            Err(DocumentError::Json(_))
        ));
    }

    #[test]
    fn malformed_terms_are_rejected() {
        let doc = heisenberg_document();

        let mut dup = doc.clone();
        let first = dup.map.components[0][0].clone();
        dup.map.components[0].push(first);
        assert!(matches!(
            dup.map_jet(),
            Err(DocumentError::Validation(msg)) if msg.contains("repeats")
        ));

        let mut zero = doc.clone();
        zero.map.components[0][0].coeff.num_re = "0".parse().unwrap();
        assert!(matches!(
            zero.map_jet(),
            Err(DocumentError::Validation(msg)) if msg.contains("zero coefficient")
        ));

        let mut deep = doc.clone();
        deep.map.components[0][0].exponents = vec![5, 0];
        assert!(matches!(
            deep.map_jet(),
            Err(DocumentError::Validation(msg)) if msg.contains("beyond order")
        ));

        let mut wide = doc.clone();
        wide.map.components[0][0].exponents = vec![1, 0, 0];
        assert!(matches!(
            wide.map_jet(),
            Err(DocumentError::Validation(msg)) if msg.contains("length")
        ));

        let mut tagged = doc.clone();
        tagged.map.space = "graph".into();
        assert!(matches!(
            tagged.map_jet(),
            Err(DocumentError::Validation(msg)) if msg.contains("space tag")
        ));

        let mut fractional = doc;
        fractional.model.components[0][0].coeff.num_re = "1.5".parse().unwrap();
        assert!(matches!(
            fractional.model(),
            Err(DocumentError::Validation(msg)) if msg.contains("integer")
        ));
    }

    #[test]
    fn zero_denominators_are_rejected() {
        let mut doc = heisenberg_document();
        doc.model.components[0][0].coeff.den_re = "0".parse().unwrap();
        assert!(matches!(
            doc.model(),
            Err(DocumentError::Validation(msg)) if msg.contains("denominator")
        ));
    }

    #[test]
    fn component_counts_follow_the_signature() {
        let mut doc = heisenberg_document();
        doc.map.components.pop();
        assert!(matches!(
            doc.map_jet(),
            Err(DocumentError::Validation(msg)) if msg.contains("components")
        ));
    }
}
