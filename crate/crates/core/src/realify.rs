//! Rewriting series over a doubled space (z, z̄, w, w̄) in real coordinates
//! (x, y, u, v) via z = x + iy, w = u + iv.
//!
//! The expansion of a single monomial z^a z̄^b w^c w̄^e depends only on the
//! space, order, and exponents, so expansions are memoized in a thread-local
//! table keyed by space identity. The pullback pipeline realifies the same
//! monomials at every evaluation point; the table turns that into a lookup.

use std::cell::RefCell;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::rc::Rc;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;

use crate::coeff::{CoeffMode, Coefficient};
use crate::error::SeriesError;
use crate::series::{insert_accum, sweep_zeros, MultiIndex, SeriesVector, TruncatedSeries};
use crate::space::{same_space, VariableSpace};

/// How the holomorphic variables of a doubled space map into real pairs.
struct DoubledShape {
    m: usize,
    d: usize,
}

/// Expect the exact layout (z1..zm, ~z1..~zm, w1..wd, ~w1..~wd).
fn detect_doubled_shape(space: &Arc<VariableSpace>) -> Result<DoubledShape, SeriesError> {
    let m = space
        .names()
        .iter()
        .take_while(|n| n.starts_with('z'))
        .count();
    let rest = space.len().saturating_sub(2 * m);
    let d = rest / 2;
    if space.len() != 2 * m + 2 * d || (m == 0 && d == 0) {
        return Err(SeriesError::UnsupportedVariableName {
            name: space.name(0).to_string(),
        });
    }
    let expected = VariableSpace::doubled(m, d);
    if !same_space(space, &expected) {
        for i in 0..space.len() {
            if space.name(i) != expected.name(i) {
                return Err(SeriesError::UnsupportedVariableName {
                    name: space.name(i).to_string(),
                });
            }
        }
        return Err(SeriesError::UnsupportedVariableName {
            name: space.name(0).to_string(),
        });
    }
    Ok(DoubledShape { m, d })
}

struct MonomialKey {
    space: Arc<VariableSpace>,
    order: u32,
    index: MultiIndex,
}

impl PartialEq for MonomialKey {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.space, &other.space)
            && self.order == other.order
            && self.index == other.index
    }
}

impl Eq for MonomialKey {}

impl Hash for MonomialKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (Arc::as_ptr(&self.space) as usize).hash(state);
        self.order.hash(state);
        self.index.hash(state);
    }
}

thread_local! {
    static MONOMIAL_TABLE: RefCell<HashMap<MonomialKey, Rc<TruncatedSeries>>> =
        RefCell::new(HashMap::new());
}

fn binomial(n: u32, k: u32) -> BigRational {
    BigRational::from_integer(num::integer::binomial(BigInt::from(n), BigInt::from(k)))
}

/// (x ± iy)^a expanded directly from the binomial theorem.
fn conjugate_pair_power(
    out: &Arc<VariableSpace>,
    order: u32,
    re_pos: usize,
    im_pos: usize,
    a: u32,
    plus: bool,
) -> Result<TruncatedSeries, SeriesError> {
    let n = out.len();
    let mut terms = Vec::with_capacity(a as usize + 1);
    for j in 0..=a {
        let mut i_pow = Coefficient::imag_unit_pow(j);
        if !plus && j % 2 == 1 {
            i_pow = i_pow.neg();
        }
        let c = i_pow.mul(&Coefficient::from_rationals(
            binomial(a, j),
            num::Zero::zero(),
        ));
        let mut exps = vec![0u32; n];
        exps[re_pos] = a - j;
        exps[im_pos] = j;
        terms.push((MultiIndex::new(&exps)?, c));
    }
    TruncatedSeries::from_terms(out, order, CoeffMode::Exact, terms)
}

/// Exact real-coordinate expansion of one doubled-space monomial.
fn realify_monomial(
    shape: &DoubledShape,
    out: &Arc<VariableSpace>,
    order: u32,
    index: &MultiIndex,
) -> Result<TruncatedSeries, SeriesError> {
    let (m, d) = (shape.m, shape.d);
    let mut result = TruncatedSeries::one(out, order, CoeffMode::Exact)?;
    let pair = |result: &mut TruncatedSeries,
                    hol: usize,
                    anti: usize,
                    re_pos: usize,
                    im_pos: usize|
     -> Result<(), SeriesError> {
        let a = index.exponent(hol);
        let b = index.exponent(anti);
        if a > 0 {
            let p = conjugate_pair_power(out, order, re_pos, im_pos, a, true)?;
            *result = result.mul(&p)?;
        }
        if b > 0 {
            let p = conjugate_pair_power(out, order, re_pos, im_pos, b, false)?;
            *result = result.mul(&p)?;
        }
        Ok(())
    };
    for i in 0..m {
        // z_i = x_i + i y_i
        pair(&mut result, i, m + i, i, m + i)?;
    }
    for j in 0..d {
        // w_j = u_j + i v_j
        pair(&mut result, 2 * m + j, 2 * m + d + j, 2 * m + j, 2 * m + d + j)?;
    }
    Ok(result)
}

fn cached_monomial(
    space: &Arc<VariableSpace>,
    shape: &DoubledShape,
    out: &Arc<VariableSpace>,
    order: u32,
    index: &MultiIndex,
) -> Result<Rc<TruncatedSeries>, SeriesError> {
    let key = MonomialKey {
        space: Arc::clone(space),
        order,
        index: index.clone(),
    };
    MONOMIAL_TABLE.with(|table| {
        if let Some(hit) = table.borrow().get(&key) {
            return Ok(Rc::clone(hit));
        }
        let value = Rc::new(realify_monomial(shape, out, order, index)?);
        table.borrow_mut().insert(key, Rc::clone(&value));
        Ok(value)
    })
}

impl TruncatedSeries {
    /// Substitute z = x + iy, w = u + iv and collect in the matching real
    /// coordinate space (x1..xm, y1..ym, u1..ud, v1..vd). Requires the
    /// doubled-space layout; unpaired spaces are rejected.
    pub fn realify(&self) -> Result<TruncatedSeries, SeriesError> {
        if !self.space().is_fully_paired() {
            let name = (0..self.space().len())
                .find(|&i| self.space().conj_of(i).is_none())
                .map(|i| self.space().name(i).to_string())
                .unwrap_or_default();
            return Err(SeriesError::UnpairedVariable { name });
        }
        let shape = detect_doubled_shape(self.space())?;
        let out = VariableSpace::real_coords(shape.m, shape.d);
        let mut acc = std::collections::BTreeMap::new();
        for (idx, c) in self.terms() {
            let table = cached_monomial(self.space(), &shape, &out, self.order(), idx)?;
            match self.mode() {
                CoeffMode::Exact => {
                    for (ri, rc) in table.terms() {
                        let v = rc.mul(c);
                        if !v.is_zero() {
                            insert_accum(&mut acc, ri.clone(), v);
                        }
                    }
                }
                CoeffMode::Float => {
                    let (cre, cim) = c.to_floats();
                    for (ri, rc) in table.terms() {
                        let (tre, tim) = rc.to_floats();
                        let v = Coefficient::from_floats(
                            tre * cre - tim * cim,
                            tre * cim + tim * cre,
                        );
                        if !v.is_zero() {
                            insert_accum(&mut acc, ri.clone(), v);
                        }
                    }
                }
            }
        }
        sweep_zeros(&mut acc);
        Ok(TruncatedSeries::from_sorted_map(
            &out,
            self.order(),
            self.mode(),
            acc,
        ))
    }
}

impl SeriesVector {
    pub fn realify(&self) -> Result<SeriesVector, SeriesError> {
        let components = self
            .iter()
            .map(TruncatedSeries::realify)
            .collect::<Result<_, _>>()?;
        SeriesVector::new(components)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coefficient as C;

    #[test]
    fn modulus_squared_becomes_sum_of_squares() {
        let sp = VariableSpace::doubled(1, 0);
        let zzbar = TruncatedSeries::monomial(&sp, &[1, 1], C::from_integer(1), 4).unwrap();
        assert_eq!(zzbar.realify().unwrap().to_text(), "x1^2 + y1^2");
    }

    #[test]
    fn imaginary_part_of_w_is_v() {
        // (w - ~w) * (-i/2) realifies to v1.
        let sp = VariableSpace::doubled(0, 1);
        let w = TruncatedSeries::monomial(&sp, &[1, 0], C::from_integer(1), 3).unwrap();
        let wbar = TruncatedSeries::monomial(&sp, &[0, 1], C::from_integer(1), 3).unwrap();
        let half_i_neg = C::from_rationals(
            num::Zero::zero(),
            BigRational::new((-1).into(), 2.into()),
        );
        let im_w = w.sub(&wbar).unwrap().scale(&half_i_neg).unwrap();
        assert_eq!(im_w.realify().unwrap().to_text(), "v1");
    }

    #[test]
    fn z_squared_expands_binomially() {
        let sp = VariableSpace::doubled(1, 0);
        let z2 = TruncatedSeries::monomial(&sp, &[2, 0], C::from_integer(1), 4).unwrap();
        let r = z2.realify().unwrap();
        // x^2 - y^2 + 2i xy
        assert_eq!(r.coefficient_at(&[2, 0]), C::from_integer(1));
        assert_eq!(r.coefficient_at(&[0, 2]), C::from_integer(-1));
        assert_eq!(
            r.coefficient_at(&[1, 1]),
            C::from_rationals(num::Zero::zero(), BigRational::from_integer(2.into()))
        );
        assert_eq!(r.num_terms(), 3);
    }

    #[test]
    fn jet_spaces_are_rejected() {
        let jet = VariableSpace::holomorphic_jet(1, 1);
        let z = TruncatedSeries::variable(&jet, 0, 3, CoeffMode::Exact).unwrap();
        assert!(matches!(
            z.realify(),
            Err(SeriesError::UnpairedVariable { .. })
        ));
    }

    #[test]
    fn conjugation_symmetric_series_realify_to_real_series() {
        // z z̄ + (i z^2 - i z̄^2) is fixed by conjugation; its realification
        // must carry exactly real coefficients.
        let sp = VariableSpace::doubled(1, 0);
        let mut terms = Vec::new();
        terms.push((MultiIndex::new(&[1, 1]).unwrap(), C::from_integer(1)));
        terms.push((MultiIndex::new(&[2, 0]).unwrap(), C::i()));
        terms.push((MultiIndex::new(&[0, 2]).unwrap(), C::i().neg()));
        let s = TruncatedSeries::from_terms(&sp, 4, CoeffMode::Exact, terms).unwrap();
        assert_eq!(s.conjugate().unwrap(), s);
        let r = s.realify().unwrap();
        for (_, c) in r.terms() {
            assert!(c.is_real());
        }
    }
}
