//! Sparse truncated multivariate power series over exact or float complex
//! scalars.
//!
//! Terms are keyed by graded-lexicographic multi-indices in a `BTreeMap`, so
//! iteration order (and therefore serialization) is canonical. All arithmetic
//! truncates at the series order; exact-mode results are bit-exact and
//! independent of term-processing order. Total degrees are capped at 255,
//! which keeps exponent vectors in one byte per variable; jet computations
//! live far below that.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num::rational::BigRational;
use num::{Signed, Zero};
use smallvec::SmallVec;

use crate::coeff::{rational_to_f64, CoeffMode, Coefficient};
use crate::error::SeriesError;
use crate::space::{same_space, VariableSpace};

/// Largest representable total degree (exponents are stored as bytes).
pub const MAX_ORDER: u32 = 255;

/// Exponent vector with cached total degree, ordered graded-lex: lower total
/// degree first, then higher power on earlier variables first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    total: u16,
    exps: SmallVec<[u8; 16]>,
}

impl MultiIndex {
    pub fn new(exps: &[u32]) -> Result<Self, SeriesError> {
        let total: u32 = exps.iter().sum();
        if total > MAX_ORDER {
            return Err(SeriesError::DegreeTooLarge { degree: total });
        }
        Ok(MultiIndex {
            total: total as u16,
            exps: exps.iter().map(|&e| e as u8).collect(),
        })
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex {
            total: 0,
            exps: smallvec::smallvec![0; n],
        }
    }

    /// Unit index: exponent 1 at position `i`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut exps: SmallVec<[u8; 16]> = smallvec::smallvec![0; n];
        exps[i] = 1;
        MultiIndex { total: 1, exps }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        u32::from(self.total)
    }

    pub fn exponent(&self, i: usize) -> u32 {
        u32::from(self.exps[i])
    }

    pub fn exponents(&self) -> Vec<u32> {
        self.exps.iter().map(|&e| u32::from(e)).collect()
    }

    pub fn iter_exponents(&self) -> impl Iterator<Item = u32> + '_ {
        self.exps.iter().map(|&e| u32::from(e))
    }

    /// True iff every exponent is zero.
    pub fn is_zero_index(&self) -> bool {
        self.total == 0
    }

    /// Componentwise sum. Callers guarantee the combined degree stays within
    /// the truncation order, which keeps every byte addition in range.
    pub fn sum(&self, other: &Self) -> Self {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        debug_assert!(u32::from(self.total) + u32::from(other.total) <= MAX_ORDER);
        let exps = self
            .exps
            .iter()
            .zip(other.exps.iter())
            .map(|(a, b)| a + b)
            .collect();
        MultiIndex {
            total: self.total + other.total,
            exps,
        }
    }

    /// The smallest index of total degree `deg` in this ordering; usable as
    /// an exclusive upper bound for "all indices of degree < deg".
    fn degree_marker(n: usize, deg: u32) -> Self {
        debug_assert!(deg <= MAX_ORDER);
        let mut exps: SmallVec<[u8; 16]> = smallvec::smallvec![0; n];
        exps[0] = deg as u8;
        MultiIndex {
            total: deg as u16,
            exps,
        }
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.total
            .cmp(&other.total)
            .then_with(|| other.exps.cmp(&self.exps))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A multivariate power series truncated at a fixed total degree.
#[derive(Debug, Clone)]
pub struct TruncatedSeries {
    space: Arc<VariableSpace>,
    order: u32,
    mode: CoeffMode,
    terms: BTreeMap<MultiIndex, Coefficient>,
}

impl PartialEq for TruncatedSeries {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
            && self.mode == other.mode
            && same_space(&self.space, &other.space)
            && self.terms == other.terms
    }
}

fn check_order(order: u32) -> Result<(), SeriesError> {
    if order > MAX_ORDER {
        Err(SeriesError::OrderTooLarge { order })
    } else {
        Ok(())
    }
}

impl TruncatedSeries {
    pub fn zero(
        space: &Arc<VariableSpace>,
        order: u32,
        mode: CoeffMode,
    ) -> Result<Self, SeriesError> {
        check_order(order)?;
        Ok(TruncatedSeries {
            space: Arc::clone(space),
            order,
            mode,
            terms: BTreeMap::new(),
        })
    }

    pub fn one(
        space: &Arc<VariableSpace>,
        order: u32,
        mode: CoeffMode,
    ) -> Result<Self, SeriesError> {
        let mut s = Self::zero(space, order, mode)?;
        s.terms
            .insert(MultiIndex::zero(space.len()), Coefficient::one(mode));
        Ok(s)
    }

    /// Single-term series. Degrees beyond the order yield the zero series.
    pub fn monomial(
        space: &Arc<VariableSpace>,
        exponents: &[u32],
        c: Coefficient,
        order: u32,
    ) -> Result<Self, SeriesError> {
        check_order(order)?;
        if exponents.len() != space.len() {
            return Err(SeriesError::LengthMismatch {
                expected: space.len(),
                got: exponents.len(),
            });
        }
        let mode = c.mode();
        let mut s = Self::zero(space, order, mode)?;
        let degree: u32 = exponents.iter().sum();
        if degree <= order && !c.is_zero() {
            s.terms.insert(MultiIndex::new(exponents)?, c);
        }
        Ok(s)
    }

    /// The series consisting of the variable at position `i`.
    pub fn variable(
        space: &Arc<VariableSpace>,
        i: usize,
        order: u32,
        mode: CoeffMode,
    ) -> Result<Self, SeriesError> {
        check_order(order)?;
        let mut s = Self::zero(space, order, mode)?;
        if order >= 1 {
            s.terms
                .insert(MultiIndex::unit(space.len(), i), Coefficient::one(mode));
        }
        Ok(s)
    }

    /// Build from raw terms, merging duplicates and dropping zeros and
    /// beyond-order terms. All coefficients must share one mode.
    pub fn from_terms<I>(
        space: &Arc<VariableSpace>,
        order: u32,
        mode: CoeffMode,
        terms: I,
    ) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (MultiIndex, Coefficient)>,
    {
        let mut s = Self::zero(space, order, mode)?;
        for (idx, c) in terms {
            if idx.len() != space.len() {
                return Err(SeriesError::LengthMismatch {
                    expected: space.len(),
                    got: idx.len(),
                });
            }
            if c.mode() != mode {
                return Err(SeriesError::ModeMismatch);
            }
            if idx.total_degree() <= order {
                insert_accum(&mut s.terms, idx, c);
            }
        }
        sweep_zeros(&mut s.terms);
        Ok(s)
    }

    pub fn space(&self) -> &Arc<VariableSpace> {
        &self.space
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn mode(&self) -> CoeffMode {
        self.mode
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Coefficient)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, idx: &MultiIndex) -> Option<&Coefficient> {
        self.terms.get(idx)
    }

    /// Coefficient at the given exponents, zero when absent.
    pub fn coefficient_at(&self, exponents: &[u32]) -> Coefficient {
        match MultiIndex::new(exponents) {
            Ok(idx) => self
                .terms
                .get(&idx)
                .cloned()
                .unwrap_or_else(|| Coefficient::zero(self.mode)),
            Err(_) => Coefficient::zero(self.mode),
        }
    }

    pub fn constant_term(&self) -> Coefficient {
        self.coefficient(&MultiIndex::zero(self.space.len()))
            .cloned()
            .unwrap_or_else(|| Coefficient::zero(self.mode))
    }

    /// Lowest total degree among stored terms, `None` for the zero series.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(MultiIndex::total_degree)
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(MultiIndex::total_degree)
    }

    fn check_compatible(&self, other: &Self) -> Result<(), SeriesError> {
        if !same_space(&self.space, &other.space) {
            return Err(SeriesError::SpaceMismatch);
        }
        if self.order != other.order {
            return Err(SeriesError::OrderMismatch {
                left: self.order,
                right: other.order,
            });
        }
        if self.mode != other.mode {
            return Err(SeriesError::ModeMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_compatible(other)?;
        let mut terms = self.terms.clone();
        for (idx, c) in &other.terms {
            insert_accum(&mut terms, idx.clone(), c.clone());
        }
        sweep_zeros(&mut terms);
        Ok(TruncatedSeries {
            space: Arc::clone(&self.space),
            order: self.order,
            mode: self.mode,
            terms,
        })
    }

    pub fn neg(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(i, c)| (i.clone(), c.neg()))
            .collect();
        TruncatedSeries {
            space: Arc::clone(&self.space),
            order: self.order,
            mode: self.mode,
            terms,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    /// Scalar multiple.
    pub fn scale(&self, c: &Coefficient) -> Result<Self, SeriesError> {
        if c.mode() != self.mode {
            return Err(SeriesError::ModeMismatch);
        }
        if c.is_zero() {
            return TruncatedSeries::zero(&self.space, self.order, self.mode);
        }
        if c.is_one() {
            return Ok(self.clone());
        }
        let terms = self
            .terms
            .iter()
            .map(|(i, v)| (i.clone(), v.mul(c)))
            .collect();
        let mut out = TruncatedSeries {
            space: Arc::clone(&self.space),
            order: self.order,
            mode: self.mode,
            terms,
        };
        sweep_zeros(&mut out.terms);
        Ok(out)
    }

    /// Multiply by `c * x^shift`, dropping terms past the order.
    pub fn mul_monomial(&self, shift: &MultiIndex, c: &Coefficient) -> Result<Self, SeriesError> {
        if shift.len() != self.space.len() {
            return Err(SeriesError::LengthMismatch {
                expected: self.space.len(),
                got: shift.len(),
            });
        }
        if c.mode() != self.mode {
            return Err(SeriesError::ModeMismatch);
        }
        let mut out = TruncatedSeries::zero(&self.space, self.order, self.mode)?;
        if c.is_zero() {
            return Ok(out);
        }
        for (idx, v) in &self.terms {
            if idx.total_degree() + shift.total_degree() > self.order {
                break;
            }
            let prod = v.mul(c);
            if !prod.is_zero() {
                out.terms.insert(idx.sum(shift), prod);
            }
        }
        Ok(out)
    }

    /// Truncated product; exact mode is bit-exact.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_compatible(other)?;
        let mut out = TruncatedSeries::zero(&self.space, self.order, self.mode)?;
        if self.is_zero() || other.is_zero() {
            return Ok(out);
        }
        // Iterate the shorter operand on the outside; the inner range stops
        // at the largest degree that can still contribute.
        let (a, b) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let n = self.space.len();
        for (ia, ca) in &a.terms {
            let budget = self.order - ia.total_degree();
            let iter: Box<dyn Iterator<Item = (&MultiIndex, &Coefficient)>> =
                if b.max_degree().unwrap_or(0) <= budget {
                    Box::new(b.terms.iter())
                } else {
                    Box::new(b.terms.range(..MultiIndex::degree_marker(n, budget + 1)))
                };
            for (ib, cb) in iter {
                let prod = ca.mul(cb);
                if !prod.is_zero() {
                    insert_accum(&mut out.terms, ia.sum(ib), prod);
                }
            }
        }
        sweep_zeros(&mut out.terms);
        Ok(out)
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, e: u32) -> Result<Self, SeriesError> {
        let mut result = TruncatedSeries::one(&self.space, self.order, self.mode)?;
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Re-truncate to a (usually lower) order.
    pub fn truncate(&self, new_order: u32) -> Result<Self, SeriesError> {
        check_order(new_order)?;
        let terms = self
            .terms
            .iter()
            .take_while(|(i, _)| i.total_degree() <= new_order)
            .map(|(i, c)| (i.clone(), c.clone()))
            .collect();
        Ok(TruncatedSeries {
            space: Arc::clone(&self.space),
            order: new_order,
            mode: self.mode,
            terms,
        })
    }

    /// Conjugate coefficients and swap each variable with its partner.
    ///
    /// Unpaired variables are tolerated as long as no stored term touches
    /// them; otherwise they cannot be swapped and the call fails.
    pub fn conjugate(&self) -> Result<Self, SeriesError> {
        let n = self.space.len();
        let mut out = TruncatedSeries::zero(&self.space, self.order, self.mode)?;
        for (idx, c) in &self.terms {
            let mut exps = vec![0u32; n];
            for i in 0..n {
                let e = idx.exponent(i);
                if e == 0 {
                    continue;
                }
                match self.space.conj_of(i) {
                    Some(j) => exps[j] = e,
                    None => {
                        return Err(SeriesError::UnpairedVariable {
                            name: self.space.name(i).to_string(),
                        })
                    }
                }
            }
            out.terms.insert(MultiIndex::new(&exps)?, c.conj());
        }
        Ok(out)
    }

    /// Re-express over a superspace, matching variables by name. The order
    /// is preserved; variables missing from `into` are only an error when a
    /// stored term actually uses them.
    pub fn inject(&self, into: &Arc<VariableSpace>) -> Result<Self, SeriesError> {
        if same_space(&self.space, into) {
            return Ok(self.clone());
        }
        let map: Vec<Option<usize>> = (0..self.space.len())
            .map(|i| into.index_of(self.space.name(i)))
            .collect();
        let mut out = TruncatedSeries::zero(into, self.order, self.mode)?;
        for (idx, c) in &self.terms {
            let mut exps = vec![0u32; into.len()];
            for i in 0..self.space.len() {
                let e = idx.exponent(i);
                if e == 0 {
                    continue;
                }
                match map[i] {
                    Some(j) => exps[j] = e,
                    None => {
                        return Err(SeriesError::MissingVariable {
                            name: self.space.name(i).to_string(),
                        })
                    }
                }
            }
            out.terms.insert(MultiIndex::new(&exps)?, c.clone());
        }
        Ok(out)
    }

    /// Formal composition: replace each variable by its binding (variables
    /// without a binding map to the same-named variable of the output space)
    /// and truncate at the bindings' order.
    pub fn substitute(&self, bindings: &BindingSet) -> Result<Self, SeriesError> {
        if self.mode != bindings.mode {
            return Err(SeriesError::ModeMismatch);
        }
        let k = bindings.order;
        let n_in = self.space.len();
        let n_out = bindings.out_space.len();
        let mut resolved: Vec<Option<Resolved<'_>>> = vec![None; n_in];
        let mut products: HashMap<MultiIndex, TruncatedSeries> = HashMap::new();
        let mut out = TruncatedSeries::zero(&bindings.out_space, k, self.mode)?;

        for (idx, c) in &self.terms {
            // Resolve the variables this term uses and prune by the least
            // degree the composed term can reach.
            let mut min_total: u32 = 0;
            let mut vanishes = false;
            for i in 0..n_in {
                let e = idx.exponent(i);
                if e == 0 {
                    continue;
                }
                if resolved[i].is_none() {
                    resolved[i] = Some(bindings.resolve(&self.space, i)?);
                }
                match resolved[i].as_ref().unwrap() {
                    Resolved::Direct(_) => min_total += e,
                    Resolved::Series(s) => match s.min_degree() {
                        Some(d) => min_total += e * d,
                        None => {
                            vanishes = true;
                            break;
                        }
                    },
                }
                if min_total > k {
                    break;
                }
            }
            if vanishes || min_total > k {
                continue;
            }

            // Split into a direct monomial part and true series factors.
            let mut direct = vec![0u32; n_out];
            let mut direct_total: u32 = 0;
            let mut factor_sig = vec![0u32; n_in];
            let mut has_factors = false;
            for i in 0..n_in {
                let e = idx.exponent(i);
                if e == 0 {
                    continue;
                }
                match resolved[i].as_ref().unwrap() {
                    Resolved::Direct(j) => {
                        direct[*j] += e;
                        direct_total += e;
                    }
                    Resolved::Series(_) => {
                        factor_sig[i] = e;
                        has_factors = true;
                    }
                }
            }

            if !has_factors {
                if direct_total <= k {
                    insert_accum(&mut out.terms, MultiIndex::new(&direct)?, c.clone());
                }
                continue;
            }

            let sig = MultiIndex::new(&factor_sig)?;
            fill_product(&sig, &mut products, &resolved)?;
            let prod = &products[&sig];

            // Accumulate c * prod shifted by the direct monomial.
            let shift = MultiIndex::new(&direct)?;
            for (pi, pc) in &prod.terms {
                if pi.total_degree() + direct_total > k {
                    break;
                }
                let v = pc.mul(c);
                if !v.is_zero() {
                    insert_accum(&mut out.terms, pi.sum(&shift), v);
                }
            }
        }
        sweep_zeros(&mut out.terms);
        Ok(out)
    }

    /// Canonical text form: graded-lex terms joined by signs, coefficient 1
    /// elided, rationals as `p/q`, complex scalars as `(re, im)`.
    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (pos, (idx, c)) in self.terms.iter().enumerate() {
            let (neg, abs) = match c {
                Coefficient::Exact { re, im } if im.is_zero() && re.is_negative() => (
                    true,
                    Coefficient::Exact {
                        re: -re.clone(),
                        im: BigRational::zero(),
                    },
                ),
                Coefficient::Float { re, im } if *im == 0.0 && *re < 0.0 => {
                    (true, Coefficient::Float { re: -re, im: 0.0 })
                }
                _ => (false, c.clone()),
            };
            let mono = self.monomial_text(idx);
            let body = if mono.is_empty() {
                abs.to_string()
            } else if abs.is_one() {
                mono
            } else {
                format!("{abs} * {mono}")
            };
            if pos == 0 {
                if neg {
                    out.push('-');
                }
            } else if neg {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            out.push_str(&body);
        }
        out
    }

    fn monomial_text(&self, idx: &MultiIndex) -> String {
        let mut parts = Vec::new();
        for i in 0..self.space.len() {
            let e = idx.exponent(i);
            if e == 1 {
                parts.push(self.space.name(i).to_string());
            } else if e > 1 {
                parts.push(format!("{}^{}", self.space.name(i), e));
            }
        }
        parts.join("*")
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

enum Resolved<'a> {
    /// Plain variable of the output space (unbound, or bound to a bare
    /// variable with coefficient one).
    Direct(usize),
    Series(&'a TruncatedSeries),
}

impl<'a> Clone for Resolved<'a> {
    fn clone(&self) -> Self {
        match self {
            Resolved::Direct(j) => Resolved::Direct(*j),
            Resolved::Series(s) => Resolved::Series(s),
        }
    }
}

/// Memoize the product of bound series for one factor signature by peeling
/// one factor at a time, so signatures sharing a prefix reuse subproducts.
fn fill_product(
    sig: &MultiIndex,
    products: &mut HashMap<MultiIndex, TruncatedSeries>,
    resolved: &[Option<Resolved<'_>>],
) -> Result<(), SeriesError> {
    if products.contains_key(sig) {
        return Ok(());
    }
    let i = (0..sig.len())
        .find(|&i| sig.exponent(i) > 0)
        .expect("nonempty factor signature");
    let base = match resolved[i].as_ref().unwrap() {
        Resolved::Series(s) => *s,
        Resolved::Direct(_) => unreachable!("direct factors never enter products"),
    };
    let mut rest = sig.exponents();
    rest[i] -= 1;
    let value = if rest.iter().all(|e| *e == 0) {
        base.clone()
    } else {
        let rest = MultiIndex::new(&rest)?;
        fill_product(&rest, products, resolved)?;
        products[&rest].mul(base)?
    };
    products.insert(sig.clone(), value);
    Ok(())
}

/// Variable bindings for substitution: an output space, order, mode, and a
/// name-keyed set of replacement series with zero constant term.
pub struct BindingSet {
    out_space: Arc<VariableSpace>,
    order: u32,
    mode: CoeffMode,
    named: HashMap<String, TruncatedSeries>,
}

impl BindingSet {
    pub fn new(
        out_space: &Arc<VariableSpace>,
        order: u32,
        mode: CoeffMode,
    ) -> Result<Self, SeriesError> {
        check_order(order)?;
        Ok(BindingSet {
            out_space: Arc::clone(out_space),
            order,
            mode,
            named: HashMap::new(),
        })
    }

    pub fn out_space(&self) -> &Arc<VariableSpace> {
        &self.out_space
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Bind a variable name to a series over the output space. The series
    /// must share space, order, and mode, and vanish at the origin.
    pub fn bind(&mut self, var: &str, s: TruncatedSeries) -> Result<(), SeriesError> {
        if !same_space(&s.space, &self.out_space)
            || s.order != self.order
            || s.mode != self.mode
        {
            return Err(SeriesError::InconsistentBindingTarget);
        }
        if !s.constant_term().is_zero() {
            return Err(SeriesError::NonzeroConstantInBinding {
                var: var.to_string(),
            });
        }
        self.named.insert(var.to_string(), s);
        Ok(())
    }

    fn resolve<'a>(
        &'a self,
        in_space: &VariableSpace,
        i: usize,
    ) -> Result<Resolved<'a>, SeriesError> {
        let name = in_space.name(i);
        if let Some(s) = self.named.get(name) {
            // A bare-variable binding acts like a renaming.
            if s.terms.len() == 1 {
                let (idx, c) = s.terms.iter().next().unwrap();
                if idx.total_degree() == 1 && c.is_one() {
                    let j = (0..s.space.len())
                        .find(|&j| idx.exponent(j) == 1)
                        .expect("degree-1 index has a unit slot");
                    return Ok(Resolved::Direct(j));
                }
            }
            return Ok(Resolved::Series(s));
        }
        match self.out_space.index_of(name) {
            Some(j) => Ok(Resolved::Direct(j)),
            None => Err(SeriesError::UnboundVariable {
                name: name.to_string(),
            }),
        }
    }
}

/// A tuple of series sharing space, order, and coefficient mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesVector {
    components: Vec<TruncatedSeries>,
}

impl SeriesVector {
    pub fn new(components: Vec<TruncatedSeries>) -> Result<Self, SeriesError> {
        let first = components
            .first()
            .ok_or_else(|| SeriesError::InvalidSpace("empty series vector".into()))?;
        for c in &components[1..] {
            first.check_compatible(c)?;
        }
        Ok(SeriesVector { components })
    }

    pub fn zero(
        space: &Arc<VariableSpace>,
        order: u32,
        mode: CoeffMode,
        len: usize,
    ) -> Result<Self, SeriesError> {
        let mut components = Vec::with_capacity(len);
        for _ in 0..len {
            components.push(TruncatedSeries::zero(space, order, mode)?);
        }
        Self::new(components)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, i: usize) -> &TruncatedSeries {
        &self.components[i]
    }

    pub fn components(&self) -> &[TruncatedSeries] {
        &self.components
    }

    pub fn iter(&self) -> impl Iterator<Item = &TruncatedSeries> {
        self.components.iter()
    }

    pub fn space(&self) -> &Arc<VariableSpace> {
        self.components[0].space()
    }

    pub fn order(&self) -> u32 {
        self.components[0].order()
    }

    pub fn mode(&self) -> CoeffMode {
        self.components[0].mode()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(TruncatedSeries::is_zero)
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        if self.len() != other.len() {
            return Err(SeriesError::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        let components = self
            .components
            .iter()
            .zip(other.components.iter())
            .map(|(a, b)| a.add(b))
            .collect::<Result<_, _>>()?;
        Ok(SeriesVector { components })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        SeriesVector {
            components: self.components.iter().map(TruncatedSeries::neg).collect(),
        }
    }

    pub fn truncate(&self, new_order: u32) -> Result<Self, SeriesError> {
        let components = self
            .components
            .iter()
            .map(|c| c.truncate(new_order))
            .collect::<Result<_, _>>()?;
        Ok(SeriesVector { components })
    }

    pub fn substitute(&self, bindings: &BindingSet) -> Result<Self, SeriesError> {
        let components = self
            .components
            .iter()
            .map(|c| c.substitute(bindings))
            .collect::<Result<_, _>>()?;
        Ok(SeriesVector { components })
    }

    pub fn conjugate(&self) -> Result<Self, SeriesError> {
        let components = self
            .components
            .iter()
            .map(TruncatedSeries::conjugate)
            .collect::<Result<_, _>>()?;
        Ok(SeriesVector { components })
    }
}

/// Weighted coefficient norm Σ |c_idx| · t^{|idx|} over a real-coefficient
/// vector, taking the max over components at each index. Exact mode returns
/// the exact rational value; float mode sums in doubles and converts.
pub fn weighted_norm(r: &SeriesVector, t: &BigRational) -> Result<BigRational, SeriesError> {
    if !t.is_positive() {
        return Err(SeriesError::NonPositiveWeight);
    }
    for comp in r.iter() {
        for (_, c) in comp.terms() {
            if !c.is_real() {
                return Err(SeriesError::NonRealCoefficient);
            }
        }
    }
    match r.mode() {
        CoeffMode::Exact => {
            let mut best: BTreeMap<&MultiIndex, BigRational> = BTreeMap::new();
            for comp in r.iter() {
                for (idx, c) in comp.terms() {
                    let a = c.exact_re().expect("exact mode").abs();
                    match best.get_mut(idx) {
                        Some(cur) => {
                            if a > *cur {
                                *cur = a;
                            }
                        }
                        None => {
                            best.insert(idx, a);
                        }
                    }
                }
            }
            let mut sum = BigRational::zero();
            for (idx, a) in best {
                sum += a * t.pow(idx.total_degree() as i32);
            }
            Ok(sum)
        }
        CoeffMode::Float => {
            let tf = rational_to_f64(t);
            let mut best: BTreeMap<&MultiIndex, f64> = BTreeMap::new();
            for comp in r.iter() {
                for (idx, c) in comp.terms() {
                    let (re, _) = c.to_floats();
                    let a = re.abs();
                    let cur = best.entry(idx).or_insert(0.0);
                    if a > *cur {
                        *cur = a;
                    }
                }
            }
            let sum: f64 = best
                .iter()
                .map(|(idx, a)| a * tf.powi(idx.total_degree() as i32))
                .sum();
            Ok(BigRational::from_float(sum)
                .unwrap_or_else(BigRational::zero))
        }
    }
}

impl TruncatedSeries {
    /// Assemble from an already-canonical term map (crate-internal).
    pub(crate) fn from_sorted_map(
        space: &Arc<VariableSpace>,
        order: u32,
        mode: CoeffMode,
        terms: BTreeMap<MultiIndex, Coefficient>,
    ) -> Self {
        debug_assert!(terms
            .iter()
            .all(|(i, c)| i.total_degree() <= order && !c.is_zero() && c.mode() == mode));
        TruncatedSeries {
            space: Arc::clone(space),
            order,
            mode,
            terms,
        }
    }
}

pub(crate) fn insert_accum(
    map: &mut BTreeMap<MultiIndex, Coefficient>,
    idx: MultiIndex,
    c: Coefficient,
) {
    use std::collections::btree_map::Entry;
    match map.entry(idx) {
        Entry::Vacant(e) => {
            e.insert(c);
        }
        Entry::Occupied(mut e) => {
            e.get_mut().add_assign(&c);
        }
    }
}

pub(crate) fn sweep_zeros(map: &mut BTreeMap<MultiIndex, Coefficient>) {
    map.retain(|_, c| !c.is_zero());
}
