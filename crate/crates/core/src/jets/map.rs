//! Holomorphic map jets F = (f, g) and solved graph germs v = r(x, y, u).

use num::rational::BigRational;
use num::Zero;

use crate::coeff::{CoeffMode, Coefficient};
use crate::error::JetError;
use crate::jets::CrSignature;
use crate::series::{MultiIndex, SeriesVector};
use crate::space::{same_space, VariableSpace};

/// An order-k jet of a holomorphic map (C^n, 0) → (C^{n′}, 0), split into
/// the CR-tangential components f (m′ series) and the normal components g
/// (d series), all over the jet space (z1..zm, w1..wd).
#[derive(Debug, Clone, PartialEq)]
pub struct MapJet {
    signature: CrSignature,
    f: SeriesVector,
    g: SeriesVector,
    normalized: bool,
}

impl MapJet {
    pub fn new(signature: CrSignature, f: SeriesVector, g: SeriesVector) -> Result<Self, JetError> {
        let space = VariableSpace::holomorphic_jet(signature.m(), signature.d());
        for (vec, count, label) in [(&f, signature.m_prime(), "f"), (&g, signature.d(), "g")] {
            if !same_space(vec.space(), &space) {
                return Err(JetError::Series(crate::error::SeriesError::SpaceMismatch));
            }
            if vec.len() != count {
                return Err(JetError::InvalidSignature(format!(
                    "{label} has {} components, signature demands {count}",
                    vec.len()
                )));
            }
            if vec.order() != signature.k() {
                return Err(JetError::Series(crate::error::SeriesError::OrderMismatch {
                    left: vec.order(),
                    right: signature.k(),
                }));
            }
            if vec.mode() != CoeffMode::Exact {
                return Err(JetError::ExactModeRequired);
            }
            for comp in vec.iter() {
                if !comp.constant_term().is_zero() {
                    return Err(JetError::NonzeroConstantTerm);
                }
            }
        }
        let normalized = Self::compute_normalized(&signature, &g);
        Ok(MapJet {
            signature,
            f,
            g,
            normalized,
        })
    }

    /// True iff g = w + O(2): zero linear part in z and identity in w.
    fn compute_normalized(sig: &CrSignature, g: &SeriesVector) -> bool {
        let n = sig.n();
        let one = Coefficient::one(CoeffMode::Exact);
        let zero = Coefficient::zero(CoeffMode::Exact);
        for (j, comp) in g.iter().enumerate() {
            for i in 0..n {
                let c = comp
                    .coefficient(&MultiIndex::unit(n, i))
                    .cloned()
                    .unwrap_or_else(|| Coefficient::zero(CoeffMode::Exact));
                let want = if i == sig.m() + j { &one } else { &zero };
                if c != *want {
                    return false;
                }
            }
        }
        true
    }

    pub fn signature(&self) -> &CrSignature {
        &self.signature
    }

    pub fn f(&self) -> &SeriesVector {
        &self.f
    }

    pub fn g(&self) -> &SeriesVector {
        &self.g
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// The linear-in-w part of g as an exact real d×d matrix. Fails when an
    /// entry has a nonzero imaginary part or when g has linear z-terms.
    pub fn linear_w_matrix(&self) -> Result<Vec<Vec<BigRational>>, JetError> {
        let (m, d, n) = (self.signature.m(), self.signature.d(), self.signature.n());
        let mut rows = Vec::with_capacity(d);
        for comp in self.g.iter() {
            for i in 0..m {
                if comp.coefficient(&MultiIndex::unit(n, i)).is_some() {
                    return Err(JetError::NonzeroZLinearPart);
                }
            }
            let mut row = Vec::with_capacity(d);
            for l in 0..d {
                match comp.coefficient(&MultiIndex::unit(n, m + l)) {
                    None => row.push(BigRational::zero()),
                    Some(c) => {
                        let im = c.exact_im().expect("map jets are exact");
                        if !im.is_zero() {
                            return Err(JetError::ComplexLinearPart);
                        }
                        row.push(c.exact_re().expect("map jets are exact").clone());
                    }
                }
            }
            rows.push(row);
        }
        Ok(rows)
    }

    /// Diagnostic: whether the differential at 0 has full rank n, i.e. the
    /// jet is an immersion candidate. Exact Gaussian elimination over
    /// complex rationals.
    pub fn differential_full_rank(&self) -> bool {
        let n = self.signature.n();
        let n_prime = self.signature.n_prime();
        let mut mat: Vec<Vec<(BigRational, BigRational)>> = Vec::with_capacity(n_prime);
        for comp in self.f.iter().chain(self.g.iter()) {
            let mut row = Vec::with_capacity(n);
            for i in 0..n {
                let c = comp
                    .coefficient(&MultiIndex::unit(n, i))
                    .cloned()
                    .unwrap_or_else(|| Coefficient::zero(CoeffMode::Exact));
                row.push((
                    c.exact_re().expect("map jets are exact").clone(),
                    c.exact_im().expect("map jets are exact").clone(),
                ));
            }
            mat.push(row);
        }
        complex_rank(&mut mat) == n
    }
}

/// Rank of a complex rational matrix by in-place elimination.
fn complex_rank(mat: &mut [Vec<(BigRational, BigRational)>]) -> usize {
    let rows = mat.len();
    if rows == 0 {
        return 0;
    }
    let cols = mat[0].len();
    let mut rank = 0;
    for col in 0..cols {
        let pivot = (rank..rows).find(|&r| {
            let (re, im) = &mat[r][col];
            !re.is_zero() || !im.is_zero()
        });
        let Some(p) = pivot else { continue };
        mat.swap(rank, p);
        let (pre, pim) = mat[rank][col].clone();
        let norm = &pre * &pre + &pim * &pim;
        for r in rank + 1..rows {
            let (are, aim) = mat[r][col].clone();
            if are.is_zero() && aim.is_zero() {
                continue;
            }
            // factor = a / pivot
            let fre = (&are * &pre + &aim * &pim) / &norm;
            let fim = (&aim * &pre - &are * &pim) / &norm;
            for c in col..cols {
                let (bre, bim) = mat[rank][c].clone();
                let sub_re = &fre * &bre - &fim * &bim;
                let sub_im = &fre * &bim + &fim * &bre;
                mat[r][c].0 -= sub_re;
                mat[r][c].1 -= sub_im;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// A solved graph germ: d real series r(x, y, u) with terms of degree 2..k.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphGerm {
    signature: CrSignature,
    r: SeriesVector,
}

impl GraphGerm {
    pub fn new(signature: CrSignature, r: SeriesVector) -> Result<Self, JetError> {
        let space = VariableSpace::graph_coords(signature.m(), signature.d());
        if !same_space(r.space(), &space) {
            return Err(JetError::Series(crate::error::SeriesError::SpaceMismatch));
        }
        if r.len() != signature.d() {
            return Err(JetError::InvalidSignature(format!(
                "germ has {} components, signature demands d = {}",
                r.len(),
                signature.d()
            )));
        }
        if r.order() != signature.k() {
            return Err(JetError::Series(crate::error::SeriesError::OrderMismatch {
                left: r.order(),
                right: signature.k(),
            }));
        }
        if r.mode() != CoeffMode::Exact {
            return Err(JetError::ExactModeRequired);
        }
        for comp in r.iter() {
            for (_, c) in comp.terms() {
                if !c.is_real() {
                    return Err(JetError::Series(
                        crate::error::SeriesError::NonRealCoefficient,
                    ));
                }
            }
            if let Some(min) = comp.min_degree() {
                if min < 2 {
                    return Err(JetError::GermOutOfRange);
                }
            }
        }
        Ok(GraphGerm { signature, r })
    }

    pub fn signature(&self) -> &CrSignature {
        &self.signature
    }

    pub fn r(&self) -> &SeriesVector {
        &self.r
    }
}

/// Identity-like embedding jet: f_i = z_i (zero past m), g_j = w_j.
pub fn identity_map(sig: &CrSignature) -> Result<MapJet, JetError> {
    let space = VariableSpace::holomorphic_jet(sig.m(), sig.d());
    let k = sig.k();
    let mut f = Vec::with_capacity(sig.m_prime());
    for i in 0..sig.m_prime() {
        if i < sig.m() {
            f.push(crate::series::TruncatedSeries::variable(
                &space,
                i,
                k,
                CoeffMode::Exact,
            )?);
        } else {
            f.push(crate::series::TruncatedSeries::zero(
                &space,
                k,
                CoeffMode::Exact,
            )?);
        }
    }
    let mut g = Vec::with_capacity(sig.d());
    for j in 0..sig.d() {
        g.push(crate::series::TruncatedSeries::variable(
            &space,
            sig.m() + j,
            k,
            CoeffMode::Exact,
        )?);
    }
    MapJet::new(*sig, SeriesVector::new(f)?, SeriesVector::new(g)?)
}
