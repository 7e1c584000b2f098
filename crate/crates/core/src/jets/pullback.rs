//! The pullback pipeline: normalize the linear part of g, expand
//! Im g + ρ̃(f, f̄, g, ḡ) in real coordinates, and solve v = r(x, y, u) by
//! fixed-point iteration.

use std::collections::{BTreeMap, HashMap};
#[cfg(test)]
use std::sync::Arc;

use num::rational::BigRational;
use num::{One, Zero};

use crate::coeff::{CoeffMode, Coefficient};
use crate::error::JetError;
use crate::jets::{AlgebraicModel, CrSignature, GraphGerm, MapJet};
use crate::series::{BindingSet, MultiIndex, SeriesVector, TruncatedSeries};
use crate::space::{same_space, VariableSpace};

/// Everything the pullback produces: the defining d-tuple v − r′(x,y,u,v),
/// the solved germ, and how many iterations the solver needed.
#[derive(Debug, Clone, PartialEq)]
pub struct PullbackResult {
    pub defining: SeriesVector,
    pub germ: GraphGerm,
    pub iterations_used: u32,
}

/// Invert an exact real matrix by Gauss-Jordan elimination.
fn invert(mat: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = mat.len();
    let mut a: Vec<Vec<BigRational>> = mat.to_vec();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] /= &p;
            inv[col][j] /= &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..n {
                let t = &factor * &a[col][j];
                a[r][j] -= t;
                let t = &factor * &inv[col][j];
                inv[r][j] -= t;
            }
        }
    }
    Some(inv)
}

fn is_identity(mat: &[Vec<BigRational>]) -> bool {
    mat.iter().enumerate().all(|(i, row)| {
        row.iter()
            .enumerate()
            .all(|(j, e)| if i == j { e.is_one() } else { e.is_zero() })
    })
}

/// Exact linear combination Σ coeffs[l] · series[l].
fn linear_combination(
    coeffs: &[BigRational],
    series: &[TruncatedSeries],
) -> Result<TruncatedSeries, JetError> {
    let mut acc: Option<TruncatedSeries> = None;
    for (c, s) in coeffs.iter().zip(series.iter()) {
        let scaled = s.scale(&Coefficient::from_rationals(c.clone(), BigRational::zero()))?;
        acc = Some(match acc {
            None => scaled,
            Some(a) => a.add(&scaled)?,
        });
    }
    Ok(acc.expect("nonempty combination"))
}

/// Replace g by B⁻¹g and rewrite the model so the preimage is unchanged:
/// ρ̃*(z′, z̄′, w′, w̄′) = B⁻¹ · ρ̃(z′, z̄′, Bw′, Bw̄′).
pub fn normalize_linear_part(
    f_map: &MapJet,
    model: &AlgebraicModel,
) -> Result<(MapJet, AlgebraicModel), JetError> {
    if f_map.signature() != model.signature() {
        return Err(JetError::SignatureMismatch);
    }
    let sig = *f_map.signature();
    let b = f_map.linear_w_matrix()?;
    if is_identity(&b) {
        return Ok((f_map.clone(), model.clone()));
    }
    let b_inv = invert(&b).ok_or(JetError::SingularLinearPart)?;

    let d = sig.d();
    let g_star: Vec<TruncatedSeries> = (0..d)
        .map(|j| linear_combination(&b_inv[j], f_map.g().components()))
        .collect::<Result<_, _>>()?;
    let f_star = MapJet::new(sig, f_map.f().clone(), SeriesVector::new(g_star)?)?;
    debug_assert!(f_star.is_normalized());

    // Bind w_l ↦ Σ_j B[l][j] w_j (and the same for the conjugates) over the
    // model's own space, then push B⁻¹ through the components.
    let m_space = model.rho_tilde().space();
    let order = model.rho_tilde().order();
    let mp = sig.m_prime();
    let mut bindings = BindingSet::new(m_space, order, CoeffMode::Exact)?;
    for l in 0..d {
        let w_row: Vec<TruncatedSeries> = (0..d)
            .map(|j| TruncatedSeries::variable(m_space, 2 * mp + j, order, CoeffMode::Exact))
            .collect::<Result<_, _>>()?;
        let wbar_row: Vec<TruncatedSeries> = (0..d)
            .map(|j| TruncatedSeries::variable(m_space, 2 * mp + d + j, order, CoeffMode::Exact))
            .collect::<Result<_, _>>()?;
        bindings.bind(&format!("w{}", l + 1), linear_combination(&b[l], &w_row)?)?;
        bindings.bind(&format!("~w{}", l + 1), linear_combination(&b[l], &wbar_row)?)?;
    }
    let pushed: Vec<TruncatedSeries> = model
        .rho_tilde()
        .iter()
        .map(|comp| comp.substitute(&bindings))
        .collect::<Result<_, _>>()?;
    let rho_star: Vec<TruncatedSeries> = (0..d)
        .map(|j| linear_combination(&b_inv[j], &pushed))
        .collect::<Result<_, _>>()?;
    let model_star = AlgebraicModel::new(sig, SeriesVector::new(rho_star)?)?;
    Ok((f_star, model_star))
}

/// Expand Im g + ρ̃(f, f̄, g, ḡ) in real coordinates (x, y, u, v). For a
/// normalized map the result has the graph shape v − r′(x, y, u, v).
pub fn pullback_defining_series(
    f_map: &MapJet,
    model: &AlgebraicModel,
) -> Result<SeriesVector, JetError> {
    if f_map.signature() != model.signature() {
        return Err(JetError::SignatureMismatch);
    }
    if !f_map.is_normalized() {
        return Err(JetError::NotNormalized);
    }
    let sig = *f_map.signature();
    let (m, d, k) = (sig.m(), sig.d(), sig.k());
    let dsrc = VariableSpace::doubled(m, d);

    let inject_all = |vec: &SeriesVector| -> Result<Vec<TruncatedSeries>, JetError> {
        vec.iter().map(|s| Ok(s.inject(&dsrc)?)).collect()
    };
    let f_in = inject_all(f_map.f())?;
    let g_in = inject_all(f_map.g())?;
    let f_bar: Vec<TruncatedSeries> = f_in
        .iter()
        .map(|s| s.conjugate())
        .collect::<Result<_, _>>()?;
    let g_bar: Vec<TruncatedSeries> = g_in
        .iter()
        .map(|s| s.conjugate())
        .collect::<Result<_, _>>()?;

    let mut bindings = BindingSet::new(&dsrc, k, CoeffMode::Exact)?;
    for i in 0..sig.m_prime() {
        bindings.bind(&format!("z{}", i + 1), f_in[i].clone())?;
        bindings.bind(&format!("~z{}", i + 1), f_bar[i].clone())?;
    }
    for j in 0..d {
        bindings.bind(&format!("w{}", j + 1), g_in[j].clone())?;
        bindings.bind(&format!("~w{}", j + 1), g_bar[j].clone())?;
    }

    let minus_half_i =
        Coefficient::from_rationals(BigRational::zero(), BigRational::new((-1).into(), 2.into()));
    let mut components = Vec::with_capacity(d);
    for j in 0..d {
        let rho_pulled = model.rho_tilde().component(j).substitute(&bindings)?;
        let im_g = g_in[j].sub(&g_bar[j])?.scale(&minus_half_i)?;
        let total = im_g.add(&rho_pulled)?;
        let real = total.realify()?;
        for (_, c) in real.terms() {
            if !c.is_real() {
                return Err(JetError::InternalRealityFailure);
            }
        }
        components.push(real);
    }
    Ok(SeriesVector::new(components)?)
}

/// Solve v = r(x, y, u) from the defining tuple v − r′(x, y, u, v) by the
/// iteration v⁰ = 0, v^{j+1} = r′(x, y, u, v^j), all at order k. Stops when
/// two consecutive iterates agree; fails loudly after k+1 applications.
pub fn graph_iteration(
    defining: &SeriesVector,
    sig: &CrSignature,
) -> Result<PullbackResult, JetError> {
    let (m, d, k) = (sig.m(), sig.d(), sig.k());
    let rsp = VariableSpace::real_coords(m, d);
    if !same_space(defining.space(), &rsp) {
        return Err(JetError::Series(crate::error::SeriesError::SpaceMismatch));
    }
    if defining.len() != d {
        return Err(JetError::InvalidSignature(format!(
            "defining tuple has {} components, signature demands d = {}",
            defining.len()
        , d)));
    }
    if defining.order() != k {
        return Err(JetError::Series(crate::error::SeriesError::OrderMismatch {
            left: defining.order(),
            right: k,
        }));
    }
    if defining.mode() != CoeffMode::Exact {
        return Err(JetError::ExactModeRequired);
    }

    // Split off the leading v_j and check r' = O(2).
    let n = rsp.len();
    let one = Coefficient::one(CoeffMode::Exact);
    let mut r_prime = Vec::with_capacity(d);
    for (j, comp) in defining.iter().enumerate() {
        let v_idx = MultiIndex::unit(n, 2 * m + d + j);
        if comp.coefficient(&v_idx) != Some(&one) {
            return Err(JetError::NotInGraphShape);
        }
        let v_mono = TruncatedSeries::monomial(&rsp, &v_idx.exponents(), one.clone(), k)?;
        let rp = v_mono.sub(comp)?;
        if let Some(min) = rp.min_degree() {
            if min < 2 {
                return Err(JetError::NotInGraphShape);
            }
        }
        r_prime.push(rp);
    }

    let gsp = VariableSpace::graph_coords(m, d);
    let n_graph = gsp.len();

    // Split each r'_j into its v-free base and its v-dependent terms, the
    // latter grouped by v-exponent pattern. The iteration advances by exact
    // delta corrections: r'(cur) − r'(old) telescoped over v components,
    //   ∏ cur^e − ∏ old^e = Σ_l (∏_{l'<l} cur^e)(cur_l^e − old_l^e)(∏_{l'>l} old^e),
    // which agrees coefficient-for-coefficient with resubstituting from
    // scratch but only pays for the change, whose min degree climbs with
    // every application. The product depends only on the pattern, so it is
    // computed once per group and shifted into each member term.
    struct GroupMember {
        component: usize,
        coeff: Coefficient,
        shift: MultiIndex,
        shift_total: u32,
    }
    let mut base_terms: Vec<Vec<(MultiIndex, Coefficient)>> = vec![Vec::new(); d];
    let mut grouped: BTreeMap<Vec<u32>, Vec<GroupMember>> = BTreeMap::new();
    for (j, rp) in r_prime.iter().enumerate() {
        for (idx, c) in rp.terms() {
            let exps = idx.exponents();
            let (graph_part, v_part) = exps.split_at(n_graph);
            if v_part.iter().all(|e| *e == 0) {
                base_terms[j].push((MultiIndex::new(graph_part)?, c.clone()));
            } else {
                grouped
                    .entry(v_part.to_vec())
                    .or_default()
                    .push(GroupMember {
                        component: j,
                        coeff: c.clone(),
                        shift: MultiIndex::new(graph_part)?,
                        shift_total: graph_part.iter().sum(),
                    });
            }
        }
    }
    let groups: Vec<(Vec<u32>, u32, u32, Vec<GroupMember>)> = grouped
        .into_iter()
        .map(|(vexp, members)| {
            let etotal = vexp.iter().sum();
            let min_shift = members.iter().map(|t| t.shift_total).min().expect("nonempty");
            (vexp, etotal, min_shift, members)
        })
        .collect();
    let mut bases = Vec::with_capacity(d);
    for terms in base_terms {
        bases.push(TruncatedSeries::from_terms(&gsp, k, CoeffMode::Exact, terms)?);
    }

    fn ensure_powers(
        cache: &mut HashMap<u32, TruncatedSeries>,
        base: &TruncatedSeries,
        e: u32,
    ) -> Result<(), JetError> {
        for i in 2..=e {
            if !cache.contains_key(&i) {
                let p = if i == 2 {
                    base.mul(base)?
                } else {
                    cache[&(i - 1)].mul(base)?
                };
                cache.insert(i, p);
            }
        }
        Ok(())
    }
    fn power<'a>(
        cache: &'a HashMap<u32, TruncatedSeries>,
        base: &'a TruncatedSeries,
        e: u32,
    ) -> &'a TruncatedSeries {
        if e == 1 {
            base
        } else {
            &cache[&e]
        }
    }

    let zero = TruncatedSeries::zero(&gsp, k, CoeffMode::Exact)?;
    let mut old: Vec<TruncatedSeries> = vec![zero; d];
    let mut cur = bases;
    let mut powers_old: Vec<HashMap<u32, TruncatedSeries>> = vec![HashMap::new(); d];
    let mut powers_cur: Vec<HashMap<u32, TruncatedSeries>> = vec![HashMap::new(); d];
    let mut iterations_used = None;
    if cur == old {
        iterations_used = Some(0);
    }
    let mut application = 1;
    while iterations_used.is_none() && application <= k {
        application += 1;
        let deltas: Vec<TruncatedSeries> = cur
            .iter()
            .zip(&old)
            .map(|(c, o)| c.sub(o))
            .collect::<Result<_, _>>()?;
        // Every iterate is r' of an O(2) tuple, hence O(2) itself; together
        // with the delta's min degree this bounds any correction from below.
        let min_delta = deltas
            .iter()
            .filter_map(|s| s.min_degree())
            .min()
            .expect("cur != old leaves a nonzero delta");
        let mut corrections: Vec<BTreeMap<MultiIndex, Coefficient>> = vec![BTreeMap::new(); d];
        for (vexp, etotal, min_shift, members) in &groups {
            if min_shift + 2 * (etotal - 1) + min_delta > k {
                continue;
            }
            for lp in 0..d {
                if vexp[lp] >= 2 {
                    ensure_powers(&mut powers_cur[lp], &cur[lp], vexp[lp])?;
                    ensure_powers(&mut powers_old[lp], &old[lp], vexp[lp])?;
                }
            }
            let mut dprod: Option<TruncatedSeries> = None;
            for l in 0..d {
                let e = vexp[l];
                if e == 0 || deltas[l].is_zero() {
                    continue;
                }
                let mut summand = if e == 1 {
                    deltas[l].clone()
                } else {
                    power(&powers_cur[l], &cur[l], e).sub(power(&powers_old[l], &old[l], e))?
                };
                for (lp, &ex) in vexp.iter().enumerate() {
                    if ex == 0 || lp == l || summand.is_zero() {
                        continue;
                    }
                    let factor = if lp < l {
                        power(&powers_cur[lp], &cur[lp], ex)
                    } else {
                        power(&powers_old[lp], &old[lp], ex)
                    };
                    summand = summand.mul(factor)?;
                }
                dprod = Some(match dprod {
                    None => summand,
                    Some(s) => s.add(&summand)?,
                });
            }
            let Some(dprod) = dprod else { continue };
            for member in members {
                for (pi, pc) in dprod.terms() {
                    if pi.total_degree() + member.shift_total > k {
                        break;
                    }
                    let v = pc.mul(&member.coeff);
                    if !v.is_zero() {
                        crate::series::insert_accum(
                            &mut corrections[member.component],
                            pi.sum(&member.shift),
                            v,
                        );
                    }
                }
            }
        }
        let mut all_zero = true;
        let mut next = cur.clone();
        for (j, mut acc) in corrections.into_iter().enumerate() {
            crate::series::sweep_zeros(&mut acc);
            if !acc.is_empty() {
                all_zero = false;
                let correction = TruncatedSeries::from_sorted_map(&gsp, k, CoeffMode::Exact, acc);
                next[j] = next[j].add(&correction)?;
            }
        }
        if all_zero {
            iterations_used = Some(application - 1);
            break;
        }
        old = std::mem::replace(&mut cur, next);
        powers_old = std::mem::replace(&mut powers_cur, vec![HashMap::new(); d]);
    }
    let Some(iterations_used) = iterations_used else {
        return Err(JetError::NoStabilization { iterations: k + 1 });
    };

    let germ = GraphGerm::new(*sig, SeriesVector::new(cur)?)?;
    Ok(PullbackResult {
        defining: defining.clone(),
        germ,
        iterations_used,
    })
}

/// The full finite-dimensional map: normalize, expand in real coordinates,
/// and solve the graph. Output coefficients are polynomial in the input
/// coefficients and their conjugates.
pub fn jet_pullback(f_map: &MapJet, model: &AlgebraicModel) -> Result<PullbackResult, JetError> {
    let (f_star, model_star) = normalize_linear_part(f_map, model)?;
    let defining = pullback_defining_series(&f_star, &model_star)?;
    graph_iteration(&defining, f_map.signature())
}

/// Jet-level witness check: does pulling the model back through F reproduce
/// the given germ at order k?
pub fn is_jet_preimage(
    f_map: &MapJet,
    model: &AlgebraicModel,
    germ: &GraphGerm,
) -> Result<bool, JetError> {
    if f_map.signature() != model.signature() || f_map.signature() != germ.signature() {
        return Err(JetError::SignatureMismatch);
    }
    let result = jet_pullback(f_map, model)?;
    Ok(result.germ == *germ)
}

/// Heisenberg-type model ρ̃ = −(z′₁z̄′₁ + … + z′_{m′}z̄′_{m′}) in the first
/// component, zero elsewhere.
pub fn heisenberg_model(sig: &CrSignature) -> Result<AlgebraicModel, JetError> {
    let sp = VariableSpace::doubled(sig.m_prime(), sig.d());
    let mp = sig.m_prime();
    let mut first = TruncatedSeries::zero(&sp, sig.nu(), CoeffMode::Exact)?;
    for i in 0..mp {
        let mut exps = vec![0u32; sp.len()];
        exps[i] = 1;
        exps[mp + i] = 1;
        first = first.add(&TruncatedSeries::monomial(
            &sp,
            &exps,
            Coefficient::from_integer(-1),
            sig.nu(),
        )?)?;
    }
    let mut comps = vec![first];
    for _ in 1..sig.d() {
        comps.push(TruncatedSeries::zero(&sp, sig.nu(), CoeffMode::Exact)?);
    }
    AlgebraicModel::new(*sig, SeriesVector::new(comps)?)
}

/// The flat model ρ̃ = 0.
pub fn flat_model(sig: &CrSignature) -> Result<AlgebraicModel, JetError> {
    let sp = VariableSpace::doubled(sig.m_prime(), sig.d());
    AlgebraicModel::new(
        *sig,
        SeriesVector::zero(&sp, sig.nu(), CoeffMode::Exact, sig.d())?,
    )
}

#[cfg(test)]
pub(crate) fn model_space(sig: &CrSignature) -> Arc<VariableSpace> {
    VariableSpace::doubled(sig.m_prime(), sig.d())
}
