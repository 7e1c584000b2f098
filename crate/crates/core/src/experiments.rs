//! Randomized verification harness.
//!
//! Three experiments run against the pullback pipeline: seeded sampling of
//! normalized map jets and conjugation-symmetric models, the truncation
//! stability check (order-≤k output coefficients must be bit-identical under
//! perturbations of input coefficients above order k), and a finite
//! difference Jacobian of the coefficient map at sampled points. The
//! pipeline itself always runs exact; floats enter only when the Jacobian is
//! assembled for singular values, so the rank estimate carries no arithmetic
//! noise beyond the differencing.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coeff::{rational_to_f64, CoeffMode, Coefficient};
use crate::error::{ExperimentError, JetError};
use crate::jets::{jet_pullback, AlgebraicModel, CrSignature, MapJet};
use crate::series::{weighted_norm, MultiIndex, SeriesVector, TruncatedSeries};
use crate::space::VariableSpace;

pub const DEFAULT_FD_STEP: f64 = 1e-6;
pub const DEFAULT_SV_REL_TOL: f64 = 1e-8;

/// One experiment run: what to sample, how much, and the float knobs for the
/// Jacobian. Everything downstream is a pure function of this struct.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub signature: CrSignature,
    pub seed: u64,
    pub trials: u32,
    /// Max |numerator| and denominator for sampled rationals; 0 draws the
    /// deterministic minimal point.
    pub coefficient_bound: u64,
    pub fd_step: f64,
    pub sv_rel_tol: f64,
}

impl ExperimentConfig {
    pub fn new(
        signature: CrSignature,
        seed: u64,
        trials: u32,
        coefficient_bound: u64,
    ) -> Result<Self, ExperimentError> {
        let config = ExperimentConfig {
            signature,
            seed,
            trials,
            coefficient_bound,
            fd_step: DEFAULT_FD_STEP,
            sv_rel_tol: DEFAULT_SV_REL_TOL,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_steps(mut self, fd_step: f64, sv_rel_tol: f64) -> Result<Self, ExperimentError> {
        self.fd_step = fd_step;
        self.sv_rel_tol = sv_rel_tol;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials < 1 {
            return Err(ExperimentError::InvalidConfig(
                "trials must be at least 1".into(),
            ));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(ExperimentError::InvalidConfig(
                "fd_step must be positive and finite".into(),
            ));
        }
        if !(self.sv_rel_tol > 0.0 && self.sv_rel_tol < 1.0) {
            return Err(ExperimentError::InvalidConfig(
                "sv_rel_tol must lie strictly between 0 and 1".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        #[derive(serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        struct SignatureDoc {
            m: usize,
            d: usize,
            m_prime: usize,
            nu: u32,
            k: u32,
        }
        #[derive(serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        struct ConfigDoc {
            signature: SignatureDoc,
            seed: u64,
            trials: u32,
            coefficient_bound: u64,
            fd_step: Option<f64>,
            sv_rel_tol: Option<f64>,
        }
        let doc: ConfigDoc = serde_json::from_str(text)
            .map_err(|e| ExperimentError::InvalidConfig(e.to_string()))?;
        let s = doc.signature;
        let signature = CrSignature::new(s.m, s.d, s.m_prime, s.nu, s.k)?;
        ExperimentConfig::new(signature, doc.seed, doc.trials, doc.coefficient_bound)?
            .with_steps(
                doc.fd_step.unwrap_or(DEFAULT_FD_STEP),
                doc.sv_rel_tol.unwrap_or(DEFAULT_SV_REL_TOL),
            )
    }
}

/// Outcome of the truncation stability check.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub signature: CrSignature,
    pub seed: u64,
    pub trials: u32,
    pub failures: u32,
    /// Largest weighted norm of any order-≤k output difference; exact zero
    /// on every valid run.
    pub max_delta: BigRational,
    /// Trials where the converse probe (one random order-≤k input
    /// coefficient nudged) changed the output. Expected ≥ 1.
    pub probe_changes: u32,
}

impl StabilityReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "signature": signature_json(&self.signature),
            "seed": self.seed,
            "trials": self.trials,
            "failures": self.failures,
            "max_delta": self.max_delta.to_string(),
            "probe_changes": self.probe_changes,
        })
    }
}

/// Numerical rank of the coefficient map's Jacobian at one sampled point.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub signature: CrSignature,
    pub seed: u64,
    pub trial: u32,
    pub jacobian_rows: usize,
    pub jacobian_cols: usize,
    pub numerical_rank: usize,
    pub sigma_max: f64,
    pub sigma_threshold: f64,
}

impl RankReport {
    /// Rank strictly below the row count: the image misses directions.
    pub fn rank_deficient(&self) -> bool {
        self.numerical_rank < self.jacobian_rows
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "signature": signature_json(&self.signature),
            "seed": self.seed,
            "trial": self.trial,
            "jacobian_rows": self.jacobian_rows,
            "jacobian_cols": self.jacobian_cols,
            "numerical_rank": self.numerical_rank,
            "sigma_max": self.sigma_max,
            "sigma_threshold": self.sigma_threshold,
            "rank_deficient": self.rank_deficient(),
        })
    }
}

fn signature_json(sig: &CrSignature) -> serde_json::Value {
    serde_json::json!({
        "m": sig.m(),
        "d": sig.d(),
        "m_prime": sig.m_prime(),
        "nu": sig.nu(),
        "k": sig.k(),
    })
}

// Distinct RNG streams so map, model, and perturbation draws never
// interleave.
const STREAM_MAP: u64 = 1;
const STREAM_MODEL: u64 = 2;
const STREAM_PERTURB: u64 = 3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(seed: u64, stream: u64, trial: u32) -> ChaCha8Rng {
    let mixed = splitmix64(seed ^ splitmix64(stream.wrapping_add(splitmix64(trial as u64))));
    ChaCha8Rng::seed_from_u64(mixed)
}

fn sample_rational(rng: &mut ChaCha8Rng, bound: u64) -> BigRational {
    if bound == 0 {
        return BigRational::zero();
    }
    let b = bound.min(i64::MAX as u64) as i64;
    let num = rng.random_range(-b..=b);
    let den = rng.random_range(1..=b);
    BigRational::new(num.into(), den.into())
}

fn sample_coefficient(rng: &mut ChaCha8Rng, bound: u64) -> Coefficient {
    let re = sample_rational(rng, bound);
    let im = sample_rational(rng, bound);
    Coefficient::from_rationals(re, im)
}

/// All exponent vectors over n variables with total degree in lo..=hi, in a
/// fixed deterministic order.
fn monomials(n: usize, lo: u32, hi: u32) -> Vec<MultiIndex> {
    fn emit(pos: usize, remaining: u32, exps: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if pos + 1 == exps.len() {
            exps[pos] = remaining;
            out.push(MultiIndex::new(exps).expect("degree within bounds"));
            exps[pos] = 0;
            return;
        }
        for e in (0..=remaining).rev() {
            exps[pos] = e;
            emit(pos + 1, remaining - e, exps, out);
        }
        exps[pos] = 0;
    }
    let mut out = Vec::new();
    let mut exps = vec![0u32; n];
    for deg in lo..=hi {
        emit(0, deg, &mut exps, &mut out);
    }
    out
}

/// Exponent vector with every variable swapped for its conjugate partner.
fn conjugate_swap(space: &VariableSpace, idx: &MultiIndex) -> MultiIndex {
    let exps = idx.exponents();
    let mut out = vec![0u32; exps.len()];
    for (i, e) in exps.iter().enumerate() {
        let j = space.conj_of(i).expect("fully paired space");
        out[j] = *e;
    }
    MultiIndex::new(&out).expect("degree preserved")
}

fn draw_map(
    rng: &mut ChaCha8Rng,
    sig: &CrSignature,
    bound: u64,
    pin_linear: bool,
) -> Result<MapJet, JetError> {
    let space = VariableSpace::holomorphic_jet(sig.m(), sig.d());
    let k = sig.k();
    let n = space.len();
    let f_monos = monomials(n, 1, k);
    let g_monos = monomials(n, 2, k);
    let mut f = Vec::with_capacity(sig.m_prime());
    for comp in 0..sig.m_prime() {
        let mut terms = Vec::with_capacity(f_monos.len());
        for idx in &f_monos {
            let c = sample_coefficient(rng, bound);
            // Pinning overwrites the z-linear block with the identity
            // embedding, making the differential full rank by construction.
            if pin_linear && idx.total_degree() == 1 {
                let var = idx.exponents().iter().position(|e| *e == 1).unwrap();
                if var < sig.m() {
                    let pinned = if comp == var {
                        Coefficient::one(CoeffMode::Exact)
                    } else {
                        Coefficient::zero(CoeffMode::Exact)
                    };
                    terms.push((idx.clone(), pinned));
                    continue;
                }
            }
            terms.push((idx.clone(), c));
        }
        f.push(TruncatedSeries::from_terms(
            &space,
            k,
            CoeffMode::Exact,
            terms,
        )?);
    }
    let mut g = Vec::with_capacity(sig.d());
    for j in 0..sig.d() {
        let mut terms: Vec<(MultiIndex, Coefficient)> = g_monos
            .iter()
            .map(|idx| (idx.clone(), sample_coefficient(rng, bound)))
            .collect();
        terms.push((
            MultiIndex::unit(n, sig.m() + j),
            Coefficient::one(CoeffMode::Exact),
        ));
        g.push(TruncatedSeries::from_terms(
            &space,
            k,
            CoeffMode::Exact,
            terms,
        )?);
    }
    MapJet::new(*sig, SeriesVector::new(f)?, SeriesVector::new(g)?)
}

pub fn sample_map(config: &ExperimentConfig) -> Result<MapJet, ExperimentError> {
    sample_map_trial(config, 0)
}

/// Deterministic-from-(seed, trial) normalized map jet with full-rank
/// differential. Degenerate draws are rejected and resampled; if the bound
/// cannot produce a nondegenerate linear part, the z-linear block is pinned
/// to the identity embedding instead.
pub fn sample_map_trial(config: &ExperimentConfig, trial: u32) -> Result<MapJet, ExperimentError> {
    let mut rng = rng_for(config.seed, STREAM_MAP, trial);
    if config.coefficient_bound > 0 {
        for _ in 0..64 {
            let jet = draw_map(&mut rng, &config.signature, config.coefficient_bound, false)?;
            if jet.differential_full_rank() {
                return Ok(jet);
            }
        }
    }
    let jet = draw_map(&mut rng, &config.signature, config.coefficient_bound, true)?;
    debug_assert!(jet.differential_full_rank());
    Ok(jet)
}

fn draw_model(
    rng: &mut ChaCha8Rng,
    sig: &CrSignature,
    bound: u64,
) -> Result<AlgebraicModel, JetError> {
    let space = VariableSpace::doubled(sig.m_prime(), sig.d());
    let nu = sig.nu();
    let monos = monomials(space.len(), 2, nu);
    let mut comps = Vec::with_capacity(sig.d());
    for _ in 0..sig.d() {
        let mut terms = Vec::new();
        for idx in &monos {
            let swapped = conjugate_swap(&space, idx);
            match swapped.cmp(idx) {
                // Each orbit is sampled once, at its smaller representative.
                Ordering::Less => continue,
                Ordering::Equal => {
                    let c = sample_rational(rng, bound);
                    terms.push((
                        idx.clone(),
                        Coefficient::from_rationals(c, BigRational::zero()),
                    ));
                }
                Ordering::Greater => {
                    let c = sample_coefficient(rng, bound);
                    terms.push((swapped, c.conj()));
                    terms.push((idx.clone(), c));
                }
            }
        }
        comps.push(TruncatedSeries::from_terms(
            &space,
            nu,
            CoeffMode::Exact,
            terms,
        )?);
    }
    AlgebraicModel::new(*sig, SeriesVector::new(comps)?)
}

pub fn sample_model(config: &ExperimentConfig) -> Result<AlgebraicModel, ExperimentError> {
    sample_model_trial(config, 0)
}

/// Deterministic-from-(seed, trial) model: real coefficients sampled on the
/// conjugation-orbit basis, so reality holds by construction.
pub fn sample_model_trial(
    config: &ExperimentConfig,
    trial: u32,
) -> Result<AlgebraicModel, ExperimentError> {
    let mut rng = rng_for(config.seed, STREAM_MODEL, trial);
    Ok(draw_model(&mut rng, &config.signature, config.coefficient_bound)?)
}

/// Add sampled terms of degree lo..=hi to every component of F, leaving the
/// linear normalization untouched.
fn perturb_map_high(
    rng: &mut ChaCha8Rng,
    map: &MapJet,
    lo: u32,
    hi: u32,
    bound: u64,
) -> Result<MapJet, JetError> {
    let space = map.f().space();
    let k = map.f().order();
    let monos = monomials(space.len(), lo, hi.min(k));
    let mut delta = |base: &TruncatedSeries| -> Result<TruncatedSeries, JetError> {
        let terms: Vec<_> = monos
            .iter()
            .map(|idx| (idx.clone(), sample_coefficient(rng, bound)))
            .collect();
        Ok(base.add(&TruncatedSeries::from_terms(
            space,
            k,
            CoeffMode::Exact,
            terms,
        )?)?)
    };
    let f: Vec<_> = map.f().iter().map(&mut delta).collect::<Result<_, _>>()?;
    let g: Vec<_> = map.g().iter().map(&mut delta).collect::<Result<_, _>>()?;
    MapJet::new(
        *map.signature(),
        SeriesVector::new(f)?,
        SeriesVector::new(g)?,
    )
}

/// Add sampled conjugation-symmetric terms of degree lo..=hi to the model.
fn perturb_model_high(
    rng: &mut ChaCha8Rng,
    model: &AlgebraicModel,
    lo: u32,
    hi: u32,
    bound: u64,
) -> Result<AlgebraicModel, JetError> {
    let sig = *model.signature();
    let space = model.rho_tilde().space().clone();
    let order = model.rho_tilde().order();
    let monos = monomials(space.len(), lo, hi);
    let mut comps = Vec::with_capacity(sig.d());
    for base in model.rho_tilde().iter() {
        let mut terms = Vec::new();
        for idx in &monos {
            let swapped = conjugate_swap(&space, idx);
            match swapped.cmp(idx) {
                Ordering::Less => continue,
                Ordering::Equal => {
                    let c = sample_rational(rng, bound);
                    terms.push((
                        idx.clone(),
                        Coefficient::from_rationals(c, BigRational::zero()),
                    ));
                }
                Ordering::Greater => {
                    let c = sample_coefficient(rng, bound);
                    terms.push((swapped, c.conj()));
                    terms.push((idx.clone(), c));
                }
            }
        }
        comps.push(base.add(&TruncatedSeries::from_terms(
            &space,
            order,
            CoeffMode::Exact,
            terms,
        )?)?);
    }
    AlgebraicModel::new(sig, SeriesVector::new(comps)?)
}

/// Nudge one random coefficient of f of degree ≤ max_degree by 1: the
/// converse probe that low-order inputs do influence the output.
fn perturb_map_low(
    rng: &mut ChaCha8Rng,
    map: &MapJet,
    max_degree: u32,
) -> Result<MapJet, JetError> {
    let space = map.f().space();
    let k = map.f().order();
    let monos = monomials(space.len(), 1, max_degree.min(k));
    let comp = rng.random_range(0..map.f().len());
    let idx = monos[rng.random_range(0..monos.len())].clone();
    let bump = TruncatedSeries::monomial(
        space,
        &idx.exponents(),
        Coefficient::one(CoeffMode::Exact),
        k,
    )?;
    let mut f: Vec<_> = map.f().components().to_vec();
    f[comp] = f[comp].add(&bump)?;
    MapJet::new(*map.signature(), SeriesVector::new(f)?, map.g().clone())
}

/// Per trial: sample (F, model) three orders above k, pull back, perturb
/// only the above-k input coefficients, pull back again, and demand
/// bit-identical order-≤k output. Also probes the converse: some order-≤k
/// input nudge must change the output in at least one trial.
pub fn key_observation_check(
    config: &ExperimentConfig,
) -> Result<StabilityReport, ExperimentError> {
    let sig = config.signature;
    let k = sig.k();
    let work = sig.at_order(k + 3)?;
    let work_config = ExperimentConfig {
        signature: work,
        ..*config
    };

    let mut failures = 0u32;
    let mut first_bad = None;
    let mut max_delta = BigRational::zero();
    let mut probe_changes = 0u32;
    for trial in 0..config.trials {
        let map = sample_map_trial(&work_config, trial)?;
        let model = sample_model_trial(&work_config, trial)?;
        let base = jet_pullback(&map, &model)?.germ.r().truncate(k)?;

        let mut rng = rng_for(config.seed, STREAM_PERTURB, trial);
        let map_high = perturb_map_high(&mut rng, &map, k + 1, k + 3, config.coefficient_bound)?;
        let model_high = if sig.nu() > k {
            perturb_model_high(
                &mut rng,
                &model,
                k + 1,
                sig.nu().min(k + 3),
                config.coefficient_bound,
            )?
        } else {
            model.clone()
        };
        let perturbed = jet_pullback(&map_high, &model_high)?.germ.r().truncate(k)?;
        if perturbed != base {
            failures += 1;
            first_bad.get_or_insert(trial);
            let delta = weighted_norm(&base.sub(&perturbed)?, &BigRational::one())?;
            if delta > max_delta {
                max_delta = delta;
            }
        }

        let probed = perturb_map_low(&mut rng, &map, k)?;
        if jet_pullback(&probed, &model)?.germ.r().truncate(k)? != base {
            probe_changes += 1;
        }
    }
    if failures > 0 {
        return Err(ExperimentError::StabilityViolation {
            seed: config.seed,
            trial: first_bad.unwrap(),
            failures,
        });
    }
    Ok(StabilityReport {
        signature: sig,
        seed: config.seed,
        trials: config.trials,
        failures,
        max_delta,
        probe_changes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Re,
    Im,
}

/// One real coordinate of the source: a real or imaginary part of a free F
/// coefficient, or a conjugation-orbit coordinate of the model.
#[derive(Debug, Clone)]
enum Coord {
    MapF {
        comp: usize,
        idx: MultiIndex,
        part: Part,
    },
    MapG {
        comp: usize,
        idx: MultiIndex,
        part: Part,
    },
    ModelSelf {
        comp: usize,
        idx: MultiIndex,
    },
    ModelPair {
        comp: usize,
        idx: MultiIndex,
        swapped: MultiIndex,
        part: Part,
    },
}

/// Every free real coordinate of (F, model), in a fixed order. The length
/// equals the dimension module's exact source count.
fn source_coordinates(sig: &CrSignature) -> Vec<Coord> {
    let jet = VariableSpace::holomorphic_jet(sig.m(), sig.d());
    let f_monos = monomials(jet.len(), 1, sig.k());
    let g_monos = monomials(jet.len(), 2, sig.k());
    let mut coords = Vec::new();
    for comp in 0..sig.m_prime() {
        for idx in &f_monos {
            for part in [Part::Re, Part::Im] {
                coords.push(Coord::MapF {
                    comp,
                    idx: idx.clone(),
                    part,
                });
            }
        }
    }
    for comp in 0..sig.d() {
        for idx in &g_monos {
            for part in [Part::Re, Part::Im] {
                coords.push(Coord::MapG {
                    comp,
                    idx: idx.clone(),
                    part,
                });
            }
        }
    }
    let doubled = VariableSpace::doubled(sig.m_prime(), sig.d());
    let m_monos = monomials(doubled.len(), 2, sig.nu());
    for comp in 0..sig.d() {
        for idx in &m_monos {
            let swapped = conjugate_swap(&doubled, idx);
            match swapped.cmp(idx) {
                Ordering::Less => continue,
                Ordering::Equal => coords.push(Coord::ModelSelf {
                    comp,
                    idx: idx.clone(),
                }),
                Ordering::Greater => {
                    for part in [Part::Re, Part::Im] {
                        coords.push(Coord::ModelPair {
                            comp,
                            idx: idx.clone(),
                            swapped: swapped.clone(),
                            part,
                        });
                    }
                }
            }
        }
    }
    coords
}

/// Output entries of the coefficient map: (component, monomial) for every
/// germ coefficient of degree 2..k.
fn germ_rows(sig: &CrSignature) -> Vec<(usize, MultiIndex)> {
    let n = 2 * sig.m() + sig.d();
    let monos = monomials(n, 2, sig.k());
    let mut rows = Vec::with_capacity(sig.d() * monos.len());
    for comp in 0..sig.d() {
        for idx in &monos {
            rows.push((comp, idx.clone()));
        }
    }
    rows
}

fn coordinate_value(map: &MapJet, model: &AlgebraicModel, coord: &Coord) -> BigRational {
    let pick = |c: &Coefficient, part: Part| -> BigRational {
        let r = match part {
            Part::Re => c.exact_re(),
            Part::Im => c.exact_im(),
        };
        r.cloned().unwrap_or_else(BigRational::zero)
    };
    match coord {
        Coord::MapF { comp, idx, part } => pick(
            &map.f().component(*comp).coefficient_at(&idx.exponents()),
            *part,
        ),
        Coord::MapG { comp, idx, part } => pick(
            &map.g().component(*comp).coefficient_at(&idx.exponents()),
            *part,
        ),
        Coord::ModelSelf { comp, idx } => pick(
            &model
                .rho_tilde()
                .component(*comp)
                .coefficient_at(&idx.exponents()),
            Part::Re,
        ),
        Coord::ModelPair {
            comp, idx, part, ..
        } => pick(
            &model
                .rho_tilde()
                .component(*comp)
                .coefficient_at(&idx.exponents()),
            *part,
        ),
    }
}

/// The point displaced by h along one coordinate, rebuilt through the
/// validating constructors.
fn displaced(
    map: &MapJet,
    model: &AlgebraicModel,
    coord: &Coord,
    h: &BigRational,
) -> Result<(MapJet, AlgebraicModel), JetError> {
    let complex = |part: Part| -> Coefficient {
        match part {
            Part::Re => Coefficient::from_rationals(h.clone(), BigRational::zero()),
            Part::Im => Coefficient::from_rationals(BigRational::zero(), h.clone()),
        }
    };
    match coord {
        Coord::MapF { comp, idx, part } => {
            let space = map.f().space();
            let k = map.f().order();
            let bump =
                TruncatedSeries::monomial(space, &idx.exponents(), complex(*part), k)?;
            let mut f = map.f().components().to_vec();
            f[*comp] = f[*comp].add(&bump)?;
            Ok((
                MapJet::new(*map.signature(), SeriesVector::new(f)?, map.g().clone())?,
                model.clone(),
            ))
        }
        Coord::MapG { comp, idx, part } => {
            let space = map.g().space();
            let k = map.g().order();
            let bump =
                TruncatedSeries::monomial(space, &idx.exponents(), complex(*part), k)?;
            let mut g = map.g().components().to_vec();
            g[*comp] = g[*comp].add(&bump)?;
            Ok((
                MapJet::new(*map.signature(), map.f().clone(), SeriesVector::new(g)?)?,
                model.clone(),
            ))
        }
        Coord::ModelSelf { comp, idx } => {
            let space = model.rho_tilde().space();
            let order = model.rho_tilde().order();
            let bump = TruncatedSeries::monomial(
                space,
                &idx.exponents(),
                Coefficient::from_rationals(h.clone(), BigRational::zero()),
                order,
            )?;
            let mut comps = model.rho_tilde().components().to_vec();
            comps[*comp] = comps[*comp].add(&bump)?;
            Ok((
                map.clone(),
                AlgebraicModel::new(*model.signature(), SeriesVector::new(comps)?)?,
            ))
        }
        Coord::ModelPair {
            comp,
            idx,
            swapped,
            part,
        } => {
            let space = model.rho_tilde().space();
            let order = model.rho_tilde().order();
            let c = complex(*part);
            let bump = TruncatedSeries::monomial(space, &idx.exponents(), c.clone(), order)?
                .add(&TruncatedSeries::monomial(
                    space,
                    &swapped.exponents(),
                    c.conj(),
                    order,
                )?)?;
            let mut comps = model.rho_tilde().components().to_vec();
            comps[*comp] = comps[*comp].add(&bump)?;
            Ok((
                map.clone(),
                AlgebraicModel::new(*model.signature(), SeriesVector::new(comps)?)?,
            ))
        }
    }
}

fn germ_vector(
    map: &MapJet,
    model: &AlgebraicModel,
    rows: &[(usize, MultiIndex)],
) -> Result<Vec<BigRational>, JetError> {
    let result = jet_pullback(map, model)?;
    Ok(rows
        .iter()
        .map(|(comp, idx)| {
            result
                .germ
                .r()
                .component(*comp)
                .coefficient(idx)
                .and_then(|c| c.exact_re().cloned())
                .unwrap_or_else(BigRational::zero)
        })
        .collect())
}

/// Exact central difference quotient along one coordinate; only the caller
/// converts to floats.
fn fd_column(
    map: &MapJet,
    model: &AlgebraicModel,
    coord: &Coord,
    h: &BigRational,
    rows: &[(usize, MultiIndex)],
) -> Result<Vec<BigRational>, JetError> {
    let (map_p, model_p) = displaced(map, model, coord, h)?;
    let (map_m, model_m) = displaced(map, model, coord, &-h.clone())?;
    let plus = germ_vector(&map_p, &model_p, rows)?;
    let minus = germ_vector(&map_m, &model_m, rows)?;
    let two_h = BigRational::from_integer(2.into()) * h;
    Ok(plus
        .into_iter()
        .zip(minus)
        .map(|(p, q)| (p - q) / &two_h)
        .collect())
}

/// Exact dyadic step fd_step·max(1, |value|): every f64 is a dyadic
/// rational, so the displaced points stay exact.
fn step_size(fd_step: f64, value: &BigRational) -> BigRational {
    let base = BigRational::from_float(fd_step).expect("finite step");
    let mag = value.abs();
    if mag > BigRational::one() {
        base * mag
    } else {
        base
    }
}

/// Assemble the full Jacobian of the coefficient map at (map, model) by
/// exact central differences, then count singular values over the relative
/// threshold.
pub fn jacobian_rank(
    config: &ExperimentConfig,
    map: &MapJet,
    model: &AlgebraicModel,
    trial: u32,
) -> Result<RankReport, ExperimentError> {
    let sig = config.signature;
    let coords = source_coordinates(&sig);
    let rows_enum = germ_rows(&sig);
    let (rows, cols) = (rows_enum.len(), coords.len());

    let mut data = vec![0.0f64; rows * cols];
    for (j, coord) in coords.iter().enumerate() {
        let h = step_size(config.fd_step, &coordinate_value(map, model, coord));
        let column = match fd_column(map, model, coord, &h, &rows_enum) {
            Ok(c) => c,
            // A probe point straddled an invalid configuration: shrink the
            // step once, then report the column as degenerate.
            Err(_) => {
                let shrunk = &h / BigRational::from_integer(16.into());
                fd_column(map, model, coord, &shrunk, &rows_enum).map_err(|source| {
                    ExperimentError::DegenerateEvaluation { column: j, source }
                })?
            }
        };
        for (i, v) in column.iter().enumerate() {
            data[i * cols + j] = rational_to_f64(v);
        }
    }

    let matrix = DMatrix::from_row_slice(rows, cols, &data);
    let singular = matrix.singular_values();
    let sigma_max = singular.iter().cloned().fold(0.0f64, f64::max);
    let sigma_threshold = config.sv_rel_tol * sigma_max;
    let numerical_rank = if sigma_max == 0.0 {
        0
    } else {
        singular.iter().filter(|s| **s >= sigma_threshold).count()
    };
    Ok(RankReport {
        signature: sig,
        seed: config.seed,
        trial,
        jacobian_rows: rows,
        jacobian_cols: cols,
        numerical_rank,
        sigma_max,
        sigma_threshold,
    })
}

/// Sample one point per trial and rank the Jacobian there.
pub fn rank_trials(config: &ExperimentConfig) -> Result<Vec<RankReport>, ExperimentError> {
    (0..config.trials)
        .map(|trial| {
            let map = sample_map_trial(config, trial)?;
            let model = sample_model_trial(config, trial)?;
            jacobian_rank(config, &map, &model, trial)
        })
        .collect()
}
