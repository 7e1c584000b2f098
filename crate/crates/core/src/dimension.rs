//! Exact jet-space dimension counts.
//!
//! Three spaces matter: order-k germ truncations on the source (d real series
//! in 2m+d variables, degrees 2..k), normalized holomorphic map jets into the
//! target (complex coefficients, so real dimension doubles), and real
//! algebraic models of degree at most ν on the target. The counts are exact
//! binomial-coefficient formulas; the coarse asymptotic estimates are
//! reported alongside so the gap is visible. The target count grows like
//! k^{2m+d} while the sources grow like k^n with n = m + d < 2m + d, so for
//! every signature with m ≥ 1 there is a crossover order past which germs
//! outnumber map-and-model pairs.

use num::bigint::BigUint;
use num::integer::binomial;
use num::rational::BigRational;
use num::{BigInt, One};

use crate::error::JetError;
use crate::jets::CrSignature;

/// C(n + k, k): monomials of total degree at most k in n variables,
/// constant included.
fn monomials_up_to(n: u64, k: u64) -> BigUint {
    binomial(BigUint::from(n + k), BigUint::from(k))
}

/// Real dimension of the space of d-tuples of real polynomials of degree
/// 2..k in the 2m+d graph coordinates.
pub(crate) fn count_target(m: u64, d: u64, k: u64) -> BigUint {
    debug_assert!(k >= 1);
    let q = 2 * m + d;
    BigUint::from(d) * (monomials_up_to(q, k) - 1u32 - BigUint::from(q))
}

/// Real dimension of order-k jets of normalized maps: m′ components free of
/// constant terms plus d components free of constant and linear terms, all
/// in n = m + d complex variables, times two for real and imaginary parts.
pub(crate) fn count_maps(m: u64, d: u64, m_prime: u64, k: u64) -> BigUint {
    debug_assert!(k >= 1);
    let n = m + d;
    let free = monomials_up_to(n, k) - 1u32;
    let f_part = BigUint::from(m_prime) * &free;
    let g_part = BigUint::from(d) * (free - BigUint::from(n));
    (f_part + g_part) * 2u32
}

/// Real dimension of the space of models: d real polynomials of degree 2..ν
/// in the 2n′ real coordinates underlying (z′, z̄′, w′, w̄′).
pub(crate) fn count_models(d: u64, n_prime: u64, nu: u64) -> BigUint {
    debug_assert!(nu >= 1);
    BigUint::from(d) * (monomials_up_to(2 * n_prime, nu) - 1u32 - BigUint::from(2 * n_prime))
}

fn factorial(q: u64) -> BigUint {
    (1..=q).map(BigUint::from).fold(BigUint::one(), |a, b| a * b)
}

/// All counts for one signature, with the asymptotic estimates and the
/// explicit lower-bound witness for the target's k^{2m+d} growth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionReport {
    pub signature: CrSignature,
    /// Exact real dimension of the order-k germ space on the source.
    pub dim_target: BigUint,
    /// Exact real dimension of the normalized map-jet space.
    pub dim_source_maps: BigUint,
    /// Exact real dimension of the model space.
    pub dim_source_models: BigUint,
    /// Coarse upper estimate 2n′(k+1)^n for the map jets.
    pub estimate_source_maps: BigUint,
    /// Coarse estimate d(ν+1)^{n′} for the models (undercounts; kept for
    /// comparison, the exact count is what decides the crossover).
    pub estimate_source_models: BigUint,
    /// c = d/(2m+d)!, valid witness for dim_target ≥ c·k^{2m+d} once
    /// k ≥ 2m+d.
    pub growth_constant: BigRational,
    /// floor(c · k^{2m+d}).
    pub target_growth_bound: BigUint,
    /// dim_source_maps + dim_source_models.
    pub source_total: BigUint,
    /// dim_target > source_total at this order.
    pub crossover: bool,
}

pub fn dim_target(sig: &CrSignature) -> BigUint {
    count_target(sig.m() as u64, sig.d() as u64, sig.k() as u64)
}

pub fn dim_source_maps(sig: &CrSignature) -> BigUint {
    count_maps(
        sig.m() as u64,
        sig.d() as u64,
        sig.m_prime() as u64,
        sig.k() as u64,
    )
}

pub fn dim_source_models(sig: &CrSignature) -> BigUint {
    count_models(sig.d() as u64, sig.n_prime() as u64, sig.nu() as u64)
}

pub fn dimension_report(sig: &CrSignature) -> DimensionReport {
    let (m, d, k) = (sig.m() as u64, sig.d() as u64, sig.k() as u64);
    let q = 2 * m + d;
    let dim_target = count_target(m, d, k);
    let dim_source_maps = count_maps(m, d, sig.m_prime() as u64, k);
    let dim_source_models = count_models(d, sig.n_prime() as u64, sig.nu() as u64);
    let estimate_source_maps = BigUint::from(2 * sig.n_prime() as u64)
        * BigUint::from(k + 1).pow(sig.n() as u32);
    let estimate_source_models =
        BigUint::from(d) * BigUint::from(sig.nu() as u64 + 1).pow(sig.n_prime() as u32);
    let growth_constant = BigRational::new(BigInt::from(d), BigInt::from(factorial(q)));
    let target_growth_bound = (BigUint::from(d) * BigUint::from(k).pow(q as u32)) / factorial(q);
    let source_total = &dim_source_maps + &dim_source_models;
    let crossover = dim_target > source_total;
    DimensionReport {
        signature: *sig,
        dim_target,
        dim_source_maps,
        dim_source_models,
        estimate_source_maps,
        estimate_source_models,
        growth_constant,
        target_growth_bound,
        source_total,
        crossover,
    }
}

/// Smallest k in 2..=k_max where the target germ space strictly outgrows
/// maps and models combined, with the full report at that order. None if the
/// crossover is not reached by k_max.
pub fn crossover_order(
    m: usize,
    d: usize,
    m_prime: usize,
    nu: u32,
    k_max: u32,
) -> Result<Option<DimensionReport>, JetError> {
    // Validates m, d, m', nu once; the scan only varies k.
    CrSignature::new(m, d, m_prime, nu, 2)?;
    let models = count_models(d as u64, (m_prime + d) as u64, nu as u64);
    for k in 2..=k_max {
        let target = count_target(m as u64, d as u64, k as u64);
        let maps = count_maps(m as u64, d as u64, m_prime as u64, k as u64);
        if target > maps + &models {
            let sig = CrSignature::new(m, d, m_prime, nu, k)?;
            return Ok(Some(dimension_report(&sig)));
        }
    }
    Ok(None)
}

fn json_integer(x: &BigUint) -> serde_json::Value {
    let n: serde_json::Number = x.to_string().parse().expect("integer literal");
    serde_json::Value::Number(n)
}

impl DimensionReport {
    pub fn to_json(&self) -> serde_json::Value {
        let sig = &self.signature;
        serde_json::json!({
            "signature": {
                "m": sig.m(),
                "d": sig.d(),
                "m_prime": sig.m_prime(),
                "nu": sig.nu(),
                "k": sig.k(),
            },
            "dim_target": json_integer(&self.dim_target),
            "dim_source_maps": json_integer(&self.dim_source_maps),
            "dim_source_models": json_integer(&self.dim_source_models),
            "estimate_source_maps": json_integer(&self.estimate_source_maps),
            "estimate_source_models": json_integer(&self.estimate_source_models),
            "growth_constant": self.growth_constant.to_string(),
            "target_growth_bound": json_integer(&self.target_growth_bound),
            "source_total": json_integer(&self.source_total),
            "crossover": self.crossover,
        })
    }

    /// Label/value rows for the aligned text table.
    pub fn rows(&self) -> Vec<(&'static str, String)> {
        let sig = &self.signature;
        vec![
            (
                "signature (m, d, m', nu, k)",
                format!(
                    "({}, {}, {}, {}, {})",
                    sig.m(),
                    sig.d(),
                    sig.m_prime(),
                    sig.nu(),
                    sig.k()
                ),
            ),
            ("target germ space", self.dim_target.to_string()),
            ("source map jets", self.dim_source_maps.to_string()),
            ("source models", self.dim_source_models.to_string()),
            ("source total", self.source_total.to_string()),
            (
                "map jets estimate 2n'(k+1)^n",
                self.estimate_source_maps.to_string(),
            ),
            (
                "models estimate d(nu+1)^n'",
                self.estimate_source_models.to_string(),
            ),
            ("growth constant c", self.growth_constant.to_string()),
            (
                "growth bound floor(c k^(2m+d))",
                self.target_growth_bound.to_string(),
            ),
            (
                "target exceeds source",
                if self.crossover { "yes" } else { "no" }.to_string(),
            ),
        ]
    }

    pub fn to_table(&self) -> String {
        let rows = self.rows();
        let width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (label, value) in rows {
            out.push_str(&format!("{label:<width$}  {value}\n"));
        }
        out
    }
}
