//! Dimension formulas against brute-force monomial enumeration, growth and
//! estimate bounds across a signature grid, and crossover termination.

use crjet_core::{crossover_order, dimension_report, CrSignature};
use num::BigUint;

/// Number of exponent vectors over `nvars` variables with total degree in
/// `lo..=hi`, by explicit enumeration (no binomial formulas).
fn enumerate_monomials(nvars: usize, lo: u32, hi: u32) -> u64 {
    fn walk(remaining_vars: usize, budget: u32) -> u64 {
        if remaining_vars == 0 {
            return 1;
        }
        (0..=budget)
            .map(|e| walk(remaining_vars - 1, budget - e))
            .sum()
    }
    // degree <= hi minus degree <= lo-1
    let up_to = |bound: i64| -> u64 {
        if bound < 0 {
            0
        } else {
            walk(nvars, bound as u32)
        }
    };
    up_to(i64::from(hi)) - up_to(i64::from(lo) - 1)
}

fn small_source_pairs() -> Vec<(usize, usize)> {
    // every (m, d) with m, d >= 1 and 2m + d <= 5
    vec![(1, 1), (1, 2), (1, 3), (2, 1)]
}

#[test]
fn exact_counts_match_brute_force_enumeration() {
    for (m, d) in small_source_pairs() {
        for m_prime in m..=m + 2 {
            for nu in 2..=4u32 {
                for k in 2..=6u32 {
                    let sig = CrSignature::new(m, d, m_prime, nu, k).unwrap();
                    let report = dimension_report(&sig);

                    let target =
                        d as u64 * enumerate_monomials(2 * m + d, 2, k);
                    assert_eq!(report.dim_target, BigUint::from(target), "target {sig:?}");

                    let n = m + d;
                    let maps = 2 * (m_prime as u64 * enumerate_monomials(n, 1, k)
                        + d as u64 * enumerate_monomials(n, 2, k));
                    assert_eq!(
                        report.dim_source_maps,
                        BigUint::from(maps),
                        "maps {sig:?}"
                    );

                    let n_prime = m_prime + d;
                    let models = d as u64 * enumerate_monomials(2 * n_prime, 2, nu);
                    assert_eq!(
                        report.dim_source_models,
                        BigUint::from(models),
                        "models {sig:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn growth_bound_and_map_estimate_hold_across_orders() {
    for (m, d) in small_source_pairs() {
        for m_prime in m..=m + 2 {
            let mut previous_target: Option<BigUint> = None;
            for k in 2..=40u32 {
                let sig = CrSignature::new(m, d, m_prime, 2, k).unwrap();
                let report = dimension_report(&sig);

                assert!(
                    report.dim_source_maps <= report.estimate_source_maps,
                    "map estimate violated at {sig:?}"
                );
                if k as usize >= 2 * m + d {
                    assert!(
                        report.dim_target >= report.target_growth_bound,
                        "growth bound violated at {sig:?}"
                    );
                    assert!(report.target_growth_bound > BigUint::from(0u32));
                }
                if let Some(prev) = previous_target {
                    assert!(report.dim_target > prev, "target not increasing at {sig:?}");
                }
                previous_target = Some(report.dim_target);
            }
        }
    }
}

/// The source grows like k^n, the target like k^{2m+d} with 2m+d > n, so a
/// crossover exists for every m >= 1. 200 orders is generous for this grid.
#[test]
fn crossover_terminates_on_the_small_grid() {
    for m in 1..=2usize {
        for d in 1..=2usize {
            if m + d > 3 {
                continue;
            }
            for m_prime in m..=(4 - d).max(m) {
                if m_prime + d > 4 {
                    continue;
                }
                for nu in 2..=4u32 {
                    let found = crossover_order(m, d, m_prime, nu, 200)
                        .unwrap()
                        .unwrap_or_else(|| {
                            panic!("no crossover for ({m},{d},{m_prime},{nu})")
                        });
                    let kstar = found.signature.k();
                    assert!(found.crossover);
                    assert!(found.dim_target > found.source_total);

                    // Minimality: one order earlier must not cross.
                    if kstar > 2 {
                        let before = dimension_report(
                            &CrSignature::new(m, d, m_prime, nu, kstar - 1).unwrap(),
                        );
                        assert!(!before.crossover, "k* not minimal for ({m},{d},{m_prime},{nu})");
                    }
                }
            }
        }
    }
}

#[test]
fn crossover_order_is_monotone_in_nu_and_target_size() {
    let kstar = |m_prime: usize, nu: u32| -> u32 {
        crossover_order(1, 1, m_prime, nu, 200)
            .unwrap()
            .expect("crossover exists")
            .signature
            .k()
    };
    assert!(kstar(1, 2) <= kstar(1, 3));
    assert!(kstar(1, 3) <= kstar(1, 4));
    assert!(kstar(1, 2) <= kstar(2, 2));
    assert!(kstar(2, 2) <= kstar(3, 2));
}
