//! Release acceptance gate: one test per criterion, each printing a
//! `criterion NN ...: PASS|FAIL` line with the measured value and its
//! allowed budget. Tests assert the criteria as stated; known-honest
//! failures (documented in the README) are reported, not masked.
//!
//! Wall-clock budgets quoted in the criteria assume a 4-core desktop;
//! runtimes here are printed for the record rather than asserted, since
//! this suite must stay meaningful on any core count.

use rbm_lab::harness::checks::{
    check_burke, check_coupling, check_delta_continuation, check_det_identity,
    check_f_decomposition, check_factorization, check_fgue_dual, check_hermite,
    check_increment_gaussian, check_increment_variance_mc, check_oracle_equivalence,
    check_ordering, check_pathintegral, check_semigroup, check_sup_law,
    check_v_representation, mc_ks, run_verify, CheckResult,
};

const SEED: u64 = 20_260_826;

/// Prints the per-check verdict lines and returns whether all passed.
fn report(criterion: &str, checks: &[CheckResult]) -> bool {
    let mut all = true;
    for c in checks {
        println!(
            "criterion {criterion} [{}]: measured {:.6e} allowed {:.6e} ({:.1} s) -> {}",
            c.name,
            c.measured,
            c.allowed,
            c.seconds,
            if c.pass { "PASS" } else { "FAIL" }
        );
        all &= c.pass;
    }
    all
}

#[test]
fn acceptance_01_recursion_matches_lpp_oracle() {
    let c = check_oracle_equivalence(1000, SEED).unwrap();
    assert!(report("01 oracle", std::slice::from_ref(&c)), "{c:?}");
}

#[test]
fn acceptance_02_ordering_invariant() {
    let c = check_ordering(300, SEED + 1).unwrap();
    assert!(report("02 ordering", std::slice::from_ref(&c)), "{c:?}");
}

#[test]
fn acceptance_03_boundary_stationarity() {
    let checks = check_burke(10_000, SEED + 2).unwrap();
    assert!(report("03 stationarity", &checks), "{checks:?}");
}

#[test]
fn acceptance_04_running_maximum_law() {
    let a = check_sup_law(10_000, 0.5, SEED + 3).unwrap();
    let b = check_sup_law(10_000, 1.0, SEED + 4).unwrap();
    let checks = [a, b];
    assert!(report("04 sup law", &checks), "{checks:?}");
}

#[test]
fn acceptance_05_density_coupling() {
    let c = check_coupling(1000, SEED + 5).unwrap();
    assert!(report("05 coupling", std::slice::from_ref(&c)), "{c:?}");
}

#[test]
fn acceptance_06_fredholm_discretization_agreement() {
    let c = check_fgue_dual().unwrap();
    assert!(report("06 fredholm dual", std::slice::from_ref(&c)), "{c:?}");
}

#[test]
fn acceptance_07_identity_suite() {
    let mut checks = vec![
        check_v_representation().unwrap(),
        check_semigroup().unwrap(),
        check_f_decomposition().unwrap(),
        check_factorization(&[0.25, 0.5, 1.0]).unwrap(),
    ];
    checks.extend(check_pathintegral().unwrap());
    checks.push(check_det_identity(SEED + 6).unwrap());
    assert!(report("07 identities", &checks), "{checks:?}");
}

/// Known-honest failure: the reflection recursion's per-level grid bias
/// accumulates over the ~t lattice levels, so the scaled one-point law
/// carries a location bias that grows with t on any affordable grid.
/// See the README for measurements.
#[test]
fn acceptance_08_limit_law_convergence() {
    let (ks_a, budget_a) = mc_ks(1000.0, 0.5, 20_000, SEED + 7).unwrap();
    println!(
        "criterion 08a [KS t=1000 crossover]: measured {ks_a:.6e} allowed {budget_a:.6e} -> {}",
        if ks_a <= budget_a { "PASS" } else { "FAIL" }
    );
    let (ks_b, budget_b) = mc_ks(1000.0, 0.0, 20_000, SEED + 8).unwrap();
    println!(
        "criterion 08b [KS t=1000 stationary]: measured {ks_b:.6e} allowed {budget_b:.6e} -> {}",
        if ks_b <= budget_b { "PASS" } else { "FAIL" }
    );
    let (ks_small, _) = mc_ks(125.0, 0.0, 5000, SEED + 9).unwrap();
    let (ks_large, _) = mc_ks(8000.0, 0.0, 500, SEED + 10).unwrap();
    let monotone = ks_small > ks_b && ks_b > ks_large;
    println!(
        "criterion 08c [KS decrease t=125/1000/8000]: {ks_small:.4e} {ks_b:.4e} {ks_large:.4e} -> {}",
        if monotone { "PASS" } else { "FAIL" }
    );
    assert!(ks_a <= budget_a, "t=1000 crossover KS {ks_a} > {budget_a}");
    assert!(ks_b <= budget_b, "t=1000 stationary KS {ks_b} > {budget_b}");
    assert!(monotone, "KS not decreasing: {ks_small} {ks_b} {ks_large}");
}

#[test]
fn acceptance_09_crossover_to_stationary_continuation() {
    let checks = check_delta_continuation().unwrap();
    assert!(report("09 continuation", &checks), "{checks:?}");
}

/// The formula side passes; the MC variance side is a known-honest
/// failure (the accumulated grid bias inflates the increment variance
/// at t = 1000 on any affordable grid — see the README).
#[test]
fn acceptance_10_gaussian_increments() {
    let mut checks = check_increment_gaussian(&[0.5, 1.0]).unwrap();
    checks.push(check_increment_variance_mc(1000.0, 0.5, 400, SEED + 11).unwrap());
    assert!(report("10 increments", &checks), "{checks:?}");
}

/// Known-honest failure of the limit-gap bound: the true worst gap at
/// t = 10⁴ on this (r, s) grid is 0.0225 (independently recomputed in
/// 40-digit arithmetic), slightly above the 0.02 budget. The product
/// identity passes at 1e−10.
#[test]
fn acceptance_11_hermite_asymptotics() {
    let checks = check_hermite(0.02).unwrap();
    assert!(report("11 hermite", &checks), "{checks:?}");
}

#[test]
fn acceptance_12_verify_suite_runtime_and_determinism() {
    let summary = run_verify(SEED + 12).unwrap();
    print!("{}", summary.render_table());
    let determinism = summary
        .checks
        .iter()
        .find(|c| c.name == "report determinism")
        .expect("suite includes the determinism check");
    let in_budget = summary.runtime_seconds < 1800.0;
    println!(
        "criterion 12 [verify determinism + runtime]: runtime {:.1} s (budget 1800), deterministic {} -> {}",
        summary.runtime_seconds,
        determinism.pass,
        if determinism.pass && in_budget { "PASS" } else { "FAIL" }
    );
    assert!(determinism.pass, "verify suite is not deterministic");
    assert!(in_budget, "verify suite took {:.1} s", summary.runtime_seconds);
}
