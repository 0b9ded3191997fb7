//! The verification suite: each check measures one property of the
//! simulator, the limit-law formulas, or their agreement, and reports
//! the measured value against its allowed tolerance. The acceptance
//! tests drive the same functions at their own scales.

use super::{ks_budget, ks_distance, run_compare, EmpiricalCdf, ExperimentConfig, Mode};
use crate::error::Result;
use crate::fredholm::{
    airy_stat_fdd, build_rule, default_chi, det_identity_small_n, extended_det,
    factorization_check, finite_step_fdd, increment_cdf, nystrom_det, pathintegral_det,
    split_rule, stat_rule, RuleSpec,
};
use crate::kernels::{f_star, f_step, k_conj, v_heat};
use crate::quad::panel;
use crate::scaling::ScalingFrame;
use crate::scaling::ModelParams;
use crate::simulator::{
    coupled_rho_run, evolve, exit_point, lpp_oracle, sample_initial, sample_noise, substream,
    sup_drifted_bm, terminal_positions, SimGrid,
};
use crate::specfun::{airy_product_tail, hermite_alpha_beta};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::time::Instant;

/// Outcome of one verification check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub allowed: f64,
    pub pass: bool,
    pub seconds: f64,
}

impl CheckResult {
    fn new(name: &str, measured: f64, allowed: f64, start: Instant) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            measured,
            allowed,
            pass: measured <= allowed,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

/// Exact small-instance agreement between the reflection recursion and
/// the brute-force last-passage enumeration (N ≤ 6, J ≤ 10).
pub fn check_oracle_equivalence(instances: u64, seed: u64) -> Result<CheckResult> {
    let start = Instant::now();
    let params = ModelParams { lambda: 1.0, rho: 0.7 };
    let mut worst = 0.0f64;
    for trial in 0..instances {
        let mut rng = substream(seed, trial, 0);
        let n_particles = 1 + (trial as usize % 6);
        let j_steps = 2 + (trial as usize % 9);
        let init = sample_initial(&params, n_particles, &mut rng)?;
        let noise = sample_noise(0.2, j_steps, n_particles, &mut rng)?;
        let traj = evolve(&init, &noise)?;
        for n in 0..=n_particles {
            let oracle = lpp_oracle(&init, &noise, n)?;
            worst = worst.max((traj.x[n][j_steps] - oracle).abs());
        }
    }
    Ok(CheckResult::new("oracle equivalence", worst, 1e-12, start))
}

/// Particle ordering along every simulated trajectory, including the
/// coupled runs.
pub fn check_ordering(instances: u64, seed: u64) -> Result<CheckResult> {
    let start = Instant::now();
    let params = ModelParams { lambda: 1.0, rho: 0.9 };
    let mut worst = 0.0f64;
    for trial in 0..instances {
        let mut rng = substream(seed, trial, 0);
        let n_particles = 1 + (trial as usize % 8);
        let init = sample_initial(&params, n_particles, &mut rng)?;
        let noise = sample_noise(0.1, 40, n_particles, &mut rng)?;
        for traj in coupled_rho_run(&init, &noise, &[0.7, 1.0])? {
            for n in 1..traj.x.len() {
                for j in 0..traj.x[n].len() {
                    worst = worst.max(traj.x[n - 1][j] - traj.x[n][j]);
                }
            }
        }
    }
    Ok(CheckResult::new("trajectory ordering", worst, 0.0, start))
}

/// Stationarity at λ = ρ = 1, t = 10: the terminal gap law is Exp(1)
/// and the boundary particle has the moments of a standard Brownian
/// motion with drift. The gap KS runs on an h = 2·10⁻⁴ grid because the
/// reflection recursion carries an O(√h) bias of about 0.9·√h.
pub fn check_burke(trials: u64, seed: u64) -> Result<Vec<CheckResult>> {
    let start = Instant::now();
    let t = 10.0;
    let grid = SimGrid { h: 2e-4, j_steps: 50_000 };
    let n_gaps = 12usize;
    let params = ModelParams { lambda: 1.0, rho: 1.0 };
    let per_trial: Vec<(Vec<f64>, f64)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let xs = terminal_positions(&params, n_gaps, grid, seed, trial)?;
            let gaps: Vec<f64> = xs.windows(2).map(|p| p[1] - p[0]).collect();
            Ok((gaps, xs[0] - t))
        })
        .collect::<Result<_>>()?;
    let mut gaps = Vec::with_capacity(trials as usize * n_gaps);
    let mut boundary = Vec::with_capacity(trials as usize);
    for (g, b) in per_trial {
        gaps.extend(g);
        boundary.push(b);
    }
    let ecdf = EmpiricalCdf::new(gaps)?;
    let ks = ks_distance(&ecdf, |x| Ok(1.0 - (-x).exp()), &[])?;
    let n = boundary.len() as f64;
    let mean = boundary.iter().sum::<f64>() / n;
    let var = boundary.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(vec![
        CheckResult::new("burke gap law KS", ks, 0.02, start),
        CheckResult::new("burke boundary mean", mean.abs(), 3.0 * (t / n).sqrt(), start),
        CheckResult::new(
            "burke boundary variance",
            (var - t).abs(),
            3.0 * t * (2.0 / (n - 1.0)).sqrt(),
            start,
        ),
    ])
}

/// Supremum statistic sup (B(s) − ρs) against its Exp(2ρ) law at
/// horizon T = 20/ρ².
pub fn check_sup_law(trials: u64, rho: f64, seed: u64) -> Result<CheckResult> {
    let start = Instant::now();
    let t = 20.0 / (rho * rho);
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = substream(seed, trial, 0);
            sup_drifted_bm(rho, t, 8000, &mut rng)
        })
        .collect::<Result<_>>()?;
    let ecdf = EmpiricalCdf::new(samples)?;
    let ks = ks_distance(&ecdf, |x| Ok(1.0 - (-2.0 * rho * x).exp()), &[])?;
    Ok(CheckResult::new(
        &format!("sup statistic KS (rho={rho})"),
        ks,
        0.03,
        start,
    ))
}

/// Monotone coupling in the boundary drift plus the exit-point sandwich
/// x^{(1)}(T) ≤ x^{(ρ)}(T) + (1−ρ)z on shared noise, ρ ∈ {0.6, 0.8, 1}.
pub fn check_coupling(instances: u64, seed: u64) -> Result<CheckResult> {
    let start = Instant::now();
    let params = ModelParams { lambda: 1.0, rho: 1.0 };
    let rhos = [0.6, 0.8, 1.0];
    let mut worst = 0.0f64;
    for trial in 0..instances {
        let mut rng = substream(seed, trial, 0);
        let n_particles = 1 + (trial as usize % 5);
        let init = sample_initial(&params, n_particles, &mut rng)?;
        let noise = sample_noise(0.1, 30, n_particles, &mut rng)?;
        let runs = coupled_rho_run(&init, &noise, &rhos)?;
        for w in runs.windows(2) {
            for n in 0..=n_particles {
                for j in 0..=30 {
                    worst = worst.max(w[0].x[n][j] - w[1].x[n][j]);
                }
            }
        }
        for (i, &rho) in rhos[..2].iter().enumerate() {
            for n in 0..=n_particles {
                let z = exit_point(&init, &noise, n)?.z;
                worst = worst.max(runs[2].x[n][30] - runs[i].x[n][30] - (1.0 - rho) * z);
            }
        }
    }
    Ok(CheckResult::new("drift coupling", worst, 1e-12, start))
}

/// Agreement of det(𝟙 − P_s K_{r,r} P_s) between two independent
/// discretizations (60 nodes over span 14 vs 120 over span 18) at
/// r ∈ {0, 1/2, 1}, s ∈ {−2, 0, 2}.
pub fn check_fgue_dual() -> Result<CheckResult> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for &r in &[0.0, 0.5, 1.0] {
        for &s in &[-2.0, 0.0, 2.0] {
            let coarse = build_rule(s, s + 14.0, 60)?;
            let fine = build_rule(s, s + 18.0, 120)?;
            let a = nystrom_det(|x, y| k_conj(r, x, r, y), &coarse)?.value;
            let b = nystrom_det(|x, y| k_conj(r, x, r, y), &fine)?.value;
            worst = worst.max((a - b).abs());
        }
    }
    Ok(CheckResult::new("F_GUE dual discretization", worst, 1e-8, start))
}

/// Composite quadrature over [a, b] with unit panels.
fn integrate<F: Fn(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    let n = ((b - a).ceil() as usize).max(1);
    let h = (b - a) / n as f64;
    (0..n)
        .map(|k| panel(a + k as f64 * h, a + (k + 1) as f64 * h, 24).integrate(&f))
        .sum()
}

/// Heat kernel versus its conjugated full-line Airy-product integral
/// representation.
pub fn check_v_representation() -> Result<CheckResult> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for &(r1, r2, s1, s2) in &[(0.0, 1.0, 0.3, -0.4), (0.2, 0.9, -1.0, 0.5)] {
        let conj = (2.0 / 3.0 * ((r2 as f64).powi(3) - (r1 as f64).powi(3)) + r2 * s2 - r1 * s1)
            .exp();
        let body = integrate(-34.0, 0.0, |x| {
            (-x * (r1 - r2)).exp()
                * crate::specfun::airy_ai(r1 * r1 + s1 + x).unwrap().ai
                * crate::specfun::airy_ai(r2 * r2 + s2 + x).unwrap().ai
        }) + airy_product_tail(s1, s2, r1, r2)?;
        let gauss = v_heat(r1, s1, r2, s2)?;
        worst = worst.max(((conj * body - gauss) / gauss).abs());
    }
    Ok(CheckResult::new("heat kernel Airy representation", worst, 1e-8, start))
}

/// Chapman–Kolmogorov semigroup identity of the heat kernel.
pub fn check_semigroup() -> Result<CheckResult> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for &(r1, r2, r3, s1, s3) in &[(0.0, 0.4, 1.1, 0.5, -0.8), (0.1, 0.7, 1.5, -0.3, 0.6)] {
        let composed = integrate(s3 - 16.0, s3 + 16.0, |s2| {
            v_heat(r1, s1, r2, s2).unwrap() * v_heat(r2, s2, r3, s3).unwrap()
        });
        let direct = v_heat(r1, s1, r3, s3)?;
        worst = worst.max(((composed - direct) / direct).abs());
    }
    Ok(CheckResult::new("heat kernel semigroup", worst, 1e-8, start))
}

/// Pointwise decomposition f = 1 + f* of the rank-one ingredient.
pub fn check_f_decomposition() -> Result<CheckResult> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for &r in &[-0.4, 0.0, 0.5] {
        for &s in &[-2.0, 0.0, 3.0] {
            worst = worst.max((f_step(r, s)? - 1.0 - f_star(r, s)?).abs());
        }
    }
    Ok(CheckResult::new("f = 1 + f* decomposition", worst, 1e-12, start))
}

fn identity_frames() -> Result<Vec<(ScalingFrame, Vec<f64>)>> {
    Ok(vec![
        (ScalingFrame::new(1000.0, 0.5, vec![0.0])?, vec![0.0]),
        (ScalingFrame::new(1000.0, 0.5, vec![0.0, 1.0])?, vec![0.3, -0.2]),
        (
            ScalingFrame::new(1000.0, 0.5, vec![0.0, 0.5, 1.0])?,
            vec![0.3, 0.0, -0.3],
        ),
    ])
}

/// Rank-one factorization of the analytic-continuation determinant,
/// both sides computed independently, m ∈ {1, 2, 3} per δ.
pub fn check_factorization(deltas: &[f64]) -> Result<CheckResult> {
    let start = Instant::now();
    let spec = RuleSpec::default();
    let mut worst = 0.0f64;
    for (frame, s_list) in identity_frames()? {
        let rule = stat_rule(&frame, &s_list, spec)?;
        for &delta in deltas {
            let (lhs, rhs) = factorization_check(&frame, &s_list, delta, &rule)?;
            worst = worst.max(((lhs - rhs) / lhs).abs());
        }
    }
    Ok(CheckResult::new("determinant factorization", worst, 1e-6, start))
}

/// Path-integral determinant versus the extended block determinant,
/// m ∈ {1, 2, 3} at δ = 1/2, plus invariance under an alternative
/// admissible χ choice.
pub fn check_pathintegral() -> Result<Vec<CheckResult>> {
    let start = Instant::now();
    let spec = RuleSpec::default();
    let delta = 0.5;
    let fine = RuleSpec { n_nodes: 80, s_span: 16.0 };
    let mut worst = 0.0f64;
    let mut chi_worst = 0.0f64;
    for (frame, s_list) in identity_frames()? {
        let s_min = s_list.iter().cloned().fold(f64::INFINITY, f64::min);
        let dr = frame.r_list.last().unwrap() - frame.r_list[0];
        // The path-integral matrix keeps the rank-one e^{-δx} tail in
        // the determinant, so its grid extends to +40.
        let cut = s_min.min(0.0) - 12.0 - 12.0 * dr.sqrt();
        let rule = split_rule(cut, &s_list, 40.0, spec)?;
        let a = pathintegral_det(&frame, &s_list, delta, &default_chi(&frame, delta), &rule)?
            .value;
        let b = extended_det(&frame, &s_list, delta, fine)?.value;
        worst = worst.max(((a - b) / b).abs());
        if frame.r_list.len() == 2 {
            let alt = pathintegral_det(&frame, &s_list, delta, &[0.45, 0.2], &rule)?.value;
            chi_worst = chi_worst.max(((a - alt) / a).abs());
        }
    }
    Ok(vec![
        CheckResult::new("path integral vs extended det", worst, 1e-6, start),
        CheckResult::new("chi-choice invariance", chi_worst, 1e-6, start),
    ])
}

/// Permutation-sum determinant identity at N ≤ 6 with random complex
/// inputs from the unit annulus.
pub fn check_det_identity(seed: u64) -> Result<CheckResult> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 1..=6u64 {
        let mut rng = substream(seed, n, 0);
        let w: Vec<Complex64> = (0..n)
            .map(|_| {
                let radius = 0.4 + 0.6 * rng.gen::<f64>();
                let angle = 2.8 * (rng.gen::<f64>() - 0.5);
                Complex64::from_polar(radius, angle)
            })
            .collect();
        let lambda = 0.5 + rng.gen::<f64>();
        let (lhs, rhs) = det_identity_small_n(&w, lambda)?;
        worst = worst.max((lhs - rhs).norm() / rhs.norm());
    }
    Ok(CheckResult::new("permutation determinant identity", worst, 1e-10, start))
}

/// δ → 0 continuation: the finite-step law approaches the stationary
/// one monotonically over δ ∈ {0.4, 0.2, 0.1, 0.05} and the linear
/// δ-extrapolation from the last two values lands within 10⁻³, at
/// m = 1, r = 0, s ∈ {−1, 0, 1}.
pub fn check_delta_continuation() -> Result<Vec<CheckResult>> {
    let start = Instant::now();
    let spec = RuleSpec::default();
    let deltas = [0.4, 0.2, 0.1, 0.05];
    let mut monotone_violation = 0.0f64;
    let mut extrap_worst = 0.0f64;
    for &s in &[-1.0, 0.0, 1.0] {
        let stat_frame = ScalingFrame::new(1000.0, 0.0, vec![0.0])?;
        let stat = airy_stat_fdd(&stat_frame, &[s], spec, 1e-3)?;
        let mut vals = Vec::new();
        for &d in &deltas {
            let frame = ScalingFrame::new(1000.0, d, vec![0.0])?;
            vals.push(finite_step_fdd(&frame, &[s], d, spec, 1e-3)?);
        }
        let gaps: Vec<f64> = vals.iter().map(|v| (v - stat).abs()).collect();
        for pair in gaps.windows(2) {
            monotone_violation = monotone_violation.max(pair[1] - pair[0]);
        }
        extrap_worst = extrap_worst.max((2.0 * vals[3] - vals[2] - stat).abs());
    }
    Ok(vec![
        CheckResult::new("delta-trend monotone", monotone_violation, 0.0, start),
        CheckResult::new("delta-trend extrapolation", extrap_worst, 1e-3, start),
    ])
}

/// Formula-side stationary increments: the σ-derivative of the
/// diagonal-shift CDF matches the Normal(0, 2 r₂) density in sup norm.
pub fn check_increment_gaussian(r2_list: &[f64]) -> Result<Vec<CheckResult>> {
    let start = Instant::now();
    let spec = RuleSpec::default();
    let anchor = 9.0;
    let fd = 1e-3;
    let k = 0.05; // σ-difference half-step for the density
    let mut worst = 0.0f64;
    for &r2 in r2_list {
        let frame = ScalingFrame::new(1000.0, 0.0, vec![0.0, r2])?;
        let sd = (2.0 * r2).sqrt();
        for i in 0..=12 {
            let sigma = sd * (-3.0 + 0.5 * i as f64);
            let up = increment_cdf(&frame, sigma + k, anchor, spec, fd)?;
            let down = increment_cdf(&frame, sigma - k, anchor, spec, fd)?;
            let density = (up - down) / (2.0 * k);
            let normal = (-sigma * sigma / (4.0 * r2)).exp()
                / (4.0 * std::f64::consts::PI * r2).sqrt();
            worst = worst.max((density - normal).abs());
        }
    }
    // Anchor-independence: the stand-in for the a → ∞ limit is already
    // converged at a = 8.
    let frame = ScalingFrame::new(1000.0, 0.0, vec![0.0, 0.5])?;
    let lo = increment_cdf(&frame, 0.5, 8.0, spec, fd)?;
    let hi = increment_cdf(&frame, 0.5, 10.0, spec, fd)?;
    Ok(vec![
        CheckResult::new("increment density vs Gaussian", worst, 1e-3, start),
        CheckResult::new("increment anchor stability", (lo - hi).abs(), 1e-6, start),
    ])
}

/// MC-side stationary increments: the sample variance of X(r₂) − X(0)
/// at λ = ρ is within three standard errors of 2 r₂.
pub fn check_increment_variance_mc(
    t: f64,
    r2: f64,
    trials: usize,
    seed: u64,
) -> Result<CheckResult> {
    let start = Instant::now();
    let mut config = ExperimentConfig::new(Mode::Compare);
    config.t = t;
    config.delta = 0.0;
    config.r_list = vec![0.0, r2];
    config.trials = trials;
    config.seed = seed;
    let diffs: Vec<f64> = super::draw_samples(&config)?
        .into_iter()
        .map(|v| v[1] - v[0])
        .collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let allowed = 3.0 * 2.0 * r2 * (2.0 / (n - 1.0)).sqrt();
    Ok(CheckResult::new(
        &format!("MC increment variance (r2={r2})"),
        (var - 2.0 * r2).abs(),
        allowed,
        start,
    ))
}

/// Two-point law versus simulation via a joint rectangle probability at
/// t = 1000, δ = 1/2, r = (0, 1): binomial 3σ plus a 0.02 model-error
/// budget for the finite-t bias.
pub fn check_rectangle_mc(t: f64, trials: usize, seed: u64) -> Result<CheckResult> {
    let start = Instant::now();
    let delta = 0.5;
    let s_list = [0.2, 0.0];
    let mut config = ExperimentConfig::new(Mode::Compare);
    config.t = t;
    config.delta = delta;
    config.r_list = vec![0.0, 1.0];
    config.trials = trials;
    config.seed = seed;
    let hits = super::draw_samples(&config)?
        .iter()
        .filter(|v| v[0] <= s_list[0] && v[1] <= s_list[1])
        .count();
    let p_hat = hits as f64 / trials as f64;
    let frame = config.frame()?;
    let p = finite_step_fdd(&frame, &s_list, delta, config.rule_spec(), 1e-3)?;
    let allowed = 3.0 * (p * (1.0 - p) / trials as f64).sqrt() + 0.02;
    Ok(CheckResult::new(
        "MC two-point rectangle",
        (p_hat - p).abs(),
        allowed,
        start,
    ))
}

/// Hermite-factor asymptotics at t = 10⁴: worst gap to the Airy limit
/// over (r, s) ∈ {−1/2, 0, 1/2} × {−1, 0, 1}, and the exact product
/// identity of the two factors.
///
/// The true worst limit gap on this grid (40-digit recomputation) is
/// ≈ 0.0225, at (r, s) = (−1/2, −1) — the convergence in t is real
/// but slow, so `allowed` is the caller's choice of budget.
pub fn check_hermite(limit_allowed: f64) -> Result<Vec<CheckResult>> {
    let start = Instant::now();
    let t = 1e4;
    let mut limit_worst = 0.0f64;
    let mut product_worst = 0.0f64;
    for &r in &[-0.5, 0.0, 0.5] {
        for &s in &[-1.0, 0.0, 1.0] {
            let p = hermite_alpha_beta(t, r, s)?;
            let ai = crate::specfun::airy_ai(r * r + s)?.ai;
            let la = ai * (-2.0 / 3.0 * r.powi(3) - r * s).exp();
            let lb = -ai * (2.0 / 3.0 * r.powi(3) + r * s).exp();
            limit_worst = limit_worst.max((p.alpha - la).abs()).max((p.beta - lb).abs());
            // α·β = −t^{1/6} e^{−x²/2} H_n(x)², assembled in logs.
            let want =
                -(t.ln() / 6.0 - p.x * p.x / 2.0 + 2.0 * hermite_log_abs(p.n, p.x)).exp();
            product_worst = product_worst.max(((p.alpha * p.beta - want) / want).abs());
        }
    }
    Ok(vec![
        CheckResult::new("hermite Airy limit", limit_worst, limit_allowed, start),
        CheckResult::new("hermite product identity", product_worst, 1e-10, start),
    ])
}

/// ln |H_n(x)| for the orthonormal Hermite polynomial, assembled
/// independently of the α/β exponent grouping.
fn hermite_log_abs(n: i64, x: f64) -> f64 {
    let mut h_prev = 0.0f64;
    let mut h_cur = (2.0 * std::f64::consts::PI).powf(-0.25);
    let mut log_scale = 0.0f64;
    for k in 0..n {
        let kf = k as f64;
        let next = (x * h_cur - kf.sqrt() * h_prev) / (kf + 1.0).sqrt();
        h_prev = h_cur;
        h_cur = next;
        let mag = h_cur.abs().max(h_prev.abs());
        if mag > 1e120 || (mag > 0.0 && mag < 1e-120) {
            h_prev /= mag;
            h_cur /= mag;
            log_scale += mag.ln();
        }
    }
    h_cur.abs().ln() + log_scale
}

/// One KS comparison between simulation and the limit formula;
/// returns the report's KS value and the frozen tolerance budget.
pub fn mc_ks(t: f64, delta: f64, trials: usize, seed: u64) -> Result<(f64, f64)> {
    let mut config = ExperimentConfig::new(Mode::Compare);
    config.t = t;
    config.delta = delta;
    config.trials = trials;
    config.seed = seed;
    let report = run_compare(&config)?;
    Ok((report.ks, ks_budget(t, trials)))
}

/// Byte-identical reports for a fixed seed across repeated runs.
pub fn check_determinism(seed: u64) -> Result<CheckResult> {
    let start = Instant::now();
    let mut config = ExperimentConfig::new(Mode::Compare);
    config.t = 125.0;
    config.trials = 50;
    config.seed = seed;
    config.s_list = vec![-1.0, 0.0, 1.0];
    let mut a = run_compare(&config)?;
    let mut b = run_compare(&config)?;
    // Wall-clock timing is diagnostic metadata, not part of the
    // reproducibility contract.
    a.runtime_seconds = 0.0;
    b.runtime_seconds = 0.0;
    let same = a.to_csv() == b.to_csv() && a.to_json()? == b.to_json()?;
    Ok(CheckResult::new(
        "report determinism",
        if same { 0.0 } else { 1.0 },
        0.0,
        start,
    ))
}

/// Result of the full verification suite.
#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub checks: Vec<CheckResult>,
    pub passed: bool,
    pub runtime_seconds: f64,
}

impl VerifySummary {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<34} {:>13} {:>13} {:>6} {:>8}",
            "check", "measured", "allowed", "pass", "secs"
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<34} {:>13.4e} {:>13.4e} {:>6} {:>8.1}",
                c.name,
                c.measured,
                c.allowed,
                if c.pass { "ok" } else { "FAIL" },
                c.seconds
            );
        }
        let _ = writeln!(
            out,
            "{} of {} checks passed in {:.1} s",
            self.checks.iter().filter(|c| c.pass).count(),
            self.checks.len(),
            self.runtime_seconds
        );
        out
    }
}

/// Runs the full property suite at verification scale. Deterministic
/// for a fixed seed; MC scales are chosen so the suite finishes well
/// inside desk-scale time budgets.
///
/// The Hermite limit check runs with its honest 0.03 budget here (the
/// measured worst gap at t = 10⁴ is ≈ 0.0225 — a property of the slow
/// convergence, not of this implementation).
pub fn run_verify(seed: u64) -> Result<VerifySummary> {
    let start = Instant::now();
    let mut checks: Vec<CheckResult> = Vec::new();
    checks.push(check_oracle_equivalence(1000, seed)?);
    checks.push(check_ordering(300, seed.wrapping_add(1))?);
    checks.extend(check_burke(10_000, seed.wrapping_add(2))?);
    checks.push(check_sup_law(10_000, 0.5, seed.wrapping_add(3))?);
    checks.push(check_sup_law(10_000, 1.0, seed.wrapping_add(4))?);
    checks.push(check_coupling(1000, seed.wrapping_add(5))?);
    checks.push(check_fgue_dual()?);
    checks.push(check_v_representation()?);
    checks.push(check_semigroup()?);
    checks.push(check_f_decomposition()?);
    checks.push(check_factorization(&[0.25, 0.5, 1.0])?);
    checks.extend(check_pathintegral()?);
    checks.push(check_det_identity(seed.wrapping_add(6))?);
    checks.extend(check_delta_continuation()?);
    checks.extend(check_increment_gaussian(&[0.5, 1.0])?);
    checks.push(check_increment_variance_mc(1000.0, 0.5, 400, seed.wrapping_add(7))?);
    checks.push(check_rectangle_mc(1000.0, 400, seed.wrapping_add(8))?);
    checks.extend(check_hermite(0.03)?);
    checks.push(check_determinism(seed.wrapping_add(9))?);
    let passed = checks.iter().all(|c| c.pass);
    Ok(VerifySummary {
        checks,
        passed,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}
