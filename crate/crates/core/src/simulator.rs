//! Monte Carlo engine for the reflected particle system: exact
//! Skorokhod recursion on a time grid, a brute-force last-passage
//! oracle, exit points, coupled runs sharing one noise realization, and
//! rescaled terminal samples.
//!
//! The reflection recursion is exact for the piecewise-linear driver;
//! the only discretization bias is the O(√h) grid bias of Brownian
//! suprema. Default grids keep J = T/h ≥ 2·10³ and h ≤ t^{1/3}/200.

use crate::error::{Error, Result};
use crate::scaling::{lattice_index, rescale_position, ModelParams, ScalingFrame};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};

/// Initial particle positions and the model intensities.
#[derive(Debug, Clone)]
pub struct InitialConfig {
    /// Positions ζ_0..ζ_N; ζ_0 = 0, gaps are Exp(lambda) variates.
    pub zeta: Vec<f64>,
    pub lambda: f64,
    /// Boundary drift used by `evolve`.
    pub rho: f64,
}

/// Brownian increments on a uniform grid of J steps covering [0, J·h].
///
/// `db[k][j]` is the increment of particle k+1 over step j (steps are
/// 0-based); `db0[j]` drives the boundary particle.
#[derive(Debug, Clone)]
pub struct NoiseGrid {
    pub h: f64,
    pub j_steps: usize,
    pub db: Vec<Vec<f64>>,
    pub db0: Vec<f64>,
}

/// Trajectories x[n][j] for n = 0..N (0 is the boundary particle) and
/// j = 0..J.
#[derive(Debug, Clone)]
pub struct TrajectorySet {
    pub x: Vec<Vec<f64>>,
}

/// Exit data of the grid maximizer: the time it leaves the boundary
/// line and the initial particle whose Dirac weight it collects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitRecord {
    pub z: f64,
    pub argmax_k: usize,
}

/// Uniform simulation grid.
#[derive(Debug, Clone, Copy)]
pub struct SimGrid {
    pub h: f64,
    pub j_steps: usize,
}

impl SimGrid {
    /// Default grid for horizon t: J ≥ 2·10³ and h ≤ t^{1/3}/200.
    pub fn for_time(t: f64) -> Result<SimGrid> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("grid horizon must be positive, got {t}")));
        }
        let h_target = (t / 2e3).min(t.cbrt() / 200.0);
        let j_steps = (t / h_target).ceil() as usize;
        Ok(SimGrid { h: t / j_steps as f64, j_steps })
    }
}

/// Deterministic substream for one (trial, particle) pair: results are
/// independent of scheduling order. Particle indices are offset by one
/// so index 0 is free for per-trial draws (the boundary particle is 1).
pub fn substream(master_seed: u64, trial: u64, particle: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((trial << 32) | particle);
    rng
}

/// Initial configuration: ζ_0 = 0, gaps i.i.d. Exp(lambda). Only the
/// right half is sampled — the left half is replaced by the boundary
/// particle's drifted Brownian motion.
pub fn sample_initial<R: Rng>(params: &ModelParams, n: usize, rng: &mut R) -> Result<InitialConfig> {
    if n < 1 {
        return Err(Error::Domain("need at least one non-boundary particle".into()));
    }
    if !(params.lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {}", params.lambda)));
    }
    let exp = Exp::new(params.lambda).map_err(|e| Error::Domain(e.to_string()))?;
    let mut zeta = Vec::with_capacity(n + 1);
    zeta.push(0.0);
    for k in 1..=n {
        zeta.push(zeta[k - 1] + rng.sample(exp));
    }
    Ok(InitialConfig { zeta, lambda: params.lambda, rho: params.rho })
}

/// Noise for `n_particles` reflected particles plus the boundary.
pub fn sample_noise<R: Rng>(h: f64, j_steps: usize, n_particles: usize, rng: &mut R) -> Result<NoiseGrid> {
    if !(h > 0.0) || j_steps == 0 {
        return Err(Error::Domain(format!(
            "noise grid needs h > 0 and at least one step, got h={h}, J={j_steps}"
        )));
    }
    let sd = h.sqrt();
    let draw = |rng: &mut R| -> Vec<f64> {
        (0..j_steps)
            .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
            .collect()
    };
    let db0 = draw(rng);
    let db = (0..n_particles).map(|_| draw(rng)).collect();
    Ok(NoiseGrid { h, j_steps, db, db0 })
}

fn check_dims(init: &InitialConfig, noise: &NoiseGrid) -> Result<usize> {
    let n = init.zeta.len() - 1;
    if noise.db.len() < n {
        return Err(Error::Dimension(format!(
            "noise covers {} particles, initial data has {}",
            noise.db.len(),
            n
        )));
    }
    Ok(n)
}

/// Exact reflection map on the grid, with the boundary particle a
/// drifted Brownian motion:
/// x_0(t_j) = ρ t_j + Σ dB0, x_n(t_j) = max(x_n(t_{j−1}) + dB, x_{n−1}(t_j)).
pub fn evolve(init: &InitialConfig, noise: &NoiseGrid) -> Result<TrajectorySet> {
    evolve_with_rho(init, noise, init.rho)
}

/// `evolve` with an overridden boundary drift (same noise), used by the
/// coupled runs.
pub fn evolve_with_rho(init: &InitialConfig, noise: &NoiseGrid, rho: f64) -> Result<TrajectorySet> {
    let n = check_dims(init, noise)?;
    let jj = noise.j_steps;
    let mut x = vec![vec![0.0; jj + 1]; n + 1];
    x[0][0] = init.zeta[0];
    for j in 1..=jj {
        x[0][j] = x[0][j - 1] + rho * noise.h + noise.db0[j - 1];
    }
    for k in 1..=n {
        x[k][0] = init.zeta[k];
        for j in 1..=jj {
            x[k][j] = (x[k][j - 1] + noise.db[k - 1][j - 1]).max(x[k - 1][j]);
        }
    }
    Ok(TrajectorySet { x })
}

/// Step increment of line `l` (0 is the boundary) over step j.
fn line_increment(noise: &NoiseGrid, rho: f64, l: usize, j: usize) -> f64 {
    if l == 0 {
        rho * noise.h + noise.db0[j]
    } else {
        noise.db[l - 1][j]
    }
}

/// Brute-force last-passage value: the maximum over entry lines k and
/// monotone jump-time sequences j_k ≤ … ≤ j_{n−1} of
/// ζ_k + Σ_l (increments collected on line l between its jump times),
/// with line 0 collecting drift ρ·h plus boundary noise. Enumerates all
/// paths — intended for small instances only.
pub fn lpp_oracle(init: &InitialConfig, noise: &NoiseGrid, n: usize) -> Result<f64> {
    let n_max = check_dims(init, noise)?;
    if n > n_max {
        return Err(Error::Dimension(format!("particle {n} outside range 0..={n_max}")));
    }
    let jj = noise.j_steps;
    let mut best = f64::NEG_INFINITY;
    for k in 0..=n {
        // Suffix sums on each line: seg[l][a] = Σ_{j=a..J-1} inc(l, j),
        // so the weight collected on line l over (t_a, t_b] is
        // seg[l][a] − seg[l][b].
        let mut seg = vec![vec![0.0; jj + 1]; n + 1];
        for l in k..=n {
            for j in (0..jj).rev() {
                seg[l][j] = seg[l][j + 1] + line_increment(noise, init.rho, l, j);
            }
        }
        // Enumerate jump times for lines k..n−1 recursively.
        let mut jumps = vec![0usize; n - k];
        let mut stack_best = f64::NEG_INFINITY;
        enumerate_paths(&seg, k, n, jj, 0, 0, &mut jumps, &mut stack_best);
        best = best.max(init.zeta[k] + stack_best);
    }
    Ok(best)
}

fn enumerate_paths(
    seg: &[Vec<f64>],
    k: usize,
    n: usize,
    jj: usize,
    depth: usize,
    lo: usize,
    jumps: &mut [usize],
    best: &mut f64,
) {
    if depth == jumps.len() {
        // Weight of the full path with the chosen jump times.
        let mut w = 0.0;
        let mut prev = 0usize;
        for (i, &j) in jumps.iter().enumerate() {
            w += seg[k + i][prev] - seg[k + i][j];
            prev = j;
        }
        w += seg[n][prev] - seg[n][jj];
        *best = (*best).max(w);
        return;
    }
    for j in lo..=jj {
        jumps[depth] = j;
        enumerate_paths(seg, k, n, jj, depth + 1, j, jumps, best);
    }
}

/// Best continuation weights M[l][j]: maximal noise weight collectable
/// from (line l, time t_j) to (line n, time T).
fn continuation(noise: &NoiseGrid, rho: f64, n: usize) -> Vec<Vec<f64>> {
    let jj = noise.j_steps;
    let mut m = vec![vec![0.0; jj + 1]; n + 1];
    for l in (0..=n).rev() {
        for j in (0..=jj).rev() {
            let mut v = f64::NEG_INFINITY;
            if j < jj {
                v = m[l][j + 1] + line_increment(noise, rho, l, j);
            }
            if l < n {
                v = v.max(m[l + 1][j]);
            }
            if l == n && j == jj {
                v = 0.0;
            }
            m[l][j] = v;
        }
    }
    m
}

/// Exit data of particle n's maximizing path: the grid time at which it
/// leaves the boundary line (scanning candidates in ascending exit
/// time, keeping the first maximum) and the entry particle index.
pub fn exit_point(init: &InitialConfig, noise: &NoiseGrid, n: usize) -> Result<ExitRecord> {
    let n_max = check_dims(init, noise)?;
    if n > n_max {
        return Err(Error::Dimension(format!("particle {n} outside range 0..={n_max}")));
    }
    let jj = noise.j_steps;
    let m = continuation(noise, init.rho, n);
    let mut best = f64::NEG_INFINITY;
    let mut record = ExitRecord { z: 0.0, argmax_k: 0 };
    // Paths entering on line k ≥ 1 at time 0 (Dirac weight ζ_k).
    for k in 1..=n {
        let w = init.zeta[k] + m[k][0];
        if w > best {
            best = w;
            record = ExitRecord { z: 0.0, argmax_k: k };
        }
    }
    // Boundary paths, leaving line 0 at t_j (collecting drifted noise
    // up to t_j); for n = 0 the path stays on the boundary until T.
    let mut w0 = init.zeta[0];
    for j in 0..=jj {
        let cont = if n == 0 {
            if j == jj { 0.0 } else { f64::NEG_INFINITY }
        } else {
            m[1][j]
        };
        let w = w0 + cont;
        if w > best {
            best = w;
            record = ExitRecord { z: j as f64 * noise.h, argmax_k: 0 };
        }
        if j < jj {
            w0 += line_increment(noise, init.rho, 0, j);
        }
    }
    Ok(record)
}

/// Evolves the same initial data and noise under each boundary drift in
/// `rho_list`; larger drifts dominate pointwise.
pub fn coupled_rho_run(
    init: &InitialConfig,
    noise: &NoiseGrid,
    rho_list: &[f64],
) -> Result<Vec<TrajectorySet>> {
    rho_list
        .iter()
        .map(|&rho| evolve_with_rho(init, noise, rho))
        .collect()
}

/// Streaming evolution: terminal positions x_n(T) for n = 0..=n_max,
/// with per-particle noise substreams (particle p uses substream p+1;
/// its initial gap is drawn first, then its J increments). Memory is
/// O(J + n_max) regardless of size.
pub fn terminal_positions(
    params: &ModelParams,
    n_max: usize,
    grid: SimGrid,
    master_seed: u64,
    trial: u64,
) -> Result<Vec<f64>> {
    if !(params.lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {}", params.lambda)));
    }
    let exp = Exp::new(params.lambda).map_err(|e| Error::Domain(e.to_string()))?;
    let jj = grid.j_steps;
    let sd = grid.h.sqrt();
    let mut out = Vec::with_capacity(n_max + 1);
    // Boundary particle.
    let mut prev = vec![0.0; jj + 1];
    {
        let mut rng = substream(master_seed, trial, 1);
        for j in 1..=jj {
            prev[j] = prev[j - 1] + params.rho * grid.h + sd * rng.sample::<f64, _>(StandardNormal);
        }
    }
    out.push(prev[jj]);
    let mut cur = vec![0.0; jj + 1];
    let mut zeta = 0.0;
    for n in 1..=n_max {
        let mut rng = substream(master_seed, trial, n as u64 + 1);
        zeta += rng.sample(exp);
        cur[0] = zeta;
        for j in 1..=jj {
            cur[j] = (cur[j - 1] + sd * rng.sample::<f64, _>(StandardNormal)).max(prev[j]);
        }
        out.push(cur[jj]);
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(out)
}

/// One trial of the rescaled observables: X_t^{(δ)}(r) for each r in
/// the frame, from a fresh stationary simulation (λ = ρ) on `grid`.
pub fn sample_scaled(
    frame: &ScalingFrame,
    grid: SimGrid,
    master_seed: u64,
    trial: u64,
) -> Result<Vec<f64>> {
    let rho = frame.rho();
    if !(rho > 0.0) {
        return Err(Error::Domain(format!(
            "frame (t={}, delta={}) gives non-positive drift {rho}",
            frame.t, frame.delta
        )));
    }
    let params = ModelParams { lambda: rho, rho };
    let indices: Vec<usize> = frame
        .r_list
        .iter()
        .map(|&r| lattice_index(frame.t, r))
        .collect::<Result<_>>()?;
    let n_max = *indices.iter().max().unwrap();
    let xs = terminal_positions(&params, n_max, grid, master_seed, trial)?;
    frame
        .r_list
        .iter()
        .zip(&indices)
        .map(|(&r, &n)| rescale_position(xs[n], frame.t, r))
        .collect()
}

/// Supremum of a drifted Brownian motion, sup_{s ≤ T} (B(s) − ρs).
///
/// Within each step the maximum of the Brownian bridge between the
/// realized endpoints is sampled exactly,
/// M = (d + √(d² − 2h ln U))/2 above the left endpoint, so the result
/// carries no O(√h) grid bias — only the finite-horizon truncation.
pub fn sup_drifted_bm<R: Rng>(rho: f64, t: f64, j_steps: usize, rng: &mut R) -> Result<f64> {
    if !(rho > 0.0) || !(t > 0.0) || j_steps == 0 {
        return Err(Error::Domain(format!(
            "sup_drifted_bm needs rho > 0, t > 0, steps > 0, got ({rho}, {t}, {j_steps})"
        )));
    }
    let h = t / j_steps as f64;
    let sd = h.sqrt();
    let mut b = 0.0f64;
    let mut sup = 0.0f64;
    for _ in 0..j_steps {
        let d = sd * rng.sample::<f64, _>(StandardNormal) - rho * h;
        let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let bridge_max = 0.5 * (d + (d * d - 2.0 * h * u.ln()).sqrt());
        sup = sup.max(b + bridge_max);
        b += d;
    }
    Ok(sup)
}

/// Terminal value x_m(T) of a pure-noise system (all ζ = 0, bottom line
/// a driftless free Brownian motion): the across-lines passage value
/// used by the concentration check.
pub fn free_lpp_value<R: Rng>(m: usize, t: f64, j_steps: usize, rng: &mut R) -> Result<f64> {
    if !(t > 0.0) || j_steps == 0 {
        return Err(Error::Domain(format!(
            "free_lpp_value needs t > 0 and steps > 0, got ({t}, {j_steps})"
        )));
    }
    let h = t / j_steps as f64;
    let sd = h.sqrt();
    let mut prev = vec![0.0; j_steps + 1];
    for j in 1..=j_steps {
        prev[j] = prev[j - 1] + sd * rng.sample::<f64, _>(StandardNormal);
    }
    let mut cur = vec![0.0; j_steps + 1];
    for _ in 1..=m {
        for j in 1..=j_steps {
            cur[j] = (cur[j - 1] + sd * rng.sample::<f64, _>(StandardNormal)).max(prev[j]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[j_steps])
}

/// Diagnostic literal system: lines −M..N with two-sided stationary
/// initial data and the bottom line a free Brownian motion (no Burke
/// reduction). Returns the terminal positions of lines 0..=N.
pub fn literal_terminals<R: Rng>(
    params: &ModelParams,
    m_lines: usize,
    n: usize,
    grid: SimGrid,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if m_lines == 0 {
        return Err(Error::Domain("literal mode needs at least one line below 0".into()));
    }
    if !(params.lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {}", params.lambda)));
    }
    let exp = Exp::new(params.lambda).map_err(|e| Error::Domain(e.to_string()))?;
    let jj = grid.j_steps;
    let sd = grid.h.sqrt();
    // Initial positions from line −M up to N; ζ_0 = 0.
    let total = m_lines + n + 1;
    let mut zeta = vec![0.0; total];
    for k in (0..m_lines).rev() {
        zeta[k] = zeta[k + 1] - rng.sample(exp);
    }
    for k in m_lines + 1..total {
        zeta[k] = zeta[k - 1] + rng.sample(exp);
    }
    // Bottom line: free Brownian motion.
    let mut prev = vec![0.0; jj + 1];
    prev[0] = zeta[0];
    for j in 1..=jj {
        prev[j] = prev[j - 1] + sd * rng.sample::<f64, _>(StandardNormal);
    }
    let mut cur = vec![0.0; jj + 1];
    let mut out = Vec::with_capacity(n + 1);
    for (k, &z) in zeta.iter().enumerate().skip(1) {
        cur[0] = z;
        for j in 1..=jj {
            cur[j] = (cur[j - 1] + sd * rng.sample::<f64, _>(StandardNormal)).max(prev[j]);
        }
        if k >= m_lines {
            out.push(cur[jj]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    if n == 0 && out.is_empty() {
        out.push(prev[jj]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_noise(h: f64, j_steps: usize, n_particles: usize) -> NoiseGrid {
        NoiseGrid {
            h,
            j_steps,
            db: vec![vec![0.0; j_steps]; n_particles],
            db0: vec![0.0; j_steps],
        }
    }

    #[test]
    fn initial_config_basics() {
        let params = ModelParams { lambda: 1.0, rho: 1.0 };
        let mut rng = substream(7, 0, 0);
        let init = sample_initial(&params, 100_000, &mut rng).unwrap();
        assert_eq!(init.zeta[0], 0.0);
        assert!(init.zeta.windows(2).all(|p| p[0] < p[1]));
        let gaps: Vec<f64> = init.zeta.windows(2).map(|p| p[1] - p[0]).collect();
        let n = gaps.len() as f64;
        let mean = gaps.iter().sum::<f64>() / n;
        let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 1.0).abs() < 3.0 * (var / n).sqrt(), "gap mean {mean}");
    }

    #[test]
    fn evolve_zero_noise_examples() {
        // No driving force: everything stays put.
        let init = InitialConfig { zeta: vec![0.0, 1.0, 2.0], lambda: 1.0, rho: 0.0 };
        let noise = zero_noise(0.25, 8, 2);
        let traj = evolve(&init, &noise).unwrap();
        for (n, row) in traj.x.iter().enumerate() {
            assert!(row.iter().all(|&v| v == init.zeta[n]));
        }
        // Monotone driver pushes particle 1: x_1(t) = max(0.5, t).
        let init = InitialConfig { zeta: vec![0.0, 0.5], lambda: 1.0, rho: 1.0 };
        let noise = zero_noise(0.25, 8, 1);
        let traj = evolve(&init, &noise).unwrap();
        for j in 0..=8 {
            let t = 0.25 * j as f64;
            assert_eq!(traj.x[0][j], t);
            assert_eq!(traj.x[1][j], t.max(0.5));
        }
    }

    #[test]
    fn ordering_invariant_random() {
        let params = ModelParams { lambda: 1.0, rho: 0.8 };
        for trial in 0..50 {
            let mut rng = substream(11, trial, 0);
            let init = sample_initial(&params, 6, &mut rng).unwrap();
            let noise = sample_noise(0.1, 40, 6, &mut rng).unwrap();
            let traj = evolve(&init, &noise).unwrap();
            for n in 1..traj.x.len() {
                for j in 0..traj.x[n].len() {
                    assert!(traj.x[n][j] >= traj.x[n - 1][j]);
                }
            }
        }
    }

    #[test]
    fn evolve_matches_lpp_oracle() {
        let params = ModelParams { lambda: 1.0, rho: 0.7 };
        for trial in 0..200 {
            let mut rng = substream(13, trial, 0);
            let n_particles = 1 + (trial as usize % 6);
            let j_steps = 2 + (trial as usize % 9);
            let init = sample_initial(&params, n_particles, &mut rng).unwrap();
            let noise = sample_noise(0.2, j_steps, n_particles, &mut rng).unwrap();
            let traj = evolve(&init, &noise).unwrap();
            for n in 0..=n_particles {
                let oracle = lpp_oracle(&init, &noise, n).unwrap();
                assert!(
                    (traj.x[n][j_steps] - oracle).abs() <= 1e-12,
                    "trial {trial}, particle {n}: {} vs {oracle}",
                    traj.x[n][j_steps]
                );
            }
        }
    }

    #[test]
    fn lpp_trivial_examples() {
        // Single particle: the boundary path is the only one.
        let init = InitialConfig { zeta: vec![0.0], lambda: 1.0, rho: 0.3 };
        let mut rng = substream(17, 0, 0);
        let noise = sample_noise(0.5, 6, 0, &mut rng).unwrap();
        let want = 0.3 * 3.0 + noise.db0.iter().sum::<f64>();
        assert!((lpp_oracle(&init, &noise, 0).unwrap() - want).abs() < 1e-12);
        // Zero noise, no drift: only Dirac weights contribute.
        let init = InitialConfig { zeta: vec![0.0, 0.7, 1.9], lambda: 1.0, rho: 0.0 };
        let noise = zero_noise(0.5, 6, 2);
        assert_eq!(lpp_oracle(&init, &noise, 2).unwrap(), 1.9);
    }

    #[test]
    fn exit_point_examples() {
        // Zero noise, rho = 1, all ζ = 0: stay on the boundary to T.
        let init = InitialConfig { zeta: vec![0.0, 0.0, 0.0], lambda: 1.0, rho: 1.0 };
        let noise = zero_noise(0.5, 6, 2);
        let rec = exit_point(&init, &noise, 2).unwrap();
        assert_eq!(rec, ExitRecord { z: 3.0, argmax_k: 0 });
        // Zero noise, rho = 0, large ζ_1: leave immediately.
        let init = InitialConfig { zeta: vec![0.0, 50.0], lambda: 1.0, rho: 0.0 };
        let noise = zero_noise(0.5, 6, 1);
        let rec = exit_point(&init, &noise, 1).unwrap();
        assert_eq!(rec, ExitRecord { z: 0.0, argmax_k: 1 });
    }

    #[test]
    fn coupling_inequalities() {
        // Monotonicity in rho and the exit-point sandwich
        // x^{(1)}_n(T) ≤ x^{(ρ)}_n(T) + (1−ρ) z on shared noise.
        let params = ModelParams { lambda: 1.0, rho: 1.0 };
        for trial in 0..300 {
            let mut rng = substream(19, trial, 0);
            let n_particles = 1 + (trial as usize % 5);
            let init = sample_initial(&params, n_particles, &mut rng).unwrap();
            let noise = sample_noise(0.1, 30, n_particles, &mut rng).unwrap();
            let runs = coupled_rho_run(&init, &noise, &[0.6, 0.8, 1.0]).unwrap();
            for w in runs.windows(2) {
                for n in 0..=n_particles {
                    for j in 0..=30 {
                        assert!(w[0].x[n][j] <= w[1].x[n][j] + 1e-12);
                    }
                }
            }
            let full = &runs[2];
            for (i, &rho) in [0.6, 0.8].iter().enumerate() {
                for n in 0..=n_particles {
                    let z = exit_point(&init, &noise, n).unwrap().z;
                    assert!(
                        full.x[n][30] <= runs[i].x[n][30] + (1.0 - rho) * z + 1e-12,
                        "trial {trial}, rho {rho}, n {n}"
                    );
                }
            }
        }
    }

    #[test]
    fn coupled_run_with_own_rho_is_evolve() {
        let params = ModelParams { lambda: 1.0, rho: 0.9 };
        let mut rng = substream(23, 0, 0);
        let init = sample_initial(&params, 4, &mut rng).unwrap();
        let noise = sample_noise(0.1, 25, 4, &mut rng).unwrap();
        let a = evolve(&init, &noise).unwrap();
        let b = coupled_rho_run(&init, &noise, &[0.9]).unwrap();
        assert_eq!(a.x, b[0].x);
    }

    #[test]
    fn exit_value_consistent_with_evolve() {
        // The continuation table's best value at the origin equals the
        // evolved terminal position.
        let params = ModelParams { lambda: 1.0, rho: 1.0 };
        for trial in 0..50 {
            let mut rng = substream(29, trial, 0);
            let init = sample_initial(&params, 4, &mut rng).unwrap();
            let noise = sample_noise(0.2, 10, 4, &mut rng).unwrap();
            let rec = exit_point(&init, &noise, 4).unwrap();
            // Re-derive the maximal weight via the oracle and check the
            // record's candidate attains it.
            let m = continuation(&noise, init.rho, 4);
            let value = if rec.argmax_k > 0 {
                init.zeta[rec.argmax_k] + m[rec.argmax_k][0]
            } else {
                let j0 = (rec.z / noise.h).round() as usize;
                let mut w = 0.0;
                for j in 0..j0 {
                    w += line_increment(&noise, init.rho, 0, j);
                }
                w + m[1][j0]
            };
            let oracle = lpp_oracle(&init, &noise, 4).unwrap();
            assert!((value - oracle).abs() < 1e-12, "trial {trial}: {value} vs {oracle}");
        }
    }

    fn ks_against<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = samples.len() as f64;
        let mut ks: f64 = 0.0;
        for (i, &x) in samples.iter().enumerate() {
            let c = cdf(x);
            ks = ks.max((c - i as f64 / n).abs()).max(((i + 1) as f64 / n - c).abs());
        }
        ks
    }

    #[test]
    fn sup_statistic_exponential_law() {
        // Lemma-style oracle: sup (B − ρs) over a long horizon is
        // Exp(2ρ) distributed; grid bias is inside the 0.03 budget.
        let rho = 1.0;
        let t = 20.0 / (rho * rho);
        let mut samples: Vec<f64> = (0..10_000)
            .map(|trial| {
                let mut rng = substream(31, trial, 0);
                sup_drifted_bm(rho, t, 4000, &mut rng).unwrap()
            })
            .collect();
        let ks = ks_against(&mut samples, |x| 1.0 - (-2.0 * rho * x).exp());
        assert!(ks < 0.03, "KS {ks}");
    }

    #[test]
    fn sup_statistic_monotone_in_horizon() {
        // Fixed path: the sup over a longer horizon dominates. Realized
        // by comparing prefix sups of one increment stream.
        let mut rng = substream(37, 0, 0);
        let h = 0.01;
        let mut b = 0.0f64;
        let mut sup = 0.0f64;
        let mut prev_sup = 0.0;
        for step in 0..2000 {
            b += 0.1 * rng.sample::<f64, _>(StandardNormal) - h;
            sup = sup.max(b);
            assert!(sup >= prev_sup, "step {step}");
            prev_sup = sup;
        }
    }

    #[test]
    fn stationary_gaps_are_exponential() {
        // At λ = ρ the gap law at time t is Exp(ρ) across n. The
        // reflection recursion carries an O(√h) grid bias, so the gap
        // check runs on a grid finer than the default.
        let params = ModelParams { lambda: 1.0, rho: 1.0 };
        let grid = SimGrid { h: 2e-4, j_steps: 50_000 };
        let mut gaps = Vec::new();
        for trial in 0..250 {
            let xs = terminal_positions(&params, 60, grid, 41, trial).unwrap();
            gaps.extend(xs.windows(2).map(|p| p[1] - p[0]));
        }
        let ks = ks_against(&mut gaps, |x| 1.0 - (-x).exp());
        assert!(ks < 0.02, "KS {ks}");
    }

    #[test]
    fn burke_boundary_moments() {
        // x_0(t) − ρt has mean 0 and variance t.
        let t = 10.0;
        let grid = SimGrid::for_time(t).unwrap();
        let vals: Vec<f64> = (0..4000)
            .map(|trial| {
                let mut rng = substream(43, trial, 1);
                let mut b = 0.0;
                for _ in 0..grid.j_steps {
                    b += grid.h.sqrt() * rng.sample::<f64, _>(StandardNormal);
                }
                b
            })
            .collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 3.0 * (t / n).sqrt(), "mean {mean}");
        assert!((var - t).abs() < 3.0 * t * (2.0 / n).sqrt(), "var {var}");
    }

    #[test]
    fn concentration_bound() {
        // Fraction of samples with x_m(T)/(2√((m+1)T)) ≥ 2 stays below
        // 1% for m ≥ 20.
        let m = 20;
        let t = 5.0;
        let exceed = (0..500)
            .filter(|&trial| {
                let mut rng = substream(47, trial, 0);
                let y = free_lpp_value(m, t, 2000, &mut rng).unwrap();
                y / (2.0 * (((m + 1) as f64) * t).sqrt()) >= 2.0
            })
            .count();
        assert!(exceed < 5, "{exceed} of 500 exceeded");
    }

    #[test]
    fn literal_boundary_matches_burke_reduction() {
        // Two-sided stationary data: line 0 behaves like a Brownian
        // motion with drift λ (mean and variance checks within 3 SE).
        let params = ModelParams { lambda: 1.0, rho: 1.0 };
        let t = 3.0;
        let grid = SimGrid::for_time(t).unwrap();
        let m_lines = 4 * (t.ceil() as usize) + 20;
        let vals: Vec<f64> = (0..800)
            .map(|trial| {
                let mut rng = substream(53, trial, 0);
                literal_terminals(&params, m_lines, 0, grid, &mut rng).unwrap()[0]
            })
            .collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - t).abs() < 3.0 * (t / n).sqrt() + 0.05, "mean {mean}");
        assert!((var - t).abs() < 3.0 * t * (2.0 / n).sqrt() + 0.1, "var {var}");
    }

    #[test]
    fn scaled_sample_composition() {
        // The scaled observable is exactly the rescale of the right
        // lattice particle.
        let frame = ScalingFrame::new(64.0, 0.5, vec![-0.25, 0.0, 0.4]).unwrap();
        let grid = SimGrid::for_time(64.0).unwrap();
        let xs = sample_scaled(&frame, grid, 59, 3).unwrap();
        let params = ModelParams { lambda: frame.rho(), rho: frame.rho() };
        let n_max = lattice_index(64.0, 0.4).unwrap();
        let terminals = terminal_positions(&params, n_max, grid, 59, 3).unwrap();
        for (i, &r) in frame.r_list.iter().enumerate() {
            let n = lattice_index(64.0, r).unwrap();
            let want = rescale_position(terminals[n], 64.0, r).unwrap();
            assert_eq!(xs[i], want);
        }
    }

    #[test]
    fn default_grid_bounds() {
        let g = SimGrid::for_time(1000.0).unwrap();
        assert!(g.j_steps >= 2000);
        assert!(g.h <= 1000.0f64.cbrt() / 200.0 + 1e-12);
        assert!((g.h * g.j_steps as f64 - 1000.0).abs() < 1e-9);
        assert!(SimGrid::for_time(0.0).is_err());
    }

    #[test]
    fn substreams_are_independent_of_order() {
        let a: Vec<f64> = {
            let mut r = substream(61, 5, 2);
            (0..4).map(|_| r.sample::<f64, _>(StandardNormal)).collect()
        };
        // Drawing from another stream first must not affect stream (5,2).
        let _ = substream(61, 5, 1).sample::<f64, _>(StandardNormal);
        let b: Vec<f64> = {
            let mut r = substream(61, 5, 2);
            (0..4).map(|_| r.sample::<f64, _>(StandardNormal)).collect()
        };
        assert_eq!(a, b);
    }
}
