//! Experiment orchestration: configuration, empirical-CDF statistics,
//! simulation-vs-formula comparison reports, and the verification suite
//! behind the command line interface.
//!
//! Statistical tolerances budget the finite-t bias explicitly: the
//! systematic error of the prelimit law is O(t^{-1/3}), so KS thresholds
//! are c1·t^{-1/3} + c2/√trials with c1 = 0.6 and c2 = 1.7 (calibrated
//! once during bring-up and frozen).

pub mod checks;

use crate::error::{Error, Result};
use crate::fredholm::{airy_stat_fdd, finite_step_fdd, RuleSpec};
use crate::scaling::ScalingFrame;
use crate::simulator::{sample_scaled, SimGrid};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

/// KS-budget coefficient of the O(t^{-1/3}) systematic error.
pub const KS_C1: f64 = 0.6;
/// KS-budget coefficient of the 1/√trials statistical error.
pub const KS_C2: f64 = 1.7;

/// Tolerance budget for a KS comparison at horizon t with `trials`
/// samples: c1·t^{-1/3} + c2/√trials.
pub fn ks_budget(t: f64, trials: usize) -> f64 {
    KS_C1 * t.powf(-1.0 / 3.0) + KS_C2 / (trials as f64).sqrt()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Experiment mode, mirroring the CLI subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Simulate,
    LimitCdf,
    Compare,
    Verify,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "simulate" => Ok(Mode::Simulate),
            "limit-cdf" => Ok(Mode::LimitCdf),
            "compare" => Ok(Mode::Compare),
            "verify" => Ok(Mode::Verify),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

impl Mode {
    fn as_str(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::LimitCdf => "limit-cdf",
            Mode::Compare => "compare",
            Mode::Verify => "verify",
        }
    }
}

/// Output format for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<ReportFormat> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!("unknown format '{other}'"))),
        }
    }
}

/// Full configuration of one experiment run. Constructed from defaults,
/// then overridden by a flat key=value file and/or CLI flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub t: f64,
    pub delta: f64,
    pub r_list: Vec<f64>,
    pub s_list: Vec<f64>,
    pub trials: usize,
    /// Simulation step override; derived from t when absent.
    pub grid_h: Option<f64>,
    /// Simulation step-count override; derived from t/h when absent.
    pub grid_j: Option<usize>,
    pub nodes: usize,
    pub s_span: f64,
    pub seed: u64,
    pub format: ReportFormat,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(mode: Mode) -> ExperimentConfig {
        ExperimentConfig {
            mode,
            t: 1000.0,
            delta: 0.5,
            r_list: vec![0.0],
            s_list: Vec::new(),
            trials: 1000,
            grid_h: None,
            grid_j: None,
            nodes: 60,
            s_span: 14.0,
            seed: 1,
            format: ReportFormat::Csv,
            out: None,
        }
    }

    /// Applies one key=value override. Keys `r` and `s` accept
    /// comma-separated lists.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |k: &str, v: &str| Error::Config(format!("invalid value '{v}' for key '{k}'"));
        match key {
            "mode" => self.mode = value.parse()?,
            "t" => self.t = value.parse().map_err(|_| bad(key, value))?,
            "delta" => self.delta = value.parse().map_err(|_| bad(key, value))?,
            "r" => self.r_list = parse_list(value).ok_or_else(|| bad(key, value))?,
            "s" => self.s_list = parse_list(value).ok_or_else(|| bad(key, value))?,
            "trials" => self.trials = value.parse().map_err(|_| bad(key, value))?,
            "h" => self.grid_h = Some(value.parse().map_err(|_| bad(key, value))?),
            "j" => self.grid_j = Some(value.parse().map_err(|_| bad(key, value))?),
            "nodes" => self.nodes = value.parse().map_err(|_| bad(key, value))?,
            "smax" => self.s_span = value.parse().map_err(|_| bad(key, value))?,
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value))?,
            "format" => self.format = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Applies a flat key=value file (blank lines and `#` comments are
    /// skipped).
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.nodes < 8 {
            return Err(Error::Config("nodes must be at least 8".into()));
        }
        if !(self.s_span > 0.0) {
            return Err(Error::Config("smax must be positive".into()));
        }
        self.frame().map(|_| ())
    }

    pub fn frame(&self) -> Result<ScalingFrame> {
        ScalingFrame::new(self.t, self.delta, self.r_list.clone())
    }

    pub fn sim_grid(&self) -> Result<SimGrid> {
        match (self.grid_h, self.grid_j) {
            (None, None) => SimGrid::for_time(self.t),
            (Some(h), None) => {
                if !(h > 0.0) || h >= self.t {
                    return Err(Error::Config(format!("step h must be in (0, t), got {h}")));
                }
                let j = (self.t / h).ceil() as usize;
                Ok(SimGrid { h: self.t / j as f64, j_steps: j })
            }
            (_, Some(j)) => {
                if j == 0 {
                    return Err(Error::Config("j must be positive".into()));
                }
                Ok(SimGrid { h: self.t / j as f64, j_steps: j })
            }
        }
    }

    pub fn rule_spec(&self) -> RuleSpec {
        RuleSpec { n_nodes: self.nodes, s_span: self.s_span }
    }

    /// Threshold grid: the configured s values, or a default grid on
    /// [-4, 4] with step 1/2.
    pub fn s_grid(&self) -> Vec<f64> {
        if !self.s_list.is_empty() {
            return self.s_list.clone();
        }
        (0..=16).map(|k| -4.0 + 0.5 * k as f64).collect()
    }

    /// Canonical key=value rendering (fixed key order, full-precision
    /// floats); the config hash is computed from this string.
    pub fn canonical_string(&self) -> String {
        let floats = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:e}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut s = String::new();
        let _ = write!(
            s,
            "mode={};t={:e};delta={:e};r={};s={};trials={};h={};j={};nodes={};smax={:e};seed={};format={}",
            self.mode.as_str(),
            self.t,
            self.delta,
            floats(&self.r_list),
            floats(&self.s_list),
            self.trials,
            self.grid_h.map_or("auto".into(), |h| format!("{h:e}")),
            self.grid_j.map_or("auto".into(), |j| j.to_string()),
            self.nodes,
            self.s_span,
            self.seed,
            match self.format {
                ReportFormat::Csv => "csv",
                ReportFormat::Json => "json",
            },
        );
        s
    }

    /// FNV-1a 64-bit hash of the canonical string, as fixed-width hex.
    pub fn config_hash(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in self.canonical_string().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}

fn parse_list(value: &str) -> Option<Vec<f64>> {
    let items: Vec<&str> = value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return None;
    }
    items.iter().map(|s| s.parse().ok()).collect()
}

/// Empirical distribution of a finite sample, stored sorted.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    samples: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<EmpiricalCdf> {
        if samples.is_empty() {
            return Err(Error::Domain("empirical CDF needs at least one sample".into()));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::Domain("empirical CDF sample contains NaN".into()));
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(EmpiricalCdf { samples })
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// F_n(s): fraction of samples ≤ s.
    pub fn value(&self, s: f64) -> f64 {
        let k = self.samples.partition_point(|x| *x <= s);
        k as f64 / self.samples.len() as f64
    }
}

/// sup |F_n − F| over the sample points (both one-sided limits) and the
/// extra evaluation grid.
pub fn ks_distance<F>(ecdf: &EmpiricalCdf, mut cdf: F, grid: &[f64]) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let n = ecdf.n() as f64;
    let samples = ecdf.samples();
    let mut sup = 0.0f64;
    let mut i = 0usize;
    while i < samples.len() {
        let x = samples[i];
        // Group duplicates so the jump of the empirical CDF at x is handled
        // as one step: its left limit is lo and its value is hi.
        let mut j = i;
        while j < samples.len() && samples[j] == x {
            j += 1;
        }
        let lo = i as f64 / n;
        let hi = j as f64 / n;
        sup = sup.max((cdf(x)? - hi).abs());
        sup = sup.max((cdf(x.next_down())? - lo).abs());
        i = j;
    }
    for &s in grid {
        sup = sup.max((ecdf.value(s) - cdf(s)?).abs());
    }
    Ok(sup)
}

/// One row of a comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub s: f64,
    pub f_empirical: f64,
    pub f_formula: f64,
    pub abs_diff: f64,
}

/// Simulation-versus-formula comparison at one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// sup over the table of |F_empirical − F_formula|.
    pub ks: f64,
    pub n_samples: usize,
    pub rows: Vec<ReportRow>,
    pub runtime_seconds: f64,
    pub seed: u64,
    pub config_hash: String,
    pub version: String,
}

impl ComparisonReport {
    /// Builds a report from table rows, computing `ks` from the table so
    /// the invariant holds by construction.
    pub fn from_rows(
        rows: Vec<ReportRow>,
        n_samples: usize,
        runtime_seconds: f64,
        seed: u64,
        config_hash: String,
    ) -> ComparisonReport {
        let ks = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
        ComparisonReport {
            ks,
            n_samples,
            rows,
            runtime_seconds,
            seed,
            config_hash,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// CSV rendering: fixed header, 17 significant digits, '.' decimal
    /// separator.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,F_empirical,F_formula,abs_diff\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                sig17(row.s),
                sig17(row.f_empirical),
                sig17(row.f_formula),
                sig17(row.abs_diff)
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<ComparisonReport> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

/// 17 significant digits in scientific notation — enough to reproduce
/// any IEEE double bit-exactly on parse.
fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `report` to `path` (or stdout when `path` is None).
pub fn emit_report(
    report: &ComparisonReport,
    format: ReportFormat,
    path: Option<&Path>,
) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => report.to_json()?,
    };
    write_output(&text, path)
}

fn write_output(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(Error::from)
        }
    }
}

/// Evaluates the limit CDF of the configured frame at one threshold
/// vector (finite-step law for δ > 0, stationary law at δ = 0).
pub fn formula_cdf(config: &ExperimentConfig, s_list: &[f64]) -> Result<f64> {
    let frame = config.frame()?;
    let spec = config.rule_spec();
    if config.delta > 0.0 {
        finite_step_fdd(&frame, s_list, config.delta, spec, 1e-3)
    } else {
        airy_stat_fdd(&frame, s_list, spec, 1e-3)
    }
}

/// Draws `trials` independent rescaled samples, one vector of X-values
/// per configured r. Trials are independent substreams of the master
/// seed, so the result is identical for any thread count or schedule.
pub fn draw_samples(config: &ExperimentConfig) -> Result<Vec<Vec<f64>>> {
    let frame = config.frame()?;
    let grid = config.sim_grid()?;
    (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| sample_scaled(&frame, grid, config.seed, trial))
        .collect()
}

/// Simulates the configured frame and compares the empirical one-point
/// distribution against the limit formula on the threshold grid.
pub fn run_compare(config: &ExperimentConfig) -> Result<ComparisonReport> {
    config.validate()?;
    if config.r_list.len() != 1 {
        return Err(Error::Config(
            "compare needs exactly one r (multi-point laws are compared \
             via rectangle probabilities in the verify suite)"
                .into(),
        ));
    }
    let start = Instant::now();
    let samples: Vec<f64> = draw_samples(config)?.into_iter().map(|v| v[0]).collect();
    let ecdf = EmpiricalCdf::new(samples)?;
    let mut rows = Vec::new();
    for s in config.s_grid() {
        let f_formula = formula_cdf(config, &[s])?;
        let f_empirical = ecdf.value(s);
        rows.push(ReportRow {
            s,
            f_empirical,
            f_formula,
            abs_diff: (f_empirical - f_formula).abs(),
        });
    }
    Ok(ComparisonReport::from_rows(
        rows,
        ecdf.n(),
        start.elapsed().as_secs_f64(),
        config.seed,
        config.config_hash(),
    ))
}

/// Simulates the configured frame and renders the raw samples as CSV
/// (`trial,r,x`).
pub fn run_simulate(config: &ExperimentConfig) -> Result<String> {
    config.validate()?;
    let samples = draw_samples(config)?;
    let mut out = String::from("trial,r,x\n");
    for (trial, xs) in samples.iter().enumerate() {
        for (r, x) in config.r_list.iter().zip(xs) {
            let _ = writeln!(out, "{trial},{},{}", sig17(*r), sig17(*x));
        }
    }
    Ok(out)
}

/// Tabulates the limit CDF on the threshold grid as CSV (`s,F_formula`).
pub fn run_limit_cdf(config: &ExperimentConfig) -> Result<String> {
    config.validate()?;
    if config.r_list.len() != 1 {
        return Err(Error::Config(
            "limit-cdf tabulates the one-point law; pass exactly one r".into(),
        ));
    }
    let mut out = String::from("s,F_formula\n");
    for s in config.s_grid() {
        let _ = writeln!(out, "{},{}", sig17(s), sig17(formula_cdf(config, &[s])?));
    }
    Ok(out)
}

/// Writes plain text to the configured output (or stdout).
pub fn emit_text(text: &str, path: Option<&Path>) -> Result<()> {
    write_output(text, path)
}
