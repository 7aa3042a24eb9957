//! Monte Carlo sweeps over sketch families and sizes, diagnostics runs,
//! and their CSV, SVG and metadata outputs.
//!
//! # Config format
//!
//! One `key = value` pair per line. `#` starts a comment, blank lines are
//! ignored, keys may appear at most once and unknown keys are rejected.
//! Lists are comma separated.
//!
//! | key | value | default |
//! |-----|-------|---------|
//! | `mode` | `ols`, `lasso`, `svd`, `diagnostics` | `ols` |
//! | `dataset` | `synthetic` or a libsvm file path (relative to the config file) | `synthetic` |
//! | `dataset.dim` | expected feature count for libsvm files | max index seen |
//! | `standardize` | `true` / `false` (files only) | `true` |
//! | `synthetic.rows`, `synthetic.dim` | counts | `2000`, `10` |
//! | `synthetic.coherence` | `low` / `high` | `low` |
//! | `synthetic.noise` | real ≥ 0 | `1` |
//! | `synthetic.seed` | integer | `0` |
//! | `synthetic.sparsity` | nonzeros of the planted weights | dense |
//! | `synthetic.decay` | power-law spectrum exponent (replaces coherence) | unset |
//! | `operators` | `gaussian`, `less`, `less_uniform`, `srht`, `uniform`; LESS variants accept `:k=<count>` | all five |
//! | `n_grid` | sketch sizes | 8 log-spaced points in `[2d, 50d]` |
//! | `trials` | count ≥ 1 | `1000` |
//! | `seed` | master seed | `0` |
//! | `output` | output directory | `out` |
//! | `lasso.radius` | ℓ1 radius | `‖w₀‖₁` for sparse synthetic data, else `‖w*‖₁ / 2` |
//! | `lasso.tol` | solver tolerance | `1e-8` |
//! | `leverage.method` | `exact` / `approx` | `exact` |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::data::{
    format_significant, gen_power_law, gen_sparse_synthetic, gen_synthetic, load_libsvm_file, write_csv, Coherence,
    Dataset, SweepResult,
};
use crate::diagnostics::{
    empirical_quantiles, hat_matrix_expectation_check, hw_tail_compare, sketch_leverage_uniformity,
    subspace_distortion, whitener_from, TailReport, MIN_TAIL_TRIALS,
};
use crate::error::{Error, Result};
use crate::estimators::{
    constrained_full_solve, constrained_sketch_solve, mean_and_stderr, ols_error_law, randomized_svd_error,
    rsvd_error_formula, sketch_and_solve_with, ConstrainedProblem,
};
use crate::leverage::{approx_leverage_scores, exact_leverage_scores, LeverageProfile, DEFAULT_OVERSAMPLE};
use crate::linalg::{DenseMatrix, DenseVector};
use crate::rng::derive_seed;
use crate::sketch::{SketchFamily, SketchOperator, SketchSpec};

pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_GRID_POINTS: usize = 8;

/// Draws used for the scalar diagnostics (uniformity, distortion).
pub const DIAGNOSTIC_DRAWS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    OlsSweep,
    LassoSweep,
    SvdSweep,
    Diagnostics,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::OlsSweep => "ols",
            Mode::LassoSweep => "lasso",
            Mode::SvdSweep => "svd",
            Mode::Diagnostics => "diagnostics",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ols" => Ok(Mode::OlsSweep),
            "lasso" => Ok(Mode::LassoSweep),
            "svd" => Ok(Mode::SvdSweep),
            "diagnostics" => Ok(Mode::Diagnostics),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeverageMethod {
    Exact,
    Approx,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub rows: usize,
    pub dim: usize,
    pub coherence: Coherence,
    pub noise: f64,
    pub seed: u64,
    pub sparsity: Option<usize>,
    pub decay: Option<f64>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self { rows: 2000, dim: 10, coherence: Coherence::Low, noise: 1.0, seed: 0, sparsity: None, decay: None }
    }
}

impl SyntheticSpec {
    /// The dataset and, for sparse specs, the planted weights.
    pub fn generate(&self) -> Result<(Dataset, Option<DenseVector>)> {
        match (self.decay, self.sparsity) {
            (Some(_), Some(_)) => Err(Error::Config("synthetic.decay and synthetic.sparsity are exclusive".into())),
            (Some(decay), None) => Ok((gen_power_law(self.rows, self.dim, decay, self.noise, self.seed)?, None)),
            (None, Some(s)) => {
                let (ds, w) = gen_sparse_synthetic(self.rows, self.dim, self.coherence, self.noise, s, self.seed)?;
                Ok((ds, Some(w)))
            }
            (None, None) => Ok((gen_synthetic(self.rows, self.dim, self.coherence, self.noise, self.seed)?, None)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSpec {
    File { path: PathBuf, expected_dim: Option<usize> },
    Synthetic(SyntheticSpec),
}

/// A sketch family with an optional explicit LESS row count (`k = d` when
/// absent).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorTemplate {
    pub family: SketchFamily,
    pub k: Option<usize>,
}

impl OperatorTemplate {
    pub fn new(family: SketchFamily) -> Self {
        Self { family, k: None }
    }

    pub fn label(&self) -> String {
        match self.k {
            Some(k) => format!("{}:k={k}", self.family.name()),
            None => self.family.name().to_string(),
        }
    }

    pub fn spec(&self, n: usize, d: usize, seed: u64) -> SketchSpec {
        let k = if self.family.is_sparse_less() { self.k.unwrap_or(d) } else { 0 };
        SketchSpec::new(self.family, n, k, seed)
    }
}

impl std::str::FromStr for OperatorTemplate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r.trim())),
            None => (s.trim(), None),
        };
        let family: SketchFamily = name.parse()?;
        let k = match rest {
            None => None,
            Some(r) => {
                let v = r.strip_prefix("k=").ok_or_else(|| Error::Config(format!("bad operator option '{r}'")))?;
                if !family.is_sparse_less() {
                    return Err(Error::Config(format!("operator '{name}' takes no options")));
                }
                Some(v.parse().map_err(|_| Error::Config(format!("bad k '{v}'")))?)
            }
        };
        Ok(Self { family, k })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub dataset: DatasetSpec,
    pub standardize: bool,
    pub operators: Vec<OperatorTemplate>,
    pub n_grid: Option<Vec<usize>>,
    pub trials: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub lasso_radius: Option<f64>,
    pub lasso_tol: f64,
    pub leverage_method: LeverageMethod,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::OlsSweep,
            dataset: DatasetSpec::Synthetic(SyntheticSpec::default()),
            standardize: true,
            operators: SketchFamily::ALL.iter().map(|&f| OperatorTemplate::new(f)).collect(),
            n_grid: None,
            trials: DEFAULT_TRIALS,
            master_seed: 0,
            output_dir: PathBuf::from("out"),
            lasso_radius: None,
            lasso_tol: 1e-8,
            leverage_method: LeverageMethod::Exact,
        }
    }
}

const KEYS: [&str; 19] = [
    "mode",
    "dataset",
    "dataset.dim",
    "standardize",
    "synthetic.rows",
    "synthetic.dim",
    "synthetic.coherence",
    "synthetic.noise",
    "synthetic.seed",
    "synthetic.sparsity",
    "synthetic.decay",
    "operators",
    "n_grid",
    "trials",
    "seed",
    "output",
    "lasso.radius",
    "lasso.tol",
    "leverage.method",
];

fn cfg_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.parse().map_err(|_| cfg_err(line, format!("invalid value '{v}' for {key}")))
}

fn parse_bool(key: &str, v: &str, line: usize) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(cfg_err(line, format!("invalid boolean '{v}' for {key}"))),
    }
}

impl ExperimentConfig {
    /// Parses the flat `key = value` format. Relative dataset paths are kept
    /// as written; see [`ExperimentConfig::from_file`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| cfg_err(line, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            let known =
                KEYS.iter().find(|k| **k == key).ok_or_else(|| cfg_err(line, format!("unknown key '{key}'")))?;
            if seen.insert(known, (line, value)).is_some() {
                return Err(cfg_err(line, format!("duplicate key '{key}'")));
            }
        }

        let mut cfg = ExperimentConfig::default();
        let mut syn = SyntheticSpec::default();
        let mut file: Option<PathBuf> = None;
        let mut expected_dim = None;
        for (&key, &(line, v)) in &seen {
            match key {
                "mode" => cfg.mode = v.parse().map_err(|e| cfg_err(line, e))?,
                "dataset" => {
                    if v != "synthetic" {
                        file = Some(PathBuf::from(v));
                    }
                }
                "dataset.dim" => expected_dim = Some(parse_value(key, v, line)?),
                "standardize" => cfg.standardize = parse_bool(key, v, line)?,
                "synthetic.rows" => syn.rows = parse_value(key, v, line)?,
                "synthetic.dim" => syn.dim = parse_value(key, v, line)?,
                "synthetic.coherence" => syn.coherence = v.parse().map_err(|e| cfg_err(line, e))?,
                "synthetic.noise" => syn.noise = parse_value(key, v, line)?,
                "synthetic.seed" => syn.seed = parse_value(key, v, line)?,
                "synthetic.sparsity" => syn.sparsity = Some(parse_value(key, v, line)?),
                "synthetic.decay" => syn.decay = Some(parse_value(key, v, line)?),
                "operators" => {
                    cfg.operators = v
                        .split(',')
                        .map(|s| s.trim().parse::<OperatorTemplate>().map_err(|e| cfg_err(line, e)))
                        .collect::<Result<_>>()?;
                    if cfg.operators.is_empty() {
                        return Err(cfg_err(line, "empty operator list"));
                    }
                }
                "n_grid" => {
                    let grid: Vec<usize> =
                        v.split(',').map(|s| parse_value(key, s.trim(), line)).collect::<Result<_>>()?;
                    cfg.n_grid = Some(grid);
                }
                "trials" => cfg.trials = parse_value(key, v, line)?,
                "seed" => cfg.master_seed = parse_value(key, v, line)?,
                "output" => cfg.output_dir = PathBuf::from(v),
                "lasso.radius" => cfg.lasso_radius = Some(parse_value(key, v, line)?),
                "lasso.tol" => cfg.lasso_tol = parse_value(key, v, line)?,
                "leverage.method" => {
                    cfg.leverage_method = match v {
                        "exact" => LeverageMethod::Exact,
                        "approx" => LeverageMethod::Approx,
                        _ => return Err(cfg_err(line, format!("invalid leverage method '{v}'"))),
                    }
                }
                _ => unreachable!(),
            }
        }
        cfg.dataset = match file {
            Some(path) => DatasetSpec::File { path, expected_dim },
            None => DatasetSpec::Synthetic(syn),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; a relative dataset path is resolved against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let DatasetSpec::File { path: data, .. } = &mut cfg.dataset {
            if data.is_relative() {
                if let Some(dir) = path.parent() {
                    *data = dir.join(&*data);
                }
            }
        }
        Ok(cfg)
    }

    /// Checks that do not need the dataset.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.operators.is_empty() {
            return Err(Error::Config("no operators configured".into()));
        }
        if let Some(grid) = &self.n_grid {
            if grid.is_empty() || grid.contains(&0) {
                return Err(Error::Config("n_grid must list positive sizes".into()));
            }
        }
        if let Some(r) = self.lasso_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Config(format!("lasso.radius must be positive, got {r}")));
            }
        }
        if !(self.lasso_tol > 0.0) {
            return Err(Error::Config("lasso.tol must be positive".into()));
        }
        Ok(())
    }

    /// Canonical `key = value` rendering, parseable by [`ExperimentConfig::parse`].
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mode = {}", self.mode.name());
        match &self.dataset {
            DatasetSpec::File { path, expected_dim } => {
                let _ = writeln!(s, "dataset = {}", path.display());
                if let Some(d) = expected_dim {
                    let _ = writeln!(s, "dataset.dim = {d}");
                }
                let _ = writeln!(s, "standardize = {}", self.standardize);
            }
            DatasetSpec::Synthetic(syn) => {
                let _ = writeln!(s, "dataset = synthetic");
                let _ = writeln!(s, "synthetic.rows = {}", syn.rows);
                let _ = writeln!(s, "synthetic.dim = {}", syn.dim);
                let coh = match syn.coherence {
                    Coherence::Low => "low",
                    Coherence::High => "high",
                };
                let _ = writeln!(s, "synthetic.coherence = {coh}");
                let _ = writeln!(s, "synthetic.noise = {}", syn.noise);
                let _ = writeln!(s, "synthetic.seed = {}", syn.seed);
                if let Some(sp) = syn.sparsity {
                    let _ = writeln!(s, "synthetic.sparsity = {sp}");
                }
                if let Some(dc) = syn.decay {
                    let _ = writeln!(s, "synthetic.decay = {dc}");
                }
            }
        }
        let ops: Vec<String> = self.operators.iter().map(|o| o.label()).collect();
        let _ = writeln!(s, "operators = {}", ops.join(", "));
        if let Some(grid) = &self.n_grid {
            let g: Vec<String> = grid.iter().map(|n| n.to_string()).collect();
            let _ = writeln!(s, "n_grid = {}", g.join(", "));
        }
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "seed = {}", self.master_seed);
        let _ = writeln!(s, "output = {}", self.output_dir.display());
        if let Some(r) = self.lasso_radius {
            let _ = writeln!(s, "lasso.radius = {r}");
        }
        let _ = writeln!(s, "lasso.tol = {}", self.lasso_tol);
        let method = match self.leverage_method {
            LeverageMethod::Exact => "exact",
            LeverageMethod::Approx => "approx",
        };
        let _ = writeln!(s, "leverage.method = {method}");
        s
    }

    /// Loads or generates the dataset, plus the planted weights of sparse
    /// synthetic data.
    pub fn load_dataset(&self) -> Result<(Dataset, Option<DenseVector>)> {
        match &self.dataset {
            DatasetSpec::File { path, expected_dim } => {
                Ok((load_libsvm_file(path, *expected_dim, self.standardize)?, None))
            }
            DatasetSpec::Synthetic(spec) => spec.generate().map_err(|e| match e {
                Error::InvalidArgument(m) => Error::Config(m),
                other => other,
            }),
        }
    }

    /// The configured grid, or the default for dimension `d`.
    pub fn grid_for(&self, d: usize) -> Vec<usize> {
        self.n_grid.clone().unwrap_or_else(|| default_grid(d))
    }
}

/// [`DEFAULT_GRID_POINTS`] log-spaced sizes from `2d` to `50d`, rounded and
/// deduplicated, never below `d + 2`.
pub fn default_grid(d: usize) -> Vec<usize> {
    let lo = (2 * d) as f64;
    let ratio = 25.0f64;
    let mut grid: Vec<usize> = (0..DEFAULT_GRID_POINTS)
        .map(|i| {
            let t = i as f64 / (DEFAULT_GRID_POINTS - 1) as f64;
            ((lo * ratio.powf(t)).round() as usize).max(d + 2)
        })
        .collect();
    grid.dedup();
    grid
}

fn trial_seed(master: u64, op_idx: usize, n_idx: usize, trial: usize) -> u64 {
    derive_seed(master, &[op_idx as u64, n_idx as u64, trial as u64])
}

/// Folds per-trial outcomes (in trial order) into one result row. `None`
/// marks a degenerate trial, excluded from the mean but counted.
fn aggregate(operator: String, n: usize, formula: f64, values: &[Option<f64>]) -> SweepResult {
    let kept: Vec<f64> = values.iter().flatten().copied().collect();
    let degenerate_count = values.len() - kept.len();
    let (mean, stderr) = if kept.is_empty() { (f64::NAN, 0.0) } else { mean_and_stderr(&kept) };
    SweepResult {
        operator,
        n,
        trials: kept.len(),
        mean_norm_err: mean,
        stderr,
        gaussian_formula: formula,
        degenerate_count,
        stderr_defined: kept.len() >= 2,
    }
}

fn build_operator(
    template: &OperatorTemplate,
    n: usize,
    a: &DenseMatrix,
    profile: &dyn Fn() -> Result<LeverageProfile>,
) -> Result<SketchOperator> {
    let spec = template.spec(n, a.cols(), 0);
    spec.validate(a.rows()).map_err(|e| Error::Config(format!("operator {} at n = {n}: {e}", template.label())))?;
    if template.family == SketchFamily::Less {
        let prof = profile()?;
        SketchOperator::new(spec, a.rows(), Some(&prof))
    } else {
        SketchOperator::new(spec, a.rows(), None)
    }
}

fn leverage_for(a: &DenseMatrix, method: LeverageMethod, seed: u64) -> Result<LeverageProfile> {
    match method {
        LeverageMethod::Exact => exact_leverage_scores(a),
        LeverageMethod::Approx => approx_leverage_scores(a, DEFAULT_OVERSAMPLE, seed),
    }
}

/// Sketch-and-solve least squares: mean normalized excess loss per
/// (operator, n) cell next to the Gaussian law.
pub fn run_ols_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepResult>> {
    cfg.validate()?;
    let (ds, _) = cfg.load_dataset()?;
    let p = ds.problem()?;
    if p.is_degenerate() {
        return Err(Error::DegenerateDataset);
    }
    let d = p.dim();
    let grid = cfg.grid_for(d);
    if let Some(&n) = grid.iter().find(|&&n| n < d + 2) {
        return Err(Error::Config(format!("sketch size {n} is below d + 2 = {}", d + 2)));
    }
    let lev_seed = derive_seed(cfg.master_seed, &[u64::MAX]);
    let profile = || -> Result<LeverageProfile> {
        match cfg.leverage_method {
            LeverageMethod::Exact => Ok(p.leverage().clone()),
            LeverageMethod::Approx => approx_leverage_scores(p.a(), DEFAULT_OVERSAMPLE, lev_seed),
        }
    };
    let mut out = Vec::new();
    for (oi, template) in cfg.operators.iter().enumerate() {
        for (ni, &n) in grid.iter().enumerate() {
            let op = build_operator(template, n, p.a(), &profile)?;
            let values: Vec<Option<f64>> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| match sketch_and_solve_with(&p, &op, trial_seed(cfg.master_seed, oi, ni, t)) {
                    Ok(o) => Ok(Some(o.normalized_error)),
                    Err(Error::RankDeficientSketch { .. }) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<_>>()?;
            out.push(aggregate(template.label(), n, ols_error_law(d, n)?, &values));
        }
    }
    Ok(out)
}

/// ℓ1-constrained least squares: normalized excess loss of the sketched
/// constrained solution over the full constrained optimum. The formula
/// column is `nan`, as no closed form applies.
pub fn run_lasso_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepResult>> {
    cfg.validate()?;
    let (ds, planted) = cfg.load_dataset()?;
    let base = ds.problem()?;
    let d = base.dim();
    let radius = match (cfg.lasso_radius, &planted) {
        (Some(r), _) => r,
        (None, Some(w)) => w.norm_l1(),
        (None, None) => 0.5 * base.w_star().norm_l1(),
    };
    let sparsity = planted.as_ref().map_or(d, |w| w.iter().filter(|v| **v != 0.0).count());
    let cp = ConstrainedProblem::new(base, radius, sparsity)?;
    let w_full = constrained_full_solve(&cp, cfg.lasso_tol)?;
    let loss_full = cp.base.loss(&w_full);
    if loss_full <= crate::estimators::DEGENERATE_LOSS_REL * cp.base.b().norm().powi(2) {
        return Err(Error::DegenerateDataset);
    }
    let grid = cfg.grid_for(d);
    let lev_seed = derive_seed(cfg.master_seed, &[u64::MAX]);
    let profile = || -> Result<LeverageProfile> {
        match cfg.leverage_method {
            LeverageMethod::Exact => Ok(cp.base.leverage().clone()),
            LeverageMethod::Approx => approx_leverage_scores(cp.base.a(), DEFAULT_OVERSAMPLE, lev_seed),
        }
    };
    let mut out = Vec::new();
    for (oi, template) in cfg.operators.iter().enumerate() {
        for (ni, &n) in grid.iter().enumerate() {
            build_operator(template, n, cp.base.a(), &profile)?;
            let values: Vec<Option<f64>> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let spec = template.spec(n, d, trial_seed(cfg.master_seed, oi, ni, t));
                    match constrained_sketch_solve(&cp, &spec, cfg.lasso_tol) {
                        Ok(w) => Ok(Some(cp.base.loss(&w) / loss_full - 1.0)),
                        Err(Error::NoConvergence { .. }) => Ok(None),
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<_>>()?;
            out.push(aggregate(template.label(), n, f64::NAN, &values));
        }
    }
    Ok(out)
}

/// Randomized low-rank approximation from the row span of `S A`: mean of
/// `‖A − A P‖_F² / ‖A‖_F²` per cell, next to the statistical-dimension
/// prediction `n λ_n / ‖A‖_F²` (`nan` where `n` reaches the rank).
pub fn run_svd_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepResult>> {
    cfg.validate()?;
    let (ds, _) = cfg.load_dataset()?;
    let a = &ds.a;
    let total = a.frobenius_norm_sq();
    if total == 0.0 {
        return Err(Error::DegenerateDataset);
    }
    let grid = cfg.grid_for(a.cols());
    let lev_seed = derive_seed(cfg.master_seed, &[u64::MAX]);
    let cached = std::sync::OnceLock::new();
    let profile = || -> Result<LeverageProfile> {
        if let Some(p) = cached.get() {
            return Ok(Clone::clone(p));
        }
        let p = leverage_for(a, cfg.leverage_method, lev_seed)?;
        Ok(cached.get_or_init(|| p).clone())
    };
    let mut out = Vec::new();
    for (oi, template) in cfg.operators.iter().enumerate() {
        for (ni, &n) in grid.iter().enumerate() {
            let op = build_operator(template, n, a, &profile)?;
            let formula = match rsvd_error_formula(a, n) {
                Ok(v) => v / total,
                Err(Error::OutOfRange { .. }) => f64::NAN,
                Err(e) => return Err(e),
            };
            let values: Vec<Option<f64>> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let sa = op.apply_with_seed(a, trial_seed(cfg.master_seed, oi, ni, t))?;
                    Ok(Some(randomized_svd_error(a, &sa)? / total))
                })
                .collect::<Result<_>>()?;
            out.push(aggregate(template.label(), n, formula, &values));
        }
    }
    Ok(out)
}

/// Per-operator, per-size diagnostics bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsReport {
    pub operator: String,
    pub n: usize,
    /// Hanson-Wright tails of single whitened sketch rows with `B = I`.
    pub hanson_wright: TailReport,
    /// Quantiles (0.5, 0.95) of `max_i |ℓ_i(SA) n/d − 1|` over draws.
    pub leverage_uniformity: Vec<(f64, f64)>,
    /// Quantiles (0.5, 0.95) of the subspace distortion over draws.
    pub subspace_distortion: Vec<(f64, f64)>,
    /// `None` when `n ≤ d + 1`.
    pub hat_matrix_deviation: Option<f64>,
}

impl DiagnosticsReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[{} n={}]", self.operator, self.n);
        let _ = writeln!(s, "hanson_wright.trials = {}", self.hanson_wright.trials);
        for ((l, q), (_, r)) in self.hanson_wright.quantiles.iter().zip(&self.hanson_wright.reference_quantiles) {
            let _ = writeln!(
                s,
                "hanson_wright.q{l} = {} (gaussian {})",
                format_significant(*q, 10),
                format_significant(*r, 10)
            );
        }
        for (name, qs) in
            [("leverage_uniformity", &self.leverage_uniformity), ("subspace_distortion", &self.subspace_distortion)]
        {
            for (l, q) in qs {
                let _ = writeln!(s, "{name}.q{l} = {}", format_significant(*q, 10));
            }
        }
        match self.hat_matrix_deviation {
            Some(v) => {
                let _ = writeln!(s, "hat_matrix_deviation = {}", format_significant(v, 10));
            }
            None => {
                let _ = writeln!(s, "hat_matrix_deviation = n/a");
            }
        }
        s
    }
}

/// Runs the Hanson-Wright tail comparison, sketch-leverage uniformity,
/// subspace distortion and hat-matrix check for each operator and size.
pub fn run_diagnostics(cfg: &ExperimentConfig) -> Result<Vec<DiagnosticsReport>> {
    cfg.validate()?;
    if cfg.trials < MIN_TAIL_TRIALS {
        return Err(Error::Config(format!("diagnostics need at least {MIN_TAIL_TRIALS} trials")));
    }
    let (ds, _) = cfg.load_dataset()?;
    let p = ds.problem()?;
    let a = p.a();
    let d = p.dim();
    let whitener = whitener_from(a)?;
    let eye = DenseMatrix::identity(d);
    let grid = cfg.grid_for(d);
    let lev_seed = derive_seed(cfg.master_seed, &[u64::MAX]);
    let profile = || leverage_for(a, cfg.leverage_method, lev_seed);
    let mut out = Vec::new();
    for (oi, template) in cfg.operators.iter().enumerate() {
        let single = build_operator(template, 1, a, &profile)?;
        let sampler = |s: u64| DenseVector::from(single.apply_with_seed(a, s).map(|m| m.row(0)).unwrap_or_default());
        for (ni, &n) in grid.iter().enumerate() {
            let cell = derive_seed(cfg.master_seed, &[oi as u64, ni as u64]);
            let hw = hw_tail_compare(sampler, &whitener, &eye, cfg.trials, derive_seed(cell, &[0]))?;
            let op = build_operator(template, n, a, &profile)?;
            let draws: Vec<(f64, f64)> = (0..DIAGNOSTIC_DRAWS)
                .into_par_iter()
                .map(|t| {
                    let sa = op.apply_with_seed(a, derive_seed(cell, &[1, t as u64]))?;
                    let uni = match sketch_leverage_uniformity(&sa) {
                        Ok(v) => v,
                        Err(Error::RankDeficient { .. }) => f64::INFINITY,
                        Err(e) => return Err(e),
                    };
                    Ok((uni, subspace_distortion(&sa, a)?))
                })
                .collect::<Result<_>>()?;
            let levels = [0.5, 0.95];
            let uni: Vec<f64> = draws.iter().map(|x| x.0).collect();
            let dist: Vec<f64> = draws.iter().map(|x| x.1).collect();
            let spec = template.spec(n, d, 0);
            let hat = if n > d + 1 {
                match hat_matrix_expectation_check(&p, &spec, cfg.trials, derive_seed(cell, &[2])) {
                    Ok(v) => Some(v),
                    Err(Error::RankDeficient { .. }) => Some(f64::INFINITY),
                    Err(e) => return Err(e),
                }
            } else {
                None
            };
            out.push(DiagnosticsReport {
                operator: template.label(),
                n,
                hanson_wright: hw,
                leverage_uniformity: empirical_quantiles(&uni, &levels),
                subspace_distortion: empirical_quantiles(&dist, &levels),
                hat_matrix_deviation: hat,
            });
        }
    }
    Ok(out)
}

/// Leverage profile of the configured dataset.
pub fn run_leverage(cfg: &ExperimentConfig) -> Result<LeverageProfile> {
    let (ds, _) = cfg.load_dataset()?;
    leverage_for(&ds.a, cfg.leverage_method, derive_seed(cfg.master_seed, &[u64::MAX]))
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
const SVG_W: f64 = 720.0;
const SVG_H: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 50.0;

struct LogAxis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl LogAxis {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (mut lo, mut hi) = (lo.log10(), hi.log10());
        if hi - lo < 1e-9 {
            lo -= 0.5;
            hi += 0.5;
        } else {
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Self { lo, hi, px_lo, px_hi }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v.log10() - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

/// Standalone SVG: log-log axes, one polyline per operator with ±1
/// standard-error band and a marker per point, and the formula column as a
/// dashed reference curve. The reference path carries `data-n` and
/// `data-y` attributes with the plotted values at 10 significant digits.
pub fn emit_svg_plot<W: Write>(results: &[SweepResult], mut sink: W) -> Result<()> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    let mut by_op: BTreeMap<&str, Vec<&SweepResult>> = BTreeMap::new();
    for r in results {
        by_op.entry(r.operator.as_str()).or_default().push(r);
    }
    by_op.values_mut().for_each(|v| v.sort_by_key(|r| r.n));

    let mut reference: BTreeMap<usize, f64> = BTreeMap::new();
    for r in results {
        if r.gaussian_formula.is_finite() && r.gaussian_formula > 0.0 {
            reference.entry(r.n).or_insert(r.gaussian_formula);
        }
    }

    let positive = |v: f64| v.is_finite() && v > 0.0;
    let mut ys: Vec<f64> = Vec::new();
    for r in results {
        if positive(r.mean_norm_err) {
            ys.push(r.mean_norm_err);
            ys.push(r.mean_norm_err + r.stderr);
            if positive(r.mean_norm_err - r.stderr) {
                ys.push(r.mean_norm_err - r.stderr);
            }
        }
    }
    ys.extend(reference.values());
    if ys.is_empty() {
        ys.push(1.0);
    }
    let ymin = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let ymax = ys.iter().copied().fold(0.0, f64::max);
    let nmin = results.iter().map(|r| r.n).min().unwrap() as f64;
    let nmax = results.iter().map(|r| r.n).max().unwrap() as f64;
    let xa = LogAxis::new(nmin, nmax, MARGIN_L, SVG_W - MARGIN_R);
    let ya = LogAxis::new(ymin, ymax, SVG_H - MARGIN_B, MARGIN_T);
    let floor = 10f64.powf(ya.lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{SVG_W}" height="{SVG_H}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (MARGIN_L, SVG_W - MARGIN_R, MARGIN_T, SVG_H - MARGIN_B);
    let _ =
        writeln!(s, r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y1 - y0);

    // Decade ticks on y, one tick per sketch size on x.
    let mut e = ya.lo.floor() as i32;
    while (e as f64) <= ya.hi {
        if (e as f64) >= ya.lo {
            let y = ya.map(10f64.powi(e));
            let _ = writeln!(s, r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#dddddd"/>"##);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"#, x0 - 6.0, y + 4.0);
        }
        e += 1;
    }
    let ns: std::collections::BTreeSet<usize> = results.iter().map(|r| r.n).collect();
    for &n in &ns {
        let x = xa.map(n as f64);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{y1}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y1 + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{n}</text>"#, y1 + 18.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">sketch size n</text>"#,
        0.5 * (x0 + x1),
        SVG_H - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">normalized error</text>"#,
        0.5 * (y0 + y1),
        0.5 * (y0 + y1)
    );

    for (idx, (op, rows)) in by_op.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let pts: Vec<&&SweepResult> = rows.iter().filter(|r| positive(r.mean_norm_err)).collect();
        let _ = writeln!(s, r#"<g class="series" data-operator="{op}">"#);
        if !pts.is_empty() {
            let upper: Vec<String> = pts
                .iter()
                .map(|r| format!("{:.2},{:.2}", xa.map(r.n as f64), ya.map(r.mean_norm_err + r.stderr)))
                .collect();
            let lower: Vec<String> = pts
                .iter()
                .rev()
                .map(|r| format!("{:.2},{:.2}", xa.map(r.n as f64), ya.map((r.mean_norm_err - r.stderr).max(floor))))
                .collect();
            let _ = writeln!(
                s,
                r#"<polygon class="band" points="{} {}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
                upper.join(" "),
                lower.join(" ")
            );
            let line: Vec<String> =
                pts.iter().map(|r| format!("{:.2},{:.2}", xa.map(r.n as f64), ya.map(r.mean_norm_err))).collect();
            let _ =
                writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, line.join(" "));
            for r in &pts {
                let _ = writeln!(
                    s,
                    r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    xa.map(r.n as f64),
                    ya.map(r.mean_norm_err)
                );
            }
        }
        let ly = MARGIN_T + 16.0 + 18.0 * idx as f64;
        let lx = SVG_W - MARGIN_R + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{op}</text>"#, lx + 26.0, ly + 4.0);
        let _ = writeln!(s, "</g>");
    }

    if !reference.is_empty() {
        let pts: Vec<String> =
            reference.iter().map(|(&n, &y)| format!("{:.2},{:.2}", xa.map(n as f64), ya.map(y))).collect();
        let data_n: Vec<String> = reference.keys().map(|n| n.to_string()).collect();
        let data_y: Vec<String> = reference.values().map(|y| format_significant(*y, 10)).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="reference" data-n="{}" data-y="{}" points="{}" fill="none" stroke="black" stroke-dasharray="6 4"/>"#,
            data_n.join(" "),
            data_y.join(" "),
            pts.join(" ")
        );
        let ly = MARGIN_T + 16.0 + 18.0 * by_op.len() as f64;
        let lx = SVG_W - MARGIN_R + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="black" stroke-dasharray="6 4"/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">reference</text>"#, lx + 26.0, ly + 4.0);
    }
    let _ = writeln!(s, "</svg>");
    sink.write_all(s.as_bytes())?;
    Ok(())
}

/// Writes `results.csv`, `plot.svg` and `meta.txt` into `dir`.
pub fn write_sweep_outputs(cfg: &ExperimentConfig, results: &[SweepResult], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_csv(results, std::io::BufWriter::new(std::fs::File::create(dir.join("results.csv"))?))?;
    emit_svg_plot(results, std::io::BufWriter::new(std::fs::File::create(dir.join("plot.svg"))?))?;
    write_meta(cfg, dir)
}

/// Writes `diagnostics.txt` and `meta.txt` into `dir`.
pub fn write_diagnostics_outputs(cfg: &ExperimentConfig, reports: &[DiagnosticsReport], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let body: String = reports.iter().map(|r| r.render() + "\n").collect();
    std::fs::write(dir.join("diagnostics.txt"), body)?;
    write_meta(cfg, dir)
}

pub fn write_meta(cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "lesskit {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "master_seed = {}", cfg.master_seed);
    if matches!(cfg.dataset, DatasetSpec::File { .. }) {
        let _ = writeln!(s, "standardized = {}", cfg.standardize);
    }
    let _ = writeln!(s, "\n# config");
    s.push_str(&cfg.render());
    std::fs::write(dir.join("meta.txt"), s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::read_csv;

    fn small_cfg(extra: &str) -> ExperimentConfig {
        ExperimentConfig::parse(&format!(
            "synthetic.rows = 300\nsynthetic.dim = 4\noperators = gaussian, less\nn_grid = 12, 20\ntrials = 50\nseed = 9\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn config_defaults_and_round_trip() {
        let cfg = ExperimentConfig::parse("# nothing\n\n").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        let cfg = small_cfg("");
        let again = ExperimentConfig::parse(&cfg.render()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn config_parses_operator_options() {
        let cfg = ExperimentConfig::parse("operators = less:k=3, srht, less_uniform:k=2").unwrap();
        assert_eq!(cfg.operators[0], OperatorTemplate { family: SketchFamily::Less, k: Some(3) });
        assert_eq!(cfg.operators[0].label(), "less:k=3");
        assert_eq!(cfg.operators[1].spec(16, 5, 0).k, 0);
        assert_eq!(OperatorTemplate::new(SketchFamily::Less).spec(16, 5, 0).k, 5);
    }

    #[test]
    fn config_errors() {
        for text in [
            "bogus = 1",
            "trials = 0",
            "trials = many",
            "seed = 1\nseed = 2",
            "mode = fast",
            "operators = gaussian:k=2",
            "operators = sparse",
            "no equals sign",
            "lasso.radius = -1",
            "standardize = maybe",
        ] {
            assert!(matches!(ExperimentConfig::parse(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn default_grid_spans_two_to_fifty_d() {
        let g = default_grid(10);
        assert_eq!(g.len(), 8);
        assert_eq!(g[0], 20);
        assert_eq!(*g.last().unwrap(), 500);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(default_grid(1).iter().all(|&n| n >= 3));
    }

    #[test]
    fn ols_sweep_shapes_and_determinism() {
        let cfg = small_cfg("");
        let res = run_ols_sweep(&cfg).unwrap();
        assert_eq!(res.len(), 4);
        for r in &res {
            assert_eq!(r.trials + r.degenerate_count, 50);
            assert!(r.stderr >= 0.0 && r.stderr_defined);
            assert!((r.gaussian_formula - ols_error_law(4, r.n).unwrap()).abs() < 1e-15);
        }
        assert_eq!(res, run_ols_sweep(&cfg).unwrap());
    }

    #[test]
    fn single_trial_flags_undefined_stderr() {
        let res = run_ols_sweep(&small_cfg("").clone_with_trials(1)).unwrap();
        assert!(res.iter().all(|r| r.stderr == 0.0 && !r.stderr_defined));
    }

    impl ExperimentConfig {
        fn clone_with_trials(&self, trials: usize) -> Self {
            Self { trials, ..self.clone() }
        }
    }

    #[test]
    fn ols_sweep_rejects_bad_inputs() {
        assert!(matches!(run_ols_sweep(&small_cfg("synthetic.noise = 0")), Err(Error::DegenerateDataset)));
        let cfg = ExperimentConfig::parse("synthetic.rows = 300\nsynthetic.dim = 4\nn_grid = 5\ntrials = 3").unwrap();
        assert!(matches!(run_ols_sweep(&cfg), Err(Error::Config(_))));
        let cfg = ExperimentConfig::parse(
            "synthetic.rows = 300\nsynthetic.dim = 4\noperators = srht\nn_grid = 600\ntrials = 3",
        )
        .unwrap();
        assert!(matches!(run_ols_sweep(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn lasso_and_svd_sweeps_run() {
        let cfg = small_cfg("mode = lasso\nsynthetic.sparsity = 2");
        let res = run_lasso_sweep(&cfg).unwrap();
        assert_eq!(res.len(), 4);
        assert!(res.iter().all(|r| r.gaussian_formula.is_nan() && r.mean_norm_err > -1e-6));

        let cfg = ExperimentConfig::parse(
            "mode = svd\nsynthetic.rows = 80\nsynthetic.dim = 20\nsynthetic.decay = 0.5\noperators = gaussian, less\nn_grid = 3, 6\ntrials = 40",
        )
        .unwrap();
        let res = run_svd_sweep(&cfg).unwrap();
        assert!(res.iter().all(|r| r.mean_norm_err > 0.0 && r.mean_norm_err < 1.0));
        assert!(res.iter().all(|r| r.gaussian_formula > 0.0 && r.gaussian_formula < 1.0));
    }

    #[test]
    fn diagnostics_run_and_render() {
        let cfg = ExperimentConfig::parse(
            "mode = diagnostics\nsynthetic.rows = 256\nsynthetic.dim = 3\noperators = gaussian, srht, less\nn_grid = 4, 12\ntrials = 1000",
        )
        .unwrap();
        let reports = run_diagnostics(&cfg).unwrap();
        assert_eq!(reports.len(), 6);
        assert!(reports.iter().filter(|r| r.n == 4).all(|r| r.hat_matrix_deviation.is_none()));
        assert!(reports.iter().filter(|r| r.n == 12).all(|r| r.hat_matrix_deviation.is_some()));
        let text = reports[0].render();
        assert!(text.starts_with("[gaussian n=4]"));
        assert!(text.contains("hanson_wright.q0.99"));
        assert!(run_diagnostics(&cfg.clone_with_trials(10)).is_err());
    }

    fn reference_points(svg: &str) -> Vec<(usize, f64)> {
        let line = svg.lines().find(|l| l.contains(r#"class="reference""#)).unwrap();
        let attr = |name: &str| {
            let start = line.find(&format!("{name}=\"")).unwrap() + name.len() + 2;
            let end = start + line[start..].find('"').unwrap();
            line[start..end].to_string()
        };
        let ns: Vec<usize> = attr("data-n").split(' ').map(|v| v.parse().unwrap()).collect();
        let ys: Vec<f64> = attr("data-y").split(' ').map(|v| v.parse().unwrap()).collect();
        ns.into_iter().zip(ys).collect()
    }

    #[test]
    fn svg_reference_curve_parses_back() {
        let res = run_ols_sweep(&small_cfg("")).unwrap();
        let mut buf = Vec::new();
        emit_svg_plot(&res, &mut buf).unwrap();
        let svg = String::from_utf8(buf).unwrap();
        let pts = reference_points(&svg);
        assert_eq!(pts.len(), 2);
        for (n, y) in pts {
            let want = ols_error_law(4, n).unwrap();
            assert!((y - want).abs() <= 5e-10 * want, "{y} vs {want}");
        }
        assert_eq!(svg.matches(r#"class="marker""#).count(), 4);
        assert_eq!(svg.matches(r#"class="band""#).count(), 2);
    }

    #[test]
    fn svg_single_point_and_errors() {
        let r = SweepResult {
            operator: "less".into(),
            n: 40,
            trials: 10,
            mean_norm_err: 0.3,
            stderr: 0.02,
            gaussian_formula: 10.0 / 29.0,
            degenerate_count: 0,
            stderr_defined: true,
        };
        let g = SweepResult { operator: "gaussian".into(), ..r.clone() };
        let mut a = Vec::new();
        emit_svg_plot(&[r.clone(), g.clone()], &mut a).unwrap();
        let svg = String::from_utf8(a.clone()).unwrap();
        assert_eq!(svg.matches(r#"class="marker""#).count(), 2);
        let mut b = Vec::new();
        emit_svg_plot(&[r, g], &mut b).unwrap();
        assert_eq!(a, b);
        assert!(matches!(emit_svg_plot(&[], Vec::new()), Err(Error::EmptyResults)));
    }

    #[test]
    fn outputs_are_written_and_reproducible() {
        let cfg = small_cfg("");
        let res = run_ols_sweep(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_sweep_outputs(&cfg, &res, dir.path()).unwrap();
        let csv = std::fs::read(dir.path().join("results.csv")).unwrap();
        let back = read_csv(csv.as_slice()).unwrap();
        assert_eq!(back.len(), res.len());
        let meta = std::fs::read_to_string(dir.path().join("meta.txt")).unwrap();
        assert!(meta.contains("master_seed = 9"));
        assert!(meta.contains(env!("CARGO_PKG_VERSION")));

        let dir2 = tempfile::tempdir().unwrap();
        write_sweep_outputs(&cfg, &run_ols_sweep(&cfg).unwrap(), dir2.path()).unwrap();
        for f in ["results.csv", "plot.svg", "meta.txt"] {
            assert_eq!(std::fs::read(dir.path().join(f)).unwrap(), std::fs::read(dir2.path().join(f)).unwrap());
        }
    }
}
