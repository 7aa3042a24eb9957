//! Dataset ingestion (libsvm text), synthetic problems with controlled
//! coherence, and the sweep-result CSV format.

use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimators::RegressionProblem;
use crate::leverage::exact_leverage_scores;
use crate::linalg::{qr_thin, DenseMatrix, DenseVector};
use crate::rng::stream_rng;

/// Exact CSV header written by [`write_csv`].
pub const CSV_HEADER: &str = "operator,n,trials,mean_norm_err,stderr,gaussian_formula,degenerate_count";

/// Significant digits used for every real-valued CSV field.
pub const CSV_DIGITS: usize = 10;

/// Minimum coherence a `High` synthetic dataset must reach.
pub const HIGH_COHERENCE_MIN: f64 = 0.9;

/// Planted rows in `High` datasets have norm `PLANTED_ROW_SCALE · √N`.
pub const PLANTED_ROW_SCALE: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataSource {
    File,
    Synthetic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coherence {
    Low,
    High,
}

impl std::str::FromStr for Coherence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(Coherence::Low),
            "high" => Ok(Coherence::High),
            other => Err(Error::Config(format!("unknown coherence '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub a: DenseMatrix,
    pub b: DenseVector,
    pub name: String,
    pub source: DataSource,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.a.rows()
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    /// Centers each column and scales it to unit variance; constant columns
    /// are only centered.
    pub fn standardize(&mut self) {
        let n = self.a.rows() as f64;
        for j in 0..self.a.cols() {
            let col = self.a.col_mut(j);
            let mean = col.iter().sum::<f64>() / n;
            col.iter_mut().for_each(|v| *v -= mean);
            let sd = (col.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
            if sd > 0.0 {
                col.iter_mut().for_each(|v| *v /= sd);
            }
        }
    }

    pub fn problem(&self) -> Result<RegressionProblem> {
        RegressionProblem::new(self.a.clone(), self.b.clone())
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn index_err(line: usize, message: impl Into<String>) -> Error {
    Error::Index { line, message: message.into() }
}

/// Reads `<label> <index>:<value> ...` lines with 1-based, strictly
/// increasing indices. Blank lines are skipped. No standardization is
/// applied here.
pub fn parse_libsvm<R: BufRead>(reader: R, expected_dim: Option<usize>) -> Result<Dataset> {
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut max_index = 0usize;
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line?;
        let mut tokens = line.split_whitespace();
        let Some(label) = tokens.next() else { continue };
        let label: f64 = label.parse().map_err(|_| parse_err(lineno, format!("bad label '{label}'")))?;
        if !label.is_finite() {
            return Err(parse_err(lineno, "non-finite label"));
        }
        let mut feats = Vec::new();
        let mut prev = 0i64;
        for tok in tokens {
            let (idx, val) =
                tok.split_once(':').ok_or_else(|| parse_err(lineno, format!("expected index:value, got '{tok}'")))?;
            let idx: i64 = idx.parse().map_err(|_| parse_err(lineno, format!("bad index '{idx}'")))?;
            let val: f64 = val.parse().map_err(|_| parse_err(lineno, format!("bad value '{val}'")))?;
            if !val.is_finite() {
                return Err(parse_err(lineno, "non-finite value"));
            }
            if idx <= 0 {
                return Err(index_err(lineno, format!("index {idx} is not positive")));
            }
            if idx <= prev {
                return Err(index_err(lineno, format!("index {idx} follows {prev}")));
            }
            prev = idx;
            feats.push((idx as usize - 1, val));
        }
        max_index = max_index.max(prev as usize);
        labels.push(label);
        rows.push(feats);
    }
    let d = match expected_dim {
        Some(d) if d < max_index => {
            return Err(index_err(0, format!("index {max_index} exceeds expected dimension {d}")));
        }
        Some(d) => d,
        None => max_index,
    };
    if rows.is_empty() || d == 0 {
        return Err(parse_err(0, "no data"));
    }
    let mut a = DenseMatrix::zeros(rows.len(), d);
    for (i, feats) in rows.iter().enumerate() {
        for &(j, v) in feats {
            a[(i, j)] = v;
        }
    }
    Ok(Dataset { a, b: DenseVector::from(labels), name: String::new(), source: DataSource::File })
}

/// Reads a libsvm file, standardizing columns when asked.
pub fn load_libsvm_file(path: &std::path::Path, expected_dim: Option<usize>, standardize: bool) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    let mut ds = parse_libsvm(std::io::BufReader::new(file), expected_dim)?;
    ds.name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    if standardize {
        ds.standardize();
    }
    Ok(ds)
}

/// Writes `ds` in libsvm form, omitting zero entries. Values use the
/// shortest representation that reparses to the same `f64`.
pub fn write_libsvm<W: Write>(ds: &Dataset, mut sink: W) -> Result<()> {
    for i in 0..ds.n_rows() {
        write!(sink, "{}", ds.b[i])?;
        for j in 0..ds.dim() {
            let v = ds.a[(i, j)];
            if v != 0.0 {
                write!(sink, " {}:{}", j + 1, v)?;
            }
        }
        writeln!(sink)?;
    }
    Ok(())
}

/// `Low`: i.i.d. standard normal rows. `High`: the same plus `⌈d/2⌉` rows
/// of norm `PLANTED_ROW_SCALE · √N` along distinct coordinate axes, which
/// drives their leverage close to one. Responses are `A w₀ + noise · ξ`
/// with Gaussian `w₀`.
pub fn gen_synthetic(n_rows: usize, d: usize, coherence: Coherence, noise: f64, seed: u64) -> Result<Dataset> {
    let a = synthetic_design(n_rows, d, coherence, noise, seed)?;
    let mut wrng = stream_rng(seed, 1);
    let w0: Vec<f64> = (0..d).map(|_| wrng.sample(StandardNormal)).collect();
    Ok(with_response(a, &w0, noise, seed, coherence_label(coherence)))
}

/// As [`gen_synthetic`] but with an `s`-sparse `w₀` whose nonzeros have
/// magnitude at least one. Returns the dataset and `w₀`.
pub fn gen_sparse_synthetic(
    n_rows: usize,
    d: usize,
    coherence: Coherence,
    noise: f64,
    sparsity: usize,
    seed: u64,
) -> Result<(Dataset, DenseVector)> {
    if sparsity == 0 || sparsity > d {
        return Err(Error::InvalidArgument(format!("sparsity {sparsity} must lie in [1, {d}]")));
    }
    let a = synthetic_design(n_rows, d, coherence, noise, seed)?;
    let mut wrng = stream_rng(seed, 1);
    let mut w0 = vec![0.0; d];
    for j in rand::seq::index::sample(&mut wrng, d, sparsity) {
        let g: f64 = wrng.sample(StandardNormal);
        w0[j] = g.signum() * (1.0 + g.abs());
    }
    let ds = with_response(a, &w0, noise, seed, &format!("{}-sparse{sparsity}", coherence_label(coherence)));
    Ok((ds, DenseVector::from(w0)))
}

/// `A = U diag(j^(−decay)) Vᵀ` with Haar-like orthonormal `U` (`N x d`) and
/// `V` (`d x d`); responses as in [`gen_synthetic`].
pub fn gen_power_law(n_rows: usize, d: usize, decay: f64, noise: f64, seed: u64) -> Result<Dataset> {
    check_shape(n_rows, d, noise)?;
    if !decay.is_finite() || decay < 0.0 {
        return Err(Error::InvalidArgument(format!("decay must be finite and nonnegative, got {decay}")));
    }
    let mut rng = stream_rng(seed, 0);
    let u = qr_thin(&DenseMatrix::from_fn(n_rows, d, |_, _| rng.sample(StandardNormal)))?.q;
    let v = qr_thin(&DenseMatrix::from_fn(d, d, |_, _| rng.sample(StandardNormal)))?.q;
    let sigma: Vec<f64> = (1..=d).map(|j| (j as f64).powf(-decay)).collect();
    let a = u.matmul(&DenseMatrix::from_diag(&sigma)).matmul(&v.transpose());
    let mut wrng = stream_rng(seed, 1);
    let w0: Vec<f64> = (0..d).map(|_| wrng.sample(StandardNormal)).collect();
    Ok(with_response(a, &w0, noise, seed, &format!("powerlaw{decay}")))
}

fn check_shape(n_rows: usize, d: usize, noise: f64) -> Result<()> {
    if d == 0 || n_rows < d {
        return Err(Error::InvalidArgument(format!("need N >= d >= 1, got N = {n_rows}, d = {d}")));
    }
    if !noise.is_finite() || noise < 0.0 {
        return Err(Error::InvalidArgument(format!("noise must be finite and nonnegative, got {noise}")));
    }
    Ok(())
}

fn coherence_label(c: Coherence) -> &'static str {
    match c {
        Coherence::Low => "low",
        Coherence::High => "high",
    }
}

fn synthetic_design(n_rows: usize, d: usize, coherence: Coherence, noise: f64, seed: u64) -> Result<DenseMatrix> {
    check_shape(n_rows, d, noise)?;
    let mut rng = stream_rng(seed, 0);
    let mut a = DenseMatrix::from_fn(n_rows, d, |_, _| rng.sample(StandardNormal));
    if coherence == Coherence::High {
        let planted = d.div_ceil(2);
        if n_rows < planted + d {
            return Err(Error::InvalidArgument(format!("N = {n_rows} too small for high coherence at d = {d}")));
        }
        let norm = PLANTED_ROW_SCALE * (n_rows as f64).sqrt();
        for k in 0..planted {
            let i = n_rows - planted + k;
            for j in 0..d {
                a[(i, j)] = if j == k { norm } else { 0.0 };
            }
        }
        let c = exact_leverage_scores(&a)?.coherence;
        assert!(c >= HIGH_COHERENCE_MIN, "high-coherence generator reached only {c}");
    }
    Ok(a)
}

fn with_response(a: DenseMatrix, w0: &[f64], noise: f64, seed: u64, label: &str) -> Dataset {
    let mut nrng = stream_rng(seed, 2);
    let mut b = a.matvec(w0);
    if noise > 0.0 {
        for v in b.iter_mut() {
            *v += noise * nrng.sample::<f64, _>(StandardNormal);
        }
    }
    let name = format!("synthetic-{label}-{}x{}", a.rows(), a.cols());
    Dataset { a, b: DenseVector::from(b), name, source: DataSource::Synthetic }
}

/// One cell of a Monte Carlo sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub operator: String,
    pub n: usize,
    /// Trials included in the mean (degenerate ones excluded).
    pub trials: usize,
    pub mean_norm_err: f64,
    /// Reported as 0 when undefined; see `stderr_defined`.
    pub stderr: f64,
    pub gaussian_formula: f64,
    pub degenerate_count: usize,
    /// False when fewer than two trials contributed.
    pub stderr_defined: bool,
}

/// Decimal rendering with `digits` significant digits. Uses positional
/// notation for moderate exponents and scientific otherwise.
pub fn format_significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if (-5..15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        sci
    }
}

fn sorted_results(results: &[SweepResult]) -> Vec<&SweepResult> {
    let mut rows: Vec<&SweepResult> = results.iter().collect();
    rows.sort_by(|x, y| x.operator.cmp(&y.operator).then(x.n.cmp(&y.n)));
    rows
}

pub fn write_csv<W: Write>(results: &[SweepResult], mut sink: W) -> Result<()> {
    writeln!(sink, "{CSV_HEADER}")?;
    for r in sorted_results(results) {
        writeln!(
            sink,
            "{},{},{},{},{},{},{}",
            r.operator,
            r.n,
            r.trials,
            format_significant(r.mean_norm_err, CSV_DIGITS),
            format_significant(r.stderr, CSV_DIGITS),
            format_significant(r.gaussian_formula, CSV_DIGITS),
            r.degenerate_count
        )?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(reader: R) -> Result<Vec<SweepResult>> {
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim_end() != CSV_HEADER {
        return Err(parse_err(1, format!("unexpected header '{header}'")));
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(parse_err(lineno, format!("expected 7 fields, got {}", f.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| parse_err(lineno, format!("bad count '{s}'")));
        let real = |s: &str| s.parse::<f64>().map_err(|_| parse_err(lineno, format!("bad number '{s}'")));
        let trials = int(f[2])?;
        out.push(SweepResult {
            operator: f[0].to_string(),
            n: int(f[1])?,
            trials,
            mean_norm_err: real(f[3])?,
            stderr: real(f[4])?,
            gaussian_formula: real(f[5])?,
            degenerate_count: int(f[6])?,
            stderr_defined: trials > 1,
        });
    }
    Ok(out)
}
