//! Sketch operators.
//!
//! A sketch `S` (n x N) is never materialized. Row-based families (Gaussian,
//! LESS, LessUniform, uniform sampling) generate row `i` from its own RNG
//! stream `i`, so rows can be produced independently and in any order. The
//! SRHT is applied column by column through the fast Walsh-Hadamard
//! transform.
//!
//! All families are normalized so that `E[SᵀS] = I` (on the zero-padded
//! space for the SRHT).

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::leverage::{validate_probs, LeverageProfile};
use crate::linalg::{fwht_inplace, DenseMatrix, DenseVector};
use crate::rng::{stream_rng, AUX_STREAM_BASE};

/// Default failure probability for the dense LESS variant.
pub const DEFAULT_DENSE_DELTA: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SketchFamily {
    Gaussian,
    Less,
    LessUniform,
    Srht,
    UniformRows,
}

impl SketchFamily {
    pub const ALL: [SketchFamily; 5] = [Self::Gaussian, Self::Less, Self::LessUniform, Self::Srht, Self::UniformRows];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Less => "less",
            Self::LessUniform => "less_uniform",
            Self::Srht => "srht",
            Self::UniformRows => "uniform",
        }
    }

    /// Whether the family uses the nonzeros-per-row parameter `k`.
    pub fn is_sparse_less(self) -> bool {
        matches!(self, Self::Less | Self::LessUniform)
    }
}

impl fmt::Display for SketchFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SketchFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Self::Gaussian),
            "less" => Ok(Self::Less),
            "less_uniform" | "lessuniform" => Ok(Self::LessUniform),
            "srht" => Ok(Self::Srht),
            "uniform" | "uniform_rows" => Ok(Self::UniformRows),
            other => Err(Error::Config(format!("unknown sketch family `{other}`"))),
        }
    }
}

/// Operator family, sketch size `n`, nonzeros per row `k` (LESS families
/// only) and seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SketchSpec {
    pub family: SketchFamily,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
}

impl SketchSpec {
    pub fn new(family: SketchFamily, n: usize, k: usize, seed: u64) -> Self {
        Self { family, n, k, seed }
    }

    pub fn gaussian(n: usize, seed: u64) -> Self {
        Self::new(SketchFamily::Gaussian, n, 0, seed)
    }

    pub fn less(n: usize, k: usize, seed: u64) -> Self {
        Self::new(SketchFamily::Less, n, k, seed)
    }

    pub fn less_uniform(n: usize, k: usize, seed: u64) -> Self {
        Self::new(SketchFamily::LessUniform, n, k, seed)
    }

    pub fn srht(n: usize, seed: u64) -> Self {
        Self::new(SketchFamily::Srht, n, 0, seed)
    }

    pub fn uniform_rows(n: usize, seed: u64) -> Self {
        Self::new(SketchFamily::UniformRows, n, 0, seed)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self, n_input: usize) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("sketch size must be at least 1".into()));
        }
        if self.family.is_sparse_less() && (self.k == 0 || self.k > n_input) {
            return Err(Error::InvalidArgument(format!("nonzeros per row k = {} must lie in [1, {n_input}]", self.k)));
        }
        if self.family == SketchFamily::Srht {
            let padded = n_input.next_power_of_two();
            if self.n > padded {
                return Err(Error::SketchTooLarge { n: self.n, padded });
            }
        }
        Ok(())
    }
}

/// Nonzeros per LESS row: `d` by default, or `⌈d · ln(n d / δ)⌉` for the
/// dense variant.
pub fn less_nonzeros(d: usize, n: usize, dense: bool, delta: f64) -> usize {
    if dense {
        let nd = (n * d) as f64;
        ((d as f64) * (nd / delta).ln()).ceil().max(1.0) as usize
    } else {
        d.max(1)
    }
}

/// `(SA, Sb)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SketchedPair {
    pub sa: DenseMatrix,
    pub sb: DenseVector,
}

impl SketchedPair {
    /// Splits a sketch of `[A | b]` back into its parts.
    pub fn from_augmented(s_aug: DenseMatrix) -> Self {
        let d = s_aug.cols() - 1;
        let sb = DenseVector::from(s_aug.col(d).to_vec());
        Self { sa: s_aug.columns(0, d), sb }
    }
}

enum Kind {
    Gaussian,
    Sparse { sampler: WeightedIndex<f64>, probs: Vec<f64> },
    LessUniform,
    Uniform,
    Srht,
}

/// A sketching operator bound to an input row count, reusable across seeds.
pub struct SketchOperator {
    spec: SketchSpec,
    n_input: usize,
    kind: Kind,
}

impl SketchOperator {
    /// `profile` supplies the sampling probabilities for [`SketchFamily::Less`]
    /// and is ignored by every other family.
    pub fn new(spec: SketchSpec, n_input: usize, profile: Option<&LeverageProfile>) -> Result<Self> {
        spec.validate(n_input)?;
        let kind = match spec.family {
            SketchFamily::Gaussian => Kind::Gaussian,
            SketchFamily::Less => {
                let profile =
                    profile.ok_or_else(|| Error::InvalidDistribution("LESS requires a leverage profile".into()))?;
                Self::sparse_kind(&profile.probs, n_input)?
            }
            SketchFamily::LessUniform => Kind::LessUniform,
            SketchFamily::UniformRows => Kind::Uniform,
            SketchFamily::Srht => Kind::Srht,
        };
        Ok(Self { spec, n_input, kind })
    }

    /// LESS operator with explicit probabilities.
    pub fn less_with_probs(spec: SketchSpec, probs: &[f64]) -> Result<Self> {
        spec.validate(probs.len())?;
        let kind = Self::sparse_kind(probs, probs.len())?;
        Ok(Self { spec: SketchSpec { family: SketchFamily::Less, ..spec }, n_input: probs.len(), kind })
    }

    fn sparse_kind(probs: &[f64], n_input: usize) -> Result<Kind> {
        validate_probs(probs, n_input)?;
        let sampler =
            WeightedIndex::new(probs.iter().copied()).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        Ok(Kind::Sparse { sampler, probs: probs.to_vec() })
    }

    pub fn spec(&self) -> &SketchSpec {
        &self.spec
    }

    pub fn n_input(&self) -> usize {
        self.n_input
    }

    /// `S m` with the spec's own seed.
    pub fn apply(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        self.apply_with_seed(m, self.spec.seed)
    }

    /// `S m` for the operator drawn with `seed`.
    pub fn apply_with_seed(&self, m: &DenseMatrix, seed: u64) -> Result<DenseMatrix> {
        if m.rows() != self.n_input {
            return Err(Error::DimensionMismatch(format!(
                "operator expects {} rows, input has {}",
                self.n_input,
                m.rows()
            )));
        }
        if let Kind::Srht = self.kind {
            return srht_apply(m, self.spec.n, seed, false);
        }
        let n = self.spec.n;
        let scale = 1.0 / (n as f64).sqrt();
        let mut out = DenseMatrix::zeros(n, m.cols());
        let mut row = vec![0.0; m.cols()];
        let mut gauss = Vec::new();
        for i in 0..n {
            self.row_action_into(i, seed, m, &mut row, &mut gauss);
            for (c, v) in row.iter().enumerate() {
                out[(i, c)] = v * scale;
            }
        }
        Ok(out)
    }

    /// Row `i` of `√n · S m`, i.e. one unscaled sketch row applied to `m`.
    /// Not available for the SRHT, whose rows are coupled.
    pub fn row_action(&self, i: usize, seed: u64, m: &DenseMatrix) -> Result<Vec<f64>> {
        if let Kind::Srht = self.kind {
            return Err(Error::InvalidArgument("SRHT rows are not generated independently".into()));
        }
        let mut row = vec![0.0; m.cols()];
        self.row_action_into(i, seed, m, &mut row, &mut Vec::new());
        Ok(row)
    }

    fn row_action_into(&self, i: usize, seed: u64, m: &DenseMatrix, out: &mut [f64], gauss: &mut Vec<f64>) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut rng = stream_rng(seed, i as u64);
        match &self.kind {
            Kind::Gaussian => {
                gauss.clear();
                gauss.extend((0..self.n_input).map(|_| rng.sample::<f64, _>(StandardNormal)));
                for (c, o) in out.iter_mut().enumerate() {
                    *o = crate::linalg::dot(gauss, m.col(c));
                }
            }
            Kind::Srht => unreachable!("SRHT is applied column-wise"),
            _ => {
                self.for_each_sparse_term(&mut rng, |idx, coef| {
                    for (c, o) in out.iter_mut().enumerate() {
                        *o += coef * m[(idx, c)];
                    }
                });
            }
        }
    }

    fn for_each_sparse_term(&self, rng: &mut impl Rng, mut f: impl FnMut(usize, f64)) {
        let k = self.spec.k;
        match &self.kind {
            Kind::Sparse { sampler, probs } => {
                for _ in 0..k {
                    let idx = sampler.sample(rng);
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    f(idx, sign / (k as f64 * probs[idx]).sqrt());
                }
            }
            Kind::LessUniform => {
                let coef = (self.n_input as f64 / k as f64).sqrt();
                for _ in 0..k {
                    let idx = rng.random_range(0..self.n_input);
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    f(idx, sign * coef);
                }
            }
            Kind::Uniform => {
                let idx = rng.random_range(0..self.n_input);
                f(idx, (self.n_input as f64).sqrt());
            }
            Kind::Gaussian | Kind::Srht => unreachable!(),
        }
    }

    /// Nonzero coefficients of row `i` of `√n · S`, merged by input row and
    /// sorted by index. `None` for dense families.
    pub fn sparse_row(&self, i: usize, seed: u64) -> Option<Vec<(usize, f64)>> {
        if matches!(self.kind, Kind::Gaussian | Kind::Srht) {
            return None;
        }
        let mut rng = stream_rng(seed, i as u64);
        let mut terms = Vec::with_capacity(self.spec.k.max(1));
        self.for_each_sparse_term(&mut rng, |idx, coef| terms.push((idx, coef)));
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (idx, coef) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == idx => last.1 += coef,
                _ => merged.push((idx, coef)),
            }
        }
        Some(merged)
    }
}

/// Sign diagonal and selected rows of an SRHT draw.
pub(crate) struct SrhtPlan {
    pub signs: Vec<f64>,
    pub rows: Vec<usize>,
}

pub(crate) fn srht_plan(padded: usize, n: usize, seed: u64, unit_signs: bool) -> SrhtPlan {
    let mut sign_rng = stream_rng(seed, AUX_STREAM_BASE);
    let signs = (0..padded).map(|_| if unit_signs || sign_rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let mut row_rng = stream_rng(seed, AUX_STREAM_BASE + 1);
    let mut rows = sample_indices(&mut row_rng, padded, n).into_vec();
    rows.sort_unstable();
    SrhtPlan { signs, rows }
}

/// `P H D m_pad / √n`: random signs, Walsh-Hadamard mixing over the
/// zero-padded rows, then `n` rows kept without replacement.
pub(crate) fn srht_apply(m: &DenseMatrix, n: usize, seed: u64, unit_signs: bool) -> Result<DenseMatrix> {
    let padded = m.rows().next_power_of_two();
    if n > padded {
        return Err(Error::SketchTooLarge { n, padded });
    }
    let plan = srht_plan(padded, n, seed, unit_signs);
    let scale = 1.0 / (n as f64).sqrt();
    let mut out = DenseMatrix::zeros(n, m.cols());
    let mut buf = vec![0.0; padded];
    for c in 0..m.cols() {
        buf.iter_mut().for_each(|v| *v = 0.0);
        for (i, (&v, &s)) in m.col(c).iter().zip(&plan.signs).enumerate() {
            buf[i] = v * s;
        }
        fwht_inplace(&mut buf)?;
        for (o, &r) in out.col_mut(c).iter_mut().zip(&plan.rows) {
            *o = buf[r] * scale;
        }
    }
    Ok(out)
}

fn check_pair(a: &DenseMatrix, b: &[f64]) -> Result<DenseMatrix> {
    if a.rows() != b.len() {
        return Err(Error::DimensionMismatch(format!("A has {} rows, b has {}", a.rows(), b.len())));
    }
    a.with_column(b)
}

/// Sketch `(A, b)` with the operator described by `spec`.
pub fn sketch_pair(
    spec: &SketchSpec,
    a: &DenseMatrix,
    b: &[f64],
    profile: Option<&LeverageProfile>,
) -> Result<SketchedPair> {
    let aug = check_pair(a, b)?;
    let op = SketchOperator::new(*spec, a.rows(), profile)?;
    Ok(SketchedPair::from_augmented(op.apply(&aug)?))
}

pub fn sketch_gaussian(a: &DenseMatrix, b: &[f64], n: usize, seed: u64) -> Result<SketchedPair> {
    sketch_pair(&SketchSpec::gaussian(n, seed), a, b, None)
}

pub fn sketch_less(
    a: &DenseMatrix,
    b: &[f64],
    n: usize,
    k: usize,
    profile: &LeverageProfile,
    seed: u64,
) -> Result<SketchedPair> {
    sketch_pair(&SketchSpec::less(n, k, seed), a, b, Some(profile))
}

pub fn sketch_less_uniform(a: &DenseMatrix, b: &[f64], n: usize, k: usize, seed: u64) -> Result<SketchedPair> {
    sketch_pair(&SketchSpec::less_uniform(n, k, seed), a, b, None)
}

pub fn sketch_srht(a: &DenseMatrix, b: &[f64], n: usize, seed: u64) -> Result<SketchedPair> {
    sketch_pair(&SketchSpec::srht(n, seed), a, b, None)
}

pub fn sketch_uniform_rows(a: &DenseMatrix, b: &[f64], n: usize, seed: u64) -> Result<SketchedPair> {
    sketch_pair(&SketchSpec::uniform_rows(n, seed), a, b, None)
}

/// Rows of the sparse isotropic distribution `M · (t_j b_j)_j` with
/// Rademacher `t_j` and Bernoulli(1/M²) `b_j`.
pub fn sample_hard_example(m: f64, d: usize, n_samples: usize, seed: u64) -> Result<DenseMatrix> {
    if !(m >= 1.0) {
        return Err(Error::InvalidArgument(format!("M must be >= 1, got {m}")));
    }
    let p = 1.0 / (m * m);
    let mut out = DenseMatrix::zeros(n_samples, d);
    for i in 0..n_samples {
        let mut rng = stream_rng(seed, i as u64);
        for j in 0..d {
            let fires = rng.random::<f64>() < p;
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            if fires {
                out[(i, j)] = m * sign;
            }
        }
    }
    Ok(out)
}

/// `(1/√k) Σ_{i<k} r_i x_i` over the first `k` rows with Rademacher `r_i`.
pub fn gaussianized_sample(x_rows: &DenseMatrix, k: usize, seed: u64) -> Result<DenseVector> {
    if k == 0 || x_rows.rows() < k {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= {} rows, got k = {k}", x_rows.rows())));
    }
    let mut rng = stream_rng(seed, 0);
    let mut out = vec![0.0; x_rows.cols()];
    let scale = 1.0 / (k as f64).sqrt();
    for i in 0..k {
        let r = if rng.random::<bool>() { scale } else { -scale };
        for (c, o) in out.iter_mut().enumerate() {
            *o += r * x_rows[(i, c)];
        }
    }
    Ok(DenseVector::from(out))
}
