//! Empirical checks that sketched designs behave like Gaussian ones:
//! Hanson-Wright tails, sub-gaussian norm estimates, low-distortion
//! embeddings, sketch-leverage uniformity and the sketched hat matrix.

use rayon::prelude::*;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimators::RegressionProblem;
use crate::linalg::{dot, norm2, qr_thin, right_solve_upper, singular_values, DenseMatrix, DenseVector};
use crate::rng::{derive_seed, stream_rng};
use crate::sketch::SketchSpec;

/// Probability levels reported by [`hw_tail_compare`].
pub const QUANTILE_LEVELS: [f64; 4] = [0.5, 0.9, 0.99, 0.999];

/// Minimum trials for a tail comparison.
pub const MIN_TAIL_TRIALS: usize = 1000;

/// Minimum sample count for [`psi2_estimate`].
pub const MIN_PSI2_SAMPLES: usize = 10_000;

/// Fraction of the largest `|X|` values clipped before the Orlicz average.
pub const PSI2_WINSOR_FRACTION: f64 = 1e-4;

/// Number of probe directions used by [`hat_matrix_expectation_check`].
pub const HAT_PROBES: usize = 10;

/// Empirical quantiles of a statistic next to the Gaussian-row baseline.
#[derive(Clone, Debug, PartialEq)]
pub struct TailReport {
    pub statistic_name: String,
    /// `(level, value)` pairs, nondecreasing in both.
    pub quantiles: Vec<(f64, f64)>,
    pub trials: usize,
    pub reference_quantiles: Vec<(f64, f64)>,
}

impl TailReport {
    pub fn quantile(&self, level: f64) -> Option<f64> {
        lookup(&self.quantiles, level)
    }

    pub fn reference(&self, level: f64) -> Option<f64> {
        lookup(&self.reference_quantiles, level)
    }

    /// Observed quantile over baseline quantile at `level`.
    pub fn ratio(&self, level: f64) -> Option<f64> {
        Some(self.quantile(level)? / self.reference(level)?)
    }
}

fn lookup(pairs: &[(f64, f64)], level: f64) -> Option<f64> {
    pairs.iter().find(|(l, _)| (l - level).abs() < 1e-12).map(|p| p.1)
}

/// Linear-interpolated empirical quantiles of `values` at `levels`.
pub fn empirical_quantiles(values: &[f64], levels: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let last = sorted.len().saturating_sub(1);
    levels
        .iter()
        .map(|&level| {
            let pos = level * last as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let frac = pos - lo as f64;
            (level, sorted[lo] + frac * (sorted[hi] - sorted[lo]))
        })
        .collect()
}

/// `|zᵀBz − tr B|`
pub fn hanson_wright_stat(z: &[f64], bmat: &DenseMatrix) -> Result<f64> {
    if bmat.rows() != bmat.cols() || bmat.rows() != z.len() {
        return Err(Error::DimensionMismatch(format!(
            "B is {}x{}, z has length {}",
            bmat.rows(),
            bmat.cols(),
            z.len()
        )));
    }
    Ok((dot(z, &bmat.matvec(z)) - bmat.trace()).abs())
}

/// Draws `trials` rows from `row_sampler` (one seed per trial), whitens them
/// with `whitener`, and compares the quantiles of the Hanson-Wright statistic
/// against standard Gaussian rows under the same `B`.
pub fn hw_tail_compare<F>(
    row_sampler: F,
    whitener: &DenseMatrix,
    bmat: &DenseMatrix,
    trials: usize,
    seed: u64,
) -> Result<TailReport>
where
    F: Fn(u64) -> DenseVector + Sync,
{
    if trials < MIN_TAIL_TRIALS {
        return Err(Error::InvalidArgument(format!("need at least {MIN_TAIL_TRIALS} trials, got {trials}")));
    }
    let d = bmat.rows();
    if whitener.rows() != d {
        return Err(Error::DimensionMismatch("whitener and B dimensions differ".into()));
    }
    let observed: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let x = row_sampler(derive_seed(seed, &[0, t as u64]));
            let z = whitener.matvec(&x);
            hanson_wright_stat(&z, bmat)
        })
        .collect::<Result<_>>()?;
    let baseline: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(derive_seed(seed, &[1, t as u64]), 0);
            let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            hanson_wright_stat(&z, bmat)
        })
        .collect::<Result<_>>()?;
    Ok(TailReport {
        statistic_name: "hanson_wright".into(),
        quantiles: empirical_quantiles(&observed, &QUANTILE_LEVELS),
        trials,
        reference_quantiles: empirical_quantiles(&baseline, &QUANTILE_LEVELS),
    })
}

/// `R⁻ᵀ` from the QR of `a`, mapping rows with second moment `AᵀA` to
/// isotropic rows.
pub fn whitener_from(a: &DenseMatrix) -> Result<DenseMatrix> {
    let r = qr_thin(a)?.r;
    Ok(right_solve_upper(&DenseMatrix::identity(a.cols()), &r).transpose())
}

fn orlicz_mean(abs_sorted: &[f64], t: f64) -> f64 {
    let inv = 1.0 / (t * t);
    abs_sorted.iter().map(|x| (x * x * inv).exp()).sum::<f64>() / abs_sorted.len() as f64
}

/// Plug-in estimate of `inf{t > 0 : E exp(X²/t²) ≤ 2}`.
///
/// The largest `PSI2_WINSOR_FRACTION` of `|X|` values are clipped to the
/// threshold below them before averaging, so a single extreme sample cannot
/// dominate. Consistent, but biased low when the tails are heavy.
pub fn psi2_estimate(samples: &[f64]) -> Result<f64> {
    if samples.len() < MIN_PSI2_SAMPLES {
        return Err(Error::TooFewSamples { required: MIN_PSI2_SAMPLES, got: samples.len() });
    }
    let mut abs: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let m = abs.len();
    let keep = m - ((m as f64 * PSI2_WINSOR_FRACTION).floor() as usize).min(m - 1);
    let cap = abs[keep - 1];
    abs[keep..].iter_mut().for_each(|x| *x = cap);
    if cap == 0.0 {
        return Ok(0.0);
    }
    // At t = cap/√ln2 every term is at most 2.
    let mut hi = cap / std::f64::consts::LN_2.sqrt();
    let mut lo = 0.0;
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if orlicz_mean(&abs, mid) <= 2.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn best_scalar_distortion(smax: f64, smin: f64) -> f64 {
    if smin <= 0.0 {
        return f64::INFINITY;
    }
    let alpha = (2.0 / (smax * smax + smin * smin)).sqrt();
    ((alpha * smax).max(1.0 / (alpha * smin)) - 1.0).max(0.0)
}

/// Subspace-embedding distortion of `SA` relative to `A`, after the best
/// single rescaling of the sketch.
pub fn subspace_distortion(sa: &DenseMatrix, a: &DenseMatrix) -> Result<f64> {
    if sa.cols() != a.cols() {
        return Err(Error::DimensionMismatch("sketch and matrix column counts differ".into()));
    }
    let r = qr_thin(a)?.r;
    if sa.rows() < a.cols() {
        return Ok(f64::INFINITY);
    }
    let w = right_solve_upper(sa, &r);
    let sv = singular_values(&w);
    Ok(best_scalar_distortion(sv[0], *sv.last().unwrap()))
}

/// Worst relative norm distortion over a finite point set (one point per
/// column), after the best single rescaling.
pub fn jl_distortion(sa_vectors: &DenseMatrix, originals: &DenseMatrix) -> Result<f64> {
    if sa_vectors.cols() != originals.cols() {
        return Err(Error::DimensionMismatch("point counts differ".into()));
    }
    let mut ratios = Vec::with_capacity(originals.cols());
    for j in 0..originals.cols() {
        let on = norm2(originals.col(j));
        if on == 0.0 {
            return Err(Error::ZeroVector(j));
        }
        ratios.push(norm2(sa_vectors.col(j)) / on);
    }
    let rmax = ratios.iter().copied().fold(0.0, f64::max);
    let rmin = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    if rmax == 0.0 {
        return Ok(1.0);
    }
    let alpha = (2.0 / (rmax * rmax + rmin * rmin)).sqrt();
    Ok(ratios.iter().map(|r| (alpha * r - 1.0).abs()).fold(0.0, f64::max))
}

/// Leverage scores of the rows of `SA`.
pub fn sketch_leverage_scores(sa: &DenseMatrix) -> Result<Vec<f64>> {
    let lev = qr_thin(sa)?.row_norms_sq();
    let total: f64 = lev.iter().sum();
    assert!((total - sa.cols() as f64).abs() <= 1e-6, "sketch leverage scores sum to {total}, expected {}", sa.cols());
    Ok(lev)
}

/// `max_i |ℓ_i(SA) · n/d − 1|`
pub fn sketch_leverage_uniformity(sa: &DenseMatrix) -> Result<f64> {
    let lev = sketch_leverage_scores(sa)?;
    let scale = sa.rows() as f64 / sa.cols() as f64;
    Ok(lev.iter().map(|l| (l * scale - 1.0).abs()).fold(0.0, f64::max))
}

/// `vᵀ Sᵀ(I − Ĥ) S v` for each probe column `v`, for one draw of `spec`.
pub fn hat_matrix_quadratic_forms(
    p: &RegressionProblem,
    spec: &SketchSpec,
    probes: &DenseMatrix,
    seed: u64,
) -> Result<Vec<f64>> {
    let op = p.operator(*spec)?;
    let stacked = p.a().hstack(probes)?;
    hat_forms_with(&op, &stacked, p.dim(), seed)
}

fn hat_forms_with(op: &crate::sketch::SketchOperator, stacked: &DenseMatrix, d: usize, seed: u64) -> Result<Vec<f64>> {
    let s = op.apply_with_seed(stacked, seed)?;
    let q = qr_thin(&s.columns(0, d))?.q;
    Ok((d..s.cols())
        .map(|c| {
            let sv = s.col(c);
            let coef = q.tr_matvec(sv);
            (dot(sv, sv) - dot(&coef, &coef)).max(0.0)
        })
        .collect())
}

/// Probes `v = (I − H) g` for Gaussian `g`, one per column.
pub fn residual_probes(p: &RegressionProblem, count: usize, seed: u64) -> DenseMatrix {
    let n = p.n_rows();
    let mut out = DenseMatrix::zeros(n, count);
    for c in 0..count {
        let mut rng = stream_rng(seed, c as u64);
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        out.col_mut(c).copy_from_slice(&p.residual_projection(&g));
    }
    out
}

/// Monte Carlo check of `E[Sᵀ(I − Ĥ)S] ≈ (1 − d/n)(I − H)` along
/// [`HAT_PROBES`] random directions orthogonal to the column span.
/// Returns the largest `|ratio − 1|` over probes.
pub fn hat_matrix_expectation_check(p: &RegressionProblem, spec: &SketchSpec, trials: usize, seed: u64) -> Result<f64> {
    let d = p.dim();
    if trials < MIN_TAIL_TRIALS {
        return Err(Error::InvalidArgument(format!("need at least {MIN_TAIL_TRIALS} trials, got {trials}")));
    }
    if spec.n <= d + 1 {
        return Err(Error::SketchTooSmall { n: spec.n, d });
    }
    let probes = residual_probes(p, HAT_PROBES, derive_seed(seed, &[u64::MAX]));
    let stacked = p.a().hstack(&probes)?;
    let op = p.operator(*spec)?;
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| hat_forms_with(&op, &stacked, d, derive_seed(seed, &[t as u64])))
        .collect::<Result<_>>()?;
    let shrink = 1.0 - d as f64 / spec.n as f64;
    let mut worst: f64 = 0.0;
    for c in 0..HAT_PROBES {
        let mean = per_trial.iter().map(|v| v[c]).sum::<f64>() / trials as f64;
        let target = shrink * dot(probes.col(c), probes.col(c));
        worst = worst.max((mean / target - 1.0).abs());
    }
    Ok(worst)
}
