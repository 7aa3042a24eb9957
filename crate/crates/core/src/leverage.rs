//! Statistical leverage scores and the LESS row-sampling distribution.

use crate::error::{Error, Result};
use crate::linalg::{dot, qr_thin, right_solve_upper, DenseMatrix};
use crate::sketch::srht_apply;

/// Default oversampling factor for approximate scores.
pub const DEFAULT_OVERSAMPLE: usize = 8;

/// Leverage scores of an `N x d` matrix and the mixed sampling
/// probabilities derived from them.
#[derive(Clone, Debug, PartialEq)]
pub struct LeverageProfile {
    pub scores: Vec<f64>,
    pub probs: Vec<f64>,
    pub coherence: f64,
    pub dim: usize,
    pub exact: bool,
}

impl LeverageProfile {
    fn from_scores(scores: Vec<f64>, dim: usize, exact: bool) -> Self {
        let coherence = scores.iter().copied().fold(0.0, f64::max);
        let mut profile = Self { scores, probs: Vec::new(), coherence, dim, exact };
        profile.probs = mixture_probabilities(&profile, profile.scores.len());
        profile
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Exact scores `l_i = a_iᵀ(AᵀA)⁻¹a_i`, computed as squared row norms of `Q`.
pub fn exact_leverage_scores(a: &DenseMatrix) -> Result<LeverageProfile> {
    let qr = qr_thin(a)?;
    Ok(LeverageProfile::from_scores(qr.row_norms_sq(), a.cols(), true))
}

/// Scores of `A R₀⁻¹`, where `R₀` comes from the QR of an SRHT sketch of `A`
/// with `4 · d · oversample` rows (capped at the padded row count).
pub fn approx_leverage_scores(a: &DenseMatrix, oversample: usize, seed: u64) -> Result<LeverageProfile> {
    if oversample == 0 {
        return Err(Error::InvalidArgument("oversample must be positive".into()));
    }
    let d = a.cols();
    let padded = a.rows().next_power_of_two();
    let m = (4 * d * oversample).min(padded).max(d);
    let sa = srht_apply(a, m, seed, false)?;
    let r0 = qr_thin(&sa)?.r;
    let whitened = right_solve_upper(a, &r0);
    let mut scores = vec![0.0; a.rows()];
    for j in 0..d {
        for (s, v) in scores.iter_mut().zip(whitened.col(j)) {
            *s += v * v;
        }
    }
    Ok(LeverageProfile::from_scores(scores, d, false))
}

/// `p_i = (l_i/d + 1/N) / 2`, renormalized to sum to one.
pub fn mixture_probabilities(profile: &LeverageProfile, n_rows: usize) -> Vec<f64> {
    let d = profile.dim.max(1) as f64;
    let n = n_rows as f64;
    // Approximate scores need not sum to d, hence the renormalization.
    let mut p: Vec<f64> = profile.scores.iter().map(|&l| 0.5 * (l.max(0.0) / d + 1.0 / n)).collect();
    let sum: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= sum);
    p
}

/// Sanity check used by the sketch layer before sampling.
pub(crate) fn validate_probs(probs: &[f64], n_rows: usize) -> Result<()> {
    if probs.len() != n_rows {
        return Err(Error::InvalidDistribution(format!("{} probabilities for {n_rows} rows", probs.len())));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidDistribution("negative or non-finite probability".into()));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {sum}")));
    }
    Ok(())
}

/// `a_iᵀ (AᵀA)⁻¹ a_i` through the normal equations; a deliberately
/// independent route used to cross-check the QR path.
#[doc(hidden)]
pub fn leverage_by_normal_equations(a: &DenseMatrix) -> Vec<f64> {
    let g = a.gram().to_nalgebra();
    let ginv = g.try_inverse().expect("singular gram matrix");
    (0..a.rows())
        .map(|i| {
            let row = a.row(i);
            let x: Vec<f64> = (0..a.cols()).map(|r| (0..a.cols()).map(|c| ginv[(r, c)] * row[c]).sum()).collect();
            dot(&row, &x)
        })
        .collect()
}
