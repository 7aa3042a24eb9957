//! Sketch-and-solve estimators and the reference quantities they are
//! compared against.

use std::sync::OnceLock;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::leverage::LeverageProfile;
use crate::linalg::{
    dot, orthonormal_basis, qr_thin, spectral_norm, symmetric_eigenvalues, DenseMatrix, DenseVector, ThinQR,
};
use crate::rng::{derive_seed, stream_rng};
use crate::sketch::{SketchFamily, SketchOperator, SketchSpec, SketchedPair};

/// Coordinates of sketched solutions are clamped to `[-RANGE_CLAMP, RANGE_CLAMP]`.
pub const RANGE_CLAMP: f64 = 1e12;

/// Redraws allowed after a rank-deficient sketch before giving up.
pub const MAX_REDRAWS: usize = 3;

/// `L(w*) <= DEGENERATE_LOSS_REL · ‖b‖²` counts as zero optimal loss.
pub const DEGENERATE_LOSS_REL: f64 = 1e-20;

/// Sketch-row leverage at or above `1 - LEVERAGE_ONE_SLACK` breaks the CV shortcut.
pub const LEVERAGE_ONE_SLACK: f64 = 1e-10;

/// Iteration cap for the l1-constrained solver.
pub const L1_MAX_ITER: usize = 10_000;

/// Largest column count accepted by [`restricted_condition_small`].
pub const RESTRICTED_CONDITION_MAX_DIM: usize = 20;

/// A full-rank least-squares problem with its exact solution cached.
#[derive(Debug)]
pub struct RegressionProblem {
    a: DenseMatrix,
    b: DenseVector,
    qr: ThinQR,
    w_star: DenseVector,
    loss_star: f64,
    augmented: DenseMatrix,
    leverage: OnceLock<LeverageProfile>,
}

impl RegressionProblem {
    pub fn new(a: DenseMatrix, b: DenseVector) -> Result<Self> {
        if a.rows() != b.len() {
            return Err(Error::DimensionMismatch(format!("A has {} rows, b has {}", a.rows(), b.len())));
        }
        let qr = qr_thin(&a)?;
        let w_star = qr.solve(&b);
        let resid: Vec<f64> = a.matvec(&w_star).iter().zip(b.iter()).map(|(p, y)| p - y).collect();
        let loss_star = dot(&resid, &resid);
        let augmented = a.with_column(&b)?;
        Ok(Self { a, b, qr, w_star, loss_star, augmented, leverage: OnceLock::new() })
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseVector {
        &self.b
    }

    pub fn qr(&self) -> &ThinQR {
        &self.qr
    }

    pub fn w_star(&self) -> &DenseVector {
        &self.w_star
    }

    pub fn loss_star(&self) -> f64 {
        self.loss_star
    }

    pub fn n_rows(&self) -> usize {
        self.a.rows()
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    /// `[A | b]`, the matrix every sketch is applied to.
    pub fn augmented(&self) -> &DenseMatrix {
        &self.augmented
    }

    /// `‖A w − b‖²`
    pub fn loss(&self, w: &[f64]) -> f64 {
        let resid: Vec<f64> = self.a.matvec(w).iter().zip(self.b.iter()).map(|(p, y)| p - y).collect();
        dot(&resid, &resid)
    }

    /// `L(w) − L(w*) = ‖A (w − w*)‖²`, computed without cancellation.
    pub fn excess_loss(&self, w: &[f64]) -> f64 {
        let diff: Vec<f64> = w.iter().zip(self.w_star.iter()).map(|(x, y)| x - y).collect();
        let ad = self.a.matvec(&diff);
        dot(&ad, &ad)
    }

    pub fn is_degenerate(&self) -> bool {
        self.loss_star <= DEGENERATE_LOSS_REL * dot(&self.b, &self.b).max(f64::MIN_POSITIVE)
    }

    /// Exact leverage profile, computed once from the cached QR.
    pub fn leverage(&self) -> &LeverageProfile {
        self.leverage.get_or_init(|| {
            crate::leverage::exact_leverage_scores(&self.a).expect("QR already succeeded on this matrix")
        })
    }

    /// Operator for `spec`, wired to this problem's leverage profile when needed.
    pub fn operator(&self, spec: SketchSpec) -> Result<SketchOperator> {
        let profile = (spec.family == SketchFamily::Less).then(|| self.leverage());
        SketchOperator::new(spec, self.n_rows(), profile)
    }

    /// `(I − H) v`: the component of `v` orthogonal to the column span of `A`.
    pub fn residual_projection(&self, v: &[f64]) -> Vec<f64> {
        let q = &self.qr.q;
        let coef = q.tr_matvec(v);
        let proj = q.matvec(&coef);
        v.iter().zip(&proj).map(|(x, p)| x - p).collect()
    }
}

/// Result of one sketch-and-solve draw.
#[derive(Clone, Debug)]
pub struct OlsOutcome {
    pub w_hat: DenseVector,
    /// `(L(ŵ) − L(w*)) / L(w*)`; `+∞` when the optimal loss is zero.
    pub normalized_error: f64,
    pub degenerate_loss: bool,
    /// Extra draws needed because the sketch lost rank.
    pub redraws: usize,
}

/// Expected normalized error of a Gaussian sketch of size `n`: `d / (n − d − 1)`.
pub fn ols_error_law(d: usize, n: usize) -> Result<f64> {
    if n < d + 2 {
        return Err(Error::SketchTooSmall { n, d });
    }
    Ok(d as f64 / (n - d - 1) as f64)
}

/// Minimizes `‖SA w − Sb‖²` for one draw of `spec`.
pub fn sketch_and_solve_ols(p: &RegressionProblem, spec: &SketchSpec) -> Result<OlsOutcome> {
    let op = p.operator(*spec)?;
    sketch_and_solve_with(p, &op, spec.seed)
}

/// As [`sketch_and_solve_ols`] with a prepared operator. A rank-deficient
/// sketch is redrawn with derived seeds up to [`MAX_REDRAWS`] times.
pub fn sketch_and_solve_with(p: &RegressionProblem, op: &SketchOperator, seed: u64) -> Result<OlsOutcome> {
    let d = p.dim();
    if op.spec().n < d {
        return Err(Error::SketchTooSmall { n: op.spec().n, d });
    }
    for attempt in 0..=MAX_REDRAWS {
        let draw_seed = if attempt == 0 { seed } else { derive_seed(seed, &[attempt as u64]) };
        let pair = SketchedPair::from_augmented(op.apply_with_seed(p.augmented(), draw_seed)?);
        let qr = match qr_thin(&pair.sa) {
            Ok(qr) => qr,
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        };
        let mut w_hat = qr.solve(&pair.sb);
        w_hat.iter_mut().for_each(|w| *w = w.clamp(-RANGE_CLAMP, RANGE_CLAMP));
        let degenerate_loss = p.is_degenerate();
        let normalized_error = if degenerate_loss { f64::INFINITY } else { p.excess_loss(&w_hat) / p.loss_star() };
        return Ok(OlsOutcome { w_hat, normalized_error, degenerate_loss, redraws: attempt });
    }
    Err(Error::RankDeficientSketch { attempts: MAX_REDRAWS + 1 })
}

/// Leave-one-out cross-validation loss of the sketched estimator through
/// the leverage shortcut `Σ_i (r_i / (1 − ℓ_i(SA)))²`.
pub fn loo_cv_loss(p: &RegressionProblem, sketched: &SketchedPair) -> Result<f64> {
    if sketched.sa.cols() != p.dim() || sketched.sa.rows() != sketched.sb.len() {
        return Err(Error::DimensionMismatch("sketched pair does not match the problem".into()));
    }
    let qr = qr_thin(&sketched.sa)?;
    let lev = qr.row_norms_sq();
    if let Some((row, &leverage)) = lev.iter().enumerate().find(|(_, &l)| l >= 1.0 - LEVERAGE_ONE_SLACK) {
        return Err(Error::LeverageAtOne { row, leverage });
    }
    let w_hat = qr.solve(&sketched.sb);
    let fitted = sketched.sa.matvec(&w_hat);
    Ok(fitted.iter().zip(sketched.sb.iter()).zip(&lev).map(|((f, y), l)| ((f - y) / (1.0 - l)).powi(2)).sum())
}

/// Euclidean projection onto `{w : ‖w‖₁ ≤ radius}` by sorting.
pub fn l1_ball_project(w: &[f64], radius: f64) -> DenseVector {
    let l1: f64 = w.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return DenseVector::from(w.to_vec());
    }
    if radius <= 0.0 {
        return DenseVector::zeros(w.len());
    }
    let mut mags: Vec<f64> = w.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &m) in mags.iter().enumerate() {
        cumsum += m;
        let candidate = (cumsum - radius) / (j + 1) as f64;
        if m > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    DenseVector::from(w.iter().map(|&v| v.signum() * (v.abs() - theta).max(0.0)).collect::<Vec<_>>())
}

/// Least squares restricted to an l1 ball.
#[derive(Debug)]
pub struct ConstrainedProblem {
    pub base: RegressionProblem,
    pub radius: f64,
    pub sparsity_hint: usize,
}

impl ConstrainedProblem {
    pub fn new(base: RegressionProblem, radius: f64, sparsity_hint: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        Ok(Self { base, radius, sparsity_hint })
    }
}

/// Output of the l1-constrained quadratic solver.
#[derive(Clone, Debug)]
pub struct L1Solution {
    pub w: DenseVector,
    pub iterations: usize,
    pub mapping_norm: f64,
    /// Objective values `wᵀGw − 2hᵀw` of the accepted iterates.
    pub objective_trace: Vec<f64>,
}

fn quad_objective(gram: &DenseMatrix, h: &[f64], w: &[f64]) -> f64 {
    dot(w, &gram.matvec(w)) - 2.0 * dot(h, w)
}

/// Minimizes `wᵀGw − 2hᵀw` over `‖w‖₁ ≤ radius` by accelerated projected
/// gradient with monotone adaptive restart. Stops once the gradient mapping
/// norm drops to `tol · ‖h‖`.
pub fn solve_l1_constrained_quadratic(
    gram: &DenseMatrix,
    h: &[f64],
    radius: f64,
    tol: f64,
    max_iter: usize,
) -> Result<L1Solution> {
    let d = h.len();
    if gram.rows() != d || gram.cols() != d {
        return Err(Error::DimensionMismatch("gram matrix and linear term".into()));
    }
    if !(tol > 0.0) || radius < 0.0 {
        return Err(Error::InvalidArgument("tol must be positive and radius nonnegative".into()));
    }
    let h_norm = dot(h, h).sqrt();
    let mut x = DenseVector::zeros(d);
    if h_norm == 0.0 {
        return Ok(L1Solution { w: x, iterations: 0, mapping_norm: 0.0, objective_trace: vec![0.0] });
    }
    // Power iteration underestimates λ_max slightly; the margin keeps 1/L a descent step.
    let lipschitz = (2.0 * spectral_norm(gram) * 1.01).max(f64::MIN_POSITIVE);
    let threshold = tol * h_norm;

    let mut fx = quad_objective(gram, h, &x);
    let mut trace = vec![fx];
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut mapping_norm = f64::INFINITY;
    let mut restarted = false;

    for iter in 1..=max_iter {
        let gy = gram.matvec(&y);
        let step: Vec<f64> = y.iter().zip(&gy).zip(h).map(|((yi, gi), hi)| yi - 2.0 * (gi - hi) / lipschitz).collect();
        let x_new = l1_ball_project(&step, radius);
        mapping_norm = lipschitz * y.iter().zip(x_new.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let f_new = quad_objective(gram, h, &x_new);

        // A plain projected step from x always descends in exact arithmetic,
        // so right after a restart the step is accepted regardless of roundoff.
        if f_new > fx && !restarted {
            t = 1.0;
            y = x.clone();
            restarted = true;
            continue;
        }
        restarted = false;
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_new;
        y = DenseVector::from(x_new.iter().zip(x.iter()).map(|(a, b)| a + beta * (a - b)).collect::<Vec<_>>());
        x = x_new;
        fx = f_new;
        t = t_new;
        trace.push(fx);
        if mapping_norm <= threshold {
            return Ok(L1Solution { w: x, iterations: iter, mapping_norm, objective_trace: trace });
        }
    }
    if mapping_norm > 100.0 * threshold {
        return Err(Error::NoConvergence { iterations: max_iter, residual: mapping_norm });
    }
    Ok(L1Solution { w: x, iterations: max_iter, mapping_norm, objective_trace: trace })
}

/// Sketch-and-solve over the l1 ball: minimizes `‖SA w − Sb‖²` subject to
/// `‖w‖₁ ≤ R`.
pub fn constrained_sketch_solve(cp: &ConstrainedProblem, spec: &SketchSpec, tol: f64) -> Result<DenseVector> {
    let op = cp.base.operator(*spec)?;
    let pair = SketchedPair::from_augmented(op.apply(cp.base.augmented())?);
    let gram = pair.sa.gram();
    let h = pair.sa.tr_matvec(&pair.sb);
    Ok(solve_l1_constrained_quadratic(&gram, &h, cp.radius, tol, L1_MAX_ITER)?.w)
}

/// The same solver on the full data `(A, b)`.
pub fn constrained_full_solve(cp: &ConstrainedProblem, tol: f64) -> Result<DenseVector> {
    let a = cp.base.a();
    let gram = a.gram();
    let h = a.tr_matvec(cp.base.b());
    Ok(solve_l1_constrained_quadratic(&gram, &h, cp.radius, tol, L1_MAX_ITER)?.w)
}

/// Monte Carlo estimate of `E sup_{u ∈ T} |gᵀu|` for standard normal `g` of
/// dimension `u_basis.rows()`; `support_fn` evaluates the supremum for one
/// draw. Returns `(mean, standard error)`.
pub fn gaussian_width_mc<F>(u_basis: &DenseMatrix, support_fn: F, trials: usize, seed: u64) -> Result<(f64, f64)>
where
    F: Fn(&DenseVector) -> f64,
{
    if trials < 2 {
        return Err(Error::InvalidArgument("gaussian width needs at least 2 trials".into()));
    }
    let dim = u_basis.rows();
    let vals: Vec<f64> = (0..trials)
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            let g = DenseVector::from((0..dim).map(|_| rng.sample(StandardNormal)).collect::<Vec<f64>>());
            support_fn(&g)
        })
        .collect();
    Ok(mean_and_stderr(&vals))
}

pub(crate) fn mean_and_stderr(vals: &[f64]) -> (f64, f64) {
    let m = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / m;
    if vals.len() < 2 {
        return (mean, 0.0);
    }
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Heuristic restricted condition number: largest column norm over the
/// smallest singular value among column subsets of size `min(4s, d)`.
///
/// Subset singular values stand in for the minimum of `‖Av‖` over the
/// sparse-cone sphere, so this is a brute-force proxy rather than a
/// certified bound. Columns beyond [`RESTRICTED_CONDITION_MAX_DIM`] are
/// rejected.
pub fn restricted_condition_small(a: &DenseMatrix, s: usize) -> Result<f64> {
    let d = a.cols();
    if d > RESTRICTED_CONDITION_MAX_DIM {
        return Err(Error::DimensionTooLarge { d, limit: RESTRICTED_CONDITION_MAX_DIM });
    }
    if s == 0 || d == 0 {
        return Err(Error::InvalidArgument("need s >= 1 and at least one column".into()));
    }
    let max_col = (0..d).map(|j| dot(a.col(j), a.col(j)).sqrt()).fold(0.0, f64::max);
    let gram = a.gram();
    let size = (4 * s).min(d);
    let mut subset: Vec<usize> = (0..size).collect();
    let mut min_sigma = f64::INFINITY;
    loop {
        let sub = DenseMatrix::from_fn(size, size, |i, j| gram[(subset[i], subset[j])]);
        let lam = symmetric_eigenvalues(&sub)[0].max(0.0);
        min_sigma = min_sigma.min(lam.sqrt());
        if !next_combination(&mut subset, d) {
            break;
        }
    }
    Ok(if min_sigma > 0.0 { max_col / min_sigma } else { f64::INFINITY })
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// `‖A − A·Proj‖_F²` where `Proj` projects onto the row span of `sketched_rows`.
pub fn randomized_svd_error(a: &DenseMatrix, sketched_rows: &DenseMatrix) -> Result<f64> {
    if sketched_rows.cols() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "sketch has {} columns, A has {}",
            sketched_rows.cols(),
            a.cols()
        )));
    }
    let total = a.frobenius_norm_sq();
    let basis = orthonormal_basis(&sketched_rows.transpose(), 1e-10);
    if basis.cols() == 0 {
        return Ok(total);
    }
    let captured = a.matmul(&basis).frobenius_norm_sq();
    Ok((total - captured).clamp(0.0, total))
}

fn gram_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    symmetric_eigenvalues(&a.gram()).into_iter().map(|v| v.max(0.0)).collect()
}

fn statdim_from_eigs(eigs: &[f64], lambda: f64) -> f64 {
    eigs.iter().map(|&s2| if s2 == 0.0 { 0.0 } else { s2 / (s2 + lambda) }).sum()
}

/// `tr AᵀA (AᵀA + λI)⁻¹ = Σ σ_j² / (σ_j² + λ)`.
pub fn statdim(a: &DenseMatrix, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be nonnegative, got {lambda}")));
    }
    Ok(statdim_from_eigs(&gram_eigenvalues(a), lambda))
}

fn numerical_rank(eigs: &[f64]) -> usize {
    let top = eigs.iter().copied().fold(0.0, f64::max);
    eigs.iter().filter(|&&e| e > 1e-12 * top).count()
}

/// The `λ` at which the statistical dimension equals `n`, by bisection.
pub fn statdim_inverse(a: &DenseMatrix, n: f64) -> Result<f64> {
    let eigs = gram_eigenvalues(a);
    let rank = numerical_rank(&eigs) as f64;
    if !(n > 0.0) || n >= rank {
        return Err(Error::OutOfRange { target: n, upper: rank });
    }
    let mut hi = eigs.iter().copied().fold(0.0, f64::max);
    while statdim_from_eigs(&eigs, hi) >= n {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if statdim_from_eigs(&eigs, mid) > n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Predicted expected randomized-SVD error `n · λ_n` for a sketch of size `n`.
pub fn rsvd_error_formula(a: &DenseMatrix, n: usize) -> Result<f64> {
    Ok(n as f64 * statdim_inverse(a, n as f64)?)
}
