//! Closed-form performance analysis for tight sensor networks.
//!
//! For an `alpha`-tight `m x n` network, the expected criterion values of a
//! uniformly random `k`-sensor subset have closed forms derived from the
//! expected characteristic polynomial after `k` rank-one updates. This module
//! evaluates those formulas (in log space, so binomials stay finite at
//! `m = 300` and beyond), the compressed-sensing style eigenvalue brackets
//! for Gaussian matrices, the partition-based MSE lower bound, and the
//! rank-one update results (interlacing, largest-eigenvalue repulsion,
//! smallest-singular-value caps) that the greedy and scheduling methods rest
//! on. Everything here is also used as an oracle by the rest of the crate's
//! test suites.

use ndarray::{Array1, Array2};
use ndarray_linalg::{FactorizeC, JobSvd, Solve, SolveC, SVDDC, UPLO};
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::netmodel::{sym_eigvals, RANK_FLOOR};
use crate::{Error, Matrix, Real, Result};

/// Expected criterion values of a uniformly random `k`-subset of an
/// `alpha`-tight `m x n` network.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExpectedPerf {
    pub k: usize,
    /// `E[MSE] = m n / ((k - n + 1) alpha)`.
    pub exp_mse: f64,
    /// Lower bound on `E[WCE]`; the closed form is an inequality, so this is
    /// reported as a bound, never as an estimate.
    pub exp_wce_lower: f64,
    /// `E[VCE] = log(n! (alpha/m)^n C(k, k - n))`.
    pub exp_vce: f64,
}

/// `ln(x!)` by direct summation; exact to a few ulps for the sizes used here.
pub fn ln_factorial(x: usize) -> f64 {
    (2..=x).map(|i| (i as f64).ln()).sum()
}

/// `ln C(n, k)`.
pub fn ln_choose(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn check_mnk(m: usize, n: usize, alpha: f64, k: usize) -> Result<()> {
    if n == 0 || m < n {
        return Err(Error::Domain(format!("need m >= n >= 1, got m = {m}, n = {n}")));
    }
    if k < n || k > m {
        return Err(Error::Domain(format!("need n <= k <= m, got k = {k} with n = {n}, m = {m}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be > 0, got {alpha}")));
    }
    Ok(())
}

/// Expected performance of a uniformly random `k`-subset (see
/// [`ExpectedPerf`] for the formulas).
pub fn expected_perf(m: usize, n: usize, alpha: f64, k: usize) -> Result<ExpectedPerf> {
    check_mnk(m, n, alpha, k)?;
    let (mf, nf, kf) = (m as f64, n as f64, k as f64);
    let denom = (kf - nf + 1.0) * alpha;
    let exp_vce = ln_factorial(n) + nf * (alpha / mf).ln() + ln_choose(k, k - n);
    Ok(ExpectedPerf { k, exp_mse: mf * nf / denom, exp_wce_lower: mf / denom, exp_vce })
}

/// Constant and linear coefficients of the expected characteristic
/// polynomial after `k` rank-one updates drawn from an `alpha`-tight frame:
/// `a0 = n! (alpha/m)^n C(k, k-n)`, `a1 = -n! (alpha/m)^{n-1} C(k, k-n+1)`.
///
/// Magnitudes are carried in log space; `a0`/`a1` are the materialised
/// values and overflow to `+-inf` for very large arguments, while
/// [`CharPolyCoeffs::mse_ratio`] stays finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharPolyCoeffs {
    pub k: usize,
    pub a0: f64,
    pub a1: f64,
    ln_a0: f64,
    ln_neg_a1: f64,
}

impl CharPolyCoeffs {
    /// `-a1 / a0`, evaluated in log space; equals the expected MSE.
    pub fn mse_ratio(&self) -> f64 {
        (self.ln_neg_a1 - self.ln_a0).exp()
    }

    pub fn ln_a0(&self) -> f64 {
        self.ln_a0
    }

    pub fn ln_neg_a1(&self) -> f64 {
        self.ln_neg_a1
    }
}

pub fn charpoly_coeffs(m: usize, n: usize, alpha: f64, k: usize) -> Result<CharPolyCoeffs> {
    check_mnk(m, n, alpha, k)?;
    let ratio = (alpha / m as f64).ln();
    let ln_a0 = ln_factorial(n) + n as f64 * ratio + ln_choose(k, k - n);
    let ln_neg_a1 = ln_factorial(n) + (n as f64 - 1.0) * ratio + ln_choose(k, k - n + 1);
    Ok(CharPolyCoeffs { k, a0: ln_a0.exp(), a1: -ln_neg_a1.exp(), ln_a0, ln_neg_a1 })
}

/// Partition-based MSE lower bound `n m^2 / (sqrt(k) + sqrt(c1 n))^4` for
/// any `k`-sensor selection from a 1-tight network.
///
/// `c1 >= 1` is the row-norm concentration constant (callers default it to
/// 1); `c1 = 0` is accepted and gives the `k >> n` limiting form
/// `n (m/k)^2`.
pub fn ks_mse_lower_bound(m: usize, n: usize, k: usize, c1: f64) -> Result<f64> {
    if n == 0 || k < n {
        return Err(Error::Domain(format!("need k >= n >= 1, got k = {k}, n = {n}")));
    }
    if !(c1 >= 0.0) {
        return Err(Error::Domain(format!("c1 must be >= 0, got {c1}")));
    }
    let (mf, nf, kf) = (m as f64, n as f64, k as f64);
    Ok(nf * mf * mf / (kf.sqrt() + (c1 * nf).sqrt()).powi(4))
}

/// Eigenvalue bracket for the MSE of `k` rows of a standard Gaussian matrix:
/// `n / (sqrt(k) + sqrt(n))^2 <= MSE <= n / (sqrt(k) - sqrt(n))^2`.
pub fn gaussian_mse_bounds(k: usize, n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Ok((0.0, 0.0));
    }
    if k <= n {
        return Err(Error::Domain(format!("bracket requires k > n, got k = {k}, n = {n}")));
    }
    let (kf, nf) = (k as f64, n as f64);
    let lo = nf / (kf.sqrt() + nf.sqrt()).powi(2);
    let hi = nf / (kf.sqrt() - nf.sqrt()).powi(2);
    Ok((lo, hi))
}

/// Check the rank-one update interlacing chain
/// `mu_1 >= lambda_1 >= mu_2 >= ... >= mu_n >= lambda_n`
/// within an absolute tolerance of `1e-9 * lambda_1`.
///
/// `before` holds the lambda values, `after` the mu values; any input order
/// is accepted and sorted internally.
pub fn interlace_check<R: Real>(before: &[R], after: &[R]) -> Result<bool> {
    if before.len() != after.len() || before.is_empty() {
        return Err(Error::Domain(format!(
            "spectra must have equal nonzero length, got {} and {}",
            before.len(),
            after.len()
        )));
    }
    let desc = |xs: &[R]| {
        let mut v = xs.to_vec();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    };
    let (lam, mu) = (desc(before), desc(after));
    let scale = Float::abs(lam[0]).max(Float::abs(mu[0]));
    let tol = R::from(1e-9).unwrap() * scale;
    let n = lam.len();
    if mu[0] < lam[0] - tol {
        return Ok(false);
    }
    for i in 1..n {
        if lam[i - 1] < mu[i] - tol || mu[i] < lam[i] - tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest-eigenvalue repulsion bound for spectra in arithmetic progression:
/// given `M = A^T A` with eigenvalues `lambda_i = lambda_1 + (i-1) r`,
/// `r <= 0`, the largest eigenvalue of `M + a a^T` is at least
/// `(lambda_1 + (n-1) r) (1 + a^T M^{-1} a)`.
///
/// `eigs` is the descending spectrum of `gram`; it is validated for the
/// progression shape and positivity.
pub fn result2_bound<R: Real>(eigs: &[R], gram: &Array2<R>, a: &Array1<R>) -> Result<R> {
    let n = eigs.len();
    if n == 0 || gram.dim() != (n, n) || a.len() != n {
        return Err(Error::Domain("spectrum, matrix and update vector sizes disagree".into()));
    }
    let tol = R::from(1e-9).unwrap() * Float::abs(eigs[0]);
    let r = if n > 1 { (eigs[n - 1] - eigs[0]) / R::from(n - 1).unwrap() } else { R::zero() };
    if r > tol {
        return Err(Error::Domain("spectrum must be nonincreasing (r <= 0)".into()));
    }
    for (i, &l) in eigs.iter().enumerate() {
        let expect = eigs[0] + r * R::from(i).unwrap();
        if Float::abs(l - expect) > tol.max(R::from(1e-12).unwrap()) {
            return Err(Error::Domain("spectrum is not an arithmetic progression".into()));
        }
    }
    if eigs[n - 1] <= R::zero() {
        return Err(Error::Domain("spectrum must be positive".into()));
    }
    let f = gram
        .factorizec(UPLO::Lower)
        .map_err(|e| Error::RankDeficient(format!("gram matrix not positive definite: {e}")))?;
    let minv_a = f.solvec(a).map_err(|e| Error::Numeric(format!("solve failed: {e}")))?;
    let quad = a.dot(&minv_a);
    Ok(eigs[n - 1] * (R::one() + quad))
}

/// Bounds on the smallest singular value after appending row `a` to `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinSvBounds<R: Real> {
    /// `sigma_min(A)`, always a lower bound on `sigma_min([A; a])`.
    pub lower: R,
    /// `sqrt(1 + ||a^T A^{-1}||^2) sigma_min(A)`; square invertible `A`
    /// only. Tight when `a` is a multiple of the right singular vector of
    /// `sigma_min(A)`.
    pub upper_multiplicative: Option<R>,
    /// `min(sqrt(sigma_min(A)^2 + ||a||^2), sigma_{n-1}(A))`; square
    /// invertible `A` only.
    pub upper_cap: Option<R>,
}

pub fn min_sv_bounds<R: Real>(a: &Array2<R>, row: &Array1<R>) -> Result<MinSvBounds<R>> {
    let (m, n) = a.dim();
    if n == 0 || m < n || row.len() != n {
        return Err(Error::Domain(format!(
            "need m >= n >= 1 and a row of length n, got {m} x {n} with row length {}",
            row.len()
        )));
    }
    let (_, sv, _) = a
        .svddc(JobSvd::None)
        .map_err(|e| Error::Numeric(format!("svd failed: {e}")))?;
    let sigma_min = sv[n - 1];
    if m != n || sigma_min <= Float::sqrt(R::from(RANK_FLOOR).unwrap()) * sv[0] {
        return Ok(MinSvBounds { lower: sigma_min, upper_multiplicative: None, upper_cap: None });
    }
    // x = A^{-T} a, so ||a^T A^{-1}||_2 = ||x||_2
    let x = a
        .t()
        .to_owned()
        .solve(row)
        .map_err(|e| Error::Numeric(format!("solve failed: {e}")))?;
    let xnorm2: R = x.iter().map(|&v| v * v).sum();
    let rnorm2: R = row.iter().map(|&v| v * v).sum();
    let mult = Float::sqrt(R::one() + xnorm2) * sigma_min;
    let add = Float::sqrt(sigma_min * sigma_min + rnorm2);
    let cap = if n >= 2 { add.min(sv[n - 2]) } else { add };
    Ok(MinSvBounds { lower: sigma_min, upper_multiplicative: Some(mult), upper_cap: Some(cap) })
}

/// Mean, standard deviation and standard error of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct McStats {
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Draw a uniform `k`-subset of `0..m` by partial Fisher-Yates shuffle.
pub(crate) fn sample_k_subset(rng: &mut impl Rng, m: usize, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..m).collect();
    for i in 0..k {
        let j = rng.random_range(i..m);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

/// Monte Carlo estimate of the mean MSE over uniformly random `k`-subsets of
/// the rows of `a`.
///
/// Sample `i` uses an independent ChaCha stream `(seed, i)`, so the result
/// is reproducible no matter how the loop is scheduled across workers.
/// Numerically singular draws contribute `+inf`, matching the true criterion
/// value of a rank-deficient selection.
pub fn mc_subset_mse(a: &Matrix, k: usize, samples: usize, seed: u64) -> Result<McStats> {
    let (m, n) = a.dim();
    if k < n || k > m {
        return Err(Error::Domain(format!("need n <= k <= m, got k = {k}")));
    }
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let subset = sample_k_subset(&mut rng, m, k);
            subset_mse(a, &subset)
        })
        .collect();
    let nf = samples as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = if samples > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0)
    } else {
        0.0
    };
    let std = var.sqrt();
    Ok(McStats { mean, std, stderr: std / nf.sqrt(), samples })
}

/// MSE of the selected rows, without the rank floor: singular selections
/// report `+inf` instead of an error.
pub fn subset_mse(a: &Matrix, subset: &[usize]) -> f64 {
    let n = a.ncols();
    let mut sub = Matrix::zeros((subset.len(), n));
    for (r, &i) in subset.iter().enumerate() {
        sub.row_mut(r).assign(&a.row(i));
    }
    let gram = sub.t().dot(&sub);
    match sym_eigvals(&gram) {
        Ok(eigs) => {
            if eigs.iter().any(|&l| l <= 0.0) {
                f64::INFINITY
            } else {
                eigs.iter().map(|&l| 1.0 / l).sum()
            }
        }
        Err(_) => f64::INFINITY,
    }
}
