//! Accuracy metrics of a measurement matrix.
//!
//! All three criteria are functions of the eigenvalues of the Gram matrix
//! `A^T A` and are computed through a symmetric eigendecomposition rather
//! than an explicit inverse: near the feasibility boundary the Gram matrix
//! is badly conditioned and the eigenvalue route is the stable one.

use ndarray::{Array1, Array2};
use ndarray_linalg::{EigValsh, UPLO};
use num_traits::Float;

use super::{Criterion, SensorNetwork};
use crate::{Error, Real, Result};

/// Relative eigenvalue floor below which a Gram matrix counts as rank
/// deficient: `lambda_min <= RANK_FLOOR * lambda_max`.
pub const RANK_FLOOR: f64 = 1e-12;

pub(crate) fn gram<R: Real>(a: &Array2<R>) -> Array2<R> {
    a.t().dot(a)
}

/// Eigenvalues of a symmetric matrix, ascending.
pub(crate) fn sym_eigvals<R: Real>(g: &Array2<R>) -> Result<Array1<R>> {
    g.eigvalsh(UPLO::Lower)
        .map_err(|e| Error::Numeric(format!("symmetric eigendecomposition failed: {e}")))
}

/// `Ok(())` when the ascending eigenvalue list passes the rank floor.
pub(crate) fn rank_check<R: Real>(eigs: &Array1<R>) -> Result<()> {
    let l_max = eigs[eigs.len() - 1];
    let l_min = eigs[0];
    let floor = R::from(RANK_FLOOR).unwrap() * l_max;
    if l_max <= R::zero() || l_min <= floor {
        return Err(Error::RankDeficient(format!(
            "lambda_min = {:e} <= {RANK_FLOOR:e} * lambda_max = {:e}",
            l_min.to_f64().unwrap_or(f64::NAN),
            l_max.to_f64().unwrap_or(f64::NAN),
        )));
    }
    Ok(())
}

/// Mean squared error `tr((A^T A)^{-1})` of least squares under unit noise.
pub fn mse<R: Real>(a: &Array2<R>) -> Result<R> {
    let eigs = sym_eigvals(&gram(a))?;
    rank_check(&eigs)?;
    Ok(eigs.iter().map(|&l| R::one() / l).sum())
}

/// Worst-case error variance `1 / lambda_min(A^T A)`.
pub fn wce<R: Real>(a: &Array2<R>) -> Result<R> {
    let eigs = sym_eigvals(&gram(a))?;
    rank_check(&eigs)?;
    Ok(R::one() / eigs[0])
}

/// Log-volume proxy `log det(A^T A)`.
///
/// Total on all inputs: a rank-deficient matrix yields `-inf`.
pub fn vce<R: Real>(a: &Array2<R>) -> Result<R> {
    let eigs = sym_eigvals(&gram(a))?;
    let floor = R::from(RANK_FLOOR).unwrap() * eigs[eigs.len() - 1];
    if eigs[0] <= floor.max(R::zero()) {
        return Ok(-R::infinity());
    }
    Ok(eigs.iter().map(|&l| Float::ln(l)).sum())
}

/// Frame potential `||A^T A||_F^2`; minimised exactly by tight frames, where
/// it equals `n * alpha^2`.
pub fn frame_potential<R: Real>(a: &Array2<R>) -> R {
    gram(a).iter().map(|&v| v * v).sum()
}

/// Reference criterion value of the full network (the best achievable):
/// `tr((A^T A)^{-1})` for MSE, `log det(A^T A)` for VCE.
pub fn gamma0<R: Real>(network: &SensorNetwork<R>, criterion: Criterion) -> Result<R> {
    let eigs = sym_eigvals(&gram(network.a()))?;
    rank_check(&eigs)?;
    Ok(match criterion {
        Criterion::Mse => eigs.iter().map(|&l| R::one() / l).sum(),
        Criterion::Vce => eigs.iter().map(|&l| Float::ln(l)).sum(),
    })
}

/// Gram matrix of the activated sub-network, `A^T diag(z) A`. Accepts
/// fractional activation values in `[0, 1]`.
pub fn restrict<R: Real>(network: &SensorNetwork<R>, z: &Array1<R>) -> Result<Array2<R>> {
    let m = network.m();
    if z.len() != m {
        return Err(Error::Validation(format!(
            "activation vector length {} != sensor count {m}",
            z.len()
        )));
    }
    let lo = R::from(-1e-12).unwrap();
    let hi = R::one() + R::from(1e-12).unwrap();
    if z.iter().any(|&v| !(v >= lo && v <= hi)) {
        return Err(Error::Validation("activation values must lie in [0, 1]".into()));
    }
    Ok(scaled_gram(network.a(), z))
}

/// `A^T diag(z) A` without range validation (internal hot path).
pub(crate) fn scaled_gram<R: Real>(a: &Array2<R>, z: &Array1<R>) -> Array2<R> {
    let mut scaled = a.clone();
    for (mut row, &zi) in scaled.rows_mut().into_iter().zip(z.iter()) {
        row.mapv_inplace(|v| v * zi);
    }
    a.t().dot(&scaled)
}
