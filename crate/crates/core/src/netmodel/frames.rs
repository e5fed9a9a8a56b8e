//! Measurement matrix generators and the default cost model.

use ndarray::{Array1, Array2};
use ndarray_linalg::{JobSvd, SVDDC};
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use num_traits::Float;

use super::{SensorNetwork, Topology};
use crate::{Error, Real, Result};

/// Project `A` onto the set of `alpha`-tight matrices by replacing it with
/// the scaled polar factor of its SVD: `A = U S V^T  ->  sqrt(alpha) U V^T`.
///
/// The output satisfies `A^T A = alpha I` to machine precision.
pub fn make_tight<R: Real>(a: &Array2<R>, alpha: R) -> Result<Array2<R>> {
    if !(alpha > R::zero()) {
        return Err(Error::Domain("tight frame constant alpha must be > 0".into()));
    }
    let (u, sv, vt) = a
        .svddc(JobSvd::Some)
        .map_err(|e| Error::Numeric(format!("svd failed: {e}")))?;
    let (u, vt) = (u.expect("economy svd returns U"), vt.expect("economy svd returns VT"));
    let floor = Float::sqrt(R::from(super::metrics::RANK_FLOOR).unwrap()) * sv[0];
    if sv[sv.len() - 1] <= floor {
        return Err(Error::RankDeficient(format!(
            "sigma_min = {:e} too small for a polar factor",
            sv[sv.len() - 1].to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(u.dot(&vt) * Float::sqrt(alpha))
}

/// Reproducible matrix with i.i.d. `scale * N(0, 1)` entries, filled in
/// row-major order from a ChaCha8 stream seeded with `seed`.
///
/// `scale` defaults to `sqrt(m)`, matching measurement rows whose expected
/// squared norm grows with the network size.
pub fn gen_gaussian<R>(m: usize, n: usize, scale: Option<R>, seed: u64) -> Result<Array2<R>>
where
    R: Real,
    StandardNormal: Distribution<R>,
{
    if m == 0 || n == 0 {
        return Err(Error::Validation(format!("matrix dimensions must be positive, got {m} x {n}")));
    }
    let scale = scale.unwrap_or_else(|| Float::sqrt(R::from(m).unwrap()));
    if !(scale > R::zero()) || !scale.is_finite() {
        return Err(Error::Domain("scale must be a positive finite number".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Array2::zeros((m, n));
    for i in 0..m {
        for j in 0..n {
            let g: R = rng.sample(StandardNormal);
            a[[i, j]] = scale * g;
        }
    }
    Ok(a)
}

/// Random `alpha`-tight `m x n` matrix: a Gaussian draw projected onto the
/// tight set via [`make_tight`].
pub fn random_tight<R>(m: usize, n: usize, alpha: R, seed: u64) -> Result<Array2<R>>
where
    R: Real,
    StandardNormal: Distribution<R>,
{
    if m < n {
        return Err(Error::Validation(format!("tight frame requires m >= n, got {m} x {n}")));
    }
    make_tight(&gen_gaussian(m, n, None, seed)?, alpha)
}

/// Default cost model: sensing cost `s_i = ||a_i||_2^2`, and communication
/// cost `C[i][j] = comm_fraction * s_j * hop_cost[i]` for every node `i` on
/// sensor `j`'s route to the master (including `j` itself).
///
/// Without a topology every sensor is assumed to have a direct master link,
/// so only the diagonal `C[j][j]` is populated.
pub fn default_costs<R: Real>(
    network: &SensorNetwork<R>,
    comm_fraction: R,
) -> Result<(Array1<R>, Array2<R>)> {
    if !(comm_fraction >= R::zero()) || !comm_fraction.is_finite() {
        return Err(Error::Domain("comm_fraction must be finite and >= 0".into()));
    }
    let m = network.m();
    let s = Array1::from_iter(
        network.a().rows().into_iter().map(|r| r.iter().map(|&v| v * v).sum::<R>()),
    );
    let mut c = Array2::zeros((m, m));
    for j in 0..m {
        let route = match network.topology() {
            Some(top) => top.route(j)?,
            None => vec![j],
        };
        for i in route {
            let hop = match network.topology() {
                Some(top) => R::from(top.hop_cost[i]).unwrap(),
                None => R::one(),
            };
            c[[i, j]] = comm_fraction * s[j] * hop;
        }
    }
    Ok((s, c))
}

/// Topology where every sensor has a direct link to the master.
pub fn star_topology(m: usize) -> Topology {
    Topology { parent: vec![None; m], hop_cost: vec![1.0; m] }
}

/// Random routing tree: each sensor attaches uniformly at random to the
/// master or to an earlier sensor that still has hop budget (`depth <
/// max_depth`) and free relay slots (`children < max_fanout`).
pub fn random_tree_topology(
    m: usize,
    max_depth: usize,
    max_fanout: usize,
    seed: u64,
) -> Result<Topology> {
    if max_depth == 0 {
        return Err(Error::Domain("max_depth must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parent: Vec<Option<usize>> = vec![None; m];
    let mut depth = vec![1usize; m];
    let mut children = vec![0usize; m];
    for i in 0..m {
        let cands: Vec<usize> = (0..i)
            .filter(|&p| depth[p] < max_depth && children[p] < max_fanout)
            .collect();
        // slot 0 is the master itself
        let pick = rng.random_range(0..=cands.len());
        if pick > 0 {
            let p = cands[pick - 1];
            parent[i] = Some(p);
            depth[i] = depth[p] + 1;
            children[p] += 1;
        }
    }
    Topology::new(parent, vec![1.0; m])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{frame_potential, mse, vce, wce};
    use ndarray::array;

    fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn make_tight_of_scaled_identity() {
        let a = Array2::<f64>::eye(4) * 3.0;
        let t = make_tight(&a, 1.0).unwrap();
        assert!(max_abs_diff(&t, &Array2::eye(4)) < 1e-12);
    }

    #[test]
    fn make_tight_random_gaussian() {
        let a = gen_gaussian::<f64>(100, 20, None, 3).unwrap();
        let t = make_tight(&a, 100.0).unwrap();
        let gram = t.t().dot(&t);
        let target = Array2::eye(20) * 100.0;
        // relative to alpha = 100
        assert!(max_abs_diff(&gram, &target) / 100.0 < 1e-9);
        // frame potential at its minimum n * alpha^2
        assert!((frame_potential(&t) - 20.0 * 100.0 * 100.0).abs() / 200_000.0 < 1e-9);
    }

    #[test]
    fn make_tight_rejects_rank_deficient() {
        let a = array![[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        assert!(make_tight(&a, 1.0).is_err());
    }

    #[test]
    fn tight_performance_identities() {
        // MSE = n/alpha, WCE = 1/alpha, VCE = n log alpha, all at once
        let t = random_tight::<f64>(50, 7, 25.0, 11).unwrap();
        assert!((mse(&t).unwrap() - 7.0 / 25.0).abs() / (7.0 / 25.0) < 1e-9);
        assert!((wce(&t).unwrap() - 1.0 / 25.0).abs() / (1.0 / 25.0) < 1e-9);
        assert!((vce(&t).unwrap() - 7.0 * 25.0f64.ln()).abs() / (7.0 * 25.0f64.ln()) < 1e-9);
    }

    #[test]
    fn gen_gaussian_deterministic() {
        let a = gen_gaussian::<f64>(4, 2, Some(1.0), 7).unwrap();
        let b = gen_gaussian::<f64>(4, 2, Some(1.0), 7).unwrap();
        assert_eq!(a, b);
        let c = gen_gaussian::<f64>(4, 2, Some(1.0), 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gen_gaussian_moments() {
        // Monte Carlo oracle: mean 0 and variance scale^2 within 5 standard
        // errors of the sample estimate.
        let n_samples = 1_000_000usize;
        let scale = 2.0;
        let a = gen_gaussian::<f64>(1000, 1000, Some(scale), 42).unwrap();
        let nf = n_samples as f64;
        let mean = a.iter().sum::<f64>() / nf;
        let var = a.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
        let mean_se = scale / nf.sqrt();
        // var of sample variance of a normal: 2 sigma^4 / (n - 1)
        let var_se = (2.0 * scale.powi(4) / (nf - 1.0)).sqrt();
        assert!(mean.abs() < 5.0 * mean_se, "mean {mean} exceeds 5 se {mean_se}");
        assert!((var - scale * scale).abs() < 5.0 * var_se, "var {var} off target");
    }

    #[test]
    fn default_costs_identity_star() {
        let net = SensorNetwork::new(Array2::<f64>::eye(3)).unwrap();
        let (s, c0) = default_costs(&net, 0.0).unwrap();
        assert_eq!(s, array![1.0, 1.0, 1.0]);
        assert_eq!(c0, Array2::<f64>::zeros((3, 3)));
        let net = net.with_topology(star_topology(3)).unwrap();
        let (_, c) = default_costs(&net, 0.5).unwrap();
        assert_eq!(c, Array2::<f64>::eye(3) * 0.5);
    }

    #[test]
    fn default_costs_multi_hop_route() {
        // chain 2 -> 1 -> 0 -> master
        let top = Topology::new(vec![None, Some(0), Some(1)], vec![1.0; 3]).unwrap();
        let net = SensorNetwork::new(Array2::<f64>::eye(3)).unwrap().with_topology(top).unwrap();
        let (_, c) = default_costs(&net, 0.5).unwrap();
        // sensor 2's data is relayed by 2, 1 and 0
        assert_eq!(c.column(2).to_vec(), vec![0.5, 0.5, 0.5]);
        assert_eq!(c.column(0).to_vec(), vec![0.5, 0.0, 0.0]);
    }

    #[test]
    fn tree_topology_is_valid_and_deterministic() {
        let t1 = random_tree_topology(50, 4, 3, 9).unwrap();
        let t2 = random_tree_topology(50, 4, 3, 9).unwrap();
        assert_eq!(t1, t2);
        for i in 0..50 {
            assert!(t1.route(i).unwrap().len() <= 4);
        }
        // at least one multi-hop path for this seed
        assert!((0..50).any(|i| t1.route(i).unwrap().len() > 1));
    }
}
