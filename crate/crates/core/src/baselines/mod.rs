//! Greedy, random and exhaustive reference methods for sensor selection.
//!
//! These serve two purposes: head-to-head comparison against the convex
//! relaxation pipeline, and ground truth. [`exhaustive_min_sensors`] in
//! particular is the brute-force oracle the scheduler acceptance tests
//! compare against on small instances.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::netmodel::{sym_eigvals, AccuracySpec, Criterion, SensorNetwork, RANK_FLOOR};
use crate::spectral::sample_k_subset;
use crate::{Error, Matrix, Result};

/// Which algorithm produced a [`SelectionResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    GreedyAddMse,
    FramePotentialRemove,
    Random,
    Exhaustive,
    Irl1,
}

/// A selected sensor subset (0-based indices) with its per-step criterion
/// trajectory.
///
/// For [`SelectionMethod::GreedyAddMse`] the indices are in pick order and
/// the trajectory holds the MSE after each pick (`+inf` until the selection
/// reaches full rank). For the removal method the trajectory holds the frame
/// potential after each removal. Random and exhaustive selections have
/// sorted indices and a single-entry trajectory.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SelectionResult {
    pub indices: Vec<usize>,
    pub trajectory: Vec<f64>,
    pub method: SelectionMethod,
}

impl SelectionResult {
    fn validate(self, m: usize) -> Self {
        debug_assert!(self.indices.iter().all(|&i| i < m));
        debug_assert!({
            let mut seen = vec![false; m];
            self.indices.iter().all(|&i| !std::mem::replace(&mut seen[i], true))
        });
        self
    }
}

fn outer_add(m: &mut Matrix, a: &ndarray::ArrayView1<f64>, sign: f64) {
    let n = a.len();
    for i in 0..n {
        for j in 0..n {
            m[[i, j]] += sign * a[i] * a[j];
        }
    }
}

/// Eigenvalue summary of a PSD matrix: (rank above the floor, pseudo-inverse
/// trace over that rank, positive-definite trace-inverse if full rank).
fn psd_summary(m: &Matrix) -> Result<(usize, f64, Option<f64>)> {
    let eigs = sym_eigvals(m)?;
    let n = eigs.len();
    let lmax = eigs[n - 1].max(0.0);
    let floor = RANK_FLOOR * lmax;
    let rank = eigs.iter().filter(|&&l| l > floor && l > 0.0).count();
    let pinv_tr: f64 = eigs.iter().filter(|&&l| l > floor && l > 0.0).map(|&l| 1.0 / l).sum();
    let full = (rank == n).then_some(pinv_tr);
    Ok((rank, pinv_tr, full))
}

/// Greedy MSE-minimising selection: add one sensor at a time, each time
/// picking the row whose addition minimises the MSE of the augmented matrix.
///
/// Until the selection reaches rank `n` the MSE is infinite for every
/// candidate, so picks are ranked by rank gain first, then by the
/// pseudo-inverse trace of the augmented Gram matrix, then by larger added
/// row norm. Once invertible, candidates are scored with the rank-one trace
/// update `tr((M + aa^T)^{-1}) = tr(M^{-1}) - ||M^{-1}a||^2 / (1 + a^T M^{-1} a)`,
/// which costs O(n^2) per candidate.
pub fn greedy_add_mse(network: &SensorNetwork, k: usize) -> Result<SelectionResult> {
    let (m, n) = (network.m(), network.n());
    if k < n || k > m {
        return Err(Error::Domain(format!("need n <= k <= m, got k = {k} (n = {n}, m = {m})")));
    }
    let a = network.a();
    let mut picked: Vec<usize> = Vec::with_capacity(k);
    let mut in_set = vec![false; m];
    let mut gram: Matrix = Matrix::zeros((n, n));
    let mut trajectory = Vec::with_capacity(k);
    // inverse of the selected Gram matrix once it exists
    let mut inv: Option<Matrix> = None;

    while picked.len() < k {
        let mut best: Option<(usize, f64)> = None; // (index, score) post-rank
        if let Some(minv) = &inv {
            let tr: f64 = minv.diag().sum();
            for j in 0..m {
                if in_set[j] {
                    continue;
                }
                let aj = a.row(j);
                let minv_a = minv.dot(&aj);
                let denom = 1.0 + aj.dot(&minv_a);
                let reduction = minv_a.dot(&minv_a) / denom;
                let score = tr - reduction;
                if best.map_or(true, |(_, s)| score < s) {
                    best = Some((j, score));
                }
            }
        } else {
            // pre-rank phase: (rank gain, pinv trace, -row norm) lexicographic
            let mut best_key: Option<(usize, f64, f64, usize)> = None;
            for j in 0..m {
                if in_set[j] {
                    continue;
                }
                let mut cand = gram.clone();
                outer_add(&mut cand, &a.row(j), 1.0);
                let (rank, pinv_tr, _) = psd_summary(&cand)?;
                let norm2: f64 = a.row(j).iter().map(|&v| v * v).sum();
                let better = match best_key {
                    None => true,
                    Some((r, p, nn, _)) => {
                        rank > r
                            || (rank == r && pinv_tr < p)
                            || (rank == r && pinv_tr == p && norm2 > nn)
                    }
                };
                if better {
                    best_key = Some((rank, pinv_tr, norm2, j));
                }
            }
            best = best_key.map(|(_, _, _, j)| (j, f64::NAN));
        }

        let (j, _) = best.expect("at least one unpicked candidate");
        picked.push(j);
        in_set[j] = true;
        outer_add(&mut gram, &a.row(j), 1.0);
        // refresh the inverse from scratch; n is small and this avoids
        // accumulating Sherman-Morrison drift across picks
        let (rank, _, full_tr) = psd_summary(&gram)?;
        if rank == n {
            use ndarray_linalg::InverseC;
            inv = Some(
                gram.invc().map_err(|e| Error::Numeric(format!("gram inverse failed: {e}")))?,
            );
            trajectory.push(full_tr.expect("full rank"));
        } else {
            inv = None;
            trajectory.push(f64::INFINITY);
        }
    }
    Ok(SelectionResult { indices: picked, trajectory, method: SelectionMethod::GreedyAddMse }
        .validate(m))
}

/// Frame-potential worst-out removal: start from all `m` sensors and
/// repeatedly drop the sensor whose removal minimises the frame potential of
/// the remainder, never allowing the remainder to lose full column rank,
/// until `k` sensors are left. Ties go to the lowest index.
pub fn fp_remove(network: &SensorNetwork, k: usize) -> Result<SelectionResult> {
    let (m, n) = (network.m(), network.n());
    if k < n || k > m {
        return Err(Error::Domain(format!("need n <= k <= m, got k = {k} (n = {n}, m = {m})")));
    }
    let a = network.a();
    let mut active: Vec<usize> = (0..m).collect();
    let mut gram = a.t().dot(a);
    let mut trajectory = Vec::new();

    while active.len() > k {
        let fp: f64 = gram.iter().map(|&v| v * v).sum();
        // candidate scores by the rank-one Frobenius identity
        let mut scored: Vec<(f64, usize)> = active
            .iter()
            .map(|&r| {
                let ar = a.row(r);
                let g_ar = gram.dot(&ar);
                let quad = ar.dot(&g_ar);
                let norm2: f64 = ar.iter().map(|&v| v * v).sum();
                (fp - 2.0 * quad + norm2 * norm2, r)
            })
            .collect();
        scored.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut removed = None;
        for &(cand_fp, r) in &scored {
            let mut reduced = gram.clone();
            outer_add(&mut reduced, &a.row(r), -1.0);
            let (rank, _, _) = psd_summary(&reduced)?;
            if rank == n {
                gram = reduced;
                trajectory.push(cand_fp);
                removed = Some(r);
                break;
            }
        }
        let Some(r) = removed else {
            return Err(Error::RankDeficient(
                "every remaining removal would drop the selection below full rank".into(),
            ));
        };
        active.retain(|&x| x != r);
    }
    if trajectory.is_empty() {
        trajectory.push(gram.iter().map(|&v| v * v).sum());
    }
    Ok(SelectionResult { indices: active, trajectory, method: SelectionMethod::FramePotentialRemove }
        .validate(m))
}

/// Uniformly random `k`-subset, reproducible from `seed`.
pub fn random_select(network: &SensorNetwork, k: usize, seed: u64) -> Result<SelectionResult> {
    let m = network.m();
    if k == 0 || k > m {
        return Err(Error::Domain(format!("need 1 <= k <= m, got k = {k} (m = {m})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices = sample_k_subset(&mut rng, m, k);
    indices.sort_unstable();
    let value = crate::spectral::subset_mse(network.a(), &indices);
    Ok(SelectionResult { indices, trajectory: vec![value], method: SelectionMethod::Random }
        .validate(m))
}

/// Visit every `size`-combination of `0..m` in lexicographic order.
fn for_each_combination(m: usize, size: usize, mut f: impl FnMut(&[usize])) {
    if size > m {
        return;
    }
    let mut combo: Vec<usize> = (0..size).collect();
    loop {
        f(&combo);
        // advance to the next combination
        let mut i = size;
        let mut moved = false;
        while i > 0 {
            i -= 1;
            if combo[i] != i + m - size {
                combo[i] += 1;
                for j in i + 1..size {
                    combo[j] = combo[j - 1] + 1;
                }
                moved = true;
                break;
            }
        }
        if !moved {
            return;
        }
    }
}

/// Exhaustive oracle: the smallest-cardinality subset meeting the accuracy
/// threshold, enumerated by increasing size, ties broken by lower MSE and
/// then lexicographically. Guarded to `m <= 22`.
pub fn exhaustive_min_sensors(
    network: &SensorNetwork,
    accuracy: &AccuracySpec,
) -> Result<SelectionResult> {
    let (m, n) = (network.m(), network.n());
    if m > 22 {
        return Err(Error::TooLarge(format!(
            "exhaustive enumeration is guarded to m <= 22, got m = {m}"
        )));
    }
    let a = network.a();
    for size in n..=m {
        let mut best: Option<(f64, f64, Vec<usize>)> = None; // (mse tiebreak, value, combo)
        for_each_combination(m, size, |combo| {
            let mut gram = Matrix::zeros((n, n));
            for &i in combo {
                outer_add(&mut gram, &a.row(i), 1.0);
            }
            let Ok(eigs) = sym_eigvals(&gram) else {
                return;
            };
            let lmax = eigs[n - 1].max(0.0);
            if eigs[0] <= RANK_FLOOR * lmax || eigs[0] <= 0.0 {
                return;
            }
            let mse: f64 = eigs.iter().map(|&l| 1.0 / l).sum();
            let value = match accuracy.criterion() {
                Criterion::Mse => mse,
                Criterion::Vce => eigs.iter().map(|&l| l.ln()).sum(),
            };
            if !accuracy.satisfied(value, 0.0) {
                return;
            }
            if best.as_ref().map_or(true, |(b_mse, _, _)| mse < *b_mse) {
                best = Some((mse, value, combo.to_vec()));
            }
        });
        if let Some((_, value, indices)) = best {
            return Ok(SelectionResult {
                indices,
                trajectory: vec![value],
                method: SelectionMethod::Exhaustive,
            }
            .validate(m));
        }
    }
    Err(Error::Infeasible(format!(
        "no subset of the {m} sensors meets the threshold {:.6e}",
        accuracy.threshold()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{frame_potential, gamma0, random_tight};
    use crate::spectral::{expected_perf, subset_mse};

    fn embedded_identity_6x3() -> SensorNetwork {
        // rows e1, e2, e3 then the same three rows scaled by 2
        let mut a = Matrix::zeros((6, 3));
        for i in 0..3 {
            a[[i, i]] = 1.0;
            a[[i + 3, i]] = 2.0;
        }
        SensorNetwork::new(a).unwrap()
    }

    #[test]
    fn greedy_picks_the_scaled_rows() {
        let net = embedded_identity_6x3();
        let sel = greedy_add_mse(&net, 3).unwrap();
        let mut sorted = sel.indices.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![3, 4, 5]);
        // exhaustive oracle over all C(6,3) subsets confirms this is optimal
        let mut best: Option<(f64, Vec<usize>)> = None;
        for_each_combination(6, 3, |combo| {
            let v = subset_mse(net.a(), combo);
            if best.as_ref().map_or(true, |(b, _)| v < *b) {
                best = Some((v, combo.to_vec()));
            }
        });
        let (best_v, best_set) = best.unwrap();
        assert_eq!(best_set, vec![3, 4, 5]);
        assert!((sel.trajectory.last().unwrap() - best_v).abs() < 1e-12);
    }

    #[test]
    fn greedy_full_selection_reaches_gamma0() {
        let a = random_tight::<f64>(10, 3, 10.0, 2).unwrap();
        let net = SensorNetwork::new(a).unwrap();
        let sel = greedy_add_mse(&net, 10).unwrap();
        assert_eq!(sel.indices.len(), 10);
        let g0 = gamma0(&net, Criterion::Mse).unwrap();
        assert!((sel.trajectory.last().unwrap() - g0).abs() / g0 < 1e-9);
    }

    #[test]
    fn greedy_close_to_exhaustive_optimum() {
        let a = crate::netmodel::gen_gaussian::<f64>(10, 3, Some(1.0), 77).unwrap();
        let net = SensorNetwork::new(a).unwrap();
        let sel = greedy_add_mse(&net, 4).unwrap();
        let greedy_mse = *sel.trajectory.last().unwrap();
        let mut best = f64::INFINITY;
        for_each_combination(10, 4, |combo| {
            best = best.min(subset_mse(net.a(), combo));
        });
        let ratio = greedy_mse / best;
        println!("greedy/optimal MSE ratio at k=4: {ratio:.4}");
        assert!(ratio >= 1.0 - 1e-12);
        assert!(ratio < 2.0, "greedy unexpectedly far from optimal: {ratio}");
    }

    #[test]
    fn greedy_trajectory_strictly_decreasing_after_rank() {
        let a = crate::netmodel::gen_gaussian::<f64>(12, 4, Some(1.0), 5).unwrap();
        let net = SensorNetwork::new(a).unwrap();
        let sel = greedy_add_mse(&net, 12).unwrap();
        let finite: Vec<f64> = sel.trajectory.iter().copied().filter(|v| v.is_finite()).collect();
        for w in finite.windows(2) {
            assert!(w[1] < w[0], "trajectory not strictly decreasing: {finite:?}");
        }
    }

    #[test]
    fn greedy_rejects_bad_k() {
        let net = embedded_identity_6x3();
        assert!(matches!(greedy_add_mse(&net, 2), Err(Error::Domain(_))));
        assert!(matches!(greedy_add_mse(&net, 7), Err(Error::Domain(_))));
    }

    #[test]
    fn fp_remove_keeps_everything_at_k_eq_m() {
        let net = embedded_identity_6x3();
        let sel = fp_remove(&net, 6).unwrap();
        assert_eq!(sel.indices, (0..6).collect::<Vec<_>>());
        assert!((sel.trajectory[0] - frame_potential(net.a())).abs() < 1e-9);
    }

    #[test]
    fn fp_remove_drops_a_duplicate_first() {
        // a duplicated row pair contributes the largest coherence term
        let mut a = random_tight::<f64>(8, 3, 8.0, 4).unwrap();
        let dup = a.row(2).to_owned();
        a.row_mut(6).assign(&dup);
        let net = SensorNetwork::new(a).unwrap();
        let sel = fp_remove(&net, 7).unwrap();
        let removed: Vec<usize> = (0..8).filter(|i| !sel.indices.contains(i)).collect();
        assert_eq!(removed.len(), 1);
        assert!(removed[0] == 2 || removed[0] == 6, "removed {removed:?}");
    }

    #[test]
    fn fp_remove_matches_per_step_enumeration_oracle() {
        let a = crate::netmodel::gen_gaussian::<f64>(10, 3, Some(1.0), 31).unwrap();
        let net = SensorNetwork::new(a.clone()).unwrap();
        let sel = fp_remove(&net, 5).unwrap();
        // replay the chain: at each step, brute-force the minimum FP over
        // every rank-keeping single removal and check the chain matches
        let mut active: Vec<usize> = (0..10).collect();
        for (step, &chain_fp) in sel.trajectory.iter().enumerate() {
            let mut best = f64::INFINITY;
            let mut best_r = None;
            for &r in &active {
                let rest: Vec<usize> = active.iter().copied().filter(|&x| x != r).collect();
                let mut sub = Matrix::zeros((rest.len(), 3));
                for (row, &i) in rest.iter().enumerate() {
                    sub.row_mut(row).assign(&a.row(i));
                }
                let gram = sub.t().dot(&sub);
                let eigs = sym_eigvals(&gram).unwrap();
                if eigs[0] <= RANK_FLOOR * eigs[2].max(0.0) || eigs[0] <= 0.0 {
                    continue;
                }
                let fp: f64 = gram.iter().map(|&v| v * v).sum();
                if fp < best {
                    best = fp;
                    best_r = Some(r);
                }
            }
            assert!(
                (chain_fp - best).abs() <= 1e-9 * best.abs(),
                "step {step}: chain {chain_fp} vs oracle {best}"
            );
            active.retain(|&x| x != best_r.expect("feasible removal"));
        }
        assert_eq!(active.len(), 5);
    }

    #[test]
    fn fp_trajectory_ratio_to_tight_bound_nondecreasing() {
        // relative to the unconstrained minimum n * (k alpha / m)^2 for the
        // k rows remaining, the trajectory never improves
        let alpha = 12.0;
        let a = random_tight::<f64>(12, 3, alpha, 6).unwrap();
        let net = SensorNetwork::new(a).unwrap();
        let sel = fp_remove(&net, 4).unwrap();
        let mut prev = 1.0; // the full tight frame sits exactly at the bound
        for (step, &fp) in sel.trajectory.iter().enumerate() {
            let k = 12 - step - 1;
            let bound = 3.0 * (k as f64 * alpha / 12.0).powi(2);
            let ratio = fp / bound;
            assert!(ratio >= prev - 1e-9, "step {step}: ratio {ratio} < {prev}");
            prev = ratio;
        }
    }

    #[test]
    fn random_select_deterministic_and_full() {
        let net = embedded_identity_6x3();
        let s1 = random_select(&net, 4, 9).unwrap();
        let s2 = random_select(&net, 4, 9).unwrap();
        assert_eq!(s1, s2);
        let full = random_select(&net, 6, 1).unwrap();
        assert_eq!(full.indices, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn random_select_mean_below_analytic_expectation() {
        let alpha = 30.0;
        let a = random_tight::<f64>(30, 5, alpha, 13).unwrap();
        let net = SensorNetwork::new(a).unwrap();
        let k = 12;
        let trials = 400;
        let mut sum = 0.0;
        for seed in 0..trials {
            sum += random_select(&net, k, seed).unwrap().trajectory[0];
        }
        let mean = sum / trials as f64;
        let analytic = expected_perf(30, 5, alpha, k).unwrap().exp_mse;
        // the closed form over-estimates, so the empirical mean stays below
        // it up to sampling noise
        assert!(mean <= analytic * 1.05, "mean {mean} vs analytic {analytic}");
    }

    #[test]
    fn exhaustive_identity_needs_every_row() {
        let net = SensorNetwork::new(Matrix::eye(3)).unwrap();
        let acc = AccuracySpec::new(&net, Criterion::Mse, 1.0 + 1e-9).unwrap();
        let sel = exhaustive_min_sensors(&net, &acc).unwrap();
        assert_eq!(sel.indices, vec![0, 1, 2]);
    }

    #[test]
    fn exhaustive_stacked_identity_needs_three() {
        let mut a = Matrix::zeros((6, 3));
        for i in 0..3 {
            a[[i, i]] = 1.0;
            a[[i + 3, i]] = 1.0;
        }
        let net = SensorNetwork::new(a).unwrap();
        let acc = AccuracySpec::new(&net, Criterion::Mse, 2.0).unwrap();
        // gamma0 = 1.5, threshold 3.0: any coordinate-covering triple works
        let sel = exhaustive_min_sensors(&net, &acc).unwrap();
        assert_eq!(sel.indices.len(), 3);
        let covered: std::collections::BTreeSet<usize> =
            sel.indices.iter().map(|&i| i % 3).collect();
        assert_eq!(covered.len(), 3);
    }

    #[test]
    fn exhaustive_guard_and_infeasible() {
        let a = crate::netmodel::gen_gaussian::<f64>(23, 2, Some(1.0), 1).unwrap();
        let net = SensorNetwork::new(a).unwrap();
        let acc = AccuracySpec::from_parts(Criterion::Mse, 2.0, 1.0).unwrap();
        assert!(matches!(exhaustive_min_sensors(&net, &acc), Err(Error::TooLarge(_))));

        let net = SensorNetwork::new(Matrix::eye(3)).unwrap();
        // reference value far below what the network can reach
        let acc = AccuracySpec::from_parts(Criterion::Mse, 1.5, 0.01).unwrap();
        assert!(matches!(exhaustive_min_sensors(&net, &acc), Err(Error::Infeasible(_))));
    }

    #[test]
    fn exhaustive_never_larger_than_greedy_at_same_threshold() {
        for seed in 0..5u64 {
            let a = random_tight::<f64>(8, 3, 8.0, 100 + seed).unwrap();
            let net = SensorNetwork::new(a).unwrap();
            let acc = AccuracySpec::new(&net, Criterion::Mse, 2.0).unwrap();
            let oracle = exhaustive_min_sensors(&net, &acc).unwrap();
            // smallest greedy prefix meeting the same threshold
            let mut greedy_size = None;
            for k in 3..=8 {
                let sel = greedy_add_mse(&net, k).unwrap();
                if acc.satisfied(*sel.trajectory.last().unwrap(), 0.0) {
                    greedy_size = Some(k);
                    break;
                }
            }
            let greedy_size = greedy_size.expect("full network always feasible");
            assert!(oracle.indices.len() <= greedy_size, "seed {seed}");
        }
    }

    #[test]
    fn exhaustive_vce_mode() {
        let net = SensorNetwork::new(Matrix::eye(3) * 2.0).unwrap();
        // gamma0 = 3 log 4; rho = 0.5 admits subsets with log det >= half of it
        let acc = AccuracySpec::new(&net, Criterion::Vce, 0.5).unwrap();
        let sel = exhaustive_min_sensors(&net, &acc).unwrap();
        // any 3 rows are needed for a finite log det here
        assert_eq!(sel.indices.len(), 3);
        assert_eq!(sel.method, SelectionMethod::Exhaustive);
    }

    #[test]
    fn combinations_visit_the_right_count() {
        let mut count = 0;
        for_each_combination(6, 3, |_| count += 1);
        assert_eq!(count, 20);
        let mut count = 0;
        for_each_combination(5, 5, |_| count += 1);
        assert_eq!(count, 1);
    }

    #[test]
    fn greedy_beats_analytic_random_expectation() {
        let alpha = 20.0;
        let a = random_tight::<f64>(20, 4, alpha, 8).unwrap();
        let net = SensorNetwork::new(a).unwrap();
        for k in [6usize, 10, 16] {
            let sel = greedy_add_mse(&net, k).unwrap();
            let analytic = expected_perf(20, 4, alpha, k).unwrap().exp_mse;
            assert!(sel.trajectory.last().unwrap() <= &analytic);
        }
    }
}
