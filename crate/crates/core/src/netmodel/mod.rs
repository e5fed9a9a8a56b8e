//! Network model: measurement matrix, costs, schedules and accuracy criteria.
//!
//! The central type is [`SensorNetwork`]: an `m x n` measurement matrix `A`
//! whose rows are the per-sensor measurement vectors, together with
//! per-activation sensing costs `s`, reference energy budgets `e0` and an
//! `m x m` communication cost matrix `C` (entry `C[i][j]` is the cost paid by
//! sensor `i` to relay sensor `j`'s data toward the master node).
//!
//! All types are immutable after construction and all operations are pure,
//! so everything here can be shared freely across worker threads.

use ndarray::{Array1, Array2, ArrayView1};

use crate::{Error, Matrix, Real, Result, Vector};

mod frames;
mod io;
mod metrics;

pub use frames::{
    default_costs, gen_gaussian, make_tight, random_tight, random_tree_topology, star_topology,
};
pub use io::{format_float, matrix_csv, network_from_json, network_to_json, read_network,
    write_network};
pub use metrics::{frame_potential, gamma0, mse, restrict, vce, wce, RANK_FLOOR};
pub(crate) use metrics::sym_eigvals;
#[allow(unused_imports)]
pub(crate) use metrics::scaled_gram;

/// Routing tree of the network: `parent[i]` is the next hop of sensor `i`
/// toward the master node (`None` = direct link), `hop_cost[i]` scales the
/// relay cost incurred at sensor `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub parent: Vec<Option<usize>>,
    pub hop_cost: Vec<f64>,
}

impl Topology {
    pub fn new(parent: Vec<Option<usize>>, hop_cost: Vec<f64>) -> Result<Self> {
        let m = parent.len();
        if hop_cost.len() != m {
            return Err(Error::Validation(format!(
                "topology hop_cost length {} != sensor count {m}",
                hop_cost.len()
            )));
        }
        if hop_cost.iter().any(|&h| !(h >= 0.0)) {
            return Err(Error::Validation("topology hop_cost must be >= 0".into()));
        }
        let t = Topology { parent, hop_cost };
        for i in 0..m {
            t.route(i)?;
        }
        Ok(t)
    }

    /// Path from sensor `i` to the master, starting at `i` itself.
    pub fn route(&self, i: usize) -> Result<Vec<usize>> {
        let m = self.parent.len();
        let mut path = Vec::new();
        let mut at = Some(i);
        while let Some(node) = at {
            if node >= m {
                return Err(Error::Validation(format!(
                    "topology parent index {node} out of range (m = {m})"
                )));
            }
            if path.len() > m {
                return Err(Error::Validation(format!(
                    "topology contains a cycle through sensor {i}"
                )));
            }
            path.push(node);
            at = self.parent[node];
        }
        Ok(path)
    }
}

/// An `m x n` sensor network: measurement rows plus cost model.
#[derive(Debug, Clone)]
pub struct SensorNetwork<R: Real = f64> {
    a: Array2<R>,
    s: Array1<R>,
    e0: Array1<R>,
    comm: Array2<R>,
    topology: Option<Topology>,
}

impl<R: Real> SensorNetwork<R> {
    /// Wrap a measurement matrix with all costs zero.
    ///
    /// Requires `m >= n >= 1`. Full column rank is assumed, not enforced;
    /// rank-sensitive operations return [`Error::RankDeficient`] themselves.
    pub fn new(a: Array2<R>) -> Result<Self> {
        let (m, n) = a.dim();
        if n == 0 || m < n {
            return Err(Error::Validation(format!(
                "measurement matrix must be m x n with m >= n >= 1, got {m} x {n}"
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("measurement matrix has non-finite entries".into()));
        }
        Ok(SensorNetwork {
            a,
            s: Array1::zeros(m),
            e0: Array1::zeros(m),
            comm: Array2::zeros((m, m)),
            topology: None,
        })
    }

    pub fn with_costs(mut self, s: Array1<R>, e0: Array1<R>) -> Result<Self> {
        let m = self.m();
        if s.len() != m || e0.len() != m {
            return Err(Error::Validation(format!(
                "cost vectors must have length {m}, got s: {}, e0: {}",
                s.len(),
                e0.len()
            )));
        }
        if s.iter().chain(e0.iter()).any(|&v| !(v >= R::zero())) {
            return Err(Error::Validation("sensing costs and energy budgets must be >= 0".into()));
        }
        self.s = s;
        self.e0 = e0;
        Ok(self)
    }

    pub fn with_comm(mut self, comm: Array2<R>) -> Result<Self> {
        let m = self.m();
        if comm.dim() != (m, m) {
            return Err(Error::Validation(format!(
                "communication matrix must be {m} x {m}, got {:?}",
                comm.dim()
            )));
        }
        if comm.iter().any(|&v| !(v >= R::zero())) {
            return Err(Error::Validation("communication costs must be >= 0".into()));
        }
        self.comm = comm;
        Ok(self)
    }

    pub fn with_topology(mut self, topology: Topology) -> Result<Self> {
        if topology.parent.len() != self.m() {
            return Err(Error::Validation(format!(
                "topology describes {} sensors, network has {}",
                topology.parent.len(),
                self.m()
            )));
        }
        self.topology = Some(topology);
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn a(&self) -> &Array2<R> {
        &self.a
    }

    /// Measurement vector of sensor `i` (row `i` of `A`).
    pub fn row(&self, i: usize) -> ArrayView1<'_, R> {
        self.a.row(i)
    }

    pub fn s(&self) -> &Array1<R> {
        &self.s
    }

    pub fn e0(&self) -> &Array1<R> {
        &self.e0
    }

    pub fn comm(&self) -> &Array2<R> {
        &self.comm
    }

    pub fn topology(&self) -> Option<&Topology> {
        self.topology.as_ref()
    }

    /// Sensors with a direct master link whose `C` row has nonzeros besides
    /// `C[i][i]`. The invariant is validated, not enforced: callers decide
    /// whether to warn or reject.
    pub fn direct_link_violations(&self) -> Vec<usize> {
        let Some(top) = &self.topology else {
            return Vec::new();
        };
        let mut bad = Vec::new();
        for i in 0..self.m() {
            if top.parent[i].is_none() {
                let off_diag = self
                    .comm
                    .row(i)
                    .iter()
                    .enumerate()
                    .any(|(j, &v)| j != i && !v.is_zero());
                if off_diag {
                    bad.push(i);
                }
            }
        }
        bad
    }
}

/// Which accuracy criterion a threshold refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Criterion {
    /// A-optimality: trace of the inverse Gram matrix (lower is better).
    Mse,
    /// D-optimality: log-determinant of the Gram matrix (higher is better).
    Vce,
}

/// Accuracy requirement relative to the full network: the reference value
/// `gamma0` of the chosen criterion, and the slack factor `rho`.
///
/// For MSE the constraint is `mse(A_t) <= rho * gamma0` with `rho > 1`;
/// for VCE it is `vce(A_t) >= rho * gamma0` with `0 < rho <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AccuracySpec {
    criterion: Criterion,
    rho: f64,
    gamma0: f64,
}

impl AccuracySpec {
    /// Build the spec for a network, computing `gamma0` on the full matrix.
    pub fn new(network: &SensorNetwork, criterion: Criterion, rho: f64) -> Result<Self> {
        let gamma0 = gamma0(network, criterion)?;
        Self::from_parts(criterion, rho, gamma0)
    }

    /// Build from an externally supplied reference value.
    pub fn from_parts(criterion: Criterion, rho: f64, gamma0: f64) -> Result<Self> {
        if !gamma0.is_finite() {
            return Err(Error::Domain("gamma0 must be finite".into()));
        }
        match criterion {
            Criterion::Mse => {
                if !(rho > 1.0) {
                    return Err(Error::Domain(format!("MSE criterion requires rho > 1, got {rho}")));
                }
                if !(gamma0 > 0.0) {
                    return Err(Error::Domain(format!("MSE gamma0 must be > 0, got {gamma0}")));
                }
            }
            Criterion::Vce => {
                if !(rho > 0.0 && rho <= 1.0) {
                    return Err(Error::Domain(format!(
                        "VCE criterion requires 0 < rho <= 1, got {rho}"
                    )));
                }
                // The threshold convention rho * gamma0 presumes a positive
                // reference; a nonpositive log-det reference is rejected
                // rather than silently reinterpreted.
                if !(gamma0 > 0.0) {
                    return Err(Error::Domain(format!(
                        "VCE gamma0 must be > 0 for a relative threshold, got {gamma0}"
                    )));
                }
            }
        }
        Ok(AccuracySpec { criterion, rho, gamma0 })
    }

    pub fn criterion(&self) -> Criterion {
        self.criterion
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    /// The constraint threshold `rho * gamma0`.
    pub fn threshold(&self) -> f64 {
        self.rho * self.gamma0
    }

    /// Does `value` of the criterion meet the threshold, with relative slack
    /// `rel` (pass `0.0` for the exact test)?
    pub fn satisfied(&self, value: f64, rel: f64) -> bool {
        let thr = self.threshold();
        let slack = rel * thr.abs();
        match self.criterion {
            Criterion::Mse => value <= thr + slack,
            Criterion::Vce => value >= thr - slack,
        }
    }
}

/// Penalty applied to the energy excess vector `e` in explicit mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum EnergyPenalty {
    /// `g(e) = ||e||_2`
    L2,
    /// `g(e) = ||e||_2^2`
    L2Squared,
    /// `g(e) = ||e||_inf`
    Linf,
}

/// How energy use is balanced across the schedule.
#[derive(Debug, Clone, PartialEq)]
pub enum EnergyModel {
    /// Penalise repeated use of the same sensor: `lambda * max(W * sum_t z_t)`
    /// with `W = diag(w)` holding relative per-sensor costs.
    Implicit { w: Vector, lambda: f64 },
    /// Per-sensor budgets: `diag(s) Z 1 <= e0 + e` (left side
    /// `(diag(s) + C) Z 1` when `include_comms`), excess `e >= 0` penalised
    /// by `lambda * g(e)`.
    Explicit { penalty: EnergyPenalty, lambda: f64, include_comms: bool },
}

impl EnergyModel {
    /// Implicit model with uniform unit relative costs.
    pub fn implicit_uniform(m: usize, lambda: f64) -> Self {
        EnergyModel::Implicit { w: Array1::ones(m), lambda }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            EnergyModel::Implicit { lambda, .. } | EnergyModel::Explicit { lambda, .. } => *lambda,
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        match self {
            EnergyModel::Implicit { w, lambda } => {
                if w.len() != m {
                    return Err(Error::Validation(format!(
                        "implicit energy weights must have length {m}, got {}",
                        w.len()
                    )));
                }
                if w.iter().any(|&v| !(v >= 0.0)) {
                    return Err(Error::Validation("implicit energy weights must be >= 0".into()));
                }
                if !(*lambda >= 0.0) {
                    return Err(Error::Validation(format!("lambda must be >= 0, got {lambda}")));
                }
            }
            EnergyModel::Explicit { lambda, .. } => {
                if !(*lambda >= 0.0) {
                    return Err(Error::Validation(format!("lambda must be >= 0, got {lambda}")));
                }
            }
        }
        Ok(())
    }
}

/// An `m x T` activation table. Entries live in `[0, 1]` while relaxed;
/// `binary` is set exactly when every entry is 0.0 or 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleTable {
    z: Matrix,
    binary: bool,
}

impl ScheduleTable {
    pub fn new(z: Matrix) -> Result<Self> {
        if z.iter().any(|&v| !(-1e-12..=1.0 + 1e-12).contains(&v)) {
            return Err(Error::Validation("schedule entries must lie in [0, 1]".into()));
        }
        let binary = z.iter().all(|&v| v == 0.0 || v == 1.0);
        Ok(ScheduleTable { z, binary })
    }

    pub fn z(&self) -> &Matrix {
        &self.z
    }

    pub fn m(&self) -> usize {
        self.z.nrows()
    }

    pub fn instants(&self) -> usize {
        self.z.ncols()
    }

    /// Activation vector of time instance `t`.
    pub fn column(&self, t: usize) -> ArrayView1<'_, f64> {
        self.z.column(t)
    }

    pub fn is_binary(&self) -> bool {
        self.binary
    }
}
