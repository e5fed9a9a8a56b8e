//! Network file format and CSV emission helpers.
//!
//! A network file is JSON with the measurement matrix `A` (row-major, one
//! array per sensor), optional cost vectors `s` and `e0`, an optional
//! routing `topology` (`parent[i] = -1` means a direct master link) and an
//! optional communication matrix `C`, either dense or as `[i, j, value]`
//! triplets. JSON floats are written shortest-round-trip, so re-reading an
//! emitted file reproduces matrices bit for bit.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{SensorNetwork, Topology};
use crate::{Error, Matrix, Result};

#[derive(Serialize, Deserialize)]
struct TopologyFile {
    parent: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hop_cost: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CommFile {
    Dense(Vec<Vec<f64>>),
    Triplets(Vec<(usize, usize, f64)>),
}

impl CommFile {
    /// Triplet rows are also valid dense rows, so the reading is decided by
    /// shape: a list of m rows of m numbers is dense, anything else is
    /// interpreted as `[i, j, value]` triplets.
    fn into_matrix(self, m: usize) -> Result<Array2<f64>> {
        let mut c = Array2::zeros((m, m));
        match self {
            CommFile::Dense(rows) if rows.len() == m && rows.iter().all(|r| r.len() == m) => {
                for (i, row) in rows.iter().enumerate() {
                    for (j, &v) in row.iter().enumerate() {
                        c[[i, j]] = v;
                    }
                }
            }
            CommFile::Dense(rows) => {
                for row in rows {
                    let [i, j, v] = row[..] else {
                        return Err(Error::Validation(format!(
                            "C must be a dense {m} x {m} matrix or a list of [i, j, value] triplets"
                        )));
                    };
                    let (i, j) = (i as usize, j as usize);
                    if i.max(j) >= m || i as f64 != row[0] || j as f64 != row[1] {
                        return Err(Error::Validation(format!(
                            "C triplet ({}, {}) invalid for m = {m}",
                            row[0], row[1]
                        )));
                    }
                    c[[i, j]] = v;
                }
            }
            CommFile::Triplets(ts) => {
                for (i, j, v) in ts {
                    if i >= m || j >= m {
                        return Err(Error::Validation(format!(
                            "C triplet ({i}, {j}) out of range for m = {m}"
                        )));
                    }
                    c[[i, j]] = v;
                }
            }
        }
        Ok(c)
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    e0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    topology: Option<TopologyFile>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    c: Option<CommFile>,
}

/// Parse a network from its JSON representation.
pub fn network_from_json(json: &str) -> Result<SensorNetwork> {
    let file: NetworkFile = serde_json::from_str(json)?;
    let m = file.a.len();
    if m == 0 {
        return Err(Error::Validation("network file has an empty matrix".into()));
    }
    let n = file.a[0].len();
    if file.a.iter().any(|row| row.len() != n) {
        return Err(Error::Validation("matrix rows have inconsistent lengths".into()));
    }
    let mut a = Array2::zeros((m, n));
    for (i, row) in file.a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            a[[i, j]] = v;
        }
    }
    let mut net = SensorNetwork::new(a)?;

    let s = file.s.map(Array1::from_vec).unwrap_or_else(|| Array1::zeros(m));
    let e0 = file.e0.map(Array1::from_vec).unwrap_or_else(|| Array1::zeros(m));
    net = net.with_costs(s, e0)?;

    if let Some(tf) = file.topology {
        let parent = tf
            .parent
            .iter()
            .map(|&p| {
                if p < 0 {
                    Ok(None)
                } else if (p as usize) < m {
                    Ok(Some(p as usize))
                } else {
                    Err(Error::Validation(format!("topology parent {p} out of range")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let hop = tf.hop_cost.unwrap_or_else(|| vec![1.0; m]);
        net = net.with_topology(Topology::new(parent, hop)?)?;
    }

    if let Some(cf) = file.c {
        net = net.with_comm(cf.into_matrix(m)?)?;
    }
    Ok(net)
}

/// Serialize a network to its JSON representation.
///
/// All-zero cost fields are omitted; the topology is written when present.
pub fn network_to_json(net: &SensorNetwork) -> Result<String> {
    let some_nonzero = |v: &Array1<f64>| v.iter().any(|&x| x != 0.0);
    let file = NetworkFile {
        a: net.a().rows().into_iter().map(|r| r.to_vec()).collect(),
        s: some_nonzero(net.s()).then(|| net.s().to_vec()),
        e0: some_nonzero(net.e0()).then(|| net.e0().to_vec()),
        topology: net.topology().map(|t| TopologyFile {
            parent: t.parent.iter().map(|p| p.map_or(-1, |v| v as i64)).collect(),
            hop_cost: Some(t.hop_cost.clone()),
        }),
        c: net.comm().iter().any(|&v| v != 0.0).then(|| {
            CommFile::Dense(net.comm().rows().into_iter().map(|r| r.to_vec()).collect())
        }),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn read_network(path: &Path) -> Result<SensorNetwork> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    network_from_json(&text)
}

pub fn write_network(path: &Path, net: &SensorNetwork) -> Result<()> {
    let json = network_to_json(net)?;
    fs::write(path, json).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Format a float for CSV output with 17 significant digits, enough for a
/// lossless f64 round trip. Non-finite values use the sentinel strings
/// `inf`, `-inf` and `nan`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

/// Render a matrix as CSV with the given header row.
pub fn matrix_csv(headers: &[&str], m: &Matrix) -> String {
    let mut out = String::new();
    out.push_str(&headers.join(","));
    out.push('\n');
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
