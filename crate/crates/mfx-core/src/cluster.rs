//! Correlation-to-distance conversion and agglomerative dendrograms.
//!
//! A coefficient matrix maps elementwise through d = √(2(1 − ρ)) — perfect
//! correlation at distance 0, independence at √2, anti-correlation at 2 —
//! and the resulting metric feeds a Lance–Williams agglomeration with
//! single, complete, or average linkage (average is the conventional choice
//! for financial correlation trees and the default upstream). Merges use
//! scipy-style cluster ids (leaves 0..n−1, then n, n+1, …) and deterministic
//! tie-breaking so outputs are bit-reproducible.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rho::RhoMatrix;

/// Symmetric non-negative distance matrix with zero diagonal.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceMatrix {
    pub labels: Vec<String>,
    /// `rows[i][j]` = distance between labels i and j; entries in [0, 2].
    pub rows: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }
}

/// Convert a coefficient matrix to the dendrogram metric d = √(2(1 − ρ)).
///
/// Entries may overshoot [−1, 1] by at most 1e-9 (floating-point slack from
/// the coefficient computation); they are clamped before the square root.
/// Anything further out is a data error.
pub fn to_distance(matrix: &RhoMatrix) -> Result<DistanceMatrix> {
    let n = matrix.len();
    let mut rows = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let rho = matrix.at(i, j);
            if !rho.is_finite() || rho.abs() > 1.0 + 1e-9 {
                return Err(Error::domain(format!(
                    "coefficient out of [-1, 1] at ({}, {}): {rho}",
                    matrix.labels[i], matrix.labels[j]
                )));
            }
            let clamped = rho.clamp(-1.0, 1.0);
            rows[i][j] = (2.0 * (1.0 - clamped)).sqrt();
        }
    }
    Ok(DistanceMatrix {
        labels: matrix.labels.clone(),
        rows,
    })
}

/// Inter-cluster distance update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Linkage {
    Single,
    Complete,
    Average,
}

impl Default for Linkage {
    fn default() -> Self {
        Linkage::Average
    }
}

impl std::str::FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            other => Err(Error::parameter(format!(
                "unknown linkage {other:?} (expected single, complete, or average)"
            ))),
        }
    }
}

/// One agglomeration step: clusters `a` and `b` (a < b) merge at `height`
/// into the new cluster `id`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub id: usize,
}

/// Merge tree over a label set: exactly n−1 merges with non-decreasing
/// heights. Leaves carry ids 0..n−1; merge k creates id n+k.
#[derive(Debug, Clone, Serialize)]
pub struct Dendrogram {
    pub leaves: Vec<String>,
    pub linkage: Linkage,
    pub merges: Vec<Merge>,
}

/// Agglomerate a distance matrix bottom-up under the given linkage.
///
/// Ties on the minimum distance break toward the lowest (a, b) cluster-id
/// pair, making the tree deterministic for any input.
pub fn agglomerate(d: &DistanceMatrix, linkage: Linkage) -> Result<Dendrogram> {
    let n = d.len();
    if n < 2 {
        return Err(Error::parameter(
            "agglomeration needs at least two labels",
        ));
    }
    let total = 2 * n - 1;
    // dist[i][j] between active cluster ids; sizes per id; active flags.
    let mut dist = vec![vec![0.0f64; total]; total];
    for i in 0..n {
        for j in 0..n {
            dist[i][j] = d.at(i, j);
        }
    }
    let mut size = vec![0usize; total];
    let mut active = vec![false; total];
    for i in 0..n {
        size[i] = 1;
        active[i] = true;
    }
    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..n + step {
            if !active[a] {
                continue;
            }
            for b in a + 1..n + step {
                if !active[b] {
                    continue;
                }
                let dab = dist[a][b];
                let candidate = (dab, a, b);
                let better = match best {
                    None => true,
                    Some(cur) => {
                        candidate.0 < cur.0
                            || (candidate.0 == cur.0 && (candidate.1, candidate.2) < (cur.1, cur.2))
                    }
                };
                if better {
                    best = Some(candidate);
                }
            }
        }
        let (height, a, b) = best.expect("two active clusters always remain");
        let id = n + step;
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for k in 0..id {
            if !active[k] || k == a || k == b {
                continue;
            }
            let (dak, dbk) = (dist[a][k], dist[b][k]);
            let dnew = match linkage {
                Linkage::Single => dak.min(dbk),
                Linkage::Complete => dak.max(dbk),
                Linkage::Average => (na * dak + nb * dbk) / (na + nb),
            };
            dist[id][k] = dnew;
            dist[k][id] = dnew;
        }
        active[a] = false;
        active[b] = false;
        active[id] = true;
        size[id] = size[a] + size[b];
        debug_assert!(merges.last().map_or(true, |m: &Merge| m.height <= height));
        merges.push(Merge { a, b, height, id });
    }
    Ok(Dendrogram {
        leaves: d.labels.clone(),
        linkage,
        merges,
    })
}

impl Dendrogram {
    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Leaf indices under a cluster id, ascending.
    fn members(&self, id: usize) -> Vec<usize> {
        let n = self.leaf_count();
        if id < n {
            return vec![id];
        }
        let merge = self.merges[id - n];
        let mut out = self.members(merge.a);
        out.extend(self.members(merge.b));
        out.sort_unstable();
        out
    }

    /// JSON merge-list export.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Newick serialization with branch lengths equal to the height gap
    /// between a cluster and its parent merge (leaves sit at height 0).
    pub fn to_newick(&self) -> String {
        let n = self.leaf_count();
        let height_of = |id: usize| {
            if id < n {
                0.0
            } else {
                self.merges[id - n].height
            }
        };
        fn write(d: &Dendrogram, id: usize, parent_height: f64, out: &mut String, height_of: &dyn Fn(usize) -> f64) {
            let n = d.leaf_count();
            if id < n {
                out.push_str(&d.leaves[id]);
            } else {
                let merge = d.merges[id - n];
                out.push('(');
                write(d, merge.a, merge.height, out, height_of);
                out.push(',');
                write(d, merge.b, merge.height, out, height_of);
                out.push(')');
            }
            out.push(':');
            out.push_str(&format!("{}", parent_height - height_of(id)));
        }
        let root = 2 * n - 2;
        let mut out = String::new();
        if n == 1 {
            out.push_str(&self.leaves[0]);
        } else {
            let root_height = height_of(root);
            let merge = self.merges[root - n];
            out.push('(');
            write(self, merge.a, root_height, &mut out, &height_of);
            out.push(',');
            write(self, merge.b, root_height, &mut out, &height_of);
            out.push(')');
        }
        out.push(';');
        out
    }
}

/// Partition the leaves into k clusters by undoing the last k−1 merges.
///
/// Clusters are returned with members in leaf order, ordered by their
/// smallest member.
pub fn cut(dendrogram: &Dendrogram, k: usize) -> Result<Vec<Vec<String>>> {
    let n = dendrogram.leaf_count();
    if k == 0 || k > n {
        return Err(Error::parameter(format!(
            "cluster count {k} outside 1..={n}"
        )));
    }
    // Roots after undoing the last k-1 merges: the ids consumed by the
    // remaining merges are interior; everything else referenced is a root.
    let kept = n - k; // merges that survive
    let mut consumed = vec![false; 2 * n - 1];
    for merge in &dendrogram.merges[..kept] {
        consumed[merge.a] = true;
        consumed[merge.b] = true;
    }
    let mut clusters: Vec<Vec<usize>> = Vec::with_capacity(k);
    for id in 0..n + kept {
        if !consumed[id] {
            clusters.push(dendrogram.members(id));
        }
    }
    clusters.sort_by_key(|c| c[0]);
    debug_assert_eq!(clusters.len(), k);
    Ok(clusters
        .into_iter()
        .map(|c| c.into_iter().map(|i| dendrogram.leaves[i].clone()).collect())
        .collect())
}

/// Cluster count suggested by the largest gap between successive merge
/// heights; ties prefer the higher gap (fewer clusters). Returns n for
/// dendrograms with fewer than three leaves.
pub fn gap_cut(dendrogram: &Dendrogram) -> usize {
    let n = dendrogram.leaf_count();
    if n < 3 {
        return n.min(2);
    }
    let heights: Vec<f64> = dendrogram.merges.iter().map(|m| m.height).collect();
    let mut best_gap = f64::NEG_INFINITY;
    let mut best_i = 0usize; // gap between merge i and i+1 (0-based)
    for i in 0..heights.len() - 1 {
        let gap = heights[i + 1] - heights[i];
        if gap >= best_gap {
            best_gap = gap;
            best_i = i;
        }
    }
    // Cutting between merge best_i and best_i+1 leaves n - (best_i + 1) clusters.
    n - (best_i + 1)
}
