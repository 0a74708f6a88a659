//! Exact linear maximization oracles over [`FeasibleSet`]s.
//!
//! Tie-breaking is deterministic and depends only on the ordering of `c`'s
//! entries, so scaling `c` by a positive constant returns the same maximizer:
//!
//! - explicit vertices and brute force: exact maximum value, lexicographically
//!   smallest maximizer;
//! - hypercube: `x_i = 1` iff `c_i > 0`;
//! - knapsack: an item is packed only if doing so strictly improves the DP
//!   value, so ties resolve toward zero;
//! - DAG paths: longest-path relaxation in topological order with strict
//!   improvement, so the first predecessor found wins.

use crate::error::{Error, Result};
use crate::feasible::{DagPaths, EnumerationCap, FeasibleSet, Knapsack};
use crate::tau;
use crate::vector::Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub maximizer: Vector,
    /// `<c, maximizer>`.
    pub optimal_value: f64,
    /// Maximizers within tolerance of the optimum, when cheaply known; 1 otherwise.
    pub tie_count: u64,
}

pub fn argmax(set: &FeasibleSet, c: &Vector) -> Result<OracleResult> {
    c.check_dim(set.dim())?;
    match set {
        FeasibleSet::ExplicitVertices(list) => Ok(scan(list.vertices(), c)),
        FeasibleSet::Hypercube { n } => {
            let maximizer = Vector::new(c.iter().map(|&ci| if ci > 0.0 { 1.0 } else { 0.0 }).collect())?;
            let zeros = c.iter().filter(|&&ci| ci == 0.0).count();
            let tie_count = if zeros >= 64 { u64::MAX } else { 1u64 << zeros };
            debug_assert_eq!(maximizer.dim(), *n);
            let optimal_value = c.dot(&maximizer)?;
            Ok(OracleResult { maximizer, optimal_value, tie_count })
        }
        FeasibleSet::Knapsack(k) => knapsack_dp(k, c),
        FeasibleSet::DagPaths(d) => longest_path(d, c),
    }
}

/// Exhaustive maximization over `members(set)`, the independent reference for [`argmax`].
pub fn argmax_bruteforce(set: &FeasibleSet, c: &Vector, cap: EnumerationCap) -> Result<OracleResult> {
    c.check_dim(set.dim())?;
    let members = set.members(cap)?;
    Ok(scan(&members, c))
}

fn scan(points: &[Vector], c: &Vector) -> OracleResult {
    let values: Vec<f64> = points.iter().map(|p| dot_unchecked(c, p)).collect();
    let mut best = 0;
    for i in 1..points.len() {
        if values[i] > values[best]
            || (values[i] == values[best] && points[i].lex_cmp(&points[best]).is_lt())
        {
            best = i;
        }
    }
    let optimal_value = values[best];
    let tol = tau(optimal_value, 0.0);
    let tie_count = values.iter().filter(|&&v| v >= optimal_value - tol).count() as u64;
    OracleResult { maximizer: points[best].clone(), optimal_value, tie_count }
}

fn dot_unchecked(c: &Vector, p: &Vector) -> f64 {
    c.iter().zip(p.iter()).map(|(a, b)| a * b).sum()
}

fn knapsack_dp(k: &Knapsack, c: &Vector) -> Result<OracleResult> {
    let weights = k.weights();
    let n = weights.len();
    // items that cannot help: nonpositive value or heavier than the capacity
    let items: Vec<usize> = (0..n).filter(|&i| c[i] > 0.0 && weights[i] <= k.capacity()).collect();
    let total: u128 = items.iter().map(|&i| weights[i] as u128).sum();
    let cap = (k.capacity() as u128).min(total) as usize;

    // best[j][w]: max value from the first j candidate items within load w
    let width = cap + 1;
    let mut best = vec![0.0f64; (items.len() + 1) * width];
    for (j, &i) in items.iter().enumerate() {
        let w_i = weights[i] as usize;
        for w in 0..width {
            let skip = best[j * width + w];
            let take = if w >= w_i { best[j * width + w - w_i] + c[i] } else { f64::NEG_INFINITY };
            best[(j + 1) * width + w] = if take > skip { take } else { skip };
        }
    }

    let mut z = vec![0.0; n];
    let mut w = cap;
    for j in (0..items.len()).rev() {
        if best[(j + 1) * width + w] > best[j * width + w] {
            z[items[j]] = 1.0;
            w -= weights[items[j]] as usize;
        }
    }
    let maximizer = Vector::new(z)?;
    let optimal_value = c.dot(&maximizer)?;
    Ok(OracleResult { maximizer, optimal_value, tie_count: 1 })
}

fn longest_path(d: &DagPaths, c: &Vector) -> Result<OracleResult> {
    let nodes = d.num_nodes();
    let mut dist = vec![f64::NEG_INFINITY; nodes];
    let mut pred: Vec<Option<usize>> = vec![None; nodes];
    dist[d.source()] = 0.0;
    for &u in d.topo_order() {
        if dist[u] == f64::NEG_INFINITY {
            continue;
        }
        for &a in d.out_arcs(u) {
            let v = d.arcs()[a].1;
            let cand = dist[u] + c[a];
            if cand > dist[v] {
                dist[v] = cand;
                pred[v] = Some(a);
            }
        }
    }

    let mut x = vec![0.0; d.arcs().len()];
    let mut node = d.sink();
    while node != d.source() {
        let a = pred[node].ok_or_else(|| Error::InvalidSet("sink unreachable".into()))?;
        x[a] = 1.0;
        node = d.arcs()[a].0;
    }
    let maximizer = Vector::new(x)?;
    let optimal_value = c.dot(&maximizer)?;
    Ok(OracleResult { maximizer, optimal_value, tie_count: 1 })
}

/// Whether `argmax_{x ∈ set} <c, x>` is a single point (exact, via
/// enumeration except for the hypercube).
pub fn has_unique_maximizer(set: &FeasibleSet, c: &Vector, cap: EnumerationCap) -> Result<bool> {
    c.check_dim(set.dim())?;
    if let FeasibleSet::Hypercube { .. } = set {
        return Ok(c.iter().all(|&ci| ci != 0.0));
    }
    let members = set.members(cap)?;
    let values: Vec<f64> = members.iter().map(|p| dot_unchecked(c, p)).collect();
    let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(values.iter().filter(|&&v| v == top).count() == 1)
}
