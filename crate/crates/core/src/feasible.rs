//! Finite feasible action sets and observed rounds.

use std::collections::VecDeque;

use rand::Rng;

use crate::error::{Error, Result};
use crate::norm::NormPair;
use crate::vector::Vector;

/// Upper bound on the number of members an exhaustive enumeration may produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationCap(pub usize);

impl Default for EnumerationCap {
    fn default() -> Self {
        EnumerationCap(1 << 20)
    }
}

/// Explicitly listed points, deduplicated by exact equality, insertion order kept.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexList {
    dim: usize,
    vertices: Vec<Vector>,
}

impl VertexList {
    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }
}

/// `{z ∈ {0,1}ⁿ : <w, z> <= capacity}` with integral weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Knapsack {
    weights: Vec<u64>,
    capacity: u64,
}

impl Knapsack {
    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }
}

/// Arc-incidence vectors of all source→sink paths in a DAG. Coordinate `i`
/// corresponds to `arcs[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagPaths {
    num_nodes: usize,
    arcs: Vec<(usize, usize)>,
    source: usize,
    sink: usize,
    topo_order: Vec<usize>,
    out_arcs: Vec<Vec<usize>>,
    reaches_sink: Vec<bool>,
}

impl DagPaths {
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn topo_order(&self) -> &[usize] {
        &self.topo_order
    }

    /// Outgoing arc indices of `node`, ascending.
    pub fn out_arcs(&self, node: usize) -> &[usize] {
        &self.out_arcs[node]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    ExplicitVertices(VertexList),
    Hypercube { n: usize },
    Knapsack(Knapsack),
    DagPaths(DagPaths),
}

impl FeasibleSet {
    pub fn vertices(vertices: Vec<Vector>) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| Error::InvalidSet("vertex list is empty".into()))?;
        let dim = first.dim();
        let mut kept: Vec<Vector> = Vec::with_capacity(vertices.len());
        for v in vertices {
            v.check_dim(dim)?;
            if !kept.iter().any(|k| k.bit_eq(&v)) {
                kept.push(v);
            }
        }
        Ok(FeasibleSet::ExplicitVertices(VertexList { dim, vertices: kept }))
    }

    pub fn hypercube(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSet("hypercube dimension must be positive".into()));
        }
        Ok(FeasibleSet::Hypercube { n })
    }

    pub fn knapsack(weights: Vec<u64>, capacity: u64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidSet("knapsack needs at least one item".into()));
        }
        Ok(FeasibleSet::Knapsack(Knapsack { weights, capacity }))
    }

    /// Build the path set of a DAG on nodes `0..num_nodes`. Arcs may be given
    /// in any order; a topological order is computed and cycles are rejected.
    pub fn dag(num_nodes: usize, arcs: Vec<(usize, usize)>, source: usize, sink: usize) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::InvalidSet("dag needs at least one arc".into()));
        }
        if source >= num_nodes || sink >= num_nodes {
            return Err(Error::InvalidSet("source or sink out of range".into()));
        }
        if source == sink {
            return Err(Error::InvalidSet("source and sink must differ".into()));
        }
        let mut out_arcs = vec![Vec::new(); num_nodes];
        let mut in_degree = vec![0usize; num_nodes];
        for (i, &(u, v)) in arcs.iter().enumerate() {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::InvalidSet(format!("arc {i} references a missing node")));
            }
            if u == v {
                return Err(Error::Cycle);
            }
            out_arcs[u].push(i);
            in_degree[v] += 1;
        }

        // Kahn's algorithm, smallest node id first among ready nodes
        let mut ready: VecDeque<usize> = (0..num_nodes).filter(|&u| in_degree[u] == 0).collect();
        let mut topo_order = Vec::with_capacity(num_nodes);
        while let Some(u) = ready.pop_front() {
            topo_order.push(u);
            for &a in &out_arcs[u] {
                let v = arcs[a].1;
                in_degree[v] -= 1;
                if in_degree[v] == 0 {
                    ready.push_back(v);
                }
            }
        }
        if topo_order.len() != num_nodes {
            return Err(Error::Cycle);
        }

        let mut reaches_sink = vec![false; num_nodes];
        reaches_sink[sink] = true;
        for &u in topo_order.iter().rev() {
            if out_arcs[u].iter().any(|&a| reaches_sink[arcs[a].1]) {
                reaches_sink[u] = true;
            }
        }
        if !reaches_sink[source] {
            return Err(Error::InvalidSet("no source→sink path".into()));
        }
        Ok(FeasibleSet::DagPaths(DagPaths {
            num_nodes,
            arcs,
            source,
            sink,
            topo_order,
            out_arcs,
            reaches_sink,
        }))
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::ExplicitVertices(v) => v.dim,
            FeasibleSet::Hypercube { n } => *n,
            FeasibleSet::Knapsack(k) => k.weights.len(),
            FeasibleSet::DagPaths(d) => d.arcs.len(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FeasibleSet::ExplicitVertices(_) => "vertices",
            FeasibleSet::Hypercube { .. } => "hypercube",
            FeasibleSet::Knapsack(_) => "knapsack",
            FeasibleSet::DagPaths(_) => "dag",
        }
    }

    /// Exact membership test.
    pub fn contains(&self, x: &Vector) -> bool {
        if x.dim() != self.dim() {
            return false;
        }
        match self {
            FeasibleSet::ExplicitVertices(v) => v.vertices.iter().any(|u| u.bit_eq(x)),
            FeasibleSet::Hypercube { .. } => is_binary(x),
            FeasibleSet::Knapsack(k) => {
                is_binary(x)
                    && x.iter()
                        .zip(&k.weights)
                        .filter(|(z, _)| **z == 1.0)
                        .map(|(_, &w)| w as u128)
                        .sum::<u128>()
                        <= k.capacity as u128
            }
            FeasibleSet::DagPaths(d) => is_binary(x) && d.is_path_incidence(x),
        }
    }

    /// Number of members if it can be counted without enumeration.
    fn known_size(&self) -> Option<u128> {
        match self {
            FeasibleSet::ExplicitVertices(v) => Some(v.vertices.len() as u128),
            FeasibleSet::Hypercube { n } if *n < 127 => Some(1u128 << n),
            FeasibleSet::Hypercube { .. } => Some(u128::MAX),
            _ => None,
        }
    }

    /// Every member of the set, refusing when there are more than `cap`.
    pub fn members(&self, cap: EnumerationCap) -> Result<Vec<Vector>> {
        if let Some(size) = self.known_size() {
            if size > cap.0 as u128 {
                return Err(Error::EnumerationRefused { cap: cap.0 });
            }
        }
        match self {
            FeasibleSet::ExplicitVertices(v) => Ok(v.vertices.clone()),
            FeasibleSet::Hypercube { n } => Ok((0..1u64 << n)
                .map(|mask| {
                    // most significant coordinate first gives lexicographic order
                    Vector::from_raw((0..*n).map(|i| ((mask >> (n - 1 - i)) & 1) as f64).collect())
                })
                .collect()),
            FeasibleSet::Knapsack(k) => k.enumerate(cap),
            FeasibleSet::DagPaths(d) => d.enumerate(cap),
        }
    }

    /// Largest pairwise primal-norm distance between members.
    pub fn diameter(&self, norm: NormPair, cap: EnumerationCap) -> Result<f64> {
        let members = self.members(cap)?;
        let mut best = 0.0f64;
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                best = best.max(norm.primal(&a.sub(b)?));
            }
        }
        Ok(best)
    }

    /// A uniformly random member.
    pub fn sample_member<R: Rng + ?Sized>(&self, rng: &mut R, cap: EnumerationCap) -> Result<Vector> {
        match self {
            FeasibleSet::ExplicitVertices(v) => Ok(v.vertices[rng.random_range(0..v.vertices.len())].clone()),
            FeasibleSet::Hypercube { n } => Ok(Vector::from_raw(
                (0..*n).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect(),
            )),
            _ => {
                let members = self.members(cap)?;
                Ok(members[rng.random_range(0..members.len())].clone())
            }
        }
    }
}

fn is_binary(x: &Vector) -> bool {
    x.iter().all(|&v| v == 0.0 || v == 1.0)
}

impl Knapsack {
    fn enumerate(&self, cap: EnumerationCap) -> Result<Vec<Vector>> {
        let n = self.weights.len();
        let mut out = Vec::new();
        let mut current = vec![0.0; n];
        self.fill(0, 0, &mut current, &mut out, cap)?;
        Ok(out)
    }

    // depth-first, "leave out" before "take" so output is lexicographic
    fn fill(&self, i: usize, load: u64, current: &mut Vec<f64>, out: &mut Vec<Vector>, cap: EnumerationCap) -> Result<()> {
        if i == self.weights.len() {
            if out.len() >= cap.0 {
                return Err(Error::EnumerationRefused { cap: cap.0 });
            }
            out.push(Vector::from_raw(current.clone()));
            return Ok(());
        }
        self.fill(i + 1, load, current, out, cap)?;
        if let Some(next) = load.checked_add(self.weights[i]).filter(|&l| l <= self.capacity) {
            current[i] = 1.0;
            self.fill(i + 1, next, current, out, cap)?;
            current[i] = 0.0;
        }
        Ok(())
    }
}

impl DagPaths {
    fn is_path_incidence(&self, x: &Vector) -> bool {
        let selected = x.iter().filter(|&&v| v == 1.0).count();
        let mut node = self.source;
        let mut walked = 0;
        while node != self.sink {
            let mut next = self.out_arcs[node].iter().filter(|&&a| x[a] == 1.0);
            match (next.next(), next.next()) {
                (Some(&a), None) => {
                    node = self.arcs[a].1;
                    walked += 1;
                }
                _ => return false,
            }
        }
        walked == selected
    }

    fn enumerate(&self, cap: EnumerationCap) -> Result<Vec<Vector>> {
        let mut out = Vec::new();
        let mut current = vec![0.0; self.arcs.len()];
        self.walk(self.source, &mut current, &mut out, cap)?;
        Ok(out)
    }

    fn walk(&self, node: usize, current: &mut Vec<f64>, out: &mut Vec<Vector>, cap: EnumerationCap) -> Result<()> {
        if node == self.sink {
            if out.len() >= cap.0 {
                return Err(Error::EnumerationRefused { cap: cap.0 });
            }
            out.push(Vector::from_raw(current.clone()));
            return Ok(());
        }
        for &a in &self.out_arcs[node] {
            let next = self.arcs[a].1;
            if !self.reaches_sink[next] {
                continue;
            }
            current[a] = 1.0;
            self.walk(next, current, out, cap)?;
            current[a] = 0.0;
        }
        Ok(())
    }
}

/// One round's observed pair `(X_t, x_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    feasible_set: FeasibleSet,
    agent_choice: Vector,
    round: usize,
}

impl Observation {
    pub fn new(feasible_set: FeasibleSet, agent_choice: Vector, round: usize) -> Result<Self> {
        agent_choice.check_dim(feasible_set.dim())?;
        if round == 0 {
            return Err(Error::InvalidConfig("rounds are numbered from 1".into()));
        }
        if !feasible_set.contains(&agent_choice) {
            return Err(Error::NotAMember);
        }
        Ok(Self { feasible_set, agent_choice, round })
    }

    pub fn feasible_set(&self) -> &FeasibleSet {
        &self.feasible_set
    }

    pub fn agent_choice(&self) -> &Vector {
        &self.agent_choice
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn dim(&self) -> usize {
        self.agent_choice.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn hypercube_members() {
        let got = FeasibleSet::hypercube(2).unwrap().members(EnumerationCap::default()).unwrap();
        assert_eq!(got, vec![v(&[0.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 0.0]), v(&[1.0, 1.0])]);
    }

    #[test]
    fn knapsack_members_match_filtered_bitstrings() {
        let set = FeasibleSet::knapsack(vec![2, 2], 3).unwrap();
        let got = set.members(EnumerationCap::default()).unwrap();
        let all = FeasibleSet::hypercube(2).unwrap().members(EnumerationCap::default()).unwrap();
        let oracle: Vec<Vector> = all
            .into_iter()
            .filter(|z| 2.0 * z[0] + 2.0 * z[1] <= 3.0)
            .collect();
        assert_eq!(got, oracle);
        assert_eq!(got.len(), 3);
        assert!(set.contains(&Vector::zeros(2)));
        assert!(!set.contains(&v(&[1.0, 1.0])));
    }

    #[test]
    fn explicit_vertices_are_identity_after_dedup() {
        let verts = vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let set = FeasibleSet::vertices(verts.clone()).unwrap();
        assert_eq!(set.members(EnumerationCap::default()).unwrap(), verts);

        let dup = FeasibleSet::vertices(vec![v(&[1.0, 0.5]), v(&[-0.0, 2.0]), v(&[1.0, 0.5]), v(&[0.0, 2.0])]).unwrap();
        assert_eq!(dup.members(EnumerationCap::default()).unwrap().len(), 2);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let err = FeasibleSet::hypercube(21).unwrap().members(EnumerationCap::default()).unwrap_err();
        assert_eq!(err, Error::EnumerationRefused { cap: 1 << 20 });
        let err = FeasibleSet::knapsack(vec![1; 6], 6).unwrap().members(EnumerationCap(10)).unwrap_err();
        assert_eq!(err, Error::EnumerationRefused { cap: 10 });
    }

    fn diamond() -> FeasibleSet {
        // 0→1→3, 0→2→3, 0→3
        FeasibleSet::dag(4, vec![(0, 1), (0, 2), (1, 3), (2, 3), (0, 3)], 0, 3).unwrap()
    }

    #[test]
    fn dag_paths() {
        let set = diamond();
        let members = set.members(EnumerationCap::default()).unwrap();
        assert_eq!(members.len(), 3);
        assert!(members.contains(&v(&[1.0, 0.0, 1.0, 0.0, 0.0])));
        assert!(members.contains(&v(&[0.0, 0.0, 0.0, 0.0, 1.0])));
        for m in &members {
            assert!(set.contains(m));
        }
        assert!(!set.contains(&v(&[1.0, 0.0, 0.0, 1.0, 0.0])));
        assert!(!set.contains(&v(&[1.0, 0.0, 1.0, 0.0, 1.0])));
        assert!(!set.contains(&Vector::zeros(5)));
    }

    #[test]
    fn dag_rejects_cycles_and_missing_paths() {
        assert_eq!(FeasibleSet::dag(3, vec![(0, 1), (1, 2), (2, 1)], 0, 2).unwrap_err(), Error::Cycle);
        assert!(matches!(FeasibleSet::dag(3, vec![(0, 1), (2, 1)], 0, 2), Err(Error::InvalidSet(_))));
    }

    #[test]
    fn dag_accepts_arcs_out_of_topological_order() {
        let set = FeasibleSet::dag(3, vec![(1, 2), (0, 1)], 0, 2).unwrap();
        assert!(set.contains(&v(&[1.0, 1.0])));
    }

    #[test]
    fn members_are_contained_and_random_points_mostly_not() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sets = vec![
            FeasibleSet::hypercube(4).unwrap(),
            FeasibleSet::knapsack(vec![3, 1, 4, 1, 5], 6).unwrap(),
            diamond(),
            FeasibleSet::vertices(vec![v(&[0.2, 0.4]), v(&[0.9, 0.1])]).unwrap(),
        ];
        for set in &sets {
            let members = set.members(EnumerationCap::default()).unwrap();
            for m in &members {
                assert!(set.contains(m));
            }
            for _ in 0..50 {
                let p = Vector::new((0..set.dim()).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
                assert_eq!(set.contains(&p), members.iter().any(|m| m.bit_eq(&p)));
            }
            let s = set.sample_member(&mut rng, EnumerationCap::default()).unwrap();
            assert!(set.contains(&s));
        }
    }

    #[test]
    fn observation_requires_membership() {
        let set = FeasibleSet::knapsack(vec![2, 2], 3).unwrap();
        assert_eq!(Observation::new(set.clone(), v(&[1.0, 1.0]), 1).unwrap_err(), Error::NotAMember);
        assert!(Observation::new(set, v(&[1.0, 0.0]), 1).is_ok());
    }

    #[test]
    fn diameter_by_enumeration() {
        let cube = FeasibleSet::hypercube(3).unwrap();
        assert_eq!(cube.diameter(NormPair::LinfL1, EnumerationCap::default()).unwrap(), 1.0);
        let d2 = cube.diameter(NormPair::L2L2, EnumerationCap::default()).unwrap();
        assert!((d2 - 3f64.sqrt()).abs() < 1e-15);
    }
}
