//! Instance families: strategies that draw a fresh feasible set each round,
//! registered by name.

use std::fmt;
use std::sync::Arc;

use invlin_core::{FeasibleSet, NormPair, Vector};
use rand::{Rng, RngCore};

use crate::config::{ExperimentConfig, GapTarget};
use crate::error::{HarnessError, Result};

pub trait InstanceFamily: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn dim(&self) -> usize;

    fn sample(&self, rng: &mut dyn RngCore) -> Result<FeasibleSet>;

    /// Upper bound on the primal-norm diameter of every set this family draws.
    fn diameter_bound(&self, norms: NormPair) -> f64 {
        // all built-in families live in [0,1]ⁿ
        match norms {
            NormPair::LinfL1 => 1.0,
            NormPair::L2L2 => (self.dim() as f64).sqrt(),
        }
    }
}

/// `V` points uniform in `[0,1]ⁿ`, optionally rounded to `{0,1}ⁿ`.
#[derive(Debug, Clone)]
pub struct RandomVertices {
    pub dim: usize,
    pub count: usize,
    pub binary: bool,
}

impl InstanceFamily for RandomVertices {
    fn name(&self) -> &'static str {
        "random-vertices"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Result<FeasibleSet> {
        let points = (0..self.count)
            .map(|_| {
                let entries = (0..self.dim)
                    .map(|_| {
                        let u: f64 = rng.random();
                        if self.binary { u.round() } else { u }
                    })
                    .collect();
                Vector::new(entries)
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(FeasibleSet::vertices(points)?)
    }
}

/// The full cube `{0,1}ⁿ` every round.
#[derive(Debug, Clone)]
pub struct Hypercube {
    pub dim: usize,
}

impl InstanceFamily for Hypercube {
    fn name(&self) -> &'static str {
        "hypercube"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, _rng: &mut dyn RngCore) -> Result<FeasibleSet> {
        Ok(FeasibleSet::hypercube(self.dim)?)
    }
}

/// 0/1 knapsack with weights uniform in `1..=max_weight` and capacity
/// `floor(fill · Σw)`.
#[derive(Debug, Clone)]
pub struct RandomKnapsack {
    pub dim: usize,
    pub max_weight: u64,
    pub fill: f64,
}

impl InstanceFamily for RandomKnapsack {
    fn name(&self) -> &'static str {
        "knapsack"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Result<FeasibleSet> {
        let weights: Vec<u64> = (0..self.dim).map(|_| rng.random_range(1..=self.max_weight)).collect();
        let total: u64 = weights.iter().sum();
        let capacity = (self.fill * total as f64).floor() as u64;
        Ok(FeasibleSet::knapsack(weights, capacity)?)
    }
}

/// Random subgraphs of a fixed ground DAG with exactly `dim` arcs.
///
/// The ground graph lists arcs `(u, v)` for `v = 1, 2, ...` and `u = v-1`
/// down to 0, truncated after `dim` arcs; the chain `0 → 1 → ... → sink` is
/// always part of it. Each round keeps every arc independently with
/// probability `keep` and redraws until a source→sink path survives.
#[derive(Debug, Clone)]
pub struct RandomDag {
    pub dim: usize,
    pub keep: f64,
    ground: Vec<(usize, usize)>,
    sink: usize,
}

impl RandomDag {
    const MAX_REDRAWS: usize = 1000;

    pub fn new(dim: usize, keep: f64) -> Self {
        let mut ground = Vec::with_capacity(dim);
        let mut v = 1;
        'outer: loop {
            for u in (0..v).rev() {
                if ground.len() == dim {
                    break 'outer;
                }
                ground.push((u, v));
            }
            v += 1;
        }
        let sink = ground.iter().map(|&(_, v)| v).max().unwrap_or(1);
        Self { dim, keep, ground, sink }
    }

    pub fn ground_arcs(&self) -> &[(usize, usize)] {
        &self.ground
    }
}

impl InstanceFamily for RandomDag {
    fn name(&self) -> &'static str {
        "dag"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Result<FeasibleSet> {
        // dropped arcs are parked between two extra nodes off every path,
        // which keeps coordinate i bound to ground arc i
        let isolated = self.sink + 1;
        for _ in 0..Self::MAX_REDRAWS {
            let arcs: Vec<(usize, usize)> = self
                .ground
                .iter()
                .map(|&arc| if rng.random_bool(self.keep) { arc } else { (isolated, isolated + 1) })
                .collect();
            match FeasibleSet::dag(isolated + 2, arcs, 0, self.sink) {
                Ok(set) => return Ok(set),
                Err(invlin_core::Error::InvalidSet(_)) => continue,
                Err(e) => return Err(e.into()),
            }
        }
        Ok(FeasibleSet::dag(isolated + 2, self.ground.clone(), 0, self.sink)?)
    }
}

pub type FamilyCtor = fn(&ExperimentConfig) -> Result<Arc<dyn InstanceFamily>>;

const FAMILIES: &[(&str, FamilyCtor)] = &[
    ("random-vertices", |c| {
        Ok(Arc::new(RandomVertices {
            dim: c.dimension,
            count: c.vertices,
            binary: c.binary_vertices || c.gap == GapTarget::Integral,
        }))
    }),
    ("hypercube", |c| Ok(Arc::new(Hypercube { dim: c.dimension }))),
    ("knapsack", |c| {
        Ok(Arc::new(RandomKnapsack { dim: c.dimension, max_weight: c.knapsack_max_weight, fill: c.knapsack_fill }))
    }),
    ("dag", |c| Ok(Arc::new(RandomDag::new(c.dimension, c.dag_keep)))),
];

pub fn family_names() -> Vec<&'static str> {
    FAMILIES.iter().map(|(n, _)| *n).collect()
}

pub fn build_family(cfg: &ExperimentConfig) -> Result<Arc<dyn InstanceFamily>> {
    let (_, ctor) = FAMILIES
        .iter()
        .find(|(n, _)| *n == cfg.family)
        .ok_or_else(|| HarnessError::Config(format!("unknown family `{}` (one of {:?})", cfg.family, family_names())))?;
    ctor(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use invlin_core::EnumerationCap;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ground_dag_has_requested_arcs() {
        let d = RandomDag::new(4, 0.5);
        assert_eq!(d.ground_arcs(), &[(0, 1), (1, 2), (0, 2), (2, 3)]);
        assert_eq!(d.sink, 3);
        assert_eq!(RandomDag::new(1, 0.5).ground_arcs(), &[(0, 1)]);
    }

    #[test]
    fn every_family_respects_its_diameter_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for name in family_names() {
            let mut cfg = ExperimentConfig::with_seed(1);
            cfg.family = name.into();
            cfg.dimension = 6;
            cfg.vertices = 8;
            let fam = build_family(&cfg).unwrap();
            for _ in 0..20 {
                let set = fam.sample(&mut rng).unwrap();
                assert_eq!(set.dim(), 6);
                for norms in [NormPair::LinfL1, NormPair::L2L2] {
                    let d = set.diameter(norms, EnumerationCap::default()).unwrap();
                    assert!(d <= fam.diameter_bound(norms) + 1e-12, "{name}");
                }
            }
        }
    }

    #[test]
    fn unknown_family() {
        let mut cfg = ExperimentConfig::with_seed(1);
        cfg.family = "nope".into();
        assert!(build_family(&cfg).is_err());
    }
}
