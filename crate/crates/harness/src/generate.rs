//! Seeded instance streams: the hidden objective `c*`, the feasible sets and
//! the agent's choices.

use std::sync::Arc;

use invlin_core::analysis::{certify_gap, GapCertificate, InstanceSampler};
use invlin_core::learner::{build_regularizer, PredictionDomain, Regularizer, RegularizerParams};
use invlin_core::oracle::{argmax, has_unique_maximizer};
use invlin_core::{EnumerationCap, NormPair, Observation, Vector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::config::{ExperimentConfig, GapTarget};
use crate::error::{HarnessError, Result};
use crate::family::{build_family, InstanceFamily};

/// Consecutive rejected draws for one round before `c*` is redrawn.
const ROUND_REDRAW_LIMIT: usize = 1000;

/// Seed offset separating holdout sampling from the training stream.
pub const HOLDOUT_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceStream {
    pub c_star: Vector,
    /// Integral objective `c*` was normalized from, in integral-gap mode.
    pub c_star_integral: Option<Vector>,
    pub observations: Vec<Observation>,
}

impl InstanceStream {
    pub fn dim(&self) -> usize {
        self.c_star.dim()
    }
}

pub fn build_regularizer_for(cfg: &ExperimentConfig) -> Result<Arc<dyn Regularizer>> {
    let mut params = RegularizerParams::new(cfg.dimension);
    params.ball_radius = cfg.ball_radius;
    Ok(build_regularizer(&cfg.regularizer, &params)?)
}

/// Draws rounds i.i.d. given a fixed objective.
#[derive(Debug, Clone)]
pub struct StreamGenerator {
    family: Arc<dyn InstanceFamily>,
    c_star: Vector,
    c_star_integral: Option<Vector>,
    gap: GapTarget,
    noise: f64,
    norms: NormPair,
    cap: EnumerationCap,
    retry_cap: usize,
}

impl StreamGenerator {
    pub fn c_star(&self) -> &Vector {
        &self.c_star
    }

    pub fn c_star_integral(&self) -> Option<&Vector> {
        self.c_star_integral.as_ref()
    }

    pub fn family(&self) -> &dyn InstanceFamily {
        self.family.as_ref()
    }

    fn new(cfg: &ExperimentConfig, rng: &mut dyn RngCore) -> Result<Self> {
        let reg = build_regularizer_for(cfg)?;
        let (c_star, c_star_integral) = draw_objective(cfg, reg.domain(), rng)?;
        Ok(Self {
            family: build_family(cfg)?,
            c_star,
            c_star_integral,
            gap: cfg.gap,
            noise: cfg.agent_noise,
            norms: reg.norms(),
            cap: EnumerationCap(cfg.enumeration_cap),
            retry_cap: cfg.retry_cap,
        })
    }

    /// One round; `Ok(None)` if `limit` draws were rejected.
    fn draw_round(&self, rng: &mut dyn RngCore, round: usize, limit: usize, draws: &mut usize) -> Result<Option<Observation>> {
        for _ in 0..limit {
            if *draws >= self.retry_cap {
                return Err(HarnessError::GenerationFailed { draws: *draws });
            }
            *draws += 1;
            let set = self.family.sample(rng)?;
            let optimal = argmax(&set, &self.c_star)?.maximizer;
            let accepted = match self.gap {
                GapTarget::None => true,
                GapTarget::Integral => {
                    let c_int = self.c_star_integral.as_ref().expect("integral mode keeps the integral objective");
                    has_unique_maximizer(&set, c_int, self.cap)?
                }
                GapTarget::Margin(min_gap) => {
                    let obs = Observation::new(set.clone(), optimal.clone(), round)?;
                    match certify_gap(&[obs], &self.c_star, self.norms, self.cap)? {
                        GapCertificate::Satisfied { delta, .. } => delta >= min_gap,
                        GapCertificate::NotSatisfied { .. } => false,
                    }
                }
            };
            if !accepted {
                continue;
            }
            let choice = if self.noise > 0.0 && rng.random_bool(self.noise) {
                set.sample_member(rng, self.cap)?
            } else {
                optimal
            };
            return Ok(Some(Observation::new(set, choice, round)?));
        }
        Ok(None)
    }
}

impl InstanceSampler for StreamGenerator {
    fn sample(&self, rng: &mut dyn RngCore, index: usize) -> invlin_core::Result<Observation> {
        let mut draws = 0;
        match self.draw_round(rng, index + 1, self.retry_cap, &mut draws) {
            Ok(Some(obs)) => Ok(obs),
            Ok(None) | Err(HarnessError::GenerationFailed { .. }) => {
                Err(invlin_core::Error::Precondition(format!("holdout sample {index}: generation failed")))
            }
            Err(HarnessError::Core(e)) => Err(e),
            Err(e) => Err(invlin_core::Error::Precondition(e.to_string())),
        }
    }
}

fn draw_objective(cfg: &ExperimentConfig, domain: &PredictionDomain, rng: &mut dyn RngCore) -> Result<(Vector, Option<Vector>)> {
    match domain {
        PredictionDomain::Simplex { n } => {
            if cfg.gap == GapTarget::Integral {
                let ints: Vec<f64> = (0..*n).map(|_| rng.random_range(1..=cfg.integral_max) as f64).collect();
                let total: f64 = ints.iter().sum();
                let c_int = Vector::new(ints)?;
                Ok((c_int.scale(1.0 / total), Some(c_int)))
            } else {
                // Dirichlet(1, ..., 1) via normalized exponentials
                let raw: Vec<f64> = (0..*n).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = raw.iter().sum();
                Ok((Vector::new(raw.into_iter().map(|x| x / total).collect())?, None))
            }
        }
        PredictionDomain::Ball { center, radius } => {
            let n = center.dim();
            let dir: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
            let dir = Vector::new(dir)?;
            let len = NormPair::L2L2.primal(&dir);
            let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
            let offset = if len > 0.0 { dir.scale(r / len) } else { Vector::zeros(n) };
            Ok((center.add(&offset)?, None))
        }
    }
}

/// Draw `c*` and `cfg.rounds` observations. Identical configs give identical streams.
pub fn generate_instance_stream(cfg: &ExperimentConfig) -> Result<InstanceStream> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draws = 0usize;
    'objective: loop {
        let generator = StreamGenerator::new(cfg, &mut rng)?;
        let mut observations = Vec::with_capacity(cfg.rounds);
        for t in 1..=cfg.rounds {
            match generator.draw_round(&mut rng, t, ROUND_REDRAW_LIMIT, &mut draws)? {
                Some(obs) => observations.push(obs),
                None => continue 'objective,
            }
        }
        return Ok(InstanceStream {
            c_star: generator.c_star,
            c_star_integral: generator.c_star_integral,
            observations,
        });
    }
}

/// The holdout sampler for a config: same objective and distribution as the
/// training stream, independent randomness.
pub fn holdout_sampler(cfg: &ExperimentConfig, stream: &InstanceStream) -> Result<StreamGenerator> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut generator = StreamGenerator::new(cfg, &mut rng)?;
    generator.c_star = stream.c_star.clone();
    generator.c_star_integral = stream.c_star_integral.clone();
    Ok(generator)
}

pub fn holdout_seed(seed: u64) -> u64 {
    seed ^ HOLDOUT_SEED_OFFSET
}
