//! Follow-The-Regularized-Leader over the prediction domain.
//!
//! Each round the learner outputs
//!
//! ```text
//! ĉ_t ∈ argmin_{c ∈ Θ}  β_t ψ(c) + Σ_{i<t} <g_i, c>
//! ```
//!
//! and then accumulates the residual `g_t = x̂_t - x_t`. The regularizer `ψ`
//! (with its domain `Θ`) and the scale schedule `β_t` are both strategies
//! picked by name from the registries below.

use std::f64::consts::LN_2;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::feasible::Observation;
use crate::norm::NormPair;
use crate::oracle::argmax;
use crate::tau;
use crate::vector::Vector;

/// The closed convex set `Θ` predictions live in.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictionDomain {
    /// `{c >= 0 : ‖c‖₁ = 1}`.
    Simplex { n: usize },
    /// Euclidean ball.
    Ball { center: Vector, radius: f64 },
}

impl PredictionDomain {
    pub fn dim(&self) -> usize {
        match self {
            PredictionDomain::Simplex { n } => *n,
            PredictionDomain::Ball { center, .. } => center.dim(),
        }
    }

    pub fn norms(&self) -> NormPair {
        match self {
            PredictionDomain::Simplex { .. } => NormPair::LinfL1,
            PredictionDomain::Ball { .. } => NormPair::L2L2,
        }
    }

    /// Membership up to the certification tolerance.
    pub fn contains(&self, c: &Vector) -> bool {
        if c.dim() != self.dim() {
            return false;
        }
        match self {
            PredictionDomain::Simplex { .. } => {
                c.iter().all(|&v| v >= -tau(v, 0.0)) && (c.sum() - 1.0).abs() <= tau(1.0, 0.0)
            }
            PredictionDomain::Ball { center, radius } => match c.sub(center) {
                Ok(d) => NormPair::L2L2.primal(&d) <= radius + tau(*radius, 0.0),
                Err(_) => false,
            },
        }
    }

    /// Whether `0 ∉ Θ`.
    pub fn excludes_origin(&self) -> bool {
        match self {
            PredictionDomain::Simplex { .. } => true,
            PredictionDomain::Ball { center, radius } => NormPair::L2L2.dual(center) > *radius,
        }
    }
}

/// A strongly convex regularizer `ψ` on its own domain, with a closed-form
/// FTRL step.
pub trait Regularizer: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn domain(&self) -> &PredictionDomain;

    fn norms(&self) -> NormPair {
        self.domain().norms()
    }

    /// Strong-convexity modulus `λ` with respect to the dual norm.
    fn strong_convexity(&self) -> f64;

    /// `ψ(c)`.
    fn value(&self, c: &Vector) -> f64;

    /// `argmin_{c ∈ Θ} ψ(c)`.
    fn minimizer(&self) -> Vector;

    /// `argmin_{c ∈ Θ} β ψ(c) + <grad_sum, c>` for `β > 0`.
    fn solve(&self, grad_sum: &Vector, beta: f64) -> Vector;

    /// `max_{c, c' ∈ Θ} ‖c - c'‖⋆`.
    fn dual_diameter(&self) -> f64;

    /// `max_{c, c' ∈ Θ} ψ(c) - ψ(c')`.
    fn value_range(&self) -> f64;

    /// Default `B`, satisfying both scale conditions of the adaptive bound.
    fn default_scale(&self) -> f64;

    /// Default `H` with `H² >= ψ(c) - min ψ` on `Θ`.
    fn default_offset_radius(&self) -> f64 {
        self.value_range().sqrt()
    }
}

/// Negative Shannon entropy `Σ c_i ln c_i` on the simplex (`0 ln 0 = 0`).
#[derive(Debug, Clone)]
pub struct SimplexEntropy {
    domain: PredictionDomain,
}

impl SimplexEntropy {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig("simplex needs dimension >= 2".into()));
        }
        Ok(Self { domain: PredictionDomain::Simplex { n } })
    }

    fn n(&self) -> usize {
        self.domain.dim()
    }
}

impl Regularizer for SimplexEntropy {
    fn name(&self) -> &'static str {
        "simplex-entropy"
    }

    fn domain(&self) -> &PredictionDomain {
        &self.domain
    }

    fn strong_convexity(&self) -> f64 {
        // Pinsker: 1-strongly convex w.r.t. ℓ1
        1.0
    }

    fn value(&self, c: &Vector) -> f64 {
        c.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum()
    }

    fn minimizer(&self) -> Vector {
        Vector::filled(self.n(), 1.0 / self.n() as f64)
    }

    fn solve(&self, grad_sum: &Vector, beta: f64) -> Vector {
        softmax_neg(grad_sum, beta)
    }

    fn dual_diameter(&self) -> f64 {
        2.0
    }

    fn value_range(&self) -> f64 {
        (self.n() as f64).ln()
    }

    fn default_scale(&self) -> f64 {
        // 2^{11/4} √(ln n); covers 2^{5/2}·λ·2² = 2^{9/2} for every n >= 2
        2f64.powf(2.75) * self.value_range().sqrt()
    }
}

/// `c_i ∝ exp(-G_i / β)`, stabilized by subtracting the largest exponent.
pub fn softmax_neg(grad_sum: &Vector, beta: f64) -> Vector {
    let logits: Vec<f64> = grad_sum.iter().map(|&g| -g / beta).collect();
    let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|&l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    Vector::from_raw(weights.into_iter().map(|w| w / total).collect())
}

/// `½‖c - center‖₂²` on a Euclidean ball around `center`.
#[derive(Debug, Clone)]
pub struct BallSquaredNorm {
    domain: PredictionDomain,
}

impl BallSquaredNorm {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidConfig("ball radius must be positive".into()));
        }
        Ok(Self { domain: PredictionDomain::Ball { center, radius } })
    }

    fn center(&self) -> &Vector {
        match &self.domain {
            PredictionDomain::Ball { center, .. } => center,
            PredictionDomain::Simplex { .. } => unreachable!(),
        }
    }

    fn radius(&self) -> f64 {
        match &self.domain {
            PredictionDomain::Ball { radius, .. } => *radius,
            PredictionDomain::Simplex { .. } => unreachable!(),
        }
    }
}

impl Regularizer for BallSquaredNorm {
    fn name(&self) -> &'static str {
        "ball-sqnorm"
    }

    fn domain(&self) -> &PredictionDomain {
        &self.domain
    }

    fn strong_convexity(&self) -> f64 {
        1.0
    }

    fn value(&self, c: &Vector) -> f64 {
        let d = c.sub(self.center()).expect("dimension checked by caller");
        0.5 * d.dot(&d).expect("same dimension")
    }

    fn minimizer(&self) -> Vector {
        self.center().clone()
    }

    fn solve(&self, grad_sum: &Vector, beta: f64) -> Vector {
        // unconstrained minimizer center - G/β, then radial projection
        let step = grad_sum.scale(-1.0 / beta);
        let dist = NormPair::L2L2.primal(&step);
        let r = self.radius();
        let step = if dist > r { step.scale(r / dist) } else { step };
        self.center().add(&step).expect("same dimension")
    }

    fn dual_diameter(&self) -> f64 {
        2.0 * self.radius()
    }

    fn value_range(&self) -> f64 {
        0.5 * self.radius() * self.radius()
    }

    fn default_scale(&self) -> f64 {
        // B² = max{2^{5/2}(2r)², r²/2} = 2^{9/2} r²
        2f64.powf(2.25) * self.radius()
    }
}

/// Inputs the built-in regularizers are constructed from.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizerParams {
    pub dim: usize,
    pub ball_center: Option<Vector>,
    pub ball_radius: f64,
}

impl RegularizerParams {
    pub fn new(dim: usize) -> Self {
        Self { dim, ball_center: None, ball_radius: 0.5 }
    }
}

pub type RegularizerCtor = fn(&RegularizerParams) -> Result<Arc<dyn Regularizer>>;

const REGULARIZERS: &[(&str, RegularizerCtor)] = &[
    ("simplex-entropy", |p| Ok(Arc::new(SimplexEntropy::new(p.dim)?))),
    ("ball-sqnorm", |p| {
        // default center (1/√n, ..., 1/√n) has unit norm, outside a radius < 1 ball of the origin
        let center = match &p.ball_center {
            Some(c) => c.clone(),
            None => Vector::filled(p.dim, 1.0 / (p.dim as f64).sqrt()),
        };
        center.check_dim(p.dim)?;
        Ok(Arc::new(BallSquaredNorm::new(center, p.ball_radius)?))
    }),
];

pub fn regularizer_names() -> Vec<&'static str> {
    REGULARIZERS.iter().map(|(name, _)| *name).collect()
}

pub fn build_regularizer(name: &str, params: &RegularizerParams) -> Result<Arc<dyn Regularizer>> {
    let (_, ctor) = REGULARIZERS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown regularizer `{name}`")))?;
    ctor(params)
}

/// Constants of the regret analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizerConfig {
    /// Strong-convexity modulus `λ`.
    pub lambda: f64,
    /// Scale `B` of the adaptive schedule.
    pub scale: f64,
    /// `H` of the offset schedule.
    pub offset_radius: f64,
    /// Primal-norm diameter bound `K` of the feasible sets.
    pub diameter: f64,
}

impl RegularizerConfig {
    pub fn for_regularizer(reg: &dyn Regularizer, diameter: f64) -> Self {
        Self {
            lambda: reg.strong_convexity(),
            scale: reg.default_scale(),
            offset_radius: reg.default_offset_radius(),
            diameter,
        }
    }

    /// Check the constants against the regularizer they will be used with.
    pub fn validate(&self, reg: &dyn Regularizer) -> Result<()> {
        for (name, v) in [
            ("lambda", self.lambda),
            ("scale", self.scale),
            ("offset_radius", self.offset_radius),
            ("diameter", self.diameter),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive and finite")));
            }
        }
        if self.lambda > reg.strong_convexity() {
            return Err(Error::InvalidConfig("lambda exceeds the regularizer's modulus".into()));
        }
        let b2 = self.scale * self.scale;
        let spread = 2f64.powf(2.5) * self.lambda * reg.dual_diameter().powi(2);
        if b2 + tau(b2, spread) < spread || b2 + tau(b2, 0.0) < reg.value_range() {
            return Err(Error::InvalidConfig(format!(
                "scale {} too small: need B² >= {} and B² >= {}",
                self.scale,
                spread,
                reg.value_range()
            )));
        }
        let h2 = self.offset_radius * self.offset_radius;
        if h2 + tau(h2, 0.0) < reg.value_range() {
            return Err(Error::InvalidConfig("offset radius too small for the regularizer's range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScheduleKind {
    /// `β_t = (2^{1/4}/B) √(Σ_{i<t} ‖g_i‖² / λ)`.
    Adaptive,
    /// `β_t = (1/(H√λ)) √(K² + Σ_{i<t} ‖g_i‖²)`.
    Offset,
}

pub trait StepSchedule: Send + Sync + fmt::Debug {
    fn kind(&self) -> ScheduleKind;

    fn name(&self) -> &'static str;

    /// `β_t` from the running sum of squared primal gradient norms.
    fn beta(&self, sq_norm_sum: f64, config: &RegularizerConfig) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AdaptiveSchedule;

impl StepSchedule for AdaptiveSchedule {
    fn kind(&self) -> ScheduleKind {
        ScheduleKind::Adaptive
    }

    fn name(&self) -> &'static str {
        "adaptive"
    }

    fn beta(&self, sq_norm_sum: f64, config: &RegularizerConfig) -> f64 {
        (0.25 * LN_2).exp() / config.scale * (sq_norm_sum / config.lambda).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OffsetSchedule;

impl StepSchedule for OffsetSchedule {
    fn kind(&self) -> ScheduleKind {
        ScheduleKind::Offset
    }

    fn name(&self) -> &'static str {
        "offset"
    }

    fn beta(&self, sq_norm_sum: f64, config: &RegularizerConfig) -> f64 {
        (config.diameter * config.diameter + sq_norm_sum).sqrt() / (config.offset_radius * config.lambda.sqrt())
    }
}

pub type ScheduleCtor = fn() -> Arc<dyn StepSchedule>;

const SCHEDULES: &[(&str, ScheduleCtor)] = &[
    ("adaptive", || Arc::new(AdaptiveSchedule)),
    ("offset", || Arc::new(OffsetSchedule)),
];

pub fn schedule_names() -> Vec<&'static str> {
    SCHEDULES.iter().map(|(name, _)| *name).collect()
}

pub fn build_schedule(name: &str) -> Result<Arc<dyn StepSchedule>> {
    SCHEDULES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, ctor)| ctor())
        .ok_or_else(|| Error::InvalidConfig(format!("unknown schedule `{name}`")))
}

/// Everything logged about one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub c_hat: Vector,
    pub x_hat: Vector,
    /// `g_t = x̂_t - x_t`.
    pub subgradient: Vector,
    pub beta: f64,
    /// `‖g_t‖` in the primal norm.
    pub grad_norm: f64,
    /// `ℓ_sub_t(ĉ_t)`, raw.
    pub suboptimality: f64,
    /// `ℓ_est_t(ĉ_t)`; simulation mode only.
    pub estimate: Option<f64>,
    pub total: Option<f64>,
    /// `<g_t, ĉ_t - c*>`.
    pub linearized: Option<f64>,
    /// `ℓ_sub_t(c*)`.
    pub suboptimality_at_truth: Option<f64>,
}

/// FTRL state. Single writer: rounds are observed strictly in order.
#[derive(Debug, Clone)]
pub struct Learner {
    regularizer: Arc<dyn Regularizer>,
    schedule: Arc<dyn StepSchedule>,
    config: RegularizerConfig,
    grad_sum: Vector,
    sq_norm_sum: f64,
    round: usize,
    prediction: Vector,
    beta: f64,
}

impl Learner {
    pub fn new(
        regularizer: Arc<dyn Regularizer>,
        schedule: Arc<dyn StepSchedule>,
        config: RegularizerConfig,
    ) -> Result<Self> {
        config.validate(regularizer.as_ref())?;
        let n = regularizer.domain().dim();
        let beta = schedule.beta(0.0, &config);
        Ok(Self {
            prediction: regularizer.minimizer(),
            grad_sum: Vector::zeros(n),
            sq_norm_sum: 0.0,
            round: 0,
            beta,
            regularizer,
            schedule,
            config,
        })
    }

    pub fn regularizer(&self) -> &dyn Regularizer {
        self.regularizer.as_ref()
    }

    pub fn schedule(&self) -> &dyn StepSchedule {
        self.schedule.as_ref()
    }

    pub fn config(&self) -> &RegularizerConfig {
        &self.config
    }

    pub fn norms(&self) -> NormPair {
        self.regularizer.norms()
    }

    pub fn grad_sum(&self) -> &Vector {
        &self.grad_sum
    }

    pub fn sq_norm_sum(&self) -> f64 {
        self.sq_norm_sum
    }

    /// Rounds observed so far.
    pub fn round(&self) -> usize {
        self.round
    }

    /// `β` used for the current prediction.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `ĉ` for the next round to be observed.
    pub fn predict(&self) -> &Vector {
        &self.prediction
    }

    /// Record round `t` given the observation and the oracle's `x̂_t` for the
    /// current prediction, then move to `ĉ_{t+1}`. With `c_star` the record
    /// also carries estimate/total losses and the regret terms.
    pub fn observe(&mut self, obs: &Observation, x_hat: &Vector, c_star: Option<&Vector>) -> Result<RoundRecord> {
        let n = self.grad_sum.dim();
        obs.agent_choice().check_dim(n)?;
        x_hat.check_dim(n)?;
        if !obs.feasible_set().contains(x_hat) {
            return Err(Error::NotAMember);
        }
        let x = obs.agent_choice();
        let c_hat = &self.prediction;
        let g = x_hat.sub(x)?;
        let grad_norm = self.norms().primal(&g);
        let suboptimality = c_hat.dot(&g)?;

        let (estimate, total, linearized, suboptimality_at_truth) = match c_star {
            Some(c_star) => {
                c_star.check_dim(n)?;
                let estimate = c_star.dot(&x.sub(x_hat)?)?;
                let linearized = g.dot(&c_hat.sub(c_star)?)?;
                let best = argmax(obs.feasible_set(), c_star)?;
                let at_truth = c_star.dot(&best.maximizer.sub(x)?)?;
                (Some(estimate), Some(suboptimality + estimate), Some(linearized), Some(at_truth))
            }
            None => (None, None, None, None),
        };

        let record = RoundRecord {
            round: self.round + 1,
            c_hat: c_hat.clone(),
            x_hat: x_hat.clone(),
            subgradient: g.clone(),
            beta: self.beta,
            grad_norm,
            suboptimality,
            estimate,
            total,
            linearized,
            suboptimality_at_truth,
        };

        self.round += 1;
        if !g.is_zero() {
            self.grad_sum.add_assign(&g)?;
            self.sq_norm_sum += grad_norm * grad_norm;
            self.beta = self.schedule.beta(self.sq_norm_sum, &self.config);
            if self.beta > 0.0 {
                self.prediction = self.regularizer.solve(&self.grad_sum, self.beta);
            }
        }
        Ok(record)
    }

    /// Predict, query the oracle on `X_t` and observe, in protocol order.
    pub fn step(&mut self, obs: &Observation, c_star: Option<&Vector>) -> Result<RoundRecord> {
        let x_hat = argmax(obs.feasible_set(), &self.prediction)?.maximizer;
        self.observe(obs, &x_hat, c_star)
    }
}
