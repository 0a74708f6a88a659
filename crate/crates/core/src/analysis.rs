//! Regret accounting and round-by-round certification of the learner's
//! guarantees.
//!
//! Every check runs at each prefix `t = 1..=T`, not just at the end, and
//! reports the smallest slack `bound - value` it saw. Bounds use the
//! configured constants (`λ`, `B`, `H`, `K`, `Δ`), never empirically fitted
//! ones; see [`EmpiricalConstants`] for the realized quantities.

use std::f64::consts::LN_2;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::feasible::{EnumerationCap, Observation};
use crate::learner::{RegularizerConfig, RoundRecord, ScheduleKind};
use crate::loss::suboptimality_loss;
use crate::norm::NormPair;
use crate::vector::Vector;
use crate::{tau, TAU_REL};

/// `2^{5/4}`.
fn two_five_quarters() -> f64 {
    (1.25 * LN_2).exp()
}

/// Running totals after round `round`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrefixTotals {
    pub round: usize,
    /// `R_t = Σ <g_s, ĉ_s - c*>`.
    pub regret: f64,
    /// `R_t^sub = Σ ℓ_sub_s(ĉ_s) - ℓ_sub_s(c*)`.
    pub subopt_regret: f64,
    /// `Σ (ℓ_sub_s + ℓ_est_s)`, accumulated separately from `regret`.
    pub loss_sum: f64,
    /// `Σ ‖g_s‖²`.
    pub sum_sq_grad: f64,
}

/// Per-round records plus prefix totals. Needs simulation-mode records.
#[derive(Debug, Clone, Default)]
pub struct RegretLedger {
    records: Vec<RoundRecord>,
    prefixes: Vec<PrefixTotals>,
}

impl RegretLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: RoundRecord) -> Result<&PrefixTotals> {
        let (Some(linearized), Some(total), Some(at_truth)) =
            (record.linearized, record.total, record.suboptimality_at_truth)
        else {
            return Err(Error::Precondition("ledger needs records computed with c*".into()));
        };
        if record.round != self.records.len() + 1 {
            return Err(Error::Precondition(format!(
                "expected round {}, got {}",
                self.records.len() + 1,
                record.round
            )));
        }
        let prev = self.prefixes.last().copied().unwrap_or(PrefixTotals {
            round: 0,
            regret: 0.0,
            subopt_regret: 0.0,
            loss_sum: 0.0,
            sum_sq_grad: 0.0,
        });
        self.prefixes.push(PrefixTotals {
            round: record.round,
            regret: prev.regret + linearized,
            subopt_regret: prev.subopt_regret + (record.suboptimality - at_truth),
            loss_sum: prev.loss_sum + total,
            sum_sq_grad: prev.sum_sq_grad + record.grad_norm * record.grad_norm,
        });
        self.records.push(record);
        Ok(self.prefixes.last().expect("just pushed"))
    }

    pub fn rounds(&self) -> usize {
        self.records.len()
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn prefixes(&self) -> &[PrefixTotals] {
        &self.prefixes
    }

    fn last(&self) -> PrefixTotals {
        self.prefixes.last().copied().unwrap_or(PrefixTotals {
            round: 0,
            regret: 0.0,
            subopt_regret: 0.0,
            loss_sum: 0.0,
            sum_sq_grad: 0.0,
        })
    }

    pub fn linearized_regret(&self) -> f64 {
        self.last().regret
    }

    pub fn subopt_regret(&self) -> f64 {
        self.last().subopt_regret
    }

    pub fn loss_sum(&self) -> f64 {
        self.last().loss_sum
    }

    pub fn sum_sq_grad(&self) -> f64 {
        self.last().sum_sq_grad
    }

    /// Whether the agent's choice was `c*`-optimal in every round.
    pub fn agent_always_optimal(&self) -> bool {
        self.records
            .iter()
            .all(|r| r.suboptimality_at_truth.is_some_and(|s| s <= tau(s, 0.0)))
    }
}

/// Outcome of one inequality checked at every prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Smallest `bound - value` over the checked rounds.
    pub margin: f64,
    /// Round where the margin was smallest (0 if nothing was checked).
    pub worst_round: usize,
    pub checked: usize,
}

impl BoundCheck {
    /// Check `value <= bound + tolerance` for each `(round, value, bound, tolerance)`.
    fn collect(name: &'static str, items: impl IntoIterator<Item = (usize, f64, f64, f64)>) -> Self {
        let mut check = BoundCheck { name, passed: true, margin: f64::INFINITY, worst_round: 0, checked: 0 };
        for (round, value, bound, tol) in items {
            let margin = bound - value;
            check.checked += 1;
            // NaN fails
            if value.partial_cmp(&(bound + tol)).is_none_or(|o| o.is_gt()) {
                check.passed = false;
            }
            if margin < check.margin || check.worst_round == 0 {
                check.margin = margin;
                check.worst_round = round;
            }
        }
        if check.checked == 0 {
            check.margin = 0.0;
        }
        check
    }
}

/// `|R_t - Σ(ℓ_sub + ℓ_est)| <= 1e-9·t`: linearized regret equals the total loss.
pub fn check_total_loss_identity(ledger: &RegretLedger) -> BoundCheck {
    BoundCheck::collect(
        "total_loss_identity",
        ledger
            .prefixes()
            .iter()
            .map(|p| (p.round, (p.regret - p.loss_sum).abs(), TAU_REL * p.round as f64, 0.0)),
    )
}

/// `R_t^sub <= R_t + τ·t`.
pub fn check_subopt_regret(ledger: &RegretLedger) -> BoundCheck {
    BoundCheck::collect(
        "subopt_regret_dominated",
        ledger.prefixes().iter().map(|p| {
            let t = p.round as f64;
            (p.round, p.subopt_regret, p.regret, TAU_REL * t * (1.0 + p.regret.abs()))
        }),
    )
}

/// Per round: `ℓ_sub(ĉ_t) - ℓ_sub(c*) <= <g_t, ĉ_t - c*>`.
pub fn check_linearization(ledger: &RegretLedger) -> BoundCheck {
    BoundCheck::collect(
        "per_round_linearization",
        ledger.records().iter().map(|r| {
            let value = r.suboptimality - r.suboptimality_at_truth.unwrap_or(0.0);
            let bound = r.linearized.unwrap_or(f64::NAN);
            (r.round, value, bound, tau(value, bound))
        }),
    )
}

/// Result of the two adaptive-schedule regret bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveBoundChecks {
    /// `R_t <= 2^{5/4} B √(Σ‖g‖²/λ)`.
    pub adaptive: BoundCheck,
    /// `R_t <= 2^{5/4} K B √(t/λ)`.
    pub uniform: BoundCheck,
}

pub fn adaptive_bound(config: &RegularizerConfig, sum_sq_grad: f64) -> f64 {
    two_five_quarters() * config.scale * (sum_sq_grad / config.lambda).sqrt()
}

pub fn uniform_bound(config: &RegularizerConfig, t: usize) -> f64 {
    two_five_quarters() * config.diameter * config.scale * (t as f64 / config.lambda).sqrt()
}

pub fn offset_bound(config: &RegularizerConfig, t: usize) -> f64 {
    2.0 * config.diameter * config.offset_radius * (t as f64 / config.lambda).sqrt()
}

/// `16 K √(t ln n)`: the uniform bound for entropy on the `n`-simplex with
/// `B = 2^{11/4} √(ln n)` and `λ = 1`.
pub fn entropy_simplex_bound(diameter: f64, t: usize, n: usize) -> f64 {
    16.0 * diameter * (t as f64 * (n as f64).ln()).sqrt()
}

/// `2^{5/4} K B³ / (λ^{3/2} Δ²)`, independent of `T`.
pub fn gap_bound(config: &RegularizerConfig, delta: f64) -> f64 {
    two_five_quarters() * config.diameter * config.scale.powi(3) / (config.lambda.powf(1.5) * delta * delta)
}

/// `K B / (2^{5/4} √λ Δ²)`.
pub fn gap_coefficient(config: &RegularizerConfig, delta: f64) -> f64 {
    config.diameter * config.scale / (two_five_quarters() * config.lambda.sqrt() * delta * delta)
}

fn ensure_schedule(actual: ScheduleKind, expected: ScheduleKind) -> Result<()> {
    if actual == expected {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("bound requires the {expected:?} schedule, learner used {actual:?}")))
    }
}

fn ensure_diameter(ledger: &RegretLedger, config: &RegularizerConfig) -> Result<()> {
    match ledger.records().iter().find(|r| r.grad_norm > config.diameter + tau(config.diameter, 0.0)) {
        Some(r) => Err(Error::Precondition(format!(
            "round {}: ‖g‖ = {} exceeds K = {}",
            r.round, r.grad_norm, config.diameter
        ))),
        None => Ok(()),
    }
}

pub fn check_adaptive_bounds(
    ledger: &RegretLedger,
    config: &RegularizerConfig,
    schedule: ScheduleKind,
) -> Result<AdaptiveBoundChecks> {
    ensure_schedule(schedule, ScheduleKind::Adaptive)?;
    ensure_diameter(ledger, config)?;
    let adaptive = BoundCheck::collect(
        "adaptive_bound",
        ledger.prefixes().iter().map(|p| {
            let b = adaptive_bound(config, p.sum_sq_grad);
            (p.round, p.regret, b, tau(p.regret, b))
        }),
    );
    let uniform = BoundCheck::collect(
        "uniform_bound",
        ledger.prefixes().iter().map(|p| {
            let b = uniform_bound(config, p.round);
            (p.round, p.regret, b, tau(p.regret, b))
        }),
    );
    Ok(AdaptiveBoundChecks { adaptive, uniform })
}

/// `R_t <= 16 K √(t ln n)` at every prefix.
pub fn check_entropy_simplex_bound(ledger: &RegretLedger, diameter: f64, n: usize) -> Result<BoundCheck> {
    if let Some(r) = ledger.records().iter().find(|r| r.grad_norm > diameter + tau(diameter, 0.0)) {
        return Err(Error::Precondition(format!("round {}: ‖g‖ exceeds K", r.round)));
    }
    Ok(BoundCheck::collect(
        "entropy_simplex_bound",
        ledger.prefixes().iter().map(|p| {
            let b = entropy_simplex_bound(diameter, p.round, n);
            (p.round, p.regret, b, tau(p.regret, b))
        }),
    ))
}

/// `R_t <= 2 K H √(t/λ)` for the offset schedule.
pub fn check_offset_bound(ledger: &RegretLedger, config: &RegularizerConfig, schedule: ScheduleKind) -> Result<BoundCheck> {
    ensure_schedule(schedule, ScheduleKind::Offset)?;
    ensure_diameter(ledger, config)?;
    Ok(BoundCheck::collect(
        "offset_bound",
        ledger.prefixes().iter().map(|p| {
            let b = offset_bound(config, p.round);
            (p.round, p.regret, b, tau(p.regret, b))
        }),
    ))
}

/// Exact gap of `(c*, {X_t})`, or the first witness that no positive gap exists.
#[derive(Debug, Clone, PartialEq)]
pub enum GapCertificate {
    Satisfied {
        /// `min_t Δ_t`; infinite if every set is a single point.
        delta: f64,
        per_round: Vec<f64>,
    },
    NotSatisfied {
        round: usize,
        witness: Vector,
        /// `<c*, x_t - witness>`, which is `<= 0`.
        value: f64,
    },
}

impl GapCertificate {
    pub fn delta(&self) -> Option<f64> {
        match self {
            GapCertificate::Satisfied { delta, .. } => Some(*delta),
            GapCertificate::NotSatisfied { .. } => None,
        }
    }
}

/// `Δ = min_t min_{x̂ ∈ X_t, x̂ ≠ x_t} <c*, x_t - x̂> / ‖x_t - x̂‖`, by enumeration.
///
/// Fails the certificate if any `x̂ ≠ x_t` scores at least as well as `x_t`
/// under `c*` (so `x_t` is not the unique optimum).
pub fn certify_gap(
    observations: &[Observation],
    c_star: &Vector,
    norms: NormPair,
    cap: EnumerationCap,
) -> Result<GapCertificate> {
    let mut per_round = Vec::with_capacity(observations.len());
    for obs in observations {
        c_star.check_dim(obs.dim())?;
        let x = obs.agent_choice();
        let mut round_delta = f64::INFINITY;
        for other in obs.feasible_set().members(cap)? {
            if other.bit_eq(x) {
                continue;
            }
            let diff = x.sub(&other)?;
            let value = c_star.dot(&diff)?;
            if value <= 0.0 {
                return Ok(GapCertificate::NotSatisfied { round: obs.round(), witness: other, value });
            }
            round_delta = round_delta.min(value / norms.primal(&diff));
        }
        per_round.push(round_delta);
    }
    let delta = per_round.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(GapCertificate::Satisfied { delta, per_round })
}

/// One evaluation of the per-round gap inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundCheck {
    pub passed: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// `‖x_t - x̂_t‖² <= (K B / (2^{5/4} √λ Δ²)) <c* - ĉ_t, x_t - x̂_t>`.
///
/// Requires a certified gap and an agent that was optimal in this round.
pub fn check_gap_inequality(
    record: &RoundRecord,
    c_star: &Vector,
    config: &RegularizerConfig,
    delta: f64,
    norms: NormPair,
) -> Result<RoundCheck> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::Precondition("gap must be positive".into()));
    }
    match record.suboptimality_at_truth {
        Some(s) if s <= tau(s, 0.0) => {}
        _ => return Err(Error::Precondition(format!("round {}: agent choice not c*-optimal", record.round))),
    }
    let lhs = norms.primal(&record.subgradient).powi(2);
    // <c* - ĉ, x - x̂> = <ĉ - c*, g>
    let inner = record.subgradient.dot(&record.c_hat.sub(c_star)?)?;
    let rhs = gap_coefficient(config, delta) * inner;
    Ok(RoundCheck { passed: lhs <= rhs + tau(lhs, rhs), lhs, rhs })
}

pub fn check_gap_inequality_all(
    ledger: &RegretLedger,
    c_star: &Vector,
    config: &RegularizerConfig,
    delta: f64,
    norms: NormPair,
) -> Result<BoundCheck> {
    let mut rows = Vec::with_capacity(ledger.rounds());
    for r in ledger.records() {
        let c = check_gap_inequality(r, c_star, config, delta, norms)?;
        rows.push((r.round, c.lhs, c.rhs, tau(c.lhs, c.rhs)));
    }
    Ok(BoundCheck::collect("gap_inequality", rows))
}

fn ensure_gap_preconditions(ledger: &RegretLedger, delta: f64) -> Result<()> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::Precondition("gap must be positive".into()));
    }
    if !ledger.agent_always_optimal() {
        return Err(Error::Precondition("agent was not c*-optimal in every round".into()));
    }
    Ok(())
}

/// `R_t <= 2^{5/4} K B³ / (λ^{3/2} Δ²)` at every prefix.
pub fn check_gap_bound(ledger: &RegretLedger, config: &RegularizerConfig, delta: f64) -> Result<BoundCheck> {
    ensure_gap_preconditions(ledger, delta)?;
    let b = gap_bound(config, delta);
    Ok(BoundCheck::collect(
        "gap_bound",
        ledger.prefixes().iter().map(|p| (p.round, p.regret, b, tau(p.regret, b))),
    ))
}

/// `Σ‖g‖² <= (K B / (2^{5/4} √λ Δ²)) R_t` at every prefix.
pub fn check_gradient_energy(ledger: &RegretLedger, config: &RegularizerConfig, delta: f64) -> Result<BoundCheck> {
    ensure_gap_preconditions(ledger, delta)?;
    let coef = gap_coefficient(config, delta);
    Ok(BoundCheck::collect(
        "gradient_energy",
        ledger.prefixes().iter().map(|p| {
            let b = coef * p.regret;
            (p.round, p.sum_sq_grad, b, tau(p.sum_sq_grad, b))
        }),
    ))
}

/// Total loss over rounds `(T/2, T]` is at most `1e-9·T`: learning has
/// stopped making mistakes by horizon `T`. Requires `1 <= T <= rounds`.
pub fn check_plateau(ledger: &RegretLedger, horizon: usize) -> Result<BoundCheck> {
    let prefixes = ledger.prefixes();
    if horizon == 0 || horizon > prefixes.len() {
        return Err(Error::Precondition(format!("horizon {horizon} outside 1..={}", prefixes.len())));
    }
    let half = horizon / 2;
    let before = if half == 0 { 0.0 } else { prefixes[half - 1].loss_sum };
    let window = prefixes[horizon - 1].loss_sum - before;
    Ok(BoundCheck::collect("plateau", [(horizon, window, TAU_REL * horizon as f64, 0.0)]))
}

/// `(1/T) Σ ĉ_t`.
pub fn online_to_batch(records: &[RoundRecord]) -> Result<Vector> {
    let first = records.first().ok_or(Error::EmptyRecords)?;
    let mut sum = Vector::zeros(first.c_hat.dim());
    for r in records {
        sum.add_assign(&r.c_hat)?;
    }
    Ok(sum.scale(1.0 / records.len() as f64))
}

/// Draws i.i.d. observations `(X, x)` for offline evaluation.
pub trait InstanceSampler {
    fn sample(&self, rng: &mut dyn RngCore, index: usize) -> Result<Observation>;
}

impl<F> InstanceSampler for F
where
    F: Fn(&mut dyn RngCore, usize) -> Result<Observation>,
{
    fn sample(&self, rng: &mut dyn RngCore, index: usize) -> Result<Observation> {
        self(rng, index)
    }
}

/// Monte-Carlo estimates of expected suboptimality losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfflineEstimate {
    pub samples: usize,
    /// Mean `ℓ_sub(c̄)`.
    pub prediction_loss: f64,
    /// Mean `ℓ_sub(c*)`.
    pub truth_loss: f64,
    /// Standard error of the per-sample difference `ℓ_sub(c̄) - ℓ_sub(c*)`.
    pub std_err: f64,
}

impl OfflineEstimate {
    /// `mean ℓ_sub(c̄) <= mean ℓ_sub(c*) + R_T^sub/T + 3·SE`.
    pub fn check_against(&self, subopt_regret: f64, rounds: usize) -> BoundCheck {
        let bound = self.truth_loss + subopt_regret / rounds as f64 + 3.0 * self.std_err;
        BoundCheck::collect(
            "online_to_batch",
            [(rounds, self.prediction_loss, bound, tau(self.prediction_loss, bound))],
        )
    }
}

pub fn offline_evaluate(
    c_bar: &Vector,
    c_star: &Vector,
    sampler: &dyn InstanceSampler,
    samples: usize,
    seed: u64,
) -> Result<OfflineEstimate> {
    if samples == 0 {
        return Err(Error::InvalidConfig("need at least one holdout sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pred_sum = 0.0;
    let mut truth_sum = 0.0;
    let mut diffs = Vec::with_capacity(samples);
    for i in 0..samples {
        let obs = sampler.sample(&mut rng, i)?;
        let pred = suboptimality_loss(obs.feasible_set(), obs.agent_choice(), c_bar)?.value;
        let truth = suboptimality_loss(obs.feasible_set(), obs.agent_choice(), c_star)?.value;
        pred_sum += pred;
        truth_sum += truth;
        diffs.push(pred - truth);
    }
    let m = samples as f64;
    let mean_diff = diffs.iter().sum::<f64>() / m;
    let std_err = if samples > 1 {
        let var = diffs.iter().map(|d| (d - mean_diff).powi(2)).sum::<f64>() / (m - 1.0);
        (var / m).sqrt()
    } else {
        0.0
    };
    Ok(OfflineEstimate { samples, prediction_loss: pred_sum / m, truth_loss: truth_sum / m, std_err })
}

/// Realized constants, for comparing against the configured ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalConstants {
    pub max_grad_norm: f64,
    /// `max_t ‖ĉ_t - c*‖⋆`.
    pub max_dual_distance: f64,
    pub mistakes: usize,
    pub last_mistake: usize,
}

pub fn empirical_constants(ledger: &RegretLedger, c_star: &Vector, norms: NormPair) -> Result<EmpiricalConstants> {
    let mut out = EmpiricalConstants { max_grad_norm: 0.0, max_dual_distance: 0.0, mistakes: 0, last_mistake: 0 };
    for r in ledger.records() {
        out.max_grad_norm = out.max_grad_norm.max(r.grad_norm);
        out.max_dual_distance = out.max_dual_distance.max(norms.dual(&r.c_hat.sub(c_star)?));
        if !r.subgradient.is_zero() {
            out.mistakes += 1;
            out.last_mistake = r.round;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasible::FeasibleSet;
    use crate::learner::{build_regularizer, build_schedule, Learner, RegularizerParams};
    use crate::oracle::argmax;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    fn square() -> FeasibleSet {
        FeasibleSet::hypercube(2).unwrap()
    }

    fn learner(n: usize, schedule: &str) -> Learner {
        let reg = build_regularizer("simplex-entropy", &RegularizerParams::new(n)).unwrap();
        let config = RegularizerConfig::for_regularizer(reg.as_ref(), 1.0);
        Learner::new(reg, build_schedule(schedule).unwrap(), config).unwrap()
    }

    #[test]
    fn gap_of_the_unit_square() {
        let c_star = v(&[2.0, 1.0]);
        let x = argmax(&square(), &c_star).unwrap().maximizer;
        let obs = vec![Observation::new(square(), x, 1).unwrap()];
        let cert = certify_gap(&obs, &c_star, NormPair::LinfL1, EnumerationCap::default()).unwrap();
        // suboptimal vertices (0,0), (0,1), (1,0) give ratios 3, 2, 1
        assert_eq!(cert.delta(), Some(1.0));
    }

    #[test]
    fn tied_optimum_has_no_gap() {
        let c_star = v(&[1.0, 1.0]);
        let set = FeasibleSet::vertices(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let obs = vec![Observation::new(set, v(&[1.0, 0.0]), 1).unwrap()];
        let cert = certify_gap(&obs, &c_star, NormPair::LinfL1, EnumerationCap::default()).unwrap();
        assert!(matches!(cert, GapCertificate::NotSatisfied { round: 1, value, .. } if value == 0.0));
    }

    #[test]
    fn suboptimal_agent_has_no_gap() {
        let obs = vec![Observation::new(square(), v(&[0.0, 1.0]), 1).unwrap()];
        let cert = certify_gap(&obs, &v(&[2.0, 1.0]), NormPair::LinfL1, EnumerationCap::default()).unwrap();
        assert!(matches!(cert, GapCertificate::NotSatisfied { .. }));
    }

    #[test]
    fn gap_certification_refuses_huge_sets() {
        let big = FeasibleSet::hypercube(30).unwrap();
        let c = Vector::filled(30, 1.0);
        let obs = vec![Observation::new(big, Vector::filled(30, 1.0), 1).unwrap()];
        assert!(matches!(
            certify_gap(&obs, &c, NormPair::LinfL1, EnumerationCap::default()),
            Err(Error::EnumerationRefused { .. })
        ));
    }

    #[test]
    fn zero_gradients_pass_everything_with_zero_margin() {
        let mut l = learner(2, "adaptive");
        let c_star = v(&[0.75, 0.25]);
        let mut ledger = RegretLedger::new();
        for t in 1..=20 {
            let x = argmax(&square(), &c_star).unwrap().maximizer;
            let obs = Observation::new(square(), x, t).unwrap();
            ledger.push(l.step(&obs, Some(&c_star)).unwrap()).unwrap();
        }
        assert_eq!(ledger.linearized_regret(), 0.0);
        let checks = check_adaptive_bounds(&ledger, l.config(), ScheduleKind::Adaptive).unwrap();
        assert!(checks.adaptive.passed);
        assert_eq!(checks.adaptive.margin, 0.0);
        let off = check_adaptive_bounds(&ledger, l.config(), ScheduleKind::Offset);
        assert!(matches!(off, Err(Error::InvalidConfig(_))));
        assert!(check_plateau(&ledger, 20).unwrap().passed);
        assert!(check_plateau(&ledger, 21).is_err());
    }

    #[test]
    fn gap_inequality_trivial_when_prediction_is_right() {
        let c_star = v(&[0.75, 0.25]);
        let l = learner(2, "adaptive");
        let x = argmax(&square(), &c_star).unwrap().maximizer;
        let obs = Observation::new(square(), x.clone(), 1).unwrap();
        let mut l2 = l.clone();
        let rec = l2.observe(&obs, &x, Some(&c_star)).unwrap();
        let c = check_gap_inequality(&rec, &c_star, l.config(), 0.25, NormPair::LinfL1).unwrap();
        assert!(c.passed && c.lhs == 0.0 && c.rhs == 0.0);
    }

    #[test]
    fn gap_inequality_at_the_uniform_prediction() {
        // c* = (2,1)/3 on the simplex; unit square; Δ = 1/3
        let c_star = v(&[2.0 / 3.0, 1.0 / 3.0]);
        let set = FeasibleSet::vertices(vec![v(&[0.0, 1.0]), v(&[1.0, 0.0])]).unwrap();
        let obs = Observation::new(set.clone(), v(&[1.0, 0.0]), 1).unwrap();
        let l = learner(2, "adaptive");
        let mut probe = l.clone();
        // the uniform prediction ties; force the wrong vertex to exercise both sides
        let rec = probe.observe(&obs, &v(&[0.0, 1.0]), Some(&c_star)).unwrap();
        let cert = certify_gap(&[obs], &c_star, NormPair::LinfL1, EnumerationCap::default()).unwrap();
        let delta = cert.delta().unwrap();
        assert!((delta - 1.0 / 3.0).abs() < 1e-15);
        let c = check_gap_inequality(&rec, &c_star, l.config(), delta, NormPair::LinfL1).unwrap();
        // lhs = ‖(-1,1)‖∞² = 1; rhs = K B/(2^{5/4} Δ²) · <c* - ĉ, x - x̂> = coef · (1/3)
        assert_eq!(c.lhs, 1.0);
        let coef = 1.0 * l.config().scale / (2f64.powf(1.25) * delta * delta);
        assert!((c.rhs - coef / 3.0).abs() < 1e-9);
        assert!(c.passed);
    }

    #[test]
    fn gap_inequality_requires_optimal_agent() {
        let c_star = v(&[2.0 / 3.0, 1.0 / 3.0]);
        let obs = Observation::new(square(), v(&[0.0, 0.0]), 1).unwrap();
        let mut l = learner(2, "adaptive");
        let rec = l.step(&obs, Some(&c_star)).unwrap();
        let cfg = *l.config();
        assert!(matches!(
            check_gap_inequality(&rec, &c_star, &cfg, 0.1, NormPair::LinfL1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn gap_bound_quarters_when_delta_doubles() {
        let reg = build_regularizer("simplex-entropy", &RegularizerParams::new(3)).unwrap();
        let cfg = RegularizerConfig::for_regularizer(reg.as_ref(), 1.0);
        let a = gap_bound(&cfg, 0.2);
        let b = gap_bound(&cfg, 0.4);
        assert!((a / b - 4.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_bounds() {
        let reg = build_regularizer("simplex-entropy", &RegularizerParams::new(2)).unwrap();
        let cfg = RegularizerConfig::for_regularizer(reg.as_ref(), 1.0);
        // 2 √(100 ln 2)
        assert!((offset_bound(&cfg, 100) - 16.651).abs() < 1e-3);
        // entropy constants reproduce 16 K √(t ln n)
        assert!((uniform_bound(&cfg, 50) - entropy_simplex_bound(1.0, 50, 2)).abs() < 1e-9);

        let reg3 = build_regularizer("simplex-entropy", &RegularizerParams::new(3)).unwrap();
        let cfg3 = RegularizerConfig::for_regularizer(reg3.as_ref(), 2.0);
        assert!((offset_bound(&cfg3, 400) - 4.0 * 20.0 * 3f64.ln().sqrt()).abs() < 1e-9);
        assert!((offset_bound(&cfg3, 400) - 83.86).abs() < 1e-2);
    }

    #[test]
    fn online_to_batch_averages() {
        let rec = |c: Vector| RoundRecord {
            round: 1,
            c_hat: c,
            x_hat: Vector::zeros(2),
            subgradient: Vector::zeros(2),
            beta: 0.0,
            grad_norm: 0.0,
            suboptimality: 0.0,
            estimate: None,
            total: None,
            linearized: None,
            suboptimality_at_truth: None,
        };
        assert_eq!(online_to_batch(&[rec(v(&[1.0, 0.0])), rec(v(&[0.0, 1.0]))]).unwrap(), v(&[0.5, 0.5]));
        assert_eq!(online_to_batch(&[rec(v(&[0.2, 0.8])), rec(v(&[0.2, 0.8]))]).unwrap(), v(&[0.2, 0.8]));
        assert_eq!(online_to_batch(&[]).unwrap_err(), Error::EmptyRecords);
        let mut ledger = RegretLedger::new();
        assert!(matches!(ledger.push(rec(v(&[1.0, 0.0]))), Err(Error::Precondition(_))));
    }

    #[test]
    fn offline_evaluation_of_the_truth_is_zero() {
        let c_star = v(&[0.6, 0.3, 0.1]);
        let sampler = |rng: &mut dyn RngCore, i: usize| -> Result<Observation> {
            let set = FeasibleSet::knapsack(vec![rng.next_u32() as u64 % 4, 2, 3], 4)?;
            let x = argmax(&set, &c_star)?.maximizer;
            Observation::new(set, x, i + 1)
        };
        let est = offline_evaluate(&c_star, &c_star, &sampler, 200, 1).unwrap();
        assert_eq!(est.truth_loss, 0.0);
        assert_eq!(est.prediction_loss, 0.0);
        let est = offline_evaluate(&v(&[0.1, 0.1, 0.8]), &c_star, &sampler, 200, 1).unwrap();
        assert_eq!(est.truth_loss, 0.0);
        assert!(est.prediction_loss > 0.0);
    }
}
