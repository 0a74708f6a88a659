//! Suboptimality, estimate and Fenchel-Young losses.
//!
//! With `Ω = I_X` (the indicator of the feasible set), the Fenchel-Young loss
//! `L_X(ĉ; x) = Ω*(ĉ) + Ω(x) - <ĉ, x>` is exactly the suboptimality loss
//! `<ĉ, x̂ - x>`, and `x̂ - x` is a subgradient of it at `ĉ`.

use crate::error::{Error, Result};
use crate::feasible::FeasibleSet;
use crate::oracle::argmax;
use crate::vector::Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct SuboptimalityLoss {
    /// Raw value; may be slightly negative from rounding.
    pub value: f64,
    pub x_hat: Vector,
}

/// `max_{x' ∈ X} <ĉ, x'> - <ĉ, x>` together with the oracle's maximizer.
pub fn suboptimality_loss(set: &FeasibleSet, x: &Vector, c_hat: &Vector) -> Result<SuboptimalityLoss> {
    ensure_member(set, x)?;
    let x_hat = argmax(set, c_hat)?.maximizer;
    let value = c_hat.dot(&x_hat.sub(x)?)?;
    Ok(SuboptimalityLoss { value, x_hat })
}

/// `Ω*(ĉ) + Ω(x) - <ĉ, x>` with `Ω*` the support function of `X` and `Ω(x) = 0`.
pub fn fenchel_young_loss(set: &FeasibleSet, x: &Vector, c_hat: &Vector) -> Result<f64> {
    ensure_member(set, x)?;
    let conjugate = argmax(set, c_hat)?.optimal_value;
    let indicator = 0.0;
    Ok(conjugate + indicator - c_hat.dot(x)?)
}

/// `<c*, x - x̂>`: how much worse `x̂` is than the agent's choice under `c*`.
pub fn estimate_loss(c_star: &Vector, x: &Vector, x_hat: &Vector) -> Result<f64> {
    c_star.dot(&x.sub(x_hat)?)
}

/// `x̂ - x`.
pub fn residual_subgradient(x: &Vector, x_hat: &Vector) -> Result<Vector> {
    x_hat.sub(x)
}

/// Clamp rounding noise below zero for reports; traces keep the raw value.
pub fn clamp_nonneg(value: f64) -> f64 {
    value.max(0.0)
}

fn ensure_member(set: &FeasibleSet, x: &Vector) -> Result<()> {
    x.check_dim(set.dim())?;
    if set.contains(x) {
        Ok(())
    } else {
        Err(Error::NotAMember)
    }
}

/// All per-round losses at one prediction. Estimate and total need `c*` and
/// are `None` in observation-only mode.
#[derive(Debug, Clone, PartialEq)]
pub struct LossBreakdown {
    pub suboptimality: f64,
    pub estimate: Option<f64>,
    pub total: Option<f64>,
    pub subgradient: Vector,
    pub chosen_x_hat: Vector,
}

impl LossBreakdown {
    pub fn evaluate(set: &FeasibleSet, x: &Vector, c_hat: &Vector, c_star: Option<&Vector>) -> Result<Self> {
        let sub = suboptimality_loss(set, x, c_hat)?;
        let subgradient = residual_subgradient(x, &sub.x_hat)?;
        let estimate = c_star.map(|c| estimate_loss(c, x, &sub.x_hat)).transpose()?;
        Ok(Self {
            suboptimality: sub.value,
            estimate,
            total: estimate.map(|e| sub.value + e),
            subgradient,
            chosen_x_hat: sub.x_hat,
        })
    }
}
