//! Closed-form bounds on g_w, evaluated against the quadrature value.

use rayon::prelude::*;

use super::kernel::sample_w;
use super::wedge::{g, g_w, WedgeParams};
use crate::error::{invalid, Result};
use crate::seed::SeedStream;

/// Slack allowed between quadrature values and closed-form bounds.
pub const BOUND_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundCheck {
    /// The bound's hypotheses do not hold at this (w, v).
    NotApplicable,
    Checked {
        value: f64,
        bound: f64,
        /// Signed distance by which the inequality holds (negative on failure).
        margin: f64,
        pass: bool,
    },
}

impl BoundCheck {
    pub fn passed(&self) -> Option<bool> {
        match self {
            Self::NotApplicable => None,
            Self::Checked { pass, .. } => Some(*pass),
        }
    }

    fn at_least(value: f64, bound: f64) -> Self {
        let margin = value - bound;
        Self::Checked { value, bound, margin, pass: margin >= -BOUND_SLACK }
    }

    fn at_most(value: f64, bound: f64) -> Self {
        let margin = bound - value;
        Self::Checked { value, bound, margin, pass: margin >= -BOUND_SLACK }
    }
}

/// Monte Carlo check of P(g_W(v) > 1/2) against its closed-form lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityBoundCheck {
    pub estimate: f64,
    pub stderr: f64,
    pub bound: f64,
    /// Holds within three standard errors.
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// g_w(v) ≥ g(v)·e^{−r²/2}.
    pub lower: BoundCheck,
    /// g_w(v) > 1/2 when v ≤ 1/2 and |w_cc| ≤ β|w_c| − 2.
    pub half: BoundCheck,
    /// g_w(v) ≤ e^{−r² sin²(α−φ)/2} when w lies outside the wedge (α ≥ φ).
    pub upper: BoundCheck,
    pub probability: Option<ProbabilityBoundCheck>,
}

impl BoundReport {
    /// False if any applicable check failed.
    pub fn all_pass(&self) -> bool {
        [self.lower, self.half, self.upper].iter().all(|c| c.passed() != Some(false))
            && self.probability.is_none_or(|p| p.pass)
    }
}

/// φ = arctan √(v/(1−v)), the half-angle of the wedge.
pub fn wedge_angle(v: f64) -> f64 {
    (v / (1.0 - v)).sqrt().atan()
}

/// Angle of w folded into [0, π/2].
pub fn folded_angle(w: WedgeParams) -> f64 {
    w.w_cc.abs().atan2(w.w_c.abs())
}

pub fn lower_bound(w: WedgeParams, v: f64) -> f64 {
    g(v) * (-0.5 * w.norm().powi(2)).exp()
}

pub fn half_condition(w: WedgeParams, v: f64) -> bool {
    v > 0.0 && v <= 0.5 && w.w_cc.abs() <= (v / (1.0 - v)).sqrt() * w.w_c.abs() - 2.0
}

/// `None` when w lies inside the wedge.
pub fn upper_bound(w: WedgeParams, v: f64) -> Option<f64> {
    if v >= 1.0 {
        return None;
    }
    let (alpha, phi) = (folded_angle(w), wedge_angle(v));
    (alpha >= phi).then(|| (-0.5 * w.norm().powi(2) * (alpha - phi).sin().powi(2)).exp())
}

/// (1/2π)·√(v/(1−v))·exp(−(8(1−ρ)/ρ)·((1−v)/v)).
pub fn probability_lower_bound(v: f64, rho: f64) -> f64 {
    (v / (1.0 - v)).sqrt() / (2.0 * std::f64::consts::PI) * (-(8.0 * (1.0 - rho) / rho) * ((1.0 - v) / v)).exp()
}

pub fn probability_check(v: f64, rho: f64, samples: u64, seed: &SeedStream) -> Result<ProbabilityBoundCheck> {
    if !(v > 0.0 && v <= 0.5) {
        return Err(invalid("probability bound needs 0 < v <= 1/2"));
    }
    if !(rho > 0.0 && rho < 1.0) || samples == 0 {
        return Err(invalid("need rho in (0, 1) and samples >= 1"));
    }
    const CHUNK: u64 = 4096;
    let hits: u64 = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.child(c).rng();
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len).filter(|_| super::wedge::g_w_unchecked(sample_w(rho, &mut rng), v) > 0.5).count() as u64
        })
        .sum();
    let p = hits as f64 / samples as f64;
    let se = (p * (1.0 - p) / samples as f64).sqrt();
    let bound = probability_lower_bound(v, rho);
    Ok(ProbabilityBoundCheck { estimate: p, stderr: se, bound, pass: p + 3.0 * se >= bound })
}

/// Evaluate every bound whose hypotheses hold at (w, v). The probability
/// bound (which does not depend on w) is included when `mc_samples > 0`.
pub fn bound_oracles(w: WedgeParams, v: f64, rho: f64, mc_samples: u64, seed: &SeedStream) -> Result<BoundReport> {
    let value = g_w(w, v)?;
    let lower = BoundCheck::at_least(value, lower_bound(w, v));
    let half =
        if half_condition(w, v) { BoundCheck::at_least(value, 0.5 + f64::EPSILON) } else { BoundCheck::NotApplicable };
    let upper = match upper_bound(w, v) {
        Some(b) => BoundCheck::at_most(value, b),
        None => BoundCheck::NotApplicable,
    };
    let probability = if mc_samples > 0 && v > 0.0 && v <= 0.5 && rho > 0.0 && rho < 1.0 {
        Some(probability_check(v, rho, mc_samples, seed)?)
    } else {
        None
    };
    Ok(BoundReport { lower, half, upper, probability })
}
