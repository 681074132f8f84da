//! The separation probability g and its shifted-Gaussian wedge version g_w.

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use super::quad::{gauss_hermite, integrate};
use crate::error::{invalid, Result};

/// g(v) = (2/π)·arctan(√(v/(1−v))), the probability that a Gaussian
/// hyperplane separates two ±1 vectors differing in a fraction v of places.
///
/// Evaluated as (2/π)·arcsin(√v), which is the same function and is finite at v = 1.
/// Expects v ∈ [0, 1]; see [`g_checked`].
#[inline]
pub fn g(v: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&v));
    if v == 0.5 {
        return 0.5;
    }
    std::f64::consts::FRAC_2_PI * v.sqrt().asin()
}

pub fn g_checked(v: f64) -> Result<f64> {
    check_fraction(v)?;
    Ok(g(v))
}

fn check_fraction(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(format!("fraction {v} outside [0, 1]")))
    }
}

/// Mean of the shifted Gaussian: `w_c` along the disagreement axis, `w_cc` along the agreement axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgeParams {
    pub w_c: f64,
    pub w_cc: f64,
}

impl WedgeParams {
    pub fn new(w_c: f64, w_cc: f64) -> Self {
        Self { w_c, w_cc }
    }

    pub fn norm(&self) -> f64 {
        self.w_c.hypot(self.w_cc)
    }
}

/// Standard normal cdf.
#[inline]
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * std::f64::consts::FRAC_1_SQRT_2)
}

#[inline]
fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Absolute tolerance of the g_w quadrature.
pub const G_W_TOL: f64 = 1e-10;

/// P(|Y| ≤ β|X|) for independent X ~ N(w_c, 1), Y ~ N(w_cc, 1), β = √(v/(1−v)).
pub fn g_w(w: WedgeParams, v: f64) -> Result<f64> {
    check_fraction(v)?;
    if !(w.w_c.is_finite() && w.w_cc.is_finite()) {
        return Err(invalid("wedge mean must be finite"));
    }
    Ok(g_w_unchecked(w, v))
}

pub(crate) fn g_w_unchecked(w: WedgeParams, v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    if v == 1.0 {
        return 1.0;
    }
    let beta = (v / (1.0 - v)).sqrt();
    let (a, b) = (w.w_c, w.w_cc);
    let f = |x: f64| {
        let bx = beta * x.abs();
        // Φ(βx − b) − Φ(−βx − b), written to avoid cancellation in both tails.
        let mass = if b >= 0.0 { norm_cdf(bx - b) - norm_cdf(-bx - b) } else { norm_cdf(bx + b) - norm_cdf(-bx + b) };
        norm_pdf(x - a) * mass
    };
    let (lo, hi) = (a - 8.0, a + 8.0);
    let val = if lo < 0.0 && hi > 0.0 {
        integrate(&f, lo, 0.0, G_W_TOL / 2.0) + integrate(&f, 0.0, hi, G_W_TOL / 2.0)
    } else {
        integrate(&f, lo, hi, G_W_TOL)
    };
    val.clamp(0.0, 1.0)
}

/// Monte Carlo estimate of g_w(v) and its standard error.
pub fn g_w_monte_carlo<R: Rng + ?Sized>(w: WedgeParams, v: f64, samples: u64, rng: &mut R) -> (f64, f64) {
    let beta = (v / (1.0 - v)).sqrt();
    let mut hits = 0u64;
    for _ in 0..samples {
        let x: f64 = rng.sample::<f64, _>(StandardNormal) + w.w_c;
        let y: f64 = rng.sample::<f64, _>(StandardNormal) + w.w_cc;
        if y.abs() <= beta * x.abs() {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}

/// Variance ρ/(1−ρ) of each coordinate of the random wedge mean W.
pub fn w_variance(rho: f64) -> f64 {
    rho / (1.0 - rho)
}

/// E[g_W(v)] over W ~ N(0, ρ/(1−ρ)·I₂), by a tensor Gauss–Hermite rule on the W density.
pub fn expected_g_w(v: f64, rho: f64, nodes: usize) -> Result<f64> {
    check_fraction(v)?;
    if !(0.0..1.0).contains(&rho) {
        return Err(invalid(format!("correlation {rho} outside [0, 1)")));
    }
    let (x, wt) = gauss_hermite(nodes);
    let scale = (2.0 * w_variance(rho)).sqrt();
    let mut acc = 0.0;
    for (xi, wi) in x.iter().zip(&wt) {
        for (xj, wj) in x.iter().zip(&wt) {
            acc += wi * wj * g_w_unchecked(WedgeParams::new(scale * xi, scale * xj), v);
        }
    }
    Ok(acc / std::f64::consts::PI)
}
