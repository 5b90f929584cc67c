//! Born-dead probability of a single ReLU neuron on the ball `B_r(0)`.
//!
//! A neuron `φ(w·x + b)` with `(w, b)` drawn from an isotropic distribution is
//! dead on `B_r(0)` when `r‖w‖ + b ≤ 0`. Its probability depends only on the
//! direction of `(w, b)`, so the variance of a normal initialization drops out.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mathkit::{gamma_ratio, integrate_sin_power};

/// Exact born-dead probability together with its closed-form bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdpResult {
    pub exact: f64,
    pub lower: f64,
    pub upper: f64,
    /// `tan⁻¹(1/r)`
    pub alpha_r: f64,
    pub d: u32,
    pub r: f64,
}

/// `tan⁻¹(1/r)`, the half-angle of the dead cone.
pub fn alpha_r(r: f64) -> f64 {
    (1.0 / r).atan()
}

fn check(d: u32, r: f64) -> Result<()> {
    if d == 0 {
        return Err(Error::domain("input dimension must be at least 1"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("radius must be positive and finite, got {r}")));
    }
    Ok(())
}

/// Probability that a neuron with isotropic `(w, b) ∈ ℝ^{d+1}` is dead on `B_r(0)`.
pub fn bdp_exact(d: u32, r: f64) -> Result<f64> {
    check(d, r)?;
    let integral = integrate_sin_power(alpha_r(r), d)?;
    Ok(gamma_ratio(d) * integral / PI.sqrt())
}

/// `((sin α)^d / (π d), √(d/2π) · α · (sin α)^{d-1})`.
pub fn bdp_bounds(d: u32, r: f64) -> Result<(f64, f64)> {
    check(d, r)?;
    let a = alpha_r(r);
    let s = a.sin();
    let df = d as f64;
    let lower = s.powi(d as i32) / (PI * df);
    let upper = (df / (2.0 * PI)).sqrt() * a * s.powi(d as i32 - 1);
    Ok((lower, upper))
}

pub fn bdp(d: u32, r: f64) -> Result<BdpResult> {
    let exact = bdp_exact(d, r)?;
    let (lower, upper) = bdp_bounds(d, r)?;
    Ok(BdpResult {
        exact,
        lower,
        upper,
        alpha_r: alpha_r(r),
        d,
        r,
    })
}

/// Width that leaves `m` active neurons on average.
///
/// With bias the target `m / (1 - p̂)` is rounded up; without bias no neuron is
/// born dead and `m` is returned as is.
pub fn suggested_width(m: u64, d: u32, r: f64, with_bias: bool) -> Result<u64> {
    if m == 0 {
        return Err(Error::domain("required active count must be at least 1"));
    }
    if !with_bias {
        check(d, r)?;
        return Ok(m);
    }
    let p = bdp_exact(d, r)?;
    let target = m as f64 / (1.0 - p);
    // snap values that are integral up to rounding noise, e.g. 200 / (2/3)
    let nearest = target.round();
    if (target - nearest).abs() <= 1e-9 * target {
        Ok(nearest as u64)
    } else {
        Ok(target.ceil() as u64)
    }
}

/// Whether `1 - (1-δ)^{1/m} < exp(-C_r d) / (π d)` with `C_r = -log sin(tan⁻¹(1/r))`.
///
/// When it holds, a width-`m` network with biased initialization keeps all of its
/// `m` neurons with probability below `1 - δ`, so over-parameterization is required.
pub fn overparam_condition(m: u64, d: u32, r: f64, delta: f64) -> Result<bool> {
    check(d, r)?;
    if m == 0 {
        return Err(Error::domain("m must be at least 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    let lhs = -((-delta).ln_1p() / m as f64).exp_m1();
    let c_r = -alpha_r(r).sin().ln();
    let rhs = (-c_r * d as f64).exp() / (PI * d as f64);
    Ok(lhs < rhs)
}
