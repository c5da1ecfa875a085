//! Exact weight for the uniform distribution on the unit ball. By rotational
//! symmetry everything reduces to the first-coordinate marginal
//! `c₁(d)·(1 − x²)^{(d−1)/2}`.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::numerics::{gamma_half, quadrature_1d};

/// Default relative accuracy of the conditional-moment integrals.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Normalizer `Γ(d/2 + 1) / (√π Γ((d+1)/2))` of the marginal density.
pub fn c1(d: usize) -> f64 {
    gamma_half(d as u32 + 2) / (PI.sqrt() * gamma_half(d as u32 + 1))
}

fn half_power(d: usize) -> f64 {
    (d as f64 + 1.0) / 2.0
}

/// Lower tail constant: `Q(x) ≥ c₂(1 − x)^{(d+1)/2}` for `x ∈ [3/4, 1)`.
pub fn c2(d: usize) -> f64 {
    c1(d) / (d as f64 + 1.0) * 1.75f64.powf(half_power(d))
}

/// Upper tail constant: `Q(x) ≤ c₃(1 − x)^{(d+1)/2}` for `x ∈ [3/4, 1)`.
pub fn c3(d: usize) -> f64 {
    c1(d) / (d as f64 + 1.0) * 2f64.powf((d as f64 + 2.0) / 2.0)
}

pub fn c4(d: usize) -> f64 {
    let d = d as f64;
    2.0 * (d + 1.0) / (d + 3.0) * 1.75f64.powf((d - 1.0) / 2.0) / 2f64.powf((d + 2.0) / 2.0)
}

pub fn c5(d: usize) -> f64 {
    let d = d as f64;
    2.0 * (d + 1.0) / (d + 3.0) * 2f64.powf((d - 1.0) / 2.0) / 1.75f64.powf((d + 1.0) / 2.0)
}

/// `g̃(t) ≥ c_L (1 − t)^{d+2}` on `[3/4, 1)`. The conditional-gap lower factor
/// `1 − c₅` is clipped at zero, where the bound becomes trivial.
pub fn c_lower(d: usize) -> f64 {
    c2(d).powi(2) * (1.0 - c5(d)).max(0.0) * 1.25
}

/// `g̃(t) ≤ c_U (1 − t)^{d+2}` on `[3/4, 1)`.
pub fn c_upper(d: usize) -> f64 {
    c3(d).powi(2) * (1.0 - c4(d)) * 2f64.sqrt()
}

pub fn marginal_pdf(d: usize, t: f64) -> f64 {
    if t.abs() >= 1.0 {
        // The d = 1 density is 1/2 on the closed interval; the endpoints are measure zero.
        return if d == 1 && t.abs() == 1.0 { 0.5 } else { 0.0 };
    }
    c1(d) * (1.0 - t * t).powf((d as f64 - 1.0) / 2.0)
}

/// `(1 − x²)^{(d−1)/2} ≤ 2^{(d−1)/2} (1 − x)^{(d−1)/2}` integrated from `x` to 1,
/// times `c₁`: a magnitude used to turn relative tolerances into absolute ones.
fn tail_scale(d: usize, x: f64, extra_power: i32) -> f64 {
    let alpha = (d as f64 - 1.0) / 2.0;
    let mut denom = alpha + 1.0;
    for j in 1..=extra_power {
        denom *= alpha + 1.0 + j as f64;
    }
    c1(d) * 2f64.powf(alpha) * (1.0 - x).powf(alpha + 1.0 + extra_power as f64) / denom
}

fn check_d(d: usize) -> Result<()> {
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    Ok(())
}

/// `Q(x) = P(X₁ > x)` for `X` uniform on the unit ball.
pub fn tail_probability(d: usize, x: f64) -> Result<f64> {
    check_d(d)?;
    tail_with_tol(d, x, 1e-12)
}

fn tail_with_tol(d: usize, x: f64, rel_tol: f64) -> Result<f64> {
    if x <= -1.0 {
        return Ok(1.0);
    }
    if x >= 1.0 {
        return Ok(0.0);
    }
    if x == 0.0 {
        return Ok(0.5);
    }
    if d == 1 {
        return Ok((1.0 - x) / 2.0);
    }
    quadrature_1d(|s| marginal_pdf(d, s), x, 1.0, rel_tol * tail_scale(d, x, 0))
}

/// One-sided `g̃(u, t)` for the uniform ball; independent of `u`.
pub fn tilde_g_analytic(d: usize, t: f64, tol: f64) -> Result<f64> {
    check_d(d)?;
    if !(tol > 0.0) {
        return Err(invalid("quadrature tolerance must be positive"));
    }
    if t >= 1.0 {
        return Ok(0.0);
    }
    if t <= -1.0 {
        // Event is the whole ball: Q = 1, E[X₁] = 0, gap = −t.
        return Ok(-t);
    }
    let q = tail_with_tol(d, t, tol)?;
    // Integrate the gap directly instead of subtracting t·Q from E[X₁; X₁ > t].
    let gap_mass = quadrature_1d(|s| (s - t) * marginal_pdf(d, s), t, 1.0, tol * tail_scale(d, t, 1))?;
    if q <= 0.0 || gap_mass <= 0.0 {
        return Ok(0.0);
    }
    let gap = gap_mass / q;
    let mean = t + gap;
    Ok(q * gap_mass * (1.0 + mean * mean).sqrt())
}
