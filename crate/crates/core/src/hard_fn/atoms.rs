//! Boundary-localized ReLU atoms `φ(uᵀx − (1 − ε²))`, active only on a small
//! cap of the unit ball around the pole `u`.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::numerics::{dot, gamma_half, quadrature_1d};

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(invalid(format!("eps must lie in (0, 1/2], got {eps}")));
    }
    Ok(())
}

/// Atom value at `x`; the normalized atom is scaled by `ε^{-2}` so that its
/// peak over the unit ball (at `x = u`) is 1.
pub fn relu_atom_eval(u: &[f64], eps: f64, x: &[f64], normalized: bool) -> Result<f64> {
    check_eps(eps)?;
    if u.len() != x.len() {
        return Err(invalid("atom direction and point have different dimensions"));
    }
    Ok(atom_value(u, eps, x, normalized))
}

#[inline]
pub(crate) fn atom_value(u: &[f64], eps: f64, x: &[f64], normalized: bool) -> f64 {
    let e2 = eps * eps;
    let z = (dot(u, x) - (1.0 - e2)).max(0.0);
    if normalized {
        z / e2
    } else {
        z
    }
}

/// Volume of the unit ball in ℝ^{d−1} (1 for d = 1).
fn slice_volume(d: usize) -> f64 {
    PI.powf((d as f64 - 1.0) / 2.0) / gamma_half(d as u32 + 1)
}

/// `‖φ(uᵀ· − (1 − ε²))‖_{L²(B_1^d)}` (Lebesgue measure) for the unnormalized atom.
///
/// Slicing the cap along `u` at depth `δ` below the pole gives a
/// `(d−1)`-ball of radius `sqrt(2δ − δ²)`, so the squared norm is
/// `V_{d−1} ∫₀^{ε²} (ε² − δ)² (2δ − δ²)^{(d−1)/2} dδ`. `rel_tol` is relative
/// to the size of that integral.
pub fn atom_l2_norm(d: usize, eps: f64, rel_tol: f64) -> Result<f64> {
    check_eps(eps)?;
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let e2 = eps * eps;
    let p = (d as f64 - 1.0) / 2.0;
    let scale = e2.powi(3) * (2.0 * e2).powf(p) / 3.0;
    let integral = quadrature_1d(
        |delta| (e2 - delta).powi(2) * (2.0 * delta - delta * delta).max(0.0).powf(p),
        0.0,
        e2,
        rel_tol * scale,
    )?;
    Ok((slice_volume(d) * integral).sqrt())
}

/// `∫₀¹ (1 − s)² s^{(d−1)/2} ds = 2 / (a(a+1)(a+2))` with `a = (d+1)/2`.
fn beta_factor(d: usize) -> f64 {
    let a = (d as f64 + 1.0) / 2.0;
    2.0 / (a * (a + 1.0) * (a + 2.0))
}

/// Lower constant: `atom_l2_norm ≥ c₇ ε^{(d+5)/2}` for `ε ≤ 1/2`.
pub fn c7(d: usize) -> f64 {
    (slice_volume(d) * 1.75f64.powf((d as f64 - 1.0) / 2.0) * beta_factor(d)).sqrt()
}

/// Upper constant: `atom_l2_norm ≤ c₈ ε^{(d+5)/2}`.
pub fn c8(d: usize) -> f64 {
    (slice_volume(d) * 2f64.powf((d as f64 - 1.0) / 2.0) * beta_factor(d)).sqrt()
}

/// Weighted variation of one atom under `g = (1 − |t|)^{d+2}`: the single
/// neuron has `|a| = 1` (or `ε^{-2}`) and `t = 1 − ε²`.
pub fn atom_vg_norm(d: usize, eps: f64, normalized: bool) -> Result<f64> {
    check_eps(eps)?;
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let power = if normalized { 2 * d + 2 } else { 2 * d + 4 };
    Ok(eps.powi(power as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{sample_uniform_ball, SeededRng};

    #[test]
    fn pole_values() {
        let u = [0.0, 1.0, 0.0];
        assert!((relu_atom_eval(&u, 0.3, &u, false).unwrap() - 0.09).abs() < 1e-15);
        assert!((relu_atom_eval(&u, 0.3, &u, true).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(relu_atom_eval(&u, 0.3, &[0.0, 0.9, 0.0], true).unwrap(), 0.0);
        assert!(relu_atom_eval(&u, 0.6, &u, true).is_err());
        assert!(relu_atom_eval(&u, 0.3, &[1.0], true).is_err());
    }

    #[test]
    fn normalized_atom_peaks_at_one() {
        let mut rng = SeededRng::new(1);
        let xs = sample_uniform_ball(&mut rng, 3, 100_000).unwrap();
        let u = [0.6, 0.0, 0.8];
        let peak = xs
            .rows()
            .into_iter()
            .map(|x| relu_atom_eval(&u, 0.4, x.as_slice().unwrap(), true).unwrap())
            .fold(0.0, f64::max);
        assert!(peak <= 1.0 + 1e-12 && peak > 0.0);
    }

    #[test]
    fn one_dimensional_closed_form() {
        let v = atom_l2_norm(1, 0.3, 1e-12).unwrap();
        assert!((v - 0.3f64.powi(3) / 3f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn l2_sandwich() {
        for d in 1..=6 {
            for eps in [0.05, 0.1, 0.2, 0.5] {
                let v = atom_l2_norm(d, eps, 1e-12).unwrap();
                let s = eps.powf((d as f64 + 5.0) / 2.0);
                assert!(v >= c7(d) * s * (1.0 - 1e-10) && v <= c8(d) * s * (1.0 + 1e-10), "d={d} eps={eps}");
            }
        }
    }

    #[test]
    fn vg_values() {
        assert_eq!(atom_vg_norm(2, 0.5, false).unwrap(), 1.0 / 256.0);
        let ratio = atom_vg_norm(3, 0.2, true).unwrap() / atom_vg_norm(3, 0.2, false).unwrap();
        assert!((ratio - 25.0).abs() < 1e-9);
    }
}
