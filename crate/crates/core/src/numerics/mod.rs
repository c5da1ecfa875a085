//! Numerical building blocks shared by the rest of the crate.

mod eigen;
mod fit;
mod quadrature;
mod rng;
mod sampling;

pub use eigen::{power_iteration, power_iteration_from, EigenEstimate, PowerOptions};
pub use fit::{loglog_slope, LineFit};
pub use quadrature::quadrature_1d;
pub use rng::SeededRng;
pub(crate) use sampling::gaussian_direction;
pub use sampling::{sample_gaussian, sample_uniform_ball, sample_unit_sphere, unit_ball_volume};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Γ(k/2) for a positive integer `k`, by the half-integer recursion.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k > 0, "gamma_half needs a positive argument");
    let (mut value, mut arg) = if k % 2 == 0 {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt(), 0.5)
    };
    let target = k as f64 / 2.0;
    while arg < target {
        value *= arg;
        arg += 1.0;
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_half_matches_known_values() {
        let pi = std::f64::consts::PI;
        assert_eq!(gamma_half(2), 1.0);
        assert_eq!(gamma_half(4), 1.0);
        assert_eq!(gamma_half(6), 2.0);
        assert!((gamma_half(1) - pi.sqrt()).abs() < 1e-15);
        assert!((gamma_half(3) - pi.sqrt() / 2.0).abs() < 1e-15);
        assert!((gamma_half(5) - 0.75 * pi.sqrt()).abs() < 1e-15);
    }
}
