use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::SeededRng;
use crate::error::{invalid, Result};

/// `count` points drawn uniformly from the closed unit ball in ℝ^d, one per row.
///
/// Gaussian direction times a `U^{1/d}` radius.
pub fn sample_uniform_ball(rng: &mut SeededRng, d: usize, count: usize) -> Result<Array2<f64>> {
    if d == 0 || count == 0 {
        return Err(invalid(format!("ball sampling needs d >= 1 and count >= 1 (got d={d}, count={count})")));
    }
    let mut out = Array2::zeros((count, d));
    let inv_d = 1.0 / d as f64;
    for mut row in out.rows_mut() {
        let dir = gaussian_direction(rng, d);
        let u: f64 = rng.random();
        let radius = u.powf(inv_d);
        for (dst, src) in row.iter_mut().zip(&dir) {
            *dst = src * radius;
        }
    }
    Ok(out)
}

/// `count` directions drawn uniformly from the unit sphere S^{d-1}.
pub fn sample_unit_sphere(rng: &mut SeededRng, d: usize, count: usize) -> Result<Array2<f64>> {
    if d == 0 || count == 0 {
        return Err(invalid("sphere sampling needs d >= 1 and count >= 1"));
    }
    let mut out = Array2::zeros((count, d));
    for mut row in out.rows_mut() {
        let dir = gaussian_direction(rng, d);
        row.iter_mut().zip(&dir).for_each(|(dst, src)| *dst = *src);
    }
    Ok(out)
}

pub(crate) fn gaussian_direction(rng: &mut SeededRng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = super::norm(&v);
        if n > 0.0 && n.is_finite() {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// I.i.d. N(0, sigma²) draws.
pub fn sample_gaussian(rng: &mut SeededRng, sigma: f64, count: usize) -> Result<Vec<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(invalid(format!("noise level must be finite and non-negative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(vec![0.0; count]);
    }
    Ok((0..count)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            sigma * z
        })
        .collect())
}

/// Lebesgue volume of the unit ball in ℝ^d (d = 0 gives 1).
pub fn unit_ball_volume(d: usize) -> f64 {
    let pi = std::f64::consts::PI;
    pi.powf(d as f64 / 2.0) / super::gamma_half(d as u32 + 2)
}
