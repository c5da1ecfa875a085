//! Matrix-free power iteration for the largest algebraic eigenvalue of a
//! symmetric operator.

use super::sampling::gaussian_direction;
use super::{dot, norm, SeededRng};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy)]
pub struct PowerOptions {
    /// Stop once `‖Av − ρv‖ ≤ rel_tol·|ρ|`.
    pub rel_tol: f64,
    pub max_iters: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            max_iters: 2000,
        }
    }
}

/// Outcome of a power iteration. A run that exhausts its budget still carries
/// its last estimate, with `converged == false`.
#[derive(Debug, Clone)]
pub struct EigenEstimate {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

struct Dominant {
    rayleigh: f64,
    image_norm: f64,
    vector: Vec<f64>,
    iterations: usize,
    residual: f64,
    converged: bool,
}

fn dominant<F>(apply: &mut F, shift: f64, mut v: Vec<f64>, opts: PowerOptions) -> Dominant
where
    F: FnMut(&[f64], &mut [f64]),
{
    let m = v.len();
    let mut y = vec![0.0; m];
    let mut rayleigh = 0.0;
    let mut image_norm = 0.0;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iters.max(1) {
        apply(&v, &mut y);
        if shift != 0.0 {
            y.iter_mut().zip(&v).for_each(|(yi, vi)| *yi += shift * vi);
        }
        rayleigh = dot(&v, &y);
        image_norm = norm(&y);
        residual = y
            .iter()
            .zip(&v)
            .map(|(yi, vi)| (yi - rayleigh * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        if image_norm == 0.0 || residual <= opts.rel_tol * rayleigh.abs() {
            return Dominant {
                rayleigh,
                image_norm,
                vector: v,
                iterations: it,
                residual,
                converged: true,
            };
        }
        for (vi, yi) in v.iter_mut().zip(&y) {
            *vi = yi / image_norm;
        }
    }
    Dominant {
        rayleigh,
        image_norm,
        vector: v,
        iterations: opts.max_iters,
        residual,
        converged: false,
    }
}

/// Largest algebraic eigenvalue of the symmetric map `apply` on ℝ^m.
///
/// A first pass runs plain power iteration. If it settles on a non-negative
/// eigenvalue that is the answer; otherwise the operator is shifted by an
/// estimate of its spectral radius so that every eigenvalue becomes
/// non-negative, and the shift is subtracted afterwards.
pub fn power_iteration<F>(apply: F, m: usize, opts: PowerOptions, rng: &mut SeededRng) -> Result<EigenEstimate>
where
    F: FnMut(&[f64], &mut [f64]),
{
    power_iteration_from(apply, m, None, opts, rng)
}

/// As [`power_iteration`], optionally warm-started from `start`.
pub fn power_iteration_from<F>(
    mut apply: F,
    m: usize,
    start: Option<&[f64]>,
    opts: PowerOptions,
    rng: &mut SeededRng,
) -> Result<EigenEstimate>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if m == 0 {
        return Err(invalid("power iteration needs a positive dimension"));
    }
    if !(opts.rel_tol > 0.0) {
        return Err(invalid("power iteration tolerance must be positive"));
    }
    let initial = match start {
        Some(s) if s.len() == m && norm(s) > 0.0 => {
            let n = norm(s);
            s.iter().map(|x| x / n).collect()
        }
        Some(s) if s.len() != m => {
            return Err(invalid(format!("warm start has length {}, expected {m}", s.len())));
        }
        _ => gaussian_direction(rng, m),
    };

    let first = dominant(&mut apply, 0.0, initial, opts);
    if first.converged && first.rayleigh >= 0.0 {
        return Ok(EigenEstimate {
            value: first.rayleigh,
            vector: first.vector,
            iterations: first.iterations,
            residual: first.residual,
            converged: true,
        });
    }

    // ‖Av‖ ≤ ρ(A); pad it so the shifted operator is positive semidefinite.
    let shift = 1.05 * first.image_norm.max(first.rayleigh.abs());
    let second = dominant(&mut apply, shift, gaussian_direction(rng, m), opts);
    let iterations = first.iterations + second.iterations;
    Ok(EigenEstimate {
        value: second.rayleigh - shift,
        vector: second.vector,
        iterations,
        residual: second.residual,
        converged: second.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(mat: &[Vec<f64>]) -> impl FnMut(&[f64], &mut [f64]) + '_ {
        move |x: &[f64], y: &mut [f64]| {
            for (yi, row) in y.iter_mut().zip(mat) {
                *yi = dot(row, x);
            }
        }
    }

    #[test]
    fn diagonal_two_by_two() {
        let mat = vec![vec![2.0, 0.0], vec![0.0, 1.0]];
        let mut rng = SeededRng::new(0);
        let est = power_iteration(dense(&mat), 2, PowerOptions::default(), &mut rng).unwrap();
        assert!(est.converged);
        assert!((est.value - 2.0).abs() < 1e-8);
        assert!((est.vector[0].abs() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rank_one_map() {
        let v = [1.0, -2.0, 0.5, 3.0];
        let apply = |x: &[f64], y: &mut [f64]| {
            let s = dot(&v, x);
            y.iter_mut().zip(&v).for_each(|(yi, vi)| *yi = vi * s);
        };
        let mut rng = SeededRng::new(1);
        let est = power_iteration(apply, 4, PowerOptions::default(), &mut rng).unwrap();
        assert!((est.value - dot(&v, &v)).abs() < 1e-8 * dot(&v, &v));
    }

    #[test]
    fn negative_dominant_eigenvalue_is_not_returned() {
        // Spectrum {-5, 1, 0.5}: the largest algebraic eigenvalue is 1.
        let mat = vec![vec![-5.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 0.5]];
        let mut rng = SeededRng::new(2);
        let est = power_iteration(dense(&mat), 3, PowerOptions::default(), &mut rng).unwrap();
        assert!(est.converged);
        assert!((est.value - 1.0).abs() < 1e-6, "{}", est.value);
    }

    #[test]
    fn all_negative_spectrum() {
        let mat = vec![vec![-3.0, 0.0], vec![0.0, -1.0]];
        let mut rng = SeededRng::new(3);
        let est = power_iteration(dense(&mat), 2, PowerOptions::default(), &mut rng).unwrap();
        assert!((est.value + 1.0).abs() < 1e-6, "{}", est.value);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let mat = vec![vec![1.0, 0.0], vec![0.0, 0.999_999]];
        let mut rng = SeededRng::new(4);
        let opts = PowerOptions {
            rel_tol: 1e-14,
            max_iters: 5,
        };
        let est = power_iteration(dense(&mat), 2, opts, &mut rng).unwrap();
        assert!(!est.converged);
        assert!(est.value.is_finite());
    }

    #[test]
    fn zero_dimension_rejected() {
        let mut rng = SeededRng::new(5);
        assert!(power_iteration(|_, _| {}, 0, PowerOptions::default(), &mut rng).is_err());
    }
}
