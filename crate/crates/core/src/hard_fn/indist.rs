use super::codes::hamming;
use super::family::HardFamily;
use crate::error::{invalid, Result};
use crate::numerics::{dot, sample_uniform_ball, SeededRng};
use crate::weight_fn::tail_probability;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Indistinguishability {
    /// `(1 − q)^n` with `q = d_H·Q(1 − ε²)`, the chance that no sample lands
    /// where the two members differ.
    pub closed_form: f64,
    /// Share of trials in which all `n` samples avoided the disagreement caps.
    pub monte_carlo: f64,
    /// Binomial standard error of `monte_carlo` at the closed-form probability.
    pub std_error: f64,
}

pub fn indistinguishability_estimate(
    family: &HardFamily,
    xi: &[i8],
    other: &[i8],
    n: usize,
    trials: usize,
    rng: &mut SeededRng,
) -> Result<Indistinguishability> {
    let k = family.packing.len();
    if xi.len() != k || other.len() != k {
        return Err(invalid("sign vectors do not match the family"));
    }
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let eps = family.eps();
    let cut = 1.0 - eps * eps;
    let differing: Vec<&Vec<f64>> = family
        .packing
        .centers
        .iter()
        .zip(xi.iter().zip(other))
        .filter(|(_, (a, b))| a != b)
        .map(|(u, _)| u)
        .collect();
    let q = hamming(xi, other) as f64 * tail_probability(family.dim(), cut)?;
    let closed_form = (1.0 - q).max(0.0).powi(n as i32);

    let mut clean = 0usize;
    if differing.is_empty() || n == 0 {
        clean = trials;
    } else {
        for _ in 0..trials {
            let xs = sample_uniform_ball(rng, family.dim(), n)?;
            let hit = xs.rows().into_iter().any(|x| {
                let x = x.as_slice().expect("standard layout");
                differing.iter().any(|u| dot(u, x) > cut)
            });
            if !hit {
                clean += 1;
            }
        }
    }
    let p = closed_form;
    Ok(Indistinguishability {
        closed_form,
        monte_carlo: clean as f64 / trials as f64,
        std_error: (p * (1.0 - p) / trials as f64).sqrt(),
    })
}

/// `KL(P_ξ ‖ P_ξ') = n·‖f_ξ − f_ξ'‖² / (2σ²)` for Gaussian noise.
pub fn kl_divergence(n: usize, distance_sq: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(invalid("noise level must be positive"));
    }
    Ok(n as f64 * distance_sq / (2.0 * sigma * sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hard_fn::build_hard_family;

    #[test]
    fn identical_members_are_indistinguishable() {
        let fam = build_hard_family(3, 0.3, 1.0, &mut SeededRng::new(1)).unwrap();
        let xi = &fam.signs.codewords[0];
        let r = indistinguishability_estimate(&fam, xi, xi, 50, 100, &mut SeededRng::new(2)).unwrap();
        assert_eq!(r.closed_form, 1.0);
        assert_eq!(r.monte_carlo, 1.0);
    }

    #[test]
    fn closed_form_decreases_in_n_and_matches_simulation() {
        let fam = build_hard_family(3, 0.3, 1.0, &mut SeededRng::new(1)).unwrap();
        let (a, b) = (&fam.signs.codewords[0], &fam.signs.codewords[1]);
        let mut prev = 1.0;
        for n in [1, 5, 20, 50] {
            let r = indistinguishability_estimate(&fam, a, b, n, 1, &mut SeededRng::new(3)).unwrap();
            assert!(r.closed_form <= prev);
            prev = r.closed_form;
        }
        let r = indistinguishability_estimate(&fam, a, b, 50, 4000, &mut SeededRng::new(4)).unwrap();
        assert!((r.closed_form - r.monte_carlo).abs() <= 3.0 * r.std_error, "{r:?}");
    }

    #[test]
    fn kl_helper() {
        assert_eq!(kl_divergence(10, 0.2, 1.0).unwrap(), 1.0);
        assert!(kl_divergence(10, 0.2, 0.0).is_err());
    }
}
