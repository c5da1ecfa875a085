use std::f64::consts::PI;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::numerics::{dot, gaussian_direction, norm, SeededRng};

/// Directions whose caps `{x : uᵀx > 1 − ε²}` are pairwise disjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct CapPacking {
    pub d: usize,
    pub eps: f64,
    pub centers: Vec<Vec<f64>>,
}

/// How many consecutive rejected candidates end the greedy search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateBudget {
    /// `50·(centers so far) + 1000`.
    Adaptive,
    Fixed(usize),
}

impl CandidateBudget {
    fn limit(self, kept: usize) -> usize {
        match self {
            Self::Adaptive => 50 * kept + 1000,
            Self::Fixed(n) => n,
        }
    }
}

/// Angular radius `θ = arccos(1 − ε²)` of one cap.
pub fn cap_angle(eps: f64) -> f64 {
    (1.0 - eps * eps).acos()
}

/// Largest admissible dot product between two centers, `cos 2θ`.
pub fn max_center_dot(eps: f64) -> f64 {
    (2.0 * cap_angle(eps)).cos()
}

impl CapPacking {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Largest pairwise dot product minus `cos 2θ`; must be ≤ 1e−12.
    pub fn audit(&self) -> Result<()> {
        let limit = max_center_dot(self.eps) + 1e-12;
        for (i, a) in self.centers.iter().enumerate() {
            if a.len() != self.d || (norm(a) - 1.0).abs() > 1e-12 {
                return Err(invalid(format!("center {i} is not a unit vector in R^{}", self.d)));
            }
            for (j, b) in self.centers.iter().enumerate().skip(i + 1) {
                let c = dot(a, b);
                if c > limit {
                    return Err(invalid(format!("centers {i} and {j} overlap (dot {c} > {limit})")));
                }
            }
        }
        Ok(())
    }
}

/// Greedy maximal packing of ε²-caps on `S^{d−1}`.
///
/// For `d ≥ 3` random directions are accepted when their angle to every kept
/// center is at least `2θ`, until `budget` consecutive candidates fail. On the
/// circle the optimum is known, so `d = 2` returns `⌊π/θ⌋` equally spaced
/// directions with a random phase.
///
/// Any `0 < ε < 1` is accepted: the caps are well defined whenever the
/// threshold `1 − ε²` is positive, and the circle case `2θ = π/2` needs
/// `ε ≈ 0.54`.
pub fn pack_caps(d: usize, eps: f64, rng: &mut SeededRng, budget: CandidateBudget) -> Result<CapPacking> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    if d < 2 {
        return Err(invalid("cap packing needs d >= 2; use univariate bumps for d = 1"));
    }
    let two_theta = 2.0 * cap_angle(eps);
    if d == 2 {
        let count = ((2.0 * PI) / two_theta + 1e-9).floor() as usize;
        let phase: f64 = rng.random::<f64>() * 2.0 * PI;
        let step = 2.0 * PI / count as f64;
        let centers = (0..count)
            .map(|i| {
                let a = phase + step * i as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
        return Ok(CapPacking { d, eps, centers });
    }
    let limit = two_theta.cos();
    let mut centers: Vec<Vec<f64>> = Vec::new();
    let mut rejected = 0usize;
    while rejected < budget.limit(centers.len()) {
        let cand = gaussian_direction(rng, d);
        if centers.iter().all(|c| dot(c, &cand) <= limit) {
            centers.push(cand);
            rejected = 0;
        } else {
            rejected += 1;
        }
    }
    Ok(CapPacking { d, eps, centers })
}
