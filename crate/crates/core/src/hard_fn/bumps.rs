//! Smooth univariate bumps packed into the boundary layer `[1 − ε, 1]`.
//!
//! The base bump is `Φ(x) = c·exp(−1/(1 − x²))` on `(−1, 1)` with `c` chosen so
//! that `∫|Φ''| = 1`. `Φ_{a,b}(x) = Φ((2x − a − b)/(b − a))` moves it onto
//! `(a, b)`, and bump `k` lives on `(a_{k−1}, a_k)` with `a_k = 1 − ε + kε²`.

use std::sync::OnceLock;

use super::atoms::check_eps;
use crate::error::{invalid, Result};
use crate::numerics::quadrature_1d;

const BUMP_TOL: f64 = 1e-9;

/// Unnormalized `exp(−1/(1 − x²))` and its second derivative.
fn raw(x: f64) -> f64 {
    let s = 1.0 - x * x;
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

fn raw_second(x: f64) -> f64 {
    let s = 1.0 - x * x;
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp() * (6.0 * x.powi(4) - 2.0) / s.powi(4)
    }
}

/// Zeros of `Φ''` in `(0, 1)`: `x = 3^{-1/4}`.
fn inflection() -> f64 {
    3f64.powf(-0.25)
}

struct BaseConstants {
    c: f64,
    l2: f64,
}

fn base() -> &'static BaseConstants {
    static CELL: OnceLock<BaseConstants> = OnceLock::new();
    CELL.get_or_init(|| {
        let x0 = inflection();
        // |Φ''| is smooth on each piece between its sign changes; use symmetry.
        let inner = quadrature_1d(|x| raw_second(x).abs(), 0.0, x0, BUMP_TOL * 1e-3).expect("smooth integrand");
        let outer = quadrature_1d(|x| raw_second(x).abs(), x0, 1.0, BUMP_TOL * 1e-3).expect("smooth integrand");
        let c = 1.0 / (2.0 * (inner + outer));
        let sq = quadrature_1d(|x| raw(x).powi(2), -1.0, 1.0, BUMP_TOL * 1e-3).expect("smooth integrand");
        BaseConstants { c, l2: c * sq.sqrt() }
    })
}

/// Normalizing constant `c` of the base bump.
pub fn bump_constant() -> f64 {
    base().c
}

/// `Φ(x)`.
pub fn base_bump(x: f64) -> f64 {
    base().c * raw(x)
}

pub fn base_bump_second(x: f64) -> f64 {
    base().c * raw_second(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BumpFamily {
    pub eps: f64,
    /// Number of bumps `⌊1/ε⌋`.
    pub count: usize,
}

/// Family of `⌊1/ε⌋` bumps of width `ε²` covering `[1 − ε, 1 − ε + ⌊1/ε⌋ε²]`.
pub fn univariate_bumps(eps: f64) -> Result<BumpFamily> {
    check_eps(eps)?;
    Ok(BumpFamily {
        eps,
        count: (1.0 / eps + 1e-12).floor() as usize,
    })
}

impl BumpFamily {
    /// `a_k = 1 − ε + kε²`.
    pub fn breakpoint(&self, k: usize) -> f64 {
        1.0 - self.eps + k as f64 * self.eps * self.eps
    }

    fn check(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.count {
            return Err(invalid(format!("bump index must lie in 1..={}, got {k}", self.count)));
        }
        Ok(())
    }

    /// Open support `(a_{k−1}, a_k)` of bump `k` (1-based).
    pub fn support(&self, k: usize) -> Result<(f64, f64)> {
        self.check(k)?;
        Ok((self.breakpoint(k - 1), self.breakpoint(k)))
    }

    fn local(&self, k: usize, x: f64) -> Result<(f64, f64)> {
        let (a, b) = self.support(k)?;
        Ok(((2.0 * x - a - b) / (b - a), b - a))
    }

    pub fn eval(&self, k: usize, x: f64) -> Result<f64> {
        let (s, _) = self.local(k, x)?;
        Ok(base_bump(s))
    }

    pub fn second_derivative(&self, k: usize, x: f64) -> Result<f64> {
        let (s, width) = self.local(k, x)?;
        Ok(base_bump_second(s) * (2.0 / width).powi(2))
    }

    /// `∫|Φ_k''| = 2/(b − a) = 2/ε²` by the chain rule.
    pub fn tv2(&self) -> f64 {
        2.0 / (self.eps * self.eps)
    }

    /// `‖Φ_k‖_{L²} = ε·D` with `D = ‖Φ‖/√2`.
    pub fn l2_norm(&self) -> f64 {
        self.eps * base().l2 / 2f64.sqrt()
    }

    /// `D = ‖Φ‖_{L²}/√2`.
    pub fn d_constant(&self) -> f64 {
        base().l2 / 2f64.sqrt()
    }

    /// Bound `ε³·TV² = 2ε` on `∫|Φ_k''|(1 − |x|)³`, since `1 − |x| ≤ ε` on the support.
    pub fn weighted_variation_bound(&self) -> f64 {
        self.eps.powi(3) * self.tv2()
    }

    fn integrate(&self, k: usize, f: impl Fn(f64) -> f64) -> Result<f64> {
        let (a, b) = self.support(k)?;
        let width = b - a;
        let x0 = inflection();
        // Split at the sign changes of Φ'' so every piece is smooth.
        let cuts = [-1.0, -x0, x0, 1.0].map(|s| a + (s + 1.0) * width / 2.0);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += quadrature_1d(&f, w[0], w[1], 1e-14 * self.tv2().max(1.0))?;
        }
        Ok(total)
    }

    /// `∫|Φ_k''|` by quadrature.
    pub fn tv2_quadrature(&self, k: usize) -> Result<f64> {
        self.integrate(k, |x| self.second_derivative(k, x).map(f64::abs).unwrap_or(f64::NAN))
    }

    /// `∫|Φ_k''|(1 − |x|)³` by quadrature.
    pub fn weighted_variation_quadrature(&self, k: usize) -> Result<f64> {
        self.integrate(k, |x| {
            self.second_derivative(k, x).map(f64::abs).unwrap_or(f64::NAN) * (1.0 - x.abs()).powi(3)
        })
    }

    /// `‖Φ_k‖_{L²}` by quadrature.
    pub fn l2_quadrature(&self, k: usize) -> Result<f64> {
        let (a, b) = self.support(k)?;
        let sq = quadrature_1d(|x| self.eval(k, x).map(|v| v * v).unwrap_or(f64::NAN), a, b, 1e-16)?;
        Ok(sq.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_matches_derivative_peak() {
        // ∫|Φ''| = 4·max|Φ'| and Φ' peaks at the inflection point.
        let x = inflection();
        let s = 1.0 - x * x;
        let peak = bump_constant() * (-1.0 / s).exp() * 2.0 * x / (s * s);
        assert!((4.0 * peak - 1.0).abs() < 1e-9);
    }

    #[test]
    fn supports_and_counts() {
        let fam = univariate_bumps(0.2).unwrap();
        assert_eq!(fam.count, 5);
        for k in 1..=fam.count {
            let (a, b) = fam.support(k).unwrap();
            for i in 0..=200 {
                let x = -1.0 + 2.0 * i as f64 / 200.0;
                if x <= a || x >= b {
                    assert_eq!(fam.eval(k, x).unwrap(), 0.0);
                }
            }
            assert!(fam.eval(k, 0.5 * (a + b)).unwrap() > 0.0);
        }
        assert!(fam.eval(0, 0.9).is_err());
        assert!(univariate_bumps(0.0).is_err());
    }

    #[test]
    fn certificates_match_quadrature() {
        for eps in [0.5, 0.2, 0.1] {
            let fam = univariate_bumps(eps).unwrap();
            for k in 1..=fam.count {
                let tv = fam.tv2_quadrature(k).unwrap();
                assert!((tv - fam.tv2()).abs() < 1e-6 * fam.tv2(), "eps={eps} k={k}: {tv}");
                let l2 = fam.l2_quadrature(k).unwrap();
                assert!((l2 - fam.l2_norm()).abs() < 1e-9 * fam.l2_norm());
                assert!(fam.weighted_variation_quadrature(k).unwrap() <= fam.weighted_variation_bound());
            }
        }
    }
}
