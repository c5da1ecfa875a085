//! The data-dependent weight `g(u, t) = min{g̃(u, t), g̃(−u, −t)}` where
//! `g̃(u, t) = P(Xᵀu > t)² · E[Xᵀu − t | Xᵀu > t] · sqrt(1 + ‖E[X | Xᵀu > t]‖²)`.
//!
//! Three variants: the power law `(1 − |t|)^{d+2}`, the exact value for the
//! uniform distribution on the unit ball, and the empirical value for a finite
//! sample.

mod analytic;
mod empirical;

pub use analytic::{
    c1, c2, c3, c4, c5, c_lower, c_upper, marginal_pdf, tail_probability, tilde_g_analytic,
    DEFAULT_QUAD_TOL,
};
pub use empirical::{g_empirical, tilde_g_empirical};

use ndarray::Array2;

use crate::error::{invalid, Result};
use crate::numerics::norm;

/// `(1 − |t|)^{d+2}` on `|t| ≤ 1`, zero outside.
pub fn g_simplified(d: usize, t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - t.abs()).powi(d as i32 + 2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightFunction {
    SimplifiedUniformBall { d: usize },
    AnalyticUniformBall { d: usize, quadrature_tol: f64 },
    Empirical { points: Array2<f64> },
}

impl WeightFunction {
    pub fn simplified(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("weight function needs d >= 1"));
        }
        Ok(Self::SimplifiedUniformBall { d })
    }

    pub fn analytic(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("weight function needs d >= 1"));
        }
        Ok(Self::AnalyticUniformBall {
            d,
            quadrature_tol: DEFAULT_QUAD_TOL,
        })
    }

    /// Empirical weight over the rows of `points`, which must lie in the unit ball.
    pub fn empirical(points: Array2<f64>) -> Result<Self> {
        empirical::validate(points.view())?;
        Ok(Self::Empirical { points })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::SimplifiedUniformBall { d } | Self::AnalyticUniformBall { d, .. } => *d,
            Self::Empirical { points } => points.ncols(),
        }
    }

    fn check_direction(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(invalid(format!("direction has dimension {}, expected {}", u.len(), self.dim())));
        }
        if (norm(u) - 1.0).abs() > 1e-9 {
            return Err(invalid("direction must be a unit vector"));
        }
        Ok(())
    }

    /// `g(u, t)`.
    pub fn eval(&self, u: &[f64], t: f64) -> Result<f64> {
        self.check_direction(u)?;
        match self {
            Self::SimplifiedUniformBall { d } => Ok(g_simplified(*d, t)),
            Self::AnalyticUniformBall { d, quadrature_tol } => {
                if t.abs() >= 1.0 {
                    return Ok(0.0);
                }
                Ok(tilde_g_analytic(*d, t, *quadrature_tol)?.min(tilde_g_analytic(*d, -t, *quadrature_tol)?))
            }
            Self::Empirical { points } => Ok(g_empirical(points.view(), u, t)),
        }
    }

    /// One-sided `g̃(u, t)`. The simplified variant has no one-sided form and
    /// returns the power law itself.
    pub fn tilde(&self, u: &[f64], t: f64) -> Result<f64> {
        self.check_direction(u)?;
        match self {
            Self::SimplifiedUniformBall { d } => Ok(g_simplified(*d, t)),
            Self::AnalyticUniformBall { d, quadrature_tol } => tilde_g_analytic(*d, t, *quadrature_tol),
            Self::Empirical { points } => Ok(tilde_g_empirical(points.view(), u, t)),
        }
    }
}
