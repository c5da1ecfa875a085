use ndarray::{Array2, ArrayView2};

use crate::error::{invalid, Result};
use crate::numerics::{dot, norm};

/// Inputs may sit on the unit sphere up to rounding.
const BALL_SLACK: f64 = 1e-12;

/// Linear ground truth `f_0(x) = wᵀx` with `‖w‖ = 1`, plus the label noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub direction: Vec<f64>,
    pub sigma: f64,
}

impl GroundTruth {
    pub fn new(direction: Vec<f64>, sigma: f64) -> Result<Self> {
        if (norm(&direction) - 1.0).abs() > 1e-12 {
            return Err(invalid("ground-truth direction must be a unit vector"));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("noise level must be non-negative, got {sigma}")));
        }
        Ok(Self { direction, sigma })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.direction, x)
    }
}

/// Training sample `(x_i, y_i)` with inputs in the closed unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Array2<f64>,
    labels: Vec<f64>,
    truth: Option<GroundTruth>,
}

impl Dataset {
    /// `inputs` holds one point per row.
    pub fn new(inputs: Array2<f64>, labels: Vec<f64>) -> Result<Self> {
        let (n, d) = inputs.dim();
        if n == 0 || d == 0 {
            return Err(invalid("dataset needs at least one point of positive dimension"));
        }
        if labels.len() != n {
            return Err(invalid(format!("{n} inputs but {} labels", labels.len())));
        }
        for (i, row) in inputs.rows().into_iter().enumerate() {
            let r = row.dot(&row).sqrt();
            if !(r <= 1.0 + BALL_SLACK) {
                return Err(invalid(format!("input {i} has norm {r}, outside the unit ball")));
            }
        }
        if labels.iter().any(|y| !y.is_finite()) {
            return Err(invalid("labels must be finite"));
        }
        Ok(Self {
            inputs,
            labels,
            truth: None,
        })
    }

    pub fn with_truth(mut self, truth: GroundTruth) -> Result<Self> {
        if truth.direction.len() != self.dim() {
            return Err(invalid("ground-truth direction does not match the input dimension"));
        }
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn inputs(&self) -> ArrayView2<'_, f64> {
        self.inputs.view()
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn truth(&self) -> Option<&GroundTruth> {
        self.truth.as_ref()
    }

    /// Largest input norm, i.e. the smallest admissible `R`.
    pub fn max_norm(&self) -> f64 {
        self.inputs
            .rows()
            .into_iter()
            .map(|r| r.dot(&r).sqrt())
            .fold(0.0, f64::max)
    }

    /// Same inputs, new labels.
    pub fn relabel(&self, labels: Vec<f64>) -> Result<Self> {
        let mut out = Self::new(self.inputs.clone(), labels)?;
        out.truth = self.truth.clone();
        Ok(out)
    }
}
