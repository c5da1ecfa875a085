use crate::error::{invalid, Result};
use crate::numerics::{norm, PowerOptions, SeededRng};
use crate::relu_net::{Dataset, TwoLayerNet};
use crate::weight_fn::{tilde_g_empirical, WeightFunction};

use super::HessianOperator;

/// Absolute slack on `lhs ≤ rhs`.
const RHS_SLACK: f64 = 1e-8;

const CERT_SEED: u64 = 0xCE27_1F1C;

/// The flatness-to-regularity certificate at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Weighted path norm of the reduced form under the empirical `g`.
    pub lhs: f64,
    /// `λ_max/2 − 1/2 + (R + 1)·sqrt(2L)`.
    pub rhs: f64,
    pub holds: bool,
    pub lambda_max: f64,
    pub loss: f64,
    /// `λ_max` of the Gauss–Newton part of the Hessian.
    pub gauss_newton_lambda: f64,
    /// `1 + 2 Σ_k |v_k|·‖w_k‖·g̃(w_k/‖w_k‖, b_k/‖w_k‖)` with the one-sided empirical `g̃`.
    pub term_a_bound: f64,
    pub term_a_holds: bool,
    /// Both power iterations met their tolerance.
    pub converged: bool,
}

/// Evaluates `Σ|a_j| g(u_j, t_j) ≤ λ_max/2 − 1/2 + (R+1)·sqrt(2L)` at `net`.
///
/// `g` must be the empirical weight built from `data`'s inputs, and every
/// input must lie in the ball of radius `radius`.
pub fn regularity_certificate(net: &TwoLayerNet, data: &Dataset, radius: f64, g: &WeightFunction) -> Result<Certificate> {
    match g {
        WeightFunction::Empirical { points } if points.view() == data.inputs() => {}
        WeightFunction::Empirical { .. } => {
            return Err(invalid("certificate weight must be built from the training inputs"));
        }
        _ => return Err(invalid("certificate needs the empirical weight function")),
    }
    if !(radius > 0.0) || data.max_norm() > radius * (1.0 + 1e-12) {
        return Err(invalid(format!(
            "radius {radius} does not cover the inputs (max norm {})",
            data.max_norm()
        )));
    }

    let loss = net.loss(data)?;
    let lhs = net.to_reduced_form(radius)?.weighted_path_norm(g)?;

    let opts = PowerOptions::default();
    let mut rng = SeededRng::new(CERT_SEED);
    let full = HessianOperator::new(net, data)?.lambda_max(opts, None, &mut rng)?;
    let gn = HessianOperator::new(net, data)?
        .gauss_newton()
        .lambda_max(opts, None, &mut rng)?;

    let rhs = full.value / 2.0 - 0.5 + (radius + 1.0) * (2.0 * loss).sqrt();

    let xs = data.inputs();
    let mut term_a_bound = 1.0;
    for k in 0..net.width() {
        let w = net.w_row(k);
        let s = norm(w);
        if s == 0.0 {
            continue;
        }
        let u: Vec<f64> = w.iter().map(|x| x / s).collect();
        term_a_bound += 2.0 * net.v()[k].abs() * s * tilde_g_empirical(xs, &u, net.b()[k] / s);
    }

    Ok(Certificate {
        lhs,
        rhs,
        holds: lhs <= rhs + RHS_SLACK,
        lambda_max: full.value,
        loss,
        gauss_newton_lambda: gn.value,
        term_a_holds: gn.value >= term_a_bound * (1.0 - 1e-8),
        term_a_bound,
        converged: full.converged && gn.converged,
    })
}
