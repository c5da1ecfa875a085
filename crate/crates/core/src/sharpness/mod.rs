//! Hessian-vector products of the squared loss, the sharpness `λ_max(∇²L)`,
//! the linear-stability predicate, and the flatness-to-regularity certificate.

mod certificate;
mod hvp;

pub use certificate::{regularity_certificate, Certificate};
pub use hvp::{hessian_vector_product, HessianOperator, BOUNDARY_TOL};

use crate::error::{invalid, Result};
use crate::numerics::{EigenEstimate, PowerOptions, SeededRng};
use crate::relu_net::{Dataset, TwoLayerNet};

/// Seed of the starting vector when the caller does not supply a stream.
const DEFAULT_START_SEED: u64 = 0x5AA4_9E55;

/// `λ_max(∇²L)` by shifted power iteration on Hessian-vector products.
/// Non-convergence is reported through `converged == false`.
pub fn sharpness(net: &TwoLayerNet, data: &Dataset, rel_tol: f64) -> Result<EigenEstimate> {
    let op = HessianOperator::new(net, data)?;
    let opts = PowerOptions {
        rel_tol,
        ..PowerOptions::default()
    };
    op.lambda_max(opts, None, &mut SeededRng::new(DEFAULT_START_SEED))
}

/// `λ ≤ 2/η`.
pub fn stable_at(lambda_max: f64, eta: f64) -> Result<bool> {
    if !(eta > 0.0) {
        return Err(invalid(format!("step size must be positive, got {eta}")));
    }
    Ok(lambda_max <= 2.0 / eta)
}

/// Linear stability of GD with step `eta` at `net`.
pub fn is_stable(net: &TwoLayerNet, data: &Dataset, eta: f64) -> Result<bool> {
    if !(eta > 0.0) {
        return Err(invalid(format!("step size must be positive, got {eta}")));
    }
    let est = sharpness(net, data, PowerOptions::default().rel_tol)?;
    stable_at(est.value, eta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stability_threshold() {
        assert!(stable_at(2.0, 1.0).unwrap());
        assert!(!stable_at(3.0, 1.0).unwrap());
        assert!(stable_at(1.0, 0.0).is_err());
        for lambda in [0.1, 1.0, 3.7, 40.0] {
            let mut was_stable = false;
            for eta in [2.0, 1.0, 0.5, 0.1, 0.01] {
                let s = stable_at(lambda, eta).unwrap();
                assert!(s || !was_stable);
                was_stable = s;
            }
        }
    }
}
