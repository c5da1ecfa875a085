//! Curvature, regularity and lower-bound laboratory for two-layer ReLU networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: seeded sampling, power iteration, adaptive quadrature, log-log fits.
//! - [`relu_net`]: the network, its loss and gradient, and the reduced (atom) form.
//! - [`weight_fn`]: the data-dependent weight `g(u, t)` in its three variants.
//! - [`sharpness`]: Hessian-vector products, `λ_max`, stability and the regularity certificate.
//! - [`trainer`]: full-batch gradient descent with clipping and weight decay.
//! - [`shattering`]: per-neuron activation statistics.
//! - [`hard_fn`]: boundary ReLU atoms, cap packings, sign codes and hard families.
//! - [`rates`]: exact rate exponents.
//! - [`harness`]: datasets, sweeps, persistence and the command line.

pub mod error;
pub mod hard_fn;
pub mod harness;
pub mod numerics;
pub mod rates;
pub mod relu_net;
pub mod shattering;
pub mod sharpness;
pub mod trainer;
pub mod weight_fn;

pub use error::{Error, Result};
pub use numerics::SeededRng;
pub use relu_net::{Dataset, ReducedForm, TwoLayerNet};
pub use trainer::{TrainConfig, TrainLog};
pub use weight_fn::WeightFunction;
