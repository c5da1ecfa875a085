//! Lower-bound constructions: boundary ReLU atoms, spherical-cap packings,
//! sign codes, the multivariate hard family, univariate bumps, and the
//! indistinguishability estimate.

mod atoms;
mod bumps;
mod codes;
mod family;
mod indist;
mod packing;

pub use atoms::{atom_l2_norm, atom_vg_norm, c7, c8, relu_atom_eval};
pub use bumps::{base_bump, base_bump_second, bump_constant, univariate_bumps, BumpFamily};
pub use codes::{
    hamming, min_distance_for, sign_family, target_size, varshamov_gilbert, SignFamily, EXHAUSTIVE_MAX_LEN,
    MAX_CODEWORDS,
};
pub use family::{build_hard_family, parse_manifest, HardFamily, MAX_FAMILY_SIZE};
pub use indist::{indistinguishability_estimate, kl_divergence, Indistinguishability};
pub use packing::{cap_angle, max_center_dot, pack_caps, CandidateBudget, CapPacking};
