use crate::error::{invalid, Result};
use crate::numerics::{dot, norm};
use crate::weight_fn::WeightFunction;

use super::TwoLayerNet;

/// Componentwise tolerance for treating two normalized atoms as the same.
pub const MERGE_TOL: f64 = 1e-12;

/// `a·max(0, uᵀx − t)` with `‖u‖ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub a: f64,
    pub u: Vec<f64>,
    pub t: f64,
}

/// `Σ_j a_j·max(0, u_jᵀx − t_j) + cᵀx + c0`, equal to the source network on
/// the closed ball of radius `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedForm {
    pub atoms: Vec<Atom>,
    pub c: Vec<f64>,
    pub c0: f64,
    pub radius: f64,
}

impl ReducedForm {
    pub(super) fn from_net(net: &TwoLayerNet, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("radius must be positive, got {radius}")));
        }
        let d = net.dim();
        let mut c = vec![0.0; d];
        let mut c0 = net.beta();
        let mut atoms: Vec<Atom> = Vec::new();
        for k in 0..net.width() {
            let (w, b, v) = (net.w_row(k), net.b()[k], net.v()[k]);
            let s = norm(w);
            if s == 0.0 {
                c0 += v * (-b).max(0.0);
                continue;
            }
            let t = b / s;
            let a = v * s;
            if t > radius {
                continue;
            }
            let u: Vec<f64> = w.iter().map(|x| x / s).collect();
            if t < -radius {
                // Always active on the ball: a(uᵀx − t) is affine.
                c.iter_mut().zip(&u).for_each(|(ci, ui)| *ci += a * ui);
                c0 -= a * t;
                continue;
            }
            let same = |other: &Atom| {
                (other.t - t).abs() <= MERGE_TOL
                    && other.u.iter().zip(&u).all(|(p, q)| (p - q).abs() <= MERGE_TOL)
            };
            match atoms.iter_mut().find(|other| same(other)) {
                Some(existing) => existing.a += a,
                None => atoms.push(Atom { a, u, t }),
            }
        }
        atoms.retain(|atom| atom.a != 0.0);
        Ok(Self { atoms, c, c0, radius })
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.c.len() {
            return Err(invalid("input dimension does not match the reduced form"));
        }
        let atoms: f64 = self
            .atoms
            .iter()
            .map(|atom| atom.a * super::relu(dot(&atom.u, x) - atom.t))
            .sum();
        Ok(atoms + dot(&self.c, x) + self.c0)
    }

    /// `Σ_j |a_j|`.
    pub fn path_norm(&self) -> f64 {
        self.atoms.iter().map(|atom| atom.a.abs()).sum()
    }

    /// `Σ_j |a_j|·g(u_j, t_j)`, an upper bound on the weighted variation seminorm.
    pub fn weighted_path_norm(&self, g: &WeightFunction) -> Result<f64> {
        self.weighted_path_norm_by(|u, t| g.eval(u, t))
    }

    pub fn weighted_path_norm_by<G>(&self, mut g: G) -> Result<f64>
    where
        G: FnMut(&[f64], f64) -> Result<f64>,
    {
        let mut total = 0.0;
        for atom in &self.atoms {
            total += atom.a.abs() * g(&atom.u, atom.t)?;
        }
        Ok(total)
    }
}
