use std::fmt::Write as _;

use super::atoms::{atom_l2_norm, atom_value, check_eps};
use super::codes::{hamming, sign_family, target_size, SignFamily};
use super::packing::{pack_caps, CandidateBudget, CapPacking};
use crate::error::{invalid, Error, Result};
use crate::numerics::{sample_uniform_ball, unit_ball_volume, SeededRng};
use crate::relu_net::TwoLayerNet;

/// Upper limit on codewords materialized by [`build_hard_family`].
pub const MAX_FAMILY_SIZE: usize = 256;

/// `f_ξ(x) = amplitude · Σ_i ξ_i · ε^{-2} φ(u_iᵀx − (1 − ε²))`.
#[derive(Debug, Clone, PartialEq)]
pub struct HardFamily {
    pub packing: CapPacking,
    pub signs: SignFamily,
    pub amplitude: f64,
}

pub fn build_hard_family(d: usize, eps: f64, amplitude: f64, rng: &mut SeededRng) -> Result<HardFamily> {
    let packing = pack_caps(d, eps, rng, CandidateBudget::Adaptive)?;
    let k = packing.len();
    let signs = if k >= 8 {
        sign_family(k, target_size(k).min(MAX_FAMILY_SIZE), rng)?
    } else {
        // Too few caps for a K/8 code; the antipodal pair is at distance K.
        SignFamily {
            k,
            codewords: vec![vec![1; k], vec![-1; k]],
        }
    };
    HardFamily::new(packing, signs, amplitude)
}

impl HardFamily {
    pub fn new(packing: CapPacking, signs: SignFamily, amplitude: f64) -> Result<Self> {
        check_eps(packing.eps)?;
        if signs.k != packing.len() {
            return Err(invalid(format!(
                "code length {} does not match the {} packing centers",
                signs.k,
                packing.len()
            )));
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(invalid(format!("amplitude must be positive, got {amplitude}")));
        }
        Ok(Self { packing, signs, amplitude })
    }

    pub fn dim(&self) -> usize {
        self.packing.d
    }

    pub fn eps(&self) -> f64 {
        self.packing.eps
    }

    fn check_signs(&self, xi: &[i8]) -> Result<()> {
        if xi.len() != self.packing.len() {
            return Err(invalid("sign vector length does not match the family"));
        }
        Ok(())
    }

    pub fn eval(&self, xi: &[i8], x: &[f64]) -> Result<f64> {
        self.check_signs(xi)?;
        if x.len() != self.dim() {
            return Err(invalid("point dimension does not match the family"));
        }
        Ok(self.eval_unchecked(xi, x))
    }

    fn eval_unchecked(&self, xi: &[i8], x: &[f64]) -> f64 {
        let eps = self.eps();
        let s: f64 = self
            .packing
            .centers
            .iter()
            .zip(xi)
            .map(|(u, &s)| s as f64 * atom_value(u, eps, x, true))
            .sum();
        self.amplitude * s
    }

    /// Upper bound `K·amplitude·ε^{2d+2}` on the weighted variation of every member.
    pub fn vg_bound(&self) -> f64 {
        self.packing.len() as f64 * self.amplitude * self.eps().powi(2 * self.dim() as i32 + 2)
    }

    /// `‖f_ξ‖_∞` over the ball, attained at the poles.
    pub fn sup_norm(&self) -> f64 {
        self.amplitude
    }

    /// Exact `‖f_ξ − f_ξ'‖²_{L²(B_1)} = 4·d_H·amplitude²·‖atom‖²·ε^{-4}` from disjoint supports.
    pub fn distance_sq(&self, xi: &[i8], other: &[i8]) -> Result<f64> {
        self.check_signs(xi)?;
        self.check_signs(other)?;
        let h = hamming(xi, other) as f64;
        if h == 0.0 {
            return Ok(0.0);
        }
        let atom = atom_l2_norm(self.dim(), self.eps(), 1e-12)?;
        Ok(4.0 * h * (self.amplitude * atom).powi(2) / self.eps().powi(4))
    }

    /// Monte Carlo estimate `(mean, standard error)` of `‖f_ξ − f_ξ'‖²` with
    /// uniform-ball samples scaled by the ball volume.
    pub fn monte_carlo_distance_sq(&self, xi: &[i8], other: &[i8], samples: usize, rng: &mut SeededRng) -> Result<(f64, f64)> {
        self.check_signs(xi)?;
        self.check_signs(other)?;
        if samples < 2 {
            return Err(invalid("need at least two Monte Carlo samples"));
        }
        let xs = sample_uniform_ball(rng, self.dim(), samples)?;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for row in xs.rows() {
            let x = row.as_slice().expect("standard layout");
            let diff = self.eval_unchecked(xi, x) - self.eval_unchecked(other, x);
            let v = diff * diff;
            sum += v;
            sum_sq += v * v;
        }
        let n = samples as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
        let vol = unit_ball_volume(self.dim());
        Ok((vol * mean, vol * (var / n).sqrt()))
    }

    /// The member as a width-K network: `v_i = ξ_i·amplitude·ε^{-2}`, `w_i = u_i`, `b_i = 1 − ε²`.
    pub fn to_net(&self, xi: &[i8]) -> Result<TwoLayerNet> {
        self.check_signs(xi)?;
        let e2 = self.eps() * self.eps();
        let b = vec![1.0 - e2; xi.len()];
        let v: Vec<f64> = xi.iter().map(|&s| s as f64 * self.amplitude / e2).collect();
        TwoLayerNet::from_parts(&self.packing.centers, &b, &v, 0.0)
    }

    /// Text manifest; see [`parse_manifest`].
    pub fn to_manifest(&self) -> String {
        let mut out = String::from("hard-family v1\n");
        let _ = writeln!(out, "d {}", self.dim());
        let _ = writeln!(out, "eps {}", self.eps());
        let _ = writeln!(out, "amplitude {}", self.amplitude);
        let _ = writeln!(out, "centers {}", self.packing.len());
        for c in &self.packing.centers {
            let line: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        let _ = writeln!(out, "codewords {}", self.signs.len());
        for w in &self.signs.codewords {
            let line: String = w.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect();
            let _ = writeln!(out, "{line}");
        }
        out
    }
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn keyed<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<&'a str> {
    let line = lines.next().ok_or_else(|| format_err(format!("missing `{key}` line")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| format_err(format!("expected `{key} <value>`, got {line:?}")))
}

fn number<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| format_err(format!("bad {what}: {s:?}")))
}

/// Reads the format written by [`HardFamily::to_manifest`]:
///
/// ```text
/// hard-family v1
/// d <dimension>
/// eps <ε>
/// amplitude <scale>
/// centers <K>
/// <K lines of d space-separated coordinates>
/// codewords <M>
/// <M lines of K characters, '+' or '-'>
/// ```
pub fn parse_manifest(text: &str) -> Result<HardFamily> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    if lines.next().map(str::trim) != Some("hard-family v1") {
        return Err(format_err("missing `hard-family v1` header"));
    }
    let d: usize = number(keyed(&mut lines, "d")?, "dimension")?;
    let eps: f64 = number(keyed(&mut lines, "eps")?, "eps")?;
    let amplitude: f64 = number(keyed(&mut lines, "amplitude")?, "amplitude")?;
    let k: usize = number(keyed(&mut lines, "centers")?, "center count")?;
    let mut centers = Vec::with_capacity(k);
    for i in 0..k {
        let line = lines.next().ok_or_else(|| format_err(format!("missing center {i}")))?;
        let c: Vec<f64> = line.split_whitespace().map(|t| number(t, "coordinate")).collect::<Result<_>>()?;
        if c.len() != d {
            return Err(format_err(format!("center {i} has {} coordinates, expected {d}", c.len())));
        }
        centers.push(c);
    }
    let m: usize = number(keyed(&mut lines, "codewords")?, "codeword count")?;
    let mut codewords = Vec::with_capacity(m);
    for i in 0..m {
        let line = lines.next().ok_or_else(|| format_err(format!("missing codeword {i}")))?.trim();
        let w: Vec<i8> = line
            .chars()
            .map(|ch| match ch {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(format_err(format!("bad sign {other:?} in codeword {i}"))),
            })
            .collect::<Result<_>>()?;
        if w.len() != k {
            return Err(format_err(format!("codeword {i} has length {}, expected {k}", w.len())));
        }
        codewords.push(w);
    }
    if lines.next().is_some() {
        return Err(format_err("trailing content after codewords"));
    }
    let packing = CapPacking { d, eps, centers };
    packing.audit()?;
    HardFamily::new(packing, SignFamily { k, codewords }, amplitude)
}
