//! Adaptive Gauss–Kronrod (7/15) integration with global interval bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{invalid, Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes, then the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 20_000;

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Piece> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    if fc.is_nan() {
        return Err(Error::Evaluation(format!("integrand is NaN at {centre}")));
    }
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let (lo, hi) = (f(centre - dx), f(centre + dx));
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::Evaluation(format!("integrand is NaN near {centre} ± {dx}")));
        }
        kronrod += WGK[j] * (lo + hi);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }
    Ok(Piece {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

/// ∫ₐᵇ f with estimated absolute error at most `target_tol` (or at the
/// floating-point floor relative to the result, whichever is larger).
pub fn quadrature_1d<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, target_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("quadrature bounds must be finite"));
    }
    if a > b {
        return Err(invalid(format!("quadrature needs a <= b, got [{a}, {b}]")));
    }
    if !(target_tol > 0.0) {
        return Err(invalid("quadrature tolerance must be positive"));
    }
    if a == b {
        return Ok(0.0);
    }
    let first = gk15(&mut f, a, b)?;
    let mut total = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::from([first]);
    while error > target_tol.max(100.0 * f64::EPSILON * total.abs()) {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Evaluation(format!(
                "quadrature on [{a}, {b}] stalled at error estimate {error:e}"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            heap.push(worst);
            break;
        }
        let left = gk15(&mut f, worst.a, mid)?;
        let right = gk15(&mut f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    Ok(heap.iter().map(|p| p.value).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn square_on_unit_interval() {
        let v = quadrature_1d(|x| x * x, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn cubics_are_exact() {
        let v = quadrature_1d(|x| 4.0 * x.powi(3) - x + 2.0, -1.5, 2.0, 1e-14).unwrap();
        let anti = |x: f64| x.powi(4) - 0.5 * x * x + 2.0 * x;
        assert!((v - (anti(2.0) - anti(-1.5))).abs() < 1e-12);
    }

    #[test]
    fn marginal_kernels_match_beta_function() {
        // ∫₋₁¹ (1−t²)^{(d−1)/2} dt = B(1/2, (d+1)/2) = √π Γ((d+1)/2) / Γ(d/2 + 1).
        use crate::numerics::gamma_half;
        for d in 1..=8u32 {
            let exact = PI.sqrt() * gamma_half(d + 1) / gamma_half(d + 2);
            let p = (d as f64 - 1.0) / 2.0;
            let v = quadrature_1d(|t| (1.0 - t * t).max(0.0).powf(p), -1.0, 1.0, 1e-12).unwrap();
            assert!((v - exact).abs() < 1e-10, "d={d}: {v} vs {exact}");
        }
        let half_disc = quadrature_1d(|t| (1.0 - t * t).sqrt(), -1.0, 1.0, 1e-12).unwrap();
        assert!((half_disc - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn shrinking_window_polynomial() {
        let e2: f64 = 0.09;
        let v = quadrature_1d(|x| (e2 - x).powi(2), 0.0, e2, 1e-14).unwrap();
        assert!((v - 0.3f64.powi(6) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(quadrature_1d(|x| x, 1.0, 0.0, 1e-8).is_err());
        assert!(matches!(quadrature_1d(|_| f64::NAN, 0.0, 1.0, 1e-8), Err(Error::Evaluation(_))));
        assert_eq!(quadrature_1d(|x| x, 0.5, 0.5, 1e-8).unwrap(), 0.0);
    }
}
