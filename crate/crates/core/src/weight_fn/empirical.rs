use ndarray::ArrayView2;

use crate::error::{invalid, Result};

pub(super) fn validate(points: ArrayView2<'_, f64>) -> Result<()> {
    if points.nrows() == 0 || points.ncols() == 0 {
        return Err(invalid("empirical weight needs at least one point"));
    }
    for row in points.rows() {
        if !(row.dot(&row).sqrt() <= 1.0 + 1e-12) {
            return Err(invalid("empirical weight points must lie in the unit ball"));
        }
    }
    Ok(())
}

/// One-sided `g̃(u, t)` under the uniform distribution on the rows of
/// `points`, with the strict event `xᵀu > t`. Zero if the event is empty.
pub fn tilde_g_empirical(points: ArrayView2<'_, f64>, u: &[f64], t: f64) -> f64 {
    let n = points.nrows();
    let d = points.ncols();
    let mut hits = 0usize;
    let mut gap = 0.0;
    let mut mean = vec![0.0; d];
    for row in points.rows() {
        let s: f64 = row.iter().zip(u).map(|(x, ui)| x * ui).sum();
        if s > t {
            hits += 1;
            gap += s - t;
            mean.iter_mut().zip(row.iter()).for_each(|(m, x)| *m += x);
        }
    }
    if hits == 0 {
        return 0.0;
    }
    let h = hits as f64;
    let p = h / n as f64;
    let mean_sq: f64 = mean.iter().map(|m| (m / h).powi(2)).sum();
    p * p * (gap / h) * (1.0 + mean_sq).sqrt()
}

/// `min{g̃(u, t), g̃(−u, −t)}` over the sample.
pub fn g_empirical(points: ArrayView2<'_, f64>, u: &[f64], t: f64) -> f64 {
    let plus = tilde_g_empirical(points, u, t);
    if plus == 0.0 {
        return 0.0;
    }
    let neg: Vec<f64> = u.iter().map(|x| -x).collect();
    plus.min(tilde_g_empirical(points, &neg, -t))
}
