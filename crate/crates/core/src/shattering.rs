//! Per-neuron activation and magnitude statistics.

use std::io::Write;

use ndarray::ArrayView2;

use crate::error::{invalid, Result};
use crate::numerics::norm;
use crate::relu_net::TwoLayerNet;

pub const DEFAULT_SPARSE_THRESHOLD: f64 = 0.10;

pub const SCATTER_HEADER: [&str; 4] = ["neuron_id", "activation_fraction", "magnitude", "t"];

#[derive(Debug, Clone, PartialEq)]
pub struct NeuronStats {
    pub neuron_id: usize,
    /// Share of inputs with `w_kᵀx − b_k > 0`.
    pub activation_fraction: f64,
    /// `|v_k|·‖w_k‖`.
    pub magnitude: f64,
    /// `b_k/‖w_k‖`, or `None` when `w_k = 0`.
    pub offset_t: Option<f64>,
}

pub fn neuron_stats(net: &TwoLayerNet, xs: ArrayView2<'_, f64>) -> Result<Vec<NeuronStats>> {
    if xs.nrows() == 0 {
        return Err(invalid("neuron statistics need at least one input"));
    }
    let z = net.preactivations(xs)?;
    let n = xs.nrows() as f64;
    Ok(z.columns()
        .into_iter()
        .enumerate()
        .map(|(k, col)| {
            let active = col.iter().filter(|&&z| z > 0.0).count();
            let s = norm(net.w_row(k));
            NeuronStats {
                neuron_id: k,
                activation_fraction: active as f64 / n,
                magnitude: net.v()[k].abs() * s,
                offset_t: (s > 0.0).then(|| net.b()[k] / s),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShatteringReport {
    pub sparse_threshold: f64,
    /// Share of neurons with `0 < fraction ≤ sparse_threshold`.
    pub sparse_neuron_share: f64,
    /// Share of neurons that never activate.
    pub dead_neuron_share: f64,
    pub median_activation: f64,
    /// `(q, magnitude quantile)` for q in [`MAGNITUDE_QUANTILES`].
    pub magnitude_quantiles: Vec<(f64, f64)>,
    /// `(neuron_id, fraction, magnitude)` in neuron order.
    pub scatter: Vec<(usize, f64, f64)>,
}

pub const MAGNITUDE_QUANTILES: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

/// Linear-interpolation quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn shattering_report(stats: &[NeuronStats], sparse_threshold: f64) -> Result<ShatteringReport> {
    if stats.is_empty() {
        return Err(invalid("shattering report needs at least one neuron"));
    }
    if !(0.0..=1.0).contains(&sparse_threshold) {
        return Err(invalid(format!("sparse threshold must lie in [0, 1], got {sparse_threshold}")));
    }
    let total = stats.len() as f64;
    let sparse = stats
        .iter()
        .filter(|s| s.activation_fraction > 0.0 && s.activation_fraction <= sparse_threshold)
        .count();
    let dead = stats.iter().filter(|s| s.activation_fraction == 0.0).count();

    let mut fractions: Vec<f64> = stats.iter().map(|s| s.activation_fraction).collect();
    fractions.sort_by(f64::total_cmp);
    let mut magnitudes: Vec<f64> = stats.iter().map(|s| s.magnitude).collect();
    magnitudes.sort_by(f64::total_cmp);

    let mut scatter: Vec<_> = stats.iter().map(|s| (s.neuron_id, s.activation_fraction, s.magnitude)).collect();
    scatter.sort_by_key(|row| row.0);

    Ok(ShatteringReport {
        sparse_threshold,
        sparse_neuron_share: sparse as f64 / total,
        dead_neuron_share: dead as f64 / total,
        median_activation: quantile_sorted(&fractions, 0.5),
        magnitude_quantiles: MAGNITUDE_QUANTILES
            .iter()
            .map(|&q| (q, quantile_sorted(&magnitudes, q)))
            .collect(),
        scatter,
    })
}

/// Scatter rows as CSV, in neuron order. `t` is empty for zero input weights.
pub fn write_scatter_csv<W: Write>(stats: &[NeuronStats], out: W) -> Result<()> {
    let mut rows: Vec<&NeuronStats> = stats.iter().collect();
    rows.sort_by_key(|s| s.neuron_id);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCATTER_HEADER)?;
    for s in rows {
        w.write_record([
            s.neuron_id.to_string(),
            s.activation_fraction.to_string(),
            s.magnitude.to_string(),
            s.offset_t.map(|t| t.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
