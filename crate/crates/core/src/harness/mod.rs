//! Experiment orchestration: regression datasets, single runs, sample-size
//! sweeps, the shattering comparison, persistence and the command line.

pub mod cli;
pub mod config;
mod output;

pub use config::{EpochPreset, FileConfig, MseMode, RunConfig, ShatterConfig, SweepConfig};
pub use output::{
    merge_cell_files, read_records, sha256_hex, write_cell_file, write_medians, write_records, write_slopes,
    Manifest, RECORD_HEADER,
};

use std::collections::BTreeMap;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numerics::{loglog_slope, sample_gaussian, sample_uniform_ball, SeededRng};
use crate::relu_net::{Dataset, GroundTruth, TwoLayerNet};
use crate::shattering::{neuron_stats, shattering_report, NeuronStats, ShatteringReport};
use crate::sharpness::sharpness;
use crate::trainer::{train, TrainLog};

/// `y = e₁ᵀx + N(0, σ²)` with `x` uniform on the unit ball.
pub fn make_regression_dataset(rng: &mut SeededRng, d: usize, n: usize, sigma: f64) -> Result<Dataset> {
    if d == 0 || n == 0 {
        return Err(invalid("regression data needs d, n >= 1"));
    }
    let mut direction = vec![0.0; d];
    direction[0] = 1.0;
    let truth = GroundTruth::new(direction, sigma)?;
    let xs = sample_uniform_ball(rng, d, n)?;
    let noise = sample_gaussian(rng, sigma, n)?;
    let ys = xs.column(0).iter().zip(&noise).map(|(x, e)| x + e).collect();
    Dataset::new(xs, ys)?.with_truth(truth)
}

fn truth_of(data: &Dataset) -> Result<&GroundTruth> {
    data.truth().ok_or_else(|| invalid("dataset carries no ground truth"))
}

fn mean_sq_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}

fn truth_values(truth: &GroundTruth, xs: ArrayView2<'_, f64>) -> Vec<f64> {
    xs.rows().into_iter().map(|x| truth.eval(x.as_slice().expect("standard layout"))).collect()
}

/// `(1/n) Σ (f̂(x_i) − f_0(x_i))²` on the training inputs.
pub fn in_sample_mse(net: &TwoLayerNet, data: &Dataset) -> Result<f64> {
    let truth = truth_of(data)?;
    let pred = net.forward_batch(data.inputs())?;
    Ok(mean_sq_diff(pred.as_slice().expect("contiguous"), &truth_values(truth, data.inputs())))
}

/// Holdout metrics on fresh draws from the data-generating process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoldoutMetrics {
    /// Mean `(f̂ − f_0)²`.
    pub mse: f64,
    /// Mean `(f̂ − y)²` with fresh noise.
    pub risk: f64,
}

pub fn holdout_metrics(net: &TwoLayerNet, data: &Dataset, holdout_size: usize, rng: &mut SeededRng) -> Result<HoldoutMetrics> {
    let truth = truth_of(data)?;
    let fresh = make_regression_dataset(rng, data.dim(), holdout_size, truth.sigma)?;
    let pred = net.forward_batch(fresh.inputs())?;
    let pred = pred.as_slice().expect("contiguous");
    Ok(HoldoutMetrics {
        mse: mean_sq_diff(pred, &truth_values(truth, fresh.inputs())),
        risk: mean_sq_diff(pred, fresh.labels()),
    })
}

/// `|holdout risk − train risk|` for squared error.
pub fn generalization_gap(net: &TwoLayerNet, data: &Dataset, holdout_size: usize, rng: &mut SeededRng) -> Result<f64> {
    let train_risk = 2.0 * net.loss(data)?;
    Ok((holdout_metrics(net, data, holdout_size, rng)?.risk - train_risk).abs())
}

/// One row of a results table. Metric fields are `None` when not requested
/// or when the run failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub label: String,
    pub d: usize,
    pub n: usize,
    pub width: usize,
    pub seed_index: usize,
    pub seed: u64,
    pub epochs: usize,
    pub final_train_loss: Option<f64>,
    /// `(1/n)Σ(f̂ − y)²`, twice the final loss.
    pub train_mse_vs_labels: Option<f64>,
    pub in_sample_mse: Option<f64>,
    pub holdout_mse: Option<f64>,
    pub generalization_gap: Option<f64>,
    pub final_sharpness: Option<f64>,
    pub clip_events: Option<usize>,
    pub sparse_share: Option<f64>,
    pub dead_share: Option<f64>,
    pub median_activation: Option<f64>,
    pub status: String,
}

/// Everything a single run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub net: TwoLayerNet,
    pub log: TrainLog,
    pub stats: Vec<NeuronStats>,
    pub report: ShatteringReport,
    pub data: Dataset,
}

/// Data, initialization and holdout streams of a run, derived from one seed.
struct RunStreams {
    data: SeededRng,
    init: SeededRng,
    holdout: SeededRng,
}

fn streams(seed: u64) -> RunStreams {
    RunStreams {
        data: SeededRng::derive(seed, &[1]),
        init: SeededRng::derive(seed, &[2]),
        holdout: SeededRng::derive(seed, &[3]),
    }
}

/// Dataset that [`run_single`] would train on for this seed.
pub fn run_dataset(cfg: &RunConfig, seed: u64) -> Result<Dataset> {
    make_regression_dataset(&mut streams(seed).data, cfg.d, cfg.n, cfg.sigma)
}

/// Initial network that [`run_single`] would start from for this seed.
pub fn run_init(cfg: &RunConfig, seed: u64) -> Result<TwoLayerNet> {
    TwoLayerNet::kaiming_init(&mut streams(seed).init, cfg.d, cfg.width())
}

/// Hash of the settings that determine a run.
pub fn run_hash(cfg: &RunConfig, seed: u64) -> String {
    let body = serde_json::json!({ "run": cfg, "seed": seed });
    sha256_hex(body.to_string().as_bytes())
}

/// Trains one network on fresh data. `label` and `seed_index` only annotate the record.
pub fn run_single(cfg: &RunConfig, seed: u64, label: &str, seed_index: usize) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut st = streams(seed);
    let data = make_regression_dataset(&mut st.data, cfg.d, cfg.n, cfg.sigma)?;
    let init = TwoLayerNet::kaiming_init(&mut st.init, cfg.d, cfg.width())?;
    let mut train_cfg = cfg.effective_train();
    train_cfg.seed = seed;
    let (net, log) = train(&init, &data, &train_cfg).map_err(|f| f.error)?;

    let loss = net.loss(&data)?;
    let in_sample = if cfg.mse_mode.in_sample() { Some(in_sample_mse(&net, &data)?) } else { None };
    let holdout = if cfg.mse_mode.holdout() {
        Some(holdout_metrics(&net, &data, cfg.holdout_size, &mut st.holdout)?)
    } else {
        None
    };
    let lambda = if cfg.record_sharpness {
        Some(sharpness(&net, &data, 1e-8)?.value)
    } else {
        None
    };
    let stats = neuron_stats(&net, data.inputs())?;
    let report = shattering_report(&stats, cfg.sparse_threshold)?;
    let record = RunRecord {
        config_hash: run_hash(cfg, seed),
        label: label.to_string(),
        d: cfg.d,
        n: cfg.n,
        width: cfg.width(),
        seed_index,
        seed,
        epochs: train_cfg.epochs,
        final_train_loss: Some(loss),
        train_mse_vs_labels: Some(2.0 * loss),
        in_sample_mse: in_sample,
        holdout_mse: holdout.map(|h| h.mse),
        generalization_gap: holdout.map(|h| (h.risk - 2.0 * loss).abs()),
        final_sharpness: lambda,
        clip_events: Some(log.clip_epochs.len()),
        sparse_share: Some(report.sparse_neuron_share),
        dead_share: Some(report.dead_neuron_share),
        median_activation: Some(report.median_activation),
        status: "ok".into(),
    };
    Ok(RunOutcome { record, net, log, stats, report, data })
}

fn failed_record(cfg: &RunConfig, seed: u64, label: &str, seed_index: usize, err: &Error) -> RunRecord {
    RunRecord {
        config_hash: run_hash(cfg, seed),
        label: label.to_string(),
        d: cfg.d,
        n: cfg.n,
        width: cfg.width(),
        seed_index,
        seed,
        epochs: cfg.effective_train().epochs,
        final_train_loss: None,
        train_mse_vs_labels: None,
        in_sample_mse: None,
        holdout_mse: None,
        generalization_gap: None,
        final_sharpness: None,
        clip_events: None,
        sparse_share: None,
        dead_share: None,
        median_activation: None,
        status: format!("failed: {err}"),
    }
}

/// Seed of sweep cell `(d, n, index)`; independent of scheduling order.
pub fn cell_seed(master: u64, d: usize, n: usize, index: usize) -> u64 {
    SeededRng::derive(master, &[d as u64, n as u64, index as u64]).seed()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedianRow {
    pub d: usize,
    pub n: usize,
    pub metric: String,
    pub median: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeRow {
    pub d: usize,
    pub metric: String,
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub records: Vec<RunRecord>,
    pub medians: Vec<MedianRow>,
    pub slopes: Vec<SlopeRow>,
}

impl SweepResult {
    pub fn slope(&self, d: usize, metric: &str) -> Option<f64> {
        self.slopes.iter().find(|s| s.d == d && s.metric == metric).map(|s| s.slope)
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    crate::shattering::quantile_sorted(values, 0.5)
}

/// Runs every `(d, n, seed)` cell on `threads` workers and aggregates in cell order.
///
/// `on_cell` sees each finished record (from a worker thread).
pub fn run_mse_sweep<F>(cfg: &SweepConfig, master_seed: u64, threads: usize, label: &str, on_cell: F) -> Result<SweepResult>
where
    F: Fn(&RunRecord) -> Result<()> + Sync,
{
    cfg.validate()?;
    let mut cells = Vec::new();
    for &d in &cfg.dims {
        for &n in &cfg.sample_sizes {
            for idx in 0..cfg.seeds_per_cell {
                cells.push((d, n, idx));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let records: Vec<Result<RunRecord>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(d, n, idx)| {
                let run_cfg = cfg.cell(d, n);
                let seed = cell_seed(master_seed, d, n, idx);
                let record = match run_single(&run_cfg, seed, label, idx) {
                    Ok(out) => out.record,
                    Err(e) => {
                        log::warn!("cell d={d} n={n} seed #{idx} failed: {e}");
                        failed_record(&run_cfg, seed, label, idx, &e)
                    }
                };
                on_cell(&record)?;
                Ok(record)
            })
            .collect()
    });
    let records: Vec<RunRecord> = records.into_iter().collect::<Result<_>>()?;

    let metrics: [(&str, fn(&RunRecord) -> Option<f64>); 3] = [
        ("in_sample_mse", |r| r.in_sample_mse),
        ("holdout_mse", |r| r.holdout_mse),
        ("generalization_gap", |r| r.generalization_gap),
    ];
    let mut medians = Vec::new();
    let mut slopes = Vec::new();
    for &d in &cfg.dims {
        for (name, get) in metrics {
            let mut points = Vec::new();
            for &n in &cfg.sample_sizes {
                let mut vals: Vec<f64> = records
                    .iter()
                    .filter(|r| r.d == d && r.n == n)
                    .filter_map(get)
                    .filter(|v| v.is_finite())
                    .collect();
                if vals.is_empty() {
                    continue;
                }
                let runs = vals.len();
                let m = median(&mut vals);
                medians.push(MedianRow { d, n, metric: name.into(), median: m, runs });
                if m > 0.0 {
                    points.push((n as f64, m));
                }
            }
            if points.len() >= 2 {
                if let Ok(fit) = loglog_slope(&points) {
                    slopes.push(SlopeRow {
                        d,
                        metric: name.into(),
                        slope: fit.slope,
                        intercept: fit.intercept,
                        points: points.len(),
                    });
                }
            }
        }
    }
    Ok(SweepResult { records, medians, slopes })
}

/// Both runs of the shattering comparison, large step first.
pub fn run_shattering_experiment(cfg: &ShatterConfig, seed: u64) -> Result<Vec<(String, RunOutcome)>> {
    cfg.validate()?;
    // Both runs share data and initialization so that only the optimizer differs.
    cfg.runs()
        .into_iter()
        .enumerate()
        .map(|(i, (label, run))| Ok((label.to_string(), run_single(&run, seed, label, i)?)))
        .collect()
}

/// Records grouped by `(d, n)` in ascending order.
pub fn group_by_cell(records: &[RunRecord]) -> BTreeMap<(usize, usize), Vec<&RunRecord>> {
    let mut out: BTreeMap<(usize, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        out.entry((r.d, r.n)).or_default().push(r);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::TrainConfig;

    #[test]
    fn noiseless_labels_are_linear() {
        let data = make_regression_dataset(&mut SeededRng::new(1), 3, 50, 0.0).unwrap();
        for (x, y) in data.inputs().rows().into_iter().zip(data.labels()) {
            assert_eq!(x[0], *y);
        }
    }

    #[test]
    fn label_noise_has_requested_scale() {
        let data = make_regression_dataset(&mut SeededRng::new(2), 2, 100_000, 0.7).unwrap();
        let resid: Vec<f64> = data.inputs().column(0).iter().zip(data.labels()).map(|(x, y)| y - x).collect();
        let var = resid.iter().map(|r| r * r).sum::<f64>() / resid.len() as f64;
        assert!((var.sqrt() - 0.7).abs() < 0.01);
        let outliers = data.labels().iter().filter(|y| y.abs() > 1.0 + 5.0 * 0.7).count();
        assert!(outliers <= 5);
    }

    #[test]
    fn zero_predictor_gap_is_small() {
        let data = make_regression_dataset(&mut SeededRng::new(3), 2, 5000, 0.0).unwrap();
        let net = TwoLayerNet::zeros(2, 1).unwrap();
        let gap = generalization_gap(&net, &data, 20_000, &mut SeededRng::new(4)).unwrap();
        assert!(gap < 0.02, "{gap}");
    }

    #[test]
    fn gap_ignores_row_order() {
        let data = make_regression_dataset(&mut SeededRng::new(5), 2, 40, 0.5).unwrap();
        let net = TwoLayerNet::kaiming_init(&mut SeededRng::new(6), 2, 8).unwrap();
        let mut rows: Vec<usize> = (0..40).collect();
        rows.reverse();
        let xs = data.inputs().select(ndarray::Axis(0), &rows);
        let ys = rows.iter().map(|&i| data.labels()[i]).collect();
        let flipped = Dataset::new(xs, ys).unwrap().with_truth(data.truth().unwrap().clone()).unwrap();
        let a = generalization_gap(&net, &data, 1000, &mut SeededRng::new(7)).unwrap();
        let b = generalization_gap(&net, &flipped, 1000, &mut SeededRng::new(7)).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn untrained_sweep_reports_initial_error() {
        let cfg = SweepConfig {
            dims: vec![2],
            sample_sizes: vec![8, 16],
            seeds_per_cell: 1,
            train: TrainConfig { epochs: 0, ..TrainConfig::default() },
            preset: EpochPreset::Explicit,
            holdout_size: 100,
            ..SweepConfig::default()
        };
        let res = run_mse_sweep(&cfg, 9, 1, "smoke", |_| Ok(())).unwrap();
        assert_eq!(res.records.len(), 2);
        for r in &res.records {
            let run = cfg.cell(r.d, r.n);
            let data = run_dataset(&run, r.seed).unwrap();
            let init = run_init(&run, r.seed).unwrap();
            assert_eq!(r.in_sample_mse, Some(in_sample_mse(&init, &data).unwrap()));
        }
        assert!(res.slope(2, "in_sample_mse").is_some());
    }

    #[test]
    fn sweep_is_independent_of_thread_count() {
        let cfg = SweepConfig {
            dims: vec![1, 2],
            sample_sizes: vec![8, 16],
            seeds_per_cell: 2,
            train: TrainConfig { epochs: 20, eta: 0.1, ..TrainConfig::default() },
            preset: EpochPreset::Explicit,
            holdout_size: 50,
            ..SweepConfig::default()
        };
        let a = run_mse_sweep(&cfg, 1, 1, "t", |_| Ok(())).unwrap();
        let b = run_mse_sweep(&cfg, 1, 3, "t", |_| Ok(())).unwrap();
        assert_eq!(a, b);
    }
}
