//! The `flatlab` command line. [`run`] is the whole program, minus logging
//! setup, so that it can be driven from tests.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::config::FileConfig;
use super::output::{merge_cell_files, write_cell_file, write_medians, write_records, write_slopes, Manifest};
use super::{run_dataset, run_mse_sweep, run_shattering_experiment, run_single};
use crate::error::{Error, Result};
use crate::hard_fn::{
    atom_l2_norm, build_hard_family, c7, c8, hamming, indistinguishability_estimate, kl_divergence, max_center_dot,
};
use crate::numerics::{dot, SeededRng};
use crate::rates::write_rate_table;
use crate::relu_net::{read_checkpoint, write_checkpoint, Dataset, TwoLayerNet};
use crate::shattering::write_scatter_csv;
use crate::sharpness::{regularity_certificate, sharpness, stable_at};
use crate::weight_fn::WeightFunction;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUN: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "flatlab", version, about = "Sharpness, regularity and lower-bound experiments for two-layer ReLU networks")]
struct Cli {
    /// Master seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "flatlab-out")]
    out: PathBuf,
    /// Worker threads for sweeps (overrides the config file).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one network on fresh regression data.
    Train,
    /// Sweep dimensions and sample sizes and fit log-log MSE slopes.
    SweepMse,
    /// Large-step versus weight-decay shattering comparison.
    Shatter,
    /// Sharpness, stability and the regularity certificate of one network.
    Sharpness,
    /// Path norms of one network under every weight function.
    Vgnorm,
    /// Build a hard family and check its certificates against simulation.
    HardfnVerify,
    /// Table of predicted rate exponents.
    Rates,
}

enum Failure {
    Config(Error),
    Run(Error),
}

fn config_err(e: Error) -> Failure {
    Failure::Config(e)
}

fn run_err(e: Error) -> Failure {
    Failure::Run(e)
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `args` (including the program name) and executes the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(e)) => {
            eprintln!("flatlab: invalid config: {e}");
            EXIT_CONFIG
        }
        Err(Failure::Run(e)) => {
            eprintln!("flatlab: run failed: {e}");
            EXIT_RUN
        }
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path).map_err(config_err)?,
        None => FileConfig::default(),
    };
    let seed = cli.seed.or(file.seed).unwrap_or(0);
    let threads = cli.threads.or(file.threads).unwrap_or(1);
    if threads == 0 {
        return Err(Failure::Config(Error::Config("threads must be at least 1".into())));
    }
    let out = cli.out.as_path();
    fs::create_dir_all(out).map_err(|e| run_err(e.into()))?;
    match cli.command {
        Command::Train => cmd_train(&file, seed, out),
        Command::SweepMse => cmd_sweep(&file, seed, threads, out),
        Command::Shatter => cmd_shatter(&file, seed, out),
        Command::Sharpness => cmd_sharpness(&file, seed, out),
        Command::Vgnorm => cmd_vgnorm(&file, seed, out),
        Command::HardfnVerify => cmd_hardfn(&file, seed, out),
        Command::Rates => cmd_rates(&file, seed, out),
    }
}

fn finish(manifest: &mut Manifest, out: &Path, files: &[PathBuf]) -> CliResult<()> {
    for f in files {
        manifest.add_output(out, f).map_err(run_err)?;
    }
    manifest.write(&out.join("manifest.json")).map_err(run_err)
}

fn save_checkpoint(net: &TwoLayerNet, path: &Path) -> Result<()> {
    write_checkpoint(net, BufWriter::new(File::create(path)?))
}

fn cmd_train(file: &FileConfig, seed: u64, out: &Path) -> CliResult<()> {
    let cfg = &file.train;
    cfg.validate().map_err(config_err)?;
    let mut manifest = Manifest::new("train", seed, cfg).map_err(run_err)?;
    let outcome = run_single(cfg, seed, "train", 0).map_err(run_err)?;
    let files = [
        out.join("record.csv"),
        out.join("train_log.csv"),
        out.join("scatter.csv"),
        out.join("checkpoint.bin"),
    ];
    (|| -> Result<()> {
        write_records(&files[0], std::slice::from_ref(&outcome.record))?;
        outcome.log.write_csv(BufWriter::new(File::create(&files[1])?))?;
        write_scatter_csv(&outcome.stats, BufWriter::new(File::create(&files[2])?))?;
        save_checkpoint(&outcome.net, &files[3])
    })()
    .map_err(run_err)?;
    finish(&mut manifest, out, &files)
}

fn cmd_sweep(file: &FileConfig, seed: u64, threads: usize, out: &Path) -> CliResult<()> {
    let cfg = &file.sweep;
    cfg.validate().map_err(config_err)?;
    let mut manifest = Manifest::new("sweep-mse", seed, cfg).map_err(run_err)?;
    let cells = out.join("cells");
    let result = run_mse_sweep(cfg, seed, threads, "sweep", |r| write_cell_file(&cells, r).map(|_| ())).map_err(run_err)?;
    let files = [out.join("records.csv"), out.join("medians.csv"), out.join("slopes.csv")];
    merge_cell_files(&cells, &result.records, &files[0]).map_err(run_err)?;
    write_medians(&files[1], &result.medians).map_err(run_err)?;
    write_slopes(&files[2], &result.slopes).map_err(run_err)?;
    finish(&mut manifest, out, &files)
}

fn cmd_shatter(file: &FileConfig, seed: u64, out: &Path) -> CliResult<()> {
    let cfg = &file.shatter;
    cfg.validate().map_err(config_err)?;
    let mut manifest = Manifest::new("shatter", seed, cfg).map_err(run_err)?;
    let runs = run_shattering_experiment(cfg, seed).map_err(run_err)?;
    let mut files = vec![out.join("shatter_records.csv")];
    let records: Vec<_> = runs.iter().map(|(_, o)| o.record.clone()).collect();
    write_records(&files[0], &records).map_err(run_err)?;
    for (label, outcome) in &runs {
        let scatter = out.join(format!("scatter_{label}.csv"));
        let log = out.join(format!("train_log_{label}.csv"));
        let ckpt = out.join(format!("checkpoint_{label}.bin"));
        (|| -> Result<()> {
            write_scatter_csv(&outcome.stats, BufWriter::new(File::create(&scatter)?))?;
            outcome.log.write_csv(BufWriter::new(File::create(&log)?))?;
            save_checkpoint(&outcome.net, &ckpt)
        })()
        .map_err(run_err)?;
        files.extend([scatter, log, ckpt]);
    }
    finish(&mut manifest, out, &files)
}

/// Loads `checkpoint` or trains per `run`, on the run's dataset.
fn network_for(run: &super::RunConfig, checkpoint: Option<&Path>, seed: u64) -> CliResult<(TwoLayerNet, Dataset)> {
    run.validate().map_err(config_err)?;
    let data = run_dataset(run, seed).map_err(run_err)?;
    let net = match checkpoint {
        Some(path) => {
            let f = File::open(path).map_err(|e| config_err(Error::Config(format!("{}: {e}", path.display()))))?;
            let net = read_checkpoint(std::io::BufReader::new(f)).map_err(run_err)?;
            if net.dim() != data.dim() {
                return Err(config_err(Error::Config(format!(
                    "checkpoint has d={}, config has d={}",
                    net.dim(),
                    data.dim()
                ))));
            }
            net
        }
        None => {
            let mut quiet = run.clone();
            quiet.record_sharpness = false;
            run_single(&quiet, seed, "net", 0).map_err(run_err)?.net
        }
    };
    Ok((net, data))
}

fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_sharpness(file: &FileConfig, seed: u64, out: &Path) -> CliResult<()> {
    let cfg = &file.sharpness;
    if !(cfg.rel_tol > 0.0) {
        return Err(config_err(Error::Config("sharpness.rel_tol must be positive".into())));
    }
    let mut manifest = Manifest::new("sharpness", seed, cfg).map_err(run_err)?;
    let (net, data) = network_for(&cfg.run, cfg.checkpoint.as_deref(), seed)?;
    let eta = cfg.run.train.eta;
    let est = sharpness(&net, &data, cfg.rel_tol).map_err(run_err)?;
    let g = WeightFunction::empirical(data.inputs().to_owned()).map_err(run_err)?;
    let cert = regularity_certificate(&net, &data, 1.0, &g).map_err(run_err)?;
    let stable = stable_at(est.value, eta).map_err(config_err)?;
    let header = [
        "lambda_max",
        "converged",
        "iterations",
        "eta",
        "two_over_eta",
        "stable",
        "loss",
        "certificate_lhs",
        "certificate_rhs",
        "certificate_holds",
        "gauss_newton_lambda",
        "term_a_bound",
        "term_a_holds",
    ];
    let row = vec![
        est.value.to_string(),
        est.converged.to_string(),
        est.iterations.to_string(),
        eta.to_string(),
        (2.0 / eta).to_string(),
        stable.to_string(),
        cert.loss.to_string(),
        cert.lhs.to_string(),
        cert.rhs.to_string(),
        cert.holds.to_string(),
        cert.gauss_newton_lambda.to_string(),
        cert.term_a_bound.to_string(),
        cert.term_a_holds.to_string(),
    ];
    let path = out.join("sharpness.csv");
    write_rows(&path, &header, &[row]).map_err(run_err)?;
    finish(&mut manifest, out, &[path])
}

fn cmd_vgnorm(file: &FileConfig, seed: u64, out: &Path) -> CliResult<()> {
    let cfg = &file.vgnorm;
    if !(cfg.radius >= 1.0) {
        return Err(config_err(Error::Config("vgnorm.radius must be at least 1 (inputs fill the unit ball)".into())));
    }
    let mut manifest = Manifest::new("vgnorm", seed, cfg).map_err(run_err)?;
    let (net, data) = network_for(&cfg.run, cfg.checkpoint.as_deref(), seed)?;
    let d = data.dim();
    let rows = (|| -> Result<Vec<Vec<String>>> {
        let rf = net.to_reduced_form(cfg.radius)?;
        let atoms = rf.atoms.len().to_string();
        let mut rows = vec![vec!["path_norm".to_string(), rf.path_norm().to_string(), atoms.clone()]];
        for (name, g) in [
            ("simplified", WeightFunction::simplified(d)?),
            ("analytic", WeightFunction::analytic(d)?),
            ("empirical", WeightFunction::empirical(data.inputs().to_owned())?),
        ] {
            rows.push(vec![format!("weighted_{name}"), rf.weighted_path_norm(&g)?.to_string(), atoms.clone()]);
        }
        Ok(rows)
    })()
    .map_err(run_err)?;
    let path = out.join("vgnorm.csv");
    write_rows(&path, &["quantity", "value", "atoms"], &rows).map_err(run_err)?;
    finish(&mut manifest, out, &[path])
}

fn cmd_hardfn(file: &FileConfig, seed: u64, out: &Path) -> CliResult<()> {
    let cfg = &file.hardfn;
    cfg.validate().map_err(config_err)?;
    let mut manifest = Manifest::new("hardfn-verify", seed, cfg).map_err(run_err)?;
    let family_path = out.join("hard_family.txt");
    let checks_path = out.join("hardfn_checks.csv");
    (|| -> Result<()> {
        let mut rng = SeededRng::derive(seed, &[0x4A8D]);
        let fam = build_hard_family(cfg.d, cfg.eps, cfg.amplitude, &mut rng)?;
        fs::write(&family_path, fam.to_manifest())?;

        let row = |name: &str, expected: f64, observed: f64, tolerance: f64, pass: bool| {
            vec![name.to_string(), expected.to_string(), observed.to_string(), tolerance.to_string(), pass.to_string()]
        };
        let mut rows = Vec::new();

        let limit = max_center_dot(cfg.eps);
        let mut worst = f64::NEG_INFINITY;
        for (i, a) in fam.packing.centers.iter().enumerate() {
            for b in &fam.packing.centers[i + 1..] {
                worst = worst.max(dot(a, b));
            }
        }
        rows.push(row("packing_max_dot", limit, worst, 1e-12, worst <= limit + 1e-12 || fam.packing.len() < 2));

        let need = crate::hard_fn::min_distance_for(fam.signs.k) as f64;
        let min_d = fam.signs.min_distance().map_or(f64::NAN, |m| m as f64);
        rows.push(row("code_min_distance", need, min_d, 0.0, min_d >= need));

        let (xi, other) = (&fam.signs.codewords[0], &fam.signs.codewords[1]);
        let g = WeightFunction::simplified(cfg.d)?;
        let vg = fam.to_net(other)?.to_reduced_form(1.0)?.weighted_path_norm(&g)?;
        let bound = fam.vg_bound();
        rows.push(row("vg_norm", bound, vg, 1e-12 * bound, (vg - bound).abs() <= 1e-12 * bound));

        let exact = fam.distance_sq(xi, other)?;
        let (mc, se) = fam.monte_carlo_distance_sq(xi, other, cfg.mc_samples, &mut rng)?;
        rows.push(row("distance_sq", exact, mc, 3.0 * se, (mc - exact).abs() <= 3.0 * se));

        let ind = indistinguishability_estimate(&fam, xi, other, cfg.n, cfg.trials, &mut rng)?;
        rows.push(row(
            "indistinguishability",
            ind.closed_form,
            ind.monte_carlo,
            3.0 * ind.std_error,
            (ind.monte_carlo - ind.closed_form).abs() <= 3.0 * ind.std_error,
        ));

        let atom = atom_l2_norm(cfg.d, cfg.eps, 1e-12)?;
        let s = cfg.eps.powf((cfg.d as f64 + 5.0) / 2.0);
        rows.push(row("atom_l2_lower", c7(cfg.d) * s, atom, 0.0, atom >= c7(cfg.d) * s * (1.0 - 1e-10)));
        rows.push(row("atom_l2_upper", c8(cfg.d) * s, atom, 0.0, atom <= c8(cfg.d) * s * (1.0 + 1e-10)));

        let kl = kl_divergence(cfg.n, exact, cfg.sigma)?;
        rows.push(row("kl_divergence", kl, kl, 0.0, true));
        rows.push(row("centers", fam.packing.len() as f64, fam.packing.len() as f64, 0.0, true));
        rows.push(row("codewords", fam.signs.len() as f64, fam.signs.len() as f64, 0.0, true));
        rows.push(row("hamming_pair", 0.0, hamming(xi, other) as f64, 0.0, true));

        write_rows(&checks_path, &["check", "expected", "observed", "tolerance", "pass"], &rows)
    })()
    .map_err(run_err)?;
    finish(&mut manifest, out, &[family_path, checks_path])
}

fn cmd_rates(file: &FileConfig, seed: u64, out: &Path) -> CliResult<()> {
    let cfg = &file.rates;
    if cfg.dims.is_empty() || cfg.dims.contains(&0) {
        return Err(config_err(Error::Config("rates.dims must be non-empty and positive".into())));
    }
    let mut manifest = Manifest::new("rates", seed, cfg).map_err(run_err)?;
    let path = out.join("rates.csv");
    (|| -> Result<()> { write_rate_table(cfg.dims.iter().copied(), BufWriter::new(File::create(&path)?)) })()
        .map_err(run_err)?;
    finish(&mut manifest, out, &[path])
}
