//! `tucker-bench`: Monte Carlo experiments for truncated-SVD and one-step
//! HOSVD denoising.
//!
//! Exit codes: 0 success, 1 tolerance or bound check failed (or a numerical
//! failure), 2 usage or input error, 3 resource guard.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use tucker_denoise::bench::{
    bias_variance_sweep, denoise_file, reproduce_table2, rows_to_csv, rows_to_json, run_grid, sweep_to_csv,
    ExperimentKind, ExperimentSpec, Panel, RunOptions, SummaryRow, TolerancePolicy, DEFAULT_MAX_ENTRIES,
    DEFAULT_REPLICATES, DEFAULT_SEED,
};
use tucker_denoise::bounds::{monte_carlo_opnorm, thm2_bound};
use tucker_denoise::estimators::{matrix_bias, truncated_svd_estimate, TargetRanks};
use tucker_denoise::linalg::{operator_norm, random_orthonormal_from, singular_values, Matrix};
use tucker_denoise::rng::{stream_key, CounterRng};
use tucker_denoise::synth::{gen_noise_matrix, NoiseSpec};
use tucker_denoise::Error;

#[derive(Parser)]
#[command(version, about = "Low-rank matrix and tensor denoising experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Base seed [default: 20240]
    #[arg(long, global = true, env = "TUCKER_BENCH_SEED")]
    seed: Option<u64>,
    /// Replicates per cell [default: 50]
    #[arg(long, global = true)]
    replicates: Option<usize>,
    /// Output file; `.json` writes JSON, anything else CSV. Stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    parallel: usize,
    /// Attach theoretical bound reports to every row (JSON output).
    #[arg(long, global = true)]
    bounds: bool,
    /// Largest dense array (entries) a cell may allocate.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ENTRIES)]
    max_entries: usize,
}

#[derive(Args)]
struct GridArgs {
    /// JSON file with an ExperimentSpec or a list of them.
    #[arg(long, conflicts_with_all = ["dims", "ranks"])]
    grid: Option<PathBuf>,
    /// Dimensions as `d1,d2`.
    #[arg(long, value_parser = parse_pair, required_unless_present = "grid")]
    dims: Option<[usize; 2]>,
    /// SNR parameters, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "10")]
    lambda: Vec<f64>,
    /// Ranks to evaluate, comma separated.
    #[arg(long, value_delimiter = ',', required_unless_present = "grid")]
    ranks: Vec<usize>,
    #[arg(long, default_value_t = 0.8)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Truncated SVD on `m x n` signals, dims `m,n`.
    SimulateMatrix(GridArgs),
    /// One-step HOSVD on `p x p x p` signals with latent size `s`, dims `p,s`.
    SimulateTensor(GridArgs),
    /// Truncated sample covariance, dims `n,N` (lambda is ignored).
    SimulateCov(GridArgs),
    /// Rerun the published benchmark grid and compare cell by cell.
    #[command(name = "reproduce-table2")]
    ReproduceTable2 {
        #[arg(long, default_value = "both")]
        panel: Panel,
        /// JSON file overriding fields of the tolerance policy.
        #[arg(long)]
        tolerance_policy: Option<PathBuf>,
    },
    /// Error, variance term and bias bracket for every rank.
    BiasVarianceSweep {
        #[arg(long, default_value = "tensor")]
        kind: ExperimentKind,
        #[arg(long, value_parser = parse_pair, default_value = "50,25")]
        dims: [usize; 2],
        #[arg(long, default_value_t = 10.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
    },
    /// Denoise a DT3 tensor file.
    Denoise {
        input: PathBuf,
        output: PathBuf,
        /// Target Tucker rank `r1,r2,r3` (defaults to the full dimensions).
        #[arg(long, value_parser = parse_triple)]
        ranks: Option<[usize; 3]>,
    },
    /// Empirical checks of the operator-norm concentration and the
    /// truncated-SVD bound.
    CheckBounds {
        #[arg(long, default_value_t = 200)]
        m: usize,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Fail if the 99th percentile of ‖Z‖/(√m+√n) exceeds this.
        #[arg(long, default_value_t = 1.5)]
        p99_max: f64,
        /// Random (X*, Z, r) instances for the truncated-SVD bound.
        #[arg(long, default_value_t = 200)]
        instances: usize,
    },
}

fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',').map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"))).collect()
}

fn parse_pair(s: &str) -> Result<[usize; 2], String> {
    parse_list(s)?.try_into().map_err(|_| format!("expected two comma-separated integers, got {s:?}"))
}

fn parse_triple(s: &str) -> Result<[usize; 3], String> {
    parse_list(s)?.try_into().map_err(|_| format!("expected three comma-separated integers, got {s:?}"))
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let mut cur = e.downcast_ref::<Error>();
    while let Some(err) = cur {
        match err {
            Error::Replicate { source, .. } => cur = Some(source),
            Error::ResourceGuard(_) => return 3,
            Error::Parameter(_) | Error::Format { .. } | Error::Io(_) | Error::Json(_) => return 2,
            Error::Convergence { .. } | Error::ZeroNorm => return 1,
        }
    }
    if e.downcast_ref::<io::Error>().is_some() || e.downcast_ref::<serde_json::Error>().is_some() {
        2
    } else {
        1
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        Failure { code: exit_code(&error), error }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn options(g: &Global) -> RunOptions {
    RunOptions { parallelism: g.parallel, max_entries: g.max_entries, bounds: g.bounds, record_time: true }
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn is_json(p: Option<&Path>) -> bool {
    p.and_then(|p| p.extension()).is_some_and(|e| e == "json")
}

fn write_rows(g: &Global, rows: &[SummaryRow]) -> anyhow::Result<()> {
    let out = g.out.as_deref();
    let text = if is_json(out) { rows_to_json(rows)? } else { rows_to_csv(rows) };
    emit(out, &text)
}

fn grid_specs(kind: ExperimentKind, a: &GridArgs, g: &Global) -> Result<Vec<ExperimentSpec>, Failure> {
    let mut specs = match &a.grid {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let specs: Vec<ExperimentSpec> = if value.is_array() {
                serde_json::from_value(value)?
            } else {
                vec![serde_json::from_value(value)?]
            };
            if let Some(bad) = specs.iter().find(|s| s.kind != kind) {
                return Err(Failure {
                    code: 2,
                    error: anyhow::anyhow!("grid contains a {} spec; this subcommand runs {kind}", bad.kind),
                });
            }
            specs
        }
        None => {
            let dims = a.dims.expect("clap enforces --dims");
            a.lambda
                .iter()
                .map(|&lambda| ExperimentSpec {
                    kind,
                    dims,
                    lambda,
                    ranks: a.ranks.clone(),
                    replicates: DEFAULT_REPLICATES,
                    seed: DEFAULT_SEED,
                    beta: a.beta,
                    kappa: a.kappa,
                })
                .collect()
        }
    };
    for s in &mut specs {
        if let Some(seed) = g.seed {
            s.seed = seed;
        }
        if let Some(r) = g.replicates {
            s.replicates = r;
        }
    }
    Ok(specs)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let g = &cli.global;
    let seed = g.seed.unwrap_or(DEFAULT_SEED);
    let replicates = g.replicates.unwrap_or(DEFAULT_REPLICATES);
    match &cli.command {
        Command::SimulateMatrix(a) | Command::SimulateTensor(a) | Command::SimulateCov(a) => {
            let kind = match &cli.command {
                Command::SimulateMatrix(_) => ExperimentKind::Matrix,
                Command::SimulateTensor(_) => ExperimentKind::Tensor,
                _ => ExperimentKind::Covariance,
            };
            let specs = grid_specs(kind, a, g)?;
            let rows = run_grid(&specs, &options(g))?;
            write_rows(g, &rows)?;
            Ok(0)
        }
        Command::ReproduceTable2 { panel, tolerance_policy } => {
            let policy = match tolerance_policy {
                Some(p) => serde_json::from_str(
                    &fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
                )?,
                None => TolerancePolicy::default(),
            };
            let report = reproduce_table2(*panel, replicates, seed, policy, &options(g))?;
            for c in &report.rows {
                let r = &c.row;
                eprintln!(
                    "{} {:<6} lambda={:<3} dims={}x{} r={:<3} ours={:.4} ({:.5}) paper={:.4} ({:.5}) |diff|={:.4} tol={:.4}",
                    if c.pass { "PASS" } else { "FAIL" },
                    r.kind.as_str(),
                    r.lambda,
                    r.dim1,
                    r.dim2,
                    r.rank,
                    r.mean_relerr,
                    r.se_relerr,
                    c.paper_mean,
                    c.paper_se,
                    c.abs_diff,
                    c.tolerance
                );
            }
            for kind in [ExperimentKind::Matrix, ExperimentKind::Tensor] {
                if let Some(sign) = report.one_sided(kind) {
                    eprintln!("warning: every {kind} cell deviates in the same direction ({sign:+})");
                }
            }
            eprintln!("{}/{} cells within tolerance", report.passed(), report.rows.len());
            let out = g.out.as_deref();
            if is_json(out) {
                emit(out, &serde_json::to_string_pretty(&report)?)?;
            } else {
                let rows: Vec<SummaryRow> = report.rows.iter().map(|c| c.row.clone()).collect();
                emit(out, &rows_to_csv(&rows))?;
            }
            Ok(if report.all_pass() { 0 } else { 1 })
        }
        Command::BiasVarianceSweep { kind, dims, lambda, kappa } => {
            let spec = ExperimentSpec::new(*kind, *dims, *lambda, vec![1])
                .with_seed(seed)
                .with_replicates(replicates)
                .with_kappa(*kappa);
            let rows = bias_variance_sweep(&spec, &options(g))?;
            let out = g.out.as_deref();
            let text = if is_json(out) { serde_json::to_string_pretty(&rows)? } else { sweep_to_csv(&rows) };
            emit(out, &text)?;
            Ok(0)
        }
        Command::Denoise { input, output, ranks } => {
            let report = denoise_file(input, ranks.map(TargetRanks), output)?;
            let text = serde_json::to_string_pretty(&report)? + "\n";
            match g.out.as_deref() {
                Some(p) => emit(Some(p), &text)?,
                None => emit(None, &text)?,
            }
            Ok(0)
        }
        Command::CheckBounds { m, n, trials, p99_max, instances } => {
            let summary = monte_carlo_opnorm(*m, *n, 1.0, *trials, seed)?;
            let (held, worst) = thm2_check(*instances, seed)?;
            let ok = summary.p99 <= *p99_max && held == *instances;
            let report = serde_json::json!({
                "opnorm": summary,
                "opnorm_p99_max": p99_max,
                "thm2_instances": instances,
                "thm2_held": held,
                "thm2_min_slack": worst,
                "pass": ok,
            });
            emit(g.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
            Ok(if ok { 0 } else { 1 })
        }
    }
}

/// Draws random `(X*, Z, r)` and counts how often
/// `‖Y_(r) − X*‖_F ≤ (2+√2)(√r‖Z‖ + ξ_(r)) + 1e-8` holds.
fn thm2_check(instances: usize, seed: u64) -> Result<(usize, f64), Failure> {
    let mut held = 0;
    let mut worst = f64::INFINITY;
    for t in 0..instances as u64 {
        let rng = CounterRng::stream(seed, "cli.thm2", t);
        let m = 3 + (rng.at(0) % 10) as usize;
        let n = 2 + (rng.at(1) % (m as u64 - 1)) as usize;
        let r = 1 + (rng.at(2) % n as u64) as usize;
        let u = random_orthonormal_from(m, n, &CounterRng::stream(seed, "cli.thm2.u", t))?;
        let v = random_orthonormal_from(n, n, &CounterRng::stream(seed, "cli.thm2.v", t))?;
        let decay = 0.3 + 0.7 * rng.uniform_at(3);
        let x = Matrix::from_fn(m, n, |i, j| u.basis()[(i, j)] * decay.powi(j as i32)).matmul_t(v.basis())?;
        let kappa = 0.01 + rng.uniform_at(4);
        let z = gen_noise_matrix(m, n, &NoiseSpec::gaussian(kappa, stream_key(seed, "cli.thm2.z", t)))?;
        let y = x.add(&z)?;
        let err = truncated_svd_estimate(&y, r)?.sub(&x)?.frobenius_norm();
        let bound = thm2_bound(r, operator_norm(&z)?, matrix_bias(&singular_values(&x)?, r).upper);
        let slack = bound + 1e-8 - err;
        worst = worst.min(slack);
        if slack >= 0.0 {
            held += 1;
        }
    }
    Ok((held, worst))
}
