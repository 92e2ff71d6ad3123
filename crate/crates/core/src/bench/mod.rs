//! Monte Carlo experiment runner.
//!
//! A cell is one `(kind, dims, λ)` configuration; every replicate draws a
//! fresh signal and noise and evaluates all requested ranks on the same
//! observation. Replicate `i` of a cell uses
//!
//! ```text
//! cell   = stream_key(base_seed, "bench.cell/<kind>/<d1>x<d2>/<λ>/<β>/<κ>", 0)
//! signal = stream_key(cell, "bench.signal", i)
//! noise  = stream_key(cell, "bench.noise",  i)
//! ```
//!
//! so results depend neither on scheduling nor on the order of cells.

mod denoise;
mod output;
mod sweep;
mod table2;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::error::{Error, Result};
use crate::estimators::{sample_cov_truncated, HosvdStage0, TargetRanks};
use crate::linalg::{svd, Matrix};
use crate::rng::stream_key;
use crate::synth::{
    gen_covariance_samples, gen_matrix_signal, gen_noise_matrix, gen_noise_tensor, gen_tensor_signal,
    CovarianceSpec, MatrixSignalSpec, NoiseSpec, TensorSignalSpec,
};
use crate::tensor::Tensor3;

pub use denoise::{denoise_file, DenoiseReport};
pub use output::{format_g6, rows_to_csv, rows_to_json, CSV_HEADER};
pub use sweep::{bias_variance_sweep, sweep_to_csv, SweepRow};
pub use table2::{
    reproduce_table2, table2_specs, ComparisonRow, Panel, PublishedCell, Table2Report, TolerancePolicy,
    TABLE2_MATRIX, TABLE2_TENSOR,
};

pub const DEFAULT_SEED: u64 = 20240;
pub const DEFAULT_REPLICATES: usize = 50;
/// Default cap on the entries of the largest dense object in a cell.
pub const DEFAULT_MAX_ENTRIES: usize = 16_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    /// dims `(m, n)`, truncated SVD.
    Matrix,
    /// dims `(p, s)`, one-step HOSVD at ranks `(r, r, r)`.
    Tensor,
    /// dims `(n, N)`, truncated sample covariance; `lambda` unused.
    Covariance,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Matrix => "matrix",
            ExperimentKind::Tensor => "tensor",
            ExperimentKind::Covariance => "covariance",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matrix" => Ok(ExperimentKind::Matrix),
            "tensor" => Ok(ExperimentKind::Tensor),
            "covariance" | "cov" => Ok(ExperimentKind::Covariance),
            other => Err(Error::param(format!("unknown experiment kind {other:?}"))),
        }
    }
}

fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_beta() -> f64 {
    0.8
}

fn default_kappa() -> f64 {
    1.0
}

fn default_lambda() -> f64 {
    1.0
}

/// One experiment cell and the ranks to evaluate on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub dims: [usize; 2],
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    pub ranks: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Noise level; `0` runs the noiseless (pure bias) experiment.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, dims: [usize; 2], lambda: f64, ranks: Vec<usize>) -> Self {
        Self {
            kind,
            dims,
            lambda,
            ranks,
            replicates: DEFAULT_REPLICATES,
            seed: DEFAULT_SEED,
            beta: default_beta(),
            kappa: default_kappa(),
        }
    }

    pub fn with_replicates(mut self, r: usize) -> Self {
        self.replicates = r;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn label(&self) -> String {
        format!("{} {}x{} lambda={}", self.kind, self.dims[0], self.dims[1], format_g6(self.lambda))
    }

    pub fn validate(&self) -> Result<()> {
        let [d1, d2] = self.dims;
        if self.replicates == 0 {
            return Err(Error::param(format!("{}: replicates must be at least 1", self.label())));
        }
        if self.ranks.is_empty() {
            return Err(Error::param(format!("{}: no ranks to evaluate", self.label())));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::param(format!("{}: kappa must be nonnegative", self.label())));
        }
        let max_rank = match self.kind {
            ExperimentKind::Matrix => {
                MatrixSignalSpec { m: d1, n: d2, beta: self.beta, lambda: self.lambda, seed: 0 }.validate()?;
                d2
            }
            ExperimentKind::Tensor => {
                TensorSignalSpec { p: d1, s: d2, beta: self.beta, lambda: self.lambda, seed: 0 }.validate()?;
                d1
            }
            ExperimentKind::Covariance => {
                if d1 == 0 || d2 == 0 {
                    return Err(Error::param("covariance dims (n, N) must be positive"));
                }
                if self.kappa == 0.0 {
                    return Err(Error::param("covariance experiment needs kappa > 0"));
                }
                d1
            }
        };
        if let Some(&r) = self.ranks.iter().find(|&&r| r == 0 || r > max_rank) {
            return Err(Error::param(format!("{}: rank {r} outside 1..={max_rank}", self.label())));
        }
        Ok(())
    }

    /// Entries of the largest dense array one replicate holds.
    pub fn largest_entries(&self) -> usize {
        let [d1, d2] = self.dims;
        match self.kind {
            ExperimentKind::Matrix => d1.saturating_mul(d2),
            ExperimentKind::Tensor => d1.saturating_mul(d1).saturating_mul(d1),
            ExperimentKind::Covariance => d1.saturating_mul(d2).max(d1.saturating_mul(d1)),
        }
    }

    fn cell_key(&self) -> u64 {
        let tag = format!(
            "bench.cell/{}/{}x{}/{:016x}/{:016x}/{:016x}",
            self.kind,
            self.dims[0],
            self.dims[1],
            self.lambda.to_bits(),
            self.beta.to_bits(),
            self.kappa.to_bits()
        );
        stream_key(self.seed, &tag, 0)
    }

    /// `(signal seed, noise seed)` of replicate `i`.
    pub fn replicate_seeds(&self, i: usize) -> (u64, u64) {
        let cell = self.cell_key();
        (stream_key(cell, "bench.signal", i as u64), stream_key(cell, "bench.noise", i as u64))
    }

    /// Noiseless signal of replicate `i` (matrix and tensor kinds), as used
    /// by [`run_grid`].
    pub fn signal(&self, i: usize) -> Result<Signal> {
        let (sig, _) = self.replicate_seeds(i);
        let [d1, d2] = self.dims;
        match self.kind {
            ExperimentKind::Matrix => Ok(Signal::Matrix(gen_matrix_signal(&MatrixSignalSpec {
                m: d1,
                n: d2,
                beta: self.beta,
                lambda: self.lambda,
                seed: sig,
            })?)),
            ExperimentKind::Tensor => Ok(Signal::Tensor(gen_tensor_signal(&TensorSignalSpec {
                p: d1,
                s: d2,
                beta: self.beta,
                lambda: self.lambda,
                seed: sig,
            })?)),
            ExperimentKind::Covariance => {
                let (cov, _) = gen_covariance_samples(&self.cov_spec(sig))?;
                Ok(Signal::Matrix(cov))
            }
        }
    }

    fn cov_spec(&self, seed: u64) -> CovarianceSpec {
        CovarianceSpec { n: self.dims[0], samples: self.dims[1], beta: self.beta, kappa: self.kappa, seed }
    }

    fn noise(&self, i: usize) -> Option<NoiseSpec> {
        (self.kappa > 0.0).then(|| NoiseSpec::gaussian(self.kappa, self.replicate_seeds(i).1))
    }
}

#[derive(Clone, Debug)]
pub enum Signal {
    Matrix(Matrix),
    Tensor(Tensor3),
}

/// `‖estimate − truth‖_F / ‖truth‖_F`.
pub fn rel_err(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::param(format!("length mismatch: {} vs {}", estimate.len(), truth.len())));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (e, t) in estimate.iter().zip(truth) {
        num += (e - t) * (e - t);
        den += t * t;
    }
    if den == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((num / den).sqrt())
}

/// Sample mean and standard error (Bessel-corrected standard deviation over
/// `√R`; `0` when `R = 1`).
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Aggregate over the replicates of one `(cell, rank)` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub kind: ExperimentKind,
    pub lambda: f64,
    pub dim1: usize,
    pub dim2: usize,
    pub rank: usize,
    pub replicates: usize,
    pub mean_relerr: f64,
    pub se_relerr: f64,
    pub seed: u64,
    pub wall_time_s: f64,
    pub beta: f64,
    pub kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundReport>,
    /// Largest `‖X̃ − X*‖_F / (variance_term + ξ_upper)` over replicates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_ratio_max: Option<f64>,
    /// Per-replicate relative errors in replicate order.
    #[serde(skip)]
    pub errors: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    /// Worker threads; `0` uses every available core.
    pub parallelism: usize,
    pub max_entries: usize,
    /// Attach a [`BoundReport`] to every row.
    pub bounds: bool,
    /// Record wall time; when off the column is `0` and output is
    /// bit-reproducible.
    pub record_time: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { parallelism: 0, max_entries: DEFAULT_MAX_ENTRIES, bounds: false, record_time: true }
    }
}

/// Relative errors per rank and seconds per rank for one replicate.
fn run_replicate(spec: &ExperimentSpec, i: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let start = Instant::now();
    let ranks = &spec.ranks;
    let mut errs = Vec::with_capacity(ranks.len());
    let mut times = Vec::with_capacity(ranks.len());
    let shared;
    match spec.kind {
        ExperimentKind::Matrix => {
            let Signal::Matrix(x) = spec.signal(i)? else { unreachable!() };
            let y = match spec.noise(i) {
                Some(n) => x.add(&gen_noise_matrix(x.rows(), x.cols(), &n)?)?,
                None => x.clone(),
            };
            let f = svd(&y)?;
            shared = start.elapsed().as_secs_f64();
            for &r in ranks {
                let t = Instant::now();
                let est = f.truncate(r)?.reconstruct();
                errs.push(rel_err(est.as_slice(), x.as_slice())?);
                times.push(t.elapsed().as_secs_f64());
            }
        }
        ExperimentKind::Tensor => {
            let Signal::Tensor(x) = spec.signal(i)? else { unreachable!() };
            let y = match spec.noise(i) {
                Some(n) => x.add(&gen_noise_tensor(x.dims(), &n)?)?,
                None => x.clone(),
            };
            let stage = HosvdStage0::new(&y)?;
            shared = start.elapsed().as_secs_f64();
            for &r in ranks {
                let t = Instant::now();
                let out = stage.one_step(TargetRanks::uniform(r))?;
                errs.push(rel_err(out.estimate.as_slice(), x.as_slice())?);
                times.push(t.elapsed().as_secs_f64());
            }
        }
        ExperimentKind::Covariance => {
            let (cov, samples) = gen_covariance_samples(&spec.cov_spec(spec.replicate_seeds(i).0))?;
            shared = start.elapsed().as_secs_f64();
            for &r in ranks {
                let t = Instant::now();
                let (est, _) = sample_cov_truncated(&samples, r)?;
                errs.push(rel_err(est.as_slice(), cov.as_slice())?);
                times.push(t.elapsed().as_secs_f64());
            }
        }
    }
    let share = shared / ranks.len() as f64;
    Ok((errs, times.into_iter().map(|t| t + share).collect()))
}

/// Checks every spec against the entry budget.
pub fn check_resources(specs: &[ExperimentSpec], max_entries: usize) -> Result<()> {
    for spec in specs {
        let n = spec.largest_entries();
        if n > max_entries {
            return Err(Error::ResourceGuard(format!(
                "cell {} needs {n} entries, budget is {max_entries}",
                spec.label()
            )));
        }
    }
    Ok(())
}

fn bound_report(spec: &ExperimentSpec, r: usize) -> Result<Option<BoundReport>> {
    let kappa = spec.kappa;
    Ok(match (spec.kind, spec.signal(0)?) {
        (ExperimentKind::Tensor, Signal::Tensor(x)) => {
            Some(BoundReport::tensor(&x, TargetRanks::uniform(r), kappa, 1.0)?)
        }
        (_, Signal::Matrix(x)) => Some(BoundReport::matrix(&x, r, kappa)?),
        _ => None,
    })
}

/// Signal norm `‖X*‖_F` shared by every replicate of a matrix or tensor
/// cell.
fn signal_norm(spec: &ExperimentSpec) -> Option<f64> {
    let [d1, d2] = spec.dims;
    match spec.kind {
        ExperimentKind::Matrix => Some(spec.lambda * ((d1 * d2) as f64).sqrt()),
        ExperimentKind::Tensor => Some(spec.lambda * (d1 as f64).powf(1.5)),
        ExperimentKind::Covariance => None,
    }
}

/// Runs every `(spec, rank)` pair with `spec.replicates` replicates.
///
/// Replicates run in parallel; results are folded in replicate order so the
/// output is identical for any thread count.
pub fn run_grid(specs: &[ExperimentSpec], opts: &RunOptions) -> Result<Vec<SummaryRow>> {
    for s in specs {
        s.validate()?;
    }
    check_resources(specs, opts.max_entries)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.parallelism)
        .build()
        .map_err(|e| Error::param(format!("cannot start thread pool: {e}")))?;

    let tasks: Vec<(usize, usize)> =
        specs.iter().enumerate().flat_map(|(c, s)| (0..s.replicates).map(move |i| (c, i))).collect();
    let results: Vec<(Vec<f64>, Vec<f64>)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(c, i)| {
                run_replicate(&specs[c], i).map_err(|e| Error::Replicate {
                    context: format!("{} replicate {i}", specs[c].label()),
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut rows = Vec::new();
    let mut offset = 0;
    for spec in specs {
        let reps = &results[offset..offset + spec.replicates];
        offset += spec.replicates;
        for (k, &r) in spec.ranks.iter().enumerate() {
            let errors: Vec<f64> = reps.iter().map(|(e, _)| e[k]).collect();
            let (mean, se) = mean_se(&errors);
            let wall = if opts.record_time { reps.iter().map(|(_, t)| t[k]).sum() } else { 0.0 };
            let bounds = if opts.bounds { pool.install(|| bound_report(spec, r))? } else { None };
            let bound_ratio_max = match (&bounds, signal_norm(spec)) {
                (Some(b), Some(norm)) if b.variance_term + b.bias.upper > 0.0 => {
                    let worst = errors.iter().copied().fold(0.0, f64::max);
                    Some(worst * norm / (b.variance_term + b.bias.upper))
                }
                _ => None,
            };
            rows.push(SummaryRow {
                kind: spec.kind,
                lambda: spec.lambda,
                dim1: spec.dims[0],
                dim2: spec.dims[1],
                rank: r,
                replicates: spec.replicates,
                mean_relerr: mean,
                se_relerr: se,
                seed: spec.seed,
                wall_time_s: wall,
                beta: spec.beta,
                kappa: spec.kappa,
                bounds,
                bound_ratio_max,
                errors,
            });
        }
    }
    Ok(rows)
}
