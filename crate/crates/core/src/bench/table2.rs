//! The published synthetic benchmark (mean and standard error of the
//! relative Frobenius error, 50 replicates per cell) and the comparison
//! against it.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{run_grid, ExperimentKind, ExperimentSpec, RunOptions, SummaryRow};
use crate::error::{Error, Result};

/// One published cell. `dims` is `(m, n)` for matrices, `(p, s)` for
/// tensors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PublishedCell {
    pub lambda: f64,
    pub dims: [usize; 2],
    pub rank: usize,
    pub mean: f64,
    pub se: f64,
}

const fn cell(lambda: f64, d1: usize, d2: usize, rank: usize, mean: f64, se: f64) -> PublishedCell {
    PublishedCell { lambda, dims: [d1, d2], rank, mean, se }
}

pub const TABLE2_MATRIX: [PublishedCell; 16] = [
    cell(10.0, 100, 15, 10, 0.1178, 0.00125),
    cell(10.0, 100, 15, 12, 0.0906, 0.00164),
    cell(10.0, 250, 25, 10, 0.1254, 0.00044),
    cell(10.0, 250, 25, 15, 0.0868, 0.00077),
    cell(10.0, 375, 20, 10, 0.1279, 0.00045),
    cell(10.0, 375, 20, 15, 0.0927, 0.00076),
    cell(10.0, 500, 80, 30, 0.0698, 0.00032),
    cell(10.0, 500, 80, 40, 0.0795, 0.00035),
    cell(50.0, 100, 15, 10, 0.0844, 0.00007),
    cell(50.0, 100, 15, 12, 0.0181, 0.00037),
    cell(50.0, 250, 25, 10, 0.1079, 0.00002),
    cell(50.0, 250, 25, 15, 0.0378, 0.00009),
    cell(50.0, 375, 20, 10, 0.1068, 0.00002),
    cell(50.0, 375, 20, 15, 0.0349, 0.00008),
    cell(50.0, 500, 80, 30, 0.0134, 0.00008),
    cell(50.0, 500, 80, 40, 0.0156, 0.00006),
];

pub const TABLE2_TENSOR: [PublishedCell; 16] = [
    cell(10.0, 20, 15, 10, 0.1092, 0.00031),
    cell(10.0, 20, 15, 12, 0.0776, 0.00058),
    cell(10.0, 50, 25, 10, 0.1081, 0.00002),
    cell(10.0, 50, 25, 15, 0.0402, 0.00012),
    cell(10.0, 75, 20, 10, 0.1081, 0.00002),
    cell(10.0, 75, 20, 15, 0.0353, 0.00004),
    cell(10.0, 100, 80, 30, 0.0204, 0.00007),
    cell(10.0, 100, 80, 40, 0.0294, 0.00007),
    cell(50.0, 20, 15, 10, 0.1018, 0.00001),
    cell(50.0, 20, 15, 12, 0.0599, 0.00002),
    cell(50.0, 50, 25, 10, 0.1073, 0.00000),
    cell(50.0, 50, 25, 15, 0.0352, 0.00000),
    cell(50.0, 75, 20, 10, 0.1067, 0.00000),
    cell(50.0, 75, 20, 15, 0.0333, 0.00000),
    cell(50.0, 100, 80, 30, 0.0039, 0.00001),
    cell(50.0, 100, 80, 40, 0.0058, 0.00001),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Panel {
    Matrix,
    Tensor,
    Both,
}

impl FromStr for Panel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matrix" => Ok(Panel::Matrix),
            "tensor" => Ok(Panel::Tensor),
            "both" => Ok(Panel::Both),
            other => Err(Error::param(format!("unknown panel {other:?}; expected matrix, tensor or both"))),
        }
    }
}

/// A cell passes iff `|ours − paper| ≤ max(se_multiplier·paper_se,
/// abs_floor, rel·paper_mean)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TolerancePolicy {
    pub se_multiplier: f64,
    pub abs_floor: f64,
    pub rel: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self { se_multiplier: 5.0, abs_floor: 0.002, rel: 0.05 }
    }
}

impl TolerancePolicy {
    pub fn tolerance(&self, paper_mean: f64, paper_se: f64) -> f64 {
        (self.se_multiplier * paper_se).max(self.abs_floor).max(self.rel * paper_mean)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    #[serde(flatten)]
    pub row: SummaryRow,
    pub paper_mean: f64,
    pub paper_se: f64,
    /// Signed `ours − published`.
    pub diff: f64,
    pub abs_diff: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Table2Report {
    pub rows: Vec<ComparisonRow>,
    pub policy: TolerancePolicy,
}

impl Table2Report {
    pub fn passed(&self) -> usize {
        self.rows.iter().filter(|r| r.pass).count()
    }

    pub fn pass_fraction(&self) -> f64 {
        self.passed() as f64 / self.rows.len().max(1) as f64
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Systematic deviation: every cell of `kind` misses in the same
    /// direction. Returns the sign (`+1` ours above, `−1` below).
    pub fn one_sided(&self, kind: ExperimentKind) -> Option<i8> {
        let diffs: Vec<f64> = self.rows.iter().filter(|r| r.row.kind == kind).map(|r| r.diff).collect();
        if diffs.is_empty() {
            None
        } else if diffs.iter().all(|&d| d > 0.0) {
            Some(1)
        } else if diffs.iter().all(|&d| d < 0.0) {
            Some(-1)
        } else {
            None
        }
    }
}

fn panel_specs(kind: ExperimentKind, cells: &[PublishedCell], replicates: usize, seed: u64) -> Vec<ExperimentSpec> {
    // One spec per (λ, dims) with both ranks, so the ranks share draws.
    let mut specs: Vec<ExperimentSpec> = Vec::new();
    for c in cells {
        match specs.iter_mut().find(|s| s.lambda == c.lambda && s.dims == c.dims) {
            Some(s) => s.ranks.push(c.rank),
            None => specs.push(
                ExperimentSpec::new(kind, c.dims, c.lambda, vec![c.rank]).with_replicates(replicates).with_seed(seed),
            ),
        }
    }
    specs
}

/// Experiment specs covering the published grid of `panel`.
pub fn table2_specs(panel: Panel, replicates: usize, seed: u64) -> Vec<ExperimentSpec> {
    let mut specs = Vec::new();
    if matches!(panel, Panel::Matrix | Panel::Both) {
        specs.extend(panel_specs(ExperimentKind::Matrix, &TABLE2_MATRIX, replicates, seed));
    }
    if matches!(panel, Panel::Tensor | Panel::Both) {
        specs.extend(panel_specs(ExperimentKind::Tensor, &TABLE2_TENSOR, replicates, seed));
    }
    specs
}

/// Runs the published grid and compares every cell.
pub fn reproduce_table2(
    panel: Panel,
    replicates: usize,
    seed: u64,
    policy: TolerancePolicy,
    opts: &RunOptions,
) -> Result<Table2Report> {
    let rows = run_grid(&table2_specs(panel, replicates, seed), opts)?;
    let rows = rows
        .into_iter()
        .map(|row| {
            let published = match row.kind {
                ExperimentKind::Matrix => &TABLE2_MATRIX,
                _ => &TABLE2_TENSOR,
            };
            let p = published
                .iter()
                .find(|c| c.lambda == row.lambda && c.dims == [row.dim1, row.dim2] && c.rank == row.rank)
                .expect("row comes from the published grid");
            let diff = row.mean_relerr - p.mean;
            let tolerance = policy.tolerance(p.mean, p.se);
            ComparisonRow {
                paper_mean: p.mean,
                paper_se: p.se,
                diff,
                abs_diff: diff.abs(),
                tolerance,
                pass: diff.abs() <= tolerance,
                row,
            }
        })
        .collect();
    Ok(Table2Report { rows, policy })
}
