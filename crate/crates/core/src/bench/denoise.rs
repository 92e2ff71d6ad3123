use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::estimators::{BiasBracket, HosvdStage0, TargetRanks};
use crate::tensor::io::{read_tensor, write_sidecar, write_tensor, Metadata};

#[derive(Clone, Debug, Serialize)]
pub struct DenoiseReport {
    pub input: PathBuf,
    pub output: PathBuf,
    pub dims: [usize; 3],
    pub ranks: [usize; 3],
    /// Bracket for the best Tucker-`ranks` approximation error of the input.
    pub bias: BiasBracket,
    pub input_norm: f64,
    pub estimate_norm: f64,
    pub wall_time_s: f64,
}

/// Reads a `DT3` tensor, applies the one-step HOSVD at `ranks` (all
/// dimensions when `None`) and writes the estimate plus a JSON sidecar.
pub fn denoise_file(input: &Path, ranks: Option<TargetRanks>, output: &Path) -> Result<DenoiseReport> {
    let start = Instant::now();
    let y = read_tensor(input)?;
    let dims = y.dims();
    let ranks = ranks.unwrap_or(TargetRanks(dims));
    ranks.validate(dims)?;
    let stage = HosvdStage0::new(&y)?;
    let bias = stage.bias_bracket(ranks)?;
    let out = stage.one_step(ranks)?;
    write_tensor(output, &out.estimate)?;
    write_sidecar(
        output,
        &Metadata {
            dims,
            seed: None,
            description: format!("one-step HOSVD estimate at ranks {ranks} of {}", input.display()),
        },
    )?;
    Ok(DenoiseReport {
        input: input.to_path_buf(),
        output: output.to_path_buf(),
        dims,
        ranks: ranks.0,
        bias,
        input_norm: y.frobenius_norm(),
        estimate_norm: out.estimate.frobenius_norm(),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
