use std::fmt::Write;

use serde::Serialize;

use super::{format_g6, run_grid, ExperimentKind, ExperimentSpec, RunOptions, Signal};
use crate::bounds::{corollary_rate, thm1_variance_term, RateKind, RateParams};
use crate::error::Result;
use crate::estimators::{matrix_bias, BiasBracket, HosvdStage0, TargetRanks};
use crate::linalg::singular_values;

/// Empirical error and theoretical components at one rank.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub rank: usize,
    pub mean_relerr: f64,
    pub se_relerr: f64,
    pub variance_term: f64,
    pub bias: BiasBracket,
    pub signal_norm: f64,
}

/// Evaluates every rank `1..=d2` (the latent dimension `s` for tensors,
/// `n` for matrices; `1..=n` for covariance) on `spec`, ignoring
/// `spec.ranks`.
///
/// Bias and variance terms come from the signal of replicate 0; with the
/// generators used here the spectra, and so both terms, are the same for
/// every replicate.
pub fn bias_variance_sweep(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Vec<SweepRow>> {
    let top = match spec.kind {
        ExperimentKind::Covariance => spec.dims[0],
        _ => spec.dims[1],
    };
    let mut spec = spec.clone();
    spec.ranks = (1..=top).collect();
    let rows = run_grid(std::slice::from_ref(&spec), &RunOptions { bounds: false, ..*opts })?;

    let kappa = spec.kappa;
    let [d1, d2] = spec.dims;
    let terms: Vec<(f64, BiasBracket, f64)> = match spec.signal(0)? {
        Signal::Tensor(x) => {
            let stage = HosvdStage0::new(&x)?;
            let norm = x.frobenius_norm();
            spec.ranks
                .iter()
                .map(|&r| {
                    Ok((thm1_variance_term(kappa, [d1; 3], [r; 3]), stage.bias_bracket(TargetRanks::uniform(r))?, norm))
                })
                .collect::<Result<_>>()?
        }
        Signal::Matrix(x) => {
            let sigma = singular_values(&x)?;
            let norm = x.frobenius_norm();
            let (kind, m, n, samples) = match spec.kind {
                ExperimentKind::Covariance => (RateKind::Covariance, d1, d1, d2),
                _ => (RateKind::IidSubgaussian, d1, d2, 0),
            };
            spec.ranks
                .iter()
                .map(|&r| {
                    let rate = if kappa > 0.0 {
                        corollary_rate(kind, &RateParams { kappa, r, m, n, samples })?
                    } else {
                        0.0
                    };
                    Ok((rate, matrix_bias(&sigma, r), norm))
                })
                .collect::<Result<_>>()?
        }
    };

    Ok(rows
        .iter()
        .zip(terms)
        .map(|(row, (variance_term, bias, signal_norm))| SweepRow {
            rank: row.rank,
            mean_relerr: row.mean_relerr,
            se_relerr: row.se_relerr,
            variance_term,
            bias,
            signal_norm,
        })
        .collect())
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("rank,mean_relerr,se_relerr,variance_term,bias_lower,bias_upper,signal_norm\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.rank,
            format_g6(r.mean_relerr),
            format_g6(r.se_relerr),
            format_g6(r.variance_term),
            format_g6(r.bias.lower),
            format_g6(r.bias.upper),
            format_g6(r.signal_norm)
        )
        .expect("writing to a String");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_sweep_is_pure_bias() {
        let spec = ExperimentSpec::new(ExperimentKind::Tensor, [10, 5], 1.0, vec![]).with_kappa(0.0).with_replicates(2);
        let rows = bias_variance_sweep(&spec, &RunOptions::default()).unwrap();
        assert_eq!(rows.len(), 5);
        for w in rows.windows(2) {
            assert!(w[1].mean_relerr <= w[0].mean_relerr + 1e-12);
            assert!(w[1].bias.lower <= w[0].bias.lower);
        }
        assert!(rows[4].mean_relerr <= 1e-9);
        assert!(sweep_to_csv(&rows).starts_with("rank,mean_relerr"));
    }
}
