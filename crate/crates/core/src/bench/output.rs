use std::fmt::Write;

use super::SummaryRow;
use crate::error::Result;

pub const CSV_HEADER: &str = "kind,lambda,dim1,dim2,rank,replicates,mean_relerr,se_relerr,seed,wall_time_s";

/// `printf("%g")`-style formatting with 6 significant digits.
pub fn format_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // Round to 6 significant digits first; the exponent after rounding
    // decides between fixed and scientific notation.
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Header plus one line per row.
pub fn rows_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.kind,
            format_g6(r.lambda),
            r.dim1,
            r.dim2,
            r.rank,
            r.replicates,
            format_g6(r.mean_relerr),
            format_g6(r.se_relerr),
            r.seed,
            format_g6(r.wall_time_s)
        )
        .expect("writing to a String");
    }
    out
}

pub fn rows_to_json(rows: &[SummaryRow]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g6_matches_printf() {
        let cases = [
            (0.1178, "0.1178"),
            (0.00031, "0.00031"),
            (1.0 / 3.0, "0.333333"),
            (10.0, "10"),
            (123456.7, "123457"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (999999.7, "1e+06"),
            (-2.5, "-2.5"),
            (0.0, "0"),
            (50.0, "50"),
        ];
        for (x, s) in cases {
            assert_eq!(format_g6(x), s, "{x}");
        }
    }
}
