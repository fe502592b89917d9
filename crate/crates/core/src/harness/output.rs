//! CSV writers. Numbers use the `%g` convention with six significant
//! digits and lines end with `\n`.

use std::fmt::Write as _;
use std::path::Path;

use super::experiment::ResultRow;
use crate::error::Result;
use crate::jbrd::IterationTrace;

pub const RESULT_HEADER: &str = "sweep_name,sweep_value,scheme,N,M,trial_count,mean_sr_bps_hz,std_sr,\
mean_outer_iters,mean_wall_ms,infeasible_trials,seed_base";

pub const TRACE_HEADER: &str = "iteration,secrecy_rate,unclamped_sum,surrogate_objective,scnr_residual,\
power,modulus_deviation,inner_w_iters,inner_phi_iters,wall_ms";

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Formats like C's `printf("%g", x)`.
pub fn format_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    const P: i32 = 6;
    // Exponent after rounding to P significant digits.
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..P).contains(&exp) {
        let fixed = format!("{:.*}", (P - 1 - exp) as usize, x);
        trim_fraction(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_fraction(mantissa), sign, exp.abs())
    }
}

/// Renders result rows with a header line.
pub fn emit_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULT_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.sweep_name,
            format_g(r.sweep_value),
            r.scheme.name(),
            r.antennas,
            r.ris_elements,
            r.trial_count,
            format_g(r.mean_sr),
            format_g(r.std_sr),
            format_g(r.mean_outer_iters),
            format_g(r.mean_wall_ms),
            r.infeasible_trials,
            r.seed_base,
        );
    }
    out
}

/// Renders a per-iteration trace.
pub fn emit_trace(trace: &IterationTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for i in 0..trace.unclamped_sum.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            i,
            format_g(trace.secrecy_rate[i]),
            format_g(trace.unclamped_sum[i]),
            format_g(trace.surrogate_objective[i]),
            format_g(trace.scnr_residual[i]),
            format_g(trace.power[i]),
            format_g(trace.modulus_deviation[i]),
            trace.inner_w_iters[i],
            trace.inner_phi_iters[i],
            format_g(trace.wall_ms[i]),
        );
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

pub fn write_csv(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<()> {
    write_file(path.as_ref(), &emit_csv(rows))
}

pub fn write_trace(path: impl AsRef<Path>, trace: &IterationTrace) -> Result<()> {
    write_file(path.as_ref(), &emit_trace(trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (1.0 / 3.0, "0.333333"),
            (0.0, "0"),
            (1.0, "1"),
            (45.0, "45"),
            (-15.0, "-15"),
            (123456.0, "123456"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (999999.5, "1e+06"),
            (2.5, "2.5"),
            (1e100, "1e+100"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g(x), want, "{x}");
        }
    }

    #[test]
    fn header_has_twelve_columns() {
        assert_eq!(RESULT_HEADER.split(',').count(), 12);
        assert_eq!(emit_csv(&[]), format!("{RESULT_HEADER}\n"));
    }
}
