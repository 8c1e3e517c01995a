//! CSV serialization of sweep results.
//!
//! Column order is a compatibility contract. Floats use six significant
//! digits in the style of C's `%g`; undefined subgroup values are empty
//! fields.

use std::fmt::Write as _;

use workday_core::{AgentTrace, EnsembleStats, Observables, PointResult, Quantity, SweepResult};

pub const END_OF_DAY_HEADER: &str = "eta,q,D,N,runs,pi_e_mean,pi_e_se,pi_i_mean,pi_i_se,pi_w_mean,pi_w_se,\
lambda_e_mean,lambda_e_se,lambda_i_mean,lambda_i_se,lambda_w_mean,lambda_w_se";
pub const SERIES_HEADER: &str = "t,pi_e,pi_i,pi_w,lambda_e,lambda_i,lambda_w";
pub const TRACE_HEADER: &str = "t,agent_id,stereotype,L,pi";

/// Formats `v` with six significant digits, `%g` style.
pub fn format_g6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let fixed = format!("{v:.*}", (5 - exp) as usize);
        trim_fraction(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa), exp.abs())
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(format_g6).unwrap_or_default()
}

fn end_of_day_row(out: &mut String, stats: &EnsembleStats) {
    let p = &stats.params;
    let _ = write!(
        out,
        "{},{},{},{},{}",
        format_g6(p.eta()),
        format_g6(p.contact_rate),
        p.max_duration,
        p.n_agents,
        stats.n_runs
    );
    for q in Quantity::ALL {
        let e = stats.get(q);
        let _ = write!(out, ",{},{}", cell(e.map(|e| e.mean)), cell(e.map(|e| e.stderr)));
    }
    out.push('\n');
}

/// End-of-day table, one row per grid point sorted by `(D, q, eta)`.
pub fn end_of_day_csv(result: &SweepResult) -> String {
    let mut out = String::from(END_OF_DAY_HEADER);
    out.push('\n');
    for point in result.sorted() {
        end_of_day_row(&mut out, &point.stats);
    }
    out
}

/// Ensemble-mean time series of one grid point, `t = 1..=T`.
pub fn series_csv(point: &PointResult) -> Option<String> {
    let series = point.stats.mean_series.as_ref()?;
    Some(series_table(series))
}

fn series_table(series: &[Observables]) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for (i, obs) in series.iter().enumerate() {
        let _ = write!(out, "{}", i + 1);
        for q in Quantity::ALL {
            let _ = write!(out, ",{}", cell(obs.get(q)));
        }
        out.push('\n');
    }
    out
}

/// Per-minute trace of the tracked agents, `t = 0..=T`.
pub fn trace_csv(traces: &[AgentTrace]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    let len = traces.iter().map(|a| a.samples.len()).max().unwrap_or(0);
    for i in 0..len {
        for trace in traces {
            if let Some(s) = trace.samples.get(i) {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    s.t,
                    trace.id,
                    trace.stereotype.as_str(),
                    s.motivation,
                    format_g6(s.pi)
                );
            }
        }
    }
    out
}

/// A parsed end-of-day row.
#[derive(Clone, Debug, PartialEq)]
pub struct EndOfDayRow {
    pub eta: f64,
    pub q: f64,
    pub max_duration: u32,
    pub n_agents: u32,
    pub runs: usize,
    /// `(mean, stderr)` per quantity, in column order.
    pub values: [Option<(f64, f64)>; 6],
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("header mismatch: expected `{END_OF_DAY_HEADER}`")]
    Header,
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
}

/// Parses an end-of-day CSV produced by [`end_of_day_csv`].
pub fn parse_end_of_day(text: &str) -> Result<Vec<EndOfDayRow>, ParseError> {
    let mut lines = text.lines();
    if lines.next() != Some(END_OF_DAY_HEADER) {
        return Err(ParseError::Header);
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let line_no = i + 2;
            let bad = |message: String| ParseError::Row { line: line_no, message };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 17 {
                return Err(bad(format!("expected 17 fields, found {}", f.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
            let int = |s: &str| s.parse::<u64>().map_err(|e| bad(format!("`{s}`: {e}")));
            let mut values = [None; 6];
            for (k, slot) in values.iter_mut().enumerate() {
                let (m, s) = (f[5 + 2 * k], f[6 + 2 * k]);
                *slot = match (m.is_empty(), s.is_empty()) {
                    (true, true) => None,
                    (false, false) => Some((num(m)?, num(s)?)),
                    _ => return Err(bad(format!("half-empty pair in column {}", 5 + 2 * k))),
                };
            }
            Ok(EndOfDayRow {
                eta: num(f[0])?,
                q: num(f[1])?,
                max_duration: int(f[2])? as u32,
                n_agents: int(f[3])? as u32,
                runs: int(f[4])? as usize,
                values,
            })
        })
        .collect()
}
