use std::fmt::Write as _;

use cssm_core::eval::evaluate;
use cssm_core::{
    to_run_entries, Corpus, EmbeddingTable, InvertedIndex, Metric, MetricReport, QrelEntry, Query, QueryContext,
    RunConfig, RunEntry,
};

use crate::args::SweepParam;
use crate::UsageError;

const MAX_POINTS: usize = 10_000;

/// Parses `start:stop:step` (stop inclusive) or `v1,v2,...`.
pub fn parse_values(spec: &str, param: SweepParam) -> Result<Vec<f64>, UsageError> {
    let bad = |m: &str| UsageError(format!("--values `{spec}`: {m}"));
    let number = |s: &str| -> Result<f64, UsageError> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad(&format!("`{s}` is not a number")))
    };
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step"));
        }
        let (start, stop, step) = (number(parts[0])?, number(parts[1])?, number(parts[2])?);
        if step <= 0.0 || stop < start {
            return Err(bad("need step > 0 and stop >= start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if n > MAX_POINTS {
            return Err(bad("too many points"));
        }
        // Rounding keeps 0.1 + 2 * 0.1 from printing as 0.30000000000000004.
        (0..n).map(|i| round12(start + i as f64 * step)).collect()
    } else {
        spec.split(',').map(number).collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(bad("no values"));
    }
    for &v in &values {
        match param {
            SweepParam::Window if v < 1.0 || v.fract() != 0.0 => {
                return Err(bad("window values must be positive integers"))
            }
            SweepParam::Alpha | SweepParam::Beta if v < 0.0 => return Err(bad("values must be >= 0")),
            _ => {}
        }
    }
    Ok(values)
}

fn round12(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

pub fn apply(cfg: &RunConfig, param: SweepParam, value: f64) -> RunConfig {
    let mut cfg = cfg.clone();
    match param {
        SweepParam::Alpha => cfg.salience.alpha = value,
        SweepParam::Beta => cfg.aggregation.beta = value,
        SweepParam::Window => cfg.salience.window = value as usize,
    }
    cfg
}

pub fn param_name(param: SweepParam) -> &'static str {
    match param {
        SweepParam::Alpha => "alpha",
        SweepParam::Beta => "beta",
        SweepParam::Window => "window",
    }
}

pub struct SweepInputs<'a> {
    pub corpus: &'a Corpus,
    pub index: &'a InvertedIndex,
    pub table: &'a EmbeddingTable,
    pub queries: &'a [Query],
    pub qrels: &'a [QrelEntry],
}

/// Ranks every query under every value and evaluates each resulting run.
/// Candidate pools and similarity profiles are computed once per query.
pub fn run_sweep(
    inputs: &SweepInputs<'_>,
    cfg: &RunConfig,
    param: SweepParam,
    values: &[f64],
) -> cssm_core::Result<Vec<(f64, MetricReport)>> {
    let configs: Vec<RunConfig> = values.iter().map(|&v| apply(cfg, param, v)).collect();
    let mut runs: Vec<Vec<RunEntry>> = vec![Vec::new(); values.len()];
    for query in inputs.queries {
        let ctx = QueryContext::prepare(query, inputs.corpus, inputs.index, inputs.table, &cfg.aggregation)?;
        for (run, c) in runs.iter_mut().zip(&configs) {
            let scored = ctx.score(&c.salience, &c.aggregation)?;
            run.extend(to_run_entries(&query.query_id, &scored, &c.tag));
        }
    }
    Ok(values
        .iter()
        .zip(runs)
        .map(|(&v, run)| (v, evaluate(&run, inputs.qrels)))
        .collect())
}

pub fn format_table(param: SweepParam, rows: &[(f64, MetricReport)]) -> String {
    let mut out = String::from(param_name(param));
    for m in Metric::ALL {
        let _ = write!(out, "\t{}", m.name());
    }
    out.push('\n');
    for (value, report) in rows {
        let _ = write!(out, "{value}");
        for m in Metric::ALL {
            let _ = write!(out, "\t{:.6}", report.mean.get(m));
        }
        out.push('\n');
    }
    out
}
