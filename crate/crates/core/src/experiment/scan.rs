use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{build_policy, ExperimentSpec, OutputFormat, PolicyKind};
use crate::analysis::theoretical_bounds;
use crate::error::{Error, Result};
use crate::rng::trial_seed;
use crate::sim::{simulate_run, SimConfig};

/// One run of one policy. Column order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub policy: String,
    pub n: usize,
    pub delta: f64,
    pub trial: u64,
    pub seed: u64,
    pub max_load: u32,
    pub memory_bits: u64,
    #[serde(rename = "lower_L")]
    pub lower_l: f64,
    #[serde(rename = "upper_T")]
    pub upper_t: f64,
    pub runtime_ms: f64,
}

pub const CSV_HEADER: &str = "policy,n,delta,trial,seed,max_load,memory_bits,lower_L,upper_T,runtime_ms";

/// Run every `(policy, n, trial)` combination. Trials run in parallel; the
/// rows come back sorted by policy name, `n`, then trial.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ScalingRow>> {
    spec.validate()?;
    let params = spec.params();
    let jobs: Vec<(PolicyKind, usize, u64)> = spec
        .policies
        .iter()
        .flat_map(|&k| {
            spec.n_values
                .iter()
                .flat_map(move |&n| (0..spec.trials).map(move |t| (k, n, t)))
        })
        .collect();

    let mut rows = jobs
        .into_par_iter()
        .map(|(kind, n, trial)| {
            let bounds = theoretical_bounds(n as u64, spec.delta)?;
            let seed = trial_seed(spec.base_seed, trial);
            let config = SimConfig {
                n,
                balls: spec.balls.unwrap_or(n as u64),
                seed,
                record_trace: false,
            };
            let mut policy = build_policy(kind, n, spec.delta, &params)?;
            let started = Instant::now();
            let run = simulate_run(&config, policy.as_mut())?;
            let runtime_ms = if spec.timing {
                started.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            Ok(ScalingRow {
                policy: kind.name().to_string(),
                n,
                delta: spec.delta,
                trial,
                seed,
                max_load: run.max_load,
                memory_bits: run.memory_bits,
                lower_l: bounds.lower_l,
                upper_t: bounds.upper_t,
                runtime_ms,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    rows.sort_by(|a, b| (&a.policy, a.n, a.trial).cmp(&(&b.policy, b.n, b.trial)));
    Ok(rows)
}

pub fn emit_to_writer<W: Write>(rows: &[ScalingRow], format: OutputFormat, mut out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::NoRows);
    }
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Write `rows` to `path`. Nothing is created when there are no rows.
pub fn emit(rows: &[ScalingRow], format: OutputFormat, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    emit_to_writer(rows, format, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_rows_json(s: &str) -> Result<Vec<ScalingRow>> {
    Ok(serde_json::from_str(s)?)
}
