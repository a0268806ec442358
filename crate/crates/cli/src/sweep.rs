//! The `sweep` subcommand: error rate, final potential and iteration count
//! over a one- or two-parameter grid.

use std::fs::File;
use std::io;

use rayon::prelude::*;
use rwseg_core::graph::compute_weights;
use rwseg_core::{error_rate, feedback::run_on_weights, Error, RunContext, StopReason};
use serde::Serialize;

use crate::{load_cases, Case, CliError, ParamArgs, SweepArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Epsilon,
    Lambda,
    Delta,
}

impl SweepParam {
    fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "epsilon" => Ok(SweepParam::Epsilon),
            "lambda" => Ok(SweepParam::Lambda),
            "delta" => Ok(SweepParam::Delta),
            other => Err(CliError::Usage(format!(
                "cannot sweep {other:?}; use epsilon, lambda or delta"
            ))),
        }
    }

    fn apply(self, params: &mut ParamArgs, value: f64) {
        match self {
            SweepParam::Epsilon => params.epsilon = value,
            SweepParam::Lambda => params.lambda = value,
            SweepParam::Delta => params.delta = value,
        }
    }
}

/// Parses `NAME=v1,v2,...`.
pub fn parse_vary(spec: &str) -> Result<(SweepParam, Vec<f64>), CliError> {
    let (name, values) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected NAME=v1,v2,... in {spec:?}")))?;
    let param = SweepParam::parse(name.trim())?;
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad value {v:?} for {name}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::Usage(format!("no values for {name}")));
    }
    Ok((param, values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepStatus {
    Ok,
    /// Lambda above the smallest edge weight.
    Infeasible,
    /// The loop stopped early on a solver failure; metrics are for the last good map.
    Degraded,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub case: String,
    pub algorithm: String,
    pub epsilon: f64,
    pub lambda: f64,
    pub delta: f64,
    pub status: SweepStatus,
    pub min_weight: f64,
    pub error_rate: Option<f64>,
    pub misclassified: Option<usize>,
    pub final_potential: Option<f64>,
    pub iterations: Option<usize>,
    pub stop: Option<StopReason>,
    pub message: String,
}

/// Evaluates every (case, grid point) pair in parallel and writes the rows,
/// in case-major, grid-row-major order, to `args.out`.
pub fn run_sweep(args: &SweepArgs) -> Result<Vec<SweepRow>, CliError> {
    if args.vary.len() > 2 {
        return Err(CliError::Usage("at most two parameters can be swept at once".into()));
    }
    let axes = args.vary.iter().map(|s| parse_vary(s)).collect::<Result<Vec<_>, _>>()?;
    if axes.len() == 2 && axes[0].0 == axes[1].0 {
        return Err(CliError::Usage("the two swept parameters must differ".into()));
    }

    let mut points = vec![args.params.clone()];
    for (param, values) in &axes {
        points = points
            .iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    param.apply(&mut q, v);
                    q
                })
            })
            .collect();
    }
    for p in &points {
        p.validate()?;
    }

    let cases = load_cases(&args.input)?;
    let jobs: Vec<(&Case, &ParamArgs)> = cases.iter().flat_map(|c| points.iter().map(move |p| (c, p))).collect();
    let rows: Vec<SweepRow> = jobs.par_iter().map(|(c, p)| sweep_point(c, p)).collect();

    if args.out.as_os_str() == "-" {
        write_rows(io::stdout().lock(), &rows)?;
    } else {
        write_rows(File::create(&args.out)?, &rows)?;
    }
    Ok(rows)
}

fn write_rows(sink: impl io::Write, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink);
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Core(Error::Io(io::Error::other(e))))?;
    }
    w.flush()?;
    Ok(())
}

fn sweep_point(case: &Case, p: &ParamArgs) -> SweepRow {
    let mut row = SweepRow {
        case: case.name.clone(),
        algorithm: p.algorithm.name().to_string(),
        epsilon: p.epsilon,
        lambda: p.lambda,
        delta: p.delta,
        status: SweepStatus::Failed,
        min_weight: f64::NAN,
        error_rate: None,
        misclassified: None,
        final_potential: None,
        iterations: None,
        stop: None,
        message: String::new(),
    };
    let weights = match compute_weights(&case.image, p.weighting()) {
        Ok(w) => w,
        Err(e) => {
            row.message = e.to_string();
            return row;
        }
    };
    row.min_weight = weights.min_weight();
    let ctx = RunContext {
        weighting: p.weighting(),
        solve: p.solve(),
        ground_truth: case.trimap.as_ref(),
        keep_maps: false,
    };
    let out = match run_on_weights(p.algorithm, &weights, &case.seeds.to_seed_state(), &p.feedback(), &ctx) {
        Ok(out) => out,
        Err(e) => {
            row.status = match e {
                Error::ConvexityViolation { .. } => SweepStatus::Infeasible,
                _ => SweepStatus::Failed,
            };
            row.message = e.to_string();
            return row;
        }
    };
    row.status = if out.degraded.is_some() { SweepStatus::Degraded } else { SweepStatus::Ok };
    row.message = out.degraded.clone().unwrap_or_default();
    row.final_potential = out.trace.last().map(|r| r.potential);
    row.iterations = Some(out.trace.len().saturating_sub(1));
    row.stop = Some(out.stop);
    if let Some(t) = &case.trimap {
        match error_rate(out.map.labels(), (case.image.width(), case.image.height()), t) {
            Ok(e) => {
                row.error_rate = Some(e.rate);
                row.misclassified = Some(e.misclassified);
            }
            Err(e) => {
                row.status = SweepStatus::Failed;
                row.message = e.to_string();
            }
        }
    }
    row
}
