//! The `segment` subcommand.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rwseg_core::imageio;
use rwseg_core::walks::boundary_set;
use rwseg_core::{error_rate, run_algorithm, Algorithm, ErrorRate, FeedbackOutcome, RunContext, StopReason};
use serde::Serialize;

use crate::{load_cases, Case, CliError, SegmentArgs};

pub const LABELS_FILE: &str = "labels.png";
pub const PROBABILITY_PNG: &str = "probability.png";
pub const PROBABILITY_RASTER: &str = "probability.pmap";
pub const BOUNDARY_FILE: &str = "boundary.png";
pub const TRACE_FILE: &str = "trace.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const ITERATIONS_DIR: &str = "iterations";

/// What a run produced, also written as `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct CaseSummary {
    pub case: String,
    pub algorithm: Algorithm,
    pub width: usize,
    pub height: usize,
    pub min_weight: f64,
    pub lambda: f64,
    pub xi: f64,
    /// Outer iterations after the initial solve.
    pub iterations: usize,
    pub stop: StopReason,
    pub degraded: Option<String>,
    pub final_potential: f64,
    pub initial_boundary: usize,
    pub final_boundary: usize,
    pub foreground_seeds: usize,
    pub background_seeds: usize,
    pub error: Option<ErrorRate>,
    #[serde(skip)]
    pub dir: PathBuf,
}

impl CaseSummary {
    pub fn headline(&self) -> String {
        let error = match &self.error {
            Some(e) => format!(", error {:.2}%", 100.0 * e.rate),
            None => String::new(),
        };
        format!(
            "{} {}: {} iterations ({}){error}",
            self.case,
            self.algorithm.name(),
            self.iterations,
            serde_json::to_value(self.stop).unwrap().as_str().unwrap_or("?"),
        )
    }
}

/// Runs every case and writes its outputs. Stops at the first failing case.
pub fn run_segment(args: &SegmentArgs) -> Result<Vec<CaseSummary>, CliError> {
    args.params.validate()?;
    let cases = load_cases(&args.input)?;
    cases
        .iter()
        .map(|case| {
            let dir = if case.nested { args.out.join(&case.name) } else { args.out.clone() };
            segment_case(case, args, &dir)
        })
        .collect()
}

fn segment_case(case: &Case, args: &SegmentArgs, dir: &Path) -> Result<CaseSummary, CliError> {
    let ctx = RunContext {
        weighting: args.params.weighting(),
        solve: args.params.solve(),
        ground_truth: case.trimap.as_ref(),
        keep_maps: args.dump_iterations,
    };
    let seeds = case.seeds.to_seed_state();
    let out = run_algorithm(args.params.algorithm, &case.image, &seeds, &args.params.feedback(), &ctx)?;
    fs::create_dir_all(dir)?;
    write_outputs(&out, args, dir)?;

    let (w, h) = (case.image.width(), case.image.height());
    let error = case
        .trimap
        .as_ref()
        .map(|t| error_rate(out.map.labels(), (w, h), t))
        .transpose()?;
    let records = &out.trace.records;
    let summary = CaseSummary {
        case: case.name.clone(),
        algorithm: out.algorithm,
        width: w,
        height: h,
        min_weight: out.min_weight,
        lambda: args.params.lambda,
        xi: out.xi,
        iterations: records.len().saturating_sub(1),
        stop: out.stop,
        degraded: out.degraded.clone(),
        final_potential: records.last().map_or(0.0, |r| r.potential),
        initial_boundary: records.first().map_or(0, |r| r.boundary_count),
        final_boundary: records.last().map_or(0, |r| r.boundary_count),
        foreground_seeds: out.seeds.foreground_count(),
        background_seeds: out.seeds.background_count(),
        error,
        dir: dir.to_path_buf(),
    };
    let mut json = serde_json::to_vec_pretty(&summary).map_err(std::io::Error::other)?;
    json.push(b'\n');
    fs::write(dir.join(SUMMARY_FILE), json)?;
    Ok(summary)
}

fn write_outputs(out: &FeedbackOutcome, args: &SegmentArgs, dir: &Path) -> Result<(), CliError> {
    let map = &out.map;
    let (w, h) = (map.width(), map.height());
    imageio::save_labels(map.labels(), w, h, dir.join(LABELS_FILE))?;
    imageio::save_probability_png(map, dir.join(PROBABILITY_PNG))?;
    imageio::save_probability_raster(map, dir.join(PROBABILITY_RASTER))?;
    let band = boundary_set(map, &out.seeds, args.params.delta);
    fs::write(dir.join(BOUNDARY_FILE), imageio::encode_boundary_overlay(&band, w, h)?)?;

    let mut trace = Vec::new();
    for r in &out.trace.records {
        serde_json::to_writer(&mut trace, r).map_err(std::io::Error::other)?;
        trace.write_all(b"\n")?;
    }
    fs::write(dir.join(TRACE_FILE), trace)?;

    if args.dump_iterations {
        let it = dir.join(ITERATIONS_DIR);
        fs::create_dir_all(&it)?;
        for (k, m) in out.maps.iter().enumerate() {
            imageio::save_probability_raster(m, it.join(format!("iter_{k:03}.pmap")))?;
        }
    }
    Ok(())
}
