//! Session state: the uploaded image, the stroke journal and the artifacts
//! of the last run. Nothing here knows about HTTP.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rwseg_core::graph::{DEFAULT_BETA, DEFAULT_WEIGHT_FLOOR};
use rwseg_core::imageio::{self, Trimap};
use rwseg_core::strokes::rasterize;
use rwseg_core::{
    error_rate, run_algorithm, Algorithm, Error, ErrorRate, FeedbackParams, ImageGrid, IterationRecord, Result,
    RunContext, SeedState, SolveOptions, StopReason, Stroke, Weighting,
};
use serde::{Deserialize, Serialize};

const IMAGE_FILE: &str = "image.png";
const TRIMAP_FILE: &str = "trimap.png";
const JOURNAL_FILE: &str = "journal.jsonl";
const PARAMS_FILE: &str = "params.json";
const META_FILE: &str = "session.json";

/// One journaled edit of the user stroke layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum StrokeOp {
    /// Paint a foreground, background or erase stroke.
    Add(Stroke),
    /// Revert the most recent add or clear that is still in effect.
    Undo,
    Clear,
}

/// Everything a run needs besides the seeds. Every field has the library
/// default, so a request only names what it changes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunParams {
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub delta: f64,
    pub lambda: f64,
    pub xi: Option<f64>,
    pub max_iter: usize,
    pub sample_fraction: f64,
    pub rng_seed: u64,
    pub beta: f64,
    pub weight_floor: f64,
    pub tolerance: f64,
}

impl Default for RunParams {
    fn default() -> Self {
        let f = FeedbackParams::default();
        RunParams {
            algorithm: Algorithm::Ibrw,
            epsilon: f.epsilon_seed,
            delta: f.delta,
            lambda: f.lambda,
            xi: f.xi,
            max_iter: f.max_outer_iterations,
            sample_fraction: f.sample_fraction,
            rng_seed: f.rng_seed,
            beta: DEFAULT_BETA,
            weight_floor: DEFAULT_WEIGHT_FLOOR,
            tolerance: SolveOptions::default().tolerance,
        }
    }
}

impl RunParams {
    pub fn feedback(&self) -> FeedbackParams {
        FeedbackParams {
            epsilon_seed: self.epsilon,
            delta: self.delta,
            lambda: self.lambda,
            xi: self.xi,
            max_outer_iterations: self.max_iter,
            sample_fraction: self.sample_fraction,
            rng_seed: self.rng_seed,
        }
    }

    pub fn weighting(&self) -> Weighting {
        Weighting {
            beta: self.beta,
            floor: self.weight_floor,
        }
    }

    pub fn solve(&self) -> SolveOptions {
        SolveOptions {
            tolerance: self.tolerance,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.feedback().validate()?;
        self.solve().validate()?;
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidInput(format!("beta must be nonnegative, got {}", self.beta)));
        }
        if !(self.weight_floor > 0.0 && self.weight_floor.is_finite()) {
            return Err(Error::InvalidInput(format!("weight floor must be positive, got {}", self.weight_floor)));
        }
        Ok(())
    }
}

/// The response body of a segment call.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub params: RunParams,
    pub iterations: usize,
    pub stop: StopReason,
    pub degraded: Option<String>,
    /// Segmentation potential after every solve.
    pub potentials: Vec<f64>,
    pub trace: Vec<IterationRecord>,
    pub user_foreground_seeds: usize,
    pub user_background_seeds: usize,
    /// User plus promoted seeds behind the final map.
    pub final_foreground_seeds: usize,
    pub final_background_seeds: usize,
    pub boundary_pixels: usize,
    pub min_weight: f64,
    pub xi: f64,
    pub error: Option<ErrorRate>,
    pub elapsed_ms: f64,
}

/// Encoded outputs of the last run, served as-is.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub summary: RunSummary,
    pub probability_png: Vec<u8>,
    pub probability_pmap: Vec<u8>,
    pub labels_png: Vec<u8>,
    pub boundary_png: Vec<u8>,
    pub trace_json: Vec<u8>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedCounts {
    pub strokes: usize,
    pub journal: usize,
    pub foreground_seeds: usize,
    pub background_seeds: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionInfo {
    pub id: String,
    pub width: usize,
    pub height: usize,
    pub has_trimap: bool,
    #[serde(flatten)]
    pub seeds: SeedCounts,
    pub params: RunParams,
    pub has_result: bool,
    /// A mutating request holds the session.
    pub busy: bool,
    pub created_ms: u64,
    pub updated_ms: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    id: String,
    created_ms: u64,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// Replays a journal into the strokes in effect.
pub fn replay(ops: &[StrokeOp]) -> Result<Vec<Stroke>> {
    let mut states: Vec<Vec<Stroke>> = vec![Vec::new()];
    for op in ops {
        let current = states.last().expect("initial state is never popped").clone();
        match op {
            StrokeOp::Add(s) => {
                let mut next = current;
                next.push(s.clone());
                states.push(next);
            }
            StrokeOp::Clear => states.push(Vec::new()),
            StrokeOp::Undo => {
                if states.len() == 1 {
                    return Err(Error::InvalidInput("nothing to undo".into()));
                }
                states.pop();
            }
        }
    }
    Ok(states.pop().expect("initial state is never popped"))
}

#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub image: ImageGrid,
    pub trimap: Option<Trimap>,
    journal: Vec<StrokeOp>,
    strokes: Vec<Stroke>,
    pub params: RunParams,
    pub last: Option<Artifacts>,
    created_ms: u64,
    updated_ms: u64,
    /// Write-through directory, if persistence is on.
    dir: Option<PathBuf>,
}

impl Session {
    /// A fresh session. With `root` set, the image, trimap and metadata are
    /// written under `root/<id>` before the session is returned.
    pub fn create(id: String, image: ImageGrid, trimap: Option<Trimap>, root: Option<&Path>) -> Result<Self> {
        if let Some(t) = &trimap {
            if (t.width(), t.height()) != (image.width(), image.height()) {
                return Err(Error::DimensionMismatch {
                    expected: (image.width(), image.height()),
                    found: (t.width(), t.height()),
                });
            }
        }
        let now = now_ms();
        let session = Session {
            dir: root.map(|r| r.join(&id)),
            id,
            image,
            trimap,
            journal: Vec::new(),
            strokes: Vec::new(),
            params: RunParams::default(),
            last: None,
            created_ms: now,
            updated_ms: now,
        };
        if let Some(dir) = &session.dir {
            fs::create_dir_all(dir)?;
            imageio::save_image(&session.image, dir.join(IMAGE_FILE))?;
            if let Some(t) = &session.trimap {
                imageio::save_trimap(t, dir.join(TRIMAP_FILE))?;
            }
            let meta = Meta {
                id: session.id.clone(),
                created_ms: now,
            };
            fs::write(dir.join(META_FILE), serde_json::to_vec(&meta).map_err(std::io::Error::other)?)?;
            fs::write(dir.join(JOURNAL_FILE), b"")?;
        }
        Ok(session)
    }

    /// Rebuilds a session from its write-through directory. Run artifacts
    /// are not persisted; the next segment call recomputes them.
    pub fn recover(dir: &Path) -> Result<Self> {
        let meta: Meta = serde_json::from_slice(&fs::read(dir.join(META_FILE))?)
            .map_err(|e| Error::Corrupt(format!("{}: {e}", META_FILE)))?;
        let image = imageio::load_image(dir.join(IMAGE_FILE))?;
        let dims = Some((image.width(), image.height()));
        let trimap_path = dir.join(TRIMAP_FILE);
        let trimap = trimap_path.is_file().then(|| imageio::load_trimap(&trimap_path, dims)).transpose()?;
        let journal = fs::read_to_string(dir.join(JOURNAL_FILE))?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| Error::Corrupt(format!("{}: {e}", JOURNAL_FILE))))
            .collect::<Result<Vec<StrokeOp>>>()?;
        let strokes = replay(&journal)?;
        let params_path = dir.join(PARAMS_FILE);
        let params = if params_path.is_file() {
            serde_json::from_slice(&fs::read(&params_path)?)
                .map_err(|e| Error::Corrupt(format!("{}: {e}", PARAMS_FILE)))?
        } else {
            RunParams::default()
        };
        Ok(Session {
            id: meta.id,
            image,
            trimap,
            journal,
            strokes,
            params,
            last: None,
            created_ms: meta.created_ms,
            updated_ms: now_ms(),
            dir: Some(dir.to_path_buf()),
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.image.width(), self.image.height())
    }

    /// User seeds from the strokes in effect.
    pub fn seeds(&self) -> SeedState {
        let (w, h) = self.dims();
        rasterize(w, h, &self.strokes).to_seed_state()
    }

    pub fn counts(&self) -> SeedCounts {
        let seeds = self.seeds();
        SeedCounts {
            strokes: self.strokes.len(),
            journal: self.journal.len(),
            foreground_seeds: seeds.foreground_count(),
            background_seeds: seeds.background_count(),
        }
    }

    pub fn journal(&self) -> &[StrokeOp] {
        &self.journal
    }

    /// Validates and journals one edit. The journal only grows on success.
    pub fn apply(&mut self, op: StrokeOp) -> Result<SeedCounts> {
        if let StrokeOp::Add(s) = &op {
            let (w, h) = self.dims();
            s.validate(w, h)?;
        }
        let mut journal = self.journal.clone();
        journal.push(op.clone());
        let strokes = replay(&journal)?;
        if let Some(dir) = &self.dir {
            let mut line = serde_json::to_vec(&op).map_err(std::io::Error::other)?;
            line.push(b'\n');
            OpenOptions::new().append(true).create(true).open(dir.join(JOURNAL_FILE))?.write_all(&line)?;
        }
        self.journal = journal;
        self.strokes = strokes;
        self.updated_ms = now_ms();
        Ok(self.counts())
    }

    /// Records the parameters and artifacts of a finished run.
    pub fn store_run(&mut self, artifacts: Artifacts) -> Result<()> {
        self.params = artifacts.summary.params;
        if let Some(dir) = &self.dir {
            fs::write(
                dir.join(PARAMS_FILE),
                serde_json::to_vec_pretty(&self.params).map_err(std::io::Error::other)?,
            )?;
        }
        self.last = Some(artifacts);
        self.updated_ms = now_ms();
        Ok(())
    }

    pub fn info(&self) -> SessionInfo {
        let (width, height) = self.dims();
        SessionInfo {
            id: self.id.clone(),
            width,
            height,
            has_trimap: self.trimap.is_some(),
            seeds: self.counts(),
            params: self.params,
            has_result: self.last.is_some(),
            busy: false,
            created_ms: self.created_ms,
            updated_ms: self.updated_ms,
        }
    }

    /// Removes the write-through directory.
    pub fn purge(&self) -> Result<()> {
        if let Some(dir) = &self.dir {
            if dir.exists() {
                fs::remove_dir_all(dir)?;
            }
        }
        Ok(())
    }
}

/// Inputs of a run, detached from the session so the lock is not held
/// while solving.
#[derive(Debug, Clone)]
pub struct RunInput {
    pub image: ImageGrid,
    pub trimap: Option<Trimap>,
    pub seeds: SeedState,
    pub params: RunParams,
}

pub fn execute(input: &RunInput) -> Result<Artifacts> {
    let p = &input.params;
    p.validate()?;
    let start = Instant::now();
    let ctx = RunContext {
        weighting: p.weighting(),
        solve: p.solve(),
        ground_truth: input.trimap.as_ref(),
        keep_maps: false,
    };
    let out = run_algorithm(p.algorithm, &input.image, &input.seeds, &p.feedback(), &ctx)?;
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    let (w, h) = (input.image.width(), input.image.height());
    let map = &out.map;
    let band = rwseg_core::boundary_set(map, &out.seeds, p.delta);
    let error = input.trimap.as_ref().map(|t| error_rate(map.labels(), (w, h), t)).transpose()?;
    let trace_json = serde_json::to_vec(&out.trace.records).map_err(std::io::Error::other)?;
    let summary = RunSummary {
        algorithm: out.algorithm,
        params: *p,
        iterations: out.trace.len().saturating_sub(1),
        stop: out.stop,
        degraded: out.degraded.clone(),
        potentials: out.trace.potentials(),
        trace: out.trace.records.clone(),
        user_foreground_seeds: input.seeds.foreground_count(),
        user_background_seeds: input.seeds.background_count(),
        final_foreground_seeds: out.seeds.foreground_count(),
        final_background_seeds: out.seeds.background_count(),
        boundary_pixels: band.len(),
        min_weight: out.min_weight,
        xi: out.xi,
        error,
        elapsed_ms,
    };
    Ok(Artifacts {
        summary,
        probability_png: imageio::encode_probability_png(map)?,
        probability_pmap: imageio::encode_probability_raster(map),
        labels_png: imageio::encode_labels(map.labels(), w, h)?,
        boundary_png: imageio::encode_boundary_overlay(&band, w, h)?,
        trace_json,
    })
}
