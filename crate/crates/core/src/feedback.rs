//! Segmentation potential, semi-seed selection and the iterative loops.
//!
//! Both loops start from basic random walks on the user seeds. Each outer
//! iteration promotes confident unseeded pixels to seeds, re-solves, and
//! stops once the potential stops dropping by more than `xi`, the iteration
//! budget is spent, or the system would be re-solved unchanged. The boundary
//! variant additionally marks near-0.5 pixels of the previous map as `S_E`
//! and solves the boundary-penalized system.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{check_lambda, compute_weights, EdgeWeights, ImageGrid, Weighting};
use crate::imageio::{Trimap, TrimapClass};
use crate::seeds::{Label, Provenance, SeedState};
use crate::solver::SolveOptions;
use crate::walks::{boundary_random_walks_on, boundary_set, random_walks_on, ProbabilityMap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackParams {
    /// Semi-seed threshold: `p < eps` becomes background, `p > 1 - eps`
    /// foreground.
    pub epsilon_seed: f64,
    /// Half-width of the boundary band around 0.5.
    pub delta: f64,
    /// Boundary penalty weight.
    pub lambda: f64,
    /// Absolute potential-decrease threshold. `None` uses `1e-3 * |s_p|` of
    /// the initial map.
    pub xi: Option<f64>,
    pub max_outer_iterations: usize,
    /// Fraction of eligible semi-seeds kept per class and iteration.
    pub sample_fraction: f64,
    pub rng_seed: u64,
}

pub const RELATIVE_XI: f64 = 1e-3;

impl Default for FeedbackParams {
    fn default() -> Self {
        FeedbackParams {
            epsilon_seed: 0.1,
            delta: 0.1,
            lambda: 0.005,
            xi: None,
            max_outer_iterations: 10,
            sample_fraction: 1.0,
            rng_seed: 0,
        }
    }
}

impl FeedbackParams {
    pub fn validate(&self) -> Result<()> {
        let open_half = |v: f64| v > 0.0 && v < 0.5;
        if !open_half(self.epsilon_seed) {
            return Err(Error::invalid(format!("epsilon must be in (0, 0.5), got {}", self.epsilon_seed)));
        }
        if !open_half(self.delta) {
            return Err(Error::invalid(format!("delta must be in (0, 0.5), got {}", self.delta)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be nonnegative, got {}", self.lambda)));
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return Err(Error::invalid(format!(
                "sample fraction must be in (0, 1], got {}",
                self.sample_fraction
            )));
        }
        if self.max_outer_iterations == 0 {
            return Err(Error::invalid("max iterations must be at least 1"));
        }
        if let Some(xi) = self.xi {
            if !(xi >= 0.0 && xi.is_finite()) {
                return Err(Error::invalid(format!("xi must be nonnegative, got {xi}")));
            }
        }
        Ok(())
    }
}

/// `-sum_i (p_i - 0.5)^2` over every pixel, seeds included, using the
/// clamped probabilities.
pub fn segmentation_potential(map: &ProbabilityMap) -> f64 {
    -map.clamped().iter().map(|p| (p - 0.5) * (p - 0.5)).sum::<f64>()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SemiSeeds {
    pub foreground: Vec<usize>,
    pub background: Vec<usize>,
}

impl SemiSeeds {
    pub fn is_empty(&self) -> bool {
        self.foreground.is_empty() && self.background.is_empty()
    }
}

/// Semi-seed selection with a generator seeded from `params.rng_seed`.
pub fn select_semi_seeds(map: &ProbabilityMap, seeds: &SeedState, params: &FeedbackParams) -> SemiSeeds {
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    select_semi_seeds_with(map, seeds, params, &mut rng)
}

/// Eligible pixels are the unseeded ones beyond the thresholds; of each
/// class `round(rho * count)` are kept by uniform sampling. Results are in
/// ascending pixel order.
pub fn select_semi_seeds_with(
    map: &ProbabilityMap,
    seeds: &SeedState,
    params: &FeedbackParams,
    rng: &mut ChaCha8Rng,
) -> SemiSeeds {
    let eps = params.epsilon_seed;
    let mut fg = Vec::new();
    let mut bg = Vec::new();
    for (i, &p) in map.clamped().iter().enumerate() {
        if seeds.is_seed(i) {
            continue;
        }
        if p < eps {
            bg.push(i);
        } else if p > 1.0 - eps {
            fg.push(i);
        }
    }
    SemiSeeds {
        foreground: sample(fg, params.sample_fraction, rng),
        background: sample(bg, params.sample_fraction, rng),
    }
}

fn sample(candidates: Vec<usize>, fraction: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if fraction >= 1.0 || candidates.is_empty() {
        return candidates;
    }
    let keep = ((candidates.len() as f64) * fraction).round() as usize;
    let mut picked: Vec<usize> = index::sample(rng, candidates.len(), keep)
        .into_iter()
        .map(|k| candidates[k])
        .collect();
    picked.sort_unstable();
    picked
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Rw,
    Brw,
    Irw,
    Ibrw,
}

impl Algorithm {
    pub fn uses_boundary(self) -> bool {
        matches!(self, Algorithm::Brw | Algorithm::Ibrw)
    }

    pub fn is_iterative(self) -> bool {
        matches!(self, Algorithm::Irw | Algorithm::Ibrw)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Rw => "rw",
            Algorithm::Brw => "brw",
            Algorithm::Irw => "irw",
            Algorithm::Ibrw => "ibrw",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rw" => Ok(Algorithm::Rw),
            "brw" => Ok(Algorithm::Brw),
            "irw" => Ok(Algorithm::Irw),
            "ibrw" => Ok(Algorithm::Ibrw),
            other => Err(Error::invalid(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// One solve of a run. Iteration 0 is the initial basic random walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub potential: f64,
    /// Unseeded pixels of this map within `delta` of 0.5.
    pub boundary_count: usize,
    pub added_foreground: usize,
    pub added_background: usize,
    pub foreground_seeds: usize,
    pub background_seeds: usize,
    /// Short hash of the label map produced by this solve.
    pub label_digest: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error_count: Option<usize>,
    /// Semi-seeds promoted right before this solve.
    #[serde(skip)]
    pub promoted_foreground: Vec<usize>,
    #[serde(skip)]
    pub promoted_background: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn potentials(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.potential).collect()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Non-iterative algorithm, single pass.
    SinglePass,
    MaxIterations,
    PotentialConverged,
    FixedPoint,
    SolverFailure,
}

#[derive(Debug, Clone)]
pub struct FeedbackOutcome {
    pub algorithm: Algorithm,
    pub map: ProbabilityMap,
    pub trace: IterationTrace,
    pub stop: StopReason,
    /// Set when a solve failed mid-loop; `map` is then the last good one.
    pub degraded: Option<String>,
    /// Potential-decrease threshold actually used.
    pub xi: f64,
    pub min_weight: f64,
    /// Seeds in effect for the final map (user plus promoted), with the
    /// boundary set used by the final solve.
    pub seeds: SeedState,
    /// One map per trace record when `RunContext::keep_maps` is set.
    pub maps: Vec<ProbabilityMap>,
}

/// Settings that are not feedback parameters.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunContext<'a> {
    pub weighting: Weighting,
    pub solve: SolveOptions,
    pub ground_truth: Option<&'a Trimap>,
    pub keep_maps: bool,
}

fn label_digest(labels: &[bool]) -> String {
    let bytes: Vec<u8> = labels.iter().map(|&l| l as u8).collect();
    let hash = Sha256::digest(&bytes);
    hash[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn misclassified(labels: &[bool], trimap: &Trimap) -> usize {
    labels
        .iter()
        .enumerate()
        .filter(|&(i, &l)| match trimap.class(i) {
            TrimapClass::Foreground => !l,
            TrimapClass::Background => l,
            TrimapClass::Unclassified => false,
        })
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRate {
    /// Pixels labeled against the trimap, unclassified band excluded.
    pub misclassified: usize,
    pub unclassified: usize,
    /// Denominator actually used: the unclassified count, or the pixel count
    /// when the trimap has no unclassified band.
    pub denominator: usize,
    pub rate: f64,
}

impl ErrorRate {
    pub fn normalized_by_total(&self) -> bool {
        self.unclassified == 0
    }
}

/// Misclassified pixels outside the unclassified band, divided by the size
/// of the band.
pub fn error_rate(labels: &[bool], dims: (usize, usize), trimap: &Trimap) -> Result<ErrorRate> {
    let found = (trimap.width(), trimap.height());
    if dims != found || labels.len() != dims.0 * dims.1 {
        return Err(Error::DimensionMismatch { expected: dims, found });
    }
    let miss = misclassified(labels, trimap);
    let unclassified = trimap.unclassified_count();
    let denominator = if unclassified > 0 { unclassified } else { labels.len() };
    Ok(ErrorRate {
        misclassified: miss,
        unclassified,
        denominator,
        rate: miss as f64 / denominator as f64,
    })
}

struct Recorder<'a> {
    trace: IterationTrace,
    maps: Vec<ProbabilityMap>,
    keep_maps: bool,
    delta: f64,
    ground_truth: Option<&'a Trimap>,
}

impl Recorder<'_> {
    fn push(&mut self, map: &ProbabilityMap, seeds: &SeedState, promoted: SemiSeeds) -> f64 {
        let potential = segmentation_potential(map);
        self.trace.records.push(IterationRecord {
            iteration: self.trace.records.len(),
            potential,
            boundary_count: boundary_set(map, seeds, self.delta).len(),
            added_foreground: promoted.foreground.len(),
            added_background: promoted.background.len(),
            foreground_seeds: seeds.foreground_count(),
            background_seeds: seeds.background_count(),
            label_digest: label_digest(map.labels()),
            error_count: self.ground_truth.map(|t| misclassified(map.labels(), t)),
            promoted_foreground: promoted.foreground,
            promoted_background: promoted.background,
        });
        if self.keep_maps {
            self.maps.push(map.clone());
        }
        potential
    }
}

fn check_inputs(img: &ImageGrid, seeds: &SeedState, ctx: &RunContext) -> Result<()> {
    if seeds.width() != img.width() || seeds.height() != img.height() {
        return Err(Error::DimensionMismatch {
            expected: (img.width(), img.height()),
            found: (seeds.width(), seeds.height()),
        });
    }
    if let Some(t) = ctx.ground_truth {
        if (t.width(), t.height()) != (img.width(), img.height()) {
            return Err(Error::DimensionMismatch {
                expected: (img.width(), img.height()),
                found: (t.width(), t.height()),
            });
        }
    }
    ctx.solve.validate()
}

/// Runs any of the four algorithms on an image and user seeds.
///
/// `rw` is a single basic solve. `brw` solves basic walks, marks the band
/// `|p - 0.5| < delta` as boundary and solves the boundary system once.
/// `irw` and `ibrw` run the feedback loops.
pub fn run_algorithm(
    algorithm: Algorithm,
    img: &ImageGrid,
    user_seeds: &SeedState,
    params: &FeedbackParams,
    ctx: &RunContext,
) -> Result<FeedbackOutcome> {
    params.validate()?;
    check_inputs(img, user_seeds, ctx)?;
    let weights = compute_weights(img, ctx.weighting)?;
    if algorithm.uses_boundary() {
        check_lambda(params.lambda, weights.min_weight())?;
    }
    run_on_weights(algorithm, &weights, user_seeds, params, ctx)
}

pub fn run_irw(img: &ImageGrid, user_seeds: &SeedState, params: &FeedbackParams, ctx: &RunContext) -> Result<FeedbackOutcome> {
    run_algorithm(Algorithm::Irw, img, user_seeds, params, ctx)
}

pub fn run_ibrw(img: &ImageGrid, user_seeds: &SeedState, params: &FeedbackParams, ctx: &RunContext) -> Result<FeedbackOutcome> {
    run_algorithm(Algorithm::Ibrw, img, user_seeds, params, ctx)
}

/// Same as [`run_algorithm`] on precomputed weights.
pub fn run_on_weights(
    algorithm: Algorithm,
    weights: &EdgeWeights,
    user_seeds: &SeedState,
    params: &FeedbackParams,
    ctx: &RunContext,
) -> Result<FeedbackOutcome> {
    params.validate()?;
    if algorithm.uses_boundary() {
        check_lambda(params.lambda, weights.min_weight())?;
    }
    let mut seeds = user_seeds.user_only();
    let mut rec = Recorder {
        trace: IterationTrace::default(),
        maps: Vec::new(),
        keep_maps: ctx.keep_maps,
        delta: params.delta,
        ground_truth: ctx.ground_truth,
    };

    let mut map = random_walks_on(weights, &seeds, &ctx.solve)?;
    let initial = rec.push(&map, &seeds, SemiSeeds::default());
    let xi = params.xi.unwrap_or(RELATIVE_XI * initial.abs());
    let lambda = params.lambda;

    let finish = |map, rec: Recorder, stop, degraded, seeds| FeedbackOutcome {
        algorithm,
        map,
        trace: rec.trace,
        stop,
        degraded,
        xi,
        min_weight: weights.min_weight(),
        seeds,
        maps: rec.maps,
    };

    match algorithm {
        Algorithm::Rw => return Ok(finish(map, rec, StopReason::SinglePass, None, seeds)),
        Algorithm::Brw => {
            let band = boundary_set(&map, &seeds, params.delta);
            seeds.set_boundary(&band)?;
            let brw = boundary_random_walks_on(weights, &seeds, lambda, &ctx.solve)?;
            rec.push(&brw, &seeds, SemiSeeds::default());
            return Ok(finish(brw, rec, StopReason::SinglePass, None, seeds));
        }
        Algorithm::Irw | Algorithm::Ibrw => {}
    }

    let boundary_active = algorithm == Algorithm::Ibrw && lambda > 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut previous = initial;
    let mut previous_band: Option<Vec<usize>> = None;
    let mut stop = StopReason::MaxIterations;
    let mut degraded = None;

    for _ in 1..=params.max_outer_iterations {
        let promoted = select_semi_seeds_with(&map, &seeds, params, &mut rng);
        let mut next_seeds = seeds.clone();
        next_seeds.clear_boundary();
        for &i in &promoted.foreground {
            next_seeds.add_seed(i, Label::Foreground, Provenance::Auto)?;
        }
        for &i in &promoted.background {
            next_seeds.add_seed(i, Label::Background, Provenance::Auto)?;
        }

        let band = if algorithm == Algorithm::Ibrw {
            let band = boundary_set(&map, &next_seeds, params.delta);
            next_seeds.set_boundary(&band)?;
            Some(band)
        } else {
            None
        };

        let band_changed = boundary_active && band != previous_band;
        if promoted.is_empty() && !band_changed {
            stop = StopReason::FixedPoint;
            break;
        }

        let solved = match &band {
            Some(b) if boundary_active && !b.is_empty() => {
                boundary_random_walks_on(weights, &next_seeds, lambda, &ctx.solve)
            }
            _ => random_walks_on(weights, &next_seeds, &ctx.solve),
        };
        let next = match solved {
            Ok(m) => m,
            Err(e) => {
                stop = StopReason::SolverFailure;
                degraded = Some(e.to_string());
                break;
            }
        };

        seeds = next_seeds;
        previous_band = band;
        map = next;
        let potential = rec.push(&map, &seeds, promoted);
        if previous - potential <= xi {
            stop = StopReason::PotentialConverged;
            break;
        }
        previous = potential;
    }

    Ok(finish(map, rec, stop, degraded, seeds))
}
