//! Batch front end for `rwseg`: segmentation runs, parameter sweeps and the
//! synthetic corpus. The binary is a thin wrapper over [`run`].

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rwseg_core::corpus::{load_corpus, synthetic_corpus, write_corpus};
use rwseg_core::graph::{DEFAULT_BETA, DEFAULT_WEIGHT_FLOOR};
use rwseg_core::imageio::{self, SeedMask, Trimap};
use rwseg_core::{Algorithm, Error, FeedbackParams, ImageGrid, SolveOptions, Weighting};

pub mod segment;
pub mod sweep;

pub use segment::{run_segment, CaseSummary};
pub use sweep::{run_sweep, SweepRow, SweepStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_CONVEXITY: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    /// A core error raised while reading a named input file.
    Input(PathBuf, Error),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_BAD_INPUT,
            CliError::Core(e) | CliError::Input(_, e) => core_exit_code(e),
        }
    }
}

/// Exit status for a core error.
pub fn core_exit_code(e: &Error) -> i32 {
    match e {
        Error::ConvexityViolation { .. } => EXIT_CONVEXITY,
        Error::SolverFailure { .. } | Error::NotPositiveDefinite | Error::SingularSystem => EXIT_SOLVER,
        _ => EXIT_BAD_INPUT,
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Input(path, e) => write!(f, "{}: {e}", path.display()),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

#[derive(Debug, Parser)]
#[command(name = "rwseg", version, about = "Seeded image segmentation with random walks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment one image, or every case of a corpus directory.
    Segment(SegmentArgs),
    /// Run a grid of epsilon / lambda / delta values and write a CSV.
    Sweep(SweepArgs),
    /// Write the bundled synthetic corpus.
    Corpus(CorpusArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Grayscale or RGB image (PNG, PGM or PPM).
    #[arg(long, requires = "seeds")]
    pub image: Option<PathBuf>,
    /// Seed mask PNG: 0 none, 1 background, 2 foreground.
    #[arg(long, requires = "image")]
    pub seeds: Option<PathBuf>,
    /// Ground-truth trimap PNG: 0 background, 128 unclassified, 255 foreground.
    #[arg(long, requires = "image")]
    pub trimap: Option<PathBuf>,
    /// Directory of cases, each holding image.png, seeds.png and trimap.png.
    #[arg(long, conflicts_with_all = ["image", "seeds", "trimap"])]
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// rw, brw, irw or ibrw.
    #[arg(long, default_value = "ibrw")]
    pub algorithm: Algorithm,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
    #[arg(long = "weight-floor", default_value_t = DEFAULT_WEIGHT_FLOOR)]
    pub weight_floor: f64,
    /// Semi-seed threshold.
    #[arg(long, default_value_t = FeedbackParams::default().epsilon_seed)]
    pub epsilon: f64,
    /// Half-width of the boundary band around 0.5.
    #[arg(long, default_value_t = FeedbackParams::default().delta)]
    pub delta: f64,
    /// Boundary penalty; must not exceed the smallest edge weight.
    #[arg(long, default_value_t = FeedbackParams::default().lambda)]
    pub lambda: f64,
    /// Absolute potential-decrease threshold [default: 1e-3 of the initial potential].
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long = "max-iter", default_value_t = FeedbackParams::default().max_outer_iterations)]
    pub max_iter: usize,
    #[arg(long = "sample-fraction", default_value_t = FeedbackParams::default().sample_fraction)]
    pub sample_fraction: f64,
    #[arg(long = "rng-seed", default_value_t = FeedbackParams::default().rng_seed)]
    pub rng_seed: u64,
    /// Linear solver tolerance.
    #[arg(long, default_value_t = SolveOptions::default().tolerance)]
    pub tolerance: f64,
}

impl Default for ParamArgs {
    fn default() -> Self {
        let p = FeedbackParams::default();
        ParamArgs {
            algorithm: Algorithm::Ibrw,
            beta: DEFAULT_BETA,
            weight_floor: DEFAULT_WEIGHT_FLOOR,
            epsilon: p.epsilon_seed,
            delta: p.delta,
            lambda: p.lambda,
            xi: p.xi,
            max_iter: p.max_outer_iterations,
            sample_fraction: p.sample_fraction,
            rng_seed: p.rng_seed,
            tolerance: SolveOptions::default().tolerance,
        }
    }
}

impl ParamArgs {
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

    /// Checks every parameter before any file is read.
    pub fn validate(&self) -> Result<(), CliError> {
        self.feedback().validate()?;
        self.solve().validate()?;
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(CliError::Usage(format!("beta must be nonnegative, got {}", self.beta)));
        }
        if !(self.weight_floor > 0.0 && self.weight_floor.is_finite()) {
            return Err(CliError::Usage(format!(
                "weight floor must be positive, got {}",
                self.weight_floor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Args)]
pub struct SegmentArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Output directory; corpus runs get one subdirectory per case.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the probability raster of every iteration.
    #[arg(long = "dump-iterations")]
    pub dump_iterations: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// NAME=v1,v2,... with NAME one of epsilon, lambda, delta. Give it once
    /// for a line sweep or twice for a grid.
    #[arg(long = "vary", required = true, num_args = 1)]
    pub vary: Vec<String>,
    /// CSV destination; `-` writes to stdout.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    #[arg(long)]
    pub out: PathBuf,
}

/// One segmentation problem read from disk.
#[derive(Debug, Clone)]
pub struct Case {
    pub name: String,
    pub image: ImageGrid,
    pub seeds: SeedMask,
    pub trimap: Option<Trimap>,
    /// Whether outputs go to a per-case subdirectory.
    pub nested: bool,
}

/// Reads the single image or the corpus named by `input`.
pub fn load_cases(input: &InputArgs) -> Result<Vec<Case>, CliError> {
    if let Some(dir) = &input.corpus {
        return Ok(load_corpus(dir)
            .map_err(|e| CliError::Input(dir.clone(), e))?
            .into_iter()
            .map(|e| Case {
                name: e.name,
                image: e.image,
                seeds: e.seeds,
                trimap: Some(e.trimap),
                nested: true,
            })
            .collect());
    }
    let (Some(image_path), Some(seeds_path)) = (&input.image, &input.seeds) else {
        return Err(CliError::Usage("give --image and --seeds, or --corpus".into()));
    };
    fn ctx(p: &Path) -> impl FnOnce(Error) -> CliError + '_ {
        move |e| CliError::Input(p.to_path_buf(), e)
    }
    let image = imageio::load_image(image_path).map_err(ctx(image_path))?;
    let dims = Some((image.width(), image.height()));
    let seeds = imageio::load_seed_mask(seeds_path, dims).map_err(ctx(seeds_path))?;
    let trimap = input
        .trimap
        .as_ref()
        .map(|p| imageio::load_trimap(p, dims).map_err(ctx(p)))
        .transpose()?;
    Ok(vec![Case {
        name: case_name(image_path),
        image,
        seeds,
        trimap,
        nested: false,
    }])
}

fn case_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into())
}

pub fn run_corpus(args: &CorpusArgs) -> Result<Vec<PathBuf>, CliError> {
    Ok(write_corpus(&synthetic_corpus(), &args.out)?)
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Segment(a) => run_segment(a).map(|cases| {
            for c in &cases {
                println!("{}", c.headline());
                if let Some(d) = &c.degraded {
                    eprintln!("warning: {}: stopped early after a solver failure: {d}", c.case);
                }
            }
        }),
        Command::Sweep(a) => run_sweep(a).map(|rows| {
            if a.out.as_os_str() != "-" {
                let bad = rows.iter().filter(|r| r.status != SweepStatus::Ok).count();
                println!("{} sweep points written to {} ({bad} not ok)", rows.len(), a.out.display());
            }
        }),
        Command::Corpus(a) => run_corpus(a).map(|dirs| {
            println!("wrote {} cases under {}", dirs.len(), a.out.display());
        }),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
