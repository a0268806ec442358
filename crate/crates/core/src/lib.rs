//! Interactive image segmentation with random walks.
//!
//! The crate builds a 4-connected weighted lattice from an image, solves the
//! seeded Dirichlet problem (basic random walks), optionally penalizes pixels
//! near probability 0.5 (boundary random walks), and wraps both in iterative
//! loops that promote confident pixels to seeds between solves.

pub mod corpus;
pub mod error;
pub mod feedback;
pub mod graph;
pub mod random;
pub mod imageio;
pub mod seeds;
pub mod solver;
pub mod sparse;
pub mod strokes;
pub mod walks;

pub use error::{Error, Result, SeedClass};
pub use feedback::{
    error_rate, run_algorithm, run_ibrw, run_irw, segmentation_potential, select_semi_seeds, Algorithm,
    ErrorRate, FeedbackOutcome, FeedbackParams, IterationRecord, IterationTrace, RunContext, StopReason,
};
pub use graph::{
    apply_boundary_modification, assemble_laplacian, compute_weights, EdgeWeights, ImageGrid, SparseLaplacian,
    Weighting,
};
pub use imageio::{SeedMask, Trimap};
pub use seeds::{Label, Provenance, SeedState};
pub use solver::{dense_oracle_solve, solve_system, SolveMethod, SolveOptions};
pub use strokes::{Stroke, StrokeKind};
pub use walks::{boundary_random_walks, boundary_set, random_walks, ProbabilityMap};
