//! Basic and boundary random walks.

use crate::error::{Error, Result};
use crate::graph::{
    apply_boundary_modification, assemble_laplacian, check_lambda, compute_weights, EdgeWeights,
    ImageGrid, SparseLaplacian, Weighting,
};
use crate::seeds::SeedState;
use crate::solver::{solve_system, SolveOptions};

pub use crate::seeds::{Label, Provenance};

/// Per-pixel foreground probabilities.
///
/// `raw` is the solver output stitched with the seed values; boundary walks
/// can push it outside [0,1]. `clamped` limits it to [0,1] and `labels` is
/// `clamped > 0.5` (an exact 0.5 is background).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    width: usize,
    height: usize,
    raw: Vec<f64>,
    clamped: Vec<f64>,
    labels: Vec<bool>,
}

impl ProbabilityMap {
    pub fn from_raw(width: usize, height: usize, raw: Vec<f64>) -> Result<Self> {
        if raw.len() != width * height {
            return Err(Error::invalid(format!(
                "{} probabilities for a {width}x{height} lattice",
                raw.len()
            )));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("probabilities must be finite"));
        }
        let clamped: Vec<f64> = raw.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let labels = clamped.iter().map(|&p| p > 0.5).collect();
        Ok(ProbabilityMap {
            width,
            height,
            raw,
            clamped,
            labels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn clamped(&self) -> &[f64] {
        &self.clamped
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn foreground_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }
}

fn check_seed_dims(width: usize, height: usize, seeds: &SeedState) -> Result<()> {
    if seeds.width() != width || seeds.height() != height {
        return Err(Error::DimensionMismatch {
            expected: (width, height),
            found: (seeds.width(), seeds.height()),
        });
    }
    Ok(())
}

fn solve_to_map(lap: &SparseLaplacian, opts: &SolveOptions) -> Result<ProbabilityMap> {
    let pu = solve_system(lap, &lap.rhs(), opts)?;
    ProbabilityMap::from_raw(lap.width(), lap.height(), lap.stitch(&pu))
}

/// Basic random walks on precomputed lattice weights. Boundary marks in
/// `seeds` are ignored.
pub fn random_walks_on(weights: &EdgeWeights, seeds: &SeedState, opts: &SolveOptions) -> Result<ProbabilityMap> {
    let lap = assemble_laplacian(weights, seeds)?;
    solve_to_map(&lap, opts)
}

/// Boundary random walks on precomputed lattice weights, with `S_E` taken
/// from the boundary marks of `seeds`.
pub fn boundary_random_walks_on(
    weights: &EdgeWeights,
    seeds: &SeedState,
    lambda: f64,
    opts: &SolveOptions,
) -> Result<ProbabilityMap> {
    check_lambda(lambda, weights.min_weight())?;
    let lap = assemble_laplacian(weights, seeds)?;
    let boundary: Vec<usize> = seeds.boundary().collect();
    let lap = apply_boundary_modification(&lap, &boundary, lambda)?;
    solve_to_map(&lap, opts)
}

pub fn random_walks(
    img: &ImageGrid,
    seeds: &SeedState,
    weighting: Weighting,
    opts: &SolveOptions,
) -> Result<ProbabilityMap> {
    check_seed_dims(img.width(), img.height(), seeds)?;
    let weights = compute_weights(img, weighting)?;
    random_walks_on(&weights, seeds, opts)
}

pub fn boundary_random_walks(
    img: &ImageGrid,
    seeds: &SeedState,
    lambda: f64,
    weighting: Weighting,
    opts: &SolveOptions,
) -> Result<ProbabilityMap> {
    check_seed_dims(img.width(), img.height(), seeds)?;
    let weights = compute_weights(img, weighting)?;
    boundary_random_walks_on(&weights, seeds, lambda, opts)
}

/// Unseeded pixels whose clamped probability is strictly within `delta` of 0.5.
pub fn boundary_set(map: &ProbabilityMap, seeds: &SeedState, delta: f64) -> Vec<usize> {
    map.clamped
        .iter()
        .enumerate()
        .filter(|&(i, p)| !seeds.is_seed(i) && (p - 0.5).abs() < delta)
        .map(|(i, _)| i)
        .collect()
}

/// Value of `sum_edges w (p_i - p_j)^2 - lambda * sum_{S_E} (p_i - 0.5)^2`
/// for a full-lattice probability vector.
pub fn brw_objective(weights: &EdgeWeights, p: &[f64], boundary: &[usize], lambda: f64) -> f64 {
    let smooth: f64 = weights
        .edges()
        .map(|(i, j, w)| w * (p[i] - p[j]) * (p[i] - p[j]))
        .sum();
    let repel: f64 = boundary.iter().map(|&i| (p[i] - 0.5) * (p[i] - 0.5)).sum();
    smooth - lambda * repel
}
