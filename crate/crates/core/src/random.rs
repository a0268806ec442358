//! Seeded random problem instances for property tests and benchmarks.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{compute_weights, EdgeWeights, ImageGrid, Weighting};
use crate::seeds::{Label, Provenance, SeedState};
use crate::solver::SolveOptions;
use crate::walks::{boundary_set, random_walks_on};

/// A random image with disjoint user seeds, its weights, a feasible
/// boundary weight and the boundary band of its basic random-walk map.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub image: ImageGrid,
    pub seeds: SeedState,
    pub weights: EdgeWeights,
    /// Drawn uniformly from `[0, min_weight)`.
    pub lambda: f64,
    /// Unseeded pixels of the basic map within `delta` of 0.5.
    pub boundary: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct InstanceShape {
    pub min_side: usize,
    pub max_side: usize,
    /// Upper bound on the fraction of pixels that are seeds.
    pub max_seed_fraction: f64,
    pub delta: f64,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape {
            min_side: 2,
            max_side: 16,
            max_seed_fraction: 0.2,
            delta: 0.1,
        }
    }
}

/// Builds instance number `index` of the stream seeded by `seed`.
pub fn random_instance(seed: u64, index: u64, shape: InstanceShape, weighting: Weighting) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let w = rng.random_range(shape.min_side..=shape.max_side);
    let h = rng.random_range(shape.min_side..=shape.max_side);
    let n = w * h;
    let intensity: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let image = ImageGrid::new(w, h, intensity).expect("sides are at least 2");

    let max_seeds = ((n as f64 * shape.max_seed_fraction) as usize).clamp(2, n - 1);
    let count = rng.random_range(2..=max_seeds);
    let picked = index::sample(&mut rng, n, count).into_vec();
    let split = rng.random_range(1..count);
    let mut seeds = SeedState::new(w, h);
    for (k, &i) in picked.iter().enumerate() {
        let label = if k < split { Label::Foreground } else { Label::Background };
        seeds.add_seed(i, label, Provenance::User).expect("sampled indices are distinct");
    }

    let weights = compute_weights(&image, weighting).expect("valid weighting");
    let lambda = rng.random::<f64>() * weights.min_weight();
    let map = random_walks_on(&weights, &seeds, &SolveOptions::default()).expect("connected lattice with seeds");
    let boundary = boundary_set(&map, &seeds, shape.delta);
    RandomInstance {
        image,
        seeds,
        weights,
        lambda,
        boundary,
    }
}

impl RandomInstance {
    /// The seeds with `boundary` marked as `S_E`.
    pub fn seeds_with_boundary(&self) -> SeedState {
        let mut s = self.seeds.clone();
        s.set_boundary(&self.boundary).expect("band excludes seeds");
        s
    }
}
