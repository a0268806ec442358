//! Pixel lattice, edge weights and Laplacian assembly.
//!
//! The lattice is 4-connected and vertices are numbered row-major
//! (`y * width + x`). Weights follow the Gaussian intensity model
//! `w = exp(-beta * d^2 / max_d^2) + floor`, where `d` is the intensity
//! difference across the edge and `max_d^2` the largest squared difference
//! over the whole image.

use crate::error::{Error, Result, SeedClass};
use crate::seeds::SeedState;
use crate::sparse::{CsrBuilder, CsrMatrix};

pub const DEFAULT_BETA: f64 = 90.0;
pub const DEFAULT_WEIGHT_FLOOR: f64 = 0.01;

/// Rec. 601 luma of an RGB triple in [0,1]^3.
pub fn luma([r, g, b]: [f64; 3]) -> f64 {
    0.299 * r + 0.587 * g + 0.114 * b
}

/// Grayscale pixel lattice with intensities in [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    intensity: Vec<f64>,
    rgb: Option<Vec<[f64; 3]>>,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, intensity: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if intensity.len() != width * height {
            return Err(Error::invalid(format!(
                "{} intensities for a {width}x{height} image",
                intensity.len()
            )));
        }
        if let Some((i, v)) = intensity
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::invalid(format!("intensity {v} at pixel {i} is outside [0, 1]")));
        }
        Ok(ImageGrid {
            width,
            height,
            intensity,
            rgb: None,
        })
    }

    /// Color image; intensities are the luma of each pixel and the channels
    /// are kept for display.
    pub fn from_rgb(width: usize, height: usize, rgb: Vec<[f64; 3]>) -> Result<Self> {
        if rgb.iter().flatten().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::invalid("color channel outside [0, 1]"));
        }
        let intensity = rgb.iter().map(|&c| luma(c).clamp(0.0, 1.0)).collect();
        let mut grid = ImageGrid::new(width, height, intensity)?;
        grid.rgb = Some(rgb);
        Ok(grid)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.intensity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensity.is_empty()
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn rgb(&self) -> Option<&[[f64; 3]]> {
        self.rgb.as_deref()
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.intensity[y * self.width + x]
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width < 2 || height < 2 {
        return Err(Error::invalid(format!(
            "image must be at least 2x2, got {width}x{height}"
        )));
    }
    Ok(())
}

/// Parameters of the intensity-to-weight map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weighting {
    pub beta: f64,
    pub floor: f64,
}

impl Default for Weighting {
    fn default() -> Self {
        Weighting {
            beta: DEFAULT_BETA,
            floor: DEFAULT_WEIGHT_FLOOR,
        }
    }
}

/// One weight per lattice edge.
///
/// Horizontal edge `(x, y)–(x+1, y)` lives at `y * (width - 1) + x`, vertical
/// edge `(x, y)–(x, y+1)` at `y * width + x`. Each undirected edge is stored
/// once, so `(i, j)` and `(j, i)` always read the same value.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights {
    width: usize,
    height: usize,
    beta: f64,
    floor: f64,
    horizontal: Vec<f64>,
    vertical: Vec<f64>,
    min_weight: f64,
}

impl EdgeWeights {
    /// A lattice where every edge has the same weight, bypassing the image
    /// model. Any shape with at least one edge is accepted, including strips.
    pub fn uniform(width: usize, height: usize, weight: f64) -> Result<Self> {
        Self::from_fn(width, height, |_, _| weight)
    }

    /// Lattice weights from an arbitrary function of the two endpoints
    /// (row-major indices, `i < j`).
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if width == 0 || height == 0 || width * height < 2 {
            return Err(Error::invalid(format!("lattice {width}x{height} has no edges")));
        }
        let mut horizontal = Vec::with_capacity((width - 1) * height);
        for y in 0..height {
            for x in 0..width - 1 {
                let i = y * width + x;
                horizontal.push(f(i, i + 1));
            }
        }
        let mut vertical = Vec::with_capacity(width * (height - 1));
        for y in 0..height - 1 {
            for x in 0..width {
                let i = y * width + x;
                vertical.push(f(i, i + width));
            }
        }
        if horizontal.iter().chain(&vertical).any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid("edge weights must be finite and positive"));
        }
        let min_weight = horizontal
            .iter()
            .chain(&vertical)
            .copied()
            .fold(f64::INFINITY, f64::min);
        Ok(EdgeWeights {
            width,
            height,
            beta: 0.0,
            floor: 0.0,
            horizontal,
            vertical,
            min_weight,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn min_weight(&self) -> f64 {
        self.min_weight
    }

    pub fn edge_count(&self) -> usize {
        self.horizontal.len() + self.vertical.len()
    }

    /// All stored weights, horizontal edges first.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.horizontal.iter().chain(&self.vertical).copied()
    }

    /// Every undirected edge once as `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let w = self.width;
        let h = self.horizontal.iter().enumerate().map(move |(k, &wt)| {
            let (y, x) = (k / (w - 1).max(1), k % (w - 1).max(1));
            let i = y * w + x;
            (i, i + 1, wt)
        });
        let v = self.vertical.iter().enumerate().map(move |(k, &wt)| (k, k + w, wt));
        h.chain(v)
    }

    /// Weight of the edge between `i` and `j`, if they are lattice neighbors.
    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let w = self.width;
        if b >= self.len() {
            return None;
        }
        if b == a + 1 && a % w != w - 1 {
            Some(self.horizontal[(a / w) * (w - 1) + a % w])
        } else if b == a + w {
            Some(self.vertical[a])
        } else {
            None
        }
    }

    /// Neighbors of `i` with their edge weights, in ascending index order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let w = self.width;
        let (x, y) = (i % w, i / w);
        let up = (y > 0).then(|| (i - w, self.vertical[i - w]));
        let left = (x > 0).then(|| (i - 1, self.horizontal[y * (w - 1) + x - 1]));
        let right = (x + 1 < w).then(|| (i + 1, self.horizontal[y * (w - 1) + x]));
        let down = (y + 1 < self.height).then(|| (i + w, self.vertical[i]));
        [up, left, right, down].into_iter().flatten()
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.neighbors(i).map(|(_, w)| w).sum()
    }
}

/// Gaussian weight of one edge given its squared intensity difference already
/// divided by the image's maximum squared difference.
pub fn edge_weight(normalized_sq_diff: f64, beta: f64, floor: f64) -> f64 {
    (-beta * normalized_sq_diff).exp() + floor
}

pub fn compute_weights(img: &ImageGrid, weighting: Weighting) -> Result<EdgeWeights> {
    let Weighting { beta, floor } = weighting;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta must be finite and nonnegative, got {beta}")));
    }
    if !(floor > 0.0 && floor.is_finite()) {
        return Err(Error::invalid(format!("weight floor must be positive, got {floor}")));
    }
    check_dims(img.width, img.height)?;

    let g = &img.intensity;
    let (w, h) = (img.width, img.height);
    let sq = |i: usize, j: usize| (g[i] - g[j]) * (g[i] - g[j]);

    let mut max_sq = 0.0f64;
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                max_sq = max_sq.max(sq(i, i + 1));
            }
            if y + 1 < h {
                max_sq = max_sq.max(sq(i, i + w));
            }
        }
    }
    let scale = if max_sq > 0.0 { 1.0 / max_sq } else { 0.0 };

    let mut weights = EdgeWeights::from_fn(w, h, |i, j| edge_weight(sq(i, j) * scale, beta, floor))?;
    weights.beta = beta;
    weights.floor = floor;
    Ok(weights)
}

const NO_ROW: usize = usize::MAX;

/// Laplacian blocks for one seed configuration.
///
/// `lu` couples unseeded vertices among themselves; `r` has one row per
/// unseeded vertex and one column per seeded vertex and holds `-w_ij` for
/// each unseeded–seeded edge. The system for the unseeded probabilities is
/// `lu * p_u = -r * p_m` (minus `0.5 * lambda` on boundary rows once
/// [`apply_boundary_modification`] has been applied).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseLaplacian {
    width: usize,
    height: usize,
    lu: CsrMatrix,
    r: CsrMatrix,
    degree: Vec<f64>,
    vertex_index: Vec<usize>,
    seeded_index: Vec<usize>,
    seed_values: Vec<f64>,
    row_of: Vec<usize>,
    diag_pos: Vec<usize>,
    min_weight: f64,
    lambda: f64,
    boundary_rows: Vec<usize>,
}

impl SparseLaplacian {
    pub fn n_unseeded(&self) -> usize {
        self.vertex_index.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn lu(&self) -> &CsrMatrix {
        &self.lu
    }

    pub fn r(&self) -> &CsrMatrix {
        &self.r
    }

    /// Unmodified degree `d_i` of every lattice vertex.
    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    /// Lattice position of each matrix row.
    pub fn vertex_index(&self) -> &[usize] {
        &self.vertex_index
    }

    /// Lattice position of each column of `r`.
    pub fn seeded_index(&self) -> &[usize] {
        &self.seeded_index
    }

    /// Fixed probabilities `p_m` of the seeded vertices (0 or 1).
    pub fn seed_values(&self) -> &[f64] {
        &self.seed_values
    }

    pub fn row_of(&self, pixel: usize) -> Option<usize> {
        match self.row_of[pixel] {
            NO_ROW => None,
            r => Some(r),
        }
    }

    pub fn min_weight(&self) -> f64 {
        self.min_weight
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Matrix rows whose diagonal was lowered by `lambda`.
    pub fn boundary_rows(&self) -> &[usize] {
        &self.boundary_rows
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.diag_pos.iter().map(|&k| self.lu.values()[k]).collect()
    }

    /// Right-hand side `-r * p_m - 0.5 * lambda * e`.
    pub fn rhs(&self) -> Vec<f64> {
        let mut b = self.r.mul_vec(&self.seed_values);
        for v in b.iter_mut() {
            *v = -*v;
        }
        if self.lambda != 0.0 {
            for &row in &self.boundary_rows {
                b[row] -= 0.5 * self.lambda;
            }
        }
        b
    }

    /// Full-lattice vector from unseeded values, with seeds at their fixed
    /// probabilities.
    pub fn stitch(&self, unseeded: &[f64]) -> Vec<f64> {
        assert_eq!(unseeded.len(), self.n_unseeded());
        let mut out = vec![0.0; self.width * self.height];
        for (&pos, &v) in self.vertex_index.iter().zip(unseeded) {
            out[pos] = v;
        }
        for (&pos, &v) in self.seeded_index.iter().zip(&self.seed_values) {
            out[pos] = v;
        }
        out
    }
}

pub fn assemble_laplacian(weights: &EdgeWeights, seeds: &SeedState) -> Result<SparseLaplacian> {
    let n = weights.len();
    if seeds.len() != n || seeds.width() != weights.width() {
        return Err(Error::DimensionMismatch {
            expected: (weights.width(), weights.height()),
            found: (seeds.width(), seeds.height()),
        });
    }
    if seeds.foreground_count() == 0 {
        return Err(Error::MissingSeeds(SeedClass::Foreground));
    }
    if seeds.background_count() == 0 {
        return Err(Error::MissingSeeds(SeedClass::Background));
    }

    let mut row_of = vec![NO_ROW; n];
    let mut col_of = vec![NO_ROW; n];
    let mut vertex_index = Vec::with_capacity(n - seeds.seed_count());
    let mut seeded_index = Vec::with_capacity(seeds.seed_count());
    let mut seed_values = Vec::with_capacity(seeds.seed_count());
    for i in 0..n {
        match seeds.label(i) {
            Some(label) => {
                col_of[i] = seeded_index.len();
                seeded_index.push(i);
                seed_values.push(label.probability());
            }
            None => {
                row_of[i] = vertex_index.len();
                vertex_index.push(i);
            }
        }
    }

    let degree: Vec<f64> = (0..n).map(|i| weights.degree(i)).collect();
    let nu = vertex_index.len();
    let mut lu = CsrBuilder::with_capacity(nu, nu, 5 * nu);
    let mut r = CsrBuilder::with_capacity(seeded_index.len(), nu, nu);
    for &i in &vertex_index {
        let row = row_of[i];
        for (j, w) in weights.neighbors(i) {
            if row_of[j] != NO_ROW {
                lu.push(row_of[j], -w);
            } else {
                r.push(col_of[j], -w);
            }
        }
        lu.push(row, degree[i]);
        lu.finish_row();
        r.finish_row();
    }
    let lu = lu.build();
    let diag_pos = (0..nu)
        .map(|row| {
            let start = lu.indptr()[row];
            let k = lu.indices()[start..lu.indptr()[row + 1]]
                .binary_search(&row)
                .expect("diagonal entry present");
            start + k
        })
        .collect();

    Ok(SparseLaplacian {
        width: weights.width(),
        height: weights.height(),
        lu,
        r: r.build(),
        degree,
        vertex_index,
        seeded_index,
        seed_values,
        row_of,
        diag_pos,
        min_weight: weights.min_weight(),
        lambda: 0.0,
        boundary_rows: Vec::new(),
    })
}

/// Lowers the diagonal of every boundary vertex by `lambda`.
///
/// `boundary` holds lattice positions, all of which must be unseeded.
/// `lambda` must lie in `[0, min_weight]`; values outside are rejected.
pub fn apply_boundary_modification(
    lap: &SparseLaplacian,
    boundary: &[usize],
    lambda: f64,
) -> Result<SparseLaplacian> {
    check_lambda(lambda, lap.min_weight)?;
    if !lap.boundary_rows.is_empty() {
        return Err(Error::invalid("laplacian already carries a boundary modification"));
    }
    let mut rows = Vec::with_capacity(boundary.len());
    for &pixel in boundary {
        let row = lap
            .row_of
            .get(pixel)
            .copied()
            .filter(|&r| r != NO_ROW)
            .ok_or_else(|| Error::invalid(format!("boundary pixel {pixel} is not an unseeded vertex")))?;
        rows.push(row);
    }
    rows.sort_unstable();
    rows.dedup();

    let mut out = lap.clone();
    if lambda == 0.0 || rows.is_empty() {
        return Ok(out);
    }
    for &row in &rows {
        let k = out.diag_pos[row];
        out.lu.values_mut()[k] -= lambda;
    }
    out.lambda = lambda;
    out.boundary_rows = rows;
    Ok(out)
}

pub fn check_lambda(lambda: f64, min_weight: f64) -> Result<()> {
    if !(0.0..=min_weight).contains(&lambda) {
        return Err(Error::ConvexityViolation { lambda, min_weight });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::{Label, Provenance};

    fn strip_seeds(len: usize) -> SeedState {
        SeedState::from_sets(len, 1, [len - 1], [0]).unwrap()
    }

    #[test]
    fn constant_image_gives_one_plus_floor() {
        let img = ImageGrid::new(3, 3, vec![0.4; 9]).unwrap();
        let w = compute_weights(&img, Weighting { beta: 90.0, floor: 1e-6 }).unwrap();
        assert!(w.iter().all(|v| v == 1.0 + 1e-6));
        assert_eq!(w.min_weight(), 1.0 + 1e-6);
    }

    #[test]
    fn zero_beta_gives_one_plus_floor() {
        let img = ImageGrid::new(2, 3, vec![0.0, 1.0, 0.3, 0.9, 0.5, 0.1]).unwrap();
        let w = compute_weights(&img, Weighting { beta: 0.0, floor: 1e-6 }).unwrap();
        assert!(w.iter().all(|v| v == 1.0 + 1e-6));
    }

    #[test]
    fn max_contrast_edge_weight() {
        // A two-pixel step: the single difference is also the maximum, so it
        // normalizes to 1.
        assert_eq!(edge_weight(1.0, 90.0, 1e-6), (-90.0f64).exp() + 1e-6);
        // The same step on a 2x2 image with two identical columns.
        let img = ImageGrid::new(2, 2, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        let w = compute_weights(&img, Weighting { beta: 90.0, floor: 1e-6 }).unwrap();
        assert_eq!(w.weight(0, 1), Some((-90.0f64).exp() + 1e-6));
        assert_eq!(w.weight(1, 3), Some(1.0 + 1e-6));
        assert_eq!(w.min_weight(), (-90.0f64).exp() + 1e-6);
    }

    #[test]
    fn rejects_small_images_and_bad_params() {
        assert!(ImageGrid::new(1, 3, vec![0.0; 3]).is_err());
        assert!(ImageGrid::new(2, 2, vec![0.0, 1.5, 0.0, 0.0]).is_err());
        let img = ImageGrid::new(2, 2, vec![0.0; 4]).unwrap();
        assert!(compute_weights(&img, Weighting { beta: -1.0, floor: 1e-6 }).is_err());
        assert!(compute_weights(&img, Weighting { beta: 1.0, floor: 0.0 }).is_err());
    }

    #[test]
    fn rgb_uses_rec601_luma() {
        let img = ImageGrid::from_rgb(
            2,
            2,
            vec![[1.0, 0.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        )
        .unwrap();
        assert_eq!(img.intensity()[0], 0.299);
        assert!((img.intensity()[1] - 1.0).abs() < 1e-12);
        assert!(img.rgb().is_some());
    }

    #[test]
    fn weight_lookup_is_symmetric_and_respects_rows() {
        let w = EdgeWeights::from_fn(3, 2, |i, j| (i * 10 + j) as f64).unwrap();
        assert_eq!(w.weight(0, 1), w.weight(1, 0));
        assert_eq!(w.weight(2, 3), None);
        assert_eq!(w.weight(1, 4), Some(14.0));
        assert_eq!(w.edges().count(), w.edge_count());
        for (i, j, wt) in w.edges() {
            assert_eq!(w.weight(i, j), Some(wt));
        }
    }

    #[test]
    fn neighbor_counts_follow_four_connectivity() {
        let w = EdgeWeights::uniform(4, 3, 1.0).unwrap();
        assert_eq!(w.neighbors(0).count(), 2);
        assert_eq!(w.neighbors(1).count(), 3);
        assert_eq!(w.neighbors(5).count(), 4);
        assert_eq!(w.neighbors(11).count(), 2);
        let idx: Vec<_> = w.neighbors(5).map(|(j, _)| j).collect();
        assert_eq!(idx, vec![1, 4, 6, 9]);
    }

    #[test]
    fn strip_with_seeded_ends() {
        let w = EdgeWeights::uniform(3, 1, 1.0).unwrap();
        let lap = assemble_laplacian(&w, &strip_seeds(3)).unwrap();
        assert_eq!(lap.n_unseeded(), 1);
        assert_eq!(lap.lu().to_dense(), vec![vec![2.0]]);
        assert_eq!(lap.r().to_dense(), vec![vec![-1.0, -1.0]]);
        assert_eq!(lap.rhs(), vec![1.0]);
    }

    #[test]
    fn fully_seeded_lattice_gives_empty_system() {
        let w = EdgeWeights::uniform(2, 1, 1.0).unwrap();
        let lap = assemble_laplacian(&w, &strip_seeds(2)).unwrap();
        assert_eq!(lap.n_unseeded(), 0);
        assert_eq!(lap.lu().nnz(), 0);
        assert!(lap.rhs().is_empty());
    }

    #[test]
    fn center_of_three_by_three() {
        let w = EdgeWeights::uniform(3, 3, 1.0).unwrap();
        let fg = [0, 1, 2, 3];
        let bg = [5, 6, 7, 8];
        let seeds = SeedState::from_sets(3, 3, fg, bg).unwrap();
        let lap = assemble_laplacian(&w, &seeds).unwrap();
        assert_eq!(lap.lu().to_dense(), vec![vec![4.0]]);
        let row_sum: f64 = lap.lu().row(0).map(|e| e.1).sum::<f64>() + lap.r().row(0).map(|e| e.1).sum::<f64>();
        assert_eq!(row_sum, 0.0);
    }

    #[test]
    fn missing_seeds_are_reported() {
        let w = EdgeWeights::uniform(3, 1, 1.0).unwrap();
        let only_fg = SeedState::from_sets(3, 1, [0], []).unwrap();
        assert!(matches!(
            assemble_laplacian(&w, &only_fg),
            Err(Error::MissingSeeds(SeedClass::Background))
        ));
        let only_bg = SeedState::from_sets(3, 1, [], [0]).unwrap();
        assert!(matches!(
            assemble_laplacian(&w, &only_bg),
            Err(Error::MissingSeeds(SeedClass::Foreground))
        ));
    }

    #[test]
    fn boundary_modification_lowers_diagonal() {
        let w = EdgeWeights::uniform(3, 1, 1.0).unwrap();
        let lap = assemble_laplacian(&w, &strip_seeds(3)).unwrap();
        let m = apply_boundary_modification(&lap, &[1], 0.5).unwrap();
        assert_eq!(m.lu().to_dense(), vec![vec![1.5]]);
        assert_eq!(m.r(), lap.r());
        assert_eq!(m.rhs(), vec![1.0 - 0.25]);

        assert_eq!(apply_boundary_modification(&lap, &[1], 0.0).unwrap(), lap);
        assert_eq!(apply_boundary_modification(&lap, &[], 0.5).unwrap(), lap);
    }

    #[test]
    fn boundary_modification_rejects_out_of_range_lambda() {
        let w = EdgeWeights::uniform(3, 1, 1.0).unwrap();
        let lap = assemble_laplacian(&w, &strip_seeds(3)).unwrap();
        for bad in [-0.1, 1.0 + 1e-12, f64::NAN] {
            assert!(matches!(
                apply_boundary_modification(&lap, &[1], bad),
                Err(Error::ConvexityViolation { .. })
            ));
        }
        assert!(apply_boundary_modification(&lap, &[1], 1.0).is_ok());
        assert!(apply_boundary_modification(&lap, &[0], 0.5).is_err());
    }

    #[test]
    fn assembly_uses_row_major_order_without_seeds() {
        let w = EdgeWeights::uniform(3, 2, 1.0).unwrap();
        let mut seeds = SeedState::new(3, 2);
        seeds.add_seed(1, Label::Foreground, Provenance::User).unwrap();
        seeds.add_seed(5, Label::Background, Provenance::User).unwrap();
        let lap = assemble_laplacian(&w, &seeds).unwrap();
        assert_eq!(lap.vertex_index(), &[0, 2, 3, 4]);
        assert_eq!(lap.seeded_index(), &[1, 5]);
        assert_eq!(lap.seed_values(), &[1.0, 0.0]);
        assert_eq!(lap.row_of(3), Some(2));
        assert_eq!(lap.row_of(5), None);
    }
}
