//! Synthetic two-region evaluation corpus.
//!
//! Each case is a foreground shape on a flat background with Gaussian pixel
//! noise, a ground-truth trimap with a 2-pixel unclassified band around the
//! true contour, and a few short scripted strokes. Generation is fully
//! deterministic, so the files written by [`write_corpus`] are reproducible.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::ImageGrid;
use crate::imageio::{
    self, SeedMask, Trimap, TRIMAP_BACKGROUND, TRIMAP_FOREGROUND, TRIMAP_UNCLASSIFIED,
};
use crate::strokes::{rasterize, Stroke, StrokeKind};

pub const IMAGE_FILE: &str = "image.png";
pub const SEEDS_FILE: &str = "seeds.png";
pub const TRIMAP_FILE: &str = "trimap.png";

const SIZE: usize = 48;
const BAND: usize = 2;
const FADE: f64 = 0.75;

#[derive(Debug, Clone, Copy)]
enum Shape {
    Disk { cx: f64, cy: f64, r: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64 },
    Ell,
    TwoLobes,
    Triangle,
}

impl Shape {
    fn contains(self, x: f64, y: f64) -> bool {
        match self {
            Shape::Disk { cx, cy, r } => (x - cx).powi(2) + (y - cy).powi(2) <= r * r,
            Shape::Rect { x0, y0, x1, y1 } => x >= x0 && x <= x1 && y >= y0 && y <= y1,
            Shape::Ellipse { cx, cy, rx, ry } => ((x - cx) / rx).powi(2) + ((y - cy) / ry).powi(2) <= 1.0,
            Shape::Ell => {
                ((12.0..=22.0).contains(&x) && (10.0..=38.0).contains(&y))
                    || ((12.0..=36.0).contains(&x) && (28.0..=38.0).contains(&y))
            }
            Shape::TwoLobes => {
                (x - 17.0).powi(2) + (y - 22.0).powi(2) <= 81.0
                    || (x - 30.0).powi(2) + (y - 26.0).powi(2) <= 81.0
            }
            Shape::Triangle => {
                // Apex (24, 9), base from (9, 38) to (39, 38).
                let left = (x - 24.0) * 29.0 + (y - 9.0) * 15.0 >= 0.0;
                let right = -(x - 24.0) * 29.0 + (y - 9.0) * 15.0 >= 0.0;
                left && right && y <= 38.0
            }
        }
    }
}

struct CaseSpec {
    name: &'static str,
    shape: Shape,
    foreground: f64,
    background: f64,
    noise: f64,
    // Fraction of the contrast lost from the left edge to the right edge.
    fade: f64,
    strokes: Vec<Stroke>,
}

fn line(kind: StrokeKind, a: [f64; 2], b: [f64; 2]) -> Stroke {
    Stroke::new(kind, 1.0, vec![a, b])
}

fn specs() -> Vec<CaseSpec> {
    use StrokeKind::{Background as B, Foreground as F};
    // A background frame around the object plus one foreground scribble.
    let with = |f: Vec<Stroke>| {
        let mut s = f;
        s.push(Stroke::new(
            B,
            1.0,
            vec![[4.0, 4.0], [43.0, 4.0], [43.0, 43.0], [4.0, 43.0], [4.0, 4.0]],
        ));
        s
    };
    vec![
        CaseSpec {
            name: "disk",
            shape: Shape::Disk { cx: 24.0, cy: 24.0, r: 13.0 },
            foreground: 0.7,
            background: 0.3,
            noise: 0.04,
            fade: FADE,
            strokes: with(vec![line(F, [15.0, 24.0], [33.0, 24.0]), line(F, [24.0, 15.0], [24.0, 33.0])]),
        },
        CaseSpec {
            name: "rectangle",
            shape: Shape::Rect { x0: 10.0, y0: 14.0, x1: 37.0, y1: 33.0 },
            foreground: 0.35,
            background: 0.65,
            noise: 0.05,
            fade: FADE,
            strokes: with(vec![line(F, [14.0, 19.0], [33.0, 19.0]), line(F, [14.0, 28.0], [33.0, 28.0])]),
        },
        CaseSpec {
            name: "ellipse",
            shape: Shape::Ellipse { cx: 24.0, cy: 24.0, rx: 16.0, ry: 9.0 },
            foreground: 0.68,
            background: 0.38,
            noise: 0.06,
            fade: FADE,
            strokes: with(vec![line(F, [12.0, 24.0], [36.0, 24.0]), line(F, [24.0, 18.0], [24.0, 30.0])]),
        },
        CaseSpec {
            name: "ell",
            shape: Shape::Ell,
            foreground: 0.3,
            background: 0.6,
            noise: 0.07,
            fade: FADE,
            strokes: with(vec![Stroke::new(F, 1.0, vec![[17.0, 14.0], [17.0, 33.0], [32.0, 33.0]])]),
        },
        CaseSpec {
            name: "two_lobes",
            shape: Shape::TwoLobes,
            foreground: 0.62,
            background: 0.34,
            noise: 0.08,
            fade: FADE,
            strokes: with(vec![line(F, [11.0, 21.0], [36.0, 27.0]), line(F, [17.0, 16.0], [17.0, 28.0]), line(F, [30.0, 20.0], [30.0, 32.0])]),
        },
        CaseSpec {
            name: "triangle",
            shape: Shape::Triangle,
            foreground: 0.6,
            background: 0.35,
            noise: 0.09,
            fade: FADE,
            strokes: with(vec![Stroke::new(F, 1.0, vec![[24.0, 16.0], [24.0, 34.0]]), line(F, [16.0, 34.0], [32.0, 34.0])]),
        },
    ]
}

#[derive(Debug, Clone)]
pub struct SyntheticCase {
    pub name: String,
    pub image: ImageGrid,
    pub strokes: Vec<Stroke>,
    pub seeds: SeedMask,
    pub trimap: Trimap,
    /// True foreground membership per pixel.
    pub truth: Vec<bool>,
}

fn build(index: usize, spec: CaseSpec) -> Result<SyntheticCase> {
    let n = SIZE * SIZE;
    let truth: Vec<bool> = (0..n)
        .map(|i| spec.shape.contains((i % SIZE) as f64, (i / SIZE) as f64))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + index as u64);
    let noise = Normal::new(0.0, spec.noise).map_err(|e| Error::invalid(e.to_string()))?;
    let intensity: Vec<f64> = truth
        .iter()
        .enumerate()
        .map(|(i, &fg)| {
            let t = (i % SIZE) as f64 / (SIZE - 1) as f64;
            let base = if fg {
                spec.foreground + (spec.background - spec.foreground) * spec.fade * t
            } else {
                spec.background
            };
            // Quantize to 8 bits so the in-memory image equals its PNG.
            let v = (base + noise.sample(&mut rng)).clamp(0.0, 1.0);
            imageio::to_byte(v) as f64 / 255.0
        })
        .collect();
    let image = ImageGrid::new(SIZE, SIZE, intensity)?;

    let mut codes = Vec::with_capacity(n);
    for y in 0..SIZE {
        for x in 0..SIZE {
            let t = truth[y * SIZE + x];
            let ys = y.saturating_sub(BAND)..=(y + BAND).min(SIZE - 1);
            let near_edge = ys.into_iter().any(|yy| {
                (x.saturating_sub(BAND)..=(x + BAND).min(SIZE - 1)).any(|xx| truth[yy * SIZE + xx] != t)
            });
            codes.push(match (near_edge, t) {
                (true, _) => TRIMAP_UNCLASSIFIED,
                (false, true) => TRIMAP_FOREGROUND,
                (false, false) => TRIMAP_BACKGROUND,
            });
        }
    }
    let trimap = Trimap::new(SIZE, SIZE, codes)?;
    let seeds = rasterize(SIZE, SIZE, &spec.strokes);

    Ok(SyntheticCase {
        name: format!("{:02}_{}", index, spec.name),
        image,
        strokes: spec.strokes,
        seeds,
        trimap,
        truth,
    })
}

/// The bundled cases, in order of increasing noise.
pub fn synthetic_corpus() -> Vec<SyntheticCase> {
    specs()
        .into_iter()
        .enumerate()
        .map(|(i, s)| build(i, s).expect("corpus specs are valid"))
        .collect()
}

/// Writes each case to `<dir>/<name>/{image,seeds,trimap}.png`.
pub fn write_corpus(cases: &[SyntheticCase], dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for case in cases {
        let d = dir.as_ref().join(&case.name);
        fs::create_dir_all(&d)?;
        imageio::save_image(&case.image, d.join(IMAGE_FILE))?;
        imageio::save_seed_mask(&case.seeds, d.join(SEEDS_FILE))?;
        imageio::save_trimap(&case.trimap, d.join(TRIMAP_FILE))?;
        out.push(d);
    }
    Ok(out)
}

/// A case read back from disk.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub image: ImageGrid,
    pub seeds: SeedMask,
    pub trimap: Trimap,
}

/// Loads every subdirectory of `dir` holding the three corpus files, sorted
/// by name.
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Vec<CorpusEntry>> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(dir.as_ref())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(IMAGE_FILE).is_file())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(Error::invalid(format!("no corpus cases under {}", dir.as_ref().display())));
    }
    dirs.into_iter()
        .map(|d| {
            let image = imageio::load_image(d.join(IMAGE_FILE))?;
            let dims = Some((image.width(), image.height()));
            Ok(CorpusEntry {
                name: d.file_name().unwrap().to_string_lossy().into_owned(),
                seeds: imageio::load_seed_mask(d.join(SEEDS_FILE), dims)?,
                trimap: imageio::load_trimap(d.join(TRIMAP_FILE), dims)?,
                image,
            })
        })
        .collect()
}
