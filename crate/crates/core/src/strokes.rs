//! Scribble strokes and their rasterization into seed masks.
//!
//! A stroke is a polyline in pixel coordinates (pixel centers sit on integer
//! coordinates) painted with a round brush. Strokes are replayed in order, so
//! later strokes overwrite earlier ones and erase strokes clear them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageio::{SeedMask, SEED_BACKGROUND, SEED_FOREGROUND, SEED_NONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrokeKind {
    Foreground,
    Background,
    Erase,
}

impl StrokeKind {
    fn code(self) -> u8 {
        match self {
            StrokeKind::Foreground => SEED_FOREGROUND,
            StrokeKind::Background => SEED_BACKGROUND,
            StrokeKind::Erase => SEED_NONE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    pub kind: StrokeKind,
    /// Brush radius in pixels; anything below half a pixel paints the single
    /// pixel under the path.
    pub radius: f64,
    pub points: Vec<[f64; 2]>,
}

impl Stroke {
    pub fn new(kind: StrokeKind, radius: f64, points: Vec<[f64; 2]>) -> Self {
        Stroke { kind, radius, points }
    }

    /// Checks that the stroke is non-empty and every point lies on the image.
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::invalid("stroke has no points"));
        }
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(Error::invalid(format!("brush radius must be nonnegative, got {}", self.radius)));
        }
        let (wmax, hmax) = ((width as f64) - 0.5, (height as f64) - 0.5);
        for &[x, y] in &self.points {
            if !(x >= -0.5 && x <= wmax && y >= -0.5 && y <= hmax) {
                return Err(Error::invalid(format!(
                    "stroke point ({x}, {y}) lies outside the {width}x{height} image"
                )));
            }
        }
        Ok(())
    }
}

fn dist_sq_to_segment(px: f64, py: f64, a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len_sq = dx * dx + dy * dy;
    let t = if len_sq > 0.0 {
        (((px - a[0]) * dx + (py - a[1]) * dy) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (cx, cy) = (a[0] + t * dx, a[1] + t * dy);
    (px - cx) * (px - cx) + (py - cy) * (py - cy)
}

/// Paints one stroke onto the mask. Pixels outside the image are skipped.
pub fn stamp(mask: &mut SeedMask, stroke: &Stroke) {
    let (w, h) = (mask.width(), mask.height());
    let r = stroke.radius.max(0.5);
    let code = stroke.kind.code();
    let codes = mask.codes_mut();
    let segments: Vec<([f64; 2], [f64; 2])> = if stroke.points.len() == 1 {
        vec![(stroke.points[0], stroke.points[0])]
    } else {
        stroke.points.windows(2).map(|p| (p[0], p[1])).collect()
    };
    for (a, b) in segments {
        let x0 = (a[0].min(b[0]) - r).floor().max(0.0) as usize;
        let y0 = (a[1].min(b[1]) - r).floor().max(0.0) as usize;
        let x1 = ((a[0].max(b[0]) + r).ceil().max(0.0) as usize).min(w.saturating_sub(1));
        let y1 = ((a[1].max(b[1]) + r).ceil().max(0.0) as usize).min(h.saturating_sub(1));
        for y in y0..=y1 {
            for x in x0..=x1 {
                if dist_sq_to_segment(x as f64, y as f64, a, b) <= r * r {
                    codes[y * w + x] = code;
                }
            }
        }
    }
}

/// Replays strokes in order onto an empty mask.
pub fn rasterize(width: usize, height: usize, strokes: &[Stroke]) -> SeedMask {
    let mut mask = SeedMask::empty(width, height);
    for s in strokes {
        stamp(&mut mask, s);
    }
    mask
}
