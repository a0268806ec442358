use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Background,
    Foreground,
}

impl Label {
    /// Fixed probability of a seed of this class.
    pub fn probability(self) -> f64 {
        match self {
            Label::Background => 0.0,
            Label::Foreground => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    User,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    Free,
    Boundary,
    Seed(Label, Provenance),
}

/// Foreground, background and boundary marks over a pixel lattice.
///
/// Each pixel carries at most one mark, so the three sets are disjoint by
/// construction. Pixels are addressed by row-major index `y * width + x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedState {
    width: usize,
    height: usize,
    marks: Vec<Mark>,
    n_foreground: usize,
    n_background: usize,
    n_boundary: usize,
}

impl SeedState {
    pub fn new(width: usize, height: usize) -> Self {
        SeedState {
            width,
            height,
            marks: vec![Mark::Free; width * height],
            n_foreground: 0,
            n_background: 0,
            n_boundary: 0,
        }
    }

    /// User seeds from explicit index sets. Duplicates within a set are fine;
    /// an index in both sets is a conflict.
    pub fn from_sets<F, B>(width: usize, height: usize, foreground: F, background: B) -> Result<Self>
    where
        F: IntoIterator<Item = usize>,
        B: IntoIterator<Item = usize>,
    {
        let mut seeds = SeedState::new(width, height);
        for i in foreground {
            seeds.add_seed(i, Label::Foreground, Provenance::User)?;
        }
        for i in background {
            seeds.add_seed(i, Label::Background, Provenance::User)?;
        }
        Ok(seeds)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_foreground == 0 && self.n_background == 0
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.marks.len() {
            return Err(Error::invalid(format!(
                "pixel index {index} out of range for a {}x{} lattice",
                self.width, self.height
            )));
        }
        Ok(())
    }

    /// Marks `index` as a seed. Returns `Ok(true)` when the pixel was not a
    /// seed before. Re-adding the same label keeps the original provenance;
    /// a boundary mark on the pixel is dropped.
    pub fn add_seed(&mut self, index: usize, label: Label, provenance: Provenance) -> Result<bool> {
        self.check_index(index)?;
        match self.marks[index] {
            Mark::Seed(existing, _) if existing == label => Ok(false),
            Mark::Seed(..) => Err(Error::ConflictingSeeds { index }),
            mark => {
                if mark == Mark::Boundary {
                    self.n_boundary -= 1;
                }
                self.marks[index] = Mark::Seed(label, provenance);
                match label {
                    Label::Foreground => self.n_foreground += 1,
                    Label::Background => self.n_background += 1,
                }
                Ok(true)
            }
        }
    }

    /// Replaces the boundary set. Seeded pixels cannot be boundary pixels.
    pub fn set_boundary(&mut self, boundary: &[usize]) -> Result<()> {
        for &i in boundary {
            self.check_index(i)?;
            if let Mark::Seed(..) = self.marks[i] {
                return Err(Error::invalid(format!("boundary pixel {i} is already a seed")));
            }
        }
        self.clear_boundary();
        for &i in boundary {
            if self.marks[i] == Mark::Free {
                self.marks[i] = Mark::Boundary;
                self.n_boundary += 1;
            }
        }
        Ok(())
    }

    pub fn clear_boundary(&mut self) {
        for m in self.marks.iter_mut() {
            if *m == Mark::Boundary {
                *m = Mark::Free;
            }
        }
        self.n_boundary = 0;
    }

    pub fn label(&self, index: usize) -> Option<Label> {
        match self.marks[index] {
            Mark::Seed(label, _) => Some(label),
            _ => None,
        }
    }

    pub fn provenance(&self, index: usize) -> Option<Provenance> {
        match self.marks[index] {
            Mark::Seed(_, p) => Some(p),
            _ => None,
        }
    }

    pub fn is_seed(&self, index: usize) -> bool {
        matches!(self.marks[index], Mark::Seed(..))
    }

    pub fn is_boundary(&self, index: usize) -> bool {
        self.marks[index] == Mark::Boundary
    }

    pub fn foreground_count(&self) -> usize {
        self.n_foreground
    }

    pub fn background_count(&self) -> usize {
        self.n_background
    }

    pub fn boundary_count(&self) -> usize {
        self.n_boundary
    }

    pub fn seed_count(&self) -> usize {
        self.n_foreground + self.n_background
    }

    pub fn foreground(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices_where(|m| matches!(m, Mark::Seed(Label::Foreground, _)))
    }

    pub fn background(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices_where(|m| matches!(m, Mark::Seed(Label::Background, _)))
    }

    pub fn boundary(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices_where(|m| m == Mark::Boundary)
    }

    fn indices_where(&self, pred: impl Fn(Mark) -> bool + 'static) -> impl Iterator<Item = usize> + '_ {
        self.marks
            .iter()
            .enumerate()
            .filter(move |(_, &m)| pred(m))
            .map(|(i, _)| i)
    }

    /// Copy holding only the user-provenance seeds, no boundary.
    pub fn user_only(&self) -> SeedState {
        let mut out = SeedState::new(self.width, self.height);
        for (i, m) in self.marks.iter().enumerate() {
            if let Mark::Seed(label, Provenance::User) = *m {
                out.marks[i] = Mark::Seed(label, Provenance::User);
                match label {
                    Label::Foreground => out.n_foreground += 1,
                    Label::Background => out.n_background += 1,
                }
            }
        }
        out
    }
}
