//! Sub-σ-algebras of the product σ-algebra on a finite grid.
//!
//! On a finite set every σ-algebra is determined by its atoms, so a
//! [`SigmaAlgebra`] is stored as a partition of the flat cell indices. The
//! partition is kept canonical (cells ascending inside each atom, atoms ordered
//! by their smallest cell), which makes structural equality meaningful.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::space::FiniteProductSpace;

/// Largest grid the progressive construction will build by default.
pub const DEFAULT_CELL_CAP: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaAlgebra {
    rows: usize,
    cols: usize,
    atoms: Vec<Vec<usize>>,
    atom_of: Vec<usize>,
}

/// A family of cell sets, each cell written as `[row, col]`.
pub type CellSets = Vec<Vec<[usize; 2]>>;

impl SigmaAlgebra {
    /// Builds a σ-algebra from a list of atoms, which must partition the grid.
    pub fn from_atoms(shape: (usize, usize), atoms: Vec<Vec<usize>>) -> Result<Self> {
        let (rows, cols) = shape;
        let total = rows * cols;
        if total == 0 {
            return Err(LabError::EmptyFactor { rows, cols });
        }
        let mut labels = vec![usize::MAX; total];
        for (k, atom) in atoms.iter().enumerate() {
            if atom.is_empty() {
                return Err(LabError::NotAPartition("empty atom".into()));
            }
            for &c in atom {
                if c >= total {
                    return Err(LabError::CellOutOfRange {
                        row: c / cols,
                        col: c % cols,
                        rows,
                        cols,
                    });
                }
                if labels[c] != usize::MAX {
                    return Err(LabError::NotAPartition(format!(
                        "cell ({}, {}) belongs to two atoms",
                        c / cols,
                        c % cols
                    )));
                }
                labels[c] = k;
            }
        }
        if let Some(c) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(LabError::NotAPartition(format!(
                "cell ({}, {}) is not covered",
                c / cols,
                c % cols
            )));
        }
        Ok(Self::from_labels_unchecked(shape, &labels))
    }

    /// Cells with equal labels share an atom.
    pub fn from_labels<L: Eq + std::hash::Hash>(
        shape: (usize, usize),
        labels: &[L],
    ) -> Result<Self> {
        let (rows, cols) = shape;
        if rows * cols == 0 {
            return Err(LabError::EmptyFactor { rows, cols });
        }
        if labels.len() != rows * cols {
            return Err(LabError::Invalid(format!(
                "expected {} labels, got {}",
                rows * cols,
                labels.len()
            )));
        }
        Ok(Self::from_labels_unchecked(shape, labels))
    }

    fn from_labels_unchecked<L: Eq + std::hash::Hash>(shape: (usize, usize), labels: &[L]) -> Self {
        // Scanning cells in order assigns atom numbers by smallest cell.
        let mut index: HashMap<&L, usize> = HashMap::new();
        let mut atoms: Vec<Vec<usize>> = Vec::new();
        let mut atom_of = Vec::with_capacity(labels.len());
        for (c, l) in labels.iter().enumerate() {
            let k = *index.entry(l).or_insert_with(|| {
                atoms.push(Vec::new());
                atoms.len() - 1
            });
            atoms[k].push(c);
            atom_of.push(k);
        }
        SigmaAlgebra {
            rows: shape.0,
            cols: shape.1,
            atoms,
            atom_of,
        }
    }

    /// The σ-algebra generated by a family of cell sets: two cells share an
    /// atom iff they belong to exactly the same generators.
    pub fn generate(shape: (usize, usize), generators: &[Vec<[usize; 2]>]) -> Result<Self> {
        let (rows, cols) = shape;
        if rows * cols == 0 {
            return Err(LabError::EmptyFactor { rows, cols });
        }
        let words = generators.len().div_ceil(64);
        let mut signature = vec![vec![0u64; words]; rows * cols];
        for (g, set) in generators.iter().enumerate() {
            for &[row, col] in set {
                if row >= rows || col >= cols {
                    return Err(LabError::CellOutOfRange {
                        row,
                        col,
                        rows,
                        cols,
                    });
                }
                signature[row * cols + col][g / 64] |= 1 << (g % 64);
            }
        }
        Ok(Self::from_labels_unchecked(shape, &signature))
    }

    pub fn trivial(shape: (usize, usize)) -> Result<Self> {
        Self::from_labels(shape, &vec![0u8; shape.0 * shape.1])
    }

    /// The full product σ-algebra: every cell is an atom.
    pub fn full(shape: (usize, usize)) -> Result<Self> {
        let labels: Vec<usize> = (0..shape.0 * shape.1).collect();
        Self::from_labels(shape, &labels)
    }

    /// The σ-algebra of transpose-invariant sets on an `n x n` grid.
    pub fn symmetric(n: usize) -> Result<Self> {
        Self::symmetric_on((n, n))
    }

    pub fn symmetric_on(shape: (usize, usize)) -> Result<Self> {
        let (rows, cols) = shape;
        if rows != cols {
            return Err(LabError::NonSquare { rows, cols });
        }
        let n = rows;
        let labels: Vec<(usize, usize)> = (0..n * n)
            .map(|c| {
                let (i, j) = (c / n, c % n);
                (i.min(j), i.max(j))
            })
            .collect();
        Self::from_labels(shape, &labels)
    }

    /// Discrete progressive σ-algebra over `horizon` time steps.
    ///
    /// Rows are the time points `t = 1..=horizon` (row `t - 1`), each with mass
    /// `1/horizon`. Columns are the `2^horizon` fair coin paths; coin `k`
    /// (1-based) of path `b` is bit `horizon - k` of `b`, so the first coin is
    /// the most significant bit. At time `t` the atoms are `{t} x C` for the
    /// cylinders `C` fixing the first `t` coins, i.e. blocks of
    /// `2^(horizon - t)` consecutive columns.
    pub fn progressive(horizon: usize, cap: usize) -> Result<(FiniteProductSpace, Self)> {
        if horizon == 0 {
            return Err(LabError::Invalid("horizon must be at least 1".into()));
        }
        if horizon >= usize::BITS as usize - 1 {
            return Err(LabError::SizeCap {
                what: "progressive σ-algebra",
                size: usize::MAX,
                cap,
            });
        }
        let paths = 1usize << horizon;
        let size = horizon.saturating_mul(paths);
        if size > cap {
            return Err(LabError::SizeCap {
                what: "progressive σ-algebra",
                size,
                cap,
            });
        }
        let space = FiniteProductSpace::uniform(horizon, paths)?;
        let labels: Vec<(usize, usize)> = (0..size)
            .map(|c| {
                let (row, b) = (c / paths, c % paths);
                let t = row + 1;
                (row, b >> (horizon - t))
            })
            .collect();
        Ok((space, Self::from_labels((horizon, paths), &labels)?))
    }

    /// Product σ-algebra on the grid of [`FiniteProductSpace::tensor`].
    pub fn tensor(&self, other: &SigmaAlgebra) -> SigmaAlgebra {
        let (m2, n2) = other.shape();
        let (m, n) = (self.rows * m2, self.cols * n2);
        let mut labels = vec![(0usize, 0usize); m * n];
        for c1 in 0..self.num_cells() {
            let (i1, j1) = (c1 / self.cols, c1 % self.cols);
            for c2 in 0..other.num_cells() {
                let (i2, j2) = (c2 / n2, c2 % n2);
                labels[(i1 * m2 + i2) * n + j1 * n2 + j2] = (self.atom_of[c1], other.atom_of[c2]);
            }
        }
        Self::from_labels_unchecked((m, n), &labels)
    }

    /// True iff `coarse ⊆ fine`, i.e. every atom of `fine` lies inside an
    /// atom of `coarse`.
    pub fn is_sub_sigma_algebra(coarse: &SigmaAlgebra, fine: &SigmaAlgebra) -> Result<bool> {
        if coarse.shape() != fine.shape() {
            return Err(LabError::ShapeMismatch {
                expected: coarse.shape(),
                got: fine.shape(),
            });
        }
        Ok(fine.atoms.iter().all(|atom| {
            let k = coarse.atom_of[atom[0]];
            atom.iter().all(|&c| coarse.atom_of[c] == k)
        }))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn num_cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn atoms(&self) -> &[Vec<usize>] {
        &self.atoms
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    /// Index of the atom containing each cell.
    pub fn atom_of(&self) -> &[usize] {
        &self.atom_of
    }

    pub fn check_space(&self, space: &FiniteProductSpace) -> Result<()> {
        if space.shape() != self.shape() {
            return Err(LabError::ShapeMismatch {
                expected: space.shape(),
                got: self.shape(),
            });
        }
        Ok(())
    }

    /// Atoms as `[row, col]` pairs, the serialized form.
    pub fn to_cell_sets(&self) -> CellSets {
        self.atoms
            .iter()
            .map(|a| a.iter().map(|&c| [c / self.cols, c % self.cols]).collect())
            .collect()
    }

    pub fn from_cell_sets(shape: (usize, usize), sets: &[Vec<[usize; 2]>]) -> Result<Self> {
        let (rows, cols) = shape;
        let atoms = sets
            .iter()
            .map(|set| {
                set.iter()
                    .map(|&[row, col]| {
                        if row >= rows || col >= cols {
                            Err(LabError::CellOutOfRange {
                                row,
                                col,
                                rows,
                                cols,
                            })
                        } else {
                            Ok(row * cols + col)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_atoms(shape, atoms)
    }
}

/// Serialized σ-algebra: either explicit atoms or a generator family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaDoc {
    Atoms(CellSets),
    Generators(CellSets),
}

impl SigmaDoc {
    pub fn build(&self, shape: (usize, usize)) -> Result<SigmaAlgebra> {
        match self {
            SigmaDoc::Atoms(sets) => SigmaAlgebra::from_cell_sets(shape, sets),
            SigmaDoc::Generators(sets) => SigmaAlgebra::generate(shape, sets),
        }
    }
}

impl From<&SigmaAlgebra> for SigmaDoc {
    fn from(s: &SigmaAlgebra) -> Self {
        SigmaDoc::Atoms(s.to_cell_sets())
    }
}
