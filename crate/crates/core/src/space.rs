//! Finite product probability spaces and the functions living on them.
//!
//! A space is a pair of weighted atom sets `A` (rows) and `B` (columns). Cells
//! are addressed row-major: cell `(i, j)` has flat index `i * cols + j`. Every
//! module in the crate uses this layout.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Tolerance on the total mass of each factor.
pub const WEIGHT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceDoc", into = "SpaceDoc")]
pub struct FiniteProductSpace {
    a_weights: Vec<f64>,
    b_weights: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SpaceDoc {
    a_weights: Vec<f64>,
    b_weights: Vec<f64>,
}

impl TryFrom<SpaceDoc> for FiniteProductSpace {
    type Error = LabError;

    fn try_from(doc: SpaceDoc) -> Result<Self> {
        FiniteProductSpace::new(doc.a_weights, doc.b_weights)
    }
}

impl From<FiniteProductSpace> for SpaceDoc {
    fn from(s: FiniteProductSpace) -> Self {
        SpaceDoc {
            a_weights: s.a_weights,
            b_weights: s.b_weights,
        }
    }
}

fn check_factor(side: &'static str, w: &[f64]) -> Result<()> {
    let sum: f64 = w.iter().sum();
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) || (sum - 1.0).abs() > WEIGHT_TOL {
        return Err(LabError::BadWeights { side, sum });
    }
    Ok(())
}

fn outer(u: &[f64], v: &[f64]) -> Vec<f64> {
    u.iter()
        .flat_map(|x| v.iter().map(move |y| x * y))
        .collect()
}

impl FiniteProductSpace {
    pub fn new(a_weights: Vec<f64>, b_weights: Vec<f64>) -> Result<Self> {
        if a_weights.is_empty() || b_weights.is_empty() {
            return Err(LabError::EmptyFactor {
                rows: a_weights.len(),
                cols: b_weights.len(),
            });
        }
        check_factor("A", &a_weights)?;
        check_factor("B", &b_weights)?;
        Ok(FiniteProductSpace {
            a_weights,
            b_weights,
        })
    }

    /// Uniform weights `1/m` on the rows and `1/n` on the columns.
    pub fn uniform(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(LabError::EmptyFactor { rows: m, cols: n });
        }
        Self::new(vec![1.0 / m as f64; m], vec![1.0 / n as f64; n])
    }

    /// Product of two spaces. The A-factors and the B-factors are grouped
    /// separately: row `i1 * m2 + i2` carries `a1[i1] * a2[i2]`, and likewise
    /// for columns.
    pub fn tensor(&self, other: &FiniteProductSpace) -> FiniteProductSpace {
        FiniteProductSpace {
            a_weights: outer(&self.a_weights, &other.a_weights),
            b_weights: outer(&self.b_weights, &other.b_weights),
        }
    }

    pub fn rows(&self) -> usize {
        self.a_weights.len()
    }

    pub fn cols(&self) -> usize {
        self.b_weights.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    pub fn num_cells(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn a_weights(&self) -> &[f64] {
        &self.a_weights
    }

    pub fn b_weights(&self) -> &[f64] {
        &self.b_weights
    }

    pub fn cell_weight(&self, cell: usize) -> f64 {
        let n = self.cols();
        self.a_weights[cell / n] * self.b_weights[cell % n]
    }

    /// Cell weights in row-major order.
    pub fn cell_weights(&self) -> Vec<f64> {
        outer(&self.a_weights, &self.b_weights)
    }

    pub fn check_function(&self, f: &GridFunction) -> Result<()> {
        if f.shape() != self.shape() {
            return Err(LabError::ShapeMismatch {
                expected: self.shape(),
                got: f.shape(),
            });
        }
        Ok(())
    }

    /// The integral of `f` against the product measure, one entry per
    /// coordinate of the target space.
    pub fn integrate(&self, f: &GridFunction) -> Result<Vec<f64>> {
        self.check_function(f)?;
        let mut total = vec![0.0; f.dim()];
        for (c, w) in self.cell_weights().into_iter().enumerate() {
            for (t, v) in total.iter_mut().zip(f.cell(c)) {
                *t += w * v;
            }
        }
        Ok(total)
    }
}

/// A function from the cells of an `rows x cols` grid into `R^dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionDoc", into = "FunctionDoc")]
pub struct GridFunction {
    rows: usize,
    cols: usize,
    dim: usize,
    values: Vec<f64>,
}

/// Serialized form: `dim` plus one array per grid row, each holding the
/// row's cells in order, `dim` numbers per cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct FunctionDoc {
    dim: usize,
    values: Vec<Vec<f64>>,
}

impl TryFrom<FunctionDoc> for GridFunction {
    type Error = LabError;

    fn try_from(doc: FunctionDoc) -> Result<Self> {
        if doc.dim == 0 {
            return Err(LabError::Invalid("dim must be at least 1".into()));
        }
        let rows = doc.values.len();
        let width = doc.values.first().map_or(0, Vec::len);
        if rows == 0 || width == 0 || !width.is_multiple_of(doc.dim) {
            return Err(LabError::Invalid(format!(
                "function rows must be nonempty multiples of dim = {}",
                doc.dim
            )));
        }
        if doc.values.iter().any(|r| r.len() != width) {
            return Err(LabError::Invalid(
                "function rows have unequal lengths".into(),
            ));
        }
        GridFunction::new(rows, width / doc.dim, doc.dim, doc.values.concat())
    }
}

impl From<GridFunction> for FunctionDoc {
    fn from(f: GridFunction) -> Self {
        let width = f.cols * f.dim;
        FunctionDoc {
            dim: f.dim,
            values: f.values.chunks(width).map(<[f64]>::to_vec).collect(),
        }
    }
}

impl GridFunction {
    /// `values` holds the cells in row-major order, `dim` entries per cell.
    pub fn new(rows: usize, cols: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(LabError::EmptyFactor { rows, cols });
        }
        if dim == 0 {
            return Err(LabError::Invalid("dim must be at least 1".into()));
        }
        if values.len() != rows * cols * dim {
            return Err(LabError::Invalid(format!(
                "expected {} values for a {rows}x{cols} grid of dim {dim}, got {}",
                rows * cols * dim,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::NonFinite);
        }
        Ok(GridFunction {
            rows,
            cols,
            dim,
            values,
        })
    }

    pub fn scalar(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(rows, cols, 1, values)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let values = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        Self::scalar(rows, cols, values)
    }

    pub fn constant(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::scalar(rows, cols, vec![value; rows * cols])
    }

    pub fn zeros(rows: usize, cols: usize, dim: usize) -> Result<Self> {
        Self::new(rows, cols, dim, vec![0.0; rows * cols * dim])
    }

    /// Indicator function of a set of flat cell indices.
    pub fn indicator(rows: usize, cols: usize, cells: &[usize]) -> Result<Self> {
        let mut values = vec![0.0; rows * cols];
        for &c in cells {
            let slot = values.get_mut(c).ok_or(LabError::CellOutOfRange {
                row: c / cols.max(1),
                col: c % cols.max(1),
                rows,
                cols,
            })?;
            *slot = 1.0;
        }
        Self::scalar(rows, cols, values)
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

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_cells(&self) -> usize {
        self.rows * self.cols
    }

    /// Flat values, `dim` entries per cell, cells row-major.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn cell(&self, c: usize) -> &[f64] {
        &self.values[c * self.dim..(c + 1) * self.dim]
    }

    pub fn get(&self, i: usize, j: usize) -> &[f64] {
        self.cell(i * self.cols + j)
    }

    /// The value at `(i, j)` of a scalar function.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.get(i, j)[0]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    pub fn scaled(&self, alpha: f64) -> GridFunction {
        self.map(|v| alpha * v)
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &GridFunction, beta: f64) -> Result<GridFunction> {
        if self.shape() != other.shape() {
            return Err(LabError::ShapeMismatch {
                expected: self.shape(),
                got: other.shape(),
            });
        }
        if self.dim != other.dim {
            return Err(LabError::DimMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(GridFunction {
            values,
            ..self.clone()
        })
    }

    /// `(i, j) -> f(j, i)` on a square grid.
    pub fn transpose(&self) -> Result<GridFunction> {
        if self.rows != self.cols {
            return Err(LabError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..n {
            for j in 0..n {
                values.extend_from_slice(self.get(j, i));
            }
        }
        Ok(GridFunction {
            values,
            ..self.clone()
        })
    }

    /// Pure tensor `f1 ⊗ f2` of scalar functions, laid out like
    /// [`FiniteProductSpace::tensor`].
    pub fn tensor(&self, other: &GridFunction) -> Result<GridFunction> {
        if self.dim != 1 || other.dim != 1 {
            return Err(LabError::VectorValued("tensor of functions"));
        }
        let (m1, n1) = self.shape();
        let (m2, n2) = other.shape();
        let (m, n) = (m1 * m2, n1 * n2);
        let mut values = vec![0.0; m * n];
        for i1 in 0..m1 {
            for j1 in 0..n1 {
                let x = self.at(i1, j1);
                for i2 in 0..m2 {
                    for j2 in 0..n2 {
                        values[(i1 * m2 + i2) * n + j1 * n2 + j2] = x * other.at(i2, j2);
                    }
                }
            }
        }
        GridFunction::scalar(m, n, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_spaces() {
        let s = FiniteProductSpace::uniform(2, 2).unwrap();
        assert_eq!(s.a_weights(), &[0.5, 0.5]);
        assert!(s.cell_weights().iter().all(|&w| w == 0.25));

        let s = FiniteProductSpace::uniform(1, 1).unwrap();
        assert_eq!(s.cell_weights(), vec![1.0]);

        let s = FiniteProductSpace::uniform(3, 2).unwrap();
        for w in s.cell_weights() {
            assert!((w - 1.0 / 6.0).abs() < 1e-15);
        }
        assert!(matches!(
            FiniteProductSpace::uniform(0, 2),
            Err(LabError::EmptyFactor { .. })
        ));
    }

    #[test]
    fn rejects_unnormalized_weights() {
        assert!(FiniteProductSpace::new(vec![0.5, 0.4], vec![1.0]).is_err());
        assert!(FiniteProductSpace::new(vec![1.5, -0.5], vec![1.0]).is_err());
        // zero-weight atoms are allowed
        assert!(FiniteProductSpace::new(vec![1.0, 0.0], vec![1.0]).is_ok());
    }

    #[test]
    fn tensor_spaces() {
        let u = FiniteProductSpace::uniform(2, 2).unwrap();
        assert_eq!(u.tensor(&u), FiniteProductSpace::uniform(4, 4).unwrap());

        let point = FiniteProductSpace::uniform(1, 1).unwrap();
        assert_eq!(u.tensor(&point), u);

        let s1 = FiniteProductSpace::new(vec![1.0 / 3.0, 2.0 / 3.0], vec![1.0]).unwrap();
        let s2 = FiniteProductSpace::new(vec![0.5, 0.5], vec![1.0]).unwrap();
        let t = s1.tensor(&s2);
        let expected = [1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0];
        for (a, e) in t.a_weights().iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
    }

    #[test]
    fn integrate_examples() {
        let s = FiniteProductSpace::uniform(2, 2).unwrap();
        let c = GridFunction::constant(2, 2, 3.5).unwrap();
        assert_eq!(s.integrate(&c).unwrap(), vec![3.5]);

        let f = GridFunction::scalar(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(s.integrate(&f).unwrap(), vec![0.5]);

        let g = GridFunction::scalar(2, 2, vec![1.0, -2.0, 2.0, -1.0]).unwrap();
        assert_eq!(s.integrate(&g).unwrap(), vec![0.0]);

        let wrong = GridFunction::constant(3, 2, 1.0).unwrap();
        assert!(matches!(
            s.integrate(&wrong),
            Err(LabError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn function_document_shape() {
        let f = GridFunction::new(2, 2, 2, (0..8).map(f64::from).collect()).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(
            json,
            r#"{"dim":2,"values":[[0.0,1.0,2.0,3.0],[4.0,5.0,6.0,7.0]]}"#
        );
        let back: GridFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        assert!(
            serde_json::from_str::<GridFunction>(r#"{"dim":2,"values":[[1.0,2.0,3.0]]}"#).is_err()
        );
    }

    #[test]
    fn space_document_validates() {
        let s: FiniteProductSpace =
            serde_json::from_str(r#"{"a_weights":[0.5,0.5],"b_weights":[1.0]}"#).unwrap();
        assert_eq!(s.shape(), (2, 1));
        assert!(serde_json::from_str::<FiniteProductSpace>(
            r#"{"a_weights":[0.5],"b_weights":[1.0]}"#
        )
        .is_err());
    }

    #[test]
    fn rejects_non_finite_values() {
        assert_eq!(
            GridFunction::scalar(1, 2, vec![1.0, f64::NAN]),
            Err(LabError::NonFinite)
        );
    }
}
