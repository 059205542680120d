//! The conditional expectation `E(·|F)` on grid functions, its matrix, and
//! the check that averaging out the second factor preserves `F`-measurability.

use std::ops::{Add, Div, Mul};

use num_traits::Zero;

use crate::error::{LabError, Result};
use crate::sigma::SigmaAlgebra;
use crate::space::{FiniteProductSpace, GridFunction};

/// Absolute tolerance on the spread of values inside an atom.
pub const MEASURABILITY_TOL: f64 = 1e-12;

/// Largest grid for which the dense matrix is built.
pub const DENSE_CELL_CAP: usize = 4096;

/// Replaces the values on each atom by their weighted average. Atoms of zero
/// total weight are mapped to zero.
pub(crate) fn average_on_atoms<T>(
    weights: &[T],
    sigma: &SigmaAlgebra,
    values: &[T],
    dim: usize,
) -> Vec<T>
where
    T: Clone + Zero + Add<Output = T> + Mul<Output = T> + Div<Output = T>,
{
    let mut out = vec![T::zero(); values.len()];
    let mut sums = vec![T::zero(); dim];
    for atom in sigma.atoms() {
        let mut mass = T::zero();
        sums.iter_mut().for_each(|s| *s = T::zero());
        for &c in atom {
            mass = mass + weights[c].clone();
            for (k, s) in sums.iter_mut().enumerate() {
                *s = s.clone() + weights[c].clone() * values[c * dim + k].clone();
            }
        }
        if mass.is_zero() {
            continue;
        }
        for &c in atom {
            for (k, s) in sums.iter().enumerate() {
                out[c * dim + k] = s.clone() / mass.clone();
            }
        }
    }
    out
}

fn check_shapes(
    space: &FiniteProductSpace,
    sigma: &SigmaAlgebra,
    f: Option<&GridFunction>,
) -> Result<()> {
    sigma.check_space(space)?;
    if let Some(f) = f {
        space.check_function(f)?;
    }
    Ok(())
}

pub fn cond_exp(
    space: &FiniteProductSpace,
    sigma: &SigmaAlgebra,
    f: &GridFunction,
) -> Result<GridFunction> {
    check_shapes(space, sigma, Some(f))?;
    let values = average_on_atoms(&space.cell_weights(), sigma, f.values(), f.dim());
    GridFunction::new(f.rows(), f.cols(), f.dim(), values)
}

/// Dense matrix of `E(·|F)` acting on flattened scalar functions; row `c` is
/// the output cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CondExpMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl CondExpMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.size + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.size..(row + 1) * self.size]
    }

    /// Applies the matrix coordinatewise to a (possibly vector-valued) function.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if f.num_cells() != self.size {
            return Err(LabError::Invalid(format!(
                "function has {} cells, matrix acts on {}",
                f.num_cells(),
                self.size
            )));
        }
        let d = f.dim();
        let mut out = vec![0.0; f.values().len()];
        for r in 0..self.size {
            for (c, m) in self.row(r).iter().enumerate() {
                if *m != 0.0 {
                    for k in 0..d {
                        out[r * d + k] += m * f.cell(c)[k];
                    }
                }
            }
        }
        GridFunction::new(f.rows(), f.cols(), d, out)
    }
}

pub fn cond_exp_matrix(space: &FiniteProductSpace, sigma: &SigmaAlgebra) -> Result<CondExpMatrix> {
    check_shapes(space, sigma, None)?;
    let size = space.num_cells();
    if size > DENSE_CELL_CAP {
        return Err(LabError::SizeCap {
            what: "dense conditional expectation matrix",
            size,
            cap: DENSE_CELL_CAP,
        });
    }
    let w = space.cell_weights();
    let mut entries = vec![0.0; size * size];
    for atom in sigma.atoms() {
        let mass: f64 = atom.iter().map(|&c| w[c]).sum();
        if mass == 0.0 {
            continue;
        }
        for &r in atom {
            for &c in atom {
                entries[r * size + c] = w[c] / mass;
            }
        }
    }
    Ok(CondExpMatrix { size, entries })
}

/// `(I ⊗ E_ν) f`: each row replaced by its ν-average.
pub fn average_out_b(space: &FiniteProductSpace, f: &GridFunction) -> Result<GridFunction> {
    space.check_function(f)?;
    let (m, n) = space.shape();
    let d = f.dim();
    let nu = space.b_weights();
    let mut out = Vec::with_capacity(f.values().len());
    for i in 0..m {
        let mut avg = vec![0.0; d];
        for (j, w) in nu.iter().enumerate() {
            for (a, v) in avg.iter_mut().zip(f.get(i, j)) {
                *a += w * v;
            }
        }
        for _ in 0..n {
            out.extend_from_slice(&avg);
        }
    }
    GridFunction::new(m, n, d, out)
}

/// Whether `f` is constant (within `tol`) on the positive-weight cells of
/// every atom of positive weight.
pub fn is_measurable(
    space: &FiniteProductSpace,
    sigma: &SigmaAlgebra,
    f: &GridFunction,
    tol: f64,
) -> Result<bool> {
    check_shapes(space, sigma, Some(f))?;
    let w = space.cell_weights();
    for atom in sigma.atoms() {
        let mut live = atom.iter().copied().filter(|&c| w[c] > 0.0);
        let Some(first) = live.next() else { continue };
        let reference = f.cell(first);
        for c in live {
            if f.cell(c)
                .iter()
                .zip(reference)
                .any(|(a, b)| (a - b).abs() > tol)
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LyzReport {
    pub holds: bool,
    /// An `F`-measurable function whose image under `I ⊗ E_ν` is not
    /// `F`-measurable.
    pub witness: Option<GridFunction>,
    /// The image of the witness.
    pub image: Option<GridFunction>,
}

/// Checks whether `I ⊗ E_ν` maps `F`-measurable functions to `F`-measurable
/// functions.
///
/// By linearity it is enough to test the atom indicators. On failure the
/// witness is `1 - 1_α` for the first failing atom `α`; it fails as well since
/// constants are fixed, and on the 2x2 example of the crate's presets it is the
/// classical witness `(1, 1; 0, 1)`.
pub fn lyz_check(space: &FiniteProductSpace, sigma: &SigmaAlgebra) -> Result<LyzReport> {
    check_shapes(space, sigma, None)?;
    let (m, n) = space.shape();
    for atom in sigma.atoms() {
        let indicator = GridFunction::indicator(m, n, atom)?;
        let image = average_out_b(space, &indicator)?;
        if !is_measurable(space, sigma, &image, MEASURABILITY_TOL)? {
            let witness = indicator.map(|v| 1.0 - v);
            let image = average_out_b(space, &witness)?;
            return Ok(LyzReport {
                holds: false,
                witness: Some(witness),
                image: Some(image),
            });
        }
    }
    Ok(LyzReport {
        holds: true,
        witness: None,
        image: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qiu_sigma() -> SigmaAlgebra {
        SigmaAlgebra::generate((2, 2), &[vec![[0, 1]], vec![[1, 1]], vec![[0, 0], [1, 0]]]).unwrap()
    }

    // f(a, b) with a the row, b the column
    fn grid(f00: f64, f10: f64, f01: f64, f11: f64) -> GridFunction {
        GridFunction::scalar(2, 2, vec![f00, f01, f10, f11]).unwrap()
    }

    #[test]
    fn qiu_conditional_expectation() {
        let s = FiniteProductSpace::uniform(2, 2).unwrap();
        let ef = cond_exp(&s, &qiu_sigma(), &grid(0.0, 1.0, 1.0, 0.0)).unwrap();
        assert_eq!(ef, grid(0.5, 0.5, 1.0, 0.0));
    }

    #[test]
    fn extreme_sigma_algebras() {
        let s = FiniteProductSpace::new(vec![0.3, 0.7], vec![0.25, 0.75]).unwrap();
        let f = grid(1.0, -2.0, 4.0, 0.5);
        let full = SigmaAlgebra::full((2, 2)).unwrap();
        let ef = cond_exp(&s, &full, &f).unwrap();
        for (a, b) in ef.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-15);
        }
        let trivial = SigmaAlgebra::trivial((2, 2)).unwrap();
        let mean = s.integrate(&f).unwrap()[0];
        let ef = cond_exp(&s, &trivial, &f).unwrap();
        assert!(ef.values().iter().all(|v| (v - mean).abs() < 1e-15));
    }

    #[test]
    fn zero_weight_atoms_map_to_zero() {
        let s = FiniteProductSpace::new(vec![1.0, 0.0], vec![1.0]).unwrap();
        let sigma = SigmaAlgebra::full((2, 1)).unwrap();
        let f = GridFunction::scalar(2, 1, vec![3.0, 5.0]).unwrap();
        assert_eq!(cond_exp(&s, &sigma, &f).unwrap().values(), &[3.0, 0.0]);
    }

    #[test]
    fn shape_errors() {
        let s = FiniteProductSpace::uniform(2, 2).unwrap();
        let f = GridFunction::constant(2, 3, 1.0).unwrap();
        assert!(cond_exp(&s, &qiu_sigma(), &f).is_err());
        let other = SigmaAlgebra::trivial((2, 3)).unwrap();
        assert!(cond_exp(&s, &other, &GridFunction::constant(2, 2, 1.0).unwrap()).is_err());
    }

    #[test]
    fn matrix_examples() {
        let s = FiniteProductSpace::uniform(2, 2).unwrap();
        let m = cond_exp_matrix(&s, &SigmaAlgebra::trivial((2, 2)).unwrap()).unwrap();
        assert!((0..4).all(|r| m.row(r).iter().all(|&x| x == 0.25)));

        let m = cond_exp_matrix(&s, &SigmaAlgebra::full((2, 2)).unwrap()).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(m.entry(r, c), if r == c { 1.0 } else { 0.0 });
            }
        }

        // atoms {0,2}, {1}, {3}
        let m = cond_exp_matrix(&s, &qiu_sigma()).unwrap();
        let expected = [
            [0.5, 0.0, 0.5, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.5, 0.0, 0.5, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        for (r, row) in expected.iter().enumerate() {
            assert_eq!(m.row(r), row);
        }

        let f = GridFunction::new(2, 2, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        assert_eq!(
            m.apply(&f).unwrap(),
            cond_exp(&s, &qiu_sigma(), &f).unwrap()
        );
    }

    #[test]
    fn matrix_size_cap() {
        let s = FiniteProductSpace::uniform(65, 64).unwrap();
        let sigma = SigmaAlgebra::trivial((65, 64)).unwrap();
        assert!(cond_exp_matrix(&s, &sigma).unwrap_err().is_size_cap());
    }

    #[test]
    fn lyz_fails_on_qiu_with_classical_witness() {
        let s = FiniteProductSpace::uniform(2, 2).unwrap();
        let report = lyz_check(&s, &qiu_sigma()).unwrap();
        assert!(!report.holds);
        assert_eq!(report.witness.unwrap(), grid(1.0, 1.0, 0.0, 1.0));
        assert_eq!(report.image.unwrap(), grid(0.5, 1.0, 0.5, 1.0));
    }

    #[test]
    fn lyz_holds_on_trivial_full_and_progressive() {
        let s = FiniteProductSpace::uniform(3, 2).unwrap();
        assert!(
            lyz_check(&s, &SigmaAlgebra::trivial((3, 2)).unwrap())
                .unwrap()
                .holds
        );
        assert!(
            lyz_check(&s, &SigmaAlgebra::full((3, 2)).unwrap())
                .unwrap()
                .holds
        );
        for t in 1..=3 {
            let (s, p) = SigmaAlgebra::progressive(t, 4096).unwrap();
            assert!(lyz_check(&s, &p).unwrap().holds, "T = {t}");
        }
    }

    #[test]
    fn lyz_by_hand_at_horizon_one() {
        // atoms are the two coin singletons; any function averages to a constant
        let (s, p) = SigmaAlgebra::progressive(1, 4096).unwrap();
        let f = GridFunction::scalar(1, 2, vec![2.0, -1.0]).unwrap();
        let image = average_out_b(&s, &f).unwrap();
        assert_eq!(image.values(), &[0.5, 0.5]);
        assert!(is_measurable(&s, &p, &image, MEASURABILITY_TOL).unwrap());
    }
}
