#![allow(dead_code)]

use condexp_lab::{FiniteProductSpace, GridFunction, SigmaAlgebra};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn probabilities(rng: &mut ChaCha8Rng, len: usize, allow_zero: bool) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..1.0)).collect();
    if allow_zero && len > 1 && rng.random_bool(0.2) {
        let k = rng.random_range(0..len);
        v[k] = 0.0;
    }
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

pub fn random_space(
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
    allow_zero: bool,
) -> FiniteProductSpace {
    let a = probabilities(rng, m, allow_zero);
    let b = probabilities(rng, n, allow_zero);
    FiniteProductSpace::new(a, b).unwrap()
}

pub fn random_labels(rng: &mut ChaCha8Rng, cells: usize) -> Vec<usize> {
    let k = rng.random_range(1..=cells);
    (0..cells).map(|_| rng.random_range(0..k)).collect()
}

pub fn random_sigma(rng: &mut ChaCha8Rng, shape: (usize, usize)) -> SigmaAlgebra {
    SigmaAlgebra::from_labels(shape, &random_labels(rng, shape.0 * shape.1)).unwrap()
}

/// A σ-algebra coarser than `fine`, obtained by merging its atoms at random.
pub fn random_coarsening(rng: &mut ChaCha8Rng, fine: &SigmaAlgebra) -> SigmaAlgebra {
    let merged = random_labels(rng, fine.num_atoms());
    let labels: Vec<usize> = fine.atom_of().iter().map(|&k| merged[k]).collect();
    SigmaAlgebra::from_labels(fine.shape(), &labels).unwrap()
}

pub fn random_function(rng: &mut ChaCha8Rng, m: usize, n: usize, dim: usize) -> GridFunction {
    let values = (0..m * n * dim)
        .map(|_| rng.random_range(-2.0..2.0))
        .collect();
    GridFunction::new(m, n, dim, values).unwrap()
}

pub fn random_nonnegative(rng: &mut ChaCha8Rng, m: usize, n: usize, dim: usize) -> GridFunction {
    let values = (0..m * n * dim)
        .map(|_| rng.random_range(0.0..2.0))
        .collect();
    GridFunction::new(m, n, dim, values).unwrap()
}

/// Grid shapes with 2 to 6 cells.
pub fn tiny_shapes() -> Vec<(usize, usize)> {
    (1..=6)
        .flat_map(|m| (1..=6).map(move |n| (m, n)))
        .filter(|(m, n)| (2..=6).contains(&(m * n)))
        .collect()
}

/// Conditional expectation by explicit enumeration: for every cell, scan
/// the atom lists for the one containing it and average over it.
pub fn brute_force_cond_exp(
    space: &FiniteProductSpace,
    sigma: &SigmaAlgebra,
    f: &GridFunction,
) -> Vec<f64> {
    let (m, n) = space.shape();
    let d = f.dim();
    let mut out = vec![0.0; m * n * d];
    for i in 0..m {
        for j in 0..n {
            let cell = i * n + j;
            let atom = sigma.atoms().iter().find(|a| a.contains(&cell)).unwrap();
            let mut mass = 0.0;
            let mut sum = vec![0.0; d];
            for &c in atom {
                let w = space.a_weights()[c / n] * space.b_weights()[c % n];
                mass += w;
                for (acc, v) in sum.iter_mut().zip(f.cell(c)) {
                    *acc += w * v;
                }
            }
            for k in 0..d {
                out[cell * d + k] = if mass > 0.0 { sum[k] / mass } else { 0.0 };
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Largest difference over cells of positive weight.
pub fn max_abs_diff_ae(space: &FiniteProductSpace, a: &GridFunction, b: &GridFunction) -> f64 {
    let w = space.cell_weights();
    (0..w.len())
        .filter(|&c| w[c] > 0.0)
        .map(|c| max_abs_diff(a.cell(c), b.cell(c)))
        .fold(0.0, f64::max)
}
