//! Operator-norm estimates for `E(·|F)` acting on `L^p(μ; L^q(ν))`.
//!
//! For `p != q` the norm is the maximum of a nonconvex ratio, so every
//! estimate here is a certified lower bound: the ratio `||Ef|| / ||f||` of an
//! explicit witness `f`. Two independent searches are provided. The oracle
//! scans a grid in hyperspherical coordinates and polishes the best grid
//! points with a compass search; it only handles tiny grids. The ascent runs
//! projected gradient ascent from random nonnegative starts.
//!
//! Both restrict to nonnegative functions. Since `|Ef| <= E|f|` pointwise and
//! the mixed norm is monotone, `ratio(|f|) >= ratio(f)`, so nothing is lost.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::condexp::cond_exp;
use crate::error::{LabError, Result};
use crate::exec::Execution;
use crate::mixed_norm::{mixed_norm, scalar_mixed_norm, MixedExponents};
use crate::sigma::SigmaAlgebra;
use crate::space::{FiniteProductSpace, GridFunction};

/// Largest grid the oracle accepts.
pub const ORACLE_MAX_CELLS: usize = 6;
/// Cap on the cell count of tensor powers.
pub const TENSOR_CELL_CAP: usize = 4096;
/// Cap on the grid of the symmetrization experiment.
pub const SYMMETRIZATION_CELL_CAP: usize = 1 << 20;
/// Reproduction tolerance recorded in every estimate.
pub const ESTIMATE_TOL: f64 = 1e-9;
/// Added to each inner power sum when differentiating.
pub const SMOOTHING: f64 = 1e-9;
pub const DEFAULT_RESTARTS: usize = 64;

const ORACLE_GRID_BUDGET: usize = 1 << 16;
const ORACLE_MAX_STEPS_PER_ANGLE: usize = 181;
const ORACLE_POLISHED: usize = 48;
const ORACLE_MIN_STEP: f64 = 1e-10;
const ORACLE_MAX_POLISH_EVALS: usize = 200_000;
const STALL_WINDOW: usize = 20;
const STALL_GAIN: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Oracle,
    Ascent,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Oracle => "oracle",
            Method::Ascent => "ascent",
        })
    }
}

impl FromStr for Method {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(Method::Oracle),
            "ascent" => Ok(Method::Ascent),
            other => Err(LabError::Invalid(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormEstimate {
    /// Best ratio `||Ef|| / ||f||` found.
    pub value: f64,
    pub witness: GridFunction,
    pub method: Method,
    pub restarts_used: usize,
    pub converged: bool,
    pub tolerance: f64,
}

#[derive(Clone, Debug)]
pub struct AscentOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub execution: Execution,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            max_iters: 20_000,
            execution: Execution::default(),
        }
    }
}

impl AscentOptions {
    pub fn new(restarts: usize, seed: u64) -> Self {
        AscentOptions {
            restarts,
            seed,
            ..Default::default()
        }
    }
}

/// `||E(f|F)|| / ||f||` for any nonzero function.
pub fn ratio(
    space: &FiniteProductSpace,
    sigma: &SigmaAlgebra,
    f: &GridFunction,
    e: &MixedExponents,
) -> Result<f64> {
    let denom = mixed_norm(space, f, e)?;
    if denom == 0.0 {
        return Err(LabError::Invalid(
            "ratio of a function with zero norm".into(),
        ));
    }
    Ok(mixed_norm(space, &cond_exp(space, sigma, f)?, e)? / denom)
}

/// The ratio objective for scalar functions, in a form cheap to evaluate
/// repeatedly. Vectors are row-major over the whole grid.
struct RatioProblem<'a> {
    a_weights: &'a [f64],
    b_weights: &'a [f64],
    weights: Vec<f64>,
    atom_of: &'a [usize],
    atom_mass: Vec<f64>,
    /// Cells of positive weight; all others stay at zero.
    live: Vec<usize>,
    p: f64,
    q: f64,
}

#[derive(Default)]
struct Scratch {
    ef: Vec<f64>,
    rows: Vec<f64>,
    atom_acc: Vec<f64>,
    h_x: Vec<f64>,
    h_ef: Vec<f64>,
}

impl<'a> RatioProblem<'a> {
    fn new(
        space: &'a FiniteProductSpace,
        sigma: &'a SigmaAlgebra,
        e: &MixedExponents,
        who: &'static str,
    ) -> Result<Self> {
        sigma.check_space(space)?;
        if !e.is_finite() {
            return Err(LabError::InfiniteExponent(who));
        }
        let weights = space.cell_weights();
        let mut atom_mass = vec![0.0; sigma.num_atoms()];
        for (c, &k) in sigma.atom_of().iter().enumerate() {
            atom_mass[k] += weights[c];
        }
        let live = (0..weights.len()).filter(|&c| weights[c] > 0.0).collect();
        Ok(RatioProblem {
            a_weights: space.a_weights(),
            b_weights: space.b_weights(),
            weights,
            atom_of: sigma.atom_of(),
            atom_mass,
            live,
            p: e.p,
            q: e.q,
        })
    }

    fn cells(&self) -> usize {
        self.weights.len()
    }

    fn scratch(&self) -> Scratch {
        let n = self.cells();
        Scratch {
            ef: vec![0.0; n],
            rows: Vec::with_capacity(self.a_weights.len()),
            atom_acc: vec![0.0; self.atom_mass.len()],
            h_x: vec![0.0; n],
            h_ef: vec![0.0; n],
        }
    }

    fn cond_exp(&self, x: &[f64], out: &mut [f64], acc: &mut [f64]) {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for &c in &self.live {
            acc[self.atom_of[c]] += self.weights[c] * x[c];
        }
        for (c, o) in out.iter_mut().enumerate() {
            let k = self.atom_of[c];
            *o = if self.atom_mass[k] > 0.0 {
                acc[k] / self.atom_mass[k]
            } else {
                0.0
            };
        }
    }

    fn norm(&self, x: &[f64], rows: &mut Vec<f64>) -> f64 {
        scalar_mixed_norm(self.a_weights, self.b_weights, x, self.p, self.q, rows)
    }

    /// Unsmoothed ratio; zero for the zero function.
    fn ratio(&self, x: &[f64], s: &mut Scratch) -> f64 {
        let denom = self.norm(x, &mut s.rows);
        if denom == 0.0 {
            return 0.0;
        }
        self.cond_exp(x, &mut s.ef, &mut s.atom_acc);
        self.norm(&s.ef, &mut s.rows) / denom
    }

    /// Smoothed norm of a nonnegative `y` and its gradient divided by the
    /// cell weights: `h(c) = N (I_i / N)^p y_c^(q-1) / S_i` with
    /// `S_i = Σ_j ν_j y_ij^q + ε` and `I_i = S_i^(1/q)`.
    fn weighted_norm_gradient(&self, y: &[f64], h: &mut [f64], rows: &mut Vec<f64>) -> f64 {
        let n = self.b_weights.len();
        rows.clear();
        for row in y.chunks(n) {
            let s: f64 = row
                .iter()
                .zip(self.b_weights)
                .map(|(v, w)| w * v.powf(self.q))
                .sum();
            rows.push(s + SMOOTHING);
        }
        let inner: Vec<f64> = rows.iter().map(|s| s.powf(1.0 / self.q)).collect();
        let top = inner.iter().fold(0.0f64, |m, v| m.max(*v));
        let total: f64 = inner
            .iter()
            .zip(self.a_weights)
            .map(|(v, w)| w * (v / top).powf(self.p))
            .sum();
        let norm = top * total.powf(1.0 / self.p);
        for (i, row) in y.chunks(n).enumerate() {
            let lead = norm * (inner[i] / norm).powf(self.p) / rows[i];
            for (j, v) in row.iter().enumerate() {
                h[i * n + j] = lead * v.powf(self.q - 1.0);
            }
        }
        norm
    }

    /// Gradient of the smoothed ratio in the weighted `L^2` geometry:
    /// `(E h(Ex) - R h(x)) / N(x)`, using that `E` is self-adjoint there.
    fn ascent_direction(&self, x: &[f64], grad: &mut [f64], s: &mut Scratch) {
        self.cond_exp(x, &mut s.ef, &mut s.atom_acc);
        let nx = self.weighted_norm_gradient(x, &mut s.h_x, &mut s.rows);
        let ny = self.weighted_norm_gradient(&s.ef, &mut s.h_ef, &mut s.rows);
        let r = ny / nx;
        let h_ef = std::mem::take(&mut s.h_ef);
        self.cond_exp(&h_ef, grad, &mut s.atom_acc);
        s.h_ef = h_ef;
        for (c, g) in grad.iter_mut().enumerate() {
            *g = if self.weights[c] > 0.0 {
                (*g - r * s.h_x[c]) / nx
            } else {
                0.0
            };
        }
    }

    fn normalize(&self, x: &mut [f64], rows: &mut Vec<f64>) -> bool {
        let n = self.norm(x, rows);
        if n == 0.0 || !n.is_finite() {
            return false;
        }
        x.iter_mut().for_each(|v| *v /= n);
        true
    }

    fn witness(&self, space: &FiniteProductSpace, x: Vec<f64>) -> Result<GridFunction> {
        GridFunction::scalar(space.rows(), space.cols(), x)
    }

    /// The constant function, a witness for the lower bound 1.
    fn constant(&self) -> Vec<f64> {
        (0..self.cells())
            .map(|c| if self.weights[c] > 0.0 { 1.0 } else { 0.0 })
            .collect()
    }
}

fn check_scalar_space(space: &FiniteProductSpace) -> Result<()> {
    if space.num_cells() == 0 {
        return Err(LabError::EmptyFactor {
            rows: space.rows(),
            cols: space.cols(),
        });
    }
    Ok(())
}

struct Candidate {
    value: f64,
    x: Vec<f64>,
    converged: bool,
}

/// Picks the largest value; ties go to the earliest candidate.
fn best(candidates: Vec<Candidate>) -> Candidate {
    candidates
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one candidate")
}

// ---------------------------------------------------------------------------
// Oracle

/// Point on the unit sphere's nonnegative orthant from `k - 1` angles in
/// `[0, π/2]`.
fn sphere_point(angles: &[f64], out: &mut [f64]) {
    let mut sin_prod = 1.0;
    for (slot, theta) in out.iter_mut().zip(angles) {
        *slot = sin_prod * theta.cos();
        sin_prod *= theta.sin();
    }
    out[angles.len()] = sin_prod;
}

struct OracleSearch<'p, 'a> {
    problem: &'p RatioProblem<'a>,
}

impl OracleSearch<'_, '_> {
    fn dims(&self) -> usize {
        self.problem.live.len() - 1
    }

    fn eval(&self, angles: &[f64], point: &mut [f64], x: &mut [f64], s: &mut Scratch) -> f64 {
        sphere_point(angles, point);
        for (&c, v) in self.problem.live.iter().zip(point.iter()) {
            x[c] = *v;
        }
        self.problem.ratio(x, s)
    }

    fn steps_per_angle(&self) -> usize {
        let dims = self.dims() as u32;
        let mut steps = 2usize;
        while steps < ORACLE_MAX_STEPS_PER_ANGLE && (steps + 1).pow(dims) <= ORACLE_GRID_BUDGET {
            steps += 1;
        }
        steps
    }

    fn grid_angles(&self, index: usize, steps: usize, angles: &mut [f64]) {
        let spacing = FRAC_PI_2 / (steps - 1) as f64;
        let mut rest = index;
        for a in angles.iter_mut() {
            *a = (rest % steps) as f64 * spacing;
            rest /= steps;
        }
    }

    /// Compass search in angle space. The step doubles after a successful
    /// sweep and halves after a failed one, down to `ORACLE_MIN_STEP`.
    fn polish(&self, mut angles: Vec<f64>, start_step: f64) -> (f64, Vec<f64>) {
        let p = self.problem;
        let mut s = p.scratch();
        let mut point = vec![0.0; p.live.len()];
        let mut x = vec![0.0; p.cells()];
        let mut value = self.eval(&angles, &mut point, &mut x, &mut s);
        let mut step = start_step;
        let mut trial = angles.clone();
        let mut evals = 0usize;
        while step >= ORACLE_MIN_STEP && evals < ORACLE_MAX_POLISH_EVALS {
            evals += 2 * angles.len();
            let mut moved = false;
            for d in 0..angles.len() {
                for sign in [1.0, -1.0] {
                    trial.copy_from_slice(&angles);
                    trial[d] = (angles[d] + sign * step).clamp(0.0, FRAC_PI_2);
                    let v = self.eval(&trial, &mut point, &mut x, &mut s);
                    if v > value {
                        value = v;
                        angles.copy_from_slice(&trial);
                        moved = true;
                    }
                }
            }
            if moved {
                step = (2.0 * step).min(start_step);
            } else {
                step /= 2.0;
            }
        }
        sphere_point(&angles, &mut point);
        let mut x = vec![0.0; p.cells()];
        for (&c, v) in p.live.iter().zip(&point) {
            x[c] = *v;
        }
        (value, x)
    }

    fn run(&self, execution: Execution) -> Vec<Candidate> {
        let dims = self.dims();
        let steps = self.steps_per_angle();
        let total = steps.pow(dims as u32);
        let chunk = 4096;
        let chunks = total.div_ceil(chunk);
        let scanned: Vec<Vec<(f64, usize)>> = execution.map_range(chunks, |k| {
            let mut s = self.problem.scratch();
            let mut angles = vec![0.0; dims];
            let mut point = vec![0.0; dims + 1];
            let mut x = vec![0.0; self.problem.cells()];
            let mut local: Vec<(f64, usize)> = (k * chunk..((k + 1) * chunk).min(total))
                .map(|i| {
                    self.grid_angles(i, steps, &mut angles);
                    (self.eval(&angles, &mut point, &mut x, &mut s), i)
                })
                .collect();
            local.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            local.truncate(ORACLE_POLISHED);
            local
        });
        let mut top: Vec<(f64, usize)> = scanned.into_iter().flatten().collect();
        top.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        top.truncate(ORACLE_POLISHED);

        let spacing = FRAC_PI_2 / (steps - 1) as f64;
        execution.map_range(top.len(), |k| {
            let mut angles = vec![0.0; dims];
            self.grid_angles(top[k].1, steps, &mut angles);
            let (value, x) = self.polish(angles, spacing);
            Candidate {
                value,
                x,
                converged: true,
            }
        })
    }
}

/// Ground-truth estimate for grids of at most [`ORACLE_MAX_CELLS`] cells.
pub fn opnorm_oracle(
    space: &FiniteProductSpace,
    sigma: &SigmaAlgebra,
    e: &MixedExponents,
) -> Result<NormEstimate> {
    opnorm_oracle_with(space, sigma, e, Execution::default())
}

pub fn opnorm_oracle_with(
    space: &FiniteProductSpace,
    sigma: &SigmaAlgebra,
    e: &MixedExponents,
    execution: Execution,
) -> Result<NormEstimate> {
    check_scalar_space(space)?;
    if space.num_cells() > ORACLE_MAX_CELLS {
        return Err(LabError::SizeCap {
            what: "operator-norm oracle",
            size: space.num_cells(),
            cap: ORACLE_MAX_CELLS,
        });
    }
    let problem = RatioProblem::new(space, sigma, e, "the operator-norm oracle")?;
    let mut s = problem.scratch();
    let constant = problem.constant();
    let mut candidates = vec![Candidate {
        value: problem.ratio(&constant, &mut s),
        x: constant,
        converged: true,
    }];
    if problem.live.len() > 1 {
        candidates.extend(OracleSearch { problem: &problem }.run(execution));
    }
    let winner = best(candidates);
    Ok(NormEstimate {
        value: winner.value,
        witness: problem.witness(space, winner.x)?,
        method: Method::Oracle,
        restarts_used: 0,
        converged: true,
        tolerance: ESTIMATE_TOL,
    })
}

// ---------------------------------------------------------------------------
// Projected gradient ascent

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn ascend(problem: &RatioProblem<'_>, mut x: Vec<f64>, max_iters: usize) -> Candidate {
    let mut s = problem.scratch();
    let mut grad = vec![0.0; problem.cells()];
    let mut trial = vec![0.0; problem.cells()];
    if !problem.normalize(&mut x, &mut s.rows) {
        return Candidate {
            value: 0.0,
            x,
            converged: false,
        };
    }
    let mut value = problem.ratio(&x, &mut s);
    let mut history = vec![value];
    let mut converged = false;
    for _ in 0..max_iters {
        problem.ascent_direction(&x, &mut grad, &mut s);
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-14 {
            for (c, t) in trial.iter_mut().enumerate() {
                *t = (x[c] + step * grad[c]).max(0.0);
            }
            if problem.normalize(&mut trial, &mut s.rows) {
                let v = problem.ratio(&trial, &mut s);
                if v > value {
                    value = v;
                    std::mem::swap(&mut x, &mut trial);
                    accepted = true;
                    break;
                }
            }
            step /= 2.0;
        }
        if !accepted {
            converged = true;
            break;
        }
        history.push(value);
        if history.len() > STALL_WINDOW {
            let old = history[history.len() - 1 - STALL_WINDOW];
            if (value - old) / value < STALL_GAIN {
                converged = true;
                break;
            }
        }
    }
    Candidate {
        value,
        x,
        converged,
    }
}

/// Projected gradient ascent with `restarts` random nonnegative starts.
pub fn opnorm_ascent(
    space: &FiniteProductSpace,
    sigma: &SigmaAlgebra,
    e: &MixedExponents,
    restarts: usize,
    seed: u64,
) -> Result<NormEstimate> {
    opnorm_ascent_with(space, sigma, e, &AscentOptions::new(restarts, seed))
}

pub fn opnorm_ascent_with(
    space: &FiniteProductSpace,
    sigma: &SigmaAlgebra,
    e: &MixedExponents,
    opts: &AscentOptions,
) -> Result<NormEstimate> {
    opnorm_ascent_seeded(space, sigma, e, opts, &[])
}

/// Like [`opnorm_ascent_with`], additionally scoring the given witnesses
/// (e.g. a pure tensor of a known witness) as candidates.
pub fn opnorm_ascent_seeded(
    space: &FiniteProductSpace,
    sigma: &SigmaAlgebra,
    e: &MixedExponents,
    opts: &AscentOptions,
    extra: &[GridFunction],
) -> Result<NormEstimate> {
    check_scalar_space(space)?;
    if opts.restarts == 0 {
        return Err(LabError::ZeroRestarts);
    }
    let problem = RatioProblem::new(space, sigma, e, "the ascent estimator")?;
    let mut s = problem.scratch();

    let constant = problem.constant();
    let mut candidates = vec![Candidate {
        value: problem.ratio(&constant, &mut s),
        x: constant,
        converged: true,
    }];
    for f in extra {
        space.check_function(f)?;
        if f.dim() != 1 {
            return Err(LabError::VectorValued("the ascent estimator"));
        }
        let x: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
        candidates.push(Candidate {
            value: problem.ratio(&x, &mut s),
            x,
            converged: true,
        });
    }
    candidates.extend(opts.execution.map_range(opts.restarts, |k| {
        let mut rng = restart_rng(opts.seed, k);
        let start: Vec<f64> = problem
            .weights
            .iter()
            .map(|&w| {
                if w > 0.0 {
                    1.0 - rng.random::<f64>()
                } else {
                    0.0
                }
            })
            .collect();
        ascend(&problem, start, opts.max_iters)
    }));

    let winner = best(candidates);
    Ok(NormEstimate {
        value: winner.value,
        witness: problem.witness(space, winner.x)?,
        method: Method::Ascent,
        restarts_used: opts.restarts,
        converged: winner.converged,
        tolerance: ESTIMATE_TOL,
    })
}

/// The larger of the oracle and ascent estimates on grids the oracle
/// accepts, the ascent estimate otherwise.
pub fn best_estimate(
    space: &FiniteProductSpace,
    sigma: &SigmaAlgebra,
    e: &MixedExponents,
    opts: &AscentOptions,
) -> Result<NormEstimate> {
    let ascent = opnorm_ascent_with(space, sigma, e, opts)?;
    if space.num_cells() > ORACLE_MAX_CELLS {
        return Ok(ascent);
    }
    let oracle = opnorm_oracle_with(space, sigma, e, opts.execution)?;
    Ok(if oracle.value > ascent.value {
        oracle
    } else {
        ascent
    })
}

#[derive(Clone, Debug)]
pub struct DualityGap {
    pub primal: NormEstimate,
    pub dual: NormEstimate,
    pub gap: f64,
}

impl DualityGap {
    pub fn relative(&self) -> f64 {
        self.gap / self.primal.value.max(self.dual.value)
    }
}

/// Compares the estimated norms at `(p, q)` and at the dual exponents.
pub fn duality_gap(
    space: &FiniteProductSpace,
    sigma: &SigmaAlgebra,
    e: &MixedExponents,
    opts: &AscentOptions,
) -> Result<DualityGap> {
    let primal = best_estimate(space, sigma, e, opts)?;
    let dual = best_estimate(space, sigma, &e.dual(), opts)?;
    let gap = (primal.value - dual.value).abs();
    Ok(DualityGap { primal, dual, gap })
}

// ---------------------------------------------------------------------------
// Tensor powers

#[derive(Clone, Debug)]
pub struct TensorRow {
    pub k: usize,
    pub estimate: NormEstimate,
    /// `estimate(k = 1)^k`.
    pub pure_tensor_bound: f64,
    /// The ratio of the `k`-fold tensor power of the one-fold witness.
    pub pure_tensor_ratio: f64,
}

/// Estimates the norm of `E(·|F^{⊗k})` on the `k`-fold tensor power of the
/// space for `k = 1..=max_k`.
pub fn tensor_norm_experiment(
    space: &FiniteProductSpace,
    sigma: &SigmaAlgebra,
    e: &MixedExponents,
    max_k: usize,
    opts: &AscentOptions,
) -> Result<Vec<TensorRow>> {
    if max_k == 0 {
        return Err(LabError::Invalid("tensor power must be at least 1".into()));
    }
    let base = space.num_cells();
    let mut size = 1usize;
    for _ in 0..max_k {
        size = size.saturating_mul(base);
        if size > TENSOR_CELL_CAP {
            return Err(LabError::SizeCap {
                what: "tensor power",
                size,
                cap: TENSOR_CELL_CAP,
            });
        }
    }
    let first = best_estimate(space, sigma, e, opts)?;
    let base_value = first.value;
    let mut rows = vec![TensorRow {
        k: 1,
        pure_tensor_bound: base_value,
        pure_tensor_ratio: base_value,
        estimate: first.clone(),
    }];
    let (mut sp, mut sg, mut witness) = (space.clone(), sigma.clone(), first.witness.clone());
    for k in 2..=max_k {
        sp = sp.tensor(space);
        sg = sg.tensor(sigma);
        witness = witness.tensor(&first.witness)?;
        let pure_tensor_ratio = ratio(&sp, &sg, &witness, e)?;
        let estimate = opnorm_ascent_seeded(&sp, &sg, e, opts, std::slice::from_ref(&witness))?;
        rows.push(TensorRow {
            k,
            estimate,
            pure_tensor_bound: base_value.powi(k as i32),
            pure_tensor_ratio,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Symmetrization

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthRow {
    pub n: usize,
    /// `½ ||ψ ⊗ φ|| / ||φ ⊗ ψ||`, which bounds the ratio from below because
    /// `E(f|F) >= ½ f̃` for `f >= 0`.
    pub lower_bound: f64,
    /// `||E(φ ⊗ ψ|F)|| / ||φ ⊗ ψ||`, computed directly.
    pub exact_ratio: f64,
}

/// Cell averages of `x^(-alpha)` over `n` equal cells of `[0, 1)`.
pub fn power_profile(n: usize, alpha: f64) -> Vec<f64> {
    let beta = 1.0 - alpha;
    let scale = (n as f64).powf(alpha) / beta;
    (0..n)
        .map(|j| scale * (((j + 1) as f64).powf(beta) - (j as f64).powf(beta)))
        .collect()
}

/// Lower bounds for the norm of the symmetrization `f ↦ ½(f + f̃)` on
/// `L^p(L^q)` over the uniform `n x n` grid, tested on `φ ⊗ ψ` with `φ = 1`
/// and `ψ` the discretized `x^(-alpha)`.
///
/// For `p > q` the exponent must satisfy `1/p < alpha < 1/q`. `p = q` is
/// accepted for comparison with `0 < alpha < 1/q`.
pub fn symmetrization_growth(
    p: f64,
    q: f64,
    alpha: f64,
    n_list: &[usize],
) -> Result<Vec<GrowthRow>> {
    let e = MixedExponents::scalar(p, q)?;
    if !e.is_finite() {
        return Err(LabError::InfiniteExponent("the symmetrization experiment"));
    }
    if p < q {
        return Err(LabError::Invalid(format!(
            "symmetrization growth needs p >= q, got p = {p}, q = {q}"
        )));
    }
    let (lo, hi) = if p > q {
        (1.0 / p, 1.0 / q)
    } else {
        (0.0, 1.0 / q)
    };
    if !(alpha > lo && alpha < hi) {
        return Err(LabError::AlphaOutOfRange { alpha, lo, hi });
    }
    n_list
        .iter()
        .map(|&n| {
            if n == 0 {
                return Err(LabError::EmptyFactor { rows: 0, cols: 0 });
            }
            if n.saturating_mul(n) > SYMMETRIZATION_CELL_CAP {
                return Err(LabError::SizeCap {
                    what: "symmetrization grid",
                    size: n.saturating_mul(n),
                    cap: SYMMETRIZATION_CELL_CAP,
                });
            }
            let space = FiniteProductSpace::uniform(n, n)?;
            let sigma = SigmaAlgebra::symmetric(n)?;
            let psi = power_profile(n, alpha);
            let f = GridFunction::from_fn(n, n, |_, j| psi[j])?;
            let flipped = f.transpose()?;
            let norm_f = mixed_norm(&space, &f, &e)?;
            let lower_bound = 0.5 * mixed_norm(&space, &flipped, &e)? / norm_f;
            let exact_ratio = mixed_norm(&space, &cond_exp(&space, &sigma, &f)?, &e)? / norm_f;
            Ok(GrowthRow {
                n,
                lower_bound,
                exact_ratio,
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let len = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / len;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}
