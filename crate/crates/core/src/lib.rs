//! A laboratory for conditional expectation operators on mixed-norm spaces
//! `L^p(μ; L^q(ν; ℓ^r_d))` over finite product probability spaces.
//!
//! * [`space`]: product spaces and grid functions
//! * [`sigma`]: sub-σ-algebras as partitions of the grid
//! * [`condexp`]: the conditional expectation and the measurability check
//!   for averaging out the second factor
//! * [`mixed_norm`]: mixed norms, dual exponents, the weighted pairing
//! * [`opnorm`]: certified lower bounds on operator norms
//! * [`lab`]: experiment runners and the CLI configuration
//!
//! The data-parallel loops run on rayon when the `parallel` feature is on
//! (the default); see [`exec::Execution`].

pub mod condexp;
pub mod error;
pub mod exact;
pub mod exec;
pub mod lab;
pub mod mixed_norm;
pub mod opnorm;
pub mod sigma;
pub mod space;

pub use condexp::{cond_exp, cond_exp_matrix, lyz_check, CondExpMatrix, LyzReport};
pub use error::{LabError, Result};
pub use exec::Execution;
pub use mixed_norm::{dual_exponents, mixed_norm, pair, MixedExponents};
pub use opnorm::{
    duality_gap, opnorm_ascent, opnorm_oracle, symmetrization_growth, tensor_norm_experiment,
    AscentOptions, Method, NormEstimate,
};
pub use sigma::SigmaAlgebra;
pub use space::{FiniteProductSpace, GridFunction};
