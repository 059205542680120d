//! Exact rational arithmetic for golden-value checks of scalar functions.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::condexp::average_on_atoms;
use crate::error::{LabError, Result};
use crate::sigma::SigmaAlgebra;

pub type Rational = BigRational;

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(numer.into(), denom.into())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactSpace {
    a_weights: Vec<Rational>,
    b_weights: Vec<Rational>,
}

fn check_factor(side: &'static str, w: &[Rational]) -> Result<()> {
    let sum = w.iter().fold(Rational::zero(), |acc, x| acc + x);
    if w.is_empty() || w.iter().any(Signed::is_negative) || !sum.is_one() {
        return Err(LabError::BadWeights {
            side,
            sum: crate::exact::to_f64(&sum),
        });
    }
    Ok(())
}

impl ExactSpace {
    pub fn new(a_weights: Vec<Rational>, b_weights: Vec<Rational>) -> Result<Self> {
        check_factor("A", &a_weights)?;
        check_factor("B", &b_weights)?;
        Ok(ExactSpace {
            a_weights,
            b_weights,
        })
    }

    pub fn uniform(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(LabError::EmptyFactor { rows: m, cols: n });
        }
        Self::new(vec![ratio(1, m as i64); m], vec![ratio(1, n as i64); n])
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.a_weights.len(), self.b_weights.len())
    }

    pub fn cell_weights(&self) -> Vec<Rational> {
        self.a_weights
            .iter()
            .flat_map(|a| self.b_weights.iter().map(move |b| a * b))
            .collect()
    }

    fn check(&self, len: usize) -> Result<()> {
        let (m, n) = self.shape();
        if len != m * n {
            return Err(LabError::Invalid(format!(
                "expected {} values, got {len}",
                m * n
            )));
        }
        Ok(())
    }

    pub fn integrate(&self, values: &[Rational]) -> Result<Rational> {
        self.check(values.len())?;
        Ok(self
            .cell_weights()
            .iter()
            .zip(values)
            .fold(Rational::zero(), |acc, (w, v)| acc + w * v))
    }

    /// Weighted pairing `Σ w(c) f(c) g(c)`.
    pub fn pair(&self, f: &[Rational], g: &[Rational]) -> Result<Rational> {
        self.check(f.len())?;
        self.check(g.len())?;
        Ok(self
            .cell_weights()
            .iter()
            .zip(f.iter().zip(g))
            .fold(Rational::zero(), |acc, (w, (x, y))| acc + w * x * y))
    }

    /// `E(f|F)` for a scalar function given by its row-major values.
    pub fn cond_exp(&self, sigma: &SigmaAlgebra, values: &[Rational]) -> Result<Vec<Rational>> {
        if sigma.shape() != self.shape() {
            return Err(LabError::ShapeMismatch {
                expected: self.shape(),
                got: sigma.shape(),
            });
        }
        self.check(values.len())?;
        Ok(average_on_atoms(&self.cell_weights(), sigma, values, 1))
    }

    /// `||f||^2` in `L^2(μ; L^2(ν))`, exact.
    pub fn l2_norm_squared(&self, values: &[Rational]) -> Result<Rational> {
        self.pair(values, values)
    }
}

pub fn to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}
