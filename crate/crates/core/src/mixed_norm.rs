//! Mixed norms `||f||` in `L^p(μ; L^q(ν; ℓ^r_d))`, dual exponents and the
//! weighted pairing.
//!
//! All power sums are evaluated after scaling by the largest term, so large
//! exponents neither underflow nor overflow. Infinite exponents take the
//! supremum over positive-weight atoms only.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::space::{FiniteProductSpace, GridFunction};

/// Outer (`p`), inner (`q`) and target-space (`r`) exponents, each in
/// `[1, ∞]`. Infinity is `f64::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExponentsDoc", into = "ExponentsDoc")]
pub struct MixedExponents {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

fn check_exponent(e: f64) -> Result<f64> {
    if e.is_nan() || e < 1.0 {
        return Err(LabError::InvalidExponent(e));
    }
    Ok(e)
}

impl MixedExponents {
    pub fn new(p: f64, q: f64, r: f64) -> Result<Self> {
        Ok(MixedExponents {
            p: check_exponent(p)?,
            q: check_exponent(q)?,
            r: check_exponent(r)?,
        })
    }

    /// Scalar-valued exponents; `r` is irrelevant for `d = 1` and set to 2.
    pub fn scalar(p: f64, q: f64) -> Result<Self> {
        Self::new(p, q, 2.0)
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.q.is_finite()
    }

    pub fn dual(&self) -> MixedExponents {
        MixedExponents {
            p: conjugate(self.p),
            q: conjugate(self.q),
            r: conjugate(self.r),
        }
    }
}

/// The conjugate exponent `e'` with `1/e + 1/e' = 1`.
pub fn conjugate(e: f64) -> f64 {
    if e == 1.0 {
        f64::INFINITY
    } else if e.is_infinite() {
        1.0
    } else {
        e / (e - 1.0)
    }
}

pub fn dual_exponents(e: &MixedExponents) -> MixedExponents {
    e.dual()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ExponentDoc {
    Number(f64),
    Text(String),
}

impl ExponentDoc {
    fn value(&self) -> Result<f64> {
        match self {
            ExponentDoc::Number(x) => Ok(*x),
            ExponentDoc::Text(s) => parse_exponent(s),
        }
    }

    fn from_value(x: f64) -> Self {
        if x.is_infinite() {
            ExponentDoc::Text("inf".into())
        } else {
            ExponentDoc::Number(x)
        }
    }
}

fn default_r() -> ExponentDoc {
    ExponentDoc::Number(2.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ExponentsDoc {
    p: ExponentDoc,
    q: ExponentDoc,
    #[serde(default = "default_r")]
    r: ExponentDoc,
}

impl TryFrom<ExponentsDoc> for MixedExponents {
    type Error = LabError;

    fn try_from(doc: ExponentsDoc) -> Result<Self> {
        MixedExponents::new(doc.p.value()?, doc.q.value()?, doc.r.value()?)
    }
}

impl From<MixedExponents> for ExponentsDoc {
    fn from(e: MixedExponents) -> Self {
        ExponentsDoc {
            p: ExponentDoc::from_value(e.p),
            q: ExponentDoc::from_value(e.q),
            r: ExponentDoc::from_value(e.r),
        }
    }
}

/// Parses an exponent: a decimal, a fraction `a/b`, or `inf`.
pub fn parse_exponent(s: &str) -> Result<f64> {
    let s = s.trim();
    let value = match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => f64::INFINITY,
        _ => match s.split_once('/') {
            Some((a, b)) => {
                let a: f64 = a
                    .trim()
                    .parse()
                    .map_err(|_| LabError::Invalid(format!("bad exponent {s:?}")))?;
                let b: f64 = b
                    .trim()
                    .parse()
                    .map_err(|_| LabError::Invalid(format!("bad exponent {s:?}")))?;
                a / b
            }
            None => s
                .parse()
                .map_err(|_| LabError::Invalid(format!("bad exponent {s:?}")))?,
        },
    };
    check_exponent(value)
}

/// `(Σ w_k |x_k|^e)^(1/e)`, or `max {|x_k| : w_k > 0}` when `e = ∞`.
pub(crate) fn weighted_power_mean(weights: &[f64], xs: &[f64], e: f64) -> f64 {
    let top = weights
        .iter()
        .zip(xs)
        .filter(|(w, _)| **w > 0.0)
        .fold(0.0f64, |m, (_, x)| m.max(x.abs()));
    if top == 0.0 || e.is_infinite() {
        return top;
    }
    let sum: f64 = weights
        .iter()
        .zip(xs)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, x)| w * (x.abs() / top).powf(e))
        .sum();
    top * sum.powf(1.0 / e)
}

/// Unweighted `ℓ^r` norm of a vector.
pub(crate) fn lr_norm(v: &[f64], r: f64) -> f64 {
    if let [x] = v {
        return x.abs();
    }
    let top = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if top == 0.0 || r.is_infinite() {
        return top;
    }
    top * v
        .iter()
        .map(|x| (x.abs() / top).powf(r))
        .sum::<f64>()
        .powf(1.0 / r)
}

/// Mixed norm of a scalar function given by row-major values. `scratch`
/// receives the inner norms of the rows.
pub(crate) fn scalar_mixed_norm(
    a_weights: &[f64],
    b_weights: &[f64],
    values: &[f64],
    p: f64,
    q: f64,
    scratch: &mut Vec<f64>,
) -> f64 {
    scratch.clear();
    for row in values.chunks(b_weights.len()) {
        scratch.push(weighted_power_mean(b_weights, row, q));
    }
    weighted_power_mean(a_weights, scratch, p)
}

pub fn mixed_norm(space: &FiniteProductSpace, f: &GridFunction, e: &MixedExponents) -> Result<f64> {
    space.check_function(f)?;
    check_exponent(e.p)?;
    check_exponent(e.q)?;
    check_exponent(e.r)?;
    let (m, n) = space.shape();
    let mut cells = vec![0.0; n];
    let inner: Vec<f64> = (0..m)
        .map(|i| {
            for (j, slot) in cells.iter_mut().enumerate() {
                *slot = lr_norm(f.get(i, j), e.r);
            }
            weighted_power_mean(space.b_weights(), &cells, e.q)
        })
        .collect();
    Ok(weighted_power_mean(space.a_weights(), &inner, e.p))
}

/// The pairing `Σ w(c) <f(c), g(c)>`.
pub fn pair(space: &FiniteProductSpace, f: &GridFunction, g: &GridFunction) -> Result<f64> {
    space.check_function(f)?;
    space.check_function(g)?;
    if f.dim() != g.dim() {
        return Err(LabError::DimMismatch {
            left: f.dim(),
            right: g.dim(),
        });
    }
    Ok(space
        .cell_weights()
        .iter()
        .enumerate()
        .map(|(c, w)| {
            w * f
                .cell(c)
                .iter()
                .zip(g.cell(c))
                .map(|(x, y)| x * y)
                .sum::<f64>()
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qiu_f() -> GridFunction {
        GridFunction::scalar(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn qiu_norm_is_weighted() {
        let s = FiniteProductSpace::uniform(2, 2).unwrap();
        for p in [1.0, 2.0, 3.5, 10.0, 200.0, f64::INFINITY] {
            let e = MixedExponents::scalar(p, 2.0).unwrap();
            let v = mixed_norm(&s, &qiu_f(), &e).unwrap();
            assert!((v - 0.5f64.sqrt()).abs() < 1e-14, "p = {p}: {v}");
        }
    }

    #[test]
    fn constants_have_unit_norm() {
        let s = FiniteProductSpace::new(vec![0.2, 0.8], vec![0.1, 0.3, 0.6]).unwrap();
        let one = GridFunction::constant(2, 3, 1.0).unwrap();
        let lattice = [1.0, 4.0 / 3.0, 2.0, 4.0, f64::INFINITY];
        for p in lattice {
            for q in lattice {
                for r in lattice {
                    let e = MixedExponents::new(p, q, r).unwrap();
                    assert!((mixed_norm(&s, &one, &e).unwrap() - 1.0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn equal_exponents_reduce_to_plain_lp() {
        let s = FiniteProductSpace::new(vec![0.25, 0.75], vec![0.5, 0.2, 0.3]).unwrap();
        let f = GridFunction::new(
            2,
            3,
            2,
            vec![
                1.0, -2.0, 0.5, 3.0, 0.0, 0.0, -1.5, 1.0, 2.0, 2.0, 0.1, -0.3,
            ],
        )
        .unwrap();
        for p in [1.0, 1.5, 3.0, 7.0] {
            let e = MixedExponents::new(p, p, p).unwrap();
            let plain: f64 = (0..6)
                .map(|c| s.cell_weight(c) * f.cell(c).iter().map(|x| x.abs().powf(p)).sum::<f64>())
                .sum::<f64>()
                .powf(1.0 / p);
            assert!((mixed_norm(&s, &f, &e).unwrap() - plain).abs() < 1e-12);
        }
    }

    #[test]
    fn infinity_ignores_zero_weight_cells() {
        let s = FiniteProductSpace::new(vec![1.0, 0.0], vec![0.5, 0.5]).unwrap();
        let f = GridFunction::scalar(2, 2, vec![1.0, 2.0, 100.0, 100.0]).unwrap();
        let e = MixedExponents::scalar(f64::INFINITY, f64::INFINITY).unwrap();
        assert_eq!(mixed_norm(&s, &f, &e).unwrap(), 2.0);
        let zero = GridFunction::zeros(2, 2, 1).unwrap();
        assert_eq!(mixed_norm(&s, &zero, &e).unwrap(), 0.0);
    }

    #[test]
    fn large_exponents_do_not_underflow() {
        let s = FiniteProductSpace::uniform(2, 2).unwrap();
        let f = GridFunction::scalar(2, 2, vec![1e-3, 2e-3, 0.0, 1e-3]).unwrap();
        let e = MixedExponents::scalar(1000.0, 800.0).unwrap();
        let v = mixed_norm(&s, &f, &e).unwrap();
        assert!(v > 1.9e-3 && v <= 2e-3);
    }

    #[test]
    fn dual_examples() {
        let d = MixedExponents::new(2.0, 2.0, 2.0).unwrap().dual();
        assert_eq!((d.p, d.q, d.r), (2.0, 2.0, 2.0));
        let d = MixedExponents::new(4.0, 2.0, 2.0).unwrap().dual();
        assert!((d.p - 4.0 / 3.0).abs() < 1e-15);
        let d = MixedExponents::new(f64::INFINITY, 2.0, 1.0).unwrap().dual();
        assert_eq!((d.p, d.q, d.r), (1.0, 2.0, f64::INFINITY));
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(MixedExponents::new(0.5, 2.0, 2.0).is_err());
        assert!(MixedExponents::new(f64::NAN, 2.0, 2.0).is_err());
        assert!(parse_exponent("0.9").is_err());
        assert_eq!(parse_exponent("10/9").unwrap(), 10.0 / 9.0);
        assert_eq!(parse_exponent("inf").unwrap(), f64::INFINITY);
    }

    #[test]
    fn exponent_document() {
        let e: MixedExponents = serde_json::from_str(r#"{"p": "inf", "q": 2}"#).unwrap();
        assert_eq!((e.p, e.q, e.r), (f64::INFINITY, 2.0, 2.0));
        assert_eq!(
            serde_json::to_string(&e).unwrap(),
            r#"{"p":"inf","q":2.0,"r":2.0}"#
        );
        assert!(serde_json::from_str::<MixedExponents>(r#"{"p": 0.5, "q": 2}"#).is_err());
    }

    #[test]
    fn pairing_examples() {
        let s = FiniteProductSpace::new(vec![0.4, 0.6], vec![0.5, 0.5]).unwrap();
        let f = GridFunction::scalar(2, 2, vec![1.0, 2.0, -3.0, 0.5]).unwrap();
        let one = GridFunction::constant(2, 2, 1.0).unwrap();
        assert!((pair(&s, &f, &one).unwrap() - s.integrate(&f).unwrap()[0]).abs() < 1e-15);

        let a = GridFunction::indicator(2, 2, &[0, 1, 3]).unwrap();
        let b = GridFunction::indicator(2, 2, &[1, 2, 3]).unwrap();
        assert!((pair(&s, &a, &b).unwrap() - (0.2 + 0.3)).abs() < 1e-15);

        let e = MixedExponents::new(2.0, 2.0, 2.0).unwrap();
        assert!(
            (pair(&s, &f, &f).unwrap() - mixed_norm(&s, &f, &e).unwrap().powi(2)).abs() < 1e-12
        );
    }
}
