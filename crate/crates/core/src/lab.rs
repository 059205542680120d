//! Experiment runners, presets and the configuration document behind the
//! `condlab` command line.
//!
//! Every runner returns a report that renders as CSV: a mandatory header, one
//! row per record, numbers with 15 significant digits. Summary lines, when
//! present, follow the table and start with `#`.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::condexp::{cond_exp, lyz_check};
use crate::error::{LabError, Result};
use crate::mixed_norm::{mixed_norm, MixedExponents};
use crate::opnorm::{
    loglog_slope, opnorm_ascent_with, opnorm_oracle_with, symmetrization_growth,
    tensor_norm_experiment, AscentOptions, GrowthRow, Method, NormEstimate, TensorRow,
};
use crate::sigma::{SigmaAlgebra, SigmaDoc, DEFAULT_CELL_CAP};
use crate::space::{FiniteProductSpace, GridFunction};

/// Longest horizon accepted by the progressive example.
pub const MAX_PROGRESSIVE_HORIZON: usize = 6;

/// Formats a number with 15 significant digits, independent of locale.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        format!("{:.*}", (14 - exp) as usize, x)
    } else {
        format!("{x:.14e}")
    }
}

/// Parses `name=start:stop:step` into the name and the inclusive grid.
pub fn parse_sweep(text: &str) -> Result<(String, Vec<f64>)> {
    let bad = || LabError::Invalid(format!("sweep must look like p=2:12:1, got {text:?}"));
    let (name, range) = text.split_once('=').ok_or_else(bad)?;
    let parts: Vec<f64> = range
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if step.is_nan() || step <= 0.0 || stop < start || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    let values = (0..count).map(|k| start + k as f64 * step).collect();
    Ok((name.trim().to_string(), values))
}

// ---------------------------------------------------------------------------
// Presets

/// The 2x2 uniform space with two fair coins.
pub fn qiu_space() -> FiniteProductSpace {
    FiniteProductSpace::uniform(2, 2).expect("2x2 uniform space")
}

/// Generators `{(0,1)}`, `{(1,1)}`, `{(0,0),(1,0)}`.
pub fn qiu_generators() -> Vec<Vec<[usize; 2]>> {
    vec![vec![[0, 1]], vec![[1, 1]], vec![[0, 0], [1, 0]]]
}

pub fn qiu_sigma() -> SigmaAlgebra {
    SigmaAlgebra::generate((2, 2), &qiu_generators()).expect("valid generators")
}

/// `f(0,0) = 0, f(1,0) = 1, f(0,1) = 1, f(1,1) = 0`.
pub fn qiu_function() -> GridFunction {
    GridFunction::scalar(2, 2, vec![0.0, 1.0, 1.0, 0.0]).expect("2x2 function")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Qiu,
    Pisier,
    Hytonen,
    Progressive,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Qiu,
        Preset::Pisier,
        Preset::Hytonen,
        Preset::Progressive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Qiu => "qiu",
            Preset::Pisier => "pisier",
            Preset::Hytonen => "hytonen",
            Preset::Progressive => "progressive",
        }
    }

    /// Runs the preset with its default parameters and renders the CSV.
    pub fn run_default(self, seed: u64) -> Result<String> {
        let opts = AscentOptions {
            seed,
            ..AscentOptions::default()
        };
        Ok(match self {
            Preset::Qiu => run_example_qiu(&parse_sweep("p=1:12:1")?.1)?.to_csv(),
            Preset::Pisier => pisier_csv(&run_example_pisier(10.0, 2.0, 2, &opts)?),
            Preset::Hytonen => {
                run_example_hytonen(4.0, 2.0, 0.375, &[8, 16, 32, 64, 128])?.to_csv()
            }
            Preset::Progressive => run_example_progressive(3, 4.0, 2.0, &opts)?.to_csv(),
        })
    }
}

impl FromStr for Preset {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| LabError::Invalid(format!("unknown preset {s:?}")))
    }
}

// ---------------------------------------------------------------------------
// Two-coin example

#[derive(Clone, Debug, PartialEq)]
pub struct QiuRow {
    pub p: f64,
    pub norm_f: f64,
    pub norm_ef: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct QiuReport {
    /// `E(f|F)` at `(0,0), (1,0), (0,1), (1,1)`.
    pub cond_exp: [f64; 4],
    pub rows: Vec<QiuRow>,
    /// Largest swept `p` with ratio below 1 and smallest with ratio above 1.
    pub crossover: (Option<f64>, Option<f64>),
}

/// Ratios `||Ef|| / ||f||` in `L^p(μ; L^2(ν))` for the two-coin example.
pub fn run_example_qiu(p_sweep: &[f64]) -> Result<QiuReport> {
    if p_sweep.is_empty() {
        return Err(LabError::Invalid("empty p sweep".into()));
    }
    let space = qiu_space();
    let f = qiu_function();
    let ef = cond_exp(&space, &qiu_sigma(), &f)?;
    let rows = p_sweep
        .iter()
        .map(|&p| {
            if !p.is_finite() {
                return Err(LabError::InfiniteExponent("the two-coin sweep"));
            }
            let e = MixedExponents::scalar(p, 2.0)?;
            let norm_f = mixed_norm(&space, &f, &e)?;
            let norm_ef = mixed_norm(&space, &ef, &e)?;
            Ok(QiuRow {
                p,
                norm_f,
                norm_ef,
                ratio: norm_ef / norm_f,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let below = rows
        .iter()
        .filter(|r| r.ratio < 1.0)
        .map(|r| r.p)
        .reduce(f64::max);
    let above = rows
        .iter()
        .filter(|r| r.ratio > 1.0)
        .map(|r| r.p)
        .reduce(f64::min);
    Ok(QiuReport {
        cond_exp: [ef.at(0, 0), ef.at(1, 0), ef.at(0, 1), ef.at(1, 1)],
        rows,
        crossover: (below, above),
    })
}

impl QiuReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,norm_f,norm_ef,ratio\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_num(r.p),
                fmt_num(r.norm_f),
                fmt_num(r.norm_ef),
                fmt_num(r.ratio)
            );
        }
        let ce: Vec<String> = self.cond_exp.iter().map(|v| fmt_num(*v)).collect();
        let _ = writeln!(
            out,
            "# cond_exp at (0,0),(1,0),(0,1),(1,1) = ({})",
            ce.join(", ")
        );
        let show = |x: Option<f64>| x.map_or("none".to_string(), fmt_num);
        let _ = writeln!(
            out,
            "# crossover = ({}, {})",
            show(self.crossover.0),
            show(self.crossover.1)
        );
        out
    }
}

// ---------------------------------------------------------------------------
// Tensor powers of the two-coin example

pub fn run_example_pisier(
    p: f64,
    q: f64,
    max_k: usize,
    opts: &AscentOptions,
) -> Result<Vec<TensorRow>> {
    let e = MixedExponents::scalar(p, q)?;
    tensor_norm_experiment(&qiu_space(), &qiu_sigma(), &e, max_k, opts)
}

pub fn pisier_csv(rows: &[TensorRow]) -> String {
    let mut out = String::from("k,estimate,pure_tensor_bound\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            r.k,
            fmt_num(r.estimate.value),
            fmt_num(r.pure_tensor_bound)
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Symmetrization blow-up

#[derive(Clone, Debug)]
pub struct HytonenReport {
    pub rows: Vec<GrowthRow>,
    /// Log-log slope of `lower_bound` against `n`.
    pub fitted_slope: f64,
}

pub fn run_example_hytonen(p: f64, q: f64, alpha: f64, n_list: &[usize]) -> Result<HytonenReport> {
    if n_list.len() < 2 {
        return Err(LabError::Invalid(
            "at least two grid sizes are needed to fit a slope".into(),
        ));
    }
    let rows = symmetrization_growth(p, q, alpha, n_list)?;
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.lower_bound)).collect();
    Ok(HytonenReport {
        fitted_slope: loglog_slope(&points),
        rows,
    })
}

impl HytonenReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,lower_bound,exact_ratio,fitted_slope\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.n,
                fmt_num(r.lower_bound),
                fmt_num(r.exact_ratio),
                fmt_num(self.fitted_slope)
            );
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Progressive σ-algebra

#[derive(Clone, Debug)]
pub struct ProgressiveRow {
    pub horizon: usize,
    pub atoms: usize,
    pub lyz_holds: bool,
    pub estimate: NormEstimate,
}

#[derive(Clone, Debug)]
pub struct ProgressiveReport {
    pub p: f64,
    pub q: f64,
    pub rows: Vec<ProgressiveRow>,
}

/// For each horizon `1..=horizon`: builds the progressive σ-algebra, checks
/// that averaging out the coins preserves measurability, and estimates the
/// operator norm.
pub fn run_example_progressive(
    horizon: usize,
    p: f64,
    q: f64,
    opts: &AscentOptions,
) -> Result<ProgressiveReport> {
    if horizon == 0 {
        return Err(LabError::Invalid("horizon must be at least 1".into()));
    }
    if horizon > MAX_PROGRESSIVE_HORIZON {
        return Err(LabError::SizeCap {
            what: "progressive example",
            size: horizon << horizon,
            cap: MAX_PROGRESSIVE_HORIZON << MAX_PROGRESSIVE_HORIZON,
        });
    }
    let e = MixedExponents::scalar(p, q)?;
    let rows = (1..=horizon)
        .map(|t| {
            let (space, sigma) = SigmaAlgebra::progressive(t, DEFAULT_CELL_CAP)?;
            Ok(ProgressiveRow {
                horizon: t,
                atoms: sigma.num_atoms(),
                lyz_holds: lyz_check(&space, &sigma)?.holds,
                estimate: opnorm_ascent_with(&space, &sigma, &e, opts)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProgressiveReport { p, q, rows })
}

impl ProgressiveReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("T,p,q,atoms,lyz_check,estimate,converged\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.horizon,
                fmt_num(self.p),
                fmt_num(self.q),
                r.atoms,
                r.lyz_holds,
                fmt_num(r.estimate.value),
                r.estimate.converged
            );
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Operator-norm sweeps

#[derive(Clone, Debug)]
pub struct OpnormRow {
    pub p: f64,
    pub q: f64,
    pub estimate: NormEstimate,
}

pub fn run_opnorm(
    space: &FiniteProductSpace,
    sigma: &SigmaAlgebra,
    p_values: &[f64],
    q: f64,
    method: Method,
    opts: &AscentOptions,
) -> Result<Vec<OpnormRow>> {
    if p_values.is_empty() {
        return Err(LabError::Invalid("empty p sweep".into()));
    }
    p_values
        .iter()
        .map(|&p| {
            let e = MixedExponents::scalar(p, q)?;
            let estimate = match method {
                Method::Oracle => opnorm_oracle_with(space, sigma, &e, opts.execution)?,
                Method::Ascent => opnorm_ascent_with(space, sigma, &e, opts)?,
            };
            Ok(OpnormRow { p, q, estimate })
        })
        .collect()
}

pub fn opnorm_csv(rows: &[OpnormRow]) -> String {
    let mut out = String::from("p,q,estimate,converged,restarts\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_num(r.p),
            fmt_num(r.q),
            fmt_num(r.estimate.value),
            r.estimate.converged,
            r.estimate.restarts_used
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Configuration document

/// The JSON configuration accepted by `--config`. A `preset` fills in any
/// missing space, σ-algebra and function.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<FiniteProductSpace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<SigmaDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<GridFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<MixedExponents>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
}

/// A configuration with the preset applied and all parts validated.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub space: FiniteProductSpace,
    pub sigma: SigmaAlgebra,
    pub function: Option<GridFunction>,
    pub exponents: Option<MixedExponents>,
    pub method: Method,
    pub seed: u64,
    pub restarts: usize,
}

impl LabConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Invalid(format!("config: {e}")))
    }

    pub fn preset(name: &str) -> Result<Self> {
        LabConfig {
            preset: Some(name.to_string()),
            ..Default::default()
        }
        .with_preset()
    }

    fn with_preset(mut self) -> Result<Self> {
        match self.preset.as_deref() {
            None => {}
            Some("qiu") => {
                self.space.get_or_insert_with(qiu_space);
                self.sigma
                    .get_or_insert_with(|| SigmaDoc::Generators(qiu_generators()));
                self.function.get_or_insert_with(qiu_function);
            }
            Some(other) => {
                return Err(LabError::Invalid(format!(
                    "no configuration preset named {other:?}"
                )));
            }
        }
        Ok(self)
    }

    pub fn resolve(self) -> Result<Resolved> {
        let cfg = self.with_preset()?;
        let space = cfg
            .space
            .ok_or_else(|| LabError::Invalid("config needs a space".into()))?;
        let sigma = match &cfg.sigma {
            Some(doc) => doc.build(space.shape())?,
            None => SigmaAlgebra::full(space.shape())?,
        };
        if let Some(f) = &cfg.function {
            space.check_function(f)?;
        }
        let method = cfg
            .method
            .as_deref()
            .map(Method::from_str)
            .transpose()?
            .unwrap_or(Method::Ascent);
        let restarts = cfg.restarts.unwrap_or(crate::opnorm::DEFAULT_RESTARTS);
        if restarts == 0 {
            return Err(LabError::ZeroRestarts);
        }
        Ok(Resolved {
            space,
            sigma,
            function: cfg.function,
            exponents: cfg.exponents,
            method,
            seed: cfg.seed.unwrap_or(0),
            restarts,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(0.75f64.sqrt()), "0.866025403784439");
        assert_eq!(fmt_num(1.0), "1.00000000000000");
        assert_eq!(fmt_num(10.0), "10.0000000000000");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.5), "-0.500000000000000");
        assert_eq!(fmt_num(1.5e-9), "1.50000000000000e-9");
    }

    #[test]
    fn sweeps() {
        let (name, v) = parse_sweep("p=2:12:1").unwrap();
        assert_eq!(name, "p");
        assert_eq!(v.len(), 11);
        assert_eq!(v[10], 12.0);
        assert_eq!(
            parse_sweep("p=1:2:0.25").unwrap().1,
            vec![1.0, 1.25, 1.5, 1.75, 2.0]
        );
        assert!(parse_sweep("p=2:1:1").is_err());
        assert!(parse_sweep("p=1:2").is_err());
        assert!(parse_sweep("p=1:2:0").is_err());
    }

    #[test]
    fn qiu_report_rows() {
        let report = run_example_qiu(&[2.0, 6.0, 7.0]).unwrap();
        assert_eq!(report.cond_exp, [0.5, 0.5, 1.0, 0.0]);
        assert!((report.rows[0].ratio - 0.75f64.sqrt()).abs() < 1e-12);
        assert_eq!(report.crossover, (Some(6.0), Some(7.0)));
        assert!(run_example_qiu(&[]).is_err());
        let csv = report.to_csv();
        assert!(csv.starts_with("p,norm_f,norm_ef,ratio\n2.00000000000000,"));
        assert!(csv.contains("# cond_exp at (0,0),(1,0),(0,1),(1,1) = (0.500000000000000, 0.500000000000000, 1.00000000000000, 0)"));
    }

    #[test]
    fn progressive_rejects_long_horizons() {
        let err = run_example_progressive(7, 4.0, 2.0, &AscentOptions::default()).unwrap_err();
        assert!(err.is_size_cap());
    }

    #[test]
    fn config_with_preset_and_overrides() {
        let cfg =
            LabConfig::from_json(r#"{"preset": "qiu", "exponents": {"p": 10, "q": 2}, "seed": 7}"#)
                .unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.sigma, qiu_sigma());
        assert_eq!(r.function.unwrap(), qiu_function());
        assert_eq!(r.seed, 7);
        assert_eq!(r.method, Method::Ascent);

        let explicit = r#"{
            "space": {"a_weights": [0.5, 0.5], "b_weights": [0.5, 0.5]},
            "sigma": {"generators": [[[0,1]], [[1,1]], [[0,0],[1,0]]]},
            "function": {"dim": 1, "values": [[0, 1], [1, 0]]},
            "method": "oracle"
        }"#;
        let r = LabConfig::from_json(explicit).unwrap().resolve().unwrap();
        assert_eq!(r.sigma, qiu_sigma());
        assert_eq!(r.method, Method::Oracle);
    }

    #[test]
    fn config_errors() {
        assert!(LabConfig::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(LabConfig::from_json(r#"{"preset": "nope"}"#)
            .unwrap()
            .resolve()
            .is_err());
        assert!(LabConfig::from_json(r#"{}"#).unwrap().resolve().is_err());
        let mismatched = r#"{"preset": "qiu", "function": {"dim": 1, "values": [[1, 2, 3]]}}"#;
        assert!(LabConfig::from_json(mismatched).unwrap().resolve().is_err());
    }
}
