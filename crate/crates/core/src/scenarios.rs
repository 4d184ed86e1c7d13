//! Scenario CSV files and synthetic scenario families.
//!
//! A scenario file has a `slot,s1,s2,...` header and one row per slot. Several
//! files are stacked column-wise in argument order.
//!
//! [`generate_perturbed`] stands in for a forecaster: each member is the base
//! series with independent per-slot noise, so forecast accuracy can be dialled
//! with a single `sigma`. [`accuracy_cost_curve`] solves the scenario problem
//! for each noise level and prices the result on the base series.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::evaluator::{compute_mase, evaluate_cost, MaseError};
use crate::instance::{Instance, ScenarioSet};
use crate::model::{build_saa, compute_big_m, preprocess_penalized_starts, BuildError};
use crate::solve::{branch_and_bound, solve_exact_small, BnbOptions, Limits, Problem, SolveError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: expected {expected} rows, found {found}")]
    Length {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
}

fn format_err(path: &Path, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Columns of one scenario file.
pub fn read_scenario_file(path: &Path, slots: usize) -> Result<Vec<Vec<f64>>, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario_csv(&text, slots).map_err(|e| match e {
        ParseFailure::Format(m) => format_err(path, m),
        ParseFailure::Length(found) => ScenarioError::Length {
            path: path.to_path_buf(),
            expected: slots,
            found,
        },
    })
}

enum ParseFailure {
    Format(String),
    Length(usize),
}

fn parse_scenario_csv(text: &str, slots: usize) -> Result<Vec<Vec<f64>>, ParseFailure> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| ParseFailure::Format(e.to_string()))?
        .clone();
    if header.get(0) != Some("slot") || header.len() < 2 {
        return Err(ParseFailure::Format(
            "header must be 'slot,s1,...' with at least one scenario column".into(),
        ));
    }
    let mut columns = vec![Vec::with_capacity(slots); header.len() - 1];
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ParseFailure::Format(e.to_string()))?;
        let row = i + 2;
        let slot: usize = record[0].parse().map_err(|_| {
            ParseFailure::Format(format!("row {row}: invalid slot '{}'", &record[0]))
        })?;
        if slot != i + 1 {
            return Err(ParseFailure::Format(format!(
                "row {row}: expected slot {}, found {slot}",
                i + 1
            )));
        }
        for (c, cell) in record.iter().skip(1).enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                ParseFailure::Format(format!("row {row}: non-numeric cell '{cell}'"))
            })?;
            if !v.is_finite() {
                return Err(ParseFailure::Format(format!("row {row}: non-finite value")));
            }
            columns[c].push(v);
        }
    }
    let found = columns[0].len();
    if found != slots {
        return Err(ParseFailure::Length(found));
    }
    Ok(columns)
}

/// Stacks the columns of every file, in argument order.
pub fn load_scenarios(paths: &[PathBuf], slots: usize) -> Result<ScenarioSet, ScenarioError> {
    let mut series = Vec::new();
    for p in paths {
        series.extend(read_scenario_file(p, slots)?);
    }
    ScenarioSet::new(series).map_err(|e| ScenarioError::Format {
        path: paths.first().cloned().unwrap_or_default(),
        message: e.to_string(),
    })
}

/// Canonical CSV: `slot,s1,...` then one row per slot.
pub fn write_scenarios(set: &ScenarioSet) -> String {
    let mut out = String::from("slot");
    for s in 1..=set.count() {
        write!(out, ",s{s}").unwrap();
    }
    out.push('\n');
    for t in 0..set.slots() {
        write!(out, "{}", t + 1).unwrap();
        for series in set.iter() {
            write!(out, ",{}", series[t]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// How noise enters a member series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Noise {
    /// `base * (1 + eps)`.
    #[default]
    Multiplicative,
    /// `base + eps * mean(|base|)`, so `sigma` stays relative.
    Additive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub label: String,
    pub sigma: f64,
    pub series: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFamily {
    pub base: Vec<f64>,
    pub members: Vec<Member>,
    pub seed: u64,
}

impl ScenarioFamily {
    pub fn scenarios(&self) -> ScenarioSet {
        ScenarioSet::new(self.members.iter().map(|m| m.series.clone()).collect())
            .expect("members share the base length")
    }

    /// Mean MASE of the members against the base, using the base itself as
    /// the training series. `None` when the base has no seasonal variation.
    pub fn mean_mase(&self, period: usize) -> Result<Option<f64>, MaseError> {
        let mut total = 0.0;
        for m in &self.members {
            match compute_mase(&m.series, &self.base, &self.base, period) {
                Ok(v) => total += v,
                Err(MaseError::ZeroScale) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        Ok(Some(total / self.members.len() as f64))
    }
}

/// `k` noisy copies of `base`. Member `i` draws from its own stream of the
/// seeded generator, so members do not depend on `k` or on thread count.
pub fn generate_perturbed(
    base: &[f64],
    k: usize,
    sigma: f64,
    seed: u64,
    noise: Noise,
) -> ScenarioFamily {
    let scale = base.iter().map(|v| v.abs()).sum::<f64>() / base.len().max(1) as f64;
    let members = (0..k)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let series = base
                .iter()
                .map(|&b| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let eps = sigma * z;
                    match noise {
                        Noise::Multiplicative => b * (1.0 + eps),
                        Noise::Additive => b + eps * scale,
                    }
                })
                .collect();
            Member {
                label: format!("m{}", i + 1),
                sigma,
                series,
            }
        })
        .collect();
    ScenarioFamily {
        base: base.to_vec(),
        members,
        seed,
    }
}

/// Solver used inside the curve.
#[derive(Debug, Clone, Copy)]
pub enum CurveSolver {
    Exact { budget: f64 },
    BranchAndBound(Limits),
}

#[derive(Debug, Clone, Copy)]
pub struct CurveConfig {
    pub k: usize,
    pub seed: u64,
    pub noise: Noise,
    pub solver: CurveSolver,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub sigma: f64,
    pub mase: Option<f64>,
    /// Average cost of the chosen schedule on the base series.
    pub cost: f64,
}

#[derive(Debug, Error)]
pub enum CurveError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Mase(#[from] MaseError),
    #[error("no feasible schedule at sigma {0}")]
    Infeasible(f64),
    #[error("{0}")]
    Evaluate(String),
}

/// For each sigma: perturb, solve the scenario problem with exact peak
/// levels, and price the schedule on the base series.
pub fn accuracy_cost_curve(
    instance: &Instance,
    base: &[f64],
    sigmas: &[f64],
    config: &CurveConfig,
) -> Result<Vec<CurvePoint>, CurveError> {
    let instance = preprocess_penalized_starts(instance);
    let truth =
        ScenarioSet::new(vec![base.to_vec()]).map_err(|e| CurveError::Evaluate(e.to_string()))?;
    let period = instance.horizon.day as usize;
    let mut out = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let family = generate_perturbed(base, config.k, sigma, config.seed, config.noise);
        let scenarios = family.scenarios();
        let result = match config.solver {
            CurveSolver::Exact { budget } => solve_exact_small(&instance, &scenarios, budget)?,
            CurveSolver::BranchAndBound(limits) => {
                let model = build_saa(&instance, &scenarios, compute_big_m(&instance, &scenarios))?;
                let problem = Problem {
                    model: &model,
                    instance: &instance,
                    scenarios: &scenarios,
                };
                branch_and_bound(
                    &problem,
                    &BnbOptions {
                        limits,
                        ..BnbOptions::default()
                    },
                )?
            }
        };
        let schedule = result.schedule.ok_or(CurveError::Infeasible(sigma))?;
        let cost = evaluate_cost(&instance, &schedule, &truth)
            .map_err(|e| CurveError::Evaluate(e.to_string()))?
            .average
            .total;
        out.push(CurvePoint {
            sigma,
            mase: family.mean_mase(period)?,
            cost,
        });
    }
    Ok(out)
}

/// `sigma,mase,cost` rows; a missing MASE prints as `NA`.
pub fn curve_to_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("sigma,mase,cost\n");
    for p in points {
        let mase = p.mase.map_or_else(|| "NA".to_string(), |m| m.to_string());
        writeln!(out, "{},{mase},{}", p.sigma, p.cost).unwrap();
    }
    out
}
