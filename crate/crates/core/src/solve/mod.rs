//! Solvers: exhaustive oracle, branch-and-bound on the LP relaxation, and
//! an external-solver bridge through MPS files.

mod bnb;
mod exact;
mod external;
mod import;
mod mps;

use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::instance::{Instance, ScenarioSet};
use crate::model::{MilpModel, VarKey};
use crate::schedule::{Action, Schedule};

pub use bnb::{branch_and_bound, BnbOptions, RoundingHeuristic, ScheduleRounding};
pub use exact::{oracle_feasible, search_space, solve_exact_small, DEFAULT_BUDGET};
pub use external::{solve_external, substitute_command};
pub use import::{import_solution, read_solution_values, write_solution_values, ImportError};
pub use mps::{export_mps, write_mps};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Feasible => "feasible",
            Status::Infeasible => "infeasible",
            Status::Unknown => "unknown",
        })
    }
}

/// Search limits. `None` means unlimited.
#[derive(Debug, Clone, Copy, Default)]
pub struct Limits {
    pub time: Option<Duration>,
    /// Branch-and-bound node expansions after the root.
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub schedule: Option<Schedule>,
    /// Objective reported by the solver (model objective, or the true cost
    /// for the exhaustive oracle).
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub status: Status,
    /// Model variable values of the incumbent, when a model was solved.
    pub values: Option<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl SolveResult {
    pub fn infeasible() -> Self {
        SolveResult {
            schedule: None,
            objective: None,
            bound: None,
            gap: None,
            status: Status::Infeasible,
            values: None,
            warnings: Vec::new(),
        }
    }
}

/// `(objective - bound) / max(1, |objective|)`, never negative.
pub fn relative_gap(objective: f64, bound: f64) -> f64 {
    ((objective - bound) / objective.abs().max(1.0)).max(0.0)
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("search space {size:.3e} exceeds budget {budget:.3e}")]
    BudgetExceeded { size: f64, budget: f64 },
    #[error("LP relaxation failed: {0}")]
    Lp(String),
    #[error("external solver: {0}")]
    External(String),
    #[error(transparent)]
    Import(#[from] ImportError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Schedule encoded by the start and battery variables of `values`. A start
/// or action is taken when its indicator exceeds one half; the earliest
/// start wins if several do.
pub fn schedule_from_values(model: &MilpModel, instance: &Instance, values: &[f64]) -> Schedule {
    let mut s = Schedule::idle(instance);
    for (v, &x) in model.vars.iter().zip(values) {
        if x <= 0.5 {
            continue;
        }
        match v.key {
            VarKey::Start { activity, slot } => {
                let cur = &mut s.starts[activity];
                if cur.is_none_or(|c| slot < c) {
                    *cur = Some(slot);
                }
            }
            VarKey::Charge { battery, slot } => s.set_action(battery, slot, Action::Charge),
            VarKey::Discharge { battery, slot }
                if s.action(battery, slot) == Action::Idle => {
                    s.set_action(battery, slot, Action::Discharge)
                }
            _ => {}
        }
    }
    s
}

/// A model together with the data it was built from.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub model: &'a MilpModel,
    pub instance: &'a Instance,
    pub scenarios: &'a ScenarioSet,
}
