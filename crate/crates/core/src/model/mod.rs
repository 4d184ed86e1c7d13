//! Solver-agnostic mixed-integer linear model.
//!
//! Variables are identified by a [`VarKey`] and carry a stable textual name
//! (used in MPS export and solution import):
//!
//! | family | name |
//! |---|---|
//! | charge / discharge / state of charge | `x_<bat>_t<t>`, `y_<bat>_t<t>`, `s_<bat>_t<t>` |
//! | start / in progress | `z_<act>_t<t>`, `v_<act>_t<t>` |
//! | scheduled / penalized / day | `w_<act>`, `u_<act>`, `d_<act>` |
//! | aggregate load | `l_t<t>` or `l_t<t>_s<s>` |
//! | peak | `eta` or `eta_s<s>` |
//! | peak level | `lam_i<i>` or `lam_i<i>_s<s>` |
//!
//! The scenario suffix appears only in models with more than one scenario.

mod builder;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use builder::{
    build_deterministic, build_saa, compute_big_m, preprocess_penalized_starts, relax_lambda,
    schedule_values, BuildError, ENERGY_DIVISOR, PEAK_PRICE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    Charge { battery: usize, slot: u32 },
    Discharge { battery: usize, slot: u32 },
    State { battery: usize, slot: u32 },
    Start { activity: usize, slot: u32 },
    Progress { activity: usize, slot: u32 },
    Scheduled { activity: usize },
    Penalized { activity: usize },
    Day { activity: usize },
    Load { slot: u32, scenario: usize },
    Peak { scenario: usize },
    Lambda { level: u32, scenario: usize },
}

/// Variable family, ignoring indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Charge,
    Discharge,
    State,
    Start,
    Progress,
    Scheduled,
    Penalized,
    Day,
    Load,
    Peak,
    Lambda,
}

impl Family {
    pub const ACTIVITY: [Family; 5] = [
        Family::Start,
        Family::Progress,
        Family::Scheduled,
        Family::Penalized,
        Family::Day,
    ];
    pub const BATTERY: [Family; 3] = [Family::Charge, Family::Discharge, Family::State];

    /// Decided once for all scenarios.
    pub fn is_first_stage(self) -> bool {
        !matches!(self, Family::Load | Family::Peak | Family::Lambda)
    }
}

impl VarKey {
    pub fn family(&self) -> Family {
        match self {
            VarKey::Charge { .. } => Family::Charge,
            VarKey::Discharge { .. } => Family::Discharge,
            VarKey::State { .. } => Family::State,
            VarKey::Start { .. } => Family::Start,
            VarKey::Progress { .. } => Family::Progress,
            VarKey::Scheduled { .. } => Family::Scheduled,
            VarKey::Penalized { .. } => Family::Penalized,
            VarKey::Day { .. } => Family::Day,
            VarKey::Load { .. } => Family::Load,
            VarKey::Peak { .. } => Family::Peak,
            VarKey::Lambda { .. } => Family::Lambda,
        }
    }

    pub fn activity(&self) -> Option<usize> {
        match *self {
            VarKey::Start { activity, .. }
            | VarKey::Progress { activity, .. }
            | VarKey::Scheduled { activity }
            | VarKey::Penalized { activity }
            | VarKey::Day { activity } => Some(activity),
            _ => None,
        }
    }

    pub fn slot(&self) -> Option<u32> {
        match *self {
            VarKey::Charge { slot, .. }
            | VarKey::Discharge { slot, .. }
            | VarKey::State { slot, .. }
            | VarKey::Start { slot, .. }
            | VarKey::Progress { slot, .. }
            | VarKey::Load { slot, .. } => Some(slot),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub key: VarKey,
    pub name: String,
    pub domain: Domain,
    pub lower: f64,
    pub upper: f64,
    /// Objective coefficient.
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

/// Constraint families of the formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowKind {
    StartLinkage,
    Duration,
    SingleStart,
    PenalizedStart,
    DayIndex,
    PrecedenceDayGap,
    PrecedenceScheduled,
    InitialCharge,
    ChargeDynamics,
    ChargeExclusive,
    LargeRooms,
    SmallRooms,
    LoadBalance,
    LevelSum,
    LevelCover,
    PeakAbove,
    PeakBelow,
    RecurringScheduled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub kind: RowKind,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, c)| c * values[j]).sum()
    }

    /// Amount by which `values` violate this row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("contradictory bounds on {name}: lower {lower} > upper {upper}")]
    ContradictoryBounds {
        name: String,
        lower: f64,
        upper: f64,
    },
}

/// Variables, rows and a linear objective to minimise.
#[derive(Debug, Clone)]
pub struct MilpModel {
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
    /// Upper bound on the absolute aggregate load; number of peak levels.
    pub big_m: u32,
    pub scenario_count: usize,
    /// Whether load, peak and level variables carry a scenario suffix.
    pub scenario_expanded: bool,
    index: HashMap<VarKey, usize>,
    names: HashMap<String, usize>,
}

impl MilpModel {
    pub(crate) fn new(big_m: u32, scenario_count: usize, scenario_expanded: bool) -> Self {
        MilpModel {
            vars: Vec::new(),
            rows: Vec::new(),
            big_m,
            scenario_count,
            scenario_expanded,
            index: HashMap::new(),
            names: HashMap::new(),
        }
    }

    pub(crate) fn add_var(
        &mut self,
        key: VarKey,
        name: String,
        domain: Domain,
        lower: f64,
        upper: f64,
        cost: f64,
    ) -> usize {
        let j = self.vars.len();
        let prev = self.index.insert(key, j);
        debug_assert!(prev.is_none(), "duplicate key {key:?}");
        let prev = self.names.insert(name.clone(), j);
        debug_assert!(prev.is_none(), "duplicate name {name}");
        self.vars.push(Variable {
            key,
            name,
            domain,
            lower,
            upper,
            cost,
        });
        j
    }

    pub(crate) fn add_row(
        &mut self,
        name: String,
        kind: RowKind,
        terms: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) {
        self.rows.push(Row {
            name,
            kind,
            terms,
            sense,
            rhs,
        });
    }

    pub fn var(&self, key: &VarKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn var_by_name(&self, name: &str) -> Option<usize> {
        self.names.get(name).copied()
    }

    pub fn count(&self, family: Family) -> usize {
        self.vars
            .iter()
            .filter(|v| v.key.family() == family)
            .count()
    }

    pub fn binary_count(&self) -> usize {
        self.vars
            .iter()
            .filter(|v| v.domain == Domain::Binary)
            .count()
    }

    pub fn rows_of(&self, kind: RowKind) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.kind == kind)
    }

    pub fn objective(&self, values: &[f64]) -> f64 {
        crate::evaluator::neumaier_sum(self.vars.iter().zip(values).map(|(v, x)| v.cost * x))
    }

    /// Largest bound, integrality or row violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (v, &x) in self.vars.iter().zip(values) {
            worst = worst.max(v.lower - x).max(x - v.upper);
            if v.domain == Domain::Binary {
                worst = worst.max((x - x.round()).abs());
            }
        }
        for r in &self.rows {
            worst = worst.max(r.violation(values));
        }
        worst
    }

    /// Names of rows violated by more than `tol`.
    pub fn violated_rows(&self, values: &[f64], tol: f64) -> Vec<&str> {
        self.rows
            .iter()
            .filter(|r| r.violation(values) > tol)
            .map(|r| r.name.as_str())
            .collect()
    }

    /// Switches the domain of every variable of `family` to continuous.
    pub fn relax_family(&mut self, family: Family) {
        for v in &mut self.vars {
            if v.key.family() == family {
                v.domain = Domain::Continuous;
            }
        }
    }

    /// Switches the domain of every variable of `family` to binary.
    pub fn restore_binary(&mut self, family: Family) {
        for v in &mut self.vars {
            if v.key.family() == family {
                v.domain = Domain::Binary;
            }
        }
    }

    /// Intersects the bounds of every selected variable with `[lower, upper]`.
    pub fn tighten(
        &mut self,
        select: impl Fn(&VarKey) -> bool,
        lower: f64,
        upper: f64,
    ) -> Result<usize, ModelError> {
        let mut n = 0;
        for v in &mut self.vars {
            if select(&v.key) {
                let lo = v.lower.max(lower);
                let hi = v.upper.min(upper);
                if lo > hi + 1e-9 {
                    return Err(ModelError::ContradictoryBounds {
                        name: v.name.clone(),
                        lower: lo,
                        upper: hi,
                    });
                }
                v.lower = lo;
                v.upper = hi.max(lo);
                n += 1;
            }
        }
        Ok(n)
    }
}
