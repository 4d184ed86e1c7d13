//! Two-phase fix-and-optimize heuristics.
//!
//! Warm path: solve with battery indicators continuous, keeping the given
//! initial schedule as incumbent, then fix the activity decisions and solve
//! again with binary batteries.
//!
//! Cold path: solve without batteries, without penalized starts and with
//! starts restricted to every other slot, then let each scheduled activity
//! move within a window around its phase-one start. Batteries and the
//! activities phase one left out are free.
//!
//! Both paths return whichever of the phase-two result and the phase-one
//! (or initial) schedule has the lower evaluated cost.

use thiserror::Error;

use crate::evaluator::{check_feasibility, evaluate_cost, Violation};
use crate::instance::{Instance, ScenarioSet};
use crate::model::{
    build_saa, compute_big_m, relax_lambda, schedule_values, BuildError, Family, MilpModel,
    ModelError, VarKey,
};
use crate::schedule::Schedule;
use crate::solve::{
    branch_and_bound, solve_external, BnbOptions, Limits, Problem, SolveError, SolveResult, Status,
};

/// Which start slots the cold path keeps in phase one (1-indexed).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parity {
    #[default]
    Even,
    Odd,
}

impl Parity {
    fn keeps(self, slot: u32) -> bool {
        slot.is_multiple_of(2) == (self == Parity::Even)
    }
}

/// How restricted models are solved.
#[derive(Debug, Clone)]
pub enum Backend {
    Internal(Limits),
    /// Shell command template with `{mps}` and `{sol}` placeholders.
    External(String),
}

#[derive(Debug, Clone)]
pub struct HeuristicConfig {
    pub setstart: bool,
    pub initial: Option<Schedule>,
    pub phase1: Limits,
    pub phase2: Limits,
    /// Slots by which a phase-one start may move in phase two.
    pub window: u32,
    pub parity: Parity,
    /// Solve with continuous peak levels.
    pub relax_lambda: bool,
    pub solver_cmd: Option<String>,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            setstart: false,
            initial: None,
            phase1: Limits::default(),
            phase2: Limits::default(),
            window: 2,
            parity: Parity::Even,
            relax_lambda: true,
            solver_cmd: None,
        }
    }
}

impl HeuristicConfig {
    fn backend(&self, limits: Limits) -> Backend {
        match &self.solver_cmd {
            Some(cmd) => Backend::External(cmd.clone()),
            None => Backend::Internal(limits),
        }
    }
}

#[derive(Debug, Error)]
pub enum HeuristicError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("initial solution is infeasible: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InfeasibleInitial(Vec<Violation>),
    #[error("phase one found no feasible schedule")]
    Phase1Infeasible,
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Output of a two-phase heuristic.
#[derive(Debug, Clone)]
pub struct TwoPhase {
    pub result: SolveResult,
    /// The initial schedule (warm path) or the phase-one schedule (cold
    /// path). `result` never costs more than this on average.
    pub baseline: Schedule,
}

/// Bound change applied to every variable `select` accepts.
pub struct Fixation {
    pub select: Box<dyn Fn(&VarKey) -> bool + Send + Sync>,
    pub lower: f64,
    pub upper: f64,
}

impl Fixation {
    pub fn new(
        select: impl Fn(&VarKey) -> bool + Send + Sync + 'static,
        lower: f64,
        upper: f64,
    ) -> Self {
        Fixation {
            select: Box::new(select),
            lower,
            upper,
        }
    }

    pub fn fix(select: impl Fn(&VarKey) -> bool + Send + Sync + 'static, value: f64) -> Self {
        Self::new(select, value, value)
    }

    /// Fixes one variable.
    pub fn var(key: VarKey, value: f64) -> Self {
        Self::fix(move |k| *k == key, value)
    }
}

/// Applies `fixations` as bound changes and solves the restricted model.
pub fn fix_and_optimize(
    model: &MilpModel,
    instance: &Instance,
    scenarios: &ScenarioSet,
    fixations: &[Fixation],
    backend: &Backend,
    incumbent: Option<Vec<f64>>,
) -> Result<SolveResult, HeuristicError> {
    let mut restricted = model.clone();
    for f in fixations {
        restricted.tighten(&f.select, f.lower, f.upper)?;
    }
    let problem = Problem {
        model: &restricted,
        instance,
        scenarios,
    };
    let result = match backend {
        Backend::Internal(limits) => branch_and_bound(
            &problem,
            &BnbOptions {
                limits: *limits,
                incumbent,
                ..BnbOptions::default()
            },
        )?,
        Backend::External(cmd) => solve_external(&problem, cmd)?,
    };
    if let Some(values) = &result.values {
        for (v, x) in restricted.vars.iter().zip(values) {
            debug_assert!(
                *x >= v.lower - 1e-6 && *x <= v.upper + 1e-6,
                "{} = {x} outside [{}, {}]",
                v.name,
                v.lower,
                v.upper
            );
        }
    }
    Ok(result)
}

fn base_model(
    instance: &Instance,
    scenarios: &ScenarioSet,
    config: &HeuristicConfig,
) -> Result<MilpModel, HeuristicError> {
    let model = build_saa(instance, scenarios, compute_big_m(instance, scenarios))?;
    Ok(if config.relax_lambda {
        relax_lambda(&model)
    } else {
        model
    })
}

fn average_cost(instance: &Instance, scenarios: &ScenarioSet, schedule: &Schedule) -> f64 {
    evaluate_cost(instance, schedule, scenarios)
        .map(|r| r.average.total)
        .unwrap_or(f64::INFINITY)
}

/// Result for a known schedule, priced in `model`.
fn result_for(
    model: &MilpModel,
    instance: &Instance,
    scenarios: &ScenarioSet,
    schedule: &Schedule,
    warnings: Vec<String>,
) -> Result<SolveResult, HeuristicError> {
    let values = schedule_values(model, instance, scenarios, schedule)?;
    Ok(SolveResult {
        schedule: Some(schedule.clone()),
        objective: Some(model.objective(&values)),
        bound: None,
        gap: None,
        status: Status::Feasible,
        values: Some(values),
        warnings,
    })
}

/// Picks the phase-two result unless `fallback` costs strictly less or the
/// phase-two schedule is unusable.
fn safeguard(
    model: &MilpModel,
    instance: &Instance,
    scenarios: &ScenarioSet,
    phase2: Option<SolveResult>,
    fallback: &Schedule,
    mut warnings: Vec<String>,
) -> Result<TwoPhase, HeuristicError> {
    let done = |result| TwoPhase {
        result,
        baseline: fallback.clone(),
    };
    if let Some(mut r) = phase2 {
        if let Some(s) = r.schedule.clone() {
            if check_feasibility(instance, &s).is_empty()
                && average_cost(instance, scenarios, &s)
                    <= average_cost(instance, scenarios, fallback) + 1e-9
            {
                warnings.append(&mut r.warnings);
                r.warnings = warnings;
                return Ok(done(r));
            }
            warnings.push("phase two did not improve; keeping the earlier schedule".into());
        }
    }
    result_for(model, instance, scenarios, fallback, warnings).map(done)
}

fn activity_fixations(
    model: &MilpModel,
    instance: &Instance,
    scenarios: &ScenarioSet,
    schedule: &Schedule,
) -> Result<Vec<Fixation>, HeuristicError> {
    let values = schedule_values(model, instance, scenarios, &schedule.without_batteries())?;
    Ok(model
        .vars
        .iter()
        .zip(values)
        .filter(|(v, _)| Family::ACTIVITY.contains(&v.key.family()))
        .map(|(v, x)| Fixation::var(v.key, x))
        .collect())
}

/// Warm-start path. Requires `config.initial`.
pub fn warmstart_two_phase(
    instance: &Instance,
    scenarios: &ScenarioSet,
    config: &HeuristicConfig,
) -> Result<TwoPhase, HeuristicError> {
    let initial = config
        .initial
        .as_ref()
        .ok_or_else(|| HeuristicError::Config("warm start requires an initial solution".into()))?;
    if !initial.matches_shape(instance) {
        return Err(HeuristicError::Config(
            "initial solution does not match the instance".into(),
        ));
    }
    let violations = check_feasibility(instance, initial);
    if !violations.is_empty() {
        return Err(HeuristicError::InfeasibleInitial(violations));
    }
    let model = base_model(instance, scenarios, config)?;
    let mut warnings = Vec::new();

    let mut phase1_model = model.clone();
    phase1_model.relax_family(Family::Charge);
    phase1_model.relax_family(Family::Discharge);
    let start = schedule_values(&phase1_model, instance, scenarios, initial).ok();
    let phase1 = fix_and_optimize(
        &phase1_model,
        instance,
        scenarios,
        &[],
        &config.backend(config.phase1),
        start,
    );
    let activities = match phase1 {
        Ok(SolveResult {
            schedule: Some(s), ..
        }) => s,
        Ok(r) => {
            warnings.push(format!(
                "phase one ended {}; using the initial activities",
                r.status
            ));
            initial.clone()
        }
        Err(e) => {
            warnings.push(format!(
                "phase one failed ({e}); using the initial activities"
            ));
            initial.clone()
        }
    };

    let fixations = activity_fixations(&model, instance, scenarios, &activities)?;
    let start = if activities.starts == initial.starts {
        initial.clone()
    } else {
        activities.without_batteries()
    };
    let incumbent = schedule_values(&model, instance, scenarios, &start).ok();
    let phase2 = match fix_and_optimize(
        &model,
        instance,
        scenarios,
        &fixations,
        &config.backend(config.phase2),
        incumbent,
    ) {
        Ok(r) => Some(r),
        Err(e) => {
            warnings.push(format!("phase two failed ({e})"));
            None
        }
    };
    safeguard(&model, instance, scenarios, phase2, initial, warnings)
}

/// Cold path: no initial solution needed.
pub fn cold_two_phase(
    instance: &Instance,
    scenarios: &ScenarioSet,
    config: &HeuristicConfig,
) -> Result<TwoPhase, HeuristicError> {
    let model = base_model(instance, scenarios, config)?;
    let mut warnings = Vec::new();

    let restrictions = |parity: Option<Parity>| {
        let mut f = vec![Fixation::fix(
            |k| matches!(k.family(), Family::Charge | Family::Discharge),
            0.0,
        )];
        for (a, act) in instance.activities.iter().enumerate() {
            if act.is_recurring() {
                continue;
            }
            for &t in &act.penalized {
                f.push(Fixation::var(
                    VarKey::Start {
                        activity: a,
                        slot: t,
                    },
                    0.0,
                ));
            }
            f.push(Fixation::var(VarKey::Penalized { activity: a }, 0.0));
        }
        if let Some(p) = parity {
            f.push(Fixation::fix(
                move |k| matches!(k, VarKey::Start { slot, .. } if !p.keeps(*slot)),
                0.0,
            ));
        }
        f
    };
    let idle = Schedule::idle(instance);
    let start = || {
        check_feasibility(instance, &idle)
            .is_empty()
            .then(|| schedule_values(&model, instance, scenarios, &idle).ok())
            .flatten()
    };

    let backend = config.backend(config.phase1);
    let mut phase1 = fix_and_optimize(
        &model,
        instance,
        scenarios,
        &restrictions(Some(config.parity)),
        &backend,
        start(),
    )?;
    if phase1.schedule.is_none() {
        warnings.push(format!(
            "phase one {} with starts restricted to {:?} slots; retrying without the restriction",
            phase1.status, config.parity
        ));
        log::warn!("{}", warnings.last().unwrap());
        phase1 = fix_and_optimize(
            &model,
            instance,
            scenarios,
            &restrictions(None),
            &backend,
            start(),
        )?;
    }
    let Some(first) = phase1.schedule else {
        return Err(HeuristicError::Phase1Infeasible);
    };
    let first = first.without_batteries();

    let mut fixations = Vec::new();
    for (a, s) in first.starts.iter().enumerate() {
        if let Some(s1) = *s {
            let w = config.window;
            fixations.push(Fixation::var(VarKey::Scheduled { activity: a }, 1.0));
            fixations.push(Fixation::fix(
                move |k| matches!(*k, VarKey::Start { activity, slot } if activity == a && slot.abs_diff(s1) > w),
                0.0,
            ));
        }
    }
    let incumbent = schedule_values(&model, instance, scenarios, &first).ok();
    let phase2 = match fix_and_optimize(
        &model,
        instance,
        scenarios,
        &fixations,
        &config.backend(config.phase2),
        incumbent,
    ) {
        Ok(r) => Some(r),
        Err(e) => {
            warnings.push(format!("phase two failed ({e})"));
            None
        }
    };
    safeguard(&model, instance, scenarios, phase2, &first, warnings)
}
