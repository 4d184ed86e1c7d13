//! Variable-value solution files: one `<name> <value>` pair per line, `#`
//! starts a comment.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Problem, SolveResult, Status};
use crate::evaluator::{check_assignment, derive_assignment, Violation};
use crate::model::{schedule_values, BuildError, Domain, MilpModel, VarKey};
use crate::schedule::{Action, Schedule};

/// Binary values closer than this to one half are rejected as ambiguous.
pub const SNAP_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ImportError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown variable '{name}'")]
    UnknownVariable { line: usize, name: String },
    #[error("binary variable {name} = {value} is too close to 0.5 to round")]
    Ambiguous { name: String, value: f64 },
    #[error("imported solution is infeasible: {}", list(.0))]
    Infeasible(Vec<Violation>),
    #[error(transparent)]
    Build(#[from] BuildError),
}

fn list(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Values by model variable index; `None` for variables the file omits.
pub fn read_solution_values(
    text: &str,
    model: &MilpModel,
) -> Result<Vec<Option<f64>>, ImportError> {
    let mut out = vec![None; model.vars.len()];
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        let [name, value] = fields[..] else {
            return Err(ImportError::Syntax {
                line,
                message: format!("expected '<name> <value>', got '{body}'"),
            });
        };
        let value: f64 = value.parse().map_err(|_| ImportError::Syntax {
            line,
            message: format!("invalid number '{value}'"),
        })?;
        let j = model
            .var_by_name(name)
            .ok_or_else(|| ImportError::UnknownVariable {
                line,
                name: name.to_string(),
            })?;
        out[j] = Some(value);
    }
    Ok(out)
}

/// `<name> <value>` for every variable, in model order.
pub fn write_solution_values(model: &MilpModel, values: &[f64]) -> String {
    let mut out = String::new();
    for (v, x) in model.vars.iter().zip(values) {
        writeln!(out, "{} {x:?}", v.name).unwrap();
    }
    out
}

/// Rebuilds a schedule from solver output and checks it.
///
/// Binary values are rounded at one half. The schedule comes from the start
/// and battery indicators; every other value present in the file is checked
/// against the rules alongside them. Batteries absent from the file are idle.
pub fn import_solution(text: &str, problem: &Problem<'_>) -> Result<SolveResult, ImportError> {
    let (model, instance) = (problem.model, problem.instance);
    let mut raw = read_solution_values(text, model)?;
    for (v, x) in model.vars.iter().zip(raw.iter_mut()) {
        if let (Domain::Binary, Some(x)) = (v.domain, x.as_mut()) {
            if (*x - 0.5).abs() <= SNAP_TOL {
                return Err(ImportError::Ambiguous {
                    name: v.name.clone(),
                    value: *x,
                });
            }
            *x = if *x > 0.5 { 1.0 } else { 0.0 };
        }
    }

    let mut warnings = Vec::new();
    let mut schedule = Schedule::idle(instance);
    let mut battery_seen = vec![false; instance.batteries.len()];
    let mut starts: Vec<Vec<u32>> = vec![Vec::new(); instance.activities.len()];
    for (v, x) in model.vars.iter().zip(&raw) {
        let Some(x) = *x else { continue };
        match v.key {
            VarKey::Start { activity, slot } if x == 1.0 => starts[activity].push(slot),
            VarKey::Charge { battery, slot } => {
                battery_seen[battery] = true;
                if x == 1.0 {
                    schedule.set_action(battery, slot, Action::Charge);
                }
            }
            VarKey::Discharge { battery, slot } => {
                battery_seen[battery] = true;
                if x == 1.0 && schedule.action(battery, slot) == Action::Idle {
                    schedule.set_action(battery, slot, Action::Discharge);
                }
            }
            _ => {}
        }
    }
    for (b, seen) in battery_seen.iter().enumerate() {
        if !seen && !instance.batteries.is_empty() {
            warnings.push(format!(
                "battery {} missing from solution; treated as idle",
                instance.batteries[b].id
            ));
        }
    }
    for (a, s) in starts.iter_mut().enumerate() {
        s.sort_unstable();
        schedule.starts[a] = s.first().copied();
    }

    let mut asg = derive_assignment(instance, &schedule);
    let mut progress_given = vec![false; instance.activities.len()];
    let mut progress: Vec<Vec<u32>> = vec![Vec::new(); instance.activities.len()];
    for (v, x) in model.vars.iter().zip(&raw) {
        let Some(x) = *x else { continue };
        match v.key {
            VarKey::Progress { activity, slot } => {
                progress_given[activity] = true;
                if x == 1.0 {
                    progress[activity].push(slot);
                }
            }
            VarKey::Scheduled { activity } => asg.activities[activity].scheduled = x == 1.0,
            VarKey::Penalized { activity } => asg.activities[activity].penalized = x == 1.0,
            VarKey::Day { activity } => asg.activities[activity].day = x,
            VarKey::Charge { battery, slot } => {
                asg.batteries[battery].charge[slot as usize - 1] = x == 1.0
            }
            VarKey::Discharge { battery, slot } => {
                asg.batteries[battery].discharge[slot as usize - 1] = x == 1.0
            }
            VarKey::State { battery, slot } => asg.batteries[battery].state[slot as usize - 1] = x,
            _ => {}
        }
    }
    for (a, act) in asg.activities.iter_mut().enumerate() {
        act.starts = starts[a].clone();
        if progress_given[a] {
            act.progress = std::mem::take(&mut progress[a]);
            act.progress.sort_unstable();
        }
    }
    let violations = check_assignment(instance, &asg);
    if !violations.is_empty() {
        return Err(ImportError::Infeasible(violations));
    }

    let values = schedule_values(model, instance, problem.scenarios, &schedule)?;
    Ok(SolveResult {
        schedule: Some(schedule),
        objective: Some(model.objective(&values)),
        bound: None,
        gap: None,
        status: Status::Feasible,
        values: Some(values),
        warnings,
    })
}
