//! Best-first branch-and-bound over the binary variables of a model, with
//! bounds from its LP relaxation.
//!
//! Children are solved lazily: an open node stores its parent's LP solution
//! and the one variable to fix, and inherits the parent's bound until it is
//! popped. Among equal bounds the most recent node is expanded first, which
//! makes the search dive towards incumbents.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::Instant;

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Solution, Variable};

use super::{relative_gap, schedule_from_values, Limits, Problem, SolveError, SolveResult, Status};
use crate::model::{schedule_values, Domain, Family, Sense, VarKey};
use crate::schedule::{Action, Schedule};

const INT_TOL: f64 = 1e-6;
const FEAS_TOL: f64 = 1e-6;
const PRUNE_TOL: f64 = 1e-7;

/// Builds a feasible point from a fractional LP solution, if it can.
pub trait RoundingHeuristic {
    fn round(&self, problem: &Problem<'_>, lp: &[f64]) -> Option<Vec<f64>>;
}

/// Starts each activity at its largest start indicator when it is
/// (mostly) scheduled, takes battery actions above one half while the
/// state of charge allows, and derives everything else from that schedule.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScheduleRounding;

impl RoundingHeuristic for ScheduleRounding {
    fn round(&self, problem: &Problem<'_>, lp: &[f64]) -> Option<Vec<f64>> {
        let (model, instance) = (problem.model, problem.instance);
        let mut schedule = Schedule::idle(instance);
        let mut best_z = vec![0.0; instance.activities.len()];
        let mut scheduled = vec![false; instance.activities.len()];
        for (v, &x) in model.vars.iter().zip(lp) {
            match v.key {
                VarKey::Scheduled { activity } => scheduled[activity] = x >= 0.5,
                VarKey::Start { activity, slot } if x > best_z[activity] + INT_TOL => {
                    best_z[activity] = x;
                    schedule.starts[activity] = Some(slot);
                }
                _ => {}
            }
        }
        for (a, act) in instance.activities.iter().enumerate() {
            if !act.is_recurring() && !scheduled[a] {
                schedule.starts[a] = None;
            }
        }
        let fallback = schedule_from_values(model, instance, lp);
        for (b, bat) in instance.batteries.iter().enumerate() {
            let mut soc = bat.initial;
            for t in 1..=instance.slots() {
                let action = fallback.action(b, t);
                let next = match action {
                    Action::Idle => soc,
                    Action::Charge => soc + bat.slot_energy(),
                    Action::Discharge => soc - bat.slot_energy(),
                };
                if (-1e-9..=bat.capacity + 1e-9).contains(&next) {
                    schedule.set_action(b, t, action);
                    soc = next;
                }
            }
        }
        let values = schedule_values(model, instance, problem.scenarios, &schedule).ok()?;
        (model.max_violation(&values) <= FEAS_TOL).then_some(values)
    }
}

pub struct BnbOptions<'a> {
    pub limits: Limits,
    /// Known feasible values used as the first incumbent.
    pub incumbent: Option<Vec<f64>>,
    pub rounding: Option<&'a dyn RoundingHeuristic>,
}

impl Default for BnbOptions<'_> {
    fn default() -> Self {
        BnbOptions {
            limits: Limits::default(),
            incumbent: None,
            rounding: Some(&ScheduleRounding),
        }
    }
}

struct Node {
    bound: f64,
    id: u64,
    parent: Rc<Solution>,
    fix: (usize, f64),
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Max-heap order: lowest bound first, then newest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.id.cmp(&other.id))
    }
}

fn priority(family: Family) -> u8 {
    match family {
        Family::Start | Family::Scheduled | Family::Penalized => 0,
        Family::Charge | Family::Discharge => 1,
        Family::Progress => 2,
        Family::Lambda => 3,
        _ => 4,
    }
}

struct Search<'a, 'p> {
    problem: &'a Problem<'p>,
    lp_vars: Vec<Variable>,
    rounding: Option<&'a dyn RoundingHeuristic>,
    incumbent: Option<(f64, Vec<f64>)>,
    heap: BinaryHeap<Node>,
    next_id: u64,
}

impl Search<'_, '_> {
    fn offer(&mut self, values: Vec<f64>) {
        let obj = self.problem.model.objective(&values);
        if self
            .incumbent
            .as_ref()
            .is_none_or(|(best, _)| obj < best - PRUNE_TOL)
        {
            log::debug!("incumbent {obj}");
            self.incumbent = Some((obj, values));
        }
    }

    fn cutoff(&self) -> f64 {
        self.incumbent
            .as_ref()
            .map_or(f64::INFINITY, |(v, _)| v - PRUNE_TOL)
    }

    fn process(&mut self, sol: Solution) {
        let bound = sol.objective();
        if bound >= self.cutoff() {
            return;
        }
        let model = self.problem.model;
        let lp: Vec<f64> = self.lp_vars.iter().map(|&v| sol.var_value_raw(v)).collect();
        if let Some(r) = self.rounding {
            if let Some(values) = r.round(self.problem, &lp) {
                self.offer(values);
            }
        }
        let branch = model
            .vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.domain == Domain::Binary)
            .map(|(j, v)| (j, v, (lp[j] - lp[j].round()).abs()))
            .filter(|&(_, _, f)| f > INT_TOL)
            .min_by(|a, b| {
                priority(a.1.key.family())
                    .cmp(&priority(b.1.key.family()))
                    .then(b.2.total_cmp(&a.2))
                    .then(a.0.cmp(&b.0))
            })
            .map(|(j, _, _)| j);
        match branch {
            None => {
                let mut values = lp;
                for (x, v) in values.iter_mut().zip(&model.vars) {
                    if v.domain == Domain::Binary {
                        *x = x.round();
                    }
                }
                // Prefer values derived exactly from the schedule over the
                // LP's floating-point ones when they are as good.
                let schedule = schedule_from_values(model, self.problem.instance, &values);
                let exact = schedule_values(
                    model,
                    self.problem.instance,
                    self.problem.scenarios,
                    &schedule,
                )
                .ok()
                .filter(|e| {
                    model.max_violation(e) <= FEAS_TOL
                        && model.objective(e) <= model.objective(&values) + PRUNE_TOL
                });
                if let Some(e) = exact {
                    self.offer(e);
                } else if model.max_violation(&values) <= FEAS_TOL {
                    self.offer(values);
                } else if let Some(values) = ScheduleRounding.round(self.problem, &values) {
                    self.offer(values);
                }
            }
            Some(j) => {
                if bound >= self.cutoff() {
                    return;
                }
                let parent = Rc::new(sol);
                let preferred = lp[j].round();
                for value in [1.0 - preferred, preferred] {
                    self.heap.push(Node {
                        bound,
                        id: self.next_id,
                        parent: Rc::clone(&parent),
                        fix: (j, value),
                    });
                    self.next_id += 1;
                }
            }
        }
    }
}

/// Minimises `problem.model` over its binary variables.
pub fn branch_and_bound(
    problem: &Problem<'_>,
    options: &BnbOptions<'_>,
) -> Result<SolveResult, SolveError> {
    let started = Instant::now();
    let model = problem.model;
    let mut lp = microlp::Problem::new(OptimizationDirection::Minimize);
    let lp_vars: Vec<Variable> = model
        .vars
        .iter()
        .map(|v| lp.add_var(v.cost, (v.lower, v.upper)))
        .collect();
    for r in &model.rows {
        let expr: LinearExpr = r.terms.iter().map(|&(j, c)| (lp_vars[j], c)).collect();
        let op = match r.sense {
            Sense::Le => ComparisonOp::Le,
            Sense::Eq => ComparisonOp::Eq,
            Sense::Ge => ComparisonOp::Ge,
        };
        lp.add_constraint(expr, op, r.rhs);
    }

    let mut search = Search {
        problem,
        lp_vars,
        rounding: options.rounding,
        incumbent: None,
        heap: BinaryHeap::new(),
        next_id: 0,
    };
    let mut warnings = Vec::new();
    if let Some(values) = &options.incumbent {
        let violation = model.max_violation(values);
        if values.len() == model.vars.len() && violation <= FEAS_TOL {
            search.offer(values.clone());
        } else {
            warnings.push(format!(
                "warm-start incumbent rejected (violation {violation:.3e})"
            ));
        }
    }

    let root = match lp.solve() {
        Ok(outcome) => outcome
            .into_solution()
            .map_err(|_| SolveError::Lp("root relaxation interrupted".into()))?,
        Err(microlp::Error::Infeasible) => {
            let mut r = SolveResult::infeasible();
            r.warnings = warnings;
            return Ok(r);
        }
        Err(e) => return Err(SolveError::Lp(e.to_string())),
    };
    let root_bound = root.objective();
    search.process(root);

    let mut expanded = 0usize;
    let mut stopped = false;
    while let Some(node) = search.heap.peek() {
        if node.bound >= search.cutoff() {
            search.heap.clear();
            break;
        }
        let out_of_nodes = options.limits.nodes.is_some_and(|n| expanded >= n);
        let out_of_time = options.limits.time.is_some_and(|d| started.elapsed() >= d);
        if out_of_nodes || out_of_time {
            stopped = true;
            break;
        }
        let node = search.heap.pop().expect("peeked");
        expanded += 1;
        let (j, value) = node.fix;
        let parent = Rc::try_unwrap(node.parent).unwrap_or_else(|rc| (*rc).clone());
        match parent.fix_var(search.lp_vars[j], value) {
            Ok(outcome) => match outcome.into_solution() {
                Ok(sol) => search.process(sol),
                Err(_) => return Err(SolveError::Lp("node relaxation interrupted".into())),
            },
            Err(microlp::Error::Infeasible) => {}
            Err(e) => return Err(SolveError::Lp(e.to_string())),
        }
    }
    log::debug!(
        "branch-and-bound: {expanded} nodes, {:.3}s",
        started.elapsed().as_secs_f64()
    );

    let Some((objective, values)) = search.incumbent else {
        return Ok(SolveResult {
            status: if stopped {
                Status::Unknown
            } else {
                Status::Infeasible
            },
            bound: stopped.then_some(root_bound),
            warnings,
            ..SolveResult::infeasible()
        });
    };
    let bound = if stopped {
        search
            .heap
            .iter()
            .map(|n| n.bound)
            .fold(objective, f64::min)
            .max(root_bound)
    } else {
        objective
    };
    Ok(SolveResult {
        schedule: Some(schedule_from_values(model, problem.instance, &values)),
        objective: Some(objective),
        bound: Some(bound),
        gap: Some(relative_gap(objective, bound)),
        status: if stopped {
            Status::Feasible
        } else {
            Status::Optimal
        },
        values: Some(values),
        warnings,
    })
}
