//! Exhaustive search over activity starts and battery actions.
//!
//! Room, precedence and state-of-charge rules are checked here directly
//! rather than through the evaluator's feasibility checker, so the oracle
//! and the checker can be compared against each other. Each surviving
//! schedule is priced with the true `ceil(peak)^2` charge.

use rayon::prelude::*;

use super::{SolveError, SolveResult, Status};
use crate::evaluator::{evaluate_cost, peak_charge};
use crate::instance::{Instance, ScenarioSet};
use crate::schedule::{Action, Schedule};

/// Largest search space accepted by default.
pub const DEFAULT_BUDGET: f64 = 1e7;

const TIE: f64 = 1e-9;
const SOC_TOL: f64 = 1e-9;
const CHUNK: usize = 1024;

/// Start choices per activity: unscheduled plus each allowed start for
/// once-off activities, allowed starts only for recurring ones.
fn start_options(instance: &Instance) -> Vec<Vec<Option<u32>>> {
    instance
        .activities
        .iter()
        .map(|a| {
            let mut v: Vec<Option<u32>> = Vec::new();
            if !a.is_recurring() {
                v.push(None);
            }
            v.extend(a.starts.iter().map(|&t| Some(t)));
            v
        })
        .collect()
}

/// Activity-start combinations times `3^(batteries * slots)`.
pub fn search_space(instance: &Instance) -> f64 {
    let combos: f64 = start_options(instance)
        .iter()
        .map(|o| o.len() as f64)
        .product();
    let cells = instance.batteries.len() as f64 * f64::from(instance.slots());
    combos * 3f64.powf(cells)
}

struct Candidate {
    cost: f64,
    schedule: Schedule,
}

fn better(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            if b.cost < a.cost - TIE || (b.cost <= a.cost + TIE && b.schedule < a.schedule) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

/// Global optimum by enumeration. Fails when the search space exceeds
/// `budget`; reports `Infeasible` when no schedule satisfies the rules.
pub fn solve_exact_small(
    instance: &Instance,
    scenarios: &ScenarioSet,
    budget: f64,
) -> Result<SolveResult, SolveError> {
    let size = search_space(instance);
    if size > budget {
        return Err(SolveError::BudgetExceeded { size, budget });
    }
    let options = start_options(instance);
    let total: usize = options.iter().map(Vec::len).product();
    let search = Search::new(instance, scenarios);

    let chunks: Vec<Option<Candidate>> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut best = None;
            for k in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let starts = decode(&options, k);
                best = better(best, search.best_for(&starts));
            }
            best
        })
        .collect();
    let best = chunks.into_iter().fold(None, better);

    let Some(best) = best else {
        return Ok(SolveResult::infeasible());
    };
    let objective = evaluate_cost(instance, &best.schedule, scenarios)
        .expect("scenario shape checked by caller")
        .average
        .total;
    Ok(SolveResult {
        schedule: Some(best.schedule),
        objective: Some(objective),
        bound: Some(objective),
        gap: Some(0.0),
        status: Status::Optimal,
        values: None,
        warnings: Vec::new(),
    })
}

/// Feasibility by direct simulation, independent of the constraint
/// checker: allowed starts, room capacity, precedence and charge bounds.
pub fn oracle_feasible(instance: &Instance, schedule: &Schedule) -> bool {
    let n = instance.slots() as usize;
    if schedule.starts.len() != instance.activities.len()
        || schedule.battery.len() != instance.batteries.len()
        || schedule.battery.iter().any(|b| b.len() != n)
    {
        return false;
    }
    let starts_ok = instance
        .activities
        .iter()
        .zip(&schedule.starts)
        .all(|(a, s)| match s {
            Some(t) => a.starts.contains(t),
            None => !a.is_recurring(),
        });
    if !starts_ok || !activities_ok(instance, &schedule.starts) {
        return false;
    }
    instance
        .batteries
        .iter()
        .zip(&schedule.battery)
        .all(|(bat, actions)| {
            let mut soc = bat.initial;
            actions.iter().all(|a| {
                match a {
                    Action::Idle => {}
                    Action::Charge => soc += bat.slot_energy(),
                    Action::Discharge => soc -= bat.slot_energy(),
                }
                (-SOC_TOL..=bat.capacity + SOC_TOL).contains(&soc)
            })
        })
}

/// Mixed-radix decoding; the first activity varies slowest.
fn decode(options: &[Vec<Option<u32>>], mut k: usize) -> Vec<Option<u32>> {
    let mut out = vec![None; options.len()];
    for (a, o) in options.iter().enumerate().rev() {
        out[a] = o[k % o.len()];
        k /= o.len();
    }
    out
}

/// Slots of the horizon occupied by activity `a` started at `start`.
fn slots_of(instance: &Instance, a: usize, start: u32) -> Vec<u32> {
    let act = &instance.activities[a];
    let h = &instance.horizon;
    let reps = if act.is_recurring() { h.weeks() } else { 1 };
    (0..reps)
        .flat_map(|w| start + w * h.week..start + w * h.week + act.duration)
        .filter(|&t| t <= h.slots)
        .collect()
}

fn activities_ok(instance: &Instance, starts: &[Option<u32>]) -> bool {
    let inst = instance;
    let h = &inst.horizon;
    let n = h.slots as usize;
    let mut small = vec![0u32; n];
    let mut large = vec![0u32; n];
    for (a, s) in starts.iter().enumerate() {
        if let Some(s) = *s {
            let act = &inst.activities[a];
            for t in slots_of(inst, a, s) {
                small[t as usize - 1] += act.small_rooms;
                large[t as usize - 1] += act.large_rooms;
            }
        }
    }
    if small.iter().any(|&u| u > inst.rooms.small) || large.iter().any(|&u| u > inst.rooms.large) {
        return false;
    }
    let day = |s: Option<u32>| s.map_or(h.unscheduled_day(), |t| t / h.day);
    inst.precedence_pairs().into_iter().all(|(p, a)| {
        let (sp, sa) = (starts[p], starts[a]);
        if sa.is_some() && sp.is_none() {
            return false;
        }
        day(sp) + u32::from(sp.is_some()) <= day(sa)
    })
}

struct Search<'a> {
    instance: &'a Instance,
    scenarios: &'a ScenarioSet,
    weight: f64,
}

struct Dfs<'a> {
    instance: &'a Instance,
    loads: Vec<Vec<f64>>,
    weight: f64,
    fixed: f64,
    starts: Vec<Option<u32>>,
    path: Vec<Vec<Action>>,
    best: Option<Candidate>,
}

impl<'a> Search<'a> {
    fn new(instance: &'a Instance, scenarios: &'a ScenarioSet) -> Self {
        Search {
            instance,
            scenarios,
            weight: 1.0 / scenarios.count() as f64,
        }
    }

    fn best_for(&self, starts: &[Option<u32>]) -> Option<Candidate> {
        if !activities_ok(self.instance, starts) {
            return None;
        }
        let inst = self.instance;
        let mut extra = vec![0.0; inst.slots() as usize];
        let mut fixed = 0.0;
        for (a, s) in starts.iter().enumerate() {
            if let Some(s) = *s {
                let act = &inst.activities[a];
                for t in slots_of(inst, a, s) {
                    extra[t as usize - 1] += act.load();
                }
                if !act.is_recurring() {
                    fixed -= act.revenue;
                    if act.is_penalized_start(s) {
                        fixed += act.penalty;
                    }
                }
            }
        }
        let loads = self
            .scenarios
            .iter()
            .map(|base| base.iter().zip(&extra).map(|(b, e)| b + e).collect())
            .collect();
        let mut dfs = Dfs {
            instance: inst,
            loads,
            weight: self.weight,
            fixed,
            starts: starts.to_vec(),
            path: vec![Vec::with_capacity(inst.slots() as usize); inst.batteries.len()],
            best: None,
        };
        let socs: Vec<f64> = inst.batteries.iter().map(|b| b.initial).collect();
        let s = dfs.loads.len();
        dfs.descend(0, &socs, &vec![0.0; s], &vec![0.0; s]);
        dfs.best
    }
}

impl Dfs<'_> {
    fn descend(&mut self, t: usize, socs: &[f64], energy: &[f64], peak: &[f64]) {
        let inst = self.instance;
        if t == inst.slots() as usize {
            let mut cost = self.fixed;
            for (e, p) in energy.iter().zip(peak) {
                cost += self.weight * (e / 4000.0 + peak_charge(*p));
            }
            let improves = match &self.best {
                None => true,
                Some(b) => cost < b.cost - TIE,
            };
            let ties = !improves && self.best.as_ref().is_some_and(|b| cost <= b.cost + TIE);
            if improves || ties {
                let schedule = Schedule {
                    starts: self.starts.clone(),
                    battery: self.path.clone(),
                };
                self.best = better(self.best.take(), Some(Candidate { cost, schedule }));
            }
            return;
        }
        let nb = inst.batteries.len();
        let combos = 3usize.pow(nb as u32);
        let price = inst.prices[t];
        let mut next_soc = socs.to_vec();
        'combo: for k in 0..combos {
            let mut delta = 0.0;
            let mut code = k;
            for (b, bat) in inst.batteries.iter().enumerate() {
                let action = Action::ALL[code % 3];
                code /= 3;
                let soc = match action {
                    Action::Idle => socs[b],
                    Action::Charge => socs[b] + bat.slot_energy(),
                    Action::Discharge => socs[b] - bat.slot_energy(),
                };
                if soc < -SOC_TOL || soc > bat.capacity + SOC_TOL {
                    for p in &mut self.path[..b] {
                        p.pop();
                    }
                    continue 'combo;
                }
                next_soc[b] = soc;
                delta += match action {
                    Action::Idle => 0.0,
                    Action::Charge => bat.charge_load(),
                    Action::Discharge => bat.discharge_load(),
                };
                self.path[b].push(action);
            }
            let mut e2 = energy.to_vec();
            let mut p2 = peak.to_vec();
            for (s, series) in self.loads.iter().enumerate() {
                let l = series[t] + delta;
                e2[s] += price * l;
                p2[s] = p2[s].max(l.abs());
            }
            self.descend(t + 1, &next_soc, &e2, &p2);
            for p in &mut self.path {
                p.pop();
            }
        }
    }
}
