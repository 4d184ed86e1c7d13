//! Ground-truth evaluation of schedules.
//!
//! Nothing here depends on the MILP model: the load profile, the quadratic
//! peak charge and the feasibility rules are recomputed from the instance and
//! the schedule alone, so the evaluator can be used to check any solver.

mod feasibility;
mod mase;

use std::fmt::Write;

use thiserror::Error;

use crate::instance::{Instance, ScenarioSet};
use crate::schedule::Schedule;

pub use feasibility::{
    check_assignment, check_feasibility, derive_assignment, ActivityAssignment, Assignment,
    BatteryAssignment, ConstraintFamily, Violation,
};
pub use mase::{compute_mase, MaseError};

/// Loads that are this close above an integer are treated as that integer
/// when taking the ceiling of the peak.
pub const CEIL_GUARD: f64 = 1e-9;

/// `ceil(x)` that ignores floating noise just above an integer.
pub fn guarded_ceil(x: f64) -> f64 {
    (x - CEIL_GUARD).ceil().max(0.0)
}

/// Peak charge in dollars for a peak load of `eta` kW.
pub fn peak_charge(eta: f64) -> f64 {
    let c = guarded_ceil(eta);
    0.005 * c * c
}

/// Energy cost in dollars: prices in $/MWh, loads in kW over 15-minute slots.
pub fn energy_cost(prices: &[f64], loads: &[f64]) -> f64 {
    neumaier_sum(prices.iter().zip(loads).map(|(p, l)| p * l)) / 4000.0
}

/// Compensated summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile {
    /// Aggregate load per slot (kW), index `t - 1`.
    pub loads: Vec<f64>,
    /// `max |load|`.
    pub peak: f64,
}

/// Aggregate grid load of `schedule` against one net base-load series.
pub fn compute_load_profile(instance: &Instance, schedule: &Schedule, base: &[f64]) -> LoadProfile {
    let mut loads = base.to_vec();
    for (b, battery) in instance.batteries.iter().enumerate() {
        let (up, down) = (battery.charge_load(), battery.discharge_load());
        for (t, action) in schedule.battery[b].iter().enumerate() {
            if action.charging() {
                loads[t] += up;
            } else if action.discharging() {
                loads[t] += down;
            }
        }
    }
    let horizon = &instance.horizon;
    for (a, activity) in instance.activities.iter().enumerate() {
        let Some(start) = schedule.starts[a] else {
            continue;
        };
        let load = activity.load();
        let repeats = if activity.is_recurring() {
            (0..horizon.weeks()).map(|w| w * horizon.week).collect()
        } else {
            vec![0]
        };
        for offset in repeats {
            for t in activity.occupied(start + offset) {
                if t >= 1 && t <= horizon.slots {
                    loads[t as usize - 1] += load;
                }
            }
        }
    }
    let peak = loads.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    LoadProfile { loads, peak }
}

/// Cost components in dollars.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub energy: f64,
    pub peak: f64,
    pub revenue: f64,
    pub penalty: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub scenarios: Vec<CostBreakdown>,
    pub average: CostBreakdown,
}

impl CostReport {
    /// CSV block: header, one row per scenario, then an `average` row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("scenario,energy,peak,revenue,penalty,total\n");
        let row = |s: &mut String, label: &str, c: &CostBreakdown| {
            writeln!(
                s,
                "{label},{},{},{},{},{}",
                c.energy, c.peak, c.revenue, c.penalty, c.total
            )
            .unwrap();
        };
        for (i, c) in self.scenarios.iter().enumerate() {
            row(&mut s, &format!("s{}", i + 1), c);
        }
        row(&mut s, "average", &self.average);
        s
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("scenario has {found} slots, horizon has {expected}")]
    ScenarioLength { expected: usize, found: usize },
    #[error("schedule shape does not match the instance")]
    ScheduleShape,
}

/// Scheduled-activity revenue and penalty; the same in every scenario.
pub fn revenue_and_penalty(instance: &Instance, schedule: &Schedule) -> (f64, f64) {
    let mut revenue = 0.0;
    let mut penalty = 0.0;
    for (a, activity) in instance.activities.iter().enumerate() {
        if activity.is_recurring() {
            continue;
        }
        if let Some(t) = schedule.starts[a] {
            revenue += activity.revenue;
            if activity.is_penalized_start(t) {
                penalty += activity.penalty;
            }
        }
    }
    (revenue, penalty)
}

/// Exact cost of a schedule in every scenario and on average, with the
/// true `ceil(peak)^2` charge.
pub fn evaluate_cost(
    instance: &Instance,
    schedule: &Schedule,
    scenarios: &ScenarioSet,
) -> Result<CostReport, EvalError> {
    if !schedule.matches_shape(instance) {
        return Err(EvalError::ScheduleShape);
    }
    let expected = instance.slots() as usize;
    if scenarios.slots() != expected {
        return Err(EvalError::ScenarioLength {
            expected,
            found: scenarios.slots(),
        });
    }
    let (revenue, penalty) = revenue_and_penalty(instance, schedule);
    let rows: Vec<CostBreakdown> = scenarios
        .iter()
        .map(|base| {
            let profile = compute_load_profile(instance, schedule, base);
            let energy = energy_cost(&instance.prices, &profile.loads);
            let peak = peak_charge(profile.peak);
            CostBreakdown {
                energy,
                peak,
                revenue,
                penalty,
                total: energy + peak - revenue + penalty,
            }
        })
        .collect();
    let n = rows.len() as f64;
    let mean = |f: fn(&CostBreakdown) -> f64| neumaier_sum(rows.iter().map(f)) / n;
    let average = CostBreakdown {
        energy: mean(|c| c.energy),
        peak: mean(|c| c.peak),
        revenue,
        penalty,
        total: mean(|c| c.total),
    };
    Ok(CostReport {
        scenarios: rows,
        average,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;
    use crate::schedule::Action;

    fn tiny() -> Instance {
        let mut doc = String::from(
            "horizon 8 4 8\nrooms 1 1\nbattery b1 2 1 4 1\n\
             activity a1 onceoff 2 1 0 2 50 10\nstarts a1 1 2 3 4 5 6 7\npenalized a1 5 6 7\n",
        );
        for t in 1..=8 {
            doc.push_str(&format!("price {t} 100\n"));
        }
        parse_instance(&doc).unwrap()
    }

    #[test]
    fn load_profile_hand_values() {
        let inst = tiny();
        let base = [10.0; 8];
        let mut s = Schedule::idle(&inst);
        assert_eq!(compute_load_profile(&inst, &s, &base).loads, base.to_vec());

        s.starts[0] = Some(1);
        let p = compute_load_profile(&inst, &s, &base);
        assert_eq!(
            p.loads,
            vec![12.0, 12.0, 10.0, 10.0, 10.0, 10.0, 10.0, 10.0]
        );
        assert_eq!(p.peak, 12.0);

        s.set_action(0, 1, Action::Discharge);
        s.set_action(0, 2, Action::Discharge);
        let p = compute_load_profile(&inst, &s, &base);
        assert_eq!(&p.loads[..3], &[8.0, 8.0, 10.0]);
        assert_eq!(p.peak, 10.0);
    }

    #[test]
    fn cost_hand_values() {
        let inst = tiny();
        let sc = ScenarioSet::replicate(&[10.0; 8], 1).unwrap();
        let mut s = Schedule::idle(&inst);
        s.starts[0] = Some(1);
        let r = evaluate_cost(&inst, &s, &sc).unwrap();
        assert!((r.average.energy - 2.1).abs() < 1e-12);
        assert!((r.average.peak - 0.72).abs() < 1e-12);
        assert!((r.average.total - -47.18).abs() < 1e-12);

        s.starts[0] = Some(5);
        let r5 = evaluate_cost(&inst, &s, &sc).unwrap();
        assert_eq!(r5.average.penalty, 10.0);
        assert!((r5.average.total - r.average.total - 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_case() {
        let mut inst = tiny();
        inst.activities.clear();
        inst.batteries.clear();
        inst.prices = vec![0.0; 8];
        let sc = ScenarioSet::replicate(&[0.0; 8], 2).unwrap();
        let r = evaluate_cost(&inst, &Schedule::idle(&inst), &sc).unwrap();
        assert_eq!(r.average.total, 0.0);
        assert_eq!(r.scenarios.len(), 2);
    }

    #[test]
    fn ceil_guard() {
        assert_eq!(guarded_ceil(12.0), 12.0);
        assert_eq!(guarded_ceil(12.0 + 1e-12), 12.0);
        assert_eq!(guarded_ceil(12.0 - 1e-12), 12.0);
        assert_eq!(guarded_ceil(11.5), 12.0);
        assert_eq!(guarded_ceil(0.0), 0.0);
        assert!((peak_charge(12.0) - 0.72).abs() < 1e-15);
    }

    #[test]
    fn scenario_length_mismatch() {
        let inst = tiny();
        let sc = ScenarioSet::replicate(&[10.0; 7], 1).unwrap();
        assert!(matches!(
            evaluate_cost(&inst, &Schedule::idle(&inst), &sc),
            Err(EvalError::ScenarioLength { .. })
        ));
    }

    #[test]
    fn csv_block_has_average_row() {
        let inst = tiny();
        let sc = ScenarioSet::new(vec![vec![10.0; 8], vec![12.0; 8]]).unwrap();
        let csv = evaluate_cost(&inst, &Schedule::idle(&inst), &sc)
            .unwrap()
            .to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("average,"));
    }
}
