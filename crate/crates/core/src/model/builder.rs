use thiserror::Error;

use super::{Domain, Family, MilpModel, RowKind, Sense, VarKey};
use crate::evaluator::guarded_ceil;
use crate::instance::{Instance, ScenarioSet};
use crate::schedule::Schedule;

/// Coefficient of the peak-level objective term.
pub const PEAK_PRICE: f64 = 0.005;
/// Converts $/MWh times kW over a 15-minute slot into dollars.
pub const ENERGY_DIVISOR: f64 = 4000.0;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("scenario {scenario} has {found} slots, horizon has {expected}")]
    ScenarioLength {
        scenario: usize,
        expected: usize,
        found: usize,
    },
    #[error("price series has {found} slots, horizon has {expected}")]
    PriceLength { expected: usize, found: usize },
    #[error("big-M {m} is below the largest base load {load}")]
    BigMTooSmall { m: u32, load: f64 },
    #[error("schedule has no variable for {0}")]
    ScheduleOutsideModel(String),
    #[error("peak {peak} exceeds the model's {levels} peak levels")]
    PeakAboveLevels { peak: f64, levels: u32 },
}

/// Drops penalized start slots of once-off activities whose revenue does not
/// exceed their penalty. Such starts can never pay off.
pub fn preprocess_penalized_starts(instance: &Instance) -> Instance {
    let mut out = instance.clone();
    for a in &mut out.activities {
        if !a.is_recurring() && a.revenue - a.penalty <= 0.0 && !a.penalized.is_empty() {
            let penalized = std::mem::take(&mut a.penalized);
            a.starts.retain(|t| penalized.binary_search(t).is_err());
        }
    }
    out
}

/// Integer upper bound on the absolute aggregate load under any decision.
pub fn compute_big_m(instance: &Instance, scenarios: &ScenarioSet) -> u32 {
    let base = scenarios
        .iter()
        .flatten()
        .fold(0.0f64, |m, l| m.max(l.abs()));
    let batteries: f64 = instance.batteries.iter().map(|b| b.charge_load()).sum();
    let activities: f64 = instance.activities.iter().map(|a| a.load().abs()).sum();
    (base + batteries + activities).ceil() as u32
}

/// Single-scenario model.
pub fn build_deterministic(
    instance: &Instance,
    scenario: &[f64],
    big_m: u32,
) -> Result<MilpModel, BuildError> {
    let set =
        ScenarioSet::new(vec![scenario.to_vec()]).map_err(|_| BuildError::ScenarioLength {
            scenario: 1,
            expected: instance.slots() as usize,
            found: scenario.len(),
        })?;
    build(instance, &set, big_m, false)
}

/// Scenario-expanded model: first-stage decisions shared, load, peak and
/// peak levels duplicated per scenario, energy and peak terms averaged.
/// With a single scenario this is the deterministic model, names included.
pub fn build_saa(
    instance: &Instance,
    scenarios: &ScenarioSet,
    big_m: u32,
) -> Result<MilpModel, BuildError> {
    build(instance, scenarios, big_m, scenarios.count() > 1)
}

/// Copy of `model` with every peak-level variable continuous in `[0, 1]`.
pub fn relax_lambda(model: &MilpModel) -> MilpModel {
    let mut out = model.clone();
    out.relax_family(Family::Lambda);
    out
}

fn build(
    instance: &Instance,
    scenarios: &ScenarioSet,
    big_m: u32,
    expanded: bool,
) -> Result<MilpModel, BuildError> {
    let h = &instance.horizon;
    let slots = h.slots as usize;
    if instance.prices.len() != slots {
        return Err(BuildError::PriceLength {
            expected: slots,
            found: instance.prices.len(),
        });
    }
    for (s, series) in scenarios.iter().enumerate() {
        if series.len() != slots {
            return Err(BuildError::ScenarioLength {
                scenario: s + 1,
                expected: slots,
                found: series.len(),
            });
        }
        let peak = series.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        if peak > f64::from(big_m) {
            return Err(BuildError::BigMTooSmall {
                m: big_m,
                load: peak,
            });
        }
    }

    let n_scen = scenarios.count();
    let weight = 1.0 / n_scen as f64;
    let suffix = |s: usize| {
        if expanded {
            format!("_s{}", s + 1)
        } else {
            String::new()
        }
    };
    let mut m = MilpModel::new(big_m, n_scen, expanded);
    let inf = f64::INFINITY;

    // battery decisions
    let mut charge = Vec::new();
    let mut discharge = Vec::new();
    let mut state = Vec::new();
    for (b, bat) in instance.batteries.iter().enumerate() {
        let (mut xs, mut ys, mut ss) = (Vec::new(), Vec::new(), Vec::new());
        for t in 1..=h.slots {
            let id = &bat.id;
            xs.push(m.add_var(
                VarKey::Charge {
                    battery: b,
                    slot: t,
                },
                format!("x_{id}_t{t}"),
                Domain::Binary,
                0.0,
                1.0,
                0.0,
            ));
            ys.push(m.add_var(
                VarKey::Discharge {
                    battery: b,
                    slot: t,
                },
                format!("y_{id}_t{t}"),
                Domain::Binary,
                0.0,
                1.0,
                0.0,
            ));
            ss.push(m.add_var(
                VarKey::State {
                    battery: b,
                    slot: t,
                },
                format!("s_{id}_t{t}"),
                Domain::Continuous,
                0.0,
                bat.capacity,
                0.0,
            ));
        }
        charge.push(xs);
        discharge.push(ys);
        state.push(ss);
    }

    // activity decisions
    struct ActVars {
        starts: Vec<(u32, usize)>,
        progress: Vec<(u32, usize)>,
        scheduled: usize,
        penalized: Option<usize>,
        day: usize,
    }
    let mut acts = Vec::new();
    for (a, act) in instance.activities.iter().enumerate() {
        let id = &act.id;
        let starts = act
            .starts
            .iter()
            .map(|&t| {
                let j = m.add_var(
                    VarKey::Start {
                        activity: a,
                        slot: t,
                    },
                    format!("z_{id}_t{t}"),
                    Domain::Binary,
                    0.0,
                    1.0,
                    0.0,
                );
                (t, j)
            })
            .collect();
        let progress = act
            .progress_slots()
            .into_iter()
            .map(|t| {
                let j = m.add_var(
                    VarKey::Progress {
                        activity: a,
                        slot: t,
                    },
                    format!("v_{id}_t{t}"),
                    Domain::Binary,
                    0.0,
                    1.0,
                    0.0,
                );
                (t, j)
            })
            .collect();
        let revenue = if act.is_recurring() {
            0.0
        } else {
            -act.revenue
        };
        let scheduled = m.add_var(
            VarKey::Scheduled { activity: a },
            format!("w_{id}"),
            Domain::Binary,
            0.0,
            1.0,
            revenue,
        );
        let penalized = (!act.is_recurring()).then(|| {
            m.add_var(
                VarKey::Penalized { activity: a },
                format!("u_{id}"),
                Domain::Binary,
                0.0,
                1.0,
                act.penalty,
            )
        });
        let day = m.add_var(
            VarKey::Day { activity: a },
            format!("d_{id}"),
            Domain::Continuous,
            0.0,
            inf,
            0.0,
        );
        acts.push(ActVars {
            starts,
            progress,
            scheduled,
            penalized,
            day,
        });
    }

    // second-stage variables
    let mut loads = Vec::new();
    let mut peaks = Vec::new();
    let mut levels = Vec::new();
    for s in 0..n_scen {
        let sfx = suffix(s);
        loads.push(
            (1..=h.slots)
                .map(|t| {
                    m.add_var(
                        VarKey::Load {
                            slot: t,
                            scenario: s,
                        },
                        format!("l_t{t}{sfx}"),
                        Domain::Continuous,
                        -inf,
                        inf,
                        instance.prices[t as usize - 1] / ENERGY_DIVISOR * weight,
                    )
                })
                .collect::<Vec<_>>(),
        );
        peaks.push(m.add_var(
            VarKey::Peak { scenario: s },
            format!(
                "eta{}",
                if expanded {
                    format!("_s{}", s + 1)
                } else {
                    String::new()
                }
            ),
            Domain::Continuous,
            0.0,
            inf,
            0.0,
        ));
        levels.push(
            (1..=big_m)
                .map(|i| {
                    let fi = f64::from(i);
                    m.add_var(
                        VarKey::Lambda {
                            level: i,
                            scenario: s,
                        },
                        format!("lam_i{i}{sfx}"),
                        Domain::Binary,
                        0.0,
                        1.0,
                        PEAK_PRICE * fi * fi * weight,
                    )
                })
                .collect::<Vec<_>>(),
        );
    }

    // activity rows
    let unscheduled_day = f64::from(h.unscheduled_day());
    for (a, act) in instance.activities.iter().enumerate() {
        let v = &acts[a];
        let id = &act.id;
        for &(t, vj) in &v.progress {
            let mut terms: Vec<(usize, f64)> = v
                .starts
                .iter()
                .filter(|&&(s, _)| s <= t && t < s + act.duration)
                .map(|&(_, zj)| (zj, 1.0))
                .collect();
            terms.push((vj, -1.0));
            m.add_row(
                format!("link_{id}_t{t}"),
                RowKind::StartLinkage,
                terms,
                Sense::Eq,
                0.0,
            );
        }
        let mut terms: Vec<(usize, f64)> = v.progress.iter().map(|&(_, j)| (j, 1.0)).collect();
        terms.push((v.scheduled, -f64::from(act.duration)));
        m.add_row(
            format!("dur_{id}"),
            RowKind::Duration,
            terms,
            Sense::Eq,
            0.0,
        );

        let mut terms: Vec<(usize, f64)> = v.starts.iter().map(|&(_, j)| (j, 1.0)).collect();
        terms.push((v.scheduled, -1.0));
        m.add_row(
            format!("one_{id}"),
            RowKind::SingleStart,
            terms,
            Sense::Eq,
            0.0,
        );

        if let Some(u) = v.penalized {
            let mut terms: Vec<(usize, f64)> = v
                .starts
                .iter()
                .filter(|&&(t, _)| act.is_penalized_start(t))
                .map(|&(_, j)| (j, 1.0))
                .collect();
            terms.push((u, -1.0));
            m.add_row(
                format!("pen_{id}"),
                RowKind::PenalizedStart,
                terms,
                Sense::Eq,
                0.0,
            );
        }

        let mut terms: Vec<(usize, f64)> = v
            .starts
            .iter()
            .filter(|&&(t, _)| h.day_of(t) > 0)
            .map(|&(t, j)| (j, f64::from(h.day_of(t))))
            .collect();
        terms.push((v.scheduled, -unscheduled_day));
        terms.push((v.day, -1.0));
        m.add_row(
            format!("day_{id}"),
            RowKind::DayIndex,
            terms,
            Sense::Eq,
            -unscheduled_day,
        );

        if act.is_recurring() {
            m.add_row(
                format!("rec_{id}"),
                RowKind::RecurringScheduled,
                vec![(v.scheduled, 1.0)],
                Sense::Eq,
                1.0,
            );
        }
    }
    for (p, a) in instance.precedence_pairs() {
        let (pid, aid) = (&instance.activities[p].id, &instance.activities[a].id);
        m.add_row(
            format!("gap_{pid}_{aid}"),
            RowKind::PrecedenceDayGap,
            vec![
                (acts[p].day, 1.0),
                (acts[p].scheduled, 1.0),
                (acts[a].day, -1.0),
            ],
            Sense::Le,
            0.0,
        );
        m.add_row(
            format!("pre_{pid}_{aid}"),
            RowKind::PrecedenceScheduled,
            vec![(acts[a].scheduled, 1.0), (acts[p].scheduled, -1.0)],
            Sense::Le,
            0.0,
        );
    }

    // battery rows
    for (b, bat) in instance.batteries.iter().enumerate() {
        let e = bat.slot_energy();
        for t in 0..slots {
            let mut terms = vec![(state[b][t], 1.0), (charge[b][t], -e), (discharge[b][t], e)];
            let (kind, rhs) = if t == 0 {
                (RowKind::InitialCharge, bat.initial)
            } else {
                terms.push((state[b][t - 1], -1.0));
                (RowKind::ChargeDynamics, 0.0)
            };
            m.add_row(
                format!("soc_{}_t{}", bat.id, t + 1),
                kind,
                terms,
                Sense::Eq,
                rhs,
            );
            m.add_row(
                format!("excl_{}_t{}", bat.id, t + 1),
                RowKind::ChargeExclusive,
                vec![(charge[b][t], 1.0), (discharge[b][t], 1.0)],
                Sense::Le,
                1.0,
            );
        }
    }

    // progress variable of each activity contributing to slot t
    let progress_at = |a: usize, t: u32| -> Option<usize> {
        let pt = instance.progress_slot(a, t);
        acts[a]
            .progress
            .binary_search_by_key(&pt, |&(s, _)| s)
            .ok()
            .map(|i| acts[a].progress[i].1)
    };

    // room rows
    for t in 1..=h.slots {
        for (kind, cap, label) in [
            (RowKind::LargeRooms, instance.rooms.large, "large"),
            (RowKind::SmallRooms, instance.rooms.small, "small"),
        ] {
            let terms: Vec<(usize, f64)> = instance
                .activities
                .iter()
                .enumerate()
                .filter_map(|(a, act)| {
                    let n = if kind == RowKind::LargeRooms {
                        act.large_rooms
                    } else {
                        act.small_rooms
                    };
                    if n == 0 {
                        return None;
                    }
                    progress_at(a, t).map(|j| (j, f64::from(n)))
                })
                .collect();
            if !terms.is_empty() {
                m.add_row(
                    format!("{label}_t{t}"),
                    kind,
                    terms,
                    Sense::Le,
                    f64::from(cap),
                );
            }
        }
    }

    // load, peak and level rows per scenario
    for (s, series) in scenarios.iter().enumerate() {
        let sfx = suffix(s);
        for t in 1..=h.slots {
            let ti = t as usize - 1;
            let mut terms = vec![(loads[s][ti], 1.0)];
            for (b, bat) in instance.batteries.iter().enumerate() {
                terms.push((charge[b][ti], -bat.charge_load()));
                terms.push((discharge[b][ti], -bat.discharge_load()));
            }
            for (a, act) in instance.activities.iter().enumerate() {
                let load = act.load();
                if load != 0.0 {
                    if let Some(j) = progress_at(a, t) {
                        terms.push((j, -load));
                    }
                }
            }
            m.add_row(
                format!("load_t{t}{sfx}"),
                RowKind::LoadBalance,
                terms,
                Sense::Eq,
                series[ti],
            );
        }
        if big_m > 0 {
            m.add_row(
                format!("lsum{sfx}"),
                RowKind::LevelSum,
                levels[s].iter().map(|&j| (j, 1.0)).collect(),
                Sense::Le,
                1.0,
            );
        }
        let mut terms: Vec<(usize, f64)> = levels[s]
            .iter()
            .enumerate()
            .map(|(i, &j)| (j, (i + 1) as f64))
            .collect();
        terms.push((peaks[s], -1.0));
        m.add_row(
            format!("lcover{sfx}"),
            RowKind::LevelCover,
            terms,
            Sense::Ge,
            0.0,
        );
        for (t, &load) in loads[s].iter().enumerate() {
            m.add_row(
                format!("peakp_t{}{sfx}", t + 1),
                RowKind::PeakAbove,
                vec![(peaks[s], 1.0), (load, -1.0)],
                Sense::Ge,
                0.0,
            );
            m.add_row(
                format!("peakn_t{}{sfx}", t + 1),
                RowKind::PeakBelow,
                vec![(peaks[s], 1.0), (load, 1.0)],
                Sense::Ge,
                0.0,
            );
        }
    }
    Ok(m)
}

/// Values of every model variable implied by `schedule`.
///
/// Peak levels follow the variable domain: binary levels select
/// `ceil(peak)`, continuous levels split weight between the two integers
/// around the peak.
pub fn schedule_values(
    model: &MilpModel,
    instance: &Instance,
    scenarios: &ScenarioSet,
    schedule: &Schedule,
) -> Result<Vec<f64>, BuildError> {
    let h = &instance.horizon;
    let mut values = vec![0.0; model.vars.len()];
    let mut set = |key: VarKey, value: f64| -> Result<(), BuildError> {
        match model.var(&key) {
            Some(j) => {
                values[j] = value;
                Ok(())
            }
            None if value == 0.0 => Ok(()),
            None => Err(BuildError::ScheduleOutsideModel(format!("{key:?}"))),
        }
    };

    let mut base_extra = vec![0.0; h.slots as usize];
    for (b, bat) in instance.batteries.iter().enumerate() {
        let mut soc = bat.initial;
        for t in 1..=h.slots {
            let act = schedule.action(b, t);
            let (x, y) = (
                f64::from(u8::from(act.charging())),
                f64::from(u8::from(act.discharging())),
            );
            soc += bat.slot_energy() * (x - y);
            set(
                VarKey::Charge {
                    battery: b,
                    slot: t,
                },
                x,
            )?;
            set(
                VarKey::Discharge {
                    battery: b,
                    slot: t,
                },
                y,
            )?;
            set(
                VarKey::State {
                    battery: b,
                    slot: t,
                },
                soc,
            )?;
            base_extra[t as usize - 1] += bat.charge_load() * x + bat.discharge_load() * y;
        }
    }
    for (a, act) in instance.activities.iter().enumerate() {
        match schedule.starts[a] {
            Some(start) => {
                set(
                    VarKey::Start {
                        activity: a,
                        slot: start,
                    },
                    1.0,
                )?;
                for t in act.occupied(start) {
                    set(
                        VarKey::Progress {
                            activity: a,
                            slot: t,
                        },
                        1.0,
                    )?;
                }
                set(VarKey::Scheduled { activity: a }, 1.0)?;
                if !act.is_recurring() && act.is_penalized_start(start) {
                    set(VarKey::Penalized { activity: a }, 1.0)?;
                }
                set(VarKey::Day { activity: a }, f64::from(h.day_of(start)))?;
                let weeks = if act.is_recurring() { h.weeks() } else { 1 };
                for w in 0..weeks {
                    for t in act.occupied(start + w * h.week) {
                        if t <= h.slots {
                            base_extra[t as usize - 1] += act.load();
                        }
                    }
                }
            }
            None => set(VarKey::Day { activity: a }, f64::from(h.unscheduled_day()))?,
        }
    }
    for (s, series) in scenarios.iter().enumerate() {
        let mut peak = 0.0f64;
        for t in 1..=h.slots {
            let l = series[t as usize - 1] + base_extra[t as usize - 1];
            peak = peak.max(l.abs());
            set(
                VarKey::Load {
                    slot: t,
                    scenario: s,
                },
                l,
            )?;
        }
        set(VarKey::Peak { scenario: s }, peak)?;
        if peak > f64::from(model.big_m) + 1e-9 {
            return Err(BuildError::PeakAboveLevels {
                peak,
                levels: model.big_m,
            });
        }
        let binary = model
            .var(&VarKey::Lambda {
                level: 1,
                scenario: s,
            })
            .map(|j| model.vars[j].domain == Domain::Binary)
            .unwrap_or(true);
        if binary {
            let level = guarded_ceil(peak) as u32;
            if level > 0 {
                set(VarKey::Lambda { level, scenario: s }, 1.0)?;
            }
        } else {
            let lo = peak.floor();
            let frac = peak - lo;
            let lo = lo as u32;
            if lo >= 1 {
                set(
                    VarKey::Lambda {
                        level: lo,
                        scenario: s,
                    },
                    1.0 - frac,
                )?;
            }
            if frac > 0.0 {
                set(
                    VarKey::Lambda {
                        level: lo + 1,
                        scenario: s,
                    },
                    frac,
                )?;
            }
        }
    }
    Ok(values)
}
