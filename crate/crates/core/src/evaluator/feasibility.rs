use std::fmt;

use crate::instance::Instance;
use crate::schedule::Schedule;

const TOL: f64 = 1e-9;

/// Constraint family a violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintFamily {
    /// Start outside the allowed start set (or running past the horizon).
    StartDomain,
    /// In-progress indicators disagree with the start.
    ProgressLinkage,
    /// Number of in-progress slots differs from `duration * scheduled`.
    Duration,
    /// Number of starts differs from the scheduled flag.
    SingleStart,
    /// Penalized flag differs from starting in a penalized slot.
    PenalizedStart,
    /// Day index inconsistent with the start slot.
    DayIndex,
    /// Prerequisite not at least one day before its dependent.
    PrecedenceDayGap,
    /// Dependent scheduled while its prerequisite is not.
    PrecedenceScheduled,
    /// First-slot state of charge inconsistent with the initial energy.
    InitialCharge,
    /// State of charge inconsistent with the previous slot.
    ChargeDynamics,
    /// Charging and discharging in the same slot.
    ChargeExclusive,
    LargeRooms,
    SmallRooms,
    /// Recurring activity not scheduled.
    RecurringScheduled,
    /// State of charge outside `[0, capacity]`.
    ChargeBounds,
}

impl fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConstraintFamily::StartDomain => "start-domain",
            ConstraintFamily::ProgressLinkage => "progress-linkage",
            ConstraintFamily::Duration => "duration",
            ConstraintFamily::SingleStart => "single-start",
            ConstraintFamily::PenalizedStart => "penalized-start",
            ConstraintFamily::DayIndex => "day-index",
            ConstraintFamily::PrecedenceDayGap => "precedence-day-gap",
            ConstraintFamily::PrecedenceScheduled => "precedence-scheduled",
            ConstraintFamily::InitialCharge => "initial-charge",
            ConstraintFamily::ChargeDynamics => "charge-dynamics",
            ConstraintFamily::ChargeExclusive => "charge-exclusive",
            ConstraintFamily::LargeRooms => "large-rooms",
            ConstraintFamily::SmallRooms => "small-rooms",
            ConstraintFamily::RecurringScheduled => "recurring-scheduled",
            ConstraintFamily::ChargeBounds => "charge-bounds",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub family: ConstraintFamily,
    /// Activity or battery ids involved.
    pub entities: Vec<String>,
    pub slot: Option<u32>,
    /// Amount by which the constraint is violated, always positive.
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.family, self.entities.join(","))?;
        if let Some(t) = self.slot {
            write!(f, " slot {t}")?;
        }
        write!(f, " by {}", self.magnitude)
    }
}

/// Values of every activity-side decision of one activity.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityAssignment {
    /// Slots with a start indicator set (normally zero or one).
    pub starts: Vec<u32>,
    /// Slots with an in-progress indicator set; first-week slots for
    /// recurring activities.
    pub progress: Vec<u32>,
    pub scheduled: bool,
    pub penalized: bool,
    pub day: f64,
}

/// Values of every decision of one battery; vectors are indexed by `t - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryAssignment {
    pub charge: Vec<bool>,
    pub discharge: Vec<bool>,
    pub state: Vec<f64>,
}

/// Variable-level view of a solution, including the quantities a schedule
/// only implies. Used to check imported solver output and for mutation tests.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub activities: Vec<ActivityAssignment>,
    pub batteries: Vec<BatteryAssignment>,
}

/// Expands a schedule into the full assignment it implies.
pub fn derive_assignment(instance: &Instance, schedule: &Schedule) -> Assignment {
    let h = &instance.horizon;
    let activities = instance
        .activities
        .iter()
        .zip(&schedule.starts)
        .map(|(a, start)| {
            let last = if a.is_recurring() { h.week } else { h.slots };
            match *start {
                Some(t) => ActivityAssignment {
                    starts: vec![t],
                    progress: a.occupied(t).filter(|&p| p <= last).collect(),
                    scheduled: true,
                    penalized: !a.is_recurring() && a.is_penalized_start(t),
                    day: f64::from(h.day_of(t)),
                },
                None => ActivityAssignment {
                    starts: vec![],
                    progress: vec![],
                    scheduled: false,
                    penalized: false,
                    day: f64::from(h.unscheduled_day()),
                },
            }
        })
        .collect();
    let batteries = instance
        .batteries
        .iter()
        .zip(&schedule.battery)
        .map(|(b, actions)| {
            let mut soc = b.initial;
            let mut state = Vec::with_capacity(actions.len());
            for act in actions {
                if act.charging() {
                    soc += b.slot_energy();
                } else if act.discharging() {
                    soc -= b.slot_energy();
                }
                state.push(soc);
            }
            BatteryAssignment {
                charge: actions.iter().map(|a| a.charging()).collect(),
                discharge: actions.iter().map(|a| a.discharging()).collect(),
                state,
            }
        })
        .collect();
    Assignment {
        activities,
        batteries,
    }
}

/// Every violated constraint of a schedule. Empty iff feasible.
pub fn check_feasibility(instance: &Instance, schedule: &Schedule) -> Vec<Violation> {
    check_assignment(instance, &derive_assignment(instance, schedule))
}

/// Every violated constraint of a full assignment. Empty iff feasible.
pub fn check_assignment(instance: &Instance, asg: &Assignment) -> Vec<Violation> {
    let mut out = Vec::new();
    let h = &instance.horizon;
    let mut push = |family, entities: Vec<String>, slot, magnitude: f64| {
        if magnitude > 0.0 {
            out.push(Violation {
                family,
                entities,
                slot,
                magnitude,
            });
        }
    };

    for (act, v) in instance.activities.iter().zip(&asg.activities) {
        let ids = || vec![act.id.clone()];
        let last = if act.is_recurring() { h.week } else { h.slots };
        let w = f64::from(u8::from(v.scheduled));

        for &t in &v.starts {
            if !act.allows_start(t) || t + act.duration - 1 > last {
                push(ConstraintFamily::StartDomain, ids(), Some(t), 1.0);
            }
        }

        // each slot's progress flag equals the number of starts covering it
        let mut slots: Vec<u32> = v
            .starts
            .iter()
            .flat_map(|&s| act.occupied(s))
            .chain(v.progress.iter().copied())
            .filter(|&t| t >= 1 && t <= last)
            .collect();
        slots.sort_unstable();
        slots.dedup();
        for t in slots {
            let covering = v
                .starts
                .iter()
                .filter(|&&s| s <= t && t < s + act.duration)
                .count() as f64;
            let flag = f64::from(u8::from(v.progress.contains(&t)));
            push(
                ConstraintFamily::ProgressLinkage,
                ids(),
                Some(t),
                (flag - covering).abs(),
            );
        }
        for &t in &v.progress {
            if t == 0 || t > last {
                push(ConstraintFamily::ProgressLinkage, ids(), Some(t), 1.0);
            }
        }

        let progress_count = v.progress.len() as f64;
        push(
            ConstraintFamily::Duration,
            ids(),
            None,
            (progress_count - f64::from(act.duration) * w).abs(),
        );
        push(
            ConstraintFamily::SingleStart,
            ids(),
            None,
            (v.starts.len() as f64 - w).abs(),
        );

        let penalized_starts = if act.is_recurring() {
            0.0
        } else {
            v.starts
                .iter()
                .filter(|&&t| act.is_penalized_start(t))
                .count() as f64
        };
        push(
            ConstraintFamily::PenalizedStart,
            ids(),
            None,
            (penalized_starts - f64::from(u8::from(v.penalized))).abs(),
        );

        let day: f64 = v
            .starts
            .iter()
            .map(|&t| f64::from(h.day_of(t)))
            .sum::<f64>()
            + f64::from(h.unscheduled_day()) * (1.0 - w);
        let gap = (day - v.day).abs();
        push(
            ConstraintFamily::DayIndex,
            ids(),
            None,
            if gap > TOL { gap } else { 0.0 },
        );

        if act.is_recurring() {
            push(ConstraintFamily::RecurringScheduled, ids(), None, 1.0 - w);
        }
    }

    for (p, d) in instance.precedence_pairs() {
        let (pa, da) = (&asg.activities[p], &asg.activities[d]);
        let ids = || {
            vec![
                instance.activities[p].id.clone(),
                instance.activities[d].id.clone(),
            ]
        };
        let wp = f64::from(u8::from(pa.scheduled));
        let wd = f64::from(u8::from(da.scheduled));
        let excess = pa.day + wp - da.day;
        push(
            ConstraintFamily::PrecedenceDayGap,
            ids(),
            None,
            if excess > TOL { excess } else { 0.0 },
        );
        push(
            ConstraintFamily::PrecedenceScheduled,
            ids(),
            None,
            (wd - wp).max(0.0),
        );
    }

    for (bat, v) in instance.batteries.iter().zip(&asg.batteries) {
        let ids = || vec![bat.id.clone()];
        let tol = TOL * bat.capacity.max(1.0);
        let mut prev = bat.initial;
        for t in 0..v.state.len() {
            let slot = Some(t as u32 + 1);
            let (x, y) = (v.charge[t], v.discharge[t]);
            let delta = bat.slot_energy() * (f64::from(u8::from(x)) - f64::from(u8::from(y)));
            let err = (v.state[t] - (prev + delta)).abs();
            let family = if t == 0 {
                ConstraintFamily::InitialCharge
            } else {
                ConstraintFamily::ChargeDynamics
            };
            push(family, ids(), slot, if err > tol { err } else { 0.0 });
            if x && y {
                push(ConstraintFamily::ChargeExclusive, ids(), slot, 1.0);
            }
            let s = v.state[t];
            let out_of_bounds = if s < -tol {
                -s
            } else if s > bat.capacity + tol {
                s - bat.capacity
            } else {
                0.0
            };
            push(ConstraintFamily::ChargeBounds, ids(), slot, out_of_bounds);
            prev = v.state[t];
        }
    }

    // Room occupancy per slot of the horizon; recurring activities repeat weekly.
    let slots = h.slots as usize;
    let mut small = vec![0u64; slots];
    let mut large = vec![0u64; slots];
    for (a, act) in instance.activities.iter().enumerate() {
        for &p in &asg.activities[a].progress {
            if p == 0 {
                continue;
            }
            let slots_hit: Vec<u32> = if act.is_recurring() {
                (0..h.weeks()).map(|k| p + k * h.week).collect()
            } else {
                vec![p]
            };
            for t in slots_hit {
                if t as usize <= slots {
                    small[t as usize - 1] += u64::from(act.small_rooms);
                    large[t as usize - 1] += u64::from(act.large_rooms);
                }
            }
        }
    }
    for t in 0..slots {
        let slot = Some(t as u32 + 1);
        let over_l = large[t].saturating_sub(u64::from(instance.rooms.large)) as f64;
        push(ConstraintFamily::LargeRooms, vec![], slot, over_l);
        let over_s = small[t].saturating_sub(u64::from(instance.rooms.small)) as f64;
        push(ConstraintFamily::SmallRooms, vec![], slot, over_s);
    }
    out
}
