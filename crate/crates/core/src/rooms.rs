//! Assignment of concrete rooms to scheduled activities.
//!
//! The MILP only counts rooms per slot. Once a schedule is fixed, each
//! activity is expanded into one unit interval per requested room and rooms
//! are handed out greedily by start slot, lowest free room first. Recurring
//! activities are placed first and keep the same rooms every week; once-off
//! activities then fill the remaining room time. A backtracking search over
//! the same order takes over if the greedy pass gets stuck.

use std::fmt::Write;

use thiserror::Error;

use crate::instance::Instance;
use crate::schedule::Schedule;

/// Rooms held by one scheduled activity for its entire duration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoomEntry {
    pub activity: usize,
    /// 1-based small-room ids.
    pub small: Vec<u32>,
    /// 1-based large-room ids.
    pub large: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoomAssignment {
    /// One entry per scheduled activity, in instance order.
    pub entries: Vec<RoomEntry>,
}

impl RoomAssignment {
    /// `room <activity_id> small:<ids> large:<ids>` lines ordered by activity id.
    pub fn serialize(&self, instance: &Instance) -> String {
        let mut entries: Vec<&RoomEntry> = self.entries.iter().collect();
        entries.sort_by(|a, b| {
            instance.activities[a.activity]
                .id
                .cmp(&instance.activities[b.activity].id)
        });
        let join = |v: &[u32]| {
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut out = String::new();
        for e in entries {
            writeln!(
                out,
                "room {} small:{} large:{}",
                instance.activities[e.activity].id,
                join(&e.small),
                join(&e.large)
            )
            .unwrap();
        }
        out
    }

    /// Rooms of each size in use at every slot of the horizon.
    pub fn usage(&self, instance: &Instance, schedule: &Schedule) -> (Vec<u32>, Vec<u32>) {
        let mut small = vec![0u32; instance.slots() as usize];
        let mut large = vec![0u32; instance.slots() as usize];
        for e in &self.entries {
            let Some(start) = schedule.starts[e.activity] else {
                continue;
            };
            for t in occupied_slots(instance, e.activity, start) {
                small[t as usize - 1] += e.small.len() as u32;
                large[t as usize - 1] += e.large.len() as u32;
            }
        }
        (small, large)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RoomError {
    #[error("{size} room demand {demand} exceeds capacity {capacity} at slot {slot}")]
    CapacityExceeded {
        size: &'static str,
        slot: u32,
        demand: u32,
        capacity: u32,
    },
    #[error("no conflict-free {size} room assignment exists with fixed weekly rooms")]
    Unassignable { size: &'static str },
}

/// Slots of the horizon occupied by an activity started at `start`.
fn occupied_slots(instance: &Instance, activity: usize, start: u32) -> Vec<u32> {
    let a = &instance.activities[activity];
    let h = &instance.horizon;
    let weeks = if a.is_recurring() { h.weeks() } else { 1 };
    (0..weeks)
        .flat_map(|w| a.occupied(start + w * h.week))
        .filter(|&t| t <= h.slots)
        .collect()
}

struct Unit {
    activity: usize,
    first: u32,
    last: u32,
}

/// Conflict-free room identities for a feasible schedule.
pub fn allocate_rooms(
    instance: &Instance,
    schedule: &Schedule,
) -> Result<RoomAssignment, RoomError> {
    let small = allocate_pool(instance, schedule, "small", instance.rooms.small, |a| {
        instance.activities[a].small_rooms
    })?;
    let large = allocate_pool(instance, schedule, "large", instance.rooms.large, |a| {
        instance.activities[a].large_rooms
    })?;
    let entries = (0..instance.activities.len())
        .filter(|&a| schedule.starts[a].is_some())
        .map(|a| RoomEntry {
            activity: a,
            small: small[a].clone(),
            large: large[a].clone(),
        })
        .collect();
    Ok(RoomAssignment { entries })
}

fn allocate_pool(
    instance: &Instance,
    schedule: &Schedule,
    size: &'static str,
    capacity: u32,
    demand_of: impl Fn(usize) -> u32,
) -> Result<Vec<Vec<u32>>, RoomError> {
    let h = &instance.horizon;
    let n = instance.activities.len();

    let mut demand = vec![0u32; h.slots as usize];
    for a in 0..n {
        if let Some(start) = schedule.starts[a] {
            for t in occupied_slots(instance, a, start) {
                demand[t as usize - 1] += demand_of(a);
            }
        }
    }
    if let Some(t) = demand.iter().position(|&d| d > capacity) {
        return Err(RoomError::CapacityExceeded {
            size,
            slot: t as u32 + 1,
            demand: demand[t],
            capacity,
        });
    }

    let units = |recurring: bool| {
        let mut v: Vec<Unit> = (0..n)
            .filter(|&a| instance.activities[a].is_recurring() == recurring)
            .filter_map(|a| schedule.starts[a].map(|s| (a, s)))
            .flat_map(|(a, s)| {
                let last = s + instance.activities[a].duration - 1;
                (0..demand_of(a)).map(move |_| Unit {
                    activity: a,
                    first: s,
                    last,
                })
            })
            .collect();
        v.sort_by_key(|u| (u.first, u.activity));
        v
    };

    let rooms = capacity as usize;
    // busy[r][t - 1]
    let mut busy = vec![vec![false; h.slots as usize]; rooms];
    let mut held: Vec<Vec<u32>> = vec![Vec::new(); n];

    // Recurring intervals live inside the first week and repeat unchanged.
    let weekly = units(true);
    let mut week_busy = vec![vec![false; h.week as usize]; rooms];
    for u in &weekly {
        let span = (u.first - 1) as usize..u.last as usize;
        let room = (0..rooms)
            .find(|&r| week_busy[r][span.clone()].iter().all(|b| !b))
            .ok_or(RoomError::Unassignable { size })?;
        week_busy[room][span].iter_mut().for_each(|b| *b = true);
        held[u.activity].push(room as u32 + 1);
        for t in occupied_slots(instance, u.activity, schedule.starts[u.activity].unwrap()) {
            busy[room][t as usize - 1] = true;
        }
    }

    let once = units(false);
    let mut choice = vec![usize::MAX; once.len()];
    if !assign_greedy(&once, &mut busy.clone(), &mut choice)
        && !assign_backtrack(&once, 0, &mut busy, &mut choice)
    {
        return Err(RoomError::Unassignable { size });
    }
    for (u, &r) in once.iter().zip(&choice) {
        held[u.activity].push(r as u32 + 1);
    }
    for rooms in &mut held {
        rooms.sort_unstable();
    }
    Ok(held)
}

fn free(busy: &[Vec<bool>], room: usize, u: &Unit) -> bool {
    busy[room][(u.first - 1) as usize..u.last as usize]
        .iter()
        .all(|b| !b)
}

fn mark(busy: &mut [Vec<bool>], room: usize, u: &Unit, value: bool) {
    busy[room][(u.first - 1) as usize..u.last as usize]
        .iter_mut()
        .for_each(|b| *b = value);
}

fn assign_greedy(units: &[Unit], busy: &mut [Vec<bool>], choice: &mut [usize]) -> bool {
    for (i, u) in units.iter().enumerate() {
        match (0..busy.len()).find(|&r| free(busy, r, u)) {
            Some(r) => {
                mark(busy, r, u, true);
                choice[i] = r;
            }
            None => return false,
        }
    }
    true
}

fn assign_backtrack(
    units: &[Unit],
    i: usize,
    busy: &mut [Vec<bool>],
    choice: &mut [usize],
) -> bool {
    let Some(u) = units.get(i) else {
        return true;
    };
    for r in 0..busy.len() {
        if free(busy, r, u) {
            mark(busy, r, u, true);
            choice[i] = r;
            if assign_backtrack(units, i + 1, busy, choice) {
                return true;
            }
            mark(busy, r, u, false);
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;

    fn inst(small: u32, extra: &str) -> Instance {
        let mut doc = format!(
            "horizon 8 4 8\nrooms {small} 1\n\
             activity a1 onceoff 2 1 0 2 50 10\nstarts a1 1 2 3 4 5 6 7\n{extra}"
        );
        for t in 1..=8 {
            doc.push_str(&format!("price {t} 100\n"));
        }
        parse_instance(&doc).unwrap()
    }

    #[test]
    fn single_activity_gets_room_one() {
        let i = inst(1, "");
        let mut s = Schedule::idle(&i);
        s.starts[0] = Some(1);
        let r = allocate_rooms(&i, &s).unwrap();
        assert_eq!(r.serialize(&i), "room a1 small:1 large:\n");
    }

    #[test]
    fn overlapping_activities_get_distinct_rooms() {
        let i = inst(2, "activity a2 onceoff 2 1 0 1 5 0\nstarts a2 1 2\n");
        let mut s = Schedule::idle(&i);
        s.starts = vec![Some(1), Some(2)];
        let r = allocate_rooms(&i, &s).unwrap();
        assert_eq!(r.entries[0].small, vec![1]);
        assert_eq!(r.entries[1].small, vec![2]);
    }

    #[test]
    fn over_capacity_reports_first_slot() {
        let i = inst(2, "activity a2 onceoff 2 1 0 1 5 0\nstarts a2 1 2\n");
        let mut s = Schedule::idle(&i);
        s.starts = vec![Some(1), Some(2)];
        let mut small = i.clone();
        small.rooms.small = 1;
        assert_eq!(
            allocate_rooms(&small, &s),
            Err(RoomError::CapacityExceeded {
                size: "small",
                slot: 2,
                demand: 2,
                capacity: 1
            })
        );
    }

    #[test]
    fn recurring_keeps_rooms_across_weeks() {
        let mut doc = String::from(
            "horizon 56 4\nrooms 2 0\n\
             activity r1 recurring 2 1 0 1 0 0\nstarts r1 3\n\
             activity o1 onceoff 4 1 0 1 5 0\nstarts o1 33\n\
             activity o2 onceoff 4 1 0 1 5 0\nstarts o2 29\n",
        );
        for t in 1..=56 {
            doc.push_str(&format!("price {t} 1\n"));
        }
        let i = parse_instance(&doc).unwrap();
        let mut s = Schedule::idle(&i);
        s.starts = vec![Some(3), Some(33), Some(29)];
        // o2 covers 29..32 and must avoid r1's room at slot 31 (3 + 28).
        let r = allocate_rooms(&i, &s).unwrap();
        assert_eq!(r.entries[0].small, vec![1]);
        assert_eq!(r.entries[2].small, vec![2]);
        let (small, _) = r.usage(&i, &s);
        assert_eq!(small[30], 2);
    }
}
