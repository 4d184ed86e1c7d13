//! Decisions of a solution and the canonical solution file.
//!
//! Solution file lines:
//!
//! ```text
//! start <activity_id> <slot>
//! battery <battery_id> <slot> <charge|discharge>
//! room <activity_id> small:<ids> large:<ids>
//! ```
//!
//! Idle battery slots are implicit. Recurring activities list their
//! first-week start. Canonical order is activities by id, then battery lines
//! by `(id, slot)`, then room lines by activity id.

use std::fmt::{self, Write};

use thiserror::Error;

use crate::instance::Instance;
use crate::rooms::{RoomAssignment, RoomEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Action {
    #[default]
    Idle,
    Charge,
    Discharge,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Idle, Action::Charge, Action::Discharge];

    pub fn charging(self) -> bool {
        self == Action::Charge
    }

    pub fn discharging(self) -> bool {
        self == Action::Discharge
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Idle => "idle",
            Action::Charge => "charge",
            Action::Discharge => "discharge",
        })
    }
}

/// Start slot per activity and action per battery per slot.
///
/// Ordering is lexicographic over starts then battery actions; it is the
/// tie-break used by every solver in this crate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Schedule {
    /// Indexed like `Instance::activities`. Recurring starts are first-week slots.
    pub starts: Vec<Option<u32>>,
    /// `battery[b][t - 1]`.
    pub battery: Vec<Vec<Action>>,
}

impl Schedule {
    /// Nothing scheduled, every battery idle.
    pub fn idle(instance: &Instance) -> Self {
        Schedule {
            starts: vec![None; instance.activities.len()],
            battery: vec![vec![Action::Idle; instance.slots() as usize]; instance.batteries.len()],
        }
    }

    pub fn action(&self, battery: usize, slot: u32) -> Action {
        self.battery[battery][slot as usize - 1]
    }

    pub fn set_action(&mut self, battery: usize, slot: u32, action: Action) {
        self.battery[battery][slot as usize - 1] = action;
    }

    /// Same activity decisions, all batteries idle.
    pub fn without_batteries(&self) -> Self {
        Schedule {
            starts: self.starts.clone(),
            battery: self
                .battery
                .iter()
                .map(|b| vec![Action::Idle; b.len()])
                .collect(),
        }
    }

    pub fn matches_shape(&self, instance: &Instance) -> bool {
        self.starts.len() == instance.activities.len()
            && self.battery.len() == instance.batteries.len()
            && self
                .battery
                .iter()
                .all(|b| b.len() == instance.slots() as usize)
    }
}

#[derive(Debug, Error)]
pub enum SolutionFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

fn err(line: usize, message: impl Into<String>) -> SolutionFileError {
    SolutionFileError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parsed solution file.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub schedule: Schedule,
    pub rooms: Option<RoomAssignment>,
}

impl SolutionFile {
    pub fn parse(text: &str, instance: &Instance) -> Result<Self, SolutionFileError> {
        let mut schedule = Schedule::idle(instance);
        let mut seen_start = vec![false; instance.activities.len()];
        let mut seen_action =
            vec![vec![false; instance.slots() as usize]; instance.batteries.len()];
        let mut rooms: Vec<RoomEntry> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let toks: Vec<&str> = raw
                .split('#')
                .next()
                .unwrap_or("")
                .split_whitespace()
                .collect();
            let Some((&kind, args)) = toks.split_first() else {
                continue;
            };
            match kind {
                "start" => {
                    let [id, slot] = args else {
                        return Err(err(line, "'start' takes <activity_id> <slot>"));
                    };
                    let a = instance
                        .activity_index(id)
                        .ok_or_else(|| err(line, format!("unknown activity {id}")))?;
                    let slot: u32 = slot
                        .parse()
                        .map_err(|_| err(line, format!("invalid slot '{slot}'")))?;
                    if slot == 0 || slot > instance.slots() {
                        return Err(err(line, format!("slot {slot} outside horizon")));
                    }
                    if std::mem::replace(&mut seen_start[a], true) {
                        return Err(err(line, format!("second start for {id}")));
                    }
                    schedule.starts[a] = Some(slot);
                }
                "battery" => {
                    let [id, slot, action] = args else {
                        return Err(err(line, "'battery' takes <battery_id> <slot> <action>"));
                    };
                    let b = instance
                        .battery_index(id)
                        .ok_or_else(|| err(line, format!("unknown battery {id}")))?;
                    let slot: u32 = slot
                        .parse()
                        .map_err(|_| err(line, format!("invalid slot '{slot}'")))?;
                    if slot == 0 || slot > instance.slots() {
                        return Err(err(line, format!("slot {slot} outside horizon")));
                    }
                    let action = match *action {
                        "charge" => Action::Charge,
                        "discharge" => Action::Discharge,
                        "idle" => Action::Idle,
                        other => return Err(err(line, format!("unknown action '{other}'"))),
                    };
                    if std::mem::replace(&mut seen_action[b][slot as usize - 1], true) {
                        return Err(err(line, format!("second action for {id} at slot {slot}")));
                    }
                    schedule.set_action(b, slot, action);
                }
                "room" => {
                    let [id, small, large] = args else {
                        return Err(err(
                            line,
                            "'room' takes <activity_id> small:<ids> large:<ids>",
                        ));
                    };
                    let a = instance
                        .activity_index(id)
                        .ok_or_else(|| err(line, format!("unknown activity {id}")))?;
                    if rooms.iter().any(|r| r.activity == a) {
                        return Err(err(line, format!("second room line for {id}")));
                    }
                    rooms.push(RoomEntry {
                        activity: a,
                        small: parse_room_list(small, "small:", line)?,
                        large: parse_room_list(large, "large:", line)?,
                    });
                }
                other => return Err(err(line, format!("unknown line kind '{other}'"))),
            }
        }
        rooms.sort_by_key(|r| r.activity);
        Ok(SolutionFile {
            schedule,
            rooms: (!rooms.is_empty()).then_some(RoomAssignment { entries: rooms }),
        })
    }

    pub fn serialize(&self, instance: &Instance) -> String {
        let mut out = serialize_schedule(&self.schedule, instance);
        if let Some(rooms) = &self.rooms {
            out.push_str(&rooms.serialize(instance));
        }
        out
    }
}

fn parse_room_list(tok: &str, prefix: &str, line: usize) -> Result<Vec<u32>, SolutionFileError> {
    let rest = tok
        .strip_prefix(prefix)
        .ok_or_else(|| err(line, format!("expected '{prefix}<ids>'")))?;
    if rest.is_empty() {
        return Ok(Vec::new());
    }
    rest.split(',')
        .map(|s| {
            s.parse()
                .map_err(|_| err(line, format!("invalid room id '{s}'")))
        })
        .collect()
}

/// Canonical solution text for a schedule (no room lines).
pub fn serialize_schedule(schedule: &Schedule, instance: &Instance) -> String {
    let mut out = String::new();
    let mut order: Vec<usize> = (0..instance.activities.len()).collect();
    order.sort_by(|&a, &b| instance.activities[a].id.cmp(&instance.activities[b].id));
    for a in order {
        if let Some(t) = schedule.starts[a] {
            writeln!(out, "start {} {}", instance.activities[a].id, t).unwrap();
        }
    }
    let mut order: Vec<usize> = (0..instance.batteries.len()).collect();
    order.sort_by(|&a, &b| instance.batteries[a].id.cmp(&instance.batteries[b].id));
    for b in order {
        for (i, action) in schedule.battery[b].iter().enumerate() {
            if *action != Action::Idle {
                writeln!(
                    out,
                    "battery {} {} {}",
                    instance.batteries[b].id,
                    i + 1,
                    action
                )
                .unwrap();
            }
        }
    }
    out
}
