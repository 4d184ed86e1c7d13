//! Problem data: horizon, rooms, batteries, activities and prices, together
//! with the canonical line-oriented instance format.
//!
//! Slots are 1-indexed everywhere. A recurring activity lives in the first
//! week of the horizon and repeats every `week` slots; [`map_to_first_week`]
//! folds any slot of the horizon onto that first week.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

/// Planning horizon in 15-minute slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Horizon {
    /// Number of slots in the horizon (`T`).
    pub slots: u32,
    /// Slots per day (`D`).
    pub day: u32,
    /// Slots per week. Equal to `7 * day`, except for toy horizons where the
    /// week is collapsed onto the whole horizon.
    pub week: u32,
}

impl Horizon {
    /// A horizon made of whole weeks.
    pub fn new(slots: u32, day: u32) -> Result<Self, InstanceError> {
        let h = Horizon {
            slots,
            day,
            week: 7 * day,
        };
        match h.problems().into_iter().next() {
            Some(msg) => Err(InstanceError::Horizon(msg)),
            None => Ok(h),
        }
    }

    /// Test-only horizon whose "week" equals the whole horizon, so that
    /// sub-week toy instances remain well formed.
    pub fn toy(slots: u32, day: u32) -> Self {
        Horizon {
            slots,
            day,
            week: slots,
        }
    }

    pub fn is_toy(&self) -> bool {
        self.week != 7 * self.day
    }

    pub fn weeks(&self) -> u32 {
        self.slots / self.week.max(1)
    }

    /// Day index coefficient used by the day-gap precedence rule.
    pub fn day_of(&self, slot: u32) -> u32 {
        slot / self.day
    }

    /// Day index assigned to activities that are not scheduled.
    pub fn unscheduled_day(&self) -> u32 {
        (self.slots + 1).div_ceil(self.day)
    }

    fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.slots == 0 {
            out.push("horizon must have at least one slot".to_string());
        }
        if self.day == 0 {
            out.push("day must have at least one slot".to_string());
        }
        if self.week != 7 * self.day && self.week != self.slots {
            out.push(format!(
                "week length {} is neither 7 days nor the whole horizon",
                self.week
            ));
        }
        if self.week == 0 || !self.slots.is_multiple_of(self.week) {
            out.push("horizon not whole weeks".to_string());
        }
        out
    }
}

/// Maps a slot of the horizon onto the corresponding slot of the first week.
pub fn map_to_first_week(slot: u32, horizon: &Horizon) -> Result<u32, InstanceError> {
    if slot == 0 || slot > horizon.slots {
        return Err(InstanceError::SlotOutOfRange {
            slot,
            slots: horizon.slots,
        });
    }
    Ok((slot - 1) % horizon.week + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Rooms {
    pub small: u32,
    pub large: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Battery {
    pub id: String,
    /// kWh
    pub capacity: f64,
    /// kWh held at the start of the horizon.
    pub initial: f64,
    /// kW
    pub max_power: f64,
    pub efficiency: f64,
}

impl Battery {
    /// Energy moved by one slot of charging or discharging (kWh).
    pub fn slot_energy(&self) -> f64 {
        0.25 * self.max_power
    }

    /// Grid-side load while charging (kW).
    pub fn charge_load(&self) -> f64 {
        self.max_power / self.efficiency.sqrt()
    }

    /// Grid-side load while discharging (kW, negative).
    pub fn discharge_load(&self) -> f64 {
        -self.max_power / self.efficiency.sqrt() * self.efficiency
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActivityKind {
    Recurring,
    OnceOff,
}

impl fmt::Display for ActivityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActivityKind::Recurring => "recurring",
            ActivityKind::OnceOff => "onceoff",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Activity {
    pub id: String,
    pub kind: ActivityKind,
    /// Slots.
    pub duration: u32,
    pub small_rooms: u32,
    pub large_rooms: u32,
    /// kW drawn per occupied room.
    pub load_per_room: f64,
    pub revenue: f64,
    pub penalty: f64,
    /// Allowed start slots, sorted and unique.
    pub starts: Vec<u32>,
    /// Start slots that incur the penalty, sorted and unique.
    pub penalized: Vec<u32>,
    /// Ids of activities that must precede this one.
    pub prerequisites: Vec<String>,
}

impl Activity {
    pub fn is_recurring(&self) -> bool {
        self.kind == ActivityKind::Recurring
    }

    /// Total load while in progress (kW).
    pub fn load(&self) -> f64 {
        self.load_per_room * f64::from(self.small_rooms + self.large_rooms)
    }

    /// Slots occupied when starting at `start`.
    pub fn occupied(&self, start: u32) -> std::ops::RangeInclusive<u32> {
        start..=start + self.duration - 1
    }

    /// Slots in which the activity can be in progress, sorted.
    pub fn progress_slots(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.starts.iter().flat_map(|&s| self.occupied(s)).collect();
        set.into_iter().collect()
    }

    pub fn is_penalized_start(&self, slot: u32) -> bool {
        self.penalized.binary_search(&slot).is_ok()
    }

    pub fn allows_start(&self, slot: u32) -> bool {
        self.starts.binary_search(&slot).is_ok()
    }
}

/// Immutable problem data.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub horizon: Horizon,
    pub rooms: Rooms,
    pub batteries: Vec<Battery>,
    pub activities: Vec<Activity>,
    /// Wholesale price per slot, $/MWh.
    pub prices: Vec<f64>,
}

impl Instance {
    pub fn activity_index(&self, id: &str) -> Option<usize> {
        self.activities.iter().position(|a| a.id == id)
    }

    pub fn battery_index(&self, id: &str) -> Option<usize> {
        self.batteries.iter().position(|b| b.id == id)
    }

    /// `(prerequisite, dependent)` index pairs. Dangling ids are skipped.
    pub fn precedence_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (j, a) in self.activities.iter().enumerate() {
            for p in &a.prerequisites {
                if let Some(i) = self.activity_index(p) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn slots(&self) -> u32 {
        self.horizon.slots
    }

    /// Slot in which the given activity's progress variables live when it
    /// contributes to slot `t` of the horizon.
    pub fn progress_slot(&self, activity: usize, t: u32) -> u32 {
        if self.activities[activity].is_recurring() {
            (t - 1) % self.horizon.week + 1
        } else {
            t
        }
    }
}

/// Set of net base-load scenarios, scenario-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    series: Vec<Vec<f64>>,
}

impl ScenarioSet {
    pub fn new(series: Vec<Vec<f64>>) -> Result<Self, InstanceError> {
        let Some(first) = series.first() else {
            return Err(InstanceError::Scenarios(
                "at least one scenario is required".into(),
            ));
        };
        let len = first.len();
        if let Some((s, bad)) = series.iter().enumerate().find(|(_, v)| v.len() != len) {
            return Err(InstanceError::Scenarios(format!(
                "scenario {} has {} values, expected {}",
                s + 1,
                bad.len(),
                len
            )));
        }
        if series.iter().flatten().any(|v| !v.is_finite()) {
            return Err(InstanceError::Scenarios("non-finite load value".into()));
        }
        Ok(ScenarioSet { series })
    }

    /// `count` identical copies of one series.
    pub fn replicate(series: &[f64], count: usize) -> Result<Self, InstanceError> {
        Self::new(vec![series.to_vec(); count])
    }

    pub fn count(&self) -> usize {
        self.series.len()
    }

    pub fn slots(&self) -> usize {
        self.series[0].len()
    }

    pub fn scenario(&self, s: usize) -> &[f64] {
        &self.series[s]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.series.iter().map(Vec::as_slice)
    }

    /// Fails unless every scenario covers exactly the instance horizon.
    pub fn check_horizon(&self, instance: &Instance) -> Result<(), InstanceError> {
        if self.slots() != instance.horizon.slots as usize {
            return Err(InstanceError::Scenarios(format!(
                "scenarios have {} slots, instance horizon has {}",
                self.slots(),
                instance.horizon.slots
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid instance: {}", join_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("{0}")]
    Document(String),
    #[error("{0}")]
    Horizon(String),
    #[error("slot {slot} out of range 1..={slots}")]
    SlotOutOfRange { slot: u32, slots: u32 },
    #[error("{0}")]
    Scenarios(String),
}

fn join_diagnostics(d: &[Diagnostic]) -> String {
    d.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// One violated instance invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// What is wrong, e.g. `"precedence cycle"`.
    pub invariant: String,
    /// Offending entity (`horizon`, `rooms`, an id, or `prices`).
    pub entity: String,
    pub detail: String,
}

impl Diagnostic {
    fn new(invariant: &str, entity: &str, detail: impl Into<String>) -> Self {
        Diagnostic {
            invariant: invariant.to_string(),
            entity: entity.to_string(),
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.invariant)?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

/// Checks every instance invariant. Empty iff the instance is valid.
pub fn validate_instance(instance: &Instance) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let h = &instance.horizon;
    for p in h.problems() {
        out.push(Diagnostic::new(&p, "horizon", ""));
    }

    let mut seen = HashSet::new();
    for b in &instance.batteries {
        if !valid_id(&b.id) {
            out.push(Diagnostic::new("invalid id", &b.id, ""));
        }
        if !seen.insert(b.id.as_str()) {
            out.push(Diagnostic::new("duplicate battery id", &b.id, ""));
        }
        let finite = [b.capacity, b.initial, b.max_power, b.efficiency]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            out.push(Diagnostic::new("non-finite battery parameter", &b.id, ""));
            continue;
        }
        if !(0.0 <= b.initial && b.initial <= b.capacity) {
            out.push(Diagnostic::new(
                "initial energy out of [0,capacity]",
                &b.id,
                format!("initial {} capacity {}", b.initial, b.capacity),
            ));
        }
        if b.max_power <= 0.0 {
            out.push(Diagnostic::new("max power not positive", &b.id, ""));
        }
        if !(b.efficiency > 0.0 && b.efficiency <= 1.0) {
            out.push(Diagnostic::new(
                "efficiency out of (0,1]",
                &b.id,
                format!("{}", b.efficiency),
            ));
        }
    }

    let mut seen = HashSet::new();
    for a in &instance.activities {
        if !valid_id(&a.id) {
            out.push(Diagnostic::new("invalid id", &a.id, ""));
        }
        if !seen.insert(a.id.as_str()) {
            out.push(Diagnostic::new("duplicate activity id", &a.id, ""));
        }
        validate_activity(a, h, &mut out);
    }

    let ids: HashSet<&str> = instance.activities.iter().map(|a| a.id.as_str()).collect();
    for a in &instance.activities {
        for p in &a.prerequisites {
            if !ids.contains(p.as_str()) {
                out.push(Diagnostic::new(
                    "dangling prerequisite",
                    &a.id,
                    format!("unknown activity {p}"),
                ));
            }
        }
    }
    if let Some(cycle) = find_cycle(instance) {
        out.push(Diagnostic::new(
            "precedence cycle",
            &cycle[0],
            cycle.join(" -> "),
        ));
    }

    if instance.prices.len() != h.slots as usize {
        out.push(Diagnostic::new(
            "price series length differs from horizon",
            "prices",
            format!(
                "expected {} price lines, found {}",
                h.slots,
                instance.prices.len()
            ),
        ));
    }
    if instance.prices.iter().any(|p| !p.is_finite()) {
        out.push(Diagnostic::new("non-finite price", "prices", ""));
    }
    out
}

fn validate_activity(a: &Activity, h: &Horizon, out: &mut Vec<Diagnostic>) {
    if a.duration == 0 {
        out.push(Diagnostic::new(
            "duration must be at least one slot",
            &a.id,
            "",
        ));
    }
    if ![a.load_per_room, a.revenue, a.penalty]
        .iter()
        .all(|v| v.is_finite())
    {
        out.push(Diagnostic::new("non-finite activity parameter", &a.id, ""));
    }
    if !is_sorted_unique(&a.starts) || !is_sorted_unique(&a.penalized) {
        out.push(Diagnostic::new(
            "slot sets must be sorted and unique",
            &a.id,
            "",
        ));
    }
    if a.penalized.iter().any(|t| !a.starts.contains(t)) {
        out.push(Diagnostic::new(
            "penalized starts not subset of allowed starts",
            &a.id,
            "",
        ));
    }
    let last = if a.is_recurring() { h.week } else { h.slots };
    for &t in &a.starts {
        if t == 0 || t.saturating_add(a.duration.max(1) - 1) > last {
            out.push(Diagnostic::new(
                "start slot out of range",
                &a.id,
                format!("start {t} with duration {} exceeds slot {last}", a.duration),
            ));
        }
    }
    if a.is_recurring() {
        if a.revenue != 0.0 || a.penalty != 0.0 {
            out.push(Diagnostic::new(
                "recurring activity carries revenue or penalty",
                &a.id,
                "",
            ));
        }
        if !a.penalized.is_empty() {
            out.push(Diagnostic::new(
                "recurring activity has penalized starts",
                &a.id,
                "",
            ));
        }
    }
}

/// Non-fatal observations about a valid instance.
pub fn lint_instance(instance: &Instance) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (i, j) in instance.precedence_pairs() {
        let (p, a) = (&instance.activities[i], &instance.activities[j]);
        if p.kind != a.kind {
            out.push(Diagnostic::new(
                "mixed-kind precedence",
                &a.id,
                format!("{} {} precedes {} {}", p.kind, p.id, a.kind, a.id),
            ));
        }
    }
    out
}

fn is_sorted_unique(v: &[u32]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '.')
}

fn find_cycle(instance: &Instance) -> Option<Vec<String>> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let n = instance.activities.len();
    let mut adj = vec![Vec::new(); n];
    for (i, j) in instance.precedence_pairs() {
        adj[j].push(i);
    }
    let mut state = vec![0u8; n];
    let mut stack = Vec::new();
    fn dfs(
        v: usize,
        adj: &[Vec<usize>],
        state: &mut [u8],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        state[v] = 1;
        stack.push(v);
        for &w in &adj[v] {
            if state[w] == 1 {
                let pos = stack.iter().position(|&x| x == w).unwrap();
                let mut cyc = stack[pos..].to_vec();
                cyc.push(w);
                return Some(cyc);
            }
            if state[w] == 0 {
                if let Some(c) = dfs(w, adj, state, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        state[v] = 2;
        None
    }
    for v in 0..n {
        if state[v] == 0 {
            if let Some(c) = dfs(v, &adj, &mut state, &mut stack) {
                return Some(
                    c.into_iter()
                        .map(|i| instance.activities[i].id.clone())
                        .collect(),
                );
            }
        }
    }
    None
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let instance = parse_document(text)?;
    let diags = validate_instance(&instance);
    if diags.is_empty() {
        Ok(instance)
    } else {
        Err(InstanceError::Invalid(diags))
    }
}

fn syntax(line: usize, message: impl Into<String>) -> InstanceError {
    InstanceError::Syntax {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, InstanceError> {
    tok.parse()
        .map_err(|_| syntax(line, format!("invalid {what} '{tok}'")))
}

/// Syntax-level parse without semantic validation.
pub fn parse_document(text: &str) -> Result<Instance, InstanceError> {
    let mut horizon = None;
    let mut rooms = None;
    let mut batteries = Vec::new();
    let mut activities: Vec<Activity> = Vec::new();
    let mut starts: HashMap<String, (usize, Vec<u32>)> = HashMap::new();
    let mut penalized: HashMap<String, (usize, Vec<u32>)> = HashMap::new();
    let mut prereqs: HashMap<String, (usize, Vec<String>)> = HashMap::new();
    let mut prices: BTreeMap<u32, f64> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        let Some((&directive, args)) = toks.split_first() else {
            continue;
        };
        let expect = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(syntax(
                    line,
                    format!("'{directive}' takes {n} fields, found {}", args.len()),
                ))
            }
        };
        match directive {
            "horizon" => {
                if horizon.is_some() {
                    return Err(syntax(line, "duplicate horizon"));
                }
                if args.len() != 2 && args.len() != 3 {
                    return Err(syntax(line, "'horizon' takes T D [W]"));
                }
                let slots = num(args[0], line, "slot count")?;
                let day = num(args[1], line, "day length")?;
                let week = match args.get(2) {
                    Some(w) => num(w, line, "week length")?,
                    None => 7 * day,
                };
                horizon = Some(Horizon { slots, day, week });
            }
            "rooms" => {
                expect(2)?;
                if rooms.is_some() {
                    return Err(syntax(line, "duplicate rooms"));
                }
                rooms = Some(Rooms {
                    small: num(args[0], line, "room count")?,
                    large: num(args[1], line, "room count")?,
                });
            }
            "battery" => {
                expect(5)?;
                batteries.push(Battery {
                    id: args[0].to_string(),
                    capacity: num(args[1], line, "capacity")?,
                    initial: num(args[2], line, "initial energy")?,
                    max_power: num(args[3], line, "max power")?,
                    efficiency: num(args[4], line, "efficiency")?,
                });
            }
            "activity" => {
                expect(8)?;
                let kind = match args[1] {
                    "recurring" => ActivityKind::Recurring,
                    "onceoff" => ActivityKind::OnceOff,
                    other => return Err(syntax(line, format!("unknown activity kind '{other}'"))),
                };
                activities.push(Activity {
                    id: args[0].to_string(),
                    kind,
                    duration: num(args[2], line, "duration")?,
                    small_rooms: num(args[3], line, "room count")?,
                    large_rooms: num(args[4], line, "room count")?,
                    load_per_room: num(args[5], line, "load")?,
                    revenue: num(args[6], line, "revenue")?,
                    penalty: num(args[7], line, "penalty")?,
                    starts: Vec::new(),
                    penalized: Vec::new(),
                    prerequisites: Vec::new(),
                });
            }
            "starts" | "penalized" => {
                let Some((id, slots)) = args.split_first() else {
                    return Err(syntax(line, format!("'{directive}' needs an activity id")));
                };
                let mut set = BTreeSet::new();
                for s in slots {
                    if !set.insert(num::<u32>(s, line, "slot")?) {
                        return Err(syntax(line, format!("duplicate slot {s}")));
                    }
                }
                let map = if directive == "starts" {
                    &mut starts
                } else {
                    &mut penalized
                };
                if map
                    .insert(id.to_string(), (line, set.into_iter().collect()))
                    .is_some()
                {
                    return Err(syntax(line, format!("duplicate '{directive}' for {id}")));
                }
            }
            "prereq" => {
                let Some((id, rest)) = args.split_first() else {
                    return Err(syntax(line, "'prereq' needs an activity id"));
                };
                let list = rest.iter().map(|s| s.to_string()).collect();
                if prereqs.insert(id.to_string(), (line, list)).is_some() {
                    return Err(syntax(line, format!("duplicate 'prereq' for {id}")));
                }
            }
            "price" => {
                expect(2)?;
                let slot: u32 = num(args[0], line, "slot")?;
                let value: f64 = num(args[1], line, "price")?;
                if prices.insert(slot, value).is_some() {
                    return Err(syntax(line, format!("duplicate price for slot {slot}")));
                }
            }
            other => return Err(syntax(line, format!("unknown directive '{other}'"))),
        }
    }

    let horizon =
        horizon.ok_or_else(|| InstanceError::Document("missing 'horizon' line".into()))?;
    let rooms = rooms.ok_or_else(|| InstanceError::Document("missing 'rooms' line".into()))?;

    for (map_name, keys) in [
        (
            "starts",
            starts.iter().map(|(k, v)| (k, v.0)).collect::<Vec<_>>(),
        ),
        (
            "penalized",
            penalized.iter().map(|(k, v)| (k, v.0)).collect(),
        ),
        ("prereq", prereqs.iter().map(|(k, v)| (k, v.0)).collect()),
    ] {
        for (id, line) in keys {
            if !activities.iter().any(|a| &a.id == id) {
                return Err(syntax(
                    line,
                    format!("'{map_name}' for unknown activity {id}"),
                ));
            }
        }
    }
    for a in &mut activities {
        if let Some((_, s)) = starts.remove(&a.id) {
            a.starts = s;
        }
        if let Some((_, s)) = penalized.remove(&a.id) {
            a.penalized = s;
        }
        if let Some((_, p)) = prereqs.remove(&a.id) {
            a.prerequisites = p;
        }
    }

    let expected = horizon.slots;
    let contiguous = prices.keys().copied().eq(1..=expected);
    if !contiguous {
        return Err(InstanceError::Document(format!(
            "expected {expected} price lines, found {}",
            prices.len()
        )));
    }

    Ok(Instance {
        horizon,
        rooms,
        batteries,
        activities,
        prices: prices.into_values().collect(),
    })
}

/// Canonical text form; `parse_instance(&serialize_instance(i))` returns `i`.
pub fn serialize_instance(instance: &Instance) -> String {
    use fmt::Write;
    let mut s = String::new();
    let h = &instance.horizon;
    if h.week == 7 * h.day {
        writeln!(s, "horizon {} {}", h.slots, h.day).unwrap();
    } else {
        writeln!(s, "horizon {} {} {}", h.slots, h.day, h.week).unwrap();
    }
    writeln!(s, "rooms {} {}", instance.rooms.small, instance.rooms.large).unwrap();
    for b in &instance.batteries {
        writeln!(
            s,
            "battery {} {} {} {} {}",
            b.id, b.capacity, b.initial, b.max_power, b.efficiency
        )
        .unwrap();
    }
    for a in &instance.activities {
        writeln!(
            s,
            "activity {} {} {} {} {} {} {} {}",
            a.id,
            a.kind,
            a.duration,
            a.small_rooms,
            a.large_rooms,
            a.load_per_room,
            a.revenue,
            a.penalty
        )
        .unwrap();
        let list = |v: &[u32]| v.iter().map(|t| format!(" {t}")).collect::<String>();
        if !a.starts.is_empty() {
            writeln!(s, "starts {}{}", a.id, list(&a.starts)).unwrap();
        }
        if !a.penalized.is_empty() {
            writeln!(s, "penalized {}{}", a.id, list(&a.penalized)).unwrap();
        }
        if !a.prerequisites.is_empty() {
            writeln!(s, "prereq {} {}", a.id, a.prerequisites.join(" ")).unwrap();
        }
    }
    for (t, p) in instance.prices.iter().enumerate() {
        writeln!(s, "price {} {}", t + 1, p).unwrap();
    }
    s
}
