//! Random instance, scenario and schedule generators shared by the
//! integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use saasched::instance::{
    validate_instance, Activity, ActivityKind, Battery, Horizon, Instance, Rooms, ScenarioSet,
};
use saasched::schedule::{Action, Schedule};
use saasched::solve::{oracle_feasible, search_space};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone)]
pub struct Shape {
    pub slots: Vec<u32>,
    pub day: u32,
    /// Collapse the week onto the horizon.
    pub toy: bool,
    pub min_activities: usize,
    pub max_activities: usize,
    pub max_batteries: usize,
    /// Probability that an activity is recurring.
    pub recurring: f64,
    /// Probability that an activity requires the previous one.
    pub precedence: f64,
    pub max_duration: u32,
}

impl Shape {
    pub fn tiny() -> Self {
        Shape {
            slots: vec![4, 8, 12],
            day: 4,
            toy: true,
            min_activities: 1,
            max_activities: 2,
            max_batteries: 1,
            recurring: 0.15,
            precedence: 0.3,
            max_duration: 3,
        }
    }
}

fn subset(rng: &mut ChaCha8Rng, pool: &[u32], p: f64) -> Vec<u32> {
    let mut out: Vec<u32> = pool.iter().copied().filter(|_| rng.gen_bool(p)).collect();
    if out.is_empty() && !pool.is_empty() {
        out.push(*pool.choose(rng).unwrap());
    }
    out
}

pub fn random_instance(rng: &mut ChaCha8Rng, shape: &Shape) -> Instance {
    let slots = *shape.slots.choose(rng).unwrap();
    let horizon = if shape.toy {
        Horizon::toy(slots, shape.day)
    } else {
        Horizon::new(slots, shape.day).expect("whole weeks")
    };
    let rooms = Rooms {
        small: rng.gen_range(1..=3),
        large: rng.gen_range(0..=2),
    };

    let batteries = (0..rng.gen_range(0..=shape.max_batteries))
        .map(|i| {
            let efficiency = *[0.81, 0.9, 1.0].choose(rng).unwrap();
            let max_power = *[2.0, 4.0, 6.0].choose(rng).unwrap();
            let step = max_power * f64::sqrt(efficiency) / 4.0;
            let cells = rng.gen_range(1..=3);
            Battery {
                id: format!("b{}", i + 1),
                capacity: step * f64::from(cells),
                initial: step * f64::from(rng.gen_range(0..=cells)),
                max_power,
                efficiency,
            }
        })
        .collect();

    let mut activities: Vec<Activity> = Vec::new();
    for i in 0..rng.gen_range(shape.min_activities..=shape.max_activities) {
        let recurring = rng.gen_bool(shape.recurring);
        let duration = rng.gen_range(1..=shape.max_duration.min(horizon.week));
        let last = if recurring { horizon.week } else { slots } + 1 - duration;
        let pool: Vec<u32> = (1..=last).collect();
        let starts = subset(rng, &pool, 0.5);
        let (small_rooms, large_rooms) = loop {
            let s = rng.gen_range(0..=rooms.small.min(2));
            let l = rng.gen_range(0..=rooms.large.min(1));
            if s + l > 0 {
                break (s, l);
            }
        };
        let (revenue, penalty, penalized) = if recurring {
            (0.0, 0.0, Vec::new())
        } else {
            let penalized = starts
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.3))
                .collect();
            (
                f64::from(rng.gen_range(0..=60)),
                f64::from(rng.gen_range(0..=20)),
                penalized,
            )
        };
        let prerequisites = match activities.last() {
            Some(p) if rng.gen_bool(shape.precedence) => vec![p.id.clone()],
            _ => Vec::new(),
        };
        activities.push(Activity {
            id: format!("a{}", i + 1),
            kind: if recurring {
                ActivityKind::Recurring
            } else {
                ActivityKind::OnceOff
            },
            duration,
            small_rooms,
            large_rooms,
            load_per_room: f64::from(rng.gen_range(1..=5)),
            revenue,
            penalty,
            starts,
            penalized,
            prerequisites,
        });
    }

    let prices = (0..slots)
        .map(|_| f64::from(rng.gen_range(50..=150)))
        .collect();
    let instance = Instance {
        horizon,
        rooms,
        batteries,
        activities,
        prices,
    };
    let problems = validate_instance(&instance);
    assert!(problems.is_empty(), "generator produced {problems:?}");
    instance
}

/// Removes start options, largest sets first, until the enumeration fits.
pub fn shrink_to_budget(instance: &mut Instance, budget: f64) {
    while search_space(instance) > budget {
        let a = instance
            .activities
            .iter_mut()
            .filter(|a| a.starts.len() > 1)
            .max_by_key(|a| a.starts.len());
        match a {
            Some(a) => {
                let t = a.starts.pop().unwrap();
                a.penalized.retain(|&p| p != t);
            }
            None => {
                instance.batteries.pop();
            }
        }
    }
}

pub fn random_scenarios(rng: &mut ChaCha8Rng, instance: &Instance, count: usize) -> ScenarioSet {
    let n = instance.slots() as usize;
    let series = (0..count)
        .map(|_| {
            (0..n)
                .map(|_| f64::from(rng.gen_range(4..=20)) * 0.5)
                .collect()
        })
        .collect();
    ScenarioSet::new(series).unwrap()
}

/// Battery actions drawn uniformly among those keeping the charge in range.
pub fn random_battery_actions(rng: &mut ChaCha8Rng, instance: &Instance) -> Vec<Vec<Action>> {
    instance
        .batteries
        .iter()
        .map(|b| {
            let mut soc = b.initial;
            (0..instance.slots())
                .map(|_| {
                    let options: Vec<Action> = Action::ALL
                        .into_iter()
                        .filter(|a| {
                            let next = match a {
                                Action::Idle => soc,
                                Action::Charge => soc + b.slot_energy(),
                                Action::Discharge => soc - b.slot_energy(),
                            };
                            (-1e-9..=b.capacity + 1e-9).contains(&next)
                        })
                        .collect();
                    let a = *options.choose(rng).unwrap();
                    match a {
                        Action::Idle => {}
                        Action::Charge => soc += b.slot_energy(),
                        Action::Discharge => soc -= b.slot_energy(),
                    }
                    a
                })
                .collect()
        })
        .collect()
}

/// Any schedule with starts drawn from the allowed sets. May be infeasible.
pub fn random_schedule(rng: &mut ChaCha8Rng, instance: &Instance) -> Schedule {
    let starts = instance
        .activities
        .iter()
        .map(|a| {
            if !a.is_recurring() && rng.gen_bool(0.3) {
                None
            } else {
                a.starts.choose(rng).copied()
            }
        })
        .collect();
    Schedule {
        starts,
        battery: random_battery_actions(rng, instance),
    }
}

/// A schedule the independent oracle accepts, if one turns up in `tries`.
pub fn random_feasible_schedule(
    rng: &mut ChaCha8Rng,
    instance: &Instance,
    tries: usize,
) -> Option<Schedule> {
    (0..tries)
        .map(|_| random_schedule(rng, instance))
        .find(|s| oracle_feasible(instance, s))
}

/// Branch and bound on the preprocessed scenario model with binary peak
/// levels and no limits.
pub fn solve_bnb(instance: &Instance, scenarios: &ScenarioSet) -> saasched::solve::SolveResult {
    use saasched::model::{build_saa, compute_big_m, preprocess_penalized_starts};
    use saasched::solve::{branch_and_bound, BnbOptions, Problem};
    let reduced = preprocess_penalized_starts(instance);
    let model = build_saa(&reduced, scenarios, compute_big_m(&reduced, scenarios)).unwrap();
    let problem = Problem {
        model: &model,
        instance: &reduced,
        scenarios,
    };
    branch_and_bound(&problem, &BnbOptions::default()).unwrap()
}

/// `(instance, scenarios)` pairs small enough for the exact solver.
pub fn oracle_cases(count: usize, budget: f64) -> Vec<(Instance, ScenarioSet)> {
    (0..count as u64)
        .map(|seed| {
            let mut r = rng(seed);
            let mut instance = random_instance(&mut r, &Shape::tiny());
            shrink_to_budget(&mut instance, budget);
            let k = r.gen_range(1..=2);
            let scenarios = random_scenarios(&mut r, &instance, k);
            (instance, scenarios)
        })
        .collect()
}

/// Command template for the bundled HiGHS bridge, when `highspy` imports.
pub fn highs_command() -> Option<String> {
    let script = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scripts/highs_solve.py");
    let ok = std::process::Command::new("python3")
        .args(["-c", "import highspy"])
        .output()
        .is_ok_and(|o| o.status.success());
    ok.then(|| format!("python3 '{script}' {{mps}} {{sol}}"))
}
