//! The five reference scenarios: honest reports for a five-room, $36
//! apartment and four coordinated misreports of it.

use super::{ExpectedOutcome, Scenario};
use crate::manipulation::Role;
use crate::model::{Assignment, Instance, PriceVector, ValuationMatrix};
use crate::rational::Rational;

pub const TOTAL_RENT: i64 = 36;

pub const BASELINE: [[i64; 5]; 5] = [
    [10, 8, 8, 5, 5],
    [10, 9, 7, 6, 4],
    [9, 10, 8, 5, 4],
    [10, 9, 8, 6, 3],
    [10, 8, 9, 5, 4],
];

pub const SCENARIO1: [[i64; 5]; 5] = [
    [15, 2, 1, 9, 9],
    [1, 15, 2, 9, 9],
    [2, 1, 15, 9, 9],
    [10, 9, 8, 6, 3],
    [10, 8, 9, 5, 4],
];

pub const SCENARIO2: [[i64; 5]; 5] = [
    [15, 2, 1, 9, 9],
    [1, 15, 2, 9, 9],
    [2, 1, 15, 9, 9],
    [12, 12, 1, 6, 5],
    [1, 12, 12, 6, 5],
];

pub const SCENARIO3: [[i64; 5]; 5] = [
    [3, 10, 9, 7, 7],
    [3, 9, 10, 7, 7],
    [10, 3, 3, 10, 10],
    [9, 3, 3, 11, 10],
    [10, 8, 9, 5, 4],
];

pub const SCENARIO4: [[i64; 5]; 5] = [
    [10, 8, 8, 5, 5],
    [10, 9, 7, 6, 4],
    [9, 10, 8, 5, 4],
    [7, 7, 7, 8, 7],
    [7, 7, 7, 7, 8],
];

struct Entry {
    name: &'static str,
    id: &'static str,
    reports: [[i64; 5]; 5],
    roles: [Role; 5],
    /// Room index per agent A..E.
    assignment: [usize; 5],
    /// Cents, per room R1..R5.
    prices: [i64; 5],
    notes: &'static str,
}

use Role::*;

const ENTRIES: [Entry; 5] = [
    Entry {
        name: "Baseline: Honest Reporting",
        id: "baseline",
        reports: BASELINE,
        roles: [Honest; 5],
        assignment: [4, 3, 1, 0, 2],
        prices: [920, 920, 820, 520, 420],
        notes: "Everyone reports truthfully.",
    },
    Entry {
        name: "Scenario 1: Exclusionary Collusion",
        id: "exclusionary-collusion",
        reports: SCENARIO1,
        roles: [Coalition, Coalition, Coalition, Victim, Victim],
        assignment: [0, 1, 2, 3, 4],
        prices: [920, 920, 920, 520, 320],
        notes:
            "Majority exploits minority: A, B, C overbid 15 on R1, R2, R3 and report 9 on R4, R5.",
    },
    Entry {
        name: "Scenario 2: Failed Counter-Attack",
        id: "failed-counter-attack",
        reports: SCENARIO2,
        roles: [Coalition, Coalition, Coalition, Defender, Defender],
        assignment: [3, 1, 4, 0, 2],
        prices: [960, 960, 960, 360, 360],
        notes: "Defense increases own costs: D and E inflate two rooms each to 12.",
    },
    Entry {
        name: "Scenario 3: Benevolent Collusion",
        id: "benevolent-collusion",
        reports: SCENARIO3,
        roles: [Helper, Helper, Helper, Helper, Beneficiary],
        assignment: [1, 2, 4, 3, 0],
        prices: [700, 700, 700, 800, 700],
        notes: "Secret subsidy for E: four helpers steer E into R1 at a reduced price.",
    },
    Entry {
        name: "Scenario 4: Cost Minimization",
        id: "cost-minimization",
        reports: SCENARIO4,
        roles: [Honest, Honest, Honest, Coalition, Coalition],
        assignment: [2, 0, 1, 3, 4],
        prices: [800, 800, 600, 700, 700],
        notes: "Coalition achieves savings: D and E flatten their reports to 7s and 8s.",
    },
];

fn build(e: &Entry) -> Scenario {
    let rent = Rational::integer(TOTAL_RENT);
    let instance = Instance::lettered(5, rent.clone()).expect("valid roster");
    let reported = ValuationMatrix::from_integers(&e.reports);
    let truth = ValuationMatrix::from_integers(&BASELINE);
    let prices = e.prices.iter().map(|&c| Rational::new(c, 100)).collect();
    Scenario {
        name: e.name.to_string(),
        id: e.id.to_string(),
        instance,
        true_matrix: (e.id != "baseline").then_some(truth),
        reported_matrix: reported,
        roles: e.roles.to_vec(),
        expected: Some(ExpectedOutcome {
            assignment: Assignment::new(e.assignment.to_vec()).expect("bijection"),
            prices: PriceVector::new(prices, &rent).expect("budget balanced"),
            tolerance: Rational::zero(),
        }),
        notes: e.notes.to_string(),
    }
}

/// Baseline followed by the four manipulation scenarios, in table order.
/// The honest matrix is the true profile for every manipulation scenario.
pub fn builtin_scenarios() -> Vec<Scenario> {
    ENTRIES.iter().map(build).collect()
}

/// Looks a builtin up by id (`cost-minimization`) or full name.
pub fn builtin(key: &str) -> Option<Scenario> {
    ENTRIES
        .iter()
        .find(|s| s.id == key || s.name.eq_ignore_ascii_case(key))
        .map(build)
}

pub fn builtin_ids() -> Vec<&'static str> {
    ENTRIES.iter().map(|s| s.id).collect()
}
