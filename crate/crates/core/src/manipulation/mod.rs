//! Coalitions, misreport templates, exhaustive best-response search, and
//! truth-referenced scoring of manipulated outcomes.

mod objective;
mod search;
mod templates;

pub use objective::{ManipulationObjective, ObjectiveScore};
pub use search::{
    best_response, best_response_search, coalition_search, composition_count, joint_search,
    BestResponse, CoalitionResult, SearchConfig,
};
pub use templates::{
    template_defensive, template_exclusionary, template_flatten, DefensiveParams,
    ExclusionaryParams,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::model::{Outcome, ValuationMatrix};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Coalition,
    Victim,
    Defender,
    Helper,
    Beneficiary,
    #[default]
    Honest,
}

impl Role {
    pub const ALL: [Role; 6] = [
        Role::Coalition,
        Role::Victim,
        Role::Defender,
        Role::Helper,
        Role::Beneficiary,
        Role::Honest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Coalition => "coalition",
            Role::Victim => "victim",
            Role::Defender => "defender",
            Role::Helper => "helper",
            Role::Beneficiary => "beneficiary",
            Role::Honest => "honest",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Role::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown role {s:?}")))
    }
}

/// True iff no target agent sits in any of `rooms`.
pub fn exclusion_check(outcome: &Outcome, targets: &[usize], rooms: &[usize]) -> bool {
    targets
        .iter()
        .all(|&a| !rooms.contains(&outcome.assignment.room_of(a)))
}

/// Honest outcome vs. the outcome under misreports, judged with true values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationReport {
    pub honest: Outcome,
    pub manipulated: Outcome,
    /// Manipulated payment minus honest payment, per agent (rooms may differ).
    pub payment_delta: Vec<Rational>,
    /// Change in utility measured with true values.
    pub true_utility_delta: Vec<Rational>,
    /// `(i, j)`: under true values, agent `i` prefers agent `j`'s bundle.
    pub envy_under_truth: Vec<(usize, usize)>,
    pub honest_score: ObjectiveScore,
    pub manipulated_score: ObjectiveScore,
    pub objective_satisfied: bool,
}

/// Agents that, judged by `truth`, strictly prefer someone else's bundle.
pub fn envy_under_truth(truth: &ValuationMatrix, outcome: &Outcome) -> Vec<(usize, usize)> {
    let n = outcome.assignment.n();
    let utilities = outcome.utilities_under(truth);
    let mut out = Vec::new();
    for (i, u) in utilities.iter().enumerate() {
        for j in (0..n).filter(|&j| j != i) {
            let room = outcome.assignment.room_of(j);
            if &(truth.value(i, room) - outcome.prices.price(room)) > u {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn evaluate_deviation(
    mechanism: &Mechanism,
    total_rent: &Rational,
    truth: &ValuationMatrix,
    reported: &ValuationMatrix,
    objective: &ManipulationObjective,
) -> Result<DeviationReport> {
    let honest = mechanism.solve(truth, total_rent)?;
    let manipulated = mechanism.solve(reported, total_rent)?;
    Ok(compare_outcomes(truth, honest, manipulated, objective))
}

/// Builds the report from two already-solved outcomes.
pub fn compare_outcomes(
    truth: &ValuationMatrix,
    honest: Outcome,
    manipulated: Outcome,
    objective: &ManipulationObjective,
) -> DeviationReport {
    let n = honest.assignment.n();
    let payment_delta = (0..n)
        .map(|i| manipulated.payment(i) - honest.payment(i))
        .collect();
    let before = honest.utilities_under(truth);
    let after = manipulated.utilities_under(truth);
    let true_utility_delta = after.iter().zip(&before).map(|(a, b)| a - b).collect();
    let honest_score = objective.score(truth, &honest);
    let manipulated_score = objective.score(truth, &manipulated);
    let objective_satisfied = objective.satisfied(&honest_score, &manipulated_score);
    DeviationReport {
        envy_under_truth: envy_under_truth(truth, &manipulated),
        honest,
        manipulated,
        payment_delta,
        true_utility_delta,
        honest_score,
        manipulated_score,
        objective_satisfied,
    }
}
