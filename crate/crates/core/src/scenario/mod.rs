//! Scenarios: a roster, true and reported valuations, role labels and an
//! optional expected outcome to check the mechanism against.

pub mod builtin;
mod format;

pub use builtin::{builtin, builtin_ids, builtin_scenarios};
pub use format::{load_scenario, parse_scenario, save_scenario, scenario_to_json};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fm::{Feasibility, MAX_VARIABLES};
use crate::manipulation::Role;
use crate::matching::is_welfare_maximizing;
use crate::mechanism::Mechanism;
use crate::model::{
    validate_instance, Assignment, Instance, Outcome, PriceVector, ValuationMatrix,
};
use crate::pricing::{
    certificate_epsilon, compute_min_utility, is_envy_free, maximin_prices_with, EFConstraintSystem,
};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedOutcome {
    pub assignment: Assignment,
    pub prices: PriceVector,
    /// Largest acceptable absolute price difference, in currency units.
    pub tolerance: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    /// Short machine name, e.g. `cost-minimization`.
    pub id: String,
    pub instance: Instance,
    /// Absent when everyone reports truthfully.
    pub true_matrix: Option<ValuationMatrix>,
    pub reported_matrix: ValuationMatrix,
    pub roles: Vec<Role>,
    pub expected: Option<ExpectedOutcome>,
    pub notes: String,
}

impl Scenario {
    /// True valuations, falling back to the reports.
    pub fn truth(&self) -> &ValuationMatrix {
        self.true_matrix.as_ref().unwrap_or(&self.reported_matrix)
    }

    pub fn validate(&self) -> Result<()> {
        validate_instance(&self.instance, &self.reported_matrix)?;
        if let Some(t) = &self.true_matrix {
            validate_instance(&self.instance, t)?;
        }
        if self.roles.len() != self.instance.n() {
            return Err(Error::InvalidArgument(format!(
                "{} roles for {} agents",
                self.roles.len(),
                self.instance.n()
            )));
        }
        if let Some(e) = &self.expected {
            if e.assignment.n() != self.instance.n()
                || e.prices.as_slice().len() != self.instance.n()
            {
                return Err(Error::InvalidArgument(
                    "expected outcome has the wrong size".into(),
                ));
            }
            PriceVector::new(e.prices.as_slice().to_vec(), self.instance.total_rent())?;
            if e.tolerance.is_negative() {
                return Err(Error::InvalidArgument(
                    "tolerance must be nonnegative".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn agents_with_role(&self, role: Role) -> Vec<usize> {
        (0..self.roles.len())
            .filter(|&i| self.roles[i] == role)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Match,
    EquivalentMatch,
    Mismatch,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Match => "match",
            Verdict::EquivalentMatch => "equivalent-match",
            Verdict::Mismatch => "mismatch",
        }
    }

    pub fn is_ok(self) -> bool {
        self != Verdict::Mismatch
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscrepancyReport {
    /// Computed minus expected, per room.
    pub price_diffs: Vec<Rational>,
    pub prices_within_tolerance: bool,
    pub assignment_identical: bool,
    /// The expected assignment is also welfare-maximizing for the reports.
    pub assignment_equivalent: bool,
    pub expected_is_envy_free: bool,
    /// Envy-free and no envy-free price vector for the expected assignment
    /// gives everyone more than the expected minimum utility.
    pub expected_is_maximin: bool,
    pub expected_min_utility: Rational,
    pub computed_min_utility: Rational,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioRun {
    pub outcome: Outcome,
    pub report: Option<DiscrepancyReport>,
}

/// Solves the reported profile and, when an expected outcome is present,
/// classifies the agreement.
pub fn run_scenario(scenario: &Scenario, mechanism: &Mechanism) -> Result<ScenarioRun> {
    scenario.validate()?;
    let matrix = &scenario.reported_matrix;
    let rent = scenario.instance.total_rent();
    let outcome = mechanism.solve(matrix, rent)?;
    let report = scenario
        .expected
        .as_ref()
        .map(|e| compare(matrix, rent, mechanism, &outcome, e))
        .transpose()?;
    Ok(ScenarioRun { outcome, report })
}

fn compare(
    matrix: &ValuationMatrix,
    rent: &Rational,
    mechanism: &Mechanism,
    outcome: &Outcome,
    expected: &ExpectedOutcome,
) -> Result<DiscrepancyReport> {
    let price_diffs: Vec<Rational> = outcome
        .prices
        .as_slice()
        .iter()
        .zip(expected.prices.as_slice())
        .map(|(c, e)| c - e)
        .collect();
    let prices_within_tolerance = price_diffs.iter().all(|d| d.abs() <= expected.tolerance);
    let assignment_identical = outcome.assignment == expected.assignment;
    let assignment_equivalent = is_welfare_maximizing(matrix, &expected.assignment);
    let expected_is_envy_free = is_envy_free(matrix, &expected.assignment, &expected.prices);
    let expected_min_utility = compute_min_utility(matrix, &expected.assignment, &expected.prices);

    let expected_is_maximin = expected_is_envy_free && {
        let options = mechanism.pricing;
        if matrix.n() <= MAX_VARIABLES {
            let system = EFConstraintSystem::new(matrix, &expected.assignment, rent, &options);
            let above = &expected_min_utility + &certificate_epsilon();
            system.admits_min_utility(&above)? == Feasibility::Infeasible
        } else {
            let best = maximin_prices_with(matrix, &expected.assignment, rent, &options)?;
            best.min_utility == expected_min_utility
        }
    };

    let verdict = match (
        prices_within_tolerance,
        assignment_identical,
        assignment_equivalent,
    ) {
        (true, true, _) => Verdict::Match,
        (true, false, true) => Verdict::EquivalentMatch,
        _ => Verdict::Mismatch,
    };
    Ok(DiscrepancyReport {
        price_diffs,
        prices_within_tolerance,
        assignment_identical,
        assignment_equivalent,
        expected_is_envy_free,
        expected_is_maximin,
        expected_min_utility,
        computed_min_utility: outcome.min_utility.clone(),
        verdict,
    })
}
