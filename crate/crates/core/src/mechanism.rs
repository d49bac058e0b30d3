//! The full mechanism: assignment first, then prices.

use crate::error::Result;
use crate::matching::{is_welfare_maximizing, max_welfare_assignment};
use crate::model::{validate_instance, Assignment, Instance, Outcome, ValuationMatrix};
use crate::pricing::{maximin_prices_with, PricingOptions};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Mechanism {
    pub pricing: PricingOptions,
}

impl Mechanism {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn nonnegative_prices(mut self, on: bool) -> Self {
        self.pricing.nonnegative_prices = on;
        self
    }

    /// Validates, then solves.
    pub fn run(&self, instance: &Instance, matrix: &ValuationMatrix) -> Result<Outcome> {
        validate_instance(instance, matrix)?;
        self.solve(matrix, instance.total_rent())
    }

    /// Solves without validating row sums (callers that generate rows
    /// themselves already guarantee them).
    pub fn solve(&self, matrix: &ValuationMatrix, total_rent: &Rational) -> Result<Outcome> {
        let assignment = max_welfare_assignment(matrix).assignment;
        self.solve_with_assignment(matrix, assignment, total_rent)
    }

    /// Prices a caller-chosen assignment; fails unless it is welfare-maximizing.
    pub fn solve_with_assignment(
        &self,
        matrix: &ValuationMatrix,
        assignment: Assignment,
        total_rent: &Rational,
    ) -> Result<Outcome> {
        let sol = maximin_prices_with(matrix, &assignment, total_rent, &self.pricing)?;
        Ok(Outcome::new(matrix, assignment, sol.prices))
    }

    pub fn accepts(&self, matrix: &ValuationMatrix, assignment: &Assignment) -> bool {
        is_welfare_maximizing(matrix, assignment)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testdata::*;

    fn room_vec(o: &Outcome) -> Vec<usize> {
        o.assignment.rooms_by_agent().to_vec()
    }

    #[test]
    fn reproduces_table_assignments() {
        let m = Mechanism::new();
        let (inst, v) = baseline();
        assert_eq!(room_vec(&m.run(&inst, &v).unwrap()), [4, 3, 1, 0, 2]);
        let (inst, v) = scenario1_reports();
        assert_eq!(room_vec(&m.run(&inst, &v).unwrap()), [0, 1, 2, 3, 4]);
        let (inst, v) = scenario3_reports();
        assert_eq!(room_vec(&m.run(&inst, &v).unwrap()), [1, 2, 4, 3, 0]);
        let (inst, v) = scenario4_reports();
        assert_eq!(room_vec(&m.run(&inst, &v).unwrap()), [2, 0, 1, 3, 4]);
    }

    #[test]
    fn pinned_assignment_must_be_optimal() {
        let (inst, v) = scenario2_reports();
        let printed = Assignment::new(vec![3, 1, 4, 0, 2]).unwrap();
        let o = Mechanism::new()
            .solve_with_assignment(&v, printed, inst.total_rent())
            .unwrap();
        assert_eq!(o.payment(3), &"9.6".parse().unwrap());
        assert_eq!(o.payment(4), &"9.6".parse().unwrap());
        assert!(Mechanism::new()
            .solve_with_assignment(&v, Assignment::identity(5), inst.total_rent())
            .is_err());
    }

    #[test]
    fn run_validates() {
        let (inst, v) = baseline();
        let bad = v.with_row(0, vec![Rational::integer(36); 5]);
        assert!(Mechanism::new().run(&inst, &bad).is_err());
    }
}
