//! Exhaustive misreport search over the grid of rows that are nonnegative
//! multiples of a step and sum to the total rent.

use std::cmp::Ordering;

use rayon::prelude::*;

use super::objective::{ManipulationObjective, ObjectiveScore};
use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::model::ValuationMatrix;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub step: Rational,
    /// Largest candidate count a single search may enumerate.
    pub budget: u128,
    /// Coordinate-ascent round cap for coalitions.
    pub max_rounds: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            step: Rational::one(),
            budget: 10_000_000,
            max_rounds: 10,
        }
    }
}

/// `C(units + parts - 1, parts - 1)`, saturating.
pub fn composition_count(units: u64, parts: usize) -> u128 {
    if parts == 0 {
        return u128::from(units == 0);
    }
    let k = (parts - 1) as u128;
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc * (units + i) / i stays integral at every step
        acc = match acc.checked_mul(u128::from(units) + i) {
            Some(x) => x / i,
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of grid units in the rent, or `InvalidStep`.
fn grid_units(total_rent: &Rational, step: &Rational) -> Result<u64> {
    if !step.is_positive() {
        return Err(Error::InvalidStep(step.clone()));
    }
    let units = total_rent / step;
    if !units.is_integer() {
        return Err(Error::InvalidStep(step.clone()));
    }
    units
        .as_small()
        .and_then(|(num, _)| u64::try_from(num).ok())
        .ok_or_else(|| Error::InvalidStep(step.clone()))
}

/// Calls `visit` on every composition of `units` into `buf.len() - fixed`
/// trailing parts, in lexicographic order, leaving `buf[..fixed]` alone.
fn for_each_composition(buf: &mut [u64], fixed: usize, units: u64, visit: &mut impl FnMut(&[u64])) {
    let n = buf.len();
    if fixed == n {
        if units == 0 {
            visit(buf);
        }
        return;
    }
    if fixed == n - 1 {
        buf[fixed] = units;
        visit(buf);
        return;
    }
    for c in 0..=units {
        buf[fixed] = c;
        for_each_composition(buf, fixed + 1, units - c, visit);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestResponse {
    pub row: Vec<Rational>,
    pub score: ObjectiveScore,
    /// Score when the agent keeps its row from the starting profile.
    pub baseline_score: ObjectiveScore,
    pub candidates: u128,
}

/// Higher score wins; equal scores go to the lexicographically smaller row.
fn better(a: &(ObjectiveScore, Vec<Rational>), b: &(ObjectiveScore, Vec<Rational>)) -> Ordering {
    a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1))
}

fn pick(
    a: Option<(ObjectiveScore, Vec<Rational>)>,
    b: Option<(ObjectiveScore, Vec<Rational>)>,
) -> Option<(ObjectiveScore, Vec<Rational>)> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if better(&a, &b) == Ordering::Less {
            b
        } else {
            a
        }),
        (a, b) => a.or(b),
    }
}

struct Evaluator<'a> {
    mechanism: &'a Mechanism,
    truth: &'a ValuationMatrix,
    total_rent: &'a Rational,
    objective: &'a ManipulationObjective,
}

impl Evaluator<'_> {
    /// `None` when the mechanism cannot price the profile (only possible
    /// with extra pricing constraints switched on).
    fn score(&self, profile: &ValuationMatrix) -> Option<ObjectiveScore> {
        let outcome = self.mechanism.solve(profile, self.total_rent).ok()?;
        Some(self.objective.score(self.truth, &outcome))
    }
}

/// Best row for `agent` with every other row held at `base`, scored against
/// `truth`. The agent's current row in `base` is always a candidate, even
/// when it is off the grid, so the result is never worse than standing pat.
#[allow(clippy::too_many_arguments)]
pub fn best_response(
    mechanism: &Mechanism,
    truth: &ValuationMatrix,
    base: &ValuationMatrix,
    total_rent: &Rational,
    agent: usize,
    objective: &ManipulationObjective,
    config: &SearchConfig,
) -> Result<BestResponse> {
    let n = truth.n();
    if agent >= n {
        return Err(Error::InvalidArgument(format!(
            "agent index {agent} out of range"
        )));
    }
    objective.check(n)?;
    let units = grid_units(total_rent, &config.step)?;
    let count = composition_count(units, n);
    if count > config.budget {
        return Err(Error::SearchSpaceTooLarge {
            count,
            budget: config.budget,
        });
    }
    let eval = Evaluator {
        mechanism,
        truth,
        total_rent,
        objective,
    };
    let current = base.row(agent).to_vec();
    let baseline_score = eval
        .score(base)
        .ok_or(Error::Solver("infeasible at the starting profile"))?;

    let step = &config.step;
    let search_from = |first: u64| {
        let mut profile = base.clone();
        let mut buf = vec![0u64; n];
        buf[0] = first;
        let mut best: Option<(ObjectiveScore, Vec<Rational>)> = None;
        for_each_composition(&mut buf, 1, units - first, &mut |c| {
            let row: Vec<Rational> = c.iter().map(|&x| step * &Rational::from(x)).collect();
            profile.set_row(agent, row.clone());
            if let Some(s) = eval.score(&profile) {
                best = pick(best.take(), Some((s, row)));
            }
        });
        best
    };
    let grid_best = (0..=units)
        .into_par_iter()
        .map(search_from)
        .reduce(|| None, pick);

    let (score, row) = pick(grid_best, Some((baseline_score.clone(), current)))
        .expect("starting row is always a candidate");
    Ok(BestResponse {
        row,
        score,
        baseline_score,
        candidates: count,
    })
}

/// Best misreport for a single agent against truthful opponents.
pub fn best_response_search(
    mechanism: &Mechanism,
    truth: &ValuationMatrix,
    total_rent: &Rational,
    agent: usize,
    objective: &ManipulationObjective,
    config: &SearchConfig,
) -> Result<BestResponse> {
    best_response(
        mechanism, truth, truth, total_rent, agent, objective, config,
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalitionResult {
    pub reported: ValuationMatrix,
    pub score: ObjectiveScore,
    pub honest_score: ObjectiveScore,
    pub converged: bool,
    pub rounds: usize,
    /// Score after each completed round.
    pub history: Vec<ObjectiveScore>,
}

/// Coordinate ascent: members take turns (in the given order) switching to
/// their best response while the others hold still. A row is replaced only
/// on strict improvement, so the score never decreases. Stops after a round
/// with no change (`converged`) or after `max_rounds`.
pub fn coalition_search(
    mechanism: &Mechanism,
    truth: &ValuationMatrix,
    total_rent: &Rational,
    coalition: &[usize],
    objective: &ManipulationObjective,
    config: &SearchConfig,
) -> Result<CoalitionResult> {
    let mut reported = truth.clone();
    let eval = Evaluator {
        mechanism,
        truth,
        total_rent,
        objective,
    };
    let honest_score = eval
        .score(truth)
        .ok_or(Error::Solver("infeasible at the honest profile"))?;
    let mut score = honest_score.clone();
    let mut history = Vec::new();
    let mut converged = false;
    let mut rounds = 0;
    while rounds < config.max_rounds {
        rounds += 1;
        let mut changed = false;
        for &agent in coalition {
            let br = best_response(
                mechanism, truth, &reported, total_rent, agent, objective, config,
            )?;
            if br.score > score {
                reported.set_row(agent, br.row);
                score = br.score;
                changed = true;
            }
        }
        history.push(score.clone());
        if !changed {
            converged = true;
            break;
        }
    }
    Ok(CoalitionResult {
        reported,
        score,
        honest_score,
        converged,
        rounds,
        history,
    })
}

/// Joint enumeration over every combination of member rows. The candidate
/// count is the per-row count raised to the coalition size and must fit the
/// budget. Ties go to the lexicographically smallest concatenation of rows.
pub fn joint_search(
    mechanism: &Mechanism,
    truth: &ValuationMatrix,
    total_rent: &Rational,
    coalition: &[usize],
    objective: &ManipulationObjective,
    config: &SearchConfig,
) -> Result<CoalitionResult> {
    let n = truth.n();
    objective.check(n)?;
    let units = grid_units(total_rent, &config.step)?;
    let per_row = composition_count(units, n);
    let count = (0..coalition.len()).try_fold(1u128, |acc, _| acc.checked_mul(per_row));
    let count = count.unwrap_or(u128::MAX);
    if count > config.budget {
        return Err(Error::SearchSpaceTooLarge {
            count,
            budget: config.budget,
        });
    }
    let eval = Evaluator {
        mechanism,
        truth,
        total_rent,
        objective,
    };
    let honest_score = eval
        .score(truth)
        .ok_or(Error::Solver("infeasible at the honest profile"))?;

    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut buf = vec![0u64; n];
    for_each_composition(&mut buf, 0, units, &mut |c| {
        rows.push(
            c.iter()
                .map(|&x| &config.step * &Rational::from(x))
                .collect(),
        );
    });

    let honest_key: Vec<Rational> = coalition
        .iter()
        .flat_map(|&a| truth.row(a).to_vec())
        .collect();
    let mut best = Some((honest_score.clone(), honest_key));
    let mut choice = vec![0usize; coalition.len()];
    let mut profile = truth.clone();
    'outer: loop {
        for (&a, &k) in coalition.iter().zip(&choice) {
            profile.set_row(a, rows[k].clone());
        }
        if let Some(s) = eval.score(&profile) {
            let key = choice.iter().flat_map(|&k| rows[k].clone()).collect();
            best = pick(best, Some((s, key)));
        }
        for slot in (0..choice.len()).rev() {
            choice[slot] += 1;
            if choice[slot] < rows.len() {
                continue 'outer;
            }
            choice[slot] = 0;
        }
        break;
    }

    let (score, key) = best.expect("honest profile is a candidate");
    let mut reported = truth.clone();
    for (m, &a) in coalition.iter().enumerate() {
        reported.set_row(a, key[m * n..(m + 1) * n].to_vec());
    }
    Ok(CoalitionResult {
        reported,
        score: score.clone(),
        honest_score,
        converged: true,
        rounds: 1,
        history: vec![score],
    })
}
