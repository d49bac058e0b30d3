//! Domain vocabulary: instances, valuations, assignments, prices and outcomes.
//!
//! Agents and rooms are addressed by their roster index everywhere inside the
//! crate; labels live on [`Instance`] and are only consulted for I/O.

use std::collections::HashSet;

use crate::error::{Error, ValidationError};
use crate::rational::{MoneyRounding, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    rooms: Vec<String>,
    agents: Vec<String>,
    total_rent: Rational,
}

fn check_unique(kind: &'static str, labels: &[String]) -> Result<(), ValidationError> {
    let mut seen = HashSet::new();
    for label in labels {
        if !seen.insert(label.as_str()) {
            return Err(ValidationError::DuplicateLabel {
                kind,
                label: label.clone(),
            });
        }
    }
    Ok(())
}

impl Instance {
    pub fn new(
        rooms: Vec<String>,
        agents: Vec<String>,
        total_rent: Rational,
    ) -> Result<Self, ValidationError> {
        if rooms.is_empty() || agents.is_empty() {
            return Err(ValidationError::Empty);
        }
        if rooms.len() != agents.len() {
            return Err(ValidationError::CountMismatch {
                agents: agents.len(),
                rooms: rooms.len(),
            });
        }
        check_unique("room", &rooms)?;
        check_unique("agent", &agents)?;
        if !total_rent.is_positive() {
            return Err(ValidationError::NonPositiveRent(total_rent));
        }
        Ok(Instance {
            rooms,
            agents,
            total_rent,
        })
    }

    /// Agents `A, B, C, ...` and rooms `R1, R2, ...`.
    pub fn lettered(n: usize, total_rent: Rational) -> Result<Self, ValidationError> {
        let agents = (0..n)
            .map(|i| {
                if i < 26 {
                    char::from(b'A' + i as u8).to_string()
                } else {
                    format!("P{}", i + 1)
                }
            })
            .collect();
        let rooms = (1..=n).map(|j| format!("R{j}")).collect();
        Instance::new(rooms, agents, total_rent)
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn rooms(&self) -> &[String] {
        &self.rooms
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn total_rent(&self) -> &Rational {
        &self.total_rent
    }

    pub fn agent(&self, i: usize) -> &str {
        &self.agents[i]
    }

    pub fn room(&self, j: usize) -> &str {
        &self.rooms[j]
    }

    pub fn agent_index(&self, label: &str) -> Result<usize, Error> {
        self.agents
            .iter()
            .position(|a| a == label)
            .ok_or_else(|| Error::UnknownLabel {
                kind: "agent",
                label: label.to_string(),
            })
    }

    pub fn room_index(&self, label: &str) -> Result<usize, Error> {
        self.rooms
            .iter()
            .position(|r| r == label)
            .ok_or_else(|| Error::UnknownLabel {
                kind: "room",
                label: label.to_string(),
            })
    }

    /// Same rosters, total rent multiplied by `factor`.
    pub fn scaled(&self, factor: &Rational) -> Result<Self, ValidationError> {
        Instance::new(
            self.rooms.clone(),
            self.agents.clone(),
            &self.total_rent * factor,
        )
    }
}

/// Agent-by-room values. Row `i` is agent `i`'s valuation of every room.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ValuationMatrix {
    rows: Vec<Vec<Rational>>,
}

impl ValuationMatrix {
    pub fn new(rows: Vec<Vec<Rational>>) -> Self {
        ValuationMatrix { rows }
    }

    pub fn from_integers<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        ValuationMatrix {
            rows: rows
                .iter()
                .map(|r| r.as_ref().iter().map(|&v| Rational::integer(v)).collect())
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn value(&self, agent: usize, room: usize) -> &Rational {
        &self.rows[agent][room]
    }

    pub fn row(&self, agent: usize) -> &[Rational] {
        &self.rows[agent]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn with_row(&self, agent: usize, row: Vec<Rational>) -> Self {
        let mut rows = self.rows.clone();
        rows[agent] = row;
        ValuationMatrix { rows }
    }

    pub fn set_row(&mut self, agent: usize, row: Vec<Rational>) {
        self.rows[agent] = row;
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        ValuationMatrix {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|v| v * factor).collect())
                .collect(),
        }
    }

    /// Relabels agents and rooms: entry `(i, j)` of the result is entry
    /// `(agent_perm[i], room_perm[j])` of `self`.
    pub fn permuted(&self, agent_perm: &[usize], room_perm: &[usize]) -> Self {
        ValuationMatrix {
            rows: agent_perm
                .iter()
                .map(|&a| room_perm.iter().map(|&r| self.rows[a][r].clone()).collect())
                .collect(),
        }
    }
}

/// Checks dimensions, nonnegativity and the exact row-sum contract.
pub fn validate_instance(
    instance: &Instance,
    matrix: &ValuationMatrix,
) -> Result<(), ValidationError> {
    let n = instance.n();
    let bad_col = matrix.rows.iter().find(|r| r.len() != n);
    if matrix.n() != n || bad_col.is_some() {
        return Err(ValidationError::DimensionMismatch {
            rows: matrix.n(),
            cols: bad_col.map_or(n, Vec::len),
            expected: n,
        });
    }
    for (i, row) in matrix.rows.iter().enumerate() {
        if let Some(j) = row.iter().position(Rational::is_negative) {
            return Err(ValidationError::NegativeValue {
                agent: instance.agent(i).to_string(),
                room: instance.room(j).to_string(),
            });
        }
        let sum: Rational = row.iter().sum();
        if &sum != instance.total_rent() {
            return Err(ValidationError::RowSumMismatch {
                agent: instance.agent(i).to_string(),
                actual: sum,
                expected: instance.total_rent().clone(),
            });
        }
    }
    Ok(())
}

/// Agent-to-room bijection, stored as the room index of each agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(Vec<usize>);

impl Assignment {
    pub fn new(rooms_by_agent: Vec<usize>) -> Result<Self, ValidationError> {
        let n = rooms_by_agent.len();
        let mut seen = vec![false; n];
        for &r in &rooms_by_agent {
            if r >= n || std::mem::replace(&mut seen[r], true) {
                return Err(ValidationError::NotABijection);
            }
        }
        Ok(Assignment(rooms_by_agent))
    }

    pub fn identity(n: usize) -> Self {
        Assignment((0..n).collect())
    }

    /// Builds from `(agent label, room label)` pairs.
    pub fn from_labels<'a, I>(instance: &Instance, pairs: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut rooms = vec![usize::MAX; instance.n()];
        for (a, r) in pairs {
            let i = instance.agent_index(a)?;
            if rooms[i] != usize::MAX {
                return Err(ValidationError::NotABijection.into());
            }
            rooms[i] = instance.room_index(r)?;
        }
        if rooms.contains(&usize::MAX) {
            return Err(ValidationError::NotABijection.into());
        }
        Ok(Assignment::new(rooms)?)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn room_of(&self, agent: usize) -> usize {
        self.0[agent]
    }

    pub fn rooms_by_agent(&self) -> &[usize] {
        &self.0
    }

    /// Inverse map: the agent occupying each room.
    pub fn agents_by_room(&self) -> Vec<usize> {
        let mut inv = vec![0; self.0.len()];
        for (agent, &room) in self.0.iter().enumerate() {
            inv[room] = agent;
        }
        inv
    }

    pub fn welfare(&self, matrix: &ValuationMatrix) -> Rational {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &r)| matrix.value(i, r))
            .sum()
    }

    pub fn to_labels(&self, instance: &Instance) -> Vec<(String, String)> {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &r)| (instance.agent(i).to_string(), instance.room(r).to_string()))
            .collect()
    }
}

/// Room prices indexed by room.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PriceVector(Vec<Rational>);

impl PriceVector {
    /// Accepts only budget-balanced vectors.
    pub fn new(prices: Vec<Rational>, total_rent: &Rational) -> Result<Self, ValidationError> {
        let actual: Rational = prices.iter().sum();
        if &actual != total_rent {
            return Err(ValidationError::BudgetImbalance {
                actual,
                expected: total_rent.clone(),
            });
        }
        Ok(PriceVector(prices))
    }

    pub(crate) fn new_unchecked(prices: Vec<Rational>) -> Self {
        PriceVector(prices)
    }

    pub fn price(&self, room: usize) -> &Rational {
        &self.0[room]
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn total(&self) -> Rational {
        self.0.iter().sum()
    }
}

/// `u_i = v_i(room of i) - price(room of i)` for every agent.
pub fn compute_utilities(
    matrix: &ValuationMatrix,
    assignment: &Assignment,
    prices: &PriceVector,
) -> Vec<Rational> {
    (0..assignment.n())
        .map(|i| {
            let r = assignment.room_of(i);
            matrix.value(i, r) - prices.price(r)
        })
        .collect()
}

pub fn render_money(x: &Rational, mode: MoneyRounding) -> String {
    x.render_money(mode)
}

/// A solved allocation: who lives where, what each room costs, and the
/// resulting (reported-value) utilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub assignment: Assignment,
    pub prices: PriceVector,
    pub utilities: Vec<Rational>,
    pub welfare: Rational,
    pub min_utility: Rational,
}

impl Outcome {
    pub fn new(matrix: &ValuationMatrix, assignment: Assignment, prices: PriceVector) -> Self {
        let utilities = compute_utilities(matrix, &assignment, &prices);
        let welfare = assignment.welfare(matrix);
        let min_utility = utilities
            .iter()
            .min()
            .cloned()
            .expect("outcome has at least one agent");
        Outcome {
            assignment,
            prices,
            utilities,
            welfare,
            min_utility,
        }
    }

    /// Rent paid by `agent`.
    pub fn payment(&self, agent: usize) -> &Rational {
        self.prices.price(self.assignment.room_of(agent))
    }

    /// Utilities recomputed against another valuation (typically the true one).
    pub fn utilities_under(&self, matrix: &ValuationMatrix) -> Vec<Rational> {
        compute_utilities(matrix, &self.assignment, &self.prices)
    }
}
