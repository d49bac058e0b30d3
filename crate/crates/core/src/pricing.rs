//! Maximin envy-free prices for a fixed welfare-maximizing assignment.
//!
//! The price vector maximizes the minimum utility subject to envy-freeness
//! and budget balance; remaining freedom is removed by a leximin refinement,
//! which makes the utility vector (and hence the prices) unique. On the plain
//! envy-free polytope the refinement has a closed form via shortest paths;
//! with extra price constraints it runs as a sequence of linear programs.

use crate::error::{Error, Result};
use crate::fm::{fm_feasible, Feasibility, LinearRow};
use crate::lp::{simplex_solve, LinearProgram, LpOutcome, Relation};
use crate::model::{compute_utilities, Assignment, PriceVector, ValuationMatrix};
use crate::rational::Rational;

/// Margin used by optimality certificates: an optimum `t*` is certified when
/// the system is feasible at `t*` and infeasible at `t* + CERTIFICATE_EPSILON`.
pub fn certificate_epsilon() -> Rational {
    Rational::new(1, 1000)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PricingOptions {
    /// Adds `price >= 0` for every room.
    pub nonnegative_prices: bool,
}

/// The envy-freeness polytope of one assignment, in price variables
/// (one per room).
#[derive(Debug, Clone)]
pub struct EFConstraintSystem {
    /// `(agent, room, rhs)` meaning `p[room of agent] - p[room] <= rhs`.
    pub envy: Vec<(usize, usize, Rational)>,
    pub total_rent: Rational,
    /// `v_i(room of i)`, used to turn utility bounds into price bounds.
    pub own_values: Vec<Rational>,
    pub assignment: Assignment,
    pub nonnegative_prices: bool,
}

impl EFConstraintSystem {
    pub fn new(
        matrix: &ValuationMatrix,
        assignment: &Assignment,
        total_rent: &Rational,
        options: &PricingOptions,
    ) -> Self {
        let n = assignment.n();
        let mut envy = Vec::with_capacity(n * n.saturating_sub(1));
        for i in 0..n {
            let own = assignment.room_of(i);
            for j in (0..n).filter(|&j| j != own) {
                envy.push((i, j, matrix.value(i, own) - matrix.value(i, j)));
            }
        }
        EFConstraintSystem {
            envy,
            total_rent: total_rent.clone(),
            own_values: (0..n)
                .map(|i| matrix.value(i, assignment.room_of(i)).clone())
                .collect(),
            assignment: assignment.clone(),
            nonnegative_prices: options.nonnegative_prices,
        }
    }

    pub fn n(&self) -> usize {
        self.own_values.len()
    }

    /// The system plus `u_i >= min_utility` for every agent, as rows for the
    /// elimination oracle.
    pub fn fm_rows(&self, min_utility: Option<&Rational>) -> Vec<LinearRow> {
        let n = self.n();
        let unit = |k: usize| {
            let mut c = vec![Rational::zero(); n];
            c[k] = Rational::one();
            c
        };
        let mut rows = Vec::new();
        for (i, j, rhs) in &self.envy {
            let mut c = unit(self.assignment.room_of(*i));
            c[*j] = Rational::integer(-1);
            rows.push(LinearRow::le(c, rhs.clone()));
        }
        rows.push(LinearRow::eq(
            vec![Rational::one(); n],
            self.total_rent.clone(),
        ));
        if self.nonnegative_prices {
            rows.extend((0..n).map(|r| LinearRow::ge(unit(r), Rational::zero())));
        }
        if let Some(t) = min_utility {
            for i in 0..n {
                rows.push(LinearRow::le(
                    unit(self.assignment.room_of(i)),
                    &self.own_values[i] - t,
                ));
            }
        }
        rows
    }

    /// Is there a price vector in the polytope giving every agent at least `t`?
    pub fn admits_min_utility(&self, t: &Rational) -> Result<Feasibility> {
        fm_feasible(self.n(), &self.fm_rows(Some(t)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaximinSolution {
    pub prices: PriceVector,
    pub utilities: Vec<Rational>,
    pub min_utility: Rational,
    /// `(agent, room)` pairs whose envy inequality holds with equality.
    pub tight_envy_edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyViolation {
    pub agent: usize,
    pub room: usize,
    /// `v_i(room) - p(room) - u_i`, strictly positive.
    pub excess: Rational,
}

/// Every `(agent, room)` pair where the agent strictly prefers another bundle.
pub fn envy_violations(
    matrix: &ValuationMatrix,
    assignment: &Assignment,
    prices: &PriceVector,
) -> Vec<EnvyViolation> {
    let utilities = compute_utilities(matrix, assignment, prices);
    let n = assignment.n();
    let mut out = Vec::new();
    for (i, u) in utilities.iter().enumerate() {
        for j in 0..n {
            let excess = &(matrix.value(i, j) - prices.price(j)) - u;
            if excess.is_positive() {
                out.push(EnvyViolation {
                    agent: i,
                    room: j,
                    excess,
                });
            }
        }
    }
    out
}

/// Smallest utility under the given prices.
pub fn compute_min_utility(
    matrix: &ValuationMatrix,
    assignment: &Assignment,
    prices: &PriceVector,
) -> Rational {
    compute_utilities(matrix, assignment, prices)
        .into_iter()
        .min()
        .expect("n >= 1")
}

pub fn is_envy_free(
    matrix: &ValuationMatrix,
    assignment: &Assignment,
    prices: &PriceVector,
) -> bool {
    envy_violations(matrix, assignment, prices).is_empty()
}

fn prices_from_utilities(
    matrix: &ValuationMatrix,
    assignment: &Assignment,
    utilities: &[Rational],
) -> PriceVector {
    let mut prices = vec![Rational::zero(); assignment.n()];
    for (i, u) in utilities.iter().enumerate() {
        let r = assignment.room_of(i);
        prices[r] = matrix.value(i, r) - u;
    }
    PriceVector::new_unchecked(prices)
}

fn satisfies(
    matrix: &ValuationMatrix,
    assignment: &Assignment,
    prices: &PriceVector,
    options: &PricingOptions,
) -> bool {
    (!options.nonnegative_prices || prices.as_slice().iter().all(|p| !p.is_negative()))
        && is_envy_free(matrix, assignment, prices)
}

/// Prices giving every agent the same utility `(welfare - rent) / n`, if
/// those prices are envy-free. Since no envy-free vector can give everyone
/// more than the average surplus, such prices are maximin-optimal.
pub fn equal_split_candidate(
    matrix: &ValuationMatrix,
    assignment: &Assignment,
    total_rent: &Rational,
) -> Option<PriceVector> {
    let n = assignment.n();
    let share = (assignment.welfare(matrix) - total_rent) / Rational::from(n);
    let prices = prices_from_utilities(matrix, assignment, &vec![share; n]);
    is_envy_free(matrix, assignment, &prices).then_some(prices)
}

/// Maximin envy-free prices with leximin refinement.
pub fn maximin_prices(
    matrix: &ValuationMatrix,
    assignment: &Assignment,
    total_rent: &Rational,
) -> Result<MaximinSolution> {
    maximin_prices_with(matrix, assignment, total_rent, &PricingOptions::default())
}

pub fn maximin_prices_with(
    matrix: &ValuationMatrix,
    assignment: &Assignment,
    total_rent: &Rational,
    options: &PricingOptions,
) -> Result<MaximinSolution> {
    let utilities = if options.nonnegative_prices {
        leximin_by_lp(matrix, assignment, total_rent, options)?
    } else {
        least_surplus_utilities(matrix, assignment, total_rent)?
    };
    Ok(finish(matrix, assignment, total_rent, options, utilities))
}

/// Same result as [`maximin_prices_with`], always computed by the round-based
/// linear-programming leximin. Slower; kept as an independent cross-check.
pub fn maximin_prices_lp(
    matrix: &ValuationMatrix,
    assignment: &Assignment,
    total_rent: &Rational,
    options: &PricingOptions,
) -> Result<MaximinSolution> {
    let utilities = leximin_by_lp(matrix, assignment, total_rent, options)?;
    Ok(finish(matrix, assignment, total_rent, options, utilities))
}

/// Without extra price constraints, envy-freeness in utility space is a
/// system of difference constraints `u_j - u_i <= w(i, j)` with
/// `w(i, j) = v_j(room of j) - v_i(room of j)`. Its feasible set is closed
/// under adding a constant, and among solutions with `d >= 0` there is a
/// pointwise least one, `d_i = -min_j dist(i, j)` (shortest paths over `w`).
/// Any maximin vector minus its minimum is such a `d` with the smallest
/// possible sum, hence equals the least one; so the maximin vector is unique:
/// `u = t* + d` with `t* = (surplus - sum d) / n`. A negative cycle means the
/// assignment admits no envy-free prices.
fn least_surplus_utilities(
    matrix: &ValuationMatrix,
    assignment: &Assignment,
    total_rent: &Rational,
) -> Result<Vec<Rational>> {
    let n = assignment.n();
    let mut dist: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Rational::zero()
                    } else {
                        let r = assignment.room_of(j);
                        matrix.value(j, r) - matrix.value(i, r)
                    }
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        for i in 0..n {
            if i == k {
                continue;
            }
            let via = dist[i][k].clone();
            for j in 0..n {
                let cand = &via + &dist[k][j];
                if cand < dist[i][j] {
                    dist[i][j] = cand;
                }
            }
        }
    }
    if (0..n).any(|i| dist[i][i].is_negative()) {
        return Err(Error::NotWelfareMaximizing);
    }
    let d: Vec<Rational> = dist
        .iter()
        .map(|row| -row.iter().min().cloned().expect("n >= 1"))
        .collect();
    let surplus = assignment.welfare(matrix) - total_rent;
    let t = (surplus - d.iter().sum::<Rational>()) / Rational::from(n);
    Ok(d.into_iter().map(|x| x + &t).collect())
}

fn finish(
    matrix: &ValuationMatrix,
    assignment: &Assignment,
    total_rent: &Rational,
    options: &PricingOptions,
    utilities: Vec<Rational>,
) -> MaximinSolution {
    let n = assignment.n();
    let prices = prices_from_utilities(matrix, assignment, &utilities);
    debug_assert!(satisfies(matrix, assignment, &prices, options));
    debug_assert_eq!(&prices.total(), total_rent);
    let min_utility = utilities.iter().min().cloned().expect("n >= 1");
    let mut tight_envy_edges = Vec::new();
    for (i, u) in utilities.iter().enumerate() {
        for j in (0..n).filter(|&j| j != assignment.room_of(i)) {
            if &(matrix.value(i, j) - prices.price(j)) == u {
                tight_envy_edges.push((i, j));
            }
        }
    }
    MaximinSolution {
        prices,
        utilities,
        min_utility,
        tight_envy_edges,
    }
}

/// Leximin by rounds: maximize the common floor of the unfrozen agents,
/// freeze the ones pinned at it, repeat.
fn leximin_by_lp(
    matrix: &ValuationMatrix,
    assignment: &Assignment,
    total_rent: &Rational,
    options: &PricingOptions,
) -> Result<Vec<Rational>> {
    let n = assignment.n();
    let surplus = assignment.welfare(matrix) - total_rent;
    let mut levels: Vec<Option<Rational>> = vec![None; n];

    loop {
        let unfrozen: Vec<usize> = (0..n).filter(|&i| levels[i].is_none()).collect();
        if unfrozen.is_empty() {
            break;
        }
        // Fast path: the remaining surplus split evenly is the best the
        // unfrozen agents can jointly hope for; if it is admissible it is
        // also the unique leximin completion.
        let frozen_total: Rational = levels.iter().flatten().sum();
        let share = (&surplus - &frozen_total) / Rational::from(unfrozen.len());
        let trial: Vec<Rational> = levels
            .iter()
            .map(|l| l.clone().unwrap_or_else(|| share.clone()))
            .collect();
        let trial_prices = prices_from_utilities(matrix, assignment, &trial);
        if satisfies(matrix, assignment, &trial_prices, options) {
            for &i in &unfrozen {
                levels[i] = Some(share.clone());
            }
            break;
        }
        if unfrozen.len() == 1 {
            // Budget balance pins the last utility; the even split above
            // was exactly that value, so nothing admissible remains.
            return Err(Error::Solver("inconsistent leximin round"));
        }

        let (t, forced) = leximin_round(matrix, assignment, total_rent, options, &levels)?;
        for i in forced {
            levels[i] = Some(t.clone());
        }
    }

    Ok(levels.into_iter().map(Option::unwrap).collect())
}

/// Variables: room prices `0..n`, then `t` at index `n`.
fn round_program(
    matrix: &ValuationMatrix,
    assignment: &Assignment,
    total_rent: &Rational,
    options: &PricingOptions,
    levels: &[Option<Rational>],
) -> (LinearProgram, Vec<Option<usize>>) {
    let n = assignment.n();
    let t = n;
    let mut objective = vec![Rational::zero(); n + 1];
    objective[t] = Rational::one();
    let mut lp = LinearProgram::new(n + 1).maximize(objective);
    let row = |entries: &[(usize, i64)]| {
        let mut c = vec![Rational::zero(); n + 1];
        for &(k, v) in entries {
            c[k] = Rational::integer(v);
        }
        c
    };
    let mut t_row = vec![None; n];
    for (i, level) in levels.iter().enumerate() {
        let own = assignment.room_of(i);
        let value = matrix.value(i, own);
        match level {
            // u_i = v_i - p_own >= t
            None => {
                t_row[i] = Some(lp.constraints.len());
                lp.push(row(&[(own, 1), (t, 1)]), Relation::Le, value.clone());
            }
            Some(l) => lp.push(row(&[(own, 1)]), Relation::Eq, value - l),
        }
    }
    for i in 0..n {
        let own = assignment.room_of(i);
        for j in (0..n).filter(|&j| j != own) {
            lp.push(
                row(&[(own, 1), (j, -1)]),
                Relation::Le,
                matrix.value(i, own) - matrix.value(i, j),
            );
        }
    }
    let mut ones = vec![Rational::one(); n + 1];
    ones[t] = Rational::zero();
    lp.push(ones, Relation::Eq, total_rent.clone());
    if options.nonnegative_prices {
        for r in 0..n {
            lp.push(row(&[(r, 1)]), Relation::Ge, Rational::zero());
        }
    }
    (lp, t_row)
}

/// One leximin step: the best common floor `t` for unfrozen agents, and the
/// agents that cannot rise above it.
fn leximin_round(
    matrix: &ValuationMatrix,
    assignment: &Assignment,
    total_rent: &Rational,
    options: &PricingOptions,
    levels: &[Option<Rational>],
) -> Result<(Rational, Vec<usize>)> {
    let (lp, t_row) = round_program(matrix, assignment, total_rent, options, levels);
    let solution = match simplex_solve(&lp) {
        LpOutcome::Optimal(s) => s,
        LpOutcome::Infeasible if levels.iter().all(Option::is_none) => {
            return Err(
                if options.nonnegative_prices
                    && crate::matching::is_welfare_maximizing(matrix, assignment)
                {
                    Error::Solver("infeasible: no nonnegative envy-free prices")
                } else {
                    Error::NotWelfareMaximizing
                },
            );
        }
        LpOutcome::Infeasible => return Err(Error::Solver("infeasible after freezing")),
        LpOutcome::Unbounded => return Err(Error::Solver("unbounded")),
    };
    let t = solution.objective.clone();

    // A positive multiplier on `u_i >= t` means that row binds in every
    // optimum, so agent i is pinned at t.
    let mut forced: Vec<usize> = t_row
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.filter(|&r| solution.duals[r].is_positive()).map(|_| i))
        .collect();

    if forced.is_empty() {
        // Fall back to the direct test: maximize u_i alone while the others
        // keep at least t.
        for (i, r) in t_row.iter().enumerate() {
            if r.is_none() {
                continue;
            }
            if pinned_at(matrix, assignment, total_rent, options, levels, i, &t)? {
                forced.push(i);
            }
        }
    }
    if forced.is_empty() {
        return Err(Error::Solver("leximin round froze no agent"));
    }
    Ok((t, forced))
}

/// Can agent `agent` get strictly more than `t` while every other unfrozen
/// agent keeps at least `t`?
fn pinned_at(
    matrix: &ValuationMatrix,
    assignment: &Assignment,
    total_rent: &Rational,
    options: &PricingOptions,
    levels: &[Option<Rational>],
    agent: usize,
    t: &Rational,
) -> Result<bool> {
    let n = assignment.n();
    let (mut lp, t_row) = round_program(matrix, assignment, total_rent, options, levels);
    // fix t, then maximize u_agent = v - p_own, i.e. minimize p_own
    let mut fix = vec![Rational::zero(); n + 1];
    fix[n] = Rational::one();
    lp.push(fix, Relation::Eq, t.clone());
    let mut objective = vec![Rational::zero(); n + 1];
    objective[assignment.room_of(agent)] = Rational::integer(-1);
    lp.objective = objective;
    debug_assert!(t_row[agent].is_some());
    match simplex_solve(&lp) {
        LpOutcome::Optimal(s) => {
            let best = matrix.value(agent, assignment.room_of(agent)) + &s.objective;
            Ok(&best == t)
        }
        LpOutcome::Unbounded => Ok(false),
        LpOutcome::Infeasible => Err(Error::Solver("infeasible while probing leximin")),
    }
}

/// Feasibility at the optimum and just above it, via elimination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimalityCertificate {
    pub at_optimum: Feasibility,
    pub above_optimum: Feasibility,
}

impl OptimalityCertificate {
    pub fn holds(&self) -> bool {
        self.at_optimum == Feasibility::Feasible && self.above_optimum == Feasibility::Infeasible
    }
}

pub fn certify_min_utility(
    matrix: &ValuationMatrix,
    assignment: &Assignment,
    total_rent: &Rational,
    options: &PricingOptions,
    min_utility: &Rational,
) -> Result<OptimalityCertificate> {
    let system = EFConstraintSystem::new(matrix, assignment, total_rent, options);
    Ok(OptimalityCertificate {
        at_optimum: system.admits_min_utility(min_utility)?,
        above_optimum: system.admits_min_utility(&(min_utility + &certificate_epsilon()))?,
    })
}
