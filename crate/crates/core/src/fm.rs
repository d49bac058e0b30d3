//! Feasibility of small linear systems by Fourier-Motzkin elimination.
//!
//! Shares nothing with [`crate::lp`] except the rational type, so it serves as
//! an independent certificate for LP optima: a claimed maximum `t*` is
//! confirmed when the system is feasible at `t*` and infeasible just above it.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Elimination blows up quickly past this many variables.
pub const MAX_VARIABLES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
}

/// `coeffs . x  (<= | =)  rhs`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRow {
    pub coeffs: Vec<Rational>,
    pub sense: Sense,
    pub rhs: Rational,
}

impl LinearRow {
    pub fn le(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        LinearRow {
            coeffs,
            sense: Sense::Le,
            rhs,
        }
    }

    pub fn ge(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        LinearRow {
            coeffs: coeffs.iter().map(|c| -c).collect(),
            sense: Sense::Le,
            rhs: -rhs,
        }
    }

    pub fn eq(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        LinearRow {
            coeffs,
            sense: Sense::Eq,
            rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    Infeasible,
}

/// Inequality `coeffs . x <= rhs`, kept normalized so the first nonzero
/// coefficient has magnitude one.
#[derive(Clone)]
struct Ineq {
    coeffs: Vec<Rational>,
    rhs: Rational,
}

impl Ineq {
    fn normalized(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        match coeffs.iter().find(|c| !c.is_zero()) {
            Some(lead) => {
                let scale = lead.abs().recip();
                Ineq {
                    coeffs: coeffs.iter().map(|c| c * &scale).collect(),
                    rhs: rhs * scale,
                }
            }
            None => Ineq { coeffs, rhs },
        }
    }

    fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }
}

/// Keeps only the tightest rhs per coefficient direction.
fn dedup(rows: Vec<Ineq>) -> Vec<Ineq> {
    let mut best: HashMap<Vec<Rational>, Rational> = HashMap::new();
    let mut order = Vec::new();
    for row in rows {
        match best.get_mut(&row.coeffs) {
            Some(rhs) => {
                if row.rhs < *rhs {
                    *rhs = row.rhs;
                }
            }
            None => {
                order.push(row.coeffs.clone());
                best.insert(row.coeffs, row.rhs);
            }
        }
    }
    order
        .into_iter()
        .map(|coeffs| {
            let rhs = best.remove(&coeffs).expect("present");
            Ineq { coeffs, rhs }
        })
        .collect()
}

/// Substitutes the equalities away by Gaussian elimination, leaving a pure
/// inequality system over the same variable indices (eliminated variables
/// end up with zero coefficients everywhere). Returns `None` if the
/// equalities are inconsistent.
fn eliminate_equalities(rows: &[LinearRow]) -> Option<Vec<Ineq>> {
    let mut eqs: Vec<(Vec<Rational>, Rational)> = rows
        .iter()
        .filter(|r| r.sense == Sense::Eq)
        .map(|r| (r.coeffs.clone(), r.rhs.clone()))
        .collect();
    let mut ineqs: Vec<(Vec<Rational>, Rational)> = rows
        .iter()
        .filter(|r| r.sense == Sense::Le)
        .map(|r| (r.coeffs.clone(), r.rhs.clone()))
        .collect();

    while let Some((coeffs, rhs)) = eqs.pop() {
        let Some(k) = coeffs.iter().position(|c| !c.is_zero()) else {
            if rhs.is_zero() {
                continue;
            }
            return None;
        };
        // x_k = (rhs - sum_{j != k} coeffs_j x_j) / coeffs_k
        let pivot = coeffs[k].clone();
        let substitute = |row: &mut (Vec<Rational>, Rational)| {
            let factor = &row.0[k] / &pivot;
            if factor.is_zero() {
                return;
            }
            for (x, c) in row.0.iter_mut().zip(&coeffs) {
                *x -= &factor * c;
            }
            row.1 -= &factor * &rhs;
        };
        eqs.iter_mut().for_each(substitute);
        ineqs.iter_mut().for_each(substitute);
    }
    Some(
        ineqs
            .into_iter()
            .map(|(c, b)| Ineq::normalized(c, b))
            .collect(),
    )
}

/// Decides whether the system has a real solution.
pub fn fm_feasible(num_vars: usize, rows: &[LinearRow]) -> Result<Feasibility> {
    if num_vars > MAX_VARIABLES {
        return Err(Error::TooManyVariables {
            got: num_vars,
            max: MAX_VARIABLES,
        });
    }
    for r in rows {
        if r.coeffs.len() != num_vars {
            return Err(Error::InvalidArgument(format!(
                "row has {} coefficients, system has {num_vars} variables",
                r.coeffs.len()
            )));
        }
    }
    let Some(mut system) = eliminate_equalities(rows) else {
        return Ok(Feasibility::Infeasible);
    };

    let mut remaining: Vec<usize> = (0..num_vars).collect();
    loop {
        let (trivial, live): (Vec<Ineq>, Vec<Ineq>) =
            system.into_iter().partition(Ineq::is_trivial);
        if trivial.iter().any(|r| r.rhs.is_negative()) {
            return Ok(Feasibility::Infeasible);
        }
        system = dedup(live);
        remaining.retain(|&k| system.iter().any(|r| !r.coeffs[k].is_zero()));
        if remaining.is_empty() {
            return Ok(Feasibility::Feasible);
        }

        // Eliminate the variable producing the fewest new rows.
        let &k = remaining
            .iter()
            .min_by_key(|&&k| {
                let pos = system.iter().filter(|r| r.coeffs[k].is_positive()).count();
                let neg = system.iter().filter(|r| r.coeffs[k].is_negative()).count();
                (pos * neg) as i64 - (pos + neg) as i64
            })
            .expect("nonempty");

        let mut upper = Vec::new();
        let mut lower = Vec::new();
        let mut next = Vec::new();
        for r in system {
            if r.coeffs[k].is_positive() {
                upper.push(r);
            } else if r.coeffs[k].is_negative() {
                lower.push(r);
            } else {
                next.push(r);
            }
        }
        for u in &upper {
            for l in &lower {
                // u_k > 0, l_k < 0: (-l_k) * u + u_k * l cancels x_k
                let a = -&l.coeffs[k];
                let b = u.coeffs[k].clone();
                let coeffs: Vec<Rational> = u
                    .coeffs
                    .iter()
                    .zip(&l.coeffs)
                    .map(|(x, y)| &(&a * x) + &(&b * y))
                    .collect();
                let rhs = &(&a * &u.rhs) + &(&b * &l.rhs);
                let mut row = Ineq::normalized(coeffs, rhs);
                row.coeffs[k] = Rational::zero();
                next.push(row);
            }
        }
        system = next;
    }
}
