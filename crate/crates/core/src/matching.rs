//! Welfare-maximizing assignments.
//!
//! Among welfare-optimal assignments the canonical choice is the one with the
//! largest [`TieKey`]: first maximize welfare, then the descending-sorted
//! vector of assigned values (leximax), then the agent-ordered vector of room
//! indices. Every component of that key is linear in the assignment, so the
//! Hungarian method solves it exactly when run over lexicographic weight
//! vectors. [`brute_force_assignment`] evaluates the same key by enumeration.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{Assignment, ValuationMatrix};
use crate::rational::Rational;

/// Largest `n` accepted by the enumeration routines (9! = 362,880).
pub const ENUMERATION_MAX_N: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WelfareResult {
    pub assignment: Assignment,
    pub welfare: Rational,
}

/// Ordered abelian group used as edge weight by the Hungarian method.
trait Weight: Clone + Ord {
    fn zero_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
}

impl Weight for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
}

impl Weight for i128 {
    fn zero_like(&self) -> Self {
        0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
}

/// Lexicographic vector weight: a rational head followed by integer tie terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct LexWeight {
    head: Rational,
    tail: Vec<i64>,
}

impl Weight for LexWeight {
    fn zero_like(&self) -> Self {
        LexWeight {
            head: Rational::zero(),
            tail: vec![0; self.tail.len()],
        }
    }
    fn add(&self, other: &Self) -> Self {
        LexWeight {
            head: &self.head + &other.head,
            tail: self
                .tail
                .iter()
                .zip(&other.tail)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
    fn sub(&self, other: &Self) -> Self {
        LexWeight {
            head: &self.head - &other.head,
            tail: self
                .tail
                .iter()
                .zip(&other.tail)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Minimum-cost perfect matching on a square cost matrix (O(n^3) shortest
/// augmenting paths with potentials). Returns the column of every row.
fn hungarian_min<W: Weight>(cost: &[Vec<W>]) -> Vec<usize> {
    let n = cost.len();
    let zero = cost[0][0].zero_like();
    // 1-based; index 0 is the virtual column used to start each augmentation.
    let mut u = vec![zero.clone(); n + 1];
    let mut v = vec![zero.clone(); n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv: Vec<Option<W>> = vec![None; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta: Option<W> = None;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1].sub(&u[i0]).sub(&v[j]);
                if minv[j].as_ref().is_none_or(|m| cur < *m) {
                    minv[j] = Some(cur);
                    way[j] = j0;
                }
                if delta.is_none() || minv[j] < delta {
                    delta = minv[j].clone();
                    j1 = j;
                }
            }
            let delta = delta.expect("an unused column always exists");
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] = u[owner[j]].add(&delta);
                    v[j] = v[j].sub(&delta);
                } else if let Some(m) = minv[j].as_mut() {
                    *m = m.sub(&delta);
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of_row = vec![0; n];
    for j in 1..=n {
        col_of_row[owner[j] - 1] = j - 1;
    }
    col_of_row
}

/// Distinct matrix values, largest first.
fn value_levels(matrix: &ValuationMatrix) -> Vec<Rational> {
    let mut levels: Vec<Rational> = matrix.rows().iter().flatten().cloned().collect();
    levels.sort_unstable_by(|a, b| b.cmp(a));
    levels.dedup();
    levels
}

/// Canonical preference order among assignments; larger is preferred.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TieKey {
    pub welfare: Rational,
    pub sorted_values: Vec<Rational>,
    pub rooms: Vec<usize>,
}

pub fn tie_key(matrix: &ValuationMatrix, assignment: &Assignment) -> TieKey {
    let mut sorted_values: Vec<Rational> = assignment
        .rooms_by_agent()
        .iter()
        .enumerate()
        .map(|(i, &r)| matrix.value(i, r).clone())
        .collect();
    sorted_values.sort_unstable_by(|a, b| b.cmp(a));
    TieKey {
        welfare: assignment.welfare(matrix),
        sorted_values,
        rooms: assignment.rooms_by_agent().to_vec(),
    }
}

/// The same lexicographic costs packed into one `i128` per edge: the head is
/// scaled to an integer and shifted above the tail, and the tail is read as
/// digits in base `2n + 1`. Every tail slot of an assignment total lies in
/// `[-n, 0]`, so packing preserves the order of assignment totals and the
/// Hungarian method returns the same matching. `None` if anything could
/// overflow.
fn packed_costs(matrix: &ValuationMatrix, levels: &[Rational]) -> Option<Vec<Vec<i128>>> {
    let n = matrix.n();
    let mut scale: i128 = 1;
    for v in matrix.rows().iter().flatten() {
        let (_, den) = v.as_small()?;
        let den = i128::from(den);
        scale = scale.checked_mul(den / gcd(scale, den))?;
    }
    let base = 2 * n as i128 + 1;
    let digits = levels.len() + n;
    let mut powers = vec![1i128; digits + 1];
    for s in (0..digits).rev() {
        powers[s] = powers[s + 1].checked_mul(base)?;
    }
    // powers[0] = base^digits sits just above the whole tail.
    let shift = powers[0];
    let mut max_abs: i128 = 0;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let v = matrix.value(i, j);
            let (num, den) = v.as_small()?;
            let head = i128::from(num).checked_mul(scale / i128::from(den))?;
            let mut w = head.checked_neg()?.checked_mul(shift)?;
            for (slot, level) in levels.iter().enumerate() {
                if v >= level {
                    w -= powers[slot + 1];
                }
            }
            w -= j as i128 * powers[levels.len() + i + 1];
            max_abs = max_abs.max(w.checked_abs()?);
            row.push(w);
        }
        out.push(row);
    }
    // Potentials and reduced costs stay within a small multiple of n * max.
    max_abs.checked_mul(8 * (n as i128 + 1))?.checked_mul(4)?;
    Some(out)
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

/// Welfare-maximizing assignment with canonical tie-breaking (see module docs).
pub fn max_welfare_assignment(matrix: &ValuationMatrix) -> WelfareResult {
    let n = matrix.n();
    let levels = value_levels(matrix);
    let k = levels.len();
    // Costs are negated weights: head = value, then one indicator per level
    // (counts of assigned values >= level order assignments by leximax of
    // their sorted values), then agent i's room index in slot k + i.
    let cost = || -> Vec<Vec<LexWeight>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let v = matrix.value(i, j);
                        let mut tail = vec![0i64; k + n];
                        for (slot, level) in levels.iter().enumerate() {
                            if v >= level {
                                tail[slot] = -1;
                            }
                        }
                        tail[k + i] = -(j as i64);
                        LexWeight { head: -v, tail }
                    })
                    .collect()
            })
            .collect()
    };
    let rooms = match packed_costs(matrix, &levels) {
        Some(packed) => hungarian_min(&packed),
        None => hungarian_min(&cost()),
    };
    let assignment = Assignment::new(rooms).expect("hungarian returns a permutation");
    WelfareResult {
        welfare: assignment.welfare(matrix),
        assignment,
    }
}

/// Optimal welfare alone (plain rational Hungarian, no tie terms).
pub fn max_welfare(matrix: &ValuationMatrix) -> Rational {
    let cost: Vec<Vec<Rational>> = matrix
        .rows()
        .iter()
        .map(|r| r.iter().map(|v| -v).collect())
        .collect();
    let rooms = hungarian_min(&cost);
    rooms
        .iter()
        .enumerate()
        .map(|(i, &r)| matrix.value(i, r))
        .sum()
}

pub fn is_welfare_maximizing(matrix: &ValuationMatrix, assignment: &Assignment) -> bool {
    assignment.welfare(matrix) == max_welfare(matrix)
}

/// Calls `visit` on every permutation of `0..n` in lexicographic order.
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        visit(&perm);
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            return;
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
}

fn check_enumerable(matrix: &ValuationMatrix) -> Result<()> {
    if matrix.n() > ENUMERATION_MAX_N {
        return Err(Error::InstanceTooLarge(matrix.n()));
    }
    Ok(())
}

/// Exhaustive oracle for [`max_welfare_assignment`].
pub fn brute_force_assignment(matrix: &ValuationMatrix) -> Result<WelfareResult> {
    check_enumerable(matrix)?;
    let mut best: Option<(TieKey, Vec<usize>)> = None;
    for_each_permutation(matrix.n(), |perm| {
        let mut values: Vec<Rational> = perm
            .iter()
            .enumerate()
            .map(|(i, &r)| matrix.value(i, r).clone())
            .collect();
        let welfare: Rational = values.iter().sum();
        if let Some((key, _)) = &best {
            if welfare < key.welfare {
                return;
            }
        }
        values.sort_unstable_by(|a, b| b.cmp(a));
        let key = TieKey {
            welfare,
            sorted_values: values,
            rooms: perm.to_vec(),
        };
        let better = match &best {
            None => true,
            Some((b, _)) => key.cmp(b) == Ordering::Greater,
        };
        if better {
            best = Some((key, perm.to_vec()));
        }
    });
    let (key, perm) = best.expect("at least one permutation");
    Ok(WelfareResult {
        assignment: Assignment::new(perm).expect("permutation"),
        welfare: key.welfare,
    })
}

/// Every welfare-maximizing assignment, in lexicographic order of room vectors.
pub fn all_optimal_assignments(matrix: &ValuationMatrix) -> Result<Vec<Assignment>> {
    check_enumerable(matrix)?;
    let mut best: Option<Rational> = None;
    let mut optima = Vec::new();
    for_each_permutation(matrix.n(), |perm| {
        let w: Rational = perm
            .iter()
            .enumerate()
            .map(|(i, &r)| matrix.value(i, r))
            .sum();
        match best.as_ref().map(|b| w.cmp(b)) {
            Some(Ordering::Less) => {}
            Some(Ordering::Equal) => optima.push(perm.to_vec()),
            _ => {
                best = Some(w);
                optima.clear();
                optima.push(perm.to_vec());
            }
        }
    });
    Ok(optima
        .into_iter()
        .map(|p| Assignment::new(p).expect("permutation"))
        .collect())
}
