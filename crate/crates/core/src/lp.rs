//! Exact two-phase simplex over rationals.
//!
//! Constraints are scaled to integer rows and pivoted fraction-free: the
//! tableau holds integers with one common positive denominator, and every
//! update `(t_ij * a_rs - t_is * t_rj) / det` divides exactly. The solver runs
//! on checked `i64` first and restarts on `BigInt` if anything overflows, so
//! results never depend on which path finished. Bland's rule picks both the
//! entering column and the leaving row, which rules out cycling on the highly
//! degenerate systems envy-freeness produces.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bound {
    Free,
    AtLeast(Rational),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize objective . x` subject to `constraints` and per-variable `bounds`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Bound>,
}

impl LinearProgram {
    /// `num_vars` free variables, zero objective, no constraints.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
            bounds: vec![Bound::Free; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn maximize(mut self, objective: Vec<Rational>) -> Self {
        assert_eq!(objective.len(), self.num_vars(), "objective length");
        self.objective = objective;
        self
    }

    pub fn bound(mut self, var: usize, bound: Bound) -> Self {
        self.bounds[var] = bound;
        self
    }

    pub fn constrain(mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        self.push(coeffs, relation, rhs);
        self
    }

    pub fn push(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint width");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub values: Vec<Rational>,
    pub objective: Rational,
    /// Indices of constraints satisfied with equality.
    pub tight: Vec<usize>,
    /// One multiplier per constraint (nonnegative on `Le` rows, nonpositive
    /// on `Ge` rows, free on `Eq` rows) certifying optimality.
    pub duals: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Unbounded,
    Infeasible,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

/// Integer arithmetic the tableau needs; `None` signals overflow.
trait Scalar: Clone + Ord {
    fn from_big(b: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn neg(&self) -> Option<Self>;
    fn mul(&self, other: &Self) -> Option<Self>;
    /// `(a * b - c * d) / det`, where the division is known to be exact.
    fn cross(a: &Self, b: &Self, c: &Self, d: &Self, det: &Self) -> Option<Self>;
}

impl Scalar for i64 {
    fn from_big(b: &BigInt) -> Option<Self> {
        b.to_i64()
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn zero() -> Self {
        0
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_pos(&self) -> bool {
        *self > 0
    }
    fn is_neg(&self) -> bool {
        *self < 0
    }
    fn neg(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        self.checked_mul(*other)
    }
    #[inline]
    fn cross(a: &Self, b: &Self, c: &Self, d: &Self, det: &Self) -> Option<Self> {
        let x = if *c == 0 || *d == 0 {
            a.checked_mul(*b)?
        } else {
            a.checked_mul(*b)?.checked_sub(c.checked_mul(*d)?)?
        };
        Some(if *det == 1 { x } else { x / det })
    }
}

impl Scalar for BigInt {
    fn from_big(b: &BigInt) -> Option<Self> {
        Some(b.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn cross(a: &Self, b: &Self, c: &Self, d: &Self, det: &Self) -> Option<Self> {
        Some((a * b - c * d) / det)
    }
}

/// How an original variable maps onto nonnegative tableau columns.
#[derive(Debug, Clone)]
enum VarMap {
    Shifted { col: usize, lower: Rational },
    Split { pos: usize, neg: usize },
}

/// The LP rewritten as `max c.y, rows y = rhs, y >= 0` with integer data.
struct StandardForm {
    width: usize,
    rows: Vec<Vec<BigInt>>,
    rhs: Vec<BigInt>,
    objective: Vec<BigInt>,
    initial_basis: Vec<usize>,
    artificial_from: usize,
    /// Column whose reduced cost yields each row's dual, and the sign to apply.
    dual_col: Vec<(usize, i8)>,
    vars: Vec<VarMap>,
}

fn lcm_of_denominators<'a>(xs: impl Iterator<Item = &'a Rational>) -> BigInt {
    xs.fold(BigInt::one(), |acc, x| acc.lcm(&x.denom()))
}

fn scaled_integer(x: &Rational, scale: &BigInt) -> BigInt {
    x.numer() * (scale / x.denom())
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let mut vars = Vec::with_capacity(lp.num_vars());
        let mut ncols = 0;
        for bound in &lp.bounds {
            match bound {
                Bound::AtLeast(l) => {
                    vars.push(VarMap::Shifted {
                        col: ncols,
                        lower: l.clone(),
                    });
                    ncols += 1;
                }
                Bound::Free => {
                    vars.push(VarMap::Split {
                        pos: ncols,
                        neg: ncols + 1,
                    });
                    ncols += 2;
                }
            }
        }
        let structural = ncols;

        // Rows over structural columns with bound shifts folded into the rhs,
        // then normalized to integers with nonnegative rhs.
        let mut int_rows = Vec::with_capacity(lp.constraints.len());
        for c in &lp.constraints {
            let mut coeffs = vec![Rational::zero(); structural];
            let mut rhs = c.rhs.clone();
            for (v, a) in vars.iter().zip(&c.coeffs) {
                if a.is_zero() {
                    continue;
                }
                match v {
                    VarMap::Shifted { col, lower } => {
                        coeffs[*col] = a.clone();
                        rhs -= a * lower;
                    }
                    VarMap::Split { pos, neg } => {
                        coeffs[*pos] = a.clone();
                        coeffs[*neg] = -a;
                    }
                }
            }
            let scale = lcm_of_denominators(coeffs.iter().chain(std::iter::once(&rhs)));
            let mut row: Vec<BigInt> = coeffs.iter().map(|x| scaled_integer(x, &scale)).collect();
            let mut b = scaled_integer(&rhs, &scale);
            let mut relation = c.relation;
            let mut sign = 1i8;
            if b.is_negative() {
                row.iter_mut().for_each(|x| *x = -&*x);
                b = -b;
                sign = -1;
                relation = match relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            int_rows.push((row, b, relation, sign));
        }

        let slack_count = int_rows
            .iter()
            .filter(|(_, _, r, _)| *r != Relation::Eq)
            .count();
        let artificial_from = structural + slack_count;
        let art_count = int_rows
            .iter()
            .filter(|(_, _, r, _)| *r != Relation::Le)
            .count();
        let width = artificial_from + art_count;

        let mut rows = Vec::with_capacity(int_rows.len());
        let mut rhs = Vec::with_capacity(int_rows.len());
        let mut initial_basis = Vec::with_capacity(int_rows.len());
        let mut dual_col = Vec::with_capacity(int_rows.len());
        let (mut next_slack, mut next_art) = (structural, artificial_from);
        for (coeffs, b, relation, sign) in int_rows {
            let mut row = coeffs;
            row.resize(width, <BigInt as Zero>::zero());
            match relation {
                Relation::Le => {
                    row[next_slack] = BigInt::one();
                    initial_basis.push(next_slack);
                    // d_slack = -y
                    dual_col.push((next_slack, -sign));
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -BigInt::one();
                    row[next_art] = BigInt::one();
                    initial_basis.push(next_art);
                    // d_surplus = +y
                    dual_col.push((next_slack, sign));
                    next_slack += 1;
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = BigInt::one();
                    initial_basis.push(next_art);
                    dual_col.push((next_art, -sign));
                    next_art += 1;
                }
            }
            rows.push(row);
            rhs.push(b);
        }

        let obj_scale = lcm_of_denominators(lp.objective.iter());
        let mut objective = vec![<BigInt as Zero>::zero(); width];
        for (v, c) in vars.iter().zip(&lp.objective) {
            let c = scaled_integer(c, &obj_scale);
            match v {
                VarMap::Shifted { col, .. } => objective[*col] = c,
                VarMap::Split { pos, neg } => {
                    objective[*neg] = -&c;
                    objective[*pos] = c;
                }
            }
        }

        StandardForm {
            width,
            rows,
            rhs,
            objective,
            initial_basis,
            artificial_from,
            dual_col,
            vars,
        }
    }
}

enum RawStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

struct RawResult {
    status: RawStatus,
    /// Column values (meaningful when optimal).
    columns: Vec<Rational>,
    /// Reduced cost of every column, as rationals.
    reduced: Vec<Rational>,
}

struct Tableau<T> {
    /// Row-major, `width + 1` entries per row (rhs last).
    cells: Vec<T>,
    obj: Vec<T>,
    det: T,
    basis: Vec<usize>,
    width: usize,
    banned: Vec<bool>,
}

impl<T: Scalar> Tableau<T> {
    fn stride(&self) -> usize {
        self.width + 1
    }

    fn m(&self) -> usize {
        self.basis.len()
    }

    fn at(&self, i: usize, j: usize) -> &T {
        &self.cells[i * self.stride() + j]
    }

    /// Reduced-cost row for objective `c` under the current basis, scaled by `det`.
    fn set_objective(&mut self, c: &[T]) -> Option<()> {
        let w = self.stride();
        let mut obj = vec![T::zero(); w];
        for j in 0..self.width {
            obj[j] = c[j].mul(&self.det)?;
        }
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &c[b];
            if cb.is_zero() {
                continue;
            }
            for j in 0..w {
                let t = &self.cells[i * w + j];
                if t.is_zero() {
                    continue;
                }
                // obj_j -= c_B * t_ij
                obj[j] = T::cross(&obj[j], &one_like::<T>(), cb, t, &one_like::<T>())?;
            }
        }
        self.obj = obj;
        Some(())
    }

    fn pivot(&mut self, r: usize, s: usize) -> Option<()> {
        let w = self.stride();
        let a = self.cells[r * w + s].clone();
        let det = self.det.clone();
        let same_det = a == det;
        let pivot_row: Vec<T> = self.cells[r * w..(r + 1) * w].to_vec();
        for i in 0..self.m() {
            if i == r {
                continue;
            }
            let f = self.cells[i * w + s].clone();
            if f.is_zero() && same_det {
                continue;
            }
            for j in 0..w {
                let cell = &mut self.cells[i * w + j];
                *cell = T::cross(cell, &a, &f, &pivot_row[j], &det)?;
            }
        }
        let f = self.obj[s].clone();
        if !(f.is_zero() && same_det) {
            for j in 0..w {
                self.obj[j] = T::cross(&self.obj[j], &a, &f, &pivot_row[j], &det)?;
            }
        }
        self.det = a;
        self.basis[r] = s;
        if self.det.is_neg() {
            for x in self.cells.iter_mut().chain(self.obj.iter_mut()) {
                *x = x.neg()?;
            }
            self.det = self.det.neg()?;
        }
        Some(())
    }

    /// Runs Bland-rule pivots to optimality. `Ok(true)` = optimal, `Ok(false)` = unbounded.
    fn optimize(&mut self) -> Option<bool> {
        let w = self.stride();
        loop {
            let Some(s) = (0..self.width).find(|&j| !self.banned[j] && self.obj[j].is_pos()) else {
                return Some(true);
            };
            let mut leave: Option<usize> = None;
            for i in 0..self.m() {
                let a_is = &self.cells[i * w + s];
                if !a_is.is_pos() {
                    continue;
                }
                leave = Some(match leave {
                    None => i,
                    Some(k) => {
                        // compare rhs_i / a_is with rhs_k / a_ks
                        let lhs = self.at(i, self.width).mul(self.at(k, s))?;
                        let rhs = self.at(k, self.width).mul(a_is)?;
                        match lhs.cmp(&rhs) {
                            Ordering::Less => i,
                            Ordering::Greater => k,
                            Ordering::Equal if self.basis[i] < self.basis[k] => i,
                            Ordering::Equal => k,
                        }
                    }
                });
            }
            match leave {
                Some(r) => self.pivot(r, s)?,
                None => return Some(false),
            }
        }
    }

    fn to_rational(&self, x: &T) -> Rational {
        Rational::from_bigints(x.to_big(), self.det.to_big())
    }
}

fn one_like<T: Scalar>() -> T {
    T::from_big(&BigInt::one()).expect("one fits")
}

fn run<T: Scalar>(sf: &StandardForm) -> Option<RawResult> {
    let m = sf.rows.len();
    let width = sf.width;
    let mut cells = Vec::with_capacity(m * (width + 1));
    for (row, b) in sf.rows.iter().zip(&sf.rhs) {
        for x in row {
            cells.push(T::from_big(x)?);
        }
        cells.push(T::from_big(b)?);
    }
    let mut t = Tableau {
        cells,
        obj: Vec::new(),
        det: one_like::<T>(),
        basis: sf.initial_basis.clone(),
        width,
        banned: vec![false; width],
    };

    if sf.artificial_from < width {
        // Phase 1: maximize minus the sum of artificials.
        let mut c = vec![T::zero(); width];
        let minus_one = one_like::<T>().neg()?;
        for x in &mut c[sf.artificial_from..] {
            *x = minus_one.clone();
        }
        t.set_objective(&c)?;
        t.optimize()?;
        // obj rhs = -z * det; feasible iff z == 0
        if !t.obj[width].is_zero() {
            return Some(RawResult {
                status: RawStatus::Infeasible,
                columns: Vec::new(),
                reduced: Vec::new(),
            });
        }
        for j in sf.artificial_from..width {
            t.banned[j] = true;
        }
        // Drive zero-level artificials out of the basis; rows where that is
        // impossible are redundant and get dropped.
        let mut r = 0;
        while r < t.m() {
            if t.basis[r] < sf.artificial_from {
                r += 1;
                continue;
            }
            match (0..sf.artificial_from).find(|&j| !t.at(r, j).is_zero()) {
                Some(j) => {
                    t.pivot(r, j)?;
                    r += 1;
                }
                None => {
                    let w = t.stride();
                    t.cells.drain(r * w..(r + 1) * w);
                    t.basis.remove(r);
                }
            }
        }
    }

    let c: Vec<T> = sf
        .objective
        .iter()
        .map(T::from_big)
        .collect::<Option<_>>()?;
    t.set_objective(&c)?;
    let bounded = t.optimize()?;
    if !bounded {
        return Some(RawResult {
            status: RawStatus::Unbounded,
            columns: Vec::new(),
            reduced: Vec::new(),
        });
    }
    let mut columns = vec![Rational::zero(); width];
    for (i, &b) in t.basis.iter().enumerate() {
        columns[b] = t.to_rational(t.at(i, width));
    }
    let reduced = (0..width).map(|j| t.to_rational(&t.obj[j])).collect();
    Some(RawResult {
        status: RawStatus::Optimal,
        columns,
        reduced,
    })
}

/// Solves `lp` exactly. Deterministic: identical programs give identical results.
pub fn simplex_solve(lp: &LinearProgram) -> LpOutcome {
    for c in &lp.constraints {
        assert_eq!(c.coeffs.len(), lp.num_vars(), "constraint width");
    }
    assert_eq!(lp.bounds.len(), lp.num_vars(), "bounds length");

    let sf = StandardForm::build(lp);
    let raw = run::<i64>(&sf)
        .or_else(|| run::<BigInt>(&sf))
        .expect("arbitrary precision cannot overflow");
    match raw.status {
        RawStatus::Infeasible => return LpOutcome::Infeasible,
        RawStatus::Unbounded => return LpOutcome::Unbounded,
        RawStatus::Optimal => {}
    }

    let values: Vec<Rational> = sf
        .vars
        .iter()
        .map(|v| match v {
            VarMap::Shifted { col, lower } => lower + &raw.columns[*col],
            VarMap::Split { pos, neg } => &raw.columns[*pos] - &raw.columns[*neg],
        })
        .collect();
    let objective = lp.objective.iter().zip(&values).map(|(c, x)| c * x).sum();
    let tight = lp
        .constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            let lhs: Rational = c.coeffs.iter().zip(&values).map(|(a, x)| a * x).sum();
            lhs == c.rhs
        })
        .map(|(i, _)| i)
        .collect();
    // Reduced costs were computed against the integer-scaled objective and
    // rows; undo both scalings to recover duals of the original constraints.
    let obj_scale = Rational::from(lcm_of_denominators(lp.objective.iter()));
    let duals = lp
        .constraints
        .iter()
        .zip(&sf.dual_col)
        .map(|(c, &(col, sign))| {
            let row_scale = row_scale(c, &sf.vars);
            let d = &raw.reduced[col] * &row_scale / &obj_scale;
            if sign > 0 {
                d
            } else {
                -d
            }
        })
        .collect();
    LpOutcome::Optimal(LpSolution {
        values,
        objective,
        tight,
        duals,
    })
}

/// The positive factor [`StandardForm::build`] applied to a row.
fn row_scale(c: &Constraint, vars: &[VarMap]) -> Rational {
    let mut rhs = c.rhs.clone();
    let mut coeffs = Vec::new();
    for (v, a) in vars.iter().zip(&c.coeffs) {
        if a.is_zero() {
            continue;
        }
        if let VarMap::Shifted { lower, .. } = v {
            rhs -= a * lower;
        }
        coeffs.push(a.clone());
    }
    Rational::from(lcm_of_denominators(
        coeffs.iter().chain(std::iter::once(&rhs)),
    ))
}
