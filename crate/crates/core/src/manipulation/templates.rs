//! Hand-style misreport constructions. Each template rewrites the rows of
//! the agents it controls and copies every other row from the true matrix.
//! Rows always sum exactly to the total rent.

use crate::error::{Error, Result};
use crate::model::ValuationMatrix;
use crate::rational::Rational;

fn infeasible(msg: impl Into<String>) -> Error {
    Error::InfeasibleTemplate(msg.into())
}

fn check_rooms(n: usize, rooms: &[usize]) -> Result<()> {
    for (k, &r) in rooms.iter().enumerate() {
        if r >= n {
            return Err(Error::InvalidArgument(format!(
                "room index {r} out of range"
            )));
        }
        if rooms[..k].contains(&r) {
            return Err(Error::InvalidArgument(format!(
                "room index {r} listed twice"
            )));
        }
    }
    Ok(())
}

/// Splits `amount` over `slots` in whole units: everyone gets
/// `floor(amount / k)`, leftover units go one at a time from the front,
/// and any fractional residue lands on the next slot in line.
fn split_whole_units(amount: &Rational, slots: usize) -> Vec<Rational> {
    if slots == 0 {
        return Vec::new();
    }
    let k = Rational::from(slots);
    let base = (amount / &k).floor();
    let mut out = vec![base.clone(); slots];
    let mut left = amount - &(&base * &k);
    for x in out.iter_mut() {
        if left.is_zero() {
            break;
        }
        let add = Rational::one().min(left.clone());
        *x += &add;
        left -= &add;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusionaryParams {
    /// Coalition members in coordination order.
    pub coalition: Vec<usize>,
    /// `claimed_rooms[k]` is the room member `k` overbids on.
    pub claimed_rooms: Vec<usize>,
    /// Rooms meant for the victims; every member reports `filler` on each.
    pub victim_rooms: Vec<usize>,
    pub claim: Rational,
    pub filler: Rational,
}

impl ExclusionaryParams {
    pub fn new(coalition: Vec<usize>, claimed_rooms: Vec<usize>, victim_rooms: Vec<usize>) -> Self {
        ExclusionaryParams {
            coalition,
            claimed_rooms,
            victim_rooms,
            claim: Rational::integer(15),
            filler: Rational::integer(9),
        }
    }
}

/// Each member overbids `claim` on its own room, reports `filler` on every
/// victim room, and spreads what is left over the rooms claimed by the other
/// members. The spread walks the coalition cyclically starting just after
/// the member, in whole units, so earlier rooms in that walk get the extra
/// units. Rooms that are neither claimed nor victim rooms come last.
pub fn template_exclusionary(
    truth: &ValuationMatrix,
    total_rent: &Rational,
    p: &ExclusionaryParams,
) -> Result<ValuationMatrix> {
    let n = truth.n();
    let k = p.coalition.len();
    if k != p.claimed_rooms.len() {
        return Err(Error::InvalidArgument(format!(
            "{k} coalition members but {} claimed rooms",
            p.claimed_rooms.len()
        )));
    }
    check_rooms(n, &p.coalition)?;
    let all: Vec<usize> = p
        .claimed_rooms
        .iter()
        .chain(&p.victim_rooms)
        .copied()
        .collect();
    check_rooms(n, &all)?;
    if p.claim.is_negative() || p.filler.is_negative() {
        return Err(infeasible("claim and filler must be nonnegative"));
    }
    let remainder = total_rent - &p.claim - &(&p.filler * &Rational::from(p.victim_rooms.len()));
    if remainder.is_negative() {
        return Err(infeasible(format!(
            "claim {} plus fillers exceed the total rent {}",
            p.claim, total_rent
        )));
    }

    let unclaimed: Vec<usize> = (0..n).filter(|r| !all.contains(r)).collect();
    let mut out = truth.clone();
    for (pos, &agent) in p.coalition.iter().enumerate() {
        let mut row = vec![Rational::zero(); n];
        row[p.claimed_rooms[pos]] = p.claim.clone();
        for &v in &p.victim_rooms {
            row[v] = p.filler.clone();
        }
        let mut others: Vec<usize> = (1..k).map(|d| p.claimed_rooms[(pos + d) % k]).collect();
        others.extend(&unclaimed);
        if others.is_empty() {
            row[p.claimed_rooms[pos]] += &remainder;
        } else {
            for (r, share) in others
                .iter()
                .zip(split_whole_units(&remainder, others.len()))
            {
                row[*r] = share;
            }
        }
        out.set_row(agent, row);
    }
    Ok(out)
}

/// Members report `floor(R / n)` on every room and put the remainder on
/// their own room, appearing nearly indifferent.
pub fn template_flatten(
    truth: &ValuationMatrix,
    total_rent: &Rational,
    own_rooms: &[(usize, usize)],
) -> Result<ValuationMatrix> {
    let n = truth.n();
    let base = (total_rent / &Rational::from(n)).floor();
    let extra = total_rent - &(&base * &Rational::from(n));
    let mut out = truth.clone();
    for &(agent, room) in own_rooms {
        if agent >= n || room >= n {
            return Err(Error::InvalidArgument(
                "agent or room index out of range".into(),
            ));
        }
        let mut row = vec![base.clone(); n];
        row[room] += &extra;
        out.set_row(agent, row);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefensiveParams {
    /// `(defender, [room, room])` — the two rooms each defender inflates.
    pub contested: Vec<(usize, [usize; 2])>,
    pub inflate: Rational,
    /// Value placed on rooms that a fellow defender is contesting.
    pub ally_value: Rational,
}

impl DefensiveParams {
    pub fn new(contested: Vec<(usize, [usize; 2])>) -> Self {
        DefensiveParams {
            contested,
            inflate: Rational::integer(12),
            ally_value: Rational::one(),
        }
    }
}

/// Each defender reports `inflate` on its two contested rooms. Rooms a
/// fellow defender contests get `ally_value` (capped by what is left), so
/// defenders do not bid against each other; the rest is split evenly in
/// whole units with extra units to the lower room index. With no room left
/// to absorb it, the residue goes on the first contested room.
pub fn template_defensive(
    truth: &ValuationMatrix,
    total_rent: &Rational,
    p: &DefensiveParams,
) -> Result<ValuationMatrix> {
    let n = truth.n();
    let mut out = truth.clone();
    for (agent, pair) in &p.contested {
        if *agent >= n {
            return Err(Error::InvalidArgument(format!(
                "agent index {agent} out of range"
            )));
        }
        check_rooms(n, pair)?;
        if p.inflate.is_negative() || p.ally_value.is_negative() {
            return Err(infeasible("inflate and ally values must be nonnegative"));
        }
        let mut left = total_rent - &(&p.inflate * &Rational::integer(2));
        if left.is_negative() {
            return Err(infeasible(format!(
                "inflating two rooms to {} exceeds the total rent {}",
                p.inflate, total_rent
            )));
        }
        let mut row = vec![Rational::zero(); n];
        for &r in pair {
            row[r] = p.inflate.clone();
        }
        let mut allied: Vec<usize> = p
            .contested
            .iter()
            .filter(|(other, _)| other != agent)
            .flat_map(|(_, rooms)| rooms.iter().copied())
            .filter(|r| !pair.contains(r))
            .collect();
        allied.sort_unstable();
        allied.dedup();
        for &r in &allied {
            let v = p.ally_value.clone().min(left.clone());
            left -= &v;
            row[r] = v;
        }
        let rest: Vec<usize> = (0..n)
            .filter(|r| !pair.contains(r) && !allied.contains(r))
            .collect();
        if rest.is_empty() {
            row[pair[0]] += &left;
        } else {
            for (r, share) in rest.iter().zip(split_whole_units(&left, rest.len())) {
                row[*r] = share;
            }
        }
        out.set_row(*agent, row);
    }
    Ok(out)
}
