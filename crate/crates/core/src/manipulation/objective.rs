use crate::error::{Error, Result};
use crate::model::{Instance, Outcome, ValuationMatrix};
use crate::rational::Rational;

/// What a misreporting agent or coalition is trying to achieve. Agents and
/// rooms are roster indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ManipulationObjective {
    ExcludeFromRooms {
        targets: Vec<usize>,
        rooms: Vec<usize>,
    },
    MinimizeOwnPayment(usize),
    MinimizeCoalitionPayments(Vec<usize>),
    SubsidizeAgent {
        beneficiary: usize,
        room: usize,
        max_price: Option<Rational>,
    },
    MaximizeTrueUtility(usize),
}

/// Larger is better. `tier` ranks qualitative success (e.g. how many targets
/// are excluded); `value` breaks ties within a tier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectiveScore {
    pub tier: u32,
    pub value: Rational,
}

impl ManipulationObjective {
    /// Parses `exclude:D,E@R1,R2,R3`, `min-pay:D`, `min-pay:D,E`,
    /// `subsidize:E@R1<=7`, `subsidize:E@R1`, `max-util:A`.
    ///
    /// `min-pay` with a single agent is the agent's own payment.
    pub fn parse(text: &str, instance: &Instance) -> Result<Self> {
        let bad = |why: &str| Error::InvalidObjective(format!("{text:?}: {why}"));
        let (kind, rest) = text.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let agents = |s: &str| -> Result<Vec<usize>> {
            let ids: Vec<&str> = s.split(',').map(str::trim).collect();
            if ids.iter().any(|id| id.is_empty()) {
                return Err(bad("empty agent label"));
            }
            ids.into_iter().map(|id| instance.agent_index(id)).collect()
        };
        let rooms = |s: &str| -> Result<Vec<usize>> {
            if s.trim().is_empty() {
                return Ok(Vec::new());
            }
            s.split(',')
                .map(|id| instance.room_index(id.trim()))
                .collect()
        };
        let single = |s: &str| -> Result<usize> {
            match agents(s)?.as_slice() {
                [a] => Ok(*a),
                _ => Err(bad("expected exactly one agent")),
            }
        };
        match kind.trim() {
            "exclude" => {
                let (who, where_) = rest.split_once('@').ok_or_else(|| bad("missing '@'"))?;
                Ok(ManipulationObjective::ExcludeFromRooms {
                    targets: agents(who)?,
                    rooms: rooms(where_)?,
                })
            }
            "min-pay" => {
                let who = agents(rest)?;
                Ok(match who.as_slice() {
                    [a] => ManipulationObjective::MinimizeOwnPayment(*a),
                    _ => ManipulationObjective::MinimizeCoalitionPayments(who),
                })
            }
            "subsidize" => {
                let (who, target) = rest.split_once('@').ok_or_else(|| bad("missing '@'"))?;
                let (room, cap) = match target.split_once("<=") {
                    Some((r, c)) => (
                        r,
                        Some(
                            c.trim()
                                .parse::<Rational>()
                                .map_err(|e| bad(&e.to_string()))?,
                        ),
                    ),
                    None => (target, None),
                };
                Ok(ManipulationObjective::SubsidizeAgent {
                    beneficiary: single(who)?,
                    room: instance.room_index(room.trim())?,
                    max_price: cap,
                })
            }
            "max-util" => Ok(ManipulationObjective::MaximizeTrueUtility(single(rest)?)),
            other => Err(bad(&format!("unknown objective kind {other:?}"))),
        }
    }

    /// Inverse of [`ManipulationObjective::parse`].
    pub fn render(&self, instance: &Instance) -> String {
        let agents = |xs: &[usize]| {
            xs.iter()
                .map(|&i| instance.agent(i))
                .collect::<Vec<_>>()
                .join(",")
        };
        let rooms = |xs: &[usize]| {
            xs.iter()
                .map(|&j| instance.room(j))
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            ManipulationObjective::ExcludeFromRooms { targets, rooms: r } => {
                format!("exclude:{}@{}", agents(targets), rooms(r))
            }
            ManipulationObjective::MinimizeOwnPayment(a) => {
                format!("min-pay:{}", instance.agent(*a))
            }
            ManipulationObjective::MinimizeCoalitionPayments(c) => format!("min-pay:{}", agents(c)),
            ManipulationObjective::SubsidizeAgent {
                beneficiary,
                room,
                max_price,
            } => {
                let mut s = format!(
                    "subsidize:{}@{}",
                    instance.agent(*beneficiary),
                    instance.room(*room)
                );
                if let Some(cap) = max_price {
                    s.push_str(&format!(
                        "<={}",
                        cap.to_decimal_exact().unwrap_or_else(|| cap.to_string())
                    ));
                }
                s
            }
            ManipulationObjective::MaximizeTrueUtility(a) => {
                format!("max-util:{}", instance.agent(*a))
            }
        }
    }

    /// Every agent index the objective mentions.
    pub fn agents(&self) -> Vec<usize> {
        match self {
            ManipulationObjective::ExcludeFromRooms { targets, .. } => targets.clone(),
            ManipulationObjective::MinimizeCoalitionPayments(c) => c.clone(),
            ManipulationObjective::MinimizeOwnPayment(a)
            | ManipulationObjective::MaximizeTrueUtility(a)
            | ManipulationObjective::SubsidizeAgent { beneficiary: a, .. } => vec![*a],
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        let rooms: &[usize] = match self {
            ManipulationObjective::ExcludeFromRooms { rooms, .. } => rooms,
            ManipulationObjective::SubsidizeAgent { room, .. } => std::slice::from_ref(room),
            _ => &[],
        };
        if self.agents().iter().chain(rooms).any(|&k| k >= n) {
            return Err(Error::InvalidObjective("index out of range".into()));
        }
        Ok(())
    }

    /// Scores an outcome; utilities are always measured with `truth`.
    pub fn score(&self, truth: &ValuationMatrix, outcome: &Outcome) -> ObjectiveScore {
        let zero = Rational::zero;
        match self {
            ManipulationObjective::ExcludeFromRooms { targets, rooms } => ObjectiveScore {
                tier: targets
                    .iter()
                    .filter(|&&a| !rooms.contains(&outcome.assignment.room_of(a)))
                    .count() as u32,
                value: zero(),
            },
            ManipulationObjective::MinimizeOwnPayment(a) => ObjectiveScore {
                tier: 0,
                value: -outcome.payment(*a),
            },
            ManipulationObjective::MinimizeCoalitionPayments(c) => ObjectiveScore {
                tier: 0,
                value: -c.iter().map(|&a| outcome.payment(a)).sum::<Rational>(),
            },
            ManipulationObjective::SubsidizeAgent {
                beneficiary,
                room,
                max_price,
            } => {
                let payment = outcome.payment(*beneficiary);
                let placed = outcome.assignment.room_of(*beneficiary) == *room;
                let cheap = max_price.as_ref().is_none_or(|cap| payment <= cap);
                ObjectiveScore {
                    tier: u32::from(placed && cheap),
                    value: -payment,
                }
            }
            ManipulationObjective::MaximizeTrueUtility(a) => {
                let r = outcome.assignment.room_of(*a);
                ObjectiveScore {
                    tier: 0,
                    value: truth.value(*a, r) - outcome.prices.price(r),
                }
            }
        }
    }

    /// Exclusion and subsidy goals are absolute; the payment and utility
    /// goals require a strict improvement over honest reporting.
    pub fn satisfied(&self, honest: &ObjectiveScore, manipulated: &ObjectiveScore) -> bool {
        match self {
            ManipulationObjective::ExcludeFromRooms { targets, .. } => {
                manipulated.tier as usize == targets.len()
            }
            ManipulationObjective::SubsidizeAgent { .. } => manipulated.tier == 1,
            _ => manipulated > honest,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst() -> Instance {
        Instance::lettered(5, 36.into()).unwrap()
    }

    #[test]
    fn grammar_round_trips() {
        let i = inst();
        for text in [
            "exclude:D,E@R1,R2,R3",
            "min-pay:D,E",
            "min-pay:A",
            "subsidize:E@R1<=7",
            "subsidize:E@R1",
            "max-util:A",
        ] {
            let obj = ManipulationObjective::parse(text, &i).unwrap();
            assert_eq!(obj.render(&i), text);
        }
        assert_eq!(
            ManipulationObjective::parse("exclude:D,E@R1,R2,R3", &i).unwrap(),
            ManipulationObjective::ExcludeFromRooms {
                targets: vec![3, 4],
                rooms: vec![0, 1, 2]
            }
        );
        assert_eq!(
            ManipulationObjective::parse("subsidize:E@R1<=7.5", &i).unwrap(),
            ManipulationObjective::SubsidizeAgent {
                beneficiary: 4,
                room: 0,
                max_price: Some(Rational::new(15, 2))
            }
        );
    }

    #[test]
    fn grammar_rejects() {
        let i = inst();
        for text in [
            "",
            "exclude:D",
            "min-pay:Z",
            "max-util:A,B",
            "steal:A",
            "subsidize:E@R9",
            "min-pay:",
        ] {
            assert!(ManipulationObjective::parse(text, &i).is_err(), "{text}");
        }
    }
}
