//! On-disk scenario format (JSON). Money and values are decimal strings
//! (`"9.20"`) or fractions (`"46/5"`), parsed exactly; bare JSON integers are
//! accepted, bare JSON floats are not.

use std::fmt;
use std::path::Path;

use indexmap::IndexMap;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ExpectedOutcome, Scenario};
use crate::error::{Error, Result};
use crate::manipulation::Role;
use crate::model::{validate_instance, Assignment, Instance, PriceVector, ValuationMatrix};
use crate::rational::Rational;

/// A rational that can be written as a JSON string or integer.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Num(Rational);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_exact_string())
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Num;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a decimal string such as \"9.20\", a fraction \"46/5\", or an integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Num, E> {
                v.parse().map(Num).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Num, E> {
                Ok(Num(Rational::integer(v)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Num, E> {
                Ok(Num(Rational::from(v)))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Num, E> {
                Err(E::custom(format!(
                    "non-integer number {v} must be quoted (e.g. \"{v}\") to be read exactly"
                )))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileScenario {
    name: String,
    #[serde(default)]
    id: String,
    total_rent: Num,
    rooms: Vec<String>,
    agents: Vec<FileAgent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expected: Option<FileExpected>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    notes: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileAgent {
    id: String,
    #[serde(default)]
    role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    true_values: Option<Vec<Num>>,
    reported_values: Vec<Num>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileExpected {
    /// agent id -> room id
    assignment: IndexMap<String, String>,
    /// room id -> price
    prices: IndexMap<String, Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tolerance: Option<Num>,
}

/// 1-based line of the `nth` (0-based) occurrence of `"needle"`, or 1.
fn line_of(text: &str, needle: &str, nth: usize) -> usize {
    let quoted = format!("\"{needle}\"");
    text.match_indices(&quoted)
        .nth(nth)
        .map_or(1, |(pos, _)| text[..pos].matches('\n').count() + 1)
}

fn check_labels(text: &str, kind: &str, labels: &[String]) -> Result<()> {
    for (k, label) in labels.iter().enumerate() {
        if label.trim().is_empty() {
            return Err(Error::Parse {
                line: line_of(text, label, 0),
                reason: format!("empty {kind} id"),
            });
        }
        if labels[..k].contains(label) {
            return Err(Error::Parse {
                line: line_of(
                    text,
                    label,
                    labels[..k].iter().filter(|l| *l == label).count(),
                ),
                reason: format!("duplicate {kind} id {label:?}"),
            });
        }
    }
    Ok(())
}

fn slugify(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    out.trim_end_matches('-').to_string()
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let file: FileScenario = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line().max(1),
        reason: e.to_string(),
    })?;
    check_labels(text, "room", &file.rooms)?;
    let agent_ids: Vec<String> = file.agents.iter().map(|a| a.id.clone()).collect();
    check_labels(text, "agent", &agent_ids)?;

    let instance = Instance::new(file.rooms.clone(), agent_ids, file.total_rent.0.clone())?;
    let values = |v: &[Num]| v.iter().map(|x| x.0.clone()).collect::<Vec<_>>();
    let reported = ValuationMatrix::new(
        file.agents
            .iter()
            .map(|a| values(&a.reported_values))
            .collect(),
    );
    validate_instance(&instance, &reported)?;
    let true_matrix = if file.agents.iter().any(|a| a.true_values.is_some()) {
        let m = ValuationMatrix::new(
            file.agents
                .iter()
                .map(|a| values(a.true_values.as_ref().unwrap_or(&a.reported_values)))
                .collect(),
        );
        validate_instance(&instance, &m)?;
        Some(m)
    } else {
        None
    };

    let expected = match file.expected {
        None => None,
        Some(e) => {
            let semantic = |label: &str, reason: String| Error::Parse {
                line: line_of(text, label, 0),
                reason,
            };
            let mut rooms = vec![None; instance.n()];
            for (agent, room) in &e.assignment {
                let i = instance
                    .agent_index(agent)
                    .map_err(|err| semantic(agent, format!("expected assignment: {err}")))?;
                let r = instance
                    .room_index(room)
                    .map_err(|err| semantic(room, format!("expected assignment: {err}")))?;
                rooms[i] = Some(r);
            }
            let rooms: Option<Vec<usize>> = rooms.into_iter().collect();
            let rooms = rooms.ok_or_else(|| {
                semantic(
                    "assignment",
                    "expected assignment must cover every agent".into(),
                )
            })?;
            let assignment = Assignment::new(rooms)?;
            let mut prices = vec![None; instance.n()];
            for (room, price) in &e.prices {
                let r = instance
                    .room_index(room)
                    .map_err(|err| semantic(room, format!("expected prices: {err}")))?;
                prices[r] = Some(price.0.clone());
            }
            let prices: Option<Vec<Rational>> = prices.into_iter().collect();
            let prices = prices.ok_or_else(|| {
                semantic("prices", "expected prices must cover every room".into())
            })?;
            Some(ExpectedOutcome {
                assignment,
                prices: PriceVector::new(prices, instance.total_rent())?,
                tolerance: e.tolerance.map_or_else(Rational::zero, |t| t.0),
            })
        }
    };

    let scenario = Scenario {
        id: if file.id.is_empty() {
            slugify(&file.name)
        } else {
            file.id
        },
        name: file.name,
        instance,
        true_matrix,
        reported_matrix: reported,
        roles: file.agents.iter().map(|a| a.role).collect(),
        expected,
        notes: file.notes,
    };
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

pub fn scenario_to_json(s: &Scenario) -> String {
    let inst = &s.instance;
    let nums = |row: &[Rational]| row.iter().cloned().map(Num).collect::<Vec<_>>();
    let file = FileScenario {
        name: s.name.clone(),
        id: s.id.clone(),
        total_rent: Num(inst.total_rent().clone()),
        rooms: inst.rooms().to_vec(),
        agents: (0..inst.n())
            .map(|i| FileAgent {
                id: inst.agent(i).to_string(),
                role: s.roles[i],
                true_values: s.true_matrix.as_ref().map(|m| nums(m.row(i))),
                reported_values: nums(s.reported_matrix.row(i)),
            })
            .collect(),
        expected: s.expected.as_ref().map(|e| FileExpected {
            assignment: e.assignment.to_labels(inst).into_iter().collect(),
            prices: (0..inst.n())
                .map(|r| (inst.room(r).to_string(), Num(e.prices.price(r).clone())))
                .collect(),
            tolerance: Some(Num(e.tolerance.clone())),
        }),
        notes: s.notes.clone(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("serializable");
    out.push('\n');
    out
}

pub fn save_scenario(s: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, scenario_to_json(s))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ValidationError;
    use crate::scenario::builtin_scenarios;

    const SMALL: &str = r#"{
  "name": "Two Rooms",
  "total_rent": "10.50",
  "rooms": ["Big", "Small"],
  "agents": [
    {"id": "x", "reported_values": ["7.25", "3.25"]},
    {"id": "y", "role": "coalition", "reported_values": [5, "11/2"]}
  ]
}"#;

    #[test]
    fn parses_exact_decimals() {
        let s = parse_scenario(SMALL).unwrap();
        assert_eq!(s.id, "two-rooms");
        assert_eq!(s.instance.total_rent(), &Rational::new(21, 2));
        assert_eq!(s.reported_matrix.value(0, 0), &Rational::new(29, 4));
        assert_eq!(s.reported_matrix.value(1, 1), &Rational::new(11, 2));
        assert_eq!(s.roles, vec![Role::Honest, Role::Coalition]);
        assert!(s.true_matrix.is_none() && s.expected.is_none());
    }

    #[test]
    fn builtins_round_trip() {
        for s in builtin_scenarios() {
            let text = scenario_to_json(&s);
            assert_eq!(parse_scenario(&text).unwrap(), s);
        }
    }

    #[test]
    fn row_sum_is_a_validation_error() {
        let bad = SMALL.replace("\"7.25\"", "\"7\"");
        assert!(matches!(
            parse_scenario(&bad),
            Err(Error::Validation(ValidationError::RowSumMismatch { .. }))
        ));
    }

    #[test]
    fn duplicate_room_is_a_parse_error_with_line() {
        let bad = SMALL.replace("[\"Big\", \"Small\"]", "[\"Big\",\n \"Big\"]");
        match parse_scenario(&bad) {
            Err(Error::Parse { line, reason }) => {
                assert_eq!(line, 5);
                assert!(reason.contains("duplicate room"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_floats_unknown_fields_and_garbage() {
        let float = SMALL.replace("\"7.25\"", "7.25");
        assert!(matches!(
            parse_scenario(&float),
            Err(Error::Parse { line: 6, .. })
        ));
        let extra = SMALL.replace("\"name\"", "\"colour\": 1, \"name\"");
        assert!(matches!(parse_scenario(&extra), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_scenario("not json"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn expected_block_checks_labels_and_budget() {
        let with = |exp: &str| {
            SMALL.replacen(
                "\"agents\"",
                &format!("\"expected\": {exp},\n  \"agents\""),
                1,
            )
        };
        let ok = with(
            r#"{"assignment": {"x": "Big", "y": "Small"}, "prices": {"Big": "5.25", "Small": "5.25"}}"#,
        );
        let s = parse_scenario(&ok).unwrap();
        assert_eq!(s.expected.unwrap().tolerance, Rational::zero());
        let unknown = with(
            r#"{"assignment": {"x": "Big", "q": "Small"}, "prices": {"Big": "5", "Small": "5.5"}}"#,
        );
        assert!(matches!(parse_scenario(&unknown), Err(Error::Parse { .. })));
        let unbalanced = with(
            r#"{"assignment": {"x": "Big", "y": "Small"}, "prices": {"Big": "5", "Small": "5"}}"#,
        );
        assert!(matches!(
            parse_scenario(&unbalanced),
            Err(Error::Validation(ValidationError::BudgetImbalance { .. }))
        ));
    }
}
