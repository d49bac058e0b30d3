//! Text, JSON and CSV rendering. Text and CSV show money to the cent; JSON
//! carries every amount exactly as `{"num", "den", "decimal"}`.

use rentsplit::{Instance, MoneyRounding, Outcome, Rational, ValuationMatrix};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// `9.2` -> `9.20`.
pub fn cents(x: &Rational) -> String {
    x.render_money(MoneyRounding::HalfUp)
}

/// `9.2` -> `$9.20`, `-1` -> `-$1.00`.
pub fn money(x: &Rational) -> String {
    let s = cents(x);
    match s.strip_prefix('-') {
        Some(rest) => format!("-${rest}"),
        None => format!("${s}"),
    }
}

/// Signed money, for deltas.
pub fn delta(x: &Rational) -> String {
    if x.is_negative() {
        money(x)
    } else {
        format!("+{}", money(x))
    }
}

pub fn rat(x: &Rational) -> Value {
    json!({
        "num": x.numer().to_string(),
        "den": x.denom().to_string(),
        "decimal": cents(x),
    })
}

pub fn rats(xs: &[Rational]) -> Value {
    Value::Array(xs.iter().map(rat).collect())
}

pub fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Left-aligned columns separated by two spaces.
pub fn columns(rows: &[Vec<String>]) -> String {
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..width)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c + 1 == row.len() {
                line.push_str(cell);
            } else {
                line.push_str(&format!("{cell:<w$}  ", w = widths[c]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Agent-by-agent outcome table plus room prices and summary figures.
pub fn outcome_text(inst: &Instance, matrix: &ValuationMatrix, o: &Outcome) -> String {
    let mut rows = vec![vec![
        "Agent".to_string(),
        "Room".into(),
        "Value".into(),
        "Price".into(),
        "Utility".into(),
    ]];
    for i in 0..inst.n() {
        let r = o.assignment.room_of(i);
        rows.push(vec![
            inst.agent(i).to_string(),
            inst.room(r).to_string(),
            money(matrix.value(i, r)),
            money(o.prices.price(r)),
            money(&o.utilities[i]),
        ]);
    }
    let mut out = columns(&rows);
    out.push('\n');
    let prices: Vec<String> = (0..inst.n())
        .map(|r| format!("{} {}", inst.room(r), money(o.prices.price(r))))
        .collect();
    out.push_str(&format!("Prices: {}\n", prices.join("  ")));
    out.push_str(&format!("Welfare: {}\n", money(&o.welfare)));
    out.push_str(&format!("Minimum utility: {}\n", money(&o.min_utility)));
    out
}

pub fn outcome_json(inst: &Instance, o: &Outcome) -> Value {
    let n = inst.n();
    json!({
        "assignment": (0..n).map(|i| json!({
            "agent": inst.agent(i),
            "room": inst.room(o.assignment.room_of(i)),
        })).collect::<Vec<_>>(),
        "prices": (0..n).map(|r| json!({
            "room": inst.room(r),
            "price": rat(o.prices.price(r)),
        })).collect::<Vec<_>>(),
        "utilities": (0..n).map(|i| json!({
            "agent": inst.agent(i),
            "utility": rat(&o.utilities[i]),
        })).collect::<Vec<_>>(),
        "welfare": rat(&o.welfare),
        "min_utility": rat(&o.min_utility),
    })
}

pub fn matrix_json(inst: &Instance, m: &ValuationMatrix) -> Value {
    Value::Array(
        (0..inst.n())
            .map(|i| json!({ "agent": inst.agent(i), "values": rats(m.row(i)) }))
            .collect(),
    )
}

/// Values as plain numbers (`15`, `7.5`, `1/3`).
pub fn row_text(row: &[Rational]) -> Vec<String> {
    row.iter().map(Rational::to_exact_string).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn money_formats() {
        assert_eq!(money(&Rational::new(46, 5)), "$9.20");
        assert_eq!(money(&Rational::integer(-1)), "-$1.00");
        assert_eq!(delta(&Rational::new(2, 5)), "+$0.40");
        assert_eq!(delta(&Rational::new(-4, 5)), "-$0.80");
        assert_eq!(money(&Rational::new(1, 3)), "$0.33");
        assert_eq!(money(&Rational::new(2, 3)), "$0.67");
    }

    #[test]
    fn rational_json_is_exact() {
        let v = rat(&Rational::new(1, 3));
        assert_eq!(v["num"], "1");
        assert_eq!(v["den"], "3");
        assert_eq!(v["decimal"], "0.33");
    }

    #[test]
    fn columns_align() {
        let t = columns(&[
            vec!["a".into(), "bb".into()],
            vec!["ccc".into(), "d".into()],
        ]);
        assert_eq!(t, "a    bb\nccc  d\n");
    }

    #[test]
    fn csv_quotes_when_needed() {
        let s = csv_string(&["x", "y"], &[vec!["a,b".into(), "c".into()]]);
        assert_eq!(s, "x,y\n\"a,b\",c\n");
    }
}
