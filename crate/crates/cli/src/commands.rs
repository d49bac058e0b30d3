use std::path::{Path, PathBuf};

use rentsplit::manipulation::{
    best_response, coalition_search, compare_outcomes, evaluate_deviation, joint_search,
    template_defensive, template_exclusionary, template_flatten, DefensiveParams, DeviationReport,
    ExclusionaryParams, ManipulationObjective, ObjectiveScore, SearchConfig,
};
use rentsplit::scenario::{
    builtin, builtin_ids, builtin_scenarios, load_scenario, run_scenario, scenario_to_json,
    DiscrepancyReport, Scenario, ScenarioRun,
};
use rentsplit::{Error, Instance, Mechanism, Rational, Result, ValuationMatrix};
use serde_json::{json, Value};

use crate::render::*;

/// What a command printed and whether a verification mismatch occurred.
pub struct Report {
    pub stdout: String,
    pub mismatch: bool,
}

impl Report {
    fn ok(stdout: String) -> Self {
        Report {
            stdout,
            mismatch: false,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub fn load(file: Option<&Path>, builtin_id: Option<&str>) -> Result<Scenario> {
    let scenario = match (file, builtin_id) {
        (Some(path), None) => load_scenario(path)?,
        (None, Some(id)) => builtin(id).ok_or_else(|| {
            invalid(format!(
                "unknown builtin {id:?} (known: {})",
                builtin_ids().join(", ")
            ))
        })?,
        (None, None) => return Err(invalid("give a scenario file or --builtin <id>")),
        (Some(_), Some(_)) => return Err(invalid("give either a file or --builtin, not both")),
    };
    scenario.validate()?;
    Ok(scenario)
}

fn header(s: &Scenario) -> String {
    format!(
        "{} ({})\nTotal rent: {}\n",
        s.name,
        s.id,
        money(s.instance.total_rent())
    )
}

// ---------------------------------------------------------------------------
// solve

pub fn solve(s: &Scenario, mech: &Mechanism, format: Format) -> Result<Report> {
    let inst = &s.instance;
    let m = &s.reported_matrix;
    let o = mech.run(inst, m)?;
    let out = match format {
        Format::Text => format!("{}\n{}", header(s), outcome_text(inst, m, &o)),
        Format::Json => pretty(&json!({
            "scenario": { "id": s.id, "name": s.name },
            "total_rent": rat(inst.total_rent()),
            "rooms": inst.rooms(),
            "agents": inst.agents(),
            "outcome": outcome_json(inst, &o),
        })),
        Format::Csv => {
            let rows: Vec<Vec<String>> = (0..inst.n())
                .map(|i| {
                    let r = o.assignment.room_of(i);
                    vec![
                        inst.agent(i).to_string(),
                        inst.room(r).to_string(),
                        cents(m.value(i, r)),
                        cents(o.prices.price(r)),
                        cents(&o.utilities[i]),
                    ]
                })
                .collect();
            csv_string(&["agent", "room", "value", "price", "utility"], &rows)
        }
    };
    Ok(Report::ok(out))
}

// ---------------------------------------------------------------------------
// verify

fn checked_run(s: &Scenario, mech: &Mechanism) -> Result<(ScenarioRun, DiscrepancyReport)> {
    let run = run_scenario(s, mech)?;
    let report = run.report.clone().ok_or(Error::MissingExpected)?;
    Ok((run, report))
}

fn assignment_line(inst: &Instance, rooms_by_agent: &[usize]) -> String {
    rooms_by_agent
        .iter()
        .enumerate()
        .map(|(i, &r)| format!("{}->{}", inst.agent(i), inst.room(r)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn verify_text(s: &Scenario, run: &ScenarioRun, rep: &DiscrepancyReport) -> String {
    let inst = &s.instance;
    let exp = s.expected.as_ref().expect("checked");
    let mut out = format!(
        "== {} ({}) ==\nverdict: {}\n",
        s.name,
        s.id,
        rep.verdict.as_str()
    );
    let mut rows = vec![vec![
        "Room".to_string(),
        "Expected".into(),
        "Computed".into(),
        "Diff".into(),
    ]];
    for r in 0..inst.n() {
        rows.push(vec![
            inst.room(r).to_string(),
            money(exp.prices.price(r)),
            money(run.outcome.prices.price(r)),
            delta(&rep.price_diffs[r]),
        ]);
    }
    out.push_str(&columns(&rows));
    out.push_str(&format!(
        "assignment expected: {}\nassignment computed: {}\n",
        assignment_line(inst, exp.assignment.rooms_by_agent()),
        assignment_line(inst, run.outcome.assignment.rooms_by_agent()),
    ));
    out.push_str(&format!(
        "prices within tolerance ({}): {}\n",
        money(&exp.tolerance),
        yes_no(rep.prices_within_tolerance)
    ));
    out.push_str(&format!(
        "assignment identical: {}; welfare-maximizing: {}\n",
        yes_no(rep.assignment_identical),
        yes_no(rep.assignment_equivalent)
    ));
    out.push_str(&format!(
        "expected prices envy-free: {}; maximin: {}\n",
        yes_no(rep.expected_is_envy_free),
        yes_no(rep.expected_is_maximin)
    ));
    out.push_str(&format!(
        "minimum utility: expected {}, computed {} (exact {})\n",
        money(&rep.expected_min_utility),
        money(&rep.computed_min_utility),
        rep.computed_min_utility.to_exact_string()
    ));
    out
}

fn verify_json(s: &Scenario, run: &ScenarioRun, rep: &DiscrepancyReport) -> Value {
    let inst = &s.instance;
    let exp = s.expected.as_ref().expect("checked");
    json!({
        "id": s.id,
        "name": s.name,
        "verdict": rep.verdict,
        "expected": {
            "assignment": (0..inst.n()).map(|i| json!({
                "agent": inst.agent(i),
                "room": inst.room(exp.assignment.room_of(i)),
            })).collect::<Vec<_>>(),
            "prices": rats(exp.prices.as_slice()),
            "tolerance": rat(&exp.tolerance),
            "min_utility": rat(&rep.expected_min_utility),
            "envy_free": rep.expected_is_envy_free,
            "maximin": rep.expected_is_maximin,
        },
        "computed": outcome_json(inst, &run.outcome),
        "price_diffs": rats(&rep.price_diffs),
        "prices_within_tolerance": rep.prices_within_tolerance,
        "assignment_identical": rep.assignment_identical,
        "assignment_equivalent": rep.assignment_equivalent,
    })
}

pub fn verify(scenarios: &[Scenario], mech: &Mechanism, format: Format) -> Result<Report> {
    let mut runs = Vec::new();
    for s in scenarios {
        let (run, rep) = checked_run(s, mech)?;
        runs.push((s, run, rep));
    }
    let mismatch = runs.iter().any(|(_, _, rep)| !rep.verdict.is_ok());
    let out = match format {
        Format::Text => {
            let blocks: Vec<String> = runs
                .iter()
                .map(|(s, run, rep)| verify_text(s, run, rep))
                .collect();
            let agree = runs.iter().filter(|(_, _, r)| r.verdict.is_ok()).count();
            format!(
                "{}\n{agree} of {} scenarios agree with their expected outcome\n",
                blocks.join("\n"),
                runs.len()
            )
        }
        Format::Json => pretty(&json!({
            "scenarios": runs.iter().map(|(s, run, rep)| verify_json(s, run, rep)).collect::<Vec<_>>(),
            "all_ok": !mismatch,
        })),
        Format::Csv => {
            let mut rows = Vec::new();
            for (s, run, rep) in &runs {
                let exp = s.expected.as_ref().expect("checked");
                for r in 0..s.instance.n() {
                    rows.push(vec![
                        s.id.clone(),
                        s.instance.room(r).to_string(),
                        cents(exp.prices.price(r)),
                        cents(run.outcome.prices.price(r)),
                        cents(&rep.price_diffs[r]),
                        rep.verdict.as_str().to_string(),
                    ]);
                }
            }
            csv_string(
                &[
                    "scenario", "room", "expected", "computed", "diff", "verdict",
                ],
                &rows,
            )
        }
    };
    Ok(Report {
        stdout: out,
        mismatch,
    })
}

// ---------------------------------------------------------------------------
// table

/// `15 [$9.20]` when the agent holds the room, else `15`.
fn cell(value: &Rational, price: Option<&Rational>) -> String {
    match price {
        Some(p) => format!("{} [{}]", value.to_exact_string(), money(p)),
        None => value.to_exact_string(),
    }
}

pub fn table(mech: &Mechanism, format: Format) -> Result<Report> {
    let scenarios = builtin_scenarios();
    let mut runs = Vec::new();
    for s in &scenarios {
        let (run, rep) = checked_run(s, mech)?;
        runs.push((s, run, rep));
    }
    let out = match format {
        Format::Text => {
            let mut out = String::new();
            for (s, run, rep) in &runs {
                let inst = &s.instance;
                let exp = s.expected.as_ref().expect("builtins carry expectations");
                out.push_str(&format!("{}\n", s.name));
                out.push_str(&format!("{}\n", s.notes));
                let mut rows = vec![std::iter::once("Participant".to_string())
                    .chain(inst.rooms().iter().cloned())
                    .chain(["Computed".to_string()])
                    .collect::<Vec<_>>()];
                for i in 0..inst.n() {
                    let er = exp.assignment.room_of(i);
                    let cr = run.outcome.assignment.room_of(i);
                    let mut row = vec![format!("{} ({})", inst.agent(i), s.roles[i])];
                    for r in 0..inst.n() {
                        let p = (r == er).then(|| exp.prices.price(r));
                        row.push(cell(s.reported_matrix.value(i, r), p));
                    }
                    row.push(format!(
                        "{} {}",
                        inst.room(cr),
                        money(run.outcome.prices.price(cr))
                    ));
                    rows.push(row);
                }
                out.push_str(&columns(&rows));
                out.push_str(&format!(
                    "verdict: {}  (minimum utility: expected {}, computed {})\n\n",
                    rep.verdict.as_str(),
                    money(&rep.expected_min_utility),
                    money(&rep.computed_min_utility)
                ));
            }
            out
        }
        Format::Json => pretty(&json!({
            "scenarios": runs.iter().map(|(s, run, rep)| {
                let mut v = verify_json(s, run, rep);
                v["roles"] = json!(s.roles.iter().map(|r| r.as_str()).collect::<Vec<_>>());
                v["reported"] = matrix_json(&s.instance, &s.reported_matrix);
                v["notes"] = json!(s.notes);
                v
            }).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut rows = Vec::new();
            for (s, run, rep) in &runs {
                let inst = &s.instance;
                let exp = s.expected.as_ref().expect("builtins carry expectations");
                for i in 0..inst.n() {
                    let er = exp.assignment.room_of(i);
                    let cr = run.outcome.assignment.room_of(i);
                    let mut row = vec![
                        s.id.clone(),
                        inst.agent(i).to_string(),
                        s.roles[i].to_string(),
                    ];
                    row.extend(row_text(s.reported_matrix.row(i)));
                    row.extend([
                        inst.room(er).to_string(),
                        cents(exp.prices.price(er)),
                        inst.room(cr).to_string(),
                        cents(run.outcome.prices.price(cr)),
                        rep.verdict.as_str().to_string(),
                    ]);
                    rows.push(row);
                }
            }
            let rooms = scenarios[0].instance.rooms();
            let mut hdr = vec!["scenario", "agent", "role"];
            hdr.extend(rooms.iter().map(String::as_str));
            hdr.extend([
                "expected_room",
                "expected_price",
                "computed_room",
                "computed_price",
                "verdict",
            ]);
            csv_string(&hdr, &rows)
        }
    };
    // A reproduction report: disagreement is part of its content, not a failure.
    Ok(Report::ok(out))
}

// ---------------------------------------------------------------------------
// export

pub fn export(scenarios: &[Scenario], out_dir: Option<&Path>) -> Result<Report> {
    match out_dir {
        None => Ok(Report::ok(
            scenarios
                .iter()
                .map(scenario_to_json)
                .collect::<Vec<_>>()
                .join(""),
        )),
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let mut out = String::new();
            for s in scenarios {
                let path: PathBuf = dir.join(format!("{}.json", s.id));
                std::fs::write(&path, scenario_to_json(s))?;
                out.push_str(&format!("wrote {}\n", path.display()));
            }
            Ok(Report::ok(out))
        }
    }
}

// ---------------------------------------------------------------------------
// manipulate

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Template {
    Exclusionary,
    Flatten,
    Defensive,
}

pub struct ManipulateOptions {
    pub coalition: String,
    pub objective: Option<String>,
    pub template: Option<Template>,
    pub search: bool,
    pub joint: bool,
    pub on_reports: bool,
    pub step: Rational,
    pub budget: u128,
    pub max_rounds: usize,
    pub claimed_rooms: Option<String>,
    pub victim_rooms: Option<String>,
    pub claim: Rational,
    pub filler: Rational,
    pub own_rooms: Option<String>,
    pub contested: Option<String>,
    pub inflate: Rational,
    pub ally_value: Rational,
}

fn split_labels(s: &str) -> Result<Vec<&str>> {
    let labels: Vec<&str> = s.split(',').map(str::trim).collect();
    if labels.iter().any(|l| l.is_empty()) {
        return Err(invalid(format!("empty label in {s:?}")));
    }
    Ok(labels)
}

fn distinct(kind: &str, xs: &[usize]) -> Result<()> {
    for (k, x) in xs.iter().enumerate() {
        if xs[..k].contains(x) {
            return Err(invalid(format!("{kind} listed twice")));
        }
    }
    Ok(())
}

fn agent_list(inst: &Instance, s: &str) -> Result<Vec<usize>> {
    let out = split_labels(s)?
        .into_iter()
        .map(|l| inst.agent_index(l))
        .collect::<Result<Vec<_>>>()?;
    distinct("agent", &out)?;
    Ok(out)
}

fn room_list(inst: &Instance, s: &str) -> Result<Vec<usize>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    let out = split_labels(s)?
        .into_iter()
        .map(|l| inst.room_index(l))
        .collect::<Result<Vec<_>>>()?;
    distinct("room", &out)?;
    Ok(out)
}

/// `D:R1,R2;E:R2,R3`.
fn contested_list(inst: &Instance, s: &str) -> Result<Vec<(usize, [usize; 2])>> {
    s.split(';')
        .map(|part| {
            let (who, rooms) = part
                .split_once(':')
                .ok_or_else(|| invalid(format!("expected AGENT:ROOM,ROOM in {part:?}")))?;
            let agent = inst.agent_index(who.trim())?;
            match room_list(inst, rooms)?.as_slice() {
                [a, b] => Ok((agent, [*a, *b])),
                _ => Err(invalid(format!("{part:?} must name exactly two rooms"))),
            }
        })
        .collect()
}

/// The two rooms the agent values most; ties go to the lower index.
fn top_two(truth: &ValuationMatrix, agent: usize) -> [usize; 2] {
    let mut rooms: Vec<usize> = (0..truth.n()).collect();
    rooms.sort_by(|&a, &b| {
        truth
            .value(agent, b)
            .cmp(truth.value(agent, a))
            .then(a.cmp(&b))
    });
    [rooms[0], rooms[1]]
}

enum How {
    Template(Template),
    Search {
        candidates: Option<u128>,
        rounds: Option<(usize, bool)>,
        history: Vec<ObjectiveScore>,
        joint: bool,
    },
}

fn build_reports(
    s: &Scenario,
    mech: &Mechanism,
    coalition: &[usize],
    objective: &ManipulationObjective,
    opts: &ManipulateOptions,
) -> Result<(ValuationMatrix, How)> {
    let inst = &s.instance;
    let n = inst.n();
    let truth = s.truth();
    let rent = inst.total_rent();
    let base = if opts.on_reports {
        &s.reported_matrix
    } else {
        truth
    };
    let searching = opts.search || opts.joint;
    match (opts.template, searching) {
        (Some(_), true) => Err(invalid("--template and --search are mutually exclusive")),
        (None, false) => Err(invalid("choose --template <name> or --search")),
        (Some(t), false) => {
            let reported = match t {
                Template::Exclusionary => {
                    let claimed = match &opts.claimed_rooms {
                        Some(r) => room_list(inst, r)?,
                        None => (0..coalition.len().min(n)).collect(),
                    };
                    let victims = match &opts.victim_rooms {
                        Some(r) => room_list(inst, r)?,
                        None => (0..n).filter(|r| !claimed.contains(r)).collect(),
                    };
                    let mut p = ExclusionaryParams::new(coalition.to_vec(), claimed, victims);
                    p.claim = opts.claim.clone();
                    p.filler = opts.filler.clone();
                    template_exclusionary(base, rent, &p)?
                }
                Template::Flatten => {
                    let own = match &opts.own_rooms {
                        Some(r) => room_list(inst, r)?,
                        None => (n.saturating_sub(coalition.len())..n).collect(),
                    };
                    if own.len() != coalition.len() {
                        return Err(invalid(format!(
                            "{} coalition members but {} own rooms",
                            coalition.len(),
                            own.len()
                        )));
                    }
                    let pairs: Vec<(usize, usize)> = coalition.iter().copied().zip(own).collect();
                    template_flatten(base, rent, &pairs)?
                }
                Template::Defensive => {
                    let contested = match &opts.contested {
                        Some(c) => {
                            let c = contested_list(inst, c)?;
                            if c.iter().any(|(a, _)| !coalition.contains(a)) {
                                return Err(invalid(
                                    "--contested names an agent outside the coalition",
                                ));
                            }
                            c
                        }
                        None => coalition.iter().map(|&a| (a, top_two(truth, a))).collect(),
                    };
                    let mut p = DefensiveParams::new(contested);
                    p.inflate = opts.inflate.clone();
                    p.ally_value = opts.ally_value.clone();
                    template_defensive(base, rent, &p)?
                }
            };
            Ok((reported, How::Template(t)))
        }
        (None, true) => {
            let cfg = SearchConfig {
                step: opts.step.clone(),
                budget: opts.budget,
                max_rounds: opts.max_rounds,
            };
            if opts.joint {
                let r = joint_search(mech, truth, rent, coalition, objective, &cfg)?;
                Ok((
                    r.reported,
                    How::Search {
                        candidates: None,
                        rounds: None,
                        history: r.history,
                        joint: true,
                    },
                ))
            } else if let [agent] = coalition {
                let br = best_response(mech, truth, base, rent, *agent, objective, &cfg)?;
                Ok((
                    base.with_row(*agent, br.row),
                    How::Search {
                        candidates: Some(br.candidates),
                        rounds: None,
                        history: vec![br.score],
                        joint: false,
                    },
                ))
            } else {
                if opts.on_reports {
                    return Err(invalid(
                        "--on-reports applies to templates and single-agent search",
                    ));
                }
                let r = coalition_search(mech, truth, rent, coalition, objective, &cfg)?;
                Ok((
                    r.reported,
                    How::Search {
                        candidates: None,
                        rounds: Some((r.rounds, r.converged)),
                        history: r.history,
                        joint: false,
                    },
                ))
            }
        }
    }
}

fn score_text(s: &ObjectiveScore) -> String {
    format!("tier {}, value {}", s.tier, s.value.to_exact_string())
}

fn how_text(how: &How) -> String {
    match how {
        How::Template(t) => format!("template {}", template_name(*t)),
        How::Search {
            candidates,
            rounds,
            joint,
            ..
        } => {
            let mut s = String::from(if *joint { "joint search" } else { "search" });
            if let Some(c) = candidates {
                s.push_str(&format!(", {c} candidate rows"));
            }
            if let Some((r, conv)) = rounds {
                s.push_str(&format!(
                    ", {r} round(s), {}",
                    if *conv {
                        "converged"
                    } else {
                        "round cap reached"
                    }
                ));
            }
            s
        }
    }
}

fn template_name(t: Template) -> &'static str {
    match t {
        Template::Exclusionary => "exclusionary",
        Template::Flatten => "flatten",
        Template::Defensive => "defensive",
    }
}

fn deviation_text(
    s: &Scenario,
    on_reports: bool,
    coalition: &[usize],
    objective: &ManipulationObjective,
    how: &How,
    reported: &ValuationMatrix,
    d: &DeviationReport,
) -> String {
    let inst = &s.instance;
    let truth = s.truth();
    let mut out = header(s);
    out.push_str(&format!(
        "Coalition: {}\nObjective: {}\nMethod: {}\nCompared against: {}\n\n",
        coalition
            .iter()
            .map(|&a| inst.agent(a))
            .collect::<Vec<_>>()
            .join(", "),
        objective.render(inst),
        how_text(how),
        if on_reports {
            "the scenario's reports"
        } else {
            "truthful reports"
        }
    ));

    let mut rows = vec![std::iter::once("Reports".to_string())
        .chain(inst.rooms().iter().cloned())
        .collect::<Vec<_>>()];
    for &a in coalition {
        let mut t = vec![format!("{} true", inst.agent(a))];
        t.extend(row_text(truth.row(a)));
        let mut r = vec![format!("{} sent", inst.agent(a))];
        r.extend(row_text(reported.row(a)));
        rows.push(t);
        rows.push(r);
    }
    out.push_str(&columns(&rows));
    out.push('\n');

    let mut rows = vec![vec![
        "Agent".to_string(),
        "Before".into(),
        "After".into(),
        "Payment change".into(),
        "True utility change".into(),
    ]];
    for i in 0..inst.n() {
        let hr = d.honest.assignment.room_of(i);
        let mr = d.manipulated.assignment.room_of(i);
        rows.push(vec![
            inst.agent(i).to_string(),
            format!("{} {}", inst.room(hr), money(d.honest.prices.price(hr))),
            format!(
                "{} {}",
                inst.room(mr),
                money(d.manipulated.prices.price(mr))
            ),
            delta(&d.payment_delta[i]),
            delta(&d.true_utility_delta[i]),
        ]);
    }
    out.push_str(&columns(&rows));
    out.push('\n');

    let envy = if d.envy_under_truth.is_empty() {
        "none".to_string()
    } else {
        d.envy_under_truth
            .iter()
            .map(|&(i, j)| format!("{} envies {}", inst.agent(i), inst.agent(j)))
            .collect::<Vec<_>>()
            .join(", ")
    };
    out.push_str(&format!("Envy under true values: {envy}\n"));
    out.push_str(&format!(
        "Objective score: before ({}) -> after ({})\n",
        score_text(&d.honest_score),
        score_text(&d.manipulated_score)
    ));
    out.push_str(&format!(
        "Objective satisfied: {}\n",
        yes_no(d.objective_satisfied)
    ));
    out
}

fn deviation_json(
    s: &Scenario,
    on_reports: bool,
    coalition: &[usize],
    objective: &ManipulationObjective,
    how: &How,
    reported: &ValuationMatrix,
    d: &DeviationReport,
) -> Value {
    let inst = &s.instance;
    let score = |x: &ObjectiveScore| json!({ "tier": x.tier, "value": rat(&x.value) });
    let method = match how {
        How::Template(t) => json!({ "kind": "template", "template": template_name(*t) }),
        How::Search {
            candidates,
            rounds,
            history,
            joint,
        } => json!({
            "kind": if *joint { "joint-search" } else { "search" },
            "candidates": candidates.map(|c| c.to_string()),
            "rounds": rounds.map(|r| r.0),
            "converged": rounds.map(|r| r.1),
            "history": history.iter().map(score).collect::<Vec<_>>(),
        }),
    };
    json!({
        "scenario": { "id": s.id, "name": s.name },
        "coalition": coalition.iter().map(|&a| inst.agent(a)).collect::<Vec<_>>(),
        "objective": objective.render(inst),
        "method": method,
        "baseline": if on_reports { "reported" } else { "truthful" },
        "reported": matrix_json(inst, reported),
        "honest": outcome_json(inst, &d.honest),
        "manipulated": outcome_json(inst, &d.manipulated),
        "payment_delta": rats(&d.payment_delta),
        "true_utility_delta": rats(&d.true_utility_delta),
        "envy_under_truth": d.envy_under_truth.iter().map(|&(i, j)| json!({
            "agent": inst.agent(i),
            "envies": inst.agent(j),
        })).collect::<Vec<_>>(),
        "honest_score": score(&d.honest_score),
        "manipulated_score": score(&d.manipulated_score),
        "objective_satisfied": d.objective_satisfied,
    })
}

fn deviation_csv(s: &Scenario, d: &DeviationReport) -> String {
    let inst = &s.instance;
    let rows: Vec<Vec<String>> = (0..inst.n())
        .map(|i| {
            let hr = d.honest.assignment.room_of(i);
            let mr = d.manipulated.assignment.room_of(i);
            let envies: Vec<&str> = d
                .envy_under_truth
                .iter()
                .filter(|(a, _)| *a == i)
                .map(|&(_, j)| inst.agent(j))
                .collect();
            vec![
                inst.agent(i).to_string(),
                inst.room(hr).to_string(),
                cents(d.honest.prices.price(hr)),
                inst.room(mr).to_string(),
                cents(d.manipulated.prices.price(mr)),
                cents(&d.payment_delta[i]),
                cents(&d.true_utility_delta[i]),
                envies.join(" "),
            ]
        })
        .collect();
    csv_string(
        &[
            "agent",
            "honest_room",
            "honest_payment",
            "manipulated_room",
            "manipulated_payment",
            "payment_delta",
            "true_utility_delta",
            "envies",
        ],
        &rows,
    )
}

pub fn manipulate(
    s: &Scenario,
    mech: &Mechanism,
    opts: &ManipulateOptions,
    format: Format,
) -> Result<Report> {
    let inst = &s.instance;
    let coalition = agent_list(inst, &opts.coalition)?;
    let objective = match &opts.objective {
        Some(text) => ManipulationObjective::parse(text, inst)?,
        None => match coalition.as_slice() {
            [a] => ManipulationObjective::MinimizeOwnPayment(*a),
            _ => ManipulationObjective::MinimizeCoalitionPayments(coalition.clone()),
        },
    };
    objective.check(inst.n())?;
    let (reported, how) = build_reports(s, mech, &coalition, &objective, opts)?;
    let d = if opts.on_reports {
        // Others' misreports stay in place: compare against the scenario as reported.
        let before = mech.solve(&s.reported_matrix, inst.total_rent())?;
        let after = mech.solve(&reported, inst.total_rent())?;
        compare_outcomes(s.truth(), before, after, &objective)
    } else {
        evaluate_deviation(mech, inst.total_rent(), s.truth(), &reported, &objective)?
    };
    let out = match format {
        Format::Text => deviation_text(
            s,
            opts.on_reports,
            &coalition,
            &objective,
            &how,
            &reported,
            &d,
        ),
        Format::Json => pretty(&deviation_json(
            s,
            opts.on_reports,
            &coalition,
            &objective,
            &how,
            &reported,
            &d,
        )),
        Format::Csv => deviation_csv(s, &d),
    };
    Ok(Report::ok(out))
}
