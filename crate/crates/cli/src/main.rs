//! `rentsplit`: solve rent-division instances, check scenarios against their
//! expected outcomes, reproduce the reference table and run misreporting
//! experiments.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 invalid input,
//! 3 search budget exceeded.

mod commands;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rentsplit::scenario::builtin_scenarios;
use rentsplit::{Error, Mechanism, Rational};

use commands::{ManipulateOptions, Report, Template};
use render::Format;

#[derive(Parser)]
#[command(
    name = "rentsplit",
    version,
    about = "Envy-free rent division and manipulation lab"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Worker threads for search (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Require every price to be nonnegative.
    #[arg(long, global = true)]
    nonnegative_prices: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Scenario file (JSON).
    file: Option<PathBuf>,
    /// Use a builtin scenario instead of a file.
    #[arg(long, value_name = "ID")]
    builtin: Option<String>,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Solve the scenario's reported valuations.
    Solve(Source),
    /// Compare computed outcomes with the scenario's expected outcome.
    Verify {
        #[command(flatten)]
        source: Source,
        /// Verify every builtin scenario.
        #[arg(long, conflicts_with_all = ["file", "builtin"])]
        all_builtin: bool,
    },
    /// Build misreports by template or search and report their effect.
    Manipulate(ManipulateArgs),
    /// Reproduce the five-scenario reference table.
    Table,
    /// Write builtin scenarios as JSON scenario files.
    Export {
        /// Builtin id; all builtins when omitted.
        #[arg(long, value_name = "ID")]
        builtin: Option<String>,
        /// Directory to write `<id>.json` files into; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ManipulateArgs {
    #[command(flatten)]
    source: Source,
    /// Misreporting agents, e.g. `A,B,C`.
    #[arg(long)]
    coalition: String,
    /// `exclude:D,E@R1,R2,R3`, `min-pay:D,E`, `subsidize:E@R1<=7`, `max-util:A`.
    /// Defaults to minimizing the coalition's payments.
    #[arg(long)]
    objective: Option<String>,
    #[arg(long, value_enum)]
    template: Option<Template>,
    /// Exhaustive grid search (coordinate ascent for coalitions).
    #[arg(long)]
    search: bool,
    /// Search all coalition rows jointly.
    #[arg(long)]
    joint: bool,
    /// Apply the template to the scenario's reported matrix instead of the true one.
    #[arg(long)]
    on_reports: bool,
    /// Search grid step.
    #[arg(long, default_value = "1")]
    step: Rational,
    /// Largest candidate count a search may enumerate.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u128,
    #[arg(long, default_value_t = 10)]
    max_rounds: usize,
    /// exclusionary: rooms claimed by the coalition, in member order (default R1..Rk).
    #[arg(long)]
    claimed_rooms: Option<String>,
    /// exclusionary: rooms left to the others (default: every unclaimed room).
    #[arg(long)]
    victim_rooms: Option<String>,
    /// exclusionary: value reported for the claimed room.
    #[arg(long, default_value = "15")]
    claim: Rational,
    /// exclusionary: value reported for each victim room.
    #[arg(long, default_value = "9")]
    filler: Rational,
    /// flatten: room receiving the leftover per member (default: last k rooms).
    #[arg(long)]
    own_rooms: Option<String>,
    /// defensive: contested room pairs, e.g. `D:R1,R2;E:R2,R3`
    /// (default: each member's two highest true values).
    #[arg(long)]
    contested: Option<String>,
    /// defensive: value reported for contested rooms.
    #[arg(long, default_value = "12")]
    inflate: Rational,
    /// defensive: value reported for rooms an ally contests.
    #[arg(long, default_value = "1")]
    ally_value: Rational,
}

fn run(cli: Cli) -> Result<Report, Error> {
    let mech = Mechanism::new().nonnegative_prices(cli.nonnegative_prices);
    let format = cli.format;
    match cli.command {
        Command::Solve(src) => {
            let s = commands::load(src.file.as_deref(), src.builtin.as_deref())?;
            commands::solve(&s, &mech, format)
        }
        Command::Verify {
            source,
            all_builtin,
        } => {
            let scenarios = if all_builtin {
                builtin_scenarios()
            } else {
                vec![commands::load(
                    source.file.as_deref(),
                    source.builtin.as_deref(),
                )?]
            };
            commands::verify(&scenarios, &mech, format)
        }
        Command::Manipulate(a) => {
            let s = commands::load(a.source.file.as_deref(), a.source.builtin.as_deref())?;
            let opts = ManipulateOptions {
                coalition: a.coalition,
                objective: a.objective,
                template: a.template,
                search: a.search,
                joint: a.joint,
                on_reports: a.on_reports,
                step: a.step,
                budget: a.budget,
                max_rounds: a.max_rounds,
                claimed_rooms: a.claimed_rooms,
                victim_rooms: a.victim_rooms,
                claim: a.claim,
                filler: a.filler,
                own_rooms: a.own_rooms,
                contested: a.contested,
                inflate: a.inflate,
                ally_value: a.ally_value,
            };
            commands::manipulate(&s, &mech, &opts, format)
        }
        Command::Table => commands::table(&mech, format),
        Command::Export { builtin, out } => {
            let scenarios = match builtin {
                Some(id) => vec![commands::load(None, Some(&id))?],
                None => builtin_scenarios(),
            };
            commands::export(&scenarios, out.as_deref())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::SearchSpaceTooLarge { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match run(cli) {
        Ok(report) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(report.stdout.as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(u8::from(report.mismatch))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
