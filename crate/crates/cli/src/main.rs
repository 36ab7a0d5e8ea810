use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use markov_spaces::report::SuiteConfig;
use serde_json::json;
use workbench::doc::{render, run_source, Instance};
use workbench::suites::axioms_report;

#[derive(Parser)]
#[command(name = "workbench", about = "Probability spaces over Markov categories, at desk scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the queries of a workbench document and print a JSON report.
    Run {
        doc: PathBuf,
        /// Comparison tolerance for the gauss instance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run the randomized axiom suites of one instance.
    Axioms {
        /// finstoch, gauss, setmulti or strongname.
        instance: String,
        #[arg(long, default_value_t = 300)]
        trials: usize,
        #[arg(long, default_value_t = 4)]
        max_size: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn invalid(code: &str, message: String) -> ExitCode {
    print!("{}", render(&json!({ "ok": false, "error": { "code": code, "pointer": "", "message": message } })));
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { doc, tol } => {
            let source = match std::fs::read_to_string(&doc) {
                Ok(s) => s,
                Err(e) => return invalid("unreadable_document", format!("{}: {e}", doc.display())),
            };
            let outcome = run_source(&source, tol);
            print!("{}", render(&outcome.report));
            ExitCode::from(outcome.exit_code as u8)
        }
        Command::Axioms { instance, trials, max_size, seed, tol } => {
            let Some(instance) = Instance::parse(&instance) else {
                return invalid("unknown_instance", format!("unknown instance {instance:?}"));
            };
            let config = SuiteConfig { trials, max_size, seed };
            let (report, ok) = axioms_report(instance, &config, tol);
            print!("{}", render(&report));
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
