mod args;
mod commands;
mod error;
mod output;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use log::error;
use serde_json::json;

use args::{Cli, Command};
use commands::Context;
use error::{usage, CliError};
use output::{document, pretty, Outcome};

fn run(cli: &Cli) -> Result<(Outcome, serde_json::Value), CliError> {
    let workers = match cli.global.workers {
        Some(0) => return Err(usage("--workers must be >= 1")),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new().num_threads(workers).build_global()?;
    let ctx = Context::new(&cli.global)?;
    let (outcome, inputs) = match &cli.command {
        Command::Kernel(a) => (commands::kernel(&ctx, a)?, json!(a)),
        Command::Distance(a) => (commands::distance(&ctx, a)?, json!(a)),
        Command::Potential(a) => (commands::potential(&ctx, a)?, json!(a)),
        Command::MinW(a) => (commands::min_w_cmd(&ctx, a)?, json!(a)),
        Command::Eta(a) => (commands::eta(&ctx, a)?, json!(a)),
        Command::Constants(a) => (commands::constants(&ctx, a)?, json!(a)),
        Command::Herbst(a) => (commands::herbst(&ctx, a)?, json!(a)),
        Command::Verify(a) => (commands::verify(&ctx, a)?, json!(a)),
        Command::Sample(a) => (commands::sample(&ctx, a)?, json!(a)),
        Command::Aniso(a) => (commands::aniso(&ctx, a)?, json!(a)),
    };
    if let Some(path) = &cli.global.csv {
        match &outcome.table {
            Some(t) => t.write(path)?,
            None => return Err(usage(format!("`{}` has no tabular output for --csv", command_name(&cli.command)))),
        }
    }
    Ok((outcome, inputs))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Kernel(_) => "kernel",
        Command::Distance(_) => "distance",
        Command::Potential(_) => "potential",
        Command::MinW(_) => "min-w",
        Command::Eta(_) => "eta",
        Command::Constants(_) => "constants",
        Command::Herbst(_) => "herbst",
        Command::Verify(_) => "verify",
        Command::Sample(_) => "sample",
        Command::Aniso(_) => "aniso",
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok((outcome, inputs)) => {
            let wall = cli.global.timing.then(|| start.elapsed().as_secs_f64());
            let globals = json!(cli.global);
            let doc = document(command_name(&cli.command), inputs, globals, &outcome, wall);
            let mut stdout = std::io::stdout().lock();
            let written = stdout
                .write_all(&pretty(&doc))
                .and_then(|_| stdout.write_all(b"\n"))
                .and_then(|_| stdout.flush());
            if let Err(e) = written {
                error!("could not write the result: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(outcome.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
