mod args;
mod overlay;
mod run;

use std::process::ExitCode;

use clap::Parser;
use fracwave::parallel::{self, Execution};
use fracwave::Error;

use args::{Cli, Command};

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) | Error::NotImplemented(_) | Error::Parse { .. } => 2,
        Error::NotConverged { .. } | Error::SolverStalled { .. } | Error::NonpositiveMultiplier(_) => 3,
        Error::BlowUpDetected(_) => 4,
        Error::Io(_) => 1,
    }
}

fn main() -> ExitCode {
    let argv = match overlay::apply(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(2);
    }
    parallel::configure_threads(jobs);
    let execution = if jobs > 1 && Execution::Parallel.is_parallel() {
        Execution::Parallel
    } else {
        Execution::Sequential
    };

    let result = match &cli.command {
        Command::Groundstate(a) => run::groundstate(a, jobs),
        Command::Evolve(a) => run::evolve(a, jobs),
        Command::Reproduce(a) => run::reproduce(a, jobs, execution),
        Command::Diag(a) => run::diag(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                Error::BlowUpDetected(b) => {
                    eprintln!("blow-up detected at t={} (max |psi| = {:e})", b.t, b.linf)
                }
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
