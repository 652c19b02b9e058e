//! `hopdb`: build, query and check 2-hop distance indexes from the shell.

mod args;
mod build;
mod fail;
mod gen;
mod query;
mod stats;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use fail::Fail;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { fail::VALIDATION } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hopdb: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Fail> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Fail::Validation(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Build(a) => build::cmd_build(&a),
        Command::Query(a) => query::cmd_query(&a, cli.threads),
        Command::Gen(a) => gen::cmd_gen(&a),
        Command::Stats(a) => stats::cmd_stats(&a),
        Command::Verify(a) => verify::cmd_verify(&a),
    }
}
