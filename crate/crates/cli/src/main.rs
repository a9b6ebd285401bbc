//! `iw`: operator tooling for information warehouse archives.
//!
//! Exit status is 0 on success, 1 when a command reports findings or the
//! engine rejects a request, and 2 on usage errors. Messages go to stderr;
//! `--json` puts machine-readable output (including errors) on stdout.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let json = cli.global.json;
    match commands::run(cli) {
        Ok(status) => ExitCode::from(status),
        Err(f) => {
            eprintln!("iw: {}", f.message);
            if json {
                println!("{}", serde_json::json!({"error": {"code": f.code, "message": f.message}}));
            }
            ExitCode::from(f.exit)
        }
    }
}
