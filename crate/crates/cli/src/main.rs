mod commands;
mod config;
mod error;
mod report;

use clap::Parser;

use config::Cli;
use error::CliError;

/// Cap the global rayon pool from `QEM_THREADS`.
fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("QEM_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("QEM_THREADS must be a positive integer, got `{text}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run() -> Result<i32, CliError> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return Ok(if e.use_stderr() { 1 } else { 0 });
        }
    };
    configure_threads()?;
    let (global, command) = config::resolve(cli)?;
    let (doc, summary, status) = commands::execute(&global, &command)?;
    let text = report::render(&doc);
    let summary = summary.join("\n");
    match &global.out {
        Some(path) => {
            report::write_file(path, &text)?;
            println!("{summary}");
        }
        None => {
            print!("{text}");
            eprintln!("{summary}");
        }
    }
    Ok(status.exit_code())
}

fn main() {
    let code = run().unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    std::process::exit(code);
}
