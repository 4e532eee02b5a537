mod args;
mod input;
mod report;

use args::{Cli, Command, Format};
use clap::Parser;
use std::io::Write;
use std::process::ExitCode;

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Invalid input or a mathematical precondition violation (exit 1).
    Domain {
        kind: &'static str,
        message: String,
        details: serde_json::Value,
    },
    /// Unreadable or unwritable files (exit 2).
    Io(String),
}

impl Failure {
    pub fn domain(kind: &'static str, message: impl ToString) -> Self {
        Failure::Domain {
            kind,
            message: message.to_string(),
            details: serde_json::Value::Null,
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Domain { .. } => 1,
            Failure::Io(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    let outcome = run(&cli);
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let (mut out, mut err) = (stdout.lock(), stderr.lock());
    match outcome {
        Ok(output) => {
            for w in &output.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            if writeln!(out, "{}", output.body).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(output.code)
        }
        Err(f) => {
            let code = f.code();
            let text = match (&f, format) {
                (
                    Failure::Domain {
                        kind,
                        message,
                        details,
                    },
                    Format::Json,
                ) => serde_json::to_string_pretty(
                    &serde_json::json!({ "error": kind, "message": message, "details": details }),
                )
                .unwrap_or_else(|_| message.clone()),
                (Failure::Io(message), Format::Json) => serde_json::to_string_pretty(
                    &serde_json::json!({ "error": "io", "message": message, "details": null }),
                )
                .unwrap_or_else(|_| message.clone()),
                (
                    Failure::Domain {
                        kind,
                        message,
                        details,
                    },
                    Format::Text,
                ) => {
                    let mut s = format!("error ({kind}): {message}");
                    if let Some(list) = details.get("diagnostics").and_then(|d| d.as_array()) {
                        for d in list {
                            if let Some(line) = d.get("text").and_then(|t| t.as_str()) {
                                s.push_str("\n  ");
                                s.push_str(line);
                            }
                        }
                    }
                    s
                }
                (Failure::Io(message), Format::Text) => format!("error (io): {message}"),
            };
            let _ = writeln!(err, "{text}");
            ExitCode::from(code)
        }
    }
}

pub struct Output {
    pub body: String,
    pub warnings: Vec<String>,
    pub code: u8,
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let tol = cli.tolerance()?;
    match &cli.command {
        Command::Diag(a) => report::diag(&input::load(&a.source, &tol)?, &tol, cli),
        Command::Dof(a) => report::dof(&input::load(&a.source, &tol)?, &tol, cli.format),
        Command::Invariants(a) => {
            report::invariants(&input::load(&a.source, &tol)?, &tol, cli.format)
        }
        Command::Verify(a) => report::verify(&input::load(&a.source, &tol)?, &tol, cli),
        Command::Quantize(a) => {
            report::quantize(&input::load(&a.source, &tol)?, &tol, a, cli.format)
        }
        Command::Model(a) => {
            report::model(&input::load_model(&a.preset, &a.params, &tol)?, cli.format)
        }
    }
}
