use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use symbreak_cli::{run, Cli, Command, Format};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command_line = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    match run(&cli, &command_line) {
        Ok(report) => {
            let raw_doc = matches!(cli.command, Command::EmitAsp { out: None, .. });
            let format = if raw_doc { Format::Human } else { cli.format };
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(report.render(format).as_bytes());
            ExitCode::from(report.outcome.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
