use std::process::ExitCode;

use clap::Parser;
use tca::stub::StubArgs;

/// Play a stub-tool scenario on stdin/stdout.
#[derive(Parser)]
#[command(name = "tca-stub", version)]
struct Cli {
    #[command(flatten)]
    stub: StubArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    ExitCode::from(tca::stub::main(&cli.stub) as u8)
}
