//! The scriptable stub tool: plays a scenario over stdin/stdout.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;

use clap::Args;
use tca_core::scenario::{Step, StubExit, StubMachine, StubScenario};

/// Exit status for usage, scenario and I/O errors.
pub const EXIT_USAGE: i32 = 1;

#[derive(Debug, Clone, Args)]
pub struct StubArgs {
    /// Scenario file to play.
    #[arg(long, value_name = "PATH")]
    pub scenario: PathBuf,
    /// Arguments available to the scenario as $ARG1, $ARG2, ...
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    pub args: Vec<String>,
}

fn emit(out: &mut impl Write, step: &Step) -> io::Result<()> {
    for line in &step.output {
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

fn report(scenario: &str, verdict: &StubExit) -> i32 {
    if let StubExit::Violation(why) = verdict {
        eprintln!("tca-stub: {scenario}: {why}");
    }
    verdict.code()
}

/// Plays the scenario over the given streams and returns the exit status.
pub fn play(args: &StubArgs, input: impl BufRead, mut output: impl Write) -> i32 {
    let name = args.scenario.display().to_string();
    let text = match fs::read_to_string(&args.scenario) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("tca-stub: cannot read {name}: {e}");
            return EXIT_USAGE;
        }
    };
    let machine = StubScenario::parse(&text)
        .and_then(|s| StubMachine::new(&s, &args.args));
    let mut machine = match machine {
        Ok(m) => m,
        Err(e) => {
            eprintln!("tca-stub: {name}: {e}");
            return EXIT_USAGE;
        }
    };
    run_machine(&name, &mut machine, input, &mut output)
}

fn run_machine(name: &str, machine: &mut StubMachine, mut input: impl BufRead, output: &mut impl Write) -> i32 {
    let step = machine.start();
    if let Err(e) = emit(output, &step) {
        eprintln!("tca-stub: {name}: write failed: {e}");
        return EXIT_USAGE;
    }
    if let Some(verdict) = step.exit {
        return report(name, &verdict);
    }
    let mut raw = Vec::new();
    loop {
        raw.clear();
        match input.read_until(b'\n', &mut raw) {
            Ok(0) => break,
            Ok(_) => {}
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => {
                eprintln!("tca-stub: {name}: read failed: {e}");
                return EXIT_USAGE;
            }
        }
        if raw.last() != Some(&b'\n') {
            eprintln!(
                "tca-stub: {name}: discarding unterminated input {:?}",
                String::from_utf8_lossy(&raw)
            );
            break;
        }
        raw.pop();
        let line = String::from_utf8_lossy(&raw);
        let step = machine.input(&line);
        if let Err(e) = emit(output, &step) {
            eprintln!("tca-stub: {name}: write failed: {e}");
            return EXIT_USAGE;
        }
        if let Some(verdict) = step.exit {
            return report(name, &verdict);
        }
    }
    report(name, &machine.end_of_input())
}

/// Entry point for standard streams.
pub fn main(args: &StubArgs) -> i32 {
    let stdin = io::stdin();
    let stdout = io::stdout();
    play(args, stdin.lock(), stdout.lock())
}
