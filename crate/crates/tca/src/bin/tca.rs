use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(tca::cli::main_with(std::env::args_os()) as u8)
}
