use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(analogion::cli::run(std::env::args()) as u8)
}
