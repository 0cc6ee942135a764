use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(kge_core::cli::run(std::env::args()) as u8)
}
