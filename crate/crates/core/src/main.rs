use std::process::ExitCode;

fn main() -> ExitCode {
    tempogauge::cli::run(std::env::args_os())
}
