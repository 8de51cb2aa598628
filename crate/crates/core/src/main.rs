use std::process::ExitCode;

fn main() -> ExitCode {
    trussforge::cli::run_from(std::env::args_os())
}
