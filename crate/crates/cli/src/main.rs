use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(decarb_cli::run(std::env::args_os()))
}
