use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(anytime_ppm_cli::run(std::env::args_os()))
}
