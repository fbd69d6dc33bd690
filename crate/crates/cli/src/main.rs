use std::process::ExitCode;

fn main() -> ExitCode {
    let mut stdout = std::io::stdout().lock();
    ExitCode::from(lcouple::run_cli(std::env::args_os(), &mut stdout))
}
