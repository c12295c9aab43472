use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let outcome = ccx_core::cli::run_command(&argv);
    print!("{}", outcome.report);
    ExitCode::from(outcome.exit_code as u8)
}
