use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(srcalign::cli::main_exit())
}
