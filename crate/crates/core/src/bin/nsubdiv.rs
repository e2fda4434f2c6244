use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(nsubdiv::cli::main())
}
