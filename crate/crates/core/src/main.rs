use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(thermolang::cli::main() as u8)
}
