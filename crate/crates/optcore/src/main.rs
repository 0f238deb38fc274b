use std::process::ExitCode;

fn main() -> ExitCode {
    optcore::cli::main_entry()
}
