use std::process::ExitCode;

fn main() -> ExitCode {
    archopt::cli::main()
}
