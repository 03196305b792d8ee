use std::process::ExitCode;

fn main() -> ExitCode {
    awe::cli::main_with_args(std::env::args_os())
}
