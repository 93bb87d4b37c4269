use std::process::ExitCode;

fn main() -> ExitCode {
    susyq::cli::main_with_args(std::env::args_os())
}
