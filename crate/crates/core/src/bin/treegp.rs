use std::process::ExitCode;

fn main() -> ExitCode {
    treegp::cli::main_from_args(std::env::args_os())
}
