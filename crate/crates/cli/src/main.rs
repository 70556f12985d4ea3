use std::process::ExitCode;

fn main() -> ExitCode {
    convene_cli::main_with(std::env::args_os())
}
