use std::process::ExitCode;

fn main() -> ExitCode {
    fieldseg::cli::main_with_args(std::env::args_os())
}
