use std::process::ExitCode;

fn main() -> ExitCode {
    simulbid_cli::cli::main_from(std::env::args_os())
}
