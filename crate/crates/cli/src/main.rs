use std::process::ExitCode;

fn main() -> ExitCode {
    pointsource::main_with(std::env::args_os())
}
