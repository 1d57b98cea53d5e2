use std::io::Write;
use std::process::ExitCode;

use ksphere_cli::{run_with, Settings};

fn main() -> ExitCode {
    let out = run_with(std::env::args_os(), Settings::from_env());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    ExitCode::from(out.code as u8)
}
