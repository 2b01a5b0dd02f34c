//! Thin executable wrapper: parse arguments, run, print, exit.
//!
//! All behaviour lives in [`oddform::cli::run`], which is what the test
//! suite exercises; this binary only forwards the captured output to
//! the real process streams.

use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = oddform::cli::run(std::env::args_os());
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    ExitCode::from(outcome.code.clamp(0, 255) as u8)
}
