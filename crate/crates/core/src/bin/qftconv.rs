use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qftconv::cli::{self, Cli};

fn main() -> ExitCode {
    let args: Vec<_> = std::env::args_os().collect();
    let out = cli::run(args.iter().cloned());
    // --out is resolved here so the library stays free of file IO.
    let target = Cli::try_parse_from(&args).ok().and_then(|c| c.global.out);
    match target {
        Some(path) if !out.stdout.is_empty() => {
            if let Err(e) = std::fs::write(&path, &out.stdout) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        _ => {
            let _ = std::io::stdout().write_all(out.stdout.as_bytes());
        }
    }
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
