use std::io::{self, Write};
use std::panic;
use std::process::ExitCode;

use clap::Parser;
use kset_core::cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = panic::catch_unwind(|| {
        let stdout = io::stdout();
        let mut out = io::BufWriter::new(stdout.lock());
        let r = run(&cli, &mut out);
        let flushed = out.flush();
        r.and(flushed.map_err(Into::into))
    });
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("kset: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
        // panics are broken internal invariants
        Err(_) => ExitCode::from(3),
    }
}
