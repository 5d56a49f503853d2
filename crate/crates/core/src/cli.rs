//! Command-line surface. Parsing lives here so that integration tests can
//! drive commands in-process; the `kset` binary is a thin wrapper.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{invalid, Error, Result};
use crate::finite::{exceptions, finite_table};
use crate::limit::{
    evaluate, fix_probability_from_survival, ratio_from_survival, survival_with_stats,
};
use crate::mc::{sample_finite_fix, sample_limit_survival};
use crate::table::enumerate_rows;

pub const MAX_DIGITS: u32 = 50;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "kset",
    version,
    about = "Probabilities that a random permutation fixes a k-set"
)]
pub struct Cli {
    /// Worker threads; 1 runs everything serially.
    #[arg(long, global = true, env = "KSET_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// i(∞,k) and p(∞,k) for one k, with table statistics.
    Limit {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 8)]
        digits: u32,
        /// Write the table rows, one per line, to this file.
        #[arg(long)]
        emit_rows: Option<PathBuf>,
    },
    /// CSV `k,i_inf,rows` for k = 1..=k_max.
    LimitTable {
        #[arg(long)]
        k_max: u32,
        #[arg(long, default_value_t = 8)]
        digits: u32,
        #[command(flatten)]
        out: Output,
    },
    /// CSV `n,k,value` of i(n,k) (or p(n,k)) for 2 ≤ n ≤ n_max, k ≤ n/2.
    FiniteTable {
        #[arg(long)]
        n_max: u32,
        #[arg(long)]
        k_max: Option<u32>,
        #[arg(long, default_value_t = 5)]
        digits: u32,
        #[arg(long, value_enum, default_value_t = Which::I)]
        which: Which,
        /// Print an aligned n × k matrix instead of CSV.
        #[arg(long)]
        wide: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Pairs (n,k), 2(k+1) ≤ n ≤ n_max, with i(n,k) < i(n,k+1).
    Exceptions {
        #[arg(long)]
        n_max: u32,
    },
    /// CSV `k,ratio` of i(∞,k)·k^δ·(log k)^{3/2} for 2 ≤ k ≤ k_max.
    Ratio {
        #[arg(long)]
        k_max: u32,
        #[arg(long, default_value_t = 8)]
        digits: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Monte-Carlo estimate of p(∞,k), or of i(n,k) when --n is given.
    Mc {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    /// i(n,k)
    I,
    /// p(n,k) = 1 − i(n,k)
    P,
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) => 2,
        Error::Invariant(_) => 3,
        Error::Io(_) => 1,
    }
}

fn check_digits(digits: u32) -> Result<()> {
    if !(1..=MAX_DIGITS).contains(&digits) {
        return Err(invalid(format!(
            "--digits must be in 1..={MAX_DIGITS}, got {digits}"
        )));
    }
    Ok(())
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    Ok(())
}

/// Runs `cli`, writing its report to `stdout` unless an output file is named.
/// Standard output is buffered and written once the command finishes.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let threads = cli.threads.unwrap_or(0);
    let parallel = threads != 1;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Invariant(e.to_string()))?;
    let mut buf = Vec::new();
    let r = pool.install(|| dispatch(&cli.command, parallel, &mut buf));
    stdout.write_all(&buf)?;
    r
}

fn with_output(
    out: &Output,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match &out.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

fn dispatch(cmd: &Command, parallel: bool, stdout: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Limit {
            k,
            digits,
            emit_rows,
        } => {
            check_k(*k)?;
            check_digits(*digits)?;
            cmd_limit(*k, *digits, emit_rows.as_ref(), parallel, stdout)
        }
        Command::LimitTable { k_max, digits, out } => {
            check_k(*k_max)?;
            check_digits(*digits)?;
            with_output(out, stdout, |w| {
                cmd_limit_table(*k_max, *digits, parallel, w)
            })
        }
        Command::FiniteTable {
            n_max,
            k_max,
            digits,
            which,
            wide,
            out,
        } => {
            if *n_max < 2 {
                return Err(invalid("--n-max must be at least 2"));
            }
            check_digits(*digits)?;
            let k_max = k_max.unwrap_or(n_max / 2);
            check_k(k_max)?;
            with_output(out, stdout, |w| {
                cmd_finite_table(*n_max, k_max, *digits, *which, *wide, parallel, w)
            })
        }
        Command::Exceptions { n_max } => {
            if *n_max < 4 {
                return Err(invalid("--n-max must be at least 4"));
            }
            cmd_exceptions(*n_max, parallel, stdout)
        }
        Command::Ratio { k_max, digits, out } => {
            if *k_max < 2 {
                return Err(invalid("--k-max must be at least 2"));
            }
            check_digits(*digits)?;
            with_output(out, stdout, |w| cmd_ratio(*k_max, *digits, parallel, w))
        }
        Command::Mc {
            k,
            n,
            samples,
            seed,
        } => {
            check_k(*k)?;
            if *samples == 0 {
                return Err(invalid("--samples must be at least 1"));
            }
            cmd_mc(*k, *n, *samples, *seed, stdout)
        }
    }
}

pub fn cmd_limit(
    k: u32,
    digits: u32,
    emit_rows: Option<&PathBuf>,
    parallel: bool,
    w: &mut dyn Write,
) -> Result<()> {
    let (poly, stats) = survival_with_stats(k, parallel)?;
    if let Some(path) = emit_rows {
        let mut f = BufWriter::new(File::create(path)?);
        let mut err = None;
        enumerate_rows(k, |row| {
            if err.is_none() {
                if let Err(e) = writeln!(f, "{}", row.to_csv()) {
                    err = Some(e);
                }
            }
        })?;
        if let Some(e) = err {
            return Err(e.into());
        }
        f.flush()?;
    }
    writeln!(w, "k: {k}")?;
    writeln!(w, "i_inf: {}", fix_probability_from_survival(&poly, digits))?;
    writeln!(w, "p_inf: {}", evaluate(&poly, digits))?;
    writeln!(w, "rows: {}", stats.rows_emitted)?;
    writeln!(w, "partials_considered: {}", stats.partials_considered)?;
    writeln!(w, "pruned_universal: {}", stats.pruned_universal)?;
    writeln!(w, "pruned_divisibility: {}", stats.pruned_divisibility)?;
    writeln!(w, "full_tests: {}", stats.full_tests)?;
    Ok(())
}

pub fn cmd_limit_table(k_max: u32, digits: u32, parallel: bool, w: &mut dyn Write) -> Result<()> {
    writeln!(w, "k,i_inf,rows")?;
    for k in 1..=k_max {
        let (poly, stats) = survival_with_stats(k, parallel)?;
        let i = fix_probability_from_survival(&poly, digits);
        writeln!(w, "{k},{i},{}", stats.rows_emitted)?;
    }
    Ok(())
}

pub fn cmd_finite_table(
    n_max: u32,
    k_max: u32,
    digits: u32,
    which: Which,
    wide: bool,
    parallel: bool,
    w: &mut dyn Write,
) -> Result<()> {
    let table = finite_table(n_max, k_max, parallel)?;
    let cells = |row: &crate::finite::FiniteRow| match which {
        Which::I => row.fix_decimals(digits),
        Which::P => row.survival_decimals(digits),
    };
    if wide {
        let cols = table.iter().map(|r| r.values.len()).max().unwrap_or(0);
        let width = digits as usize + 2;
        write!(w, "{:>4}", "n\\k")?;
        for k in 1..=cols {
            write!(w, " {k:>width$}")?;
        }
        writeln!(w)?;
        for row in &table {
            write!(w, "{:>4}", row.n)?;
            for d in cells(row) {
                write!(w, " {:>width$}", d.as_str())?;
            }
            writeln!(w)?;
        }
    } else {
        writeln!(w, "n,k,value")?;
        for row in &table {
            for (i, d) in cells(row).iter().enumerate() {
                writeln!(w, "{},{},{}", row.n, i + 1, d)?;
            }
        }
    }
    Ok(())
}

pub fn cmd_exceptions(n_max: u32, parallel: bool, w: &mut dyn Write) -> Result<()> {
    writeln!(w, "n,k")?;
    for (n, k) in exceptions(n_max, parallel)? {
        writeln!(w, "{n},{k}")?;
    }
    Ok(())
}

pub fn cmd_ratio(k_max: u32, digits: u32, parallel: bool, w: &mut dyn Write) -> Result<()> {
    writeln!(w, "k,ratio")?;
    for k in 2..=k_max {
        let (poly, _) = survival_with_stats(k, parallel)?;
        writeln!(w, "{k},{}", ratio_from_survival(k, &poly, digits)?)?;
    }
    Ok(())
}

pub fn cmd_mc(k: u32, n: Option<u32>, samples: u64, seed: u64, w: &mut dyn Write) -> Result<()> {
    let (what, est) = match n {
        Some(n) => (
            format!("i({n},{k})"),
            sample_finite_fix(n, k, samples, seed)?,
        ),
        None => (
            format!("p(inf,{k})"),
            sample_limit_survival(k, samples, seed)?,
        ),
    };
    writeln!(w, "quantity: {what}")?;
    writeln!(w, "samples: {samples}")?;
    writeln!(w, "seed: {seed}")?;
    writeln!(w, "hits: {}", est.hits)?;
    writeln!(w, "estimate: {:.6}", est.estimate)?;
    writeln!(w, "std_error: {:.6}", est.std_error)?;
    Ok(())
}
