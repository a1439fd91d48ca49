//! Command-line front end: exact tables, closed-form constants, exhaustive
//! enumeration, seeded simulation, and the oracle verification suite, with
//! stable CSV/JSON output for scripting.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage or domain error.
//! Only the declared output format is written to standard output; everything
//! else goes to standard error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use rankdiff::closedform::{competitive_ratio, offline_expected_profit, op_expected_profit};
use rankdiff::montecarlo::{compare, simulate, ProfitSummary};
use rankdiff::oracle::{enumerate_expected_profit, run_verification};
use rankdiff::rational::{decimal_string, format_rational, Rational};
use rankdiff::strategies::StrategyKind;
use rankdiff::thresholds::{estimate_c, ThresholdTables};

#[derive(Parser)]
#[command(
    name = "rankdiff",
    version,
    about = "Optimal on-line rank-difference strategies: exact tables, oracles, and simulation"
)]
struct Cli {
    /// Cap the worker-thread count for simulation and enumeration.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exact threshold tables for one horizon (header i,H,R,L,P).
    Tables {
        /// Stream length.
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Render rationals as 6-place decimals instead of p/q.
        #[arg(long)]
        decimal: bool,
        /// Write to a file instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Estimate a strategy's expected profit by seeded Monte Carlo.
    Simulate {
        /// One of: op, single-optimal, half-split, offline.
        #[arg(long)]
        strategy: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long, env = "RANKDIFF_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate several strategies on common random numbers.
    Compare {
        /// Comma-separated strategy names.
        #[arg(long, value_delimiter = ',')]
        strategies: Vec<String>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long, env = "RANKDIFF_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exact expected profit by exhaustive enumeration (n <= 10).
    Enumerate {
        #[arg(long)]
        strategy: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Render the expectation as a 6-place decimal instead of p/q.
        #[arg(long)]
        decimal: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exact constants for one horizon: on-line and off-line expected
    /// profits, their ratio, and the high-selection gap estimate.
    Constants {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the oracle verification suite; exit 1 on any mismatch.
    Verify {
        /// Largest n to cross-check exhaustively.
        #[arg(long, default_value_t = 8)]
        max_n: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Ignore "already initialized": only the first cap takes effect.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            eprintln!("run `rankdiff --help` for usage");
            ExitCode::from(2)
        }
    }
}

#[derive(Debug)]
enum CliError {
    Domain(rankdiff::Error),
    Io(io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<rankdiff::Error> for CliError {
    fn from(e: rankdiff::Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

fn sink(output: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn render(r: &Rational, decimal: bool) -> String {
    if decimal {
        decimal_string(r, 6)
    } else {
        format_rational(r)
    }
}

fn parse_strategy(name: &str) -> Result<StrategyKind, CliError> {
    Ok(StrategyKind::parse(name)?)
}

fn run(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Tables {
            n,
            format,
            decimal,
            output,
        } => {
            let tables = ThresholdTables::build(n)?;
            let mut out = sink(&output)?;
            match format {
                Format::Csv => {
                    writeln!(out, "i,H,R,L,P")?;
                    for i in 1..=n {
                        writeln!(
                            out,
                            "{i},{},{},{},{}",
                            tables.h(i),
                            render(tables.r(i), decimal),
                            tables.l(i),
                            render(tables.p(i), decimal)
                        )?;
                    }
                }
                Format::Json => {
                    let rows: Vec<_> = (1..=n)
                        .map(|i| {
                            json!({
                                "i": i,
                                "H": tables.h(i),
                                "R": render(tables.r(i), decimal),
                                "L": tables.l(i),
                                "P": render(tables.p(i), decimal),
                            })
                        })
                        .collect();
                    writeln!(out, "{}", json!({ "n": n, "rows": rows }))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Simulate {
            strategy,
            n,
            trials,
            seed,
            format,
            output,
        } => {
            let kind = parse_strategy(&strategy)?;
            let summary = simulate(kind, n, trials, seed)?;
            write_summaries(&[summary], format, &output)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Compare {
            strategies,
            n,
            trials,
            seed,
            format,
            output,
        } => {
            if strategies.is_empty() {
                return Err(rankdiff::Error::InvalidInput(
                    "--strategies needs at least one name".into(),
                )
                .into());
            }
            let kinds: Vec<StrategyKind> = strategies
                .iter()
                .map(|s| parse_strategy(s))
                .collect::<Result<_, _>>()?;
            let summaries = compare(&kinds, n, trials, seed)?;
            write_summaries(&summaries, format, &output)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Enumerate {
            strategy,
            n,
            format,
            decimal,
            output,
        } => {
            let kind = parse_strategy(&strategy)?;
            let report = enumerate_expected_profit(kind, n)?;
            let mut out = sink(&output)?;
            match format {
                Format::Csv => {
                    writeln!(out, "{}", render(&report.expectation, decimal))?;
                }
                Format::Json => {
                    writeln!(
                        out,
                        "{}",
                        json!({
                            "strategy": report.strategy,
                            "n": report.n,
                            "total_profit": report.total_profit.to_string(),
                            "permutations": report.permutations.to_string(),
                            "expectation": render(&report.expectation, decimal),
                        })
                    )?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Constants { n, format, output } => {
            let op = op_expected_profit(n);
            let off = offline_expected_profit(n);
            let ratio = competitive_ratio(n)?;
            let c = estimate_c(n)?;
            let mut out = sink(&output)?;
            match format {
                Format::Csv => {
                    writeln!(
                        out,
                        "n,op_profit,offline_profit,ratio,c_estimate,\
                         op_profit_decimal,offline_profit_decimal,ratio_decimal,c_estimate_decimal"
                    )?;
                    writeln!(
                        out,
                        "{n},{},{},{},{},{},{},{},{}",
                        format_rational(&op),
                        format_rational(&off),
                        format_rational(&ratio),
                        format_rational(&c),
                        decimal_string(&op, 6),
                        decimal_string(&off, 6),
                        decimal_string(&ratio, 6),
                        decimal_string(&c, 6),
                    )?;
                }
                Format::Json => {
                    writeln!(
                        out,
                        "{}",
                        json!({
                            "n": n,
                            "op_profit": format_rational(&op),
                            "offline_profit": format_rational(&off),
                            "ratio": format_rational(&ratio),
                            "c_estimate": format_rational(&c),
                            "op_profit_decimal": decimal_string(&op, 6),
                            "offline_profit_decimal": decimal_string(&off, 6),
                            "ratio_decimal": decimal_string(&ratio, 6),
                            "c_estimate_decimal": decimal_string(&c, 6),
                        })
                    )?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Verify {
            max_n,
            format,
            output,
        } => {
            let report = run_verification(max_n)?;
            let mut out = sink(&output)?;
            match format {
                Format::Csv => {
                    writeln!(out, "passed,name,detail")?;
                    for check in &report.checks {
                        writeln!(
                            out,
                            "{},{},{}",
                            if check.passed { "ok" } else { "FAIL" },
                            csv_quote(&check.name),
                            csv_quote(&check.detail)
                        )?;
                    }
                }
                Format::Json => {
                    writeln!(out, "{}", serde_json::to_string(&report).expect("serializable"))?;
                }
            }
            drop(out);
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            if failed == 0 {
                eprintln!("verification passed ({} checks)", report.checks.len());
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "verification FAILED: {failed} of {} checks mismatched",
                    report.checks.len()
                );
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn write_summaries(
    summaries: &[ProfitSummary],
    format: Format,
    output: &Option<PathBuf>,
) -> Result<(), CliError> {
    let mut out = sink(output)?;
    match format {
        Format::Csv => {
            writeln!(out, "strategy,n,trials,seed,mean,variance,ci95")?;
            for s in summaries {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    s.strategy, s.n, s.trials, s.seed, s.mean, s.variance, s.ci95
                )?;
            }
        }
        Format::Json => {
            writeln!(out, "{}", serde_json::to_string(summaries).expect("serializable"))?;
        }
    }
    Ok(())
}

fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}
