use clap::{Parser, Subcommand};
use cwvsmix_cli::{benchmark, diagnose, fit, simulate, BenchmarkArgs, DiagnoseArgs, FitArgs, Result, SimulateArgs};
use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cwvsmix", version, about = "Critical window variable selection for exposure mixtures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the model to a dataset CSV.
    Fit(FitArgs),
    /// Draw one dataset from a scenario file.
    Simulate(SimulateArgs),
    /// Run a simulation study over replicates and methods.
    Benchmark(BenchmarkArgs),
    /// Summaries and Geweke diagnostics for stored draws.
    Diagnose(DiagnoseArgs),
}

fn run(cli: Cli) -> Result<String> {
    let mut text = String::new();
    match cli.command {
        Command::Fit(args) => {
            let report = fit(&args)?;
            let _ = writeln!(text, "period\tpip\tor_mean\tor_lower\tor_upper\tverdict");
            for d in &report.decisions {
                let _ = writeln!(text, 
                    "{}\t{:.3}\t{}\t{}\t{}\t{}",
                    d.period,
                    d.pip,
                    fmt_short(d.or_mean),
                    fmt_short(d.or_lower),
                    fmt_short(d.or_upper),
                    d.verdict.as_str()
                );
            }
            let _ = writeln!(text, "results written to {}", report.out.display());
        }
        Command::Simulate(args) => {
            simulate(&args)?;
            let _ = writeln!(text, "dataset written to {}", args.out.display());
        }
        Command::Benchmark(args) => {
            let result = benchmark(&args)?;
            let _ = writeln!(text, "method\tmetric\tn\tmean\tse");
            for s in &result.summaries {
                for m in &s.metrics {
                    let _ = writeln!(text, "{}\t{}\t{}\t{}\t{}", s.method, m.name, m.n, fmt_short(m.mean), fmt_short(m.se));
                }
                if s.failed > 0 {
                    let _ = writeln!(text, "{}: {} replicate(s) failed", s.method, s.failed);
                }
            }
            let _ = writeln!(text, "results written to {}", args.out.display());
        }
        Command::Diagnose(args) => {
            let _ = writeln!(text, "parameter\tmean\tsd\tess\tgeweke_z");
            for s in diagnose(&args)? {
                let _ = writeln!(text, 
                    "{}\t{:.4}\t{:.4}\t{}\t{}",
                    s.name,
                    s.mean,
                    s.sd,
                    fmt_short(s.ess),
                    fmt_short(s.geweke_z)
                );
            }
        }
    }
    Ok(text)
}

fn fmt_short(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |v| format!("{v:.4}"))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
