use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use sparse_pce::harness::{
    problem_listing, read_records, summarize, write_coefficients, write_records, write_summary,
    Experiment, ExperimentConfig, Format, SummaryRow,
};
use sparse_pce::hermite::basis_size;

#[derive(Parser)]
#[command(
    name = "sparse-pce",
    version,
    about = "Sparse Hermite chaos experiments with iterative rotations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run every replicate, sample count and method of a config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for records and summary.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        /// Override the replicate count.
        #[arg(long)]
        replicates: Option<usize>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Mean and standard deviation of the error per (method, M).
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        /// Also write the table to this file (format from the extension).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Names and defaults of the benchmark problems.
    ListProblems,
    /// Exact against recovered coefficients for one replicate.
    CoeffCompare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        #[arg(long, default_value_t = 0)]
        replicate: usize,
        /// Sample count; the config's first by default.
        #[arg(long = "samples")]
        m: Option<usize>,
    },
}

fn print_summary(rows: &[SummaryRow]) {
    println!(
        "{:<28} {:>7} {:>8} {:>12} {:>12} {:>5} {:>5}",
        "method", "M", "M/N", "mean", "std", "reps", "fail"
    );
    let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4e}"));
    for r in rows {
        println!(
            "{:<28} {:>7} {:>8.4} {:>12} {:>12} {:>5} {:>5}",
            r.method.to_string(),
            r.m,
            r.ratio,
            show(r.mean_error),
            show(r.std_error),
            r.replicates,
            r.failures
        );
    }
}

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            format,
            replicates,
            seed,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(r) = replicates {
                cfg.replicates = r;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let format = Format::from(format);
            prepare_out(&out)?;
            let start = Instant::now();
            let exp = Experiment::new(cfg)?;
            eprintln!(
                "{}: N = {}, M = {:?}, {} replicates",
                exp.config().problem,
                exp.basis().len(),
                exp.sample_counts(),
                exp.config().replicates
            );
            let records = exp.run();
            let failures = records.iter().filter(|r| !r.status.is_ok()).count();
            let path = out.join(format!("records.{}", format.extension()));
            write_records(&path, &records, format)?;
            let rows = summarize(&records)?;
            write_summary(
                &out.join(format!("summary.{}", format.extension())),
                &rows,
                format,
            )?;
            print_summary(&rows);
            eprintln!(
                "{} records ({failures} failed) in {:.1} s -> {}",
                records.len(),
                start.elapsed().as_secs_f64(),
                path.display()
            );
        }
        Command::Summarize { input, out } => {
            let records = read_records(&input)?;
            let rows = summarize(&records)?;
            print_summary(&rows);
            if let Some(path) = out {
                write_summary(&path, &rows, Format::from_path(&path))?;
            }
        }
        Command::ListProblems => {
            println!(
                "{:<18} {:>4} {:>3} {:>6} {:>6}  description",
                "name", "d", "P", "N", "level"
            );
            for (kind, d, p, level, about) in problem_listing() {
                let n = basis_size(d, p).map_or("-".into(), |n| n.to_string());
                println!(
                    "{:<18} {d:>4} {p:>3} {n:>6} {level:>6}  {about}",
                    kind.name()
                );
            }
        }
        Command::CoeffCompare {
            config,
            out,
            format,
            replicate,
            m,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let exp = Experiment::new(cfg)?;
            let m = match m {
                Some(m) => m,
                None => exp.sample_counts()[0],
            };
            if replicate >= exp.config().replicates {
                bail!(
                    "replicate {replicate} outside 0..{}",
                    exp.config().replicates
                );
            }
            let rows = exp.coefficient_comparison(replicate, m)?;
            let format = Format::from(format);
            prepare_out(&out)?;
            let path = out.join(format!("coefficients.{}", format.extension()));
            write_coefficients(&path, &rows, format)?;
            eprintln!("{} rows -> {}", rows.len(), path.display());
        }
    }
    Ok(())
}
