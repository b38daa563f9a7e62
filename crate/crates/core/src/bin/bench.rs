use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use dynsched::bench::{median_metrics, run, verify_with, write_csv, CsvRow, Impl};
use dynsched::model::{format_trace, parse_trace};
use dynsched::workload::{generate_adversarial, generate_random};
use dynsched::{Mode, WorkloadSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ImplArg {
    Naive,
    Cf,
    Lt,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Mono,
    General,
}

/// Benchmark and cross-check the dynamic interval schedulers.
#[derive(Debug, Parser)]
#[command(name = "bench", version)]
struct Args {
    #[arg(long = "impl", value_enum, default_value = "all")]
    which: ImplArg,

    /// Number of inserts.
    #[arg(long, default_value_t = 10_000)]
    n: usize,

    #[arg(long, default_value_t = 0.5)]
    remove_ratio: f64,

    #[arg(long, default_value_t = 0.5)]
    query_ratio: f64,

    #[arg(long, default_value_t = 0.5)]
    sparsity: f64,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[arg(long, value_enum, default_value = "mono")]
    mode: ModeArg,

    /// Use the adversarial sequence of height H with K events instead.
    #[arg(long, num_args = 2, value_names = ["H", "K"])]
    adversarial: Option<Vec<u64>>,

    /// Cross-check all applicable schedulers in lock-step before timing.
    #[arg(long)]
    verify: bool,

    /// Run structural audits after every event while verifying (slow).
    #[arg(long, requires = "verify")]
    audit: bool,

    #[arg(long, default_value_t = 3)]
    repeats: usize,

    /// Write CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Write the generated event sequence to this file.
    #[arg(long)]
    trace: Option<PathBuf>,

    /// Read the event sequence from a trace file instead of generating it.
    #[arg(long, conflicts_with = "adversarial")]
    replay: Option<PathBuf>,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode, Box<dyn std::error::Error>> {
    let args = Args::parse();
    let mode = match args.mode {
        ModeArg::Mono => Mode::Monotonic,
        ModeArg::General => Mode::General,
    };
    let spec = WorkloadSpec::new(args.n, args.remove_ratio, args.query_ratio, args.sparsity, args.seed, mode);

    let events = if let Some(path) = &args.replay {
        parse_trace(&fs::read_to_string(path)?)?
    } else if let Some(hk) = &args.adversarial {
        if mode == Mode::General {
            return Err("the adversarial sequence is monotonic; drop --mode general".into());
        }
        generate_adversarial(u32::try_from(hk[0])?, usize::try_from(hk[1])?)?
    } else {
        generate_random(&spec)?
    };
    if let Some(path) = &args.trace {
        fs::write(path, format_trace(&events))?;
    }

    let impls: Vec<Impl> = match args.which {
        ImplArg::Naive => vec![Impl::Naive],
        ImplArg::Cf => vec![Impl::Cf],
        ImplArg::Lt => vec![Impl::Lt],
        ImplArg::All => Impl::ALL.into_iter().filter(|i| i.supports(mode)).collect(),
    };

    if args.verify {
        let mut checked = impls.clone();
        if !checked.contains(&Impl::Naive) {
            checked.insert(0, Impl::Naive);
        }
        let report = verify_with(&events, mode, &checked, args.audit)?;
        eprintln!("verify: {report}");
        if !report.is_ok() {
            return Ok(ExitCode::FAILURE);
        }
    }

    let repeats = args.repeats.max(1);
    let mut rows = Vec::new();
    for which in impls {
        let runs = (0..repeats)
            .map(|_| run(&events, which, mode))
            .collect::<Result<Vec<_>, _>>()?;
        let m = median_metrics(&runs).expect("at least one run");
        rows.push(CsvRow::new(&spec, &m));
    }
    match &args.csv {
        Some(path) => write_csv(fs::File::create(path)?, &rows)?,
        None => write_csv(std::io::stdout().lock(), &rows)?,
    }
    Ok(ExitCode::SUCCESS)
}
