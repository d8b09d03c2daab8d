use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bindlab::bind::{InstanceSource, PROTOCOL_CSV_HEADER};
use bindlab::harness::{
    self, AlgChoice, Check, HarnessError, ProtocolSpec, ReportRow, SpaceAlg, SpaceCurveSpec,
    VerifySpec, REPORT_CSV_HEADER, SPACE_CSV_HEADER, TRIAL_CSV_HEADER,
};
use bindlab::matrix::BitMatrix;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Bi-index reduction experiments for insertion-deletion graph streams.
///
/// Exit codes: 0 when every check passes, 1 when a bound is violated,
/// 2 on configuration or I/O errors.
#[derive(Debug, Parser)]
#[command(name = "bindlab", version)]
struct Cli {
    /// Master seed; every command is deterministic given it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the command's rows as CSV to this file.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override the statistical tolerance of `verify` and `space-curve`.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write deterministic fixtures.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Run a verification campaign.
    Verify(VerifyArgs),
    /// Run end-to-end protocol trials.
    Protocol {
        kind: KindArg,
        #[command(flatten)]
        args: ProtocolArgs,
    },
    /// Same as `protocol matching`.
    MatchingProtocol(ProtocolArgs),
    /// Same as `protocol vc`.
    VcProtocol(ProtocolArgs),
    /// Snapshot bits against n on dense random streams, with a log-log fit.
    SpaceCurve(SpaceArgs),
}

#[derive(Debug, Subcommand)]
enum GenKind {
    /// Augmented Index instance (`ind.txt`).
    Ind {
        #[arg(long)]
        m: usize,
        /// Output directory; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Packed bi-index instance (`ind.txt`, `matrix.txt`, `query.txt`).
    Bind {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dense random bipartite insert/delete stream (`stream.txt`).
    Stream {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CheckArg {
    MatchingSize,
    ClaimRate,
    Iso,
    VcSize,
    CoverRate,
    DiagZeros,
}

impl From<CheckArg> for Check {
    fn from(c: CheckArg) -> Check {
        match c {
            CheckArg::MatchingSize => Check::MatchingSize,
            CheckArg::ClaimRate => Check::ClaimRate,
            CheckArg::Iso => Check::Iso,
            CheckArg::VcSize => Check::VcSize,
            CheckArg::CoverRate => Check::CoverRate,
            CheckArg::DiagZeros => Check::DiagZeros,
        }
    }
}

#[derive(Debug, Args)]
struct VerifyArgs {
    check: CheckArg,
    #[arg(long)]
    n: usize,
    /// Window size; defaults to n - n/4.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "C", alias = "c", default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    /// Trials; conditioned runs for cover-rate.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0.99)]
    quantile: f64,
    #[arg(long, default_value_t = 128)]
    exact_cap: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Matching,
    Vc,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SourceArg {
    Packed,
    Uniform,
}

#[derive(Debug, Args)]
struct ProtocolArgs {
    #[arg(long)]
    n: usize,
    /// Window size; derived from n and epsilon if absent.
    #[arg(long)]
    k: Option<usize>,
    /// Approximation factor of a matching algorithm; n^epsilon if absent.
    #[arg(long = "C", alias = "c")]
    c: Option<f64>,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    /// Reduction runs; 100 C for matching, 40 for vertex cover if absent.
    #[arg(long)]
    runs: Option<usize>,
    /// store-all, subsample, store-all-cover, group-contraction or full-cover.
    #[arg(long)]
    alg: String,
    /// Retention probability of `subsample`.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 128)]
    exact_cap: usize,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = SourceArg::Packed)]
    source: SourceArg,
    #[arg(long, default_value_t = 0.9)]
    min_success: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SpaceAlgArg {
    StoreAll,
    GroupContraction,
}

#[derive(Debug, Args)]
struct SpaceArgs {
    #[arg(long, value_enum)]
    alg: SpaceAlgArg,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [64, 128, 256, 512])]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let seed = cli
        .seed
        .ok_or_else(|| CliError::Usage("--seed is required".into()))?;
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Gen { kind } => gen(kind, seed).map(|()| 0),
        Command::Verify(a) => verify(cli, a, seed),
        Command::Protocol { kind, args } => protocol(cli, *kind, args, seed),
        Command::MatchingProtocol(args) => protocol(cli, KindArg::Matching, args, seed),
        Command::VcProtocol(args) => protocol(cli, KindArg::Vc, args, seed),
        Command::SpaceCurve(a) => space(cli, a, seed),
    }
}

fn emit(out: &Option<PathBuf>, name: &str, text: &str) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), text)?;
        }
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn gen(kind: &GenKind, seed: u64) -> Result<(), CliError> {
    match kind {
        GenKind::Ind { m, out } => emit(
            out,
            "ind.txt",
            &format!("{}\n", harness::gen_ind(*m, seed)?),
        ),
        GenKind::Bind { n, k, out } => {
            let (ind, bind) = harness::gen_bind(*n, *k, seed)?;
            emit(out, "ind.txt", &format!("{ind}\n"))?;
            emit(out, "matrix.txt", &matrix_text(bind.matrix()))?;
            emit(out, "query.txt", &harness::bind_query_text(&bind))
        }
        GenKind::Stream { n, density, out } => emit(
            out,
            "stream.txt",
            &harness::gen_stream(*n, *density, seed)?.to_string(),
        ),
    }
}

fn matrix_text(m: &BitMatrix) -> String {
    let s = m.to_string();
    if s.ends_with('\n') {
        s
    } else {
        s + "\n"
    }
}

fn write_csv<I>(path: &Path, header: &[&str], records: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in records {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn report(cli: &Cli, rows: &[ReportRow]) -> Result<u8, CliError> {
    for r in rows {
        println!("{r}");
    }
    if let Some(path) = &cli.csv {
        write_csv(
            path,
            &REPORT_CSV_HEADER,
            rows.iter().map(ReportRow::csv_record),
        )?;
    }
    Ok(harness::exit_code(rows) as u8)
}

fn verify(cli: &Cli, a: &VerifyArgs, seed: u64) -> Result<u8, CliError> {
    let k = a.k.unwrap_or(a.n - a.n / 4);
    let mut spec = VerifySpec::new(a.check.into(), a.n, k, a.trials, seed);
    spec.c = a.c;
    spec.epsilon = a.epsilon;
    spec.quantile = a.quantile;
    spec.exact_cap = a.exact_cap;
    if let Some(t) = cli.tolerance {
        spec.tolerance = t;
    }
    report(cli, &harness::run_verify(&spec)?)
}

fn protocol(cli: &Cli, kind: KindArg, a: &ProtocolArgs, seed: u64) -> Result<u8, CliError> {
    let alg = AlgChoice::parse(&a.alg, a.p, a.epsilon, a.exact_cap)?;
    let nf = a.n as f64;
    let k = a.k.unwrap_or_else(|| {
        a.n.saturating_sub((nf.powf(1.0 - a.epsilon) / 40.0).ceil() as usize)
    });
    let mut spec = match kind {
        KindArg::Matching => {
            let c = a.c.unwrap_or(nf.powf(a.epsilon));
            ProtocolSpec::matching(alg, a.n, k, c, a.trials, seed)
        }
        KindArg::Vc => {
            let mut spec = ProtocolSpec::vc(alg, a.n, k, a.epsilon, a.trials, seed);
            if let Some(c) = a.c {
                spec.c = c;
            }
            spec
        }
    };
    if let Some(r) = a.runs {
        spec.runs = r;
    }
    spec.source = match a.source {
        SourceArg::Packed => InstanceSource::PackedIndex,
        SourceArg::Uniform => InstanceSource::UniformMatrix,
    };
    spec.min_success = a.min_success;
    let rep = harness::run_protocol(&spec)?;
    println!("{}", PROTOCOL_CSV_HEADER.join(","));
    println!("{}", rep.summary.join(","));
    if let Some(path) = &cli.csv {
        write_csv(path, &TRIAL_CSV_HEADER, rep.trial_records())?;
    }
    for r in &rep.rows {
        println!("{r}");
    }
    Ok(harness::exit_code(&rep.rows) as u8)
}

fn space(cli: &Cli, a: &SpaceArgs, seed: u64) -> Result<u8, CliError> {
    let alg = match a.alg {
        SpaceAlgArg::StoreAll => SpaceAlg::StoreAll,
        SpaceAlgArg::GroupContraction => SpaceAlg::GroupContraction { epsilon: a.epsilon },
    };
    let spec = SpaceCurveSpec {
        alg,
        ns: a.ns.clone(),
        density: a.density,
        seed,
        tolerance: cli.tolerance.unwrap_or(alg.default_tolerance()),
    };
    let curve = harness::space_curve(&spec)?;
    println!("{}", SPACE_CSV_HEADER.join(","));
    let records: Vec<Vec<String>> = curve
        .points
        .iter()
        .map(|p| {
            vec![
                curve.alg_id.clone(),
                p.n.to_string(),
                p.updates.to_string(),
                p.surviving_edges.to_string(),
                p.bits.to_string(),
            ]
        })
        .collect();
    for r in &records {
        println!("{}", r.join(","));
    }
    println!("slope {:.4}", curve.slope);
    for r in &curve.rows {
        println!("{r}");
    }
    if let Some(path) = &cli.csv {
        write_csv(path, &SPACE_CSV_HEADER, records)?;
    }
    Ok(harness::exit_code(&curve.rows) as u8)
}
