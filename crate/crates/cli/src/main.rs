use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use cgsched::cg::{emit_dataset, run_cg, write_convergence_csv, CgConfig, CgError, InitStrategy, PricingMode, Termination};
use cgsched::instance::{
    generate_uniform, generate_weibull, instance_name, parse_instance_name, read_instance, write_instance,
    DEFAULT_INIT_COLS, INSTANCE_EXTENSION,
};
use cgsched::nn::{load_weights, read_header, read_weights, save_weights, ModelConfig, ModelWeights};
use cgsched::report::{build_report, report_csv, report_text, RunResult};
use cgsched::rmp::RmpError;

mod pattern;

#[derive(Parser)]
#[command(name = "cgsched", version, about = "Column generation for R||ΣwjCj with DP and neural pricing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances.
    Gen(GenArgs),
    /// Solve one instance by column generation.
    Solve(SolveArgs),
    /// Emit supervised pricing records from Greedy-DP runs.
    Dataset(DatasetArgs),
    /// Compare Greedy-DP and NN-DP result files.
    Report(ReportArgs),
    /// Weight-file utilities.
    #[command(subcommand)]
    Weights(WeightsCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum Dist {
    Uniform,
    Weibull,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long)]
    machines: usize,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Dist::Uniform)]
    dist: Dist,
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Initial columns per machine, recorded in the file name.
    #[arg(long, default_value_t = DEFAULT_INIT_COLS)]
    init_cols: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    GreedyDp,
    #[value(name = "dp-5")]
    Dp5,
    #[value(name = "dp-20")]
    Dp20,
    NnDp,
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    solver: Solver,
    /// NNCG1 weight file, required for nn-dp.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Wall-clock limit in seconds for the column-generation loop.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Random initial columns per machine; defaults to the count in the instance name.
    #[arg(long)]
    init_cols: Option<u32>,
    /// Seed for the initial columns; defaults to the instance seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Solve the integer master over the final pool.
    #[arg(long)]
    finalize: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct DatasetArgs {
    /// Instance files; `*` and `?` are expanded in the last path component.
    #[arg(long)]
    instances: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct ReportArgs {
    /// Directory of result JSON files.
    #[arg(long)]
    results: PathBuf,
    /// Where to write the CSV table; defaults to `<results>/report.csv`.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum WeightsCommand {
    /// Print the header and verify the checksum.
    Inspect { file: PathBuf },
    /// Write randomly initialized weights for the default configuration.
    Init {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// An error with its exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

const USAGE: u8 = 1;
const INPUT: u8 = 2;
const TIME_LIMIT: u8 = 3;
const INTERNAL: u8 = 4;

trait ExitWith<T> {
    fn exit_with(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ExitWith<T> for Result<T, E> {
    fn exit_with(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

fn fail(code: u8, error: anyhow::Error) -> Failure {
    Failure { code, error }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    if let Err(f) = configure_threads() {
        eprintln!("error: {:#}", f.error);
        return ExitCode::from(f.code);
    }
    let outcome = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Dataset(a) => cmd_dataset(a),
        Command::Report(a) => cmd_report(a),
        Command::Weights(WeightsCommand::Inspect { file }) => cmd_weights_inspect(&file),
        Command::Weights(WeightsCommand::Init { out, seed }) => cmd_weights_init(&out, seed),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("CGSCHED_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| fail(USAGE, anyhow!("CGSCHED_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().exit_with(INTERNAL)
}

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))
}

fn cmd_gen(a: GenArgs) -> Result<u8, Failure> {
    if a.machines == 0 {
        return Err(fail(USAGE, anyhow!("--machines must be at least 1")));
    }
    fs::create_dir_all(&a.out)
        .with_context(|| format!("creating {}", a.out.display()))
        .exit_with(INPUT)?;
    for i in 0..a.count {
        let seed = a.seed + i;
        let mut inst = match a.dist {
            Dist::Uniform => generate_uniform(a.machines, a.jobs as usize, seed),
            Dist::Weibull => generate_weibull(a.machines, a.jobs as usize, seed),
        };
        inst.name = instance_name(a.machines, a.jobs as usize, seed, a.init_cols);
        let path = a.out.join(format!("{}.{INSTANCE_EXTENSION}", inst.name));
        write_instance(&inst, &path).exit_with(INPUT)?;
        println!("{}", path.display());
    }
    Ok(0)
}

fn cmd_solve(a: SolveArgs) -> Result<u8, Failure> {
    let mode = match a.solver {
        Solver::GreedyDp => PricingMode::GreedyDp,
        Solver::Dp5 => PricingMode::DpK(5),
        Solver::Dp20 => PricingMode::DpK(20),
        Solver::NnDp => {
            let path = a
                .weights
                .as_ref()
                .ok_or_else(|| fail(USAGE, anyhow!("--solver nn-dp requires --weights")))?;
            PricingMode::NnDp(Arc::new(load_weights(path).exit_with(INPUT)?))
        }
    };
    let time_limit = a
        .time_limit
        .map(|s| Duration::try_from_secs_f64(s).map_err(|_| fail(USAGE, anyhow!("invalid --time-limit {s}"))))
        .transpose()?;
    let inst = read_instance(&a.instance).exit_with(INPUT)?;
    let name_parts = parse_instance_name(&inst.name).ok();
    let init_cols = a
        .init_cols
        .or(name_parts.as_ref().map(|p| p.init_cols))
        .unwrap_or(DEFAULT_INIT_COLS);
    let solver_label = mode.label();

    let mut config = CgConfig::new(mode);
    config.time_limit = time_limit;
    config.finalize_integer = a.finalize;
    config.finalize_time_limit = time_limit;
    config.seed = a.seed.unwrap_or(inst.seed);
    config.init = InitStrategy::RandomSubsets {
        runs_per_machine: init_cols as usize,
    };

    let result = match run_cg(&inst, &config) {
        Ok(r) => r,
        Err(CgError::Integer(RmpError::NoIncumbent)) => {
            return Err(fail(TIME_LIMIT, anyhow!("no integer solution before the time limit")))
        }
        Err(e) => return Err(fail(INTERNAL, e.into())),
    };

    fs::create_dir_all(&a.out)
        .with_context(|| format!("creating {}", a.out.display()))
        .exit_with(INPUT)?;
    let stem = format!("{}.{solver_label}", inst.name);
    let mut csv = Vec::new();
    write_convergence_csv(&result.iterations, &mut csv).exit_with(INTERNAL)?;
    write_atomic(&a.out.join(format!("{stem}.csv")), &csv).exit_with(INPUT)?;

    let run = RunResult {
        instance: inst.name.clone(),
        solver: solver_label,
        lp_obj: result.lp_objective,
        int_obj: result.integer.as_ref().map(|i| i.objective),
        totals: result.totals,
        terminated_by: result.terminated_by,
        wall_ms: result.wall_ms,
        iterations: result.iterations.len(),
    };
    let json = serde_json::to_string_pretty(&run).exit_with(INTERNAL)?;
    write_atomic(&a.out.join(format!("{stem}.json")), json.as_bytes()).exit_with(INPUT)?;
    println!("{json}");

    Ok(match result.terminated_by {
        Termination::Certificate => 0,
        Termination::TimeLimit => TIME_LIMIT,
    })
}

fn cmd_dataset(a: DatasetArgs) -> Result<u8, Failure> {
    let paths = pattern::expand(&a.instances).exit_with(INPUT)?;
    if paths.is_empty() {
        return Err(fail(INPUT, anyhow!("no files match {}", a.instances)));
    }
    let instances = paths
        .iter()
        .map(|p| read_instance(p).exit_with(INPUT))
        .collect::<Result<Vec<_>, _>>()?;

    // Instances run in parallel; records are written in path order.
    let chunks: Vec<Result<Vec<u8>, Failure>> = instances
        .par_iter()
        .map(|inst| {
            let mut config = CgConfig::new(PricingMode::GreedyDp);
            config.record_trace = true;
            config.seed = inst.seed;
            if let Ok(p) = parse_instance_name(&inst.name) {
                config.init = InitStrategy::RandomSubsets {
                    runs_per_machine: p.init_cols as usize,
                };
            }
            let result = run_cg(inst, &config).exit_with(INTERNAL)?;
            let mut buf = Vec::new();
            emit_dataset(inst, &result.trace, &mut buf).exit_with(INTERNAL)?;
            Ok(buf)
        })
        .collect();

    let mut out = Vec::new();
    for chunk in chunks {
        out.extend(chunk?);
    }
    let records = out.iter().filter(|&&b| b == b'\n').count();
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).exit_with(INPUT)?;
    }
    write_atomic(&a.out, &out).exit_with(INPUT)?;
    println!("{records}");
    Ok(0)
}

fn cmd_report(a: ReportArgs) -> Result<u8, Failure> {
    let mut files: Vec<PathBuf> = fs::read_dir(&a.results)
        .with_context(|| format!("reading {}", a.results.display()))
        .exit_with(INPUT)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut results = Vec::with_capacity(files.len());
    for f in &files {
        let text = fs::read_to_string(f)
            .with_context(|| format!("reading {}", f.display()))
            .exit_with(INPUT)?;
        let r: RunResult = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", f.display()))
            .exit_with(INPUT)?;
        results.push(r);
    }
    let blocks = build_report(&results).exit_with(INPUT)?;
    let csv_path = a.csv.unwrap_or_else(|| a.results.join("report.csv"));
    write_atomic(&csv_path, report_csv(&blocks).as_bytes()).exit_with(INPUT)?;
    print!("{}", report_text(&blocks));
    Ok(0)
}

fn cmd_weights_inspect(file: &Path) -> Result<u8, Failure> {
    let bytes = fs::read(file)
        .with_context(|| format!("reading {}", file.display()))
        .exit_with(INPUT)?;
    // full parse first: checks the CRC, the totals and every shape
    read_weights(&bytes).exit_with(INPUT)?;
    let (header, _) = read_header(&bytes).exit_with(INPUT)?;
    let c = &header.config;
    let mut out = std::io::stdout().lock();
    let lines = (|| -> std::io::Result<()> {
        writeln!(out, "format_version {}", header.format_version)?;
        writeln!(
            out,
            "config d={} h={} n_enc={} n_dec={} input_dim={} ln_epsilon={}",
            c.d, c.h, c.n_enc, c.n_dec, c.input_dim, c.ln_epsilon
        )?;
        writeln!(out, "divisors {:?}", header.divisors)?;
        for t in &header.tensors {
            writeln!(out, "tensor {} {:?} offset={}", t.name, t.shape, t.offset)?;
        }
        writeln!(out, "total {}", header.total_params)?;
        writeln!(out, "crc ok")
    })();
    lines.exit_with(INTERNAL)?;
    Ok(0)
}

fn cmd_weights_init(out: &Path, seed: u64) -> Result<u8, Failure> {
    let w = ModelWeights::random(&ModelConfig::best(), seed).exit_with(INTERNAL)?;
    save_weights(&w, out).exit_with(INPUT)?;
    println!("{}", out.display());
    Ok(0)
}
