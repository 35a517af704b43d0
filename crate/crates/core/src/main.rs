use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use patchbench::benchmark::Benchmark;
use patchbench::category::Category;
use patchbench::harness::{
    check_code, generator_for, pack_replay, refresh_report, run_experiment, serve_review, Checked, RunConfig,
};
use patchbench::llm::ResponseCache;
use patchbench::render::{compile, judge, render, write_wav, JudgeOptions, DEFAULT_SAMPLE_RATE};

#[derive(Parser)]
#[command(name = "patchbench", version, about = "Generate, check, render and score audio patches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file into a new run directory.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "runs")]
        runs_dir: PathBuf,
        /// Defaults to an id derived from the config contents.
        #[arg(long)]
        run_id: Option<String>,
    },
    /// Check that a file is a well-formed patch for its category.
    Validate {
        file: PathBuf,
        #[arg(long, default_value = "json-maxpat")]
        category: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shell template for external runners, with {code} and {out}.
        #[arg(long)]
        runner: Option<String>,
    },
    /// Render a patch to a WAV file and optionally judge it.
    Render {
        file: PathBuf,
        #[arg(long, default_value = "json-maxpat")]
        category: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        duration: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        runner: Option<String>,
        /// Benchmark whose oracle should judge the render.
        #[arg(long)]
        judge: Option<String>,
        /// Apply structural checks for every specific benchmark.
        #[arg(long)]
        structural_all: bool,
    },
    /// Human rating service.
    Rate {
        #[command(subcommand)]
        command: RateCommand,
    },
    /// Recompute a run's report, merging ratings, and print it.
    Report {
        run_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
    },
    /// Pack raw response files into a replay cache for a config.
    ReplayPack {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        responses: PathBuf,
        /// Defaults to the config's cache directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum RateCommand {
    /// Serve the review API for a run directory.
    Serve {
        run_dir: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Md,
    Json,
    Csv,
}

type CliResult = Result<(), String>;

fn read_code(file: &Path) -> Result<String, String> {
    std::fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))
}

fn parse_category(s: &str) -> Result<Category, String> {
    s.parse::<Category>().map_err(|e| e.to_string())
}

fn generate(config: &Path, runs_dir: &Path, run_id: Option<String>) -> CliResult {
    let (raw, base) = RunConfig::load(config).map_err(|e| e.to_string())?;
    let resolved = raw.resolve(&base).map_err(|e| e.to_string())?;
    let run_id = run_id.unwrap_or_else(|| raw.default_run_id());
    let generator = generator_for(&resolved).map_err(|e| e.to_string())?;
    let run = run_experiment(&resolved, &runs_dir.join(&run_id), &generator).map_err(|e| e.to_string())?;
    let report = run.report();
    println!("{}", run.dir.display());
    for c in &report.categories {
        println!("{}: n={} w={} c={}", c.category, c.totals.n, c.totals.w, c.totals.c);
    }
    Ok(())
}

fn check(file: &Path, category: &str, seed: u64, runner: Option<&str>) -> Result<patchbench::ir::PatchGraph, String> {
    let category = parse_category(category)?;
    match check_code(category, &read_code(file)?, seed, runner) {
        Checked::Ok(g) => Ok(g),
        Checked::Failed(e) | Checked::Skipped(e) => Err(format!("{}: {}", e.code, e.message)),
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Generate {
            config,
            runs_dir,
            run_id,
        } => generate(&config, &runs_dir, run_id),
        Command::Validate {
            file,
            category,
            seed,
            runner,
        } => {
            let g = check(&file, &category, seed, runner.as_deref())?;
            println!("well-formed: {} nodes, {} edges", g.node_count(), g.edges().len());
            Ok(())
        }
        Command::Render {
            file,
            category,
            out,
            duration,
            seed,
            runner,
            judge: bench,
            structural_all,
        } => {
            let g = check(&file, &category, seed, runner.as_deref())?;
            let program = compile(&g).map_err(|e| e.to_string())?.with_noise_seed(seed);
            let buf = render(&program, duration, DEFAULT_SAMPLE_RATE).map_err(|e| e.to_string())?;
            write_wav(&buf, &out).map_err(|e| e.to_string())?;
            println!("wrote {} ({} samples, rms {:.4})", out.display(), buf.len(), buf.rms());
            if let Some(b) = bench {
                let b: Benchmark = b.parse().map_err(|e: patchbench::benchmark::UnknownBenchmark| e.to_string())?;
                let verdict = judge(b, &buf, &g, JudgeOptions { structural_all });
                println!("{}", serde_json::to_string_pretty(&verdict).expect("verdict serializes"));
            }
            Ok(())
        }
        Command::Rate {
            command: RateCommand::Serve { run_dir, addr },
        } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            eprintln!("serving {} on http://{addr}", run_dir.display());
            rt.block_on(serve_review(&run_dir, addr)).map_err(|e| e.to_string())
        }
        Command::Report { run_dir, format } => {
            let report = refresh_report(&run_dir).map_err(|e| e.to_string())?;
            let text = match format {
                Format::Md => report.to_markdown(),
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
            };
            print!("{text}");
            Ok(())
        }
        Command::ReplayPack {
            config,
            responses,
            out,
        } => {
            let (raw, base) = RunConfig::load(&config).map_err(|e| e.to_string())?;
            let resolved = raw.resolve(&base).map_err(|e| e.to_string())?;
            let cache = ResponseCache::open(out.unwrap_or_else(|| resolved.cache_dir.clone())).map_err(|e| e.to_string())?;
            let n = pack_replay(&resolved, &responses, &cache).map_err(|e| e.to_string())?;
            println!("packed {n} responses into {}", cache.dir().display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
