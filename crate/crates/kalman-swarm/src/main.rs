use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use kalman_swarm::config::{RunConfig, SimConfig, StreamPairing};
use kalman_swarm::harness::{
    export_csv, export_map, run_comparison, run_trial, write_summary, ScenarioKind,
};
use kalman_swarm::world::{default_maze, world_file_contents};

#[derive(Parser)]
#[command(
    name = "kalman-swarm",
    version,
    about = "2D swarm-localization simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single trial and write trace.csv, map.pgm, and summary.txt.
    Run(RunArgs),
    /// Run all three scenarios per seed and write the comparison data.
    Compare(CompareArgs),
    /// Dump the builtin maze in the world file format.
    ExportWorld {
        /// Output file path.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario: baseline, imu, or greedy.
    #[arg(long)]
    scenario: ScenarioKind,
    /// Trial seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Trial duration in seconds.
    #[arg(long, default_value_t = 600.0)]
    duration: f64,
    /// TOML parameter file; defaults used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Seeds as an inclusive range `A..B` or a comma list `1,2,3`.
    #[arg(long, default_value = "1..5")]
    seeds: String,
    /// Trial duration in seconds.
    #[arg(long, default_value_t = 600.0)]
    duration: f64,
    /// TOML parameter file; defaults used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Draw scenario noise from independent streams instead of the paired
    /// shared realizations.
    #[arg(long)]
    independent_streams: bool,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Compare(args) => compare(args),
        Command::ExportWorld { out } => {
            fs::write(&out, world_file_contents(&default_maze()))
                .with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}

fn load_sim(config: Option<&Path>) -> Result<SimConfig> {
    let sim = match config {
        Some(path) => {
            SimConfig::load(path).with_context(|| format!("loading {}", path.display()))?
        }
        None => SimConfig::default(),
    };
    Ok(sim)
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = RunConfig::new(args.scenario, args.seed);
    cfg.duration = args.duration;
    cfg.sim = load_sim(args.config.as_deref())?;

    fs::create_dir_all(&args.out)?;
    let record = run_trial(&cfg)?;

    export_csv(&record, &args.out.join("trace.csv"))?;
    export_map(
        &record,
        &cfg.sim.mapping_config(),
        &args.out.join("map.pgm"),
    )?;
    write_summary(&record, &args.out.join("summary.txt"))?;

    println!(
        "{} seed {}: peak {:.4} m, final {:.4} m, {} full updates",
        record.scenario,
        record.seed,
        record.peak_error,
        record.final_error,
        record.full_update_count
    );
    println!(
        "wrote trace.csv, map.pgm, summary.txt under {}",
        args.out.display()
    );
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let seeds = parse_seeds(&args.seeds)?;
    let mut base = RunConfig::new(ScenarioKind::Baseline, seeds[0]);
    base.duration = args.duration;
    base.sim = load_sim(args.config.as_deref())?;
    base.pairing = if args.independent_streams {
        StreamPairing::Independent
    } else {
        StreamPairing::Shared
    };

    fs::create_dir_all(&args.out)?;
    let comparisons = run_comparison(&seeds, &base)?;

    let mut eta = String::new();
    for cmp in &comparisons {
        let dir = args.out.join(format!("seed_{}", cmp.seed));
        fs::create_dir_all(&dir)?;
        // File names match the error-plot data sources.
        export_csv(&cmp.baseline, &dir.join("baseline_data.csv"))?;
        export_csv(&cmp.imu_fused, &dir.join("kalman.csv"))?;
        export_csv(&cmp.greedy, &dir.join("swarm_data.csv"))?;
        eta.push_str(&format!(
            "seed {}: eta = {:.2}% (peak baseline {:.4} m, greedy {:.4} m)\n",
            cmp.seed, cmp.eta_percent, cmp.baseline.peak_error, cmp.greedy.peak_error
        ));
        println!(
            "seed {}: baseline peak {:.3} m | imu peak {:.3} m final {:.3} m | greedy peak {:.4} m | eta {:.2}%",
            cmp.seed,
            cmp.baseline.peak_error,
            cmp.imu_fused.peak_error,
            cmp.imu_fused.final_error,
            cmp.greedy.peak_error,
            cmp.eta_percent
        );
    }
    fs::write(args.out.join("eta.txt"), eta)?;
    println!(
        "wrote per-seed traces and eta.txt under {}",
        args.out.display()
    );
    Ok(())
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let spec = spec.trim();
    if let Some((a, b)) = spec.split_once("..") {
        let start: u64 = a.trim().parse().context("bad range start")?;
        let end: u64 = b.trim().parse().context("bad range end")?;
        if end < start {
            bail!("empty seed range {spec}");
        }
        return Ok((start..=end).collect());
    }
    let seeds: Result<Vec<u64>, _> = spec.split(',').map(|s| s.trim().parse()).collect();
    let seeds = seeds.context("bad seed list")?;
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}
