// SPDX-License-Identifier: Apache-2.0
//! `puf-sim`: generate CRP datasets, evaluate them, and sweep the
//! node × key-length matrix.
//!
//! Exit codes: 0 ok, 1 configuration, 2 I/O, 3 corrupt dataset,
//! 4 some sweep cells failed.

mod config;
mod error;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use srff_puf::{
    dataset, evaluate, run_experiment, ComparisonPolicy, CrpDataset, ExperimentConfig,
    MetricsReport, PairMode,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{write_reports, ReportPaths};

#[derive(Parser, Debug)]
#[command(
    name = "puf-sim",
    version,
    about = "SR flip-flop PUF Monte Carlo simulator"
)]
struct Cli {
    /// Worker threads for die-parallel generation.
    #[arg(long, global = true, env = "PUF_SIM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment and write its CRP dataset.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compute metrics for a dataset and write JSON + CSV reports.
    Evaluate {
        dataset: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pairs: PairArgs,
    },
    /// Generate and evaluate every node × key length.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pairs: PairArgs,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed from the config (or the pair-sampling seed for evaluate).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Pairs {
    All,
    Sampled,
}

#[derive(Args, Debug)]
struct PairArgs {
    #[arg(long, value_enum)]
    pairs: Option<Pairs>,
    #[arg(long)]
    sampled_n: Option<usize>,
}

impl PairArgs {
    fn apply(&self, mut policy: ComparisonPolicy) -> ComparisonPolicy {
        match self.pairs {
            Some(Pairs::All) => policy.mode = PairMode::AllPairs,
            Some(Pairs::Sampled) => policy.mode = PairMode::Sampled,
            None => {}
        }
        if let Some(n) = self.sampled_n {
            policy.n_sampled = n;
        }
        policy
    }
}

fn dataset_stem(cfg: &ExperimentConfig) -> String {
    format!("crp_{}_{}b", cfg.node.name, cfg.layout.n_bits())
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<RunConfig, CliError> {
    let mut rc = RunConfig::load(path)?;
    if seed.is_some() {
        rc.seed = seed;
    }
    Ok(rc)
}

fn out_dir(common: &Common, rc: &RunConfig) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| rc.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn generate_one(cfg: &ExperimentConfig, dir: &Path) -> Result<(CrpDataset, PathBuf), CliError> {
    let ds = run_experiment(cfg).map_err(CliError::from_core)?;
    create_dir(dir)?;
    let path = dir.join(format!("{}.ndjson", dataset_stem(cfg)));
    dataset::save(&ds, &path).map_err(CliError::from_core)?;
    Ok((ds, path))
}

fn evaluate_one(
    ds: &CrpDataset,
    policy: &ComparisonPolicy,
    dir: &Path,
    stem: &str,
) -> Result<(MetricsReport, ReportPaths), CliError> {
    policy.validate().map_err(CliError::from_core)?;
    let report = evaluate(ds, policy).map_err(CliError::from_core)?;
    create_dir(dir)?;
    let paths = ReportPaths::new(dir, stem);
    write_reports(&report, &paths)?;
    Ok((report, paths))
}

fn cmd_generate(config: &Path, common: &Common) -> Result<(), CliError> {
    let rc = load_config(config, common.seed)?;
    let cfg = rc.primary_experiment()?;
    let (ds, path) = generate_one(&cfg, &out_dir(common, &rc))?;
    println!(
        "wrote {}: {} dies, {}-bit key, node {}, env points [{}], seed {}",
        path.display(),
        ds.references.len(),
        ds.n_bits(),
        cfg.node.name,
        cfg.env_points
            .iter()
            .map(|e| e.label.as_str())
            .collect::<Vec<_>>()
            .join(", "),
        cfg.seed
    );
    Ok(())
}

fn cmd_evaluate(path: &Path, common: &Common, pairs: &PairArgs) -> Result<(), CliError> {
    let ds = dataset::load(path).map_err(|e| match CliError::from_core(e) {
        CliError::Io(m) => CliError::Io(format!("{}: {m}", path.display())),
        other => other,
    })?;
    let base = ComparisonPolicy {
        seed: common.seed.unwrap_or(ds.config.seed),
        ..Default::default()
    };
    let policy = pairs.apply(base);
    let dir = common
        .out
        .clone()
        .unwrap_or_else(|| path.parent().map(Path::to_path_buf).unwrap_or_default());
    let stem = path
        .file_name()
        .and_then(|n| n.to_str())
        .map(|n| n.trim_end_matches(".ndjson").to_string())
        .unwrap_or_else(|| dataset_stem(&ds.config));
    let (report, paths) = evaluate_one(&ds, &policy, &dir, &stem)?;
    println!(
        "{} {}-bit: uniqueness {:.2}% over {} pairs, HD=0 {:.2}%, BER {:.4}%, mean P(zero) {:.3}",
        report.config.node.name,
        report.n_bits,
        report.mean_inter_hd_pct,
        report.n_comparisons,
        report.frac_hd_zero_pct,
        report.mean_ber_pct,
        report.p_zero_mean
    );
    println!("wrote {}", paths.json.display());
    Ok(())
}

fn cmd_sweep(config: &Path, common: &Common, pairs: &PairArgs) -> Result<(), CliError> {
    let rc = load_config(config, common.seed)?;
    let root = out_dir(common, &rc);
    let (nodes, lengths) = rc.sweep_matrix();
    create_dir(&root)?;
    let mut rows = Vec::new();
    let mut failures = 0;
    for &node in &nodes {
        for &bits in &lengths {
            let cell = || -> Result<MetricsReport, CliError> {
                let cfg = rc.experiment(node, bits)?;
                let dir = root.join(format!("{node}_{bits}b"));
                let (ds, _) = generate_one(&cfg, &dir)?;
                let policy = pairs.apply(rc.policy(cfg.seed));
                Ok(evaluate_one(&ds, &policy, &dir, &dataset_stem(&cfg))?.0)
            };
            match cell() {
                Ok(r) => rows.push((node, bits, r)),
                Err(e) => {
                    failures += 1;
                    eprintln!("{node} {bits}-bit failed: {e}");
                }
            }
        }
    }
    let summary = root.join("sweep_summary.csv");
    let mut w = csv::Writer::from_path(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["node", "bits", "uniqueness", "frac_hd_zero", "ber"])
        .map_err(io)?;
    println!(
        "{:<5} {:>4} {:>10} {:>12} {:>8}",
        "node", "bits", "uniqueness", "frac_hd_zero", "ber"
    );
    for (node, bits, r) in &rows {
        w.write_record([
            node.to_string(),
            bits.to_string(),
            format!("{:.4}", r.mean_inter_hd_pct),
            format!("{:.4}", r.frac_hd_zero_pct),
            format!("{:.6}", r.mean_ber_pct),
        ])
        .map_err(io)?;
        println!(
            "{:<5} {:>4} {:>10.2} {:>12.2} {:>8.4}",
            node.to_string(),
            bits,
            r.mean_inter_hd_pct,
            r.frac_hd_zero_pct,
            r.mean_ber_pct
        );
    }
    w.flush()?;
    println!("wrote {} ({} reports)", summary.display(), rows.len());
    if failures > 0 {
        return Err(CliError::Sweep(failures, nodes.len() * lengths.len()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    match &cli.command {
        Command::Generate { config, common } => cmd_generate(config, common),
        Command::Evaluate {
            dataset,
            common,
            pairs,
        } => cmd_evaluate(dataset, common, pairs),
        Command::Sweep {
            config,
            common,
            pairs,
        } => cmd_sweep(config, common, pairs),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("puf-sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
