use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use rayflow::bench::{
    bench_time_sampler, distill_run, format_sig9, sample_from_checkpoint, ts_rows_to_csv,
    BenchRow, PipelineOptions,
};
use rayflow::checkpoint::Checkpoint;
use rayflow::config::Config;
use rayflow::dataset::gen_dataset;
use rayflow::metrics::{mmd_rbf, wasserstein2};
use rayflow::verify::run_verification;
use rayflow::Result;

#[derive(Parser)]
#[command(name = "rayflow", about = "Desk-scale diffusion distillation toolkit", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the numerical verification suite and print a pass/fail table.
    Verify {
        /// Flat key=value config file (schedule.T, schedule.beta_min, schedule.beta_max).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Distill a student from the synthetic-mixture teacher.
    Distill {
        #[arg(long)]
        dataset: String,
        /// Solver steps for teacher-pair construction.
        #[arg(long, default_value_t = 32)]
        steps: usize,
        #[arg(long, default_value_t = 0.3)]
        sigma: f64,
        #[arg(long, default_value_t = 150)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        t_steps: usize,
        #[arg(long, default_value_t = 256)]
        pairs: usize,
        #[arg(long)]
        no_time_sampler: bool,
        /// Output directory for checkpoint.json and train_log.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw samples from a trained checkpoint.
    Sample {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 512)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV, one row per point.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare estimator variance under uniform vs optimal timestep sampling.
    BenchTimeSampler {
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate every checkpoint under a runs directory and emit a JSON report.
    Report {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct TrainLogDump {
    schema_version: u32,
    epochs: Vec<EpochDump>,
}

#[derive(Serialize)]
struct EpochDump {
    epoch: usize,
    mean_loss: f64,
    t_histogram: Vec<u32>,
}

#[derive(Serialize)]
struct EvalReport {
    schema_version: u32,
    rows: Vec<BenchRow>,
}

fn write_parented(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

fn cmd_verify(config: Option<PathBuf>, json: Option<PathBuf>) -> Result<bool> {
    let cfg = match config {
        Some(path) => Config::load(&path)?,
        None => Config::default(),
    };
    let report = run_verification(&cfg);
    print!("{}", report.table());
    if let Some(path) = json {
        write_parented(&path, &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(report.overall_pass)
}

#[allow(clippy::too_many_arguments)]
fn cmd_distill(
    dataset: String,
    steps: usize,
    sigma: f64,
    epochs: usize,
    seed: u64,
    t_steps: usize,
    pairs: usize,
    no_time_sampler: bool,
    out: PathBuf,
) -> Result<()> {
    let opts = PipelineOptions {
        dataset,
        t_steps,
        steps_k: steps,
        sigma,
        epochs,
        seed,
        use_time_sampler: !no_time_sampler,
        pairs,
        ..PipelineOptions::default()
    };
    let (ckpt, logs) = distill_run(&opts)?;
    ckpt.save(&out.join("checkpoint.json"))?;
    let dump = TrainLogDump {
        schema_version: 1,
        epochs: logs
            .iter()
            .map(|l| EpochDump {
                epoch: l.epoch,
                mean_loss: l.mean_loss,
                t_histogram: l.t_histogram.clone(),
            })
            .collect(),
    };
    write_parented(&out.join("train_log.json"), &serde_json::to_string_pretty(&dump)?)?;
    if let Some(last) = logs.last() {
        println!("final mean loss: {}", format_sig9(last.mean_loss));
    }
    println!("checkpoint written to {}", out.join("checkpoint.json").display());
    Ok(())
}

fn cmd_sample(ckpt: PathBuf, k: usize, count: usize, seed: u64, out: PathBuf) -> Result<()> {
    let ckpt = Checkpoint::load(&ckpt)?;
    let cloud = sample_from_checkpoint(&ckpt, k, count, seed)?;
    let dim = cloud.first().map(Vec::len).unwrap_or(0);
    let header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    let mut csv = header.join(",");
    csv.push('\n');
    for p in &cloud {
        let row: Vec<String> = p.iter().map(|v| format_sig9(*v)).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    write_parented(&out, &csv)?;
    println!("{count} samples written to {}", out.display());
    Ok(())
}

fn cmd_report(runs: PathBuf, out: PathBuf) -> Result<()> {
    let mut rows = Vec::new();
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(&runs)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    dirs.sort();
    for dir in dirs {
        let path = dir.join("checkpoint.json");
        if !path.is_file() {
            continue;
        }
        let ckpt = Checkpoint::load(&path)?;
        let reference = gen_dataset(&ckpt.dataset, 512, ckpt.seed ^ 0x5245_46)?.points;
        for k in [1usize, 2, 4, 8] {
            let cloud = sample_from_checkpoint(&ckpt, k, reference.len(), ckpt.seed ^ 0x53_414d_50)?;
            rows.push(BenchRow {
                dataset: ckpt.dataset.clone(),
                k,
                time_sampler: true,
                seed: ckpt.seed,
                w2: wasserstein2(&cloud, &reference)?,
                mmd: mmd_rbf(&cloud, &reference),
            });
        }
    }
    let report = EvalReport {
        schema_version: 1,
        rows,
    };
    write_parented(&out, &serde_json::to_string_pretty(&report)?)?;
    println!("report written to {}", out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Verify { config, json } => cmd_verify(config, json),
        Cmd::Distill {
            dataset,
            steps,
            sigma,
            epochs,
            seed,
            t_steps,
            pairs,
            no_time_sampler,
            out,
        } => {
            cmd_distill(
                dataset, steps, sigma, epochs, seed, t_steps, pairs, no_time_sampler, out,
            )?;
            Ok(true)
        }
        Cmd::Sample {
            ckpt,
            k,
            count,
            seed,
            out,
        } => {
            cmd_sample(ckpt, k, count, seed, out)?;
            Ok(true)
        }
        Cmd::BenchTimeSampler {
            instances,
            seed,
            out,
        } => {
            let rows = bench_time_sampler(instances, seed)?;
            write_parented(&out, &ts_rows_to_csv(&rows))?;
            let wins = rows.iter().filter(|r| r.ratio <= 1.0).count();
            println!(
                "{}/{} instances with optimal-proposal variance <= uniform",
                wins,
                rows.len()
            );
            Ok(true)
        }
        Cmd::Report { runs, out } => {
            cmd_report(runs, out)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
