//! Experiment runner for `meanfield-core`.
//!
//! `meanfield run <config>` loads a TOML (or JSON) experiment, checks the
//! memory estimate against the budget, runs the study and writes
//! `results.csv`, `results.json`, optional SVG charts and snapshots.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod run;
pub mod snapshot;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::cache::OperatorCache;
use crate::config::{ExperimentConfig, Source};
use crate::error::{exit, CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "meanfield", version, about = "Mean-field and fluctuation experiments for lattice bosons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment config, or a bundled preset by name.
    Run {
        config: String,
        /// Validate and print sizes and memory estimates; run nothing.
        #[arg(long)]
        check: bool,
        /// Worker threads for independent particle numbers.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        threads: u16,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List bundled presets, or print one.
    Presets {
        #[arg(long)]
        show: Option<String>,
    },
}

/// A file path, or a preset name when no such file exists.
pub fn resolve_source(arg: &str) -> CliResult<Source> {
    let path = Path::new(arg);
    if path.exists() {
        return Source::read(path);
    }
    let stem = arg.strip_suffix(".preset").unwrap_or(arg);
    match presets::find(stem) {
        Some(p) => Ok(p.source()),
        None => Err(CliError::Config {
            file: Some(path.to_path_buf()),
            location: None,
            message: "no such file or preset".into(),
        }),
    }
}

pub fn run_command(
    arg: &str,
    check: bool,
    threads: usize,
    out: Option<PathBuf>,
    stdout: &mut dyn std::io::Write,
) -> CliResult<()> {
    let source = resolve_source(arg)?;
    let cfg = source.load()?;
    let plan = run::plan(&cfg)?;
    if check {
        let _ = writeln!(stdout, "config ok: {} study, M = {}", cfg.study.name(), cfg.sites());
        let _ = write!(stdout, "{}", plan.describe(threads));
        return plan.check(threads);
    }
    plan.check(threads)?;
    let dir = out.or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("results"));
    let started = Instant::now();
    let cache = OperatorCache::new();
    let report = run::execute(&cfg, threads, &cache)?;
    let written = write_artifacts(&dir, &cfg, &report, threads, started.elapsed().as_secs_f64())?;
    for p in written {
        let _ = writeln!(stdout, "wrote {}", p.display());
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

/// Writes every artifact of a report and returns the paths.
pub fn write_artifacts(
    dir: &Path,
    cfg: &ExperimentConfig,
    report: &run::Report,
    threads: usize,
    seconds: f64,
) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let mut written = Vec::new();
    let csv_path = dir.join("results.csv");
    write_file(&csv_path, &output::csv(&report.rows))?;
    written.push(csv_path);
    for (name, chart) in &report.charts {
        let p = dir.join(format!("{name}.svg"));
        write_file(&p, &chart.render())?;
        written.push(p);
    }
    let mut snaps = Vec::new();
    if !report.snapshots.is_empty() {
        let sdir = dir.join("snapshots");
        fs::create_dir_all(&sdir).map_err(|e| CliError::io(format!("creating {}", sdir.display()), e))?;
        for s in &report.snapshots {
            let p = snapshot::write(&sdir, &s.stem, &s.header, &s.amplitudes)?;
            snaps.push(p.display().to_string());
            written.push(p);
        }
    }
    let timings: serde_json::Map<String, serde_json::Value> =
        report.timings.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let meta = json!({
        "versions": { "meanfield-cli": env!("CARGO_PKG_VERSION"), "meanfield-core": meanfield_core::VERSION },
        "study": cfg.study.name(),
        "config": cfg,
        "threads": threads,
        "timings_s": timings,
        "total_s": seconds,
        "summary": report.summary,
        "rows": report.rows.len(),
        "charts": report.charts.iter().map(|(n, _)| format!("{n}.svg")).collect::<Vec<_>>(),
        "snapshots": snaps,
    });
    let json_path = dir.join("results.json");
    write_file(&json_path, &(serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n"))?;
    written.insert(1, json_path);
    Ok(written)
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with(args: impl IntoIterator<Item = String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::CONFIG } else { exit::OK };
        }
    };
    let mut stdout = std::io::stdout();
    let result = match cli.command {
        Command::Presets { show: None } => {
            print!("{}", presets::listing());
            Ok(())
        }
        Command::Presets { show: Some(name) } => match presets::find(&name) {
            Some(p) => {
                print!("{}", p.text);
                Ok(())
            }
            None => Err(CliError::config(format!("unknown preset {name:?}"))),
        },
        Command::Run { config, check, threads, out } => run_command(&config, check, threads as usize, out, &mut stdout),
    };
    match result {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
