//! `bipedsim`: run walking scenarios, compare runs, and render figures.
//!
//! Exit codes: 0 on success, 2 for configuration errors (bad file, bad
//! field, unknown scenario or layer name), 3 for a runtime fault in the
//! simulated plant or controllers (the message names the failing tick),
//! 1 for everything else.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use biped_core::config::{Config, ConfigError};
use biped_harness::metrics::{compare_runs, compute_metrics, render_comparison};
use biped_harness::plots::emit_plots;
use biped_harness::runner::{run_header, run_to_file, RunError};
use biped_harness::scenario::load_scenario_config;
use biped_harness::telemetry::CsvDoc;

#[derive(Parser)]
#[command(
    name = "bipedsim",
    version,
    about = "Bipedal walking simulation harness: scenario runs, run comparison, figures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config; writes telemetry CSV, metrics JSON, and figures
    Run {
        /// Scenario config file (TOML)
        config: PathBuf,
        /// Force a controller layer on: force, bump, orientation, zmp-com
        #[arg(long = "enable", value_name = "LAYER")]
        enable: Vec<String>,
        /// Force a controller layer off: force, bump, orientation, zmp-com
        #[arg(long = "disable", value_name = "LAYER")]
        disable: Vec<String>,
        /// Override the sensor-noise RNG seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare per-step and aggregate metrics of two telemetry files
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Also write the comparison as JSON
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Render the standard figures from a telemetry file
    Plot {
        csv: PathBuf,
        /// Second telemetry file drawn on the same axes (e.g. an ablation)
        #[arg(long, value_name = "CSV")]
        overlay: Option<PathBuf>,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

/// Print to stdout, exiting quietly when the reader has gone away (e.g. the
/// output is piped into `head`), instead of panicking on the broken pipe.
macro_rules! outln {
    ($($arg:tt)*) => {{
        let mut out = std::io::stdout();
        if writeln!(out, $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

fn set_layer(config: &mut Config, name: &str, value: bool) -> Result<(), ConfigError> {
    match name {
        "force" | "force_layer" => config.enables.force_layer = value,
        "bump" | "bump_layer" => config.enables.bump_layer = value,
        "orientation" => config.enables.orientation = value,
        "zmp-com" | "zmp_com" => config.enables.zmp_com = value,
        other => {
            return Err(ConfigError::Invalid {
                field: "layer".to_string(),
                message: format!(
                    "unknown layer `{other}` (expected force, bump, orientation, or zmp-com)"
                ),
            })
        }
    }
    Ok(())
}

fn cmd_run(
    config_path: PathBuf,
    enable: Vec<String>,
    disable: Vec<String>,
    seed: Option<u64>,
    out: PathBuf,
) -> Result<()> {
    let mut config = load_scenario_config(&config_path).map_err(anyhow::Error::new)?;
    for layer in &disable {
        set_layer(&mut config, layer, false).map_err(anyhow::Error::new)?;
    }
    for layer in &enable {
        set_layer(&mut config, layer, true).map_err(anyhow::Error::new)?;
    }
    if let Some(seed) = seed {
        config.run.seed = seed;
    }

    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let csv_path = out.join("telemetry.csv");
    let result = run_to_file(&config, &csv_path).map_err(anyhow::Error::new)?;

    let doc = CsvDoc::load(&csv_path)?;
    let metrics = compute_metrics(&doc)?;
    let metrics_path = out.join("metrics.json");
    fs::write(
        &metrics_path,
        serde_json::to_string_pretty(&metrics)? + "\n",
    )?;
    let figures = emit_plots(&doc, None, &out)?;

    let header = run_header(&config);
    outln!(
        "scenario {} seed {} layers {}",
        header.scenario, header.seed, header.layers
    );
    outln!(
        "simulated {} ticks in {:.2} s wall",
        result.ticks, result.wall_seconds
    );
    if let Some(v) = metrics.mean_forward_speed {
        outln!("mean forward speed {:.4} m/s", v);
    }
    if let Some(v) = metrics.zmp_tracking_rms {
        outln!("zmp tracking rms {:.4} m", v);
    }
    outln!("telemetry {}", csv_path.display());
    outln!("metrics   {}", metrics_path.display());
    for f in figures {
        outln!("figure    {}", f.display());
    }
    Ok(())
}

fn cmd_compare(a: PathBuf, b: PathBuf, json: Option<PathBuf>) -> Result<()> {
    let doc_a = CsvDoc::load(&a)?;
    let doc_b = CsvDoc::load(&b)?;
    let cmp = compare_runs(&doc_a, &doc_b)?;
    let mut out = std::io::stdout();
    if out.write_all(render_comparison(&cmp).as_bytes()).is_err() {
        std::process::exit(0);
    }
    if let Some(path) = json {
        fs::write(&path, serde_json::to_string_pretty(&cmp)? + "\n")?;
        outln!("comparison json {}", path.display());
    }
    Ok(())
}

fn cmd_plot(csv: PathBuf, overlay: Option<PathBuf>, out: PathBuf) -> Result<()> {
    let doc = CsvDoc::load(&csv)?;
    let overlay_doc = overlay.map(|p| CsvDoc::load(&p)).transpose()?;
    let figures = emit_plots(&doc, overlay_doc.as_ref(), &out)?;
    for f in figures {
        outln!("figure {}", f.display());
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            enable,
            disable,
            seed,
            out,
        } => cmd_run(config, enable, disable, seed, out),
        Command::Compare { a, b, json } => cmd_compare(a, b, json),
        Command::Plot { csv, overlay, out } => cmd_plot(csv, overlay, out),
    }
}

fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return 2;
        }
        if let Some(run_err) = cause.downcast_ref::<RunError>() {
            return match run_err {
                RunError::Io(_) => 1,
                _ => 3,
            };
        }
    }
    1
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(exit_code(&err));
        }
    }
}
