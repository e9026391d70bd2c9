//! `specdet` command line: the five pipeline stages plus report rendering.

use clap::{Parser, Subcommand};
use specdet::config::ExperimentConfig;
use specdet::noise::ProfileKind;
use specdet::{pipeline, report};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "specdet", version, about = "Spectator-qubit noise detection pipeline")]
struct Cli {
    /// Master seed; every stage derives its own stream from it.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// TOML config file; omitted fields fall back to full-scale defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Shrink the expensive knobs to the laptop-scale preset.
    #[arg(long, global = true)]
    desk_scale: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a Monte Carlo characterization dataset for one noise profile.
    Characterize {
        #[arg(long)]
        profile: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the graybox model on a persisted dataset.
    TrainGraybox {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Find the pulse that best separates the trained models.
    OptimizePulse {
        /// Graybox model directories, one per profile in the scenario.
        #[arg(long, num_args = 1.., required = true)]
        models: Vec<PathBuf>,
        #[arg(long)]
        scenario: u8,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the dithered MLP on model predictions under the pulse.
    TrainClassifier {
        #[arg(long, num_args = 1.., required = true)]
        models: Vec<PathBuf>,
        #[arg(long)]
        pulse: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the periodic detection harness and write the confusion CSV.
    RunTest {
        #[arg(long)]
        pulse: PathBuf,
        #[arg(long)]
        clf: PathBuf,
        /// Profile ids in classifier class order, e.g. N0 N1 N2 N3 N4.
        #[arg(long, num_args = 1.., required = true)]
        profiles: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Accept artifacts whose config hash differs from the active config.
        #[arg(long)]
        force: bool,
    },
    /// Render heatmaps and training curves from artifacts.
    Report {
        /// Confusion CSVs, graybox dirs, or pulse dirs.
        #[arg(long = "in", num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(cli: &Cli) -> specdet::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if cli.desk_scale {
        cfg = cfg.desk_scaled();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_profiles(names: &[String]) -> specdet::Result<Vec<ProfileKind>> {
    names.iter().map(|n| n.parse()).collect()
}

fn run(cli: &Cli) -> specdet::Result<()> {
    match &cli.command {
        Command::Characterize { profile, out } => {
            let cfg = load_config(cli)?;
            pipeline::characterize(&cfg, profile.parse()?, cli.seed, out)
        }
        Command::TrainGraybox { dataset, out } => {
            let cfg = load_config(cli)?;
            pipeline::train_graybox(&cfg, dataset, cli.seed, out)
        }
        Command::OptimizePulse {
            models,
            scenario,
            out,
        } => {
            let cfg = load_config(cli)?;
            pipeline::optimize_pulse(&cfg, models, *scenario, cli.seed, out)
        }
        Command::TrainClassifier { models, pulse, out } => {
            let cfg = load_config(cli)?;
            pipeline::train_classifier_stage(&cfg, models, pulse, cli.seed, out)
        }
        Command::RunTest {
            pulse,
            clf,
            profiles,
            out,
            force,
        } => {
            let cfg = load_config(cli)?;
            let kinds = parse_profiles(profiles)?;
            let cm = pipeline::run_test_stage(&cfg, pulse, clf, &kinds, cli.seed, *force, out)?;
            let summary = harness_summary(&cm);
            println!("{summary}");
            Ok(())
        }
        Command::Report { inputs, out } => report::report(inputs, out),
    }
}

fn harness_summary(cm: &specdet::harness::ConfusionMatrix) -> String {
    let pct = cm.percentages();
    let per: Vec<String> = cm
        .labels
        .iter()
        .enumerate()
        .map(|(i, l)| format!("{l}={:.1}%", pct[i][i]))
        .collect();
    format!(
        "mean diagonal {:.1}% ({})",
        cm.mean_diagonal(),
        per.join(", ")
    )
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
