use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use paraling::commands::{cmd_attribution, cmd_experiment, cmd_extract, cmd_stats, cmd_synth, RunSummary};
use paraling::manifest::Strictness;
use paraling::RunConfig;
use paraling_core::ClassifierKind;

#[derive(Parser)]
#[command(name = "paraling", version, about = "Paralinguistic abusive speech detection toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the feature store from a manifest of WAV files.
    Extract(Flags),
    /// Train and score every train/test language condition.
    Experiment(Flags),
    /// Per-language Mann-Whitney tests and the important-feature summary.
    Stats(Flags),
    /// Permutation importance of the all-language model.
    Attribution(Flags),
    /// Write a seeded synthetic corpus and its manifest.
    Synth(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// Key-value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Feature store (default: <out>/features.csv).
    #[arg(long)]
    store: Option<PathBuf>,
    /// Model file for attribution (default: <out>/model_all.json).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, value_parser = ["forest", "logistic", "rf", "lr"])]
    classifier: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, conflicts_with = "lenient")]
    strict: bool,
    /// Skip bad manifest rows and failed recordings instead of aborting.
    #[arg(long)]
    lenient: bool,
    /// Worker threads (default: one per processor).
    #[arg(long)]
    workers: Option<usize>,
    /// Shuffles per feature for attribution.
    #[arg(long)]
    shuffles: Option<usize>,
    /// Languages for synth.
    #[arg(long)]
    languages: Option<usize>,
    /// Clips per language for synth.
    #[arg(long)]
    clips: Option<usize>,
}

impl Flags {
    fn resolve(self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(p) = &self.config {
            cfg.apply_file(p)?;
        }
        if let Some(v) = self.manifest {
            cfg.manifest = Some(v);
        }
        if let Some(v) = self.out {
            cfg.out = v;
        }
        if let Some(v) = self.store {
            cfg.store = Some(v);
        }
        if let Some(v) = self.model {
            cfg.model = Some(v);
        }
        if let Some(v) = self.classifier {
            cfg.classifier = v.parse::<ClassifierKind>().map_err(anyhow::Error::msg)?;
        }
        if let Some(v) = self.reps {
            cfg.reps = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if self.strict {
            cfg.mode = Strictness::Strict;
        }
        if self.lenient {
            cfg.mode = Strictness::Lenient;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if let Some(v) = self.shuffles {
            cfg.shuffles = v;
        }
        if let Some(v) = self.languages {
            cfg.synth_languages = v;
        }
        if let Some(v) = self.clips {
            cfg.synth_clips = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn report(summary: &RunSummary) {
    for n in &summary.notes {
        println!("{n}");
    }
    println!(
        "{}: {} artifact(s) in {} ({:.1} s)",
        summary.command,
        summary.artifacts.len(),
        summary.config.out.display(),
        summary.wall_time_s
    );
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract(f) => report(&cmd_extract(&f.resolve()?)?),
        Command::Experiment(f) => report(&cmd_experiment(&f.resolve()?)?.summary),
        Command::Stats(f) => report(&cmd_stats(&f.resolve()?)?.summary),
        Command::Attribution(f) => report(&cmd_attribution(&f.resolve()?)?.summary),
        Command::Synth(f) => report(&cmd_synth(&f.resolve()?)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
