use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mocap_har::evaluation::Scheme;
use mocap_har::{ingest, pipeline, synthgen, Error, ModelFile, PipelineConfig, SynthSpec};

#[derive(Parser)]
#[command(name = "mocap-har", version, about = "Activity recognition from motion-capture trials")]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic labeled dataset and its manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u16).range(2..))]
        subjects: u16,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u8).range(1..=10))]
        classes: u8,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u16).range(1..))]
        trials: u16,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Measurement noise, mm.
        #[arg(long, default_value_t = 2.0)]
        noise: f64,
        /// Per-subject tempo spread.
        #[arg(long, default_value_t = 0.15)]
        spread: f64,
        /// Nominal trial length, seconds.
        #[arg(long, default_value_t = 60.0)]
        duration: f64,
    },
    /// Fit selection and the ensemble on a labeled manifest.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        model_out: PathBuf,
    },
    /// Cross-validate the whole fitting procedure.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = ["kfold", "loso", "loto"])]
        scheme: Option<String>,
        #[arg(long)]
        report: PathBuf,
    },
    /// Label every trial of a manifest with a trained model.
    Predict {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: Option<&Path>) -> mocap_har::Result<PipelineConfig> {
    path.map_or_else(|| Ok(PipelineConfig::default()), PipelineConfig::load)
}

/// `model.model.json` → `model.leaderboard.csv`.
fn leaderboard_path(model_out: &Path) -> PathBuf {
    let name = model_out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = name
        .strip_suffix(".model.json")
        .or_else(|| name.strip_suffix(".json"))
        .unwrap_or(&name);
    model_out.with_file_name(format!("{stem}.leaderboard.csv"))
}

fn run(command: Command) -> mocap_har::Result<()> {
    match command {
        Command::Synth { out, subjects, classes, trials, seed, noise, spread, duration } => {
            let spec = SynthSpec {
                n_subjects: subjects as usize,
                n_classes: classes as usize,
                trials_per_class: trials as usize,
                duration_s: duration,
                subject_time_scale_spread: spread,
                noise_std_mm: noise,
                seed,
                ..SynthSpec::default()
            };
            let manifest = synthgen::generate_dataset(&spec, &out)?;
            println!("wrote {} trial files to {}", manifest.len(), out.display());
        }
        Command::Train { manifest, config, model_out } => {
            let config = load_config(config.as_deref())?;
            let manifest = ingest::load_manifest(&manifest)?;
            let model = pipeline::train(&manifest, &config)?;
            model.save(&model_out)?;
            let board = leaderboard_path(&model_out);
            pipeline::write_atomic(&board, model.leaderboard.to_csv().as_bytes())?;
            println!(
                "model {} ({} members), leaderboard {}",
                model_out.display(),
                model.ensemble.members.len(),
                board.display()
            );
        }
        Command::Evaluate { manifest, config, scheme, report } => {
            let config = load_config(config.as_deref())?;
            let scheme = match scheme {
                Some(s) => s.parse::<Scheme>()?,
                None => config.scheme,
            };
            let manifest = ingest::load_manifest(&manifest)?;
            let result = pipeline::evaluate(&manifest, &config, scheme)?;
            result.write(&report)?;
            print!("{scheme}: trial accuracy {:.4} over {} folds", result.pooled_accuracy, result.folds.len());
            if let Some(b) = result.baseline_pooled_accuracy {
                print!(", naive Bayes {b:.4}");
            }
            println!();
        }
        Command::Predict { manifest, model, out } => {
            let model = ModelFile::load(&model)?;
            let manifest = ingest::load_manifest(&manifest)?;
            let votes = model.predict_manifest(&manifest)?;
            pipeline::write_atomic(&out, pipeline::predictions_csv(&votes).as_bytes())?;
            println!("{} predictions written to {}", votes.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .parse_default_env()
        .init();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(4);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code() as u8
}
