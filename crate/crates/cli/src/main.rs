use std::path::{Path, PathBuf};
use std::process::ExitCode;

use affect_core::classify::ClassifierKind;
use affect_core::features::Scenario;
use affect_core::pipeline::{
    generate_synthetic_dataset, report_from_dir, run_experiment, validate_dataset, write_dataset, write_ground_truth,
    ExperimentConfig, SynthSpec,
};
use affect_core::Error;
use clap::{Parser, Subcommand};

const CONFIG_ERROR: u8 = 1;
const PARTIAL_FAILURE: u8 = 2;
const TOTAL_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "affect", version, about = "Single-trial valence/arousal classification from physiological signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a dataset matches the trial-file layout.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate a synthetic dataset with known ground truth.
    Synth {
        /// Generator settings; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment and write its result files.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Restrict to these scenarios, e.g. SCG+ADR (repeatable).
        #[arg(long)]
        scenario: Vec<String>,
        /// Restrict to these classifiers: NB, SVM, LR (repeatable).
        #[arg(long)]
        classifier: Vec<String>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Re-emit tables and matrices from a finished run directory.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

fn code_for(e: &Error) -> u8 {
    match e {
        Error::SubjectEval(_) | Error::EmptyDataset | Error::InsufficientSubjects(_) => TOTAL_FAILURE,
        _ => CONFIG_ERROR,
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, Error> {
    ExperimentConfig::load(path, seed)
}

fn parse_filter<T: std::str::FromStr<Err = Error>>(items: &[String]) -> Result<Option<Vec<T>>, Error> {
    if items.is_empty() {
        return Ok(None);
    }
    items
        .iter()
        .flat_map(|s| s.split(','))
        .map(|s| s.parse::<T>())
        .collect::<Result<Vec<T>, Error>>()
        .map(Some)
}

fn execute(command: Command) -> Result<u8, Error> {
    match command {
        Command::Validate { config, seed } => {
            let cfg = load_config(&config, seed.or(Some(0)))?;
            let root = cfg
                .dataset_path
                .clone()
                .ok_or_else(|| Error::Config("dataset.path is not set".into()))?;
            let problems = validate_dataset(&root, cfg.flavor, &cfg.required_channels()?)?;
            for p in &problems {
                println!("{p}");
            }
            println!("{}: schema ok, {} channel findings", root.display(), problems.len());
            Ok(0)
        }
        Command::Synth { config, seed, out } => {
            let spec = match config {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| Error::Io { path: p.clone(), source: e })?;
                    SynthSpec::parse(&text, &p)?
                }
                None => SynthSpec::default(),
            };
            let data = generate_synthetic_dataset(&spec, seed)?;
            write_dataset(&out, &data.trials)?;
            write_ground_truth(&out.join("ground_truth.tsv"), &data)?;
            let spec_path = out.join("synth.conf");
            std::fs::write(&spec_path, format!("# seed {seed}\n{}", spec.to_text()))
                .map_err(|e| Error::Io { path: spec_path, source: e })?;
            println!("wrote {} trials to {}", data.trials.len(), out.display());
            Ok(0)
        }
        Command::Run {
            config,
            seed,
            out,
            scenario,
            classifier,
            jobs,
        } => {
            let mut cfg = load_config(&config, seed)?;
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            if let Some(j) = jobs {
                cfg.jobs = j;
            }
            if let Some(s) = parse_filter::<Scenario>(&scenario)? {
                cfg.scenarios = s;
            }
            if let Some(c) = parse_filter::<ClassifierKind>(&classifier)? {
                cfg.classifiers = c;
            }
            cfg.validate()?;
            let result = run_experiment(&cfg)?;
            let (failed, total) = result.failure_counts();
            println!(
                "{} subjects, {} evaluations, {failed} failed; results in {}",
                result.subjects.len(),
                total,
                cfg.out_dir.display()
            );
            Ok(if failed > 0 { PARTIAL_FAILURE } else { 0 })
        }
        Command::Report { out } => {
            report_from_dir(&out)?;
            println!("tables re-emitted in {}", out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap's own usage-error code would collide with the partial-failure code
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { CONFIG_ERROR } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(code_for(&e))
        }
    }
}
