use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use spectroforge::augment::PresetName;
use spectroforge::pipeline::{self, AugmentConfig, CorpusManifest, Status};

const JOBS_ENV: &str = "SPECTROFORGE_JOBS";

#[derive(Parser, Debug)]
#[command(
    name = "spectroforge",
    version,
    about = "Children-like spectral augmentation of speech features"
)]
struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    preset: Option<PresetName>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    copies: Option<usize>,
    /// Worker threads (default: $SPECTROFORGE_JOBS, else 1).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plain log-mel features for every WAV in a directory.
    Featurize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Augmented log-mel features for every WAV in a directory.
    Augment {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump every intermediate spectrum of one frame as JSON and CSV.
    Inspect {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        frame: usize,
        #[arg(long, default_value_t = 0)]
        copy: u64,
        /// Output directory for report.json and report.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Formant means of two corpora and their ratio, as CSV.
    FormantStats {
        #[arg(long = "in")]
        input: PathBuf,
        /// Corpus compared against `--in`.
        #[arg(long)]
        compare: PathBuf,
        /// CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve_config(cli: &Cli) -> Result<AugmentConfig> {
    let (mut config, file_sets_jobs) = match &cli.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            let sets_jobs = value.get("jobs").is_some();
            let config: AugmentConfig = serde_json::from_value(value)
                .with_context(|| format!("invalid config {}", path.display()))?;
            (config, sets_jobs)
        }
        None => (AugmentConfig::default(), false),
    };
    if let Some(p) = cli.preset {
        config.preset_name = p;
    }
    if let Some(s) = cli.seed {
        config.global_seed = s;
    }
    if let Some(c) = cli.copies {
        config.augment_copies = c;
    }
    if let Some(j) = cli.jobs {
        config.jobs = j;
    } else if !file_sets_jobs {
        if let Ok(v) = std::env::var(JOBS_ENV) {
            config.jobs = v
                .trim()
                .parse()
                .with_context(|| format!("{JOBS_ENV}={v:?} is not a worker count"))?;
        }
    }
    config.validate()?;
    Ok(config)
}

fn summarize(what: &str, manifest: &CorpusManifest, out: &Path) {
    eprintln!(
        "{what}: {} ok, {} skipped-degenerate, {} error; manifest at {}",
        manifest.count(Status::Ok),
        manifest.count(Status::SkippedDegenerate),
        manifest.count(Status::Error),
        out.join(pipeline::MANIFEST_FILE).display()
    );
    for e in manifest
        .entries
        .iter()
        .filter(|e| e.status == Status::Error)
    {
        eprintln!(
            "  {}: {}",
            e.audio_path,
            e.message.as_deref().unwrap_or("error")
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = resolve_config(&cli)?;
    match &cli.command {
        Command::Featurize { input, out } => {
            let manifest = pipeline::run_featurize(&config, input, out)?;
            summarize("featurize", &manifest, out);
        }
        Command::Augment { input, out } => {
            let manifest = pipeline::run_augment(&config, input, out)?;
            summarize("augment", &manifest, out);
        }
        Command::Inspect {
            input,
            frame,
            copy,
            out,
        } => {
            let report = pipeline::run_inspect(&config, input, *frame, *copy)?;
            fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
            fs::write(out.join("report.json"), report.to_json()? + "\n")?;
            report.write_csv(fs::File::create(out.join("report.csv"))?)?;
            eprintln!(
                "frame {} of {}: {} segments, degenerate={}",
                report.frame_index, report.source_id, report.segment_count, report.degenerate
            );
        }
        Command::FormantStats {
            input,
            compare,
            out,
        } => {
            let stats = pipeline::run_formant_stats(&config, input, compare)?;
            match out {
                Some(path) => stats.write_csv(fs::File::create(path)?)?,
                None => stats.write_csv(std::io::stdout().lock())?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // bad flags are a configuration error like any other; --help is not
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
