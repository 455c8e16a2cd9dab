use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use beamprint::dtree::TreeConfig;
use beamprint::eval::{EvalReport, SplitTag};
use beamprint::features::{extract_all, FeatureConfig};
use beamprint::fingerprint::{self, build_dataset_with, DatasetOptions};
use beamprint::mlp::{Activation, MlpConfig};
use beamprint::pipeline::{
    self, evaluate_model, infer_lines, run_experiment, split_records, ExperimentSpec, ModelFile, ModelSpec,
    SplitInfo,
};
use beamprint::scenario::{build_scenario, ScenarioConfig};
use beamprint::{Error, Result};

#[derive(Parser)]
#[command(name = "beamprint", version, about = "Beam-RSRP fingerprint positioning on synthetic mmWave scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Mlp,
    Tree,
}

#[derive(Clone, Copy, ValueEnum)]
enum Act {
    Tanh,
    Relu,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Train,
    Test,
}

#[derive(Subcommand)]
enum Command {
    /// Write the default scenario as an editable TOML file.
    GenerateScenario {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sample the scenario grid into a fingerprint dataset.
    BuildDataset {
        /// Scenario TOML; the default scenario when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Strongest beams kept per cell; 0 keeps every beam.
        #[arg(long, default_value_t = 4)]
        beams_per_cell: usize,
    },
    /// Train one model on the LoS records of a dataset.
    Train {
        #[arg(long, value_enum)]
        model: ModelKind,
        #[arg(long)]
        dataset: PathBuf,
        /// Feature config TOML (serving_beams, neighbor_beams, cell_id_feature).
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Train a cell-specific model for this serving cell.
        #[arg(long)]
        cell: Option<u32>,
        #[arg(long, default_value_t = 0.9)]
        train_fraction: f64,
        #[arg(long, default_value_t = 0)]
        split_seed: u64,
        /// Hidden layer widths, e.g. `64,64`.
        #[arg(long, value_delimiter = ',', default_value = "64")]
        hidden: Vec<usize>,
        #[arg(long, value_enum, default_value = "tanh")]
        activation: Act,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch_size: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long, default_value_t = 20)]
        patience: usize,
        #[arg(long, default_value_t = 1e-4)]
        min_delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        max_depth: usize,
        #[arg(long, default_value_t = 2)]
        min_samples_leaf: usize,
    },
    /// Evaluate a saved model on the split it was trained with.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: Which,
        /// Write the full report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the error CDF as CSV.
        #[arg(long)]
        cdf: Option<PathBuf>,
    },
    /// Run an experiment spec (feature x model grid) and write reports and a manifest.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        /// Override the spec's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate positions for JSON-lines measurement reports.
    Infer {
        #[arg(long)]
        model: PathBuf,
        /// Input file; stdin when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn print_summary(r: &EvalReport) {
    println!(
        "{:<5} n={:<6} mean={:.3} m  std={:.3} m  p50={:.3}  p80={:.3}  p90={:.3}  p95={:.3}",
        r.split.to_string(),
        r.n_samples,
        r.mean_error_m,
        r.std_error_m,
        r.percentile(50).unwrap_or(f64::NAN),
        r.percentile(80).unwrap_or(f64::NAN),
        r.percentile(90).unwrap_or(f64::NAN),
        r.percentile(95).unwrap_or(f64::NAN),
    );
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenerateScenario { out, seed } => {
            let mut cfg = ScenarioConfig::default();
            if let Some(s) = seed {
                cfg.rng_seed = s;
            }
            let scenario = build_scenario(cfg)?;
            scenario.config().save(&out)?;
            println!("{} cells, hash {}", scenario.cells().len(), scenario.hash());
        }
        Command::BuildDataset {
            scenario,
            out,
            seed,
            beams_per_cell,
        } => {
            let cfg = match scenario {
                Some(p) => ScenarioConfig::load(p)?,
                None => ScenarioConfig::default(),
            };
            let scenario = build_scenario(cfg)?;
            let options = DatasetOptions {
                seed,
                beams_per_cell: (beams_per_cell > 0).then_some(beams_per_cell),
            };
            let ds = build_dataset_with(&scenario, &options)?;
            fingerprint::save(&ds, &out)?;
            println!("{} records, LoS fraction {:.4}", ds.len(), ds.los_fraction());
        }
        Command::Train {
            model,
            dataset,
            features,
            out,
            cell,
            train_fraction,
            split_seed,
            hidden,
            activation,
            epochs,
            batch_size,
            lr,
            patience,
            min_delta,
            seed,
            max_depth,
            min_samples_leaf,
        } => {
            let text = std::fs::read_to_string(&features).map_err(|e| Error::Io {
                path: features.clone(),
                source: e,
            })?;
            let fc: FeatureConfig =
                toml::from_str(&text).map_err(|e| Error::Config(format!("feature config: {e}")))?;
            let spec = match model {
                ModelKind::Mlp => {
                    let mut c = MlpConfig {
                        hidden_layer_widths: hidden,
                        hidden_activation: match activation {
                            Act::Tanh => Activation::Tanh,
                            Act::Relu => Activation::Relu,
                        },
                        batch_size,
                        max_epochs: epochs,
                        patience,
                        min_delta,
                        rng_seed: seed,
                        ..MlpConfig::default()
                    };
                    c.adam.learning_rate = lr;
                    ModelSpec::Mlp(c)
                }
                ModelKind::Tree => ModelSpec::Tree(TreeConfig {
                    max_depth,
                    min_samples_leaf,
                    ..TreeConfig::default()
                }),
            };
            let ds = fingerprint::load(&dataset)?;
            let split = SplitInfo {
                train_fraction,
                seed: split_seed,
            };
            let run = pipeline::train_single(&ds, &fc, &spec, split, cell)?;
            run.model.save(&out)?;
            if let Some(t) = &run.training {
                println!(
                    "{} epochs, final loss {:.6}{}",
                    t.epochs_run,
                    t.final_loss,
                    if t.stopped_early { " (early stop)" } else { "" }
                );
            }
            print_summary(&run.train);
            print_summary(&run.test);
        }
        Command::Evaluate {
            model,
            dataset,
            split,
            report,
            cdf,
        } => {
            let file = ModelFile::load(&model)?;
            let ds = fingerprint::load(&dataset)?;
            if ds.scenario_hash != file.scenario_hash {
                return Err(Error::Validation(
                    "dataset and model come from different scenarios".into(),
                ));
            }
            let info = file
                .split
                .ok_or_else(|| Error::Validation("model file has no split information".into()))?;
            let (train, test) = split_records(&ds, info, file.cell)?;
            let (records, tag) = match split {
                Which::Train => (train, SplitTag::Train),
                Which::Test => (test, SplitTag::Test),
            };
            let ex = extract_all(&records, &file.features);
            if ex.vectors.is_empty() {
                return Err(Error::Data("no records carry the model's features".into()));
            }
            let descriptor = model.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let (r, _) = evaluate_model(&file.model, &ex.vectors, tag, &descriptor)?;
            print_summary(&r);
            if ex.skipped.total() > 0 {
                println!("skipped {} records lacking features", ex.skipped.total());
            }
            if let Some(p) = report {
                let mut w = create(&p)?;
                serde_json::to_writer_pretty(&mut w, &r).map_err(|e| Error::Data(e.to_string()))?;
                w.flush().map_err(|e| Error::Io { path: p, source: e })?;
            }
            if let Some(p) = cdf {
                std::fs::write(&p, r.cdf_csv()).map_err(|e| Error::Io { path: p, source: e })?;
            }
        }
        Command::Sweep { spec, out } => {
            let mut spec = ExperimentSpec::load(&spec)?;
            if let Some(o) = out {
                spec.output_dir = o;
            }
            let outcome = run_experiment(&spec)?;
            let tests: Vec<EvalReport> = outcome.reports.iter().map(|r| r.test.clone()).collect();
            match beamprint::eval::compare(&tests) {
                Ok(table) => print!("{table}"),
                Err(_) => print_summary(&tests[0]),
            }
            println!("wrote {}", spec.output_dir.join("manifest.json").display());
        }
        Command::Infer { model, input } => {
            let file = ModelFile::load(&model)?;
            let results = match input {
                Some(p) => {
                    let f = File::open(&p).map_err(|e| Error::Io { path: p, source: e })?;
                    infer_lines(&file, BufReader::new(f))
                }
                None => infer_lines(&file, io::stdin().lock()),
            };
            let stdout = io::stdout();
            let mut out = stdout.lock();
            for r in results {
                let [x, y] = r?;
                let line = serde_json::json!({ "x": x, "y": y });
                writeln!(out, "{line}").map_err(|e| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                })?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
