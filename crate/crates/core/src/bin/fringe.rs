//! Command-line front end. Exit codes: 0 success, 1 usage, 2 I/O,
//! 3 numeric or validation failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fringe::ann::{load_model, save_model, train, MlpNetwork};
use fringe::dataset::{
    build_noisy_training_set, build_test_set_with, build_training_set_with, load_dataset,
    save_dataset, DatasetKind, DownsampleMode, Provenance,
};
use fringe::detector::DetectorModel;
use fringe::harness::{emit_scatter, evaluate, run_pipeline, EvalReport, RunConfig};
use fringe::optics::{synthesize_profile, FilmThickness};
use fringe::Error;

#[derive(Parser)]
#[command(name = "fringe", version, about = "Thin-film thickness from simulated interference line profiles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand that reads a run configuration.
#[derive(clap::Args)]
struct Common {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for every random stream; overrides the config and FRINGE_SEED.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Write one noiseless line profile as `pixel,x_m,intensity` CSV.
    Synth {
        #[arg(long, allow_negative_numbers = true)]
        thickness_nm: f64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a training or test set.
    Dataset {
        #[arg(long, value_parser = ["train", "test"])]
        kind: String,
        /// Detector for test sets (and noisy training); defaults to the first configured.
        #[arg(long)]
        bit_depth: Option<u32>,
        #[arg(long)]
        realizations: Option<usize>,
        #[arg(long)]
        downsample: Option<DownsampleMode>,
        /// Cap Poisson counts at full scale.
        #[arg(long)]
        clamp: bool,
        /// Train on noisy profiles.
        #[arg(long)]
        noisy: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Train the network on a training-set CSV.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "model.txt")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a model on a test-set CSV and write `<out>.json/.csv/.svg`.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Detector the test set was generated with, for the report annotation.
        #[arg(long)]
        bit_depth: Option<u32>,
        #[arg(long, default_value = "eval")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Render a JSON evaluation report as scatter CSV and SVG.
    Plot {
        #[arg(long)]
        report: PathBuf,
        /// Output stem; defaults to the report path without extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the whole experiment.
    Run {
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common) -> fringe::Result<RunConfig> {
    let mut cfg = RunConfig::from_env()?;
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    if let Some(seed) = common.seed {
        cfg.set_all_seeds(seed);
    }
    Ok(cfg)
}

fn detector_for(cfg: &RunConfig, bit_depth: Option<u32>) -> fringe::Result<DetectorModel> {
    DetectorModel::new(bit_depth.unwrap_or(cfg.bit_depths[0]))
}

fn write_output(out: Option<&Path>, text: &str) -> fringe::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        }),
    }
}

fn execute(command: Command) -> fringe::Result<()> {
    match command {
        Command::Synth { thickness_nm, out, common } => {
            let cfg = load_config(&common)?;
            let setup = cfg.optics.setup()?;
            let profile = synthesize_profile(FilmThickness::from_nm(thickness_nm)?, &setup)?;
            let mut text = String::from("pixel,x_m,intensity\n");
            for (k, s) in profile.samples().iter().enumerate() {
                text.push_str(&format!("{k},{:.12e},{:.12e}\n", setup.pixel_x(k), s));
            }
            write_output(out.as_deref(), &text)
        }
        Command::Dataset {
            kind,
            bit_depth,
            realizations,
            downsample,
            clamp,
            noisy,
            out,
            common,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(r) = realizations {
                cfg.generation.realizations = r;
            }
            if let Some(d) = downsample {
                cfg.generation.downsample = d;
            }
            cfg.generation.clamp |= clamp;
            cfg.train_noisy |= noisy;
            let setup = cfg.optics.setup()?;
            let ds = match kind.parse::<DatasetKind>()? {
                DatasetKind::Train if cfg.train_noisy => build_noisy_training_set(
                    &setup,
                    &cfg.train_grid,
                    &detector_for(&cfg, bit_depth)?,
                    cfg.noise_seed.wrapping_add(1),
                    &cfg.generation,
                )?,
                DatasetKind::Train => build_training_set_with(&setup, &cfg.train_grid, cfg.generation.downsample)?,
                DatasetKind::Test => build_test_set_with(
                    &setup,
                    &cfg.test_grid,
                    &detector_for(&cfg, bit_depth)?,
                    cfg.noise_seed,
                    &cfg.generation,
                )?,
            };
            let path = out.unwrap_or_else(|| PathBuf::from(format!("{kind}.csv")));
            save_dataset(&ds, &path)?;
            eprintln!("wrote {} records to {}", ds.len(), path.display());
            Ok(())
        }
        Command::Train { data, out, common } => {
            let cfg = load_config(&common)?;
            cfg.validate()?;
            let ds = load_dataset(&data, DatasetKind::Train)?;
            let net = MlpNetwork::standard(cfg.init_seed);
            let (net, history) = train(net, &ds, &cfg.train_grid, &cfg.train)?;
            save_model(&net, &out)?;
            let last = history.last().copied().unwrap_or(f64::NAN);
            eprintln!(
                "{} epochs, final mean MSE {last:.3e} ({}), model written to {}",
                history.len(),
                if last <= cfg.train.target_mse { "converged" } else { "target not reached" },
                out.display()
            );
            Ok(())
        }
        Command::Eval {
            model,
            data,
            bit_depth,
            out,
            common,
        } => {
            let cfg = load_config(&common)?;
            let net = load_model(&model)?;
            let mut ds = load_dataset(&data, DatasetKind::Test)?;
            if let Some(b) = bit_depth {
                DetectorModel::new(b)?;
                ds.provenance = Provenance::Noisy { bit_depth: b, seed: cfg.noise_seed };
            }
            let report = evaluate(&net, &ds, &cfg.train_grid)?;
            let mut json = out.clone().into_os_string();
            json.push(".json");
            report.save_json(&json)?;
            emit_scatter(&report, &out)?;
            println!(
                "records {}  rms_argmax {:.4} nm  rms_expect {:.4} nm  rms_ongrid_argmax {}",
                report.records.len(),
                report.rms_argmax,
                report.rms_expect,
                report.rms_ongrid_argmax.map_or("n/a".into(), |v| format!("{v:.4} nm"))
            );
            Ok(())
        }
        Command::Plot { report, out } => {
            let r = EvalReport::load_json(&report)?;
            let stem = out.unwrap_or_else(|| report.with_extension(""));
            let files = emit_scatter(&r, &stem)?;
            eprintln!("wrote {} and {}", files.csv.display(), files.svg.display());
            Ok(())
        }
        Command::Run { out, common } => {
            let mut cfg = load_config(&common)?;
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            let outcome = run_pipeline(&cfg)?;
            let m = &outcome.manifest;
            if let Some(t) = &m.training {
                println!(
                    "training: {} epochs, final MSE {:.3e}, label closure {}/{}",
                    t.epochs, t.final_mse, t.label_closure, t.records
                );
            }
            for d in &m.detectors {
                println!(
                    "{:>2}-bit  sigma {:.4}  rms argmax {:.3} nm  expect {:.3} nm  on-grid argmax {}",
                    d.bit_depth,
                    d.noise_figure,
                    d.rms_argmax_nm,
                    d.rms_expect_nm,
                    d.rms_ongrid_argmax_nm.map_or("n/a".into(), |v| format!("{v:.3} nm"))
                );
            }
            println!("artifacts in {}", outcome.output_dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
