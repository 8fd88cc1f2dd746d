//! Full experiment: clean training set, network training, one noisy test set
//! per detector, evaluation, scatter output and a run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use super::eval::{argmax_accuracy, evaluate, EvalReport};
use super::plot::emit_scatter;
use crate::ann::{save_model, train, MlpNetwork};
use crate::dataset::{
    build_noisy_training_set, build_test_set_with, build_training_set_with, save_dataset, Dataset,
};
use crate::error::{Error, Result};

/// RMS figure reported for the original experiment, nm. Kept for comparison
/// only; no readout here is expected to reproduce it exactly.
pub const REFERENCE_RMS_NM: f64 = 0.7;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MODEL_FILE: &str = "model.txt";
pub const TRAIN_FILE: &str = "train.csv";
pub const HISTORY_FILE: &str = "history.csv";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Seeds {
    pub noise: u64,
    pub init: u64,
    pub shuffle: u64,
    /// Only when training on noisy profiles.
    pub train_noise: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingSummary {
    pub epochs: usize,
    pub final_mse: f64,
    pub converged: bool,
    /// Clean training records classified as their own class by argmax.
    pub label_closure: usize,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorSummary {
    pub bit_depth: u32,
    pub g_max: u64,
    pub noise_figure: f64,
    pub records: usize,
    pub rms_argmax_nm: f64,
    pub rms_expect_nm: f64,
    pub rms_ongrid_argmax_nm: Option<f64>,
    /// Over the on-grid records only.
    pub argmax_accuracy: Option<f64>,
}

/// Absolute differences between the first two detector runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmsDifference {
    pub argmax_nm: f64,
    pub expect_nm: f64,
    pub ongrid_argmax_nm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub status: &'static str,
    pub error: Option<String>,
    pub completed_stages: Vec<String>,
    /// Files written into the output directory, in order.
    pub artifacts: Vec<String>,
    pub seeds: Seeds,
    pub config: BTreeMap<String, String>,
    pub training: Option<TrainingSummary>,
    pub detectors: Vec<DetectorSummary>,
    pub rms_difference: Option<RmsDifference>,
    pub reference_rms_nm: f64,
}

impl Manifest {
    fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        fs::write(&path, text).map_err(|e| Error::io(path, e))
    }
}

/// Everything produced by a successful run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub network: MlpNetwork,
    pub history: Vec<f64>,
    pub reports: Vec<EvalReport>,
    pub output_dir: PathBuf,
}

struct Run<'a> {
    cfg: &'a RunConfig,
    dir: &'a Path,
    manifest: Manifest,
}

impl Run<'_> {
    fn artifact(&mut self, name: &str) -> PathBuf {
        self.manifest.artifacts.push(name.to_string());
        self.dir.join(name)
    }

    fn stage(&mut self, name: &str) {
        self.manifest.completed_stages.push(name.to_string());
    }

    fn execute(&mut self) -> Result<(MlpNetwork, Vec<f64>, Vec<EvalReport>)> {
        let cfg = self.cfg;
        let setup = cfg.optics.setup()?;
        let detectors = cfg.detectors()?;

        let clean = build_training_set_with(&setup, &cfg.train_grid, cfg.generation.downsample)?;
        let train_set = match self.manifest.seeds.train_noise {
            Some(seed) => build_noisy_training_set(&setup, &cfg.train_grid, &detectors[0], seed, &cfg.generation)?,
            None => clean.clone(),
        };
        save_dataset(&train_set, self.artifact(TRAIN_FILE))?;
        self.stage("training_set");

        let net = MlpNetwork::standard(cfg.init_seed);
        let (net, history) = train(net, &train_set, &cfg.train_grid, &cfg.train)?;
        save_model(&net, self.artifact(MODEL_FILE))?;
        let hist: String = std::iter::once("epoch,mean_mse\n".to_string())
            .chain(history.iter().enumerate().map(|(i, l)| format!("{},{l}\n", i + 1)))
            .collect();
        let hist_path = self.artifact(HISTORY_FILE);
        fs::write(&hist_path, hist).map_err(|e| Error::io(hist_path, e))?;
        let closure = evaluate(&net, &clean, &cfg.train_grid)?;
        let final_mse = *history.last().expect("training runs at least one epoch");
        self.manifest.training = Some(TrainingSummary {
            epochs: history.len(),
            final_mse,
            converged: final_mse <= cfg.train.target_mse,
            label_closure: (argmax_accuracy(&closure, &cfg.train_grid).unwrap_or(0.0) * clean.len() as f64).round() as usize,
            records: clean.len(),
        });
        self.stage("training");

        let mut reports = Vec::new();
        for det in &detectors {
            let bits = det.bit_depth();
            let test: Dataset = build_test_set_with(&setup, &cfg.test_grid, det, cfg.noise_seed, &cfg.generation)?;
            save_dataset(&test, self.artifact(&format!("test_{bits}bit.csv")))?;
            let report = evaluate(&net, &test, &cfg.train_grid)?;
            report.save_json(self.artifact(&format!("eval_{bits}bit.json")))?;
            let stem = format!("eval_{bits}bit");
            self.manifest.artifacts.push(format!("{stem}.csv"));
            self.manifest.artifacts.push(format!("{stem}.svg"));
            emit_scatter(&report, self.dir.join(&stem))?;
            self.manifest.detectors.push(DetectorSummary {
                bit_depth: bits,
                g_max: det.g_max(),
                noise_figure: det.noise_figure(),
                records: report.records.len(),
                rms_argmax_nm: report.rms_argmax,
                rms_expect_nm: report.rms_expect,
                rms_ongrid_argmax_nm: report.rms_ongrid_argmax,
                argmax_accuracy: argmax_accuracy(&report, &cfg.train_grid),
            });
            self.stage(&format!("evaluation_{bits}bit"));
            reports.push(report);
        }

        if let [a, b, ..] = self.manifest.detectors.as_slice() {
            self.manifest.rms_difference = Some(RmsDifference {
                argmax_nm: (a.rms_argmax_nm - b.rms_argmax_nm).abs(),
                expect_nm: (a.rms_expect_nm - b.rms_expect_nm).abs(),
                ongrid_argmax_nm: a
                    .rms_ongrid_argmax_nm
                    .zip(b.rms_ongrid_argmax_nm)
                    .map(|(x, y)| (x - y).abs()),
            });
        }
        Ok((net, history, reports))
    }
}

/// Runs every stage in order and writes all artifacts into
/// `config.output_dir`. On failure the manifest is still written, with
/// `status = "failed"` and the stages and files completed so far.
pub fn run_pipeline(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let dir = config.output_dir.as_path();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut run = Run {
        cfg: config,
        dir,
        manifest: Manifest {
            status: "running",
            error: None,
            completed_stages: Vec::new(),
            artifacts: Vec::new(),
            seeds: Seeds {
                noise: config.noise_seed,
                init: config.init_seed,
                shuffle: config.train.seed,
                train_noise: config.train_noisy.then(|| config.noise_seed.wrapping_add(1)),
            },
            config: config.echo(),
            training: None,
            detectors: Vec::new(),
            rms_difference: None,
            reference_rms_nm: REFERENCE_RMS_NM,
        },
    };
    match run.execute() {
        Ok((network, history, reports)) => {
            run.manifest.status = "ok";
            run.manifest.write(dir)?;
            Ok(RunOutcome {
                manifest: run.manifest,
                network,
                history,
                reports,
                output_dir: dir.to_path_buf(),
            })
        }
        Err(e) => {
            run.manifest.status = "failed";
            run.manifest.error = Some(e.to_string());
            // the original error matters more than a failed manifest write
            let _ = run.manifest.write(dir);
            Err(e)
        }
    }
}
