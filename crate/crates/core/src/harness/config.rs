//! Run configuration in a flat `key = value` text format.
//!
//! ```text
//! # comment
//! optics.wavelength_nm = 500
//! grid.train = 10:10:200
//! detector.bit_depth = 8,10
//! noise.seed = 42
//! ```
//!
//! Later assignments win. The command line applies, lowest priority first:
//! built-in defaults, `FRINGE_SEED`, the config file, then flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ann::{TrainConfig, ARCHITECTURE};
use crate::dataset::{DownsampleMode, GenerationOptions, ThicknessGrid};
use crate::detector::DetectorModel;
use crate::error::{Error, Result};
use crate::optics::{OpticalSetup, NM_PER_M};

/// Environment variable read as the seed for every random stream.
pub const SEED_ENV: &str = "FRINGE_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticsParams {
    pub wavelength_nm: f64,
    pub wavefront_radius_cm: f64,
    pub pitch_wavelengths: f64,
    pub pixel_count: usize,
}

impl Default for OpticsParams {
    fn default() -> Self {
        Self {
            wavelength_nm: 500.0,
            wavefront_radius_cm: 5.0,
            pitch_wavelengths: 4.0,
            pixel_count: 1000,
        }
    }
}

impl OpticsParams {
    pub fn setup(&self) -> Result<OpticalSetup> {
        OpticalSetup::with_pitch_in_wavelengths(
            self.wavelength_nm / NM_PER_M,
            self.wavefront_radius_cm * 1e-2,
            self.pitch_wavelengths,
            self.pixel_count,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub optics: OpticsParams,
    pub train_grid: ThicknessGrid,
    pub test_grid: ThicknessGrid,
    /// One test set and report per entry.
    pub bit_depths: Vec<u32>,
    pub noise_seed: u64,
    pub init_seed: u64,
    pub train: TrainConfig,
    pub generation: GenerationOptions,
    /// Train on noisy profiles (first detector, `noise_seed + 1`) instead of clean ones.
    pub train_noisy: bool,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            optics: OpticsParams::default(),
            train_grid: ThicknessGrid::training(),
            test_grid: ThicknessGrid::test(),
            bit_depths: vec![8, 10],
            noise_seed: 42,
            init_seed: 1,
            train: TrainConfig::default(),
            generation: GenerationOptions::default(),
            train_noisy: false,
            output_dir: PathBuf::from("run"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("`{value}` is not a valid value for {key}"))
}

fn parse_bool(key: &str, value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("`{value}` is not a boolean for {key}")),
    }
}

impl RunConfig {
    /// Defaults with `FRINGE_SEED` applied when set.
    pub fn from_env() -> Result<Self> {
        let mut cfg = Self::default();
        if let Ok(v) = std::env::var(SEED_ENV) {
            let seed = v.trim().parse().map_err(|_| {
                Error::Validation(format!("{SEED_ENV}=`{v}` is not an unsigned 64-bit integer"))
            })?;
            cfg.set_all_seeds(seed);
        }
        Ok(cfg)
    }

    pub fn set_all_seeds(&mut self, seed: u64) {
        self.noise_seed = seed;
        self.init_seed = seed;
        self.train.seed = seed;
    }

    /// Assigns one key.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        match key {
            "optics.wavelength_nm" => self.optics.wavelength_nm = parse(key, v)?,
            "optics.wavefront_radius_cm" => self.optics.wavefront_radius_cm = parse(key, v)?,
            "optics.pixel_pitch_wavelengths" => self.optics.pitch_wavelengths = parse(key, v)?,
            "optics.pixel_count" => self.optics.pixel_count = parse(key, v)?,
            "grid.train" => self.train_grid = v.parse().map_err(|e: Error| e.to_string())?,
            "grid.test" => self.test_grid = v.parse().map_err(|e: Error| e.to_string())?,
            "detector.bit_depth" => {
                self.bit_depths = v
                    .split(',')
                    .map(|b| parse::<u32>(key, b.trim()))
                    .collect::<std::result::Result<_, _>>()?
            }
            "detector.clamp" => self.generation.clamp = parse_bool(key, v)?,
            "noise.seed" => self.noise_seed = parse(key, v)?,
            "noise.realizations" => self.generation.realizations = parse(key, v)?,
            "dataset.downsample" => {
                self.generation.downsample = v.parse::<DownsampleMode>().map_err(|e| e.to_string())?
            }
            "dataset.train_noisy" => self.train_noisy = parse_bool(key, v)?,
            "net.init_seed" => self.init_seed = parse(key, v)?,
            "train.learning_rate" => self.train.learning_rate = parse(key, v)?,
            "train.max_epochs" => self.train.max_epochs = parse(key, v)?,
            "train.target_mse" => self.train.target_mse = parse(key, v)?,
            "train.seed" => self.train.seed = parse(key, v)?,
            "train.shuffle" => self.train.shuffle = parse_bool(key, v)?,
            "output.dir" => self.output_dir = PathBuf::from(v),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Applies every assignment in `text` on top of `self`.
    pub fn apply_str(&mut self, text: &str, origin: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |column: usize, message: String| Error::Parse {
                path: origin.to_path_buf(),
                line: i as u64 + 1,
                column,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(1, format!("expected `key = value`, found `{line}`")))?;
            let column = raw.find('=').map_or(1, |c| c + 2);
            self.set(key.trim(), value).map_err(|m| err(column, m))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_str(&text, path)
    }

    /// Checks every component invariant.
    pub fn validate(&self) -> Result<()> {
        self.optics.setup()?;
        self.train.validate()?;
        if self.train_grid.count() != ARCHITECTURE[ARCHITECTURE.len() - 1] {
            return Err(Error::Validation(format!(
                "grid.train has {} classes but the network has {} outputs",
                self.train_grid.count(),
                ARCHITECTURE[ARCHITECTURE.len() - 1]
            )));
        }
        if self.bit_depths.is_empty() {
            return Err(Error::Validation("detector.bit_depth lists no detectors".into()));
        }
        for &b in &self.bit_depths {
            DetectorModel::new(b)?;
        }
        if self.generation.realizations == 0 {
            return Err(Error::Validation("noise.realizations must be at least 1".into()));
        }
        Ok(())
    }

    pub fn detectors(&self) -> Result<Vec<DetectorModel>> {
        self.bit_depths.iter().map(|&b| DetectorModel::new(b)).collect()
    }

    /// Every key with its current value, excluding `output.dir`, in the text
    /// format accepted by [`RunConfig::apply_str`].
    pub fn echo(&self) -> BTreeMap<String, String> {
        let depths: Vec<String> = self.bit_depths.iter().map(u32::to_string).collect();
        [
            ("optics.wavelength_nm", self.optics.wavelength_nm.to_string()),
            ("optics.wavefront_radius_cm", self.optics.wavefront_radius_cm.to_string()),
            ("optics.pixel_pitch_wavelengths", self.optics.pitch_wavelengths.to_string()),
            ("optics.pixel_count", self.optics.pixel_count.to_string()),
            ("grid.train", self.train_grid.to_string()),
            ("grid.test", self.test_grid.to_string()),
            ("detector.bit_depth", depths.join(",")),
            ("detector.clamp", self.generation.clamp.to_string()),
            ("noise.seed", self.noise_seed.to_string()),
            ("noise.realizations", self.generation.realizations.to_string()),
            ("dataset.downsample", self.generation.downsample.to_string()),
            ("dataset.train_noisy", self.train_noisy.to_string()),
            ("net.init_seed", self.init_seed.to_string()),
            ("train.learning_rate", self.train.learning_rate.to_string()),
            ("train.max_epochs", self.train.max_epochs.to_string()),
            ("train.target_mse", self.train.target_mse.to_string()),
            ("train.seed", self.train.seed.to_string()),
            ("train.shuffle", self.train.shuffle.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_keys() {
        let text = "\
# experiment
optics.wavelength_nm = 500
grid.train = 10:10:200   # classes
grid.test = 5:5:200
detector.bit_depth = 10
noise.seed = 9
dataset.downsample = block
train.target_mse = 1e-4
";
        let mut cfg = RunConfig::default();
        cfg.apply_str(text, Path::new("t.cfg")).unwrap();
        assert_eq!(cfg.bit_depths, vec![10]);
        assert_eq!(cfg.noise_seed, 9);
        assert_eq!(cfg.generation.downsample, DownsampleMode::Block);
        assert_eq!(cfg.train.target_mse, 1e-4);
        cfg.validate().unwrap();
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.set_all_seeds(123);
        cfg.train.learning_rate = 0.05;
        let text: String = cfg.echo().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        let mut back = RunConfig { output_dir: cfg.output_dir.clone(), ..RunConfig::default() };
        back.apply_str(&text, Path::new("echo")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn errors_name_the_line() {
        let mut cfg = RunConfig::default();
        let e = cfg.apply_str("noise.seed = 1\nbogus.key = 3\n", Path::new("c")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = cfg.apply_str("train.max_epochs = many\n", Path::new("c")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = cfg.apply_str("no equals sign\n", Path::new("c")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, column: 1, .. }));
    }

    #[test]
    fn validation() {
        let cfg = RunConfig { bit_depths: vec![], ..RunConfig::default() };
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.optics.wavefront_radius_cm = 0.1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn seed_override_covers_all_streams() {
        let mut cfg = RunConfig::default();
        cfg.set_all_seeds(5);
        assert_eq!((cfg.noise_seed, cfg.init_seed, cfg.train.seed), (5, 5, 5));
    }
}
