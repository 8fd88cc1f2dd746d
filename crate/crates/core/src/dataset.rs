//! Training and test sets: thickness grids, reduction of a 1000-pixel line
//! profile to 40 network inputs, detector noise, and CSV persistence.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detector::{add_shot_noise_with, DetectorModel, RngState};
use crate::error::{Error, Result};
use crate::optics::{synthesize_profile, FilmThickness, LineProfile, OpticalSetup};

/// Number of network inputs per profile.
pub const FEATURE_COUNT: usize = 40;
/// Pixel count a profile must have to be reduced to [`FEATURE_COUNT`] features.
pub const PROFILE_PIXELS: usize = 1000;
const STRIDE: usize = PROFILE_PIXELS / FEATURE_COUNT;

/// Upper end of the working thickness range, nm.
pub const MAX_THICKNESS_NM: f64 = 200.0;
const GRID_SLACK: f64 = 1e-9;

/// Evenly spaced thicknesses `start, start + step, ...` in nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThicknessGrid {
    start: f64,
    step: f64,
    count: usize,
}

impl ThicknessGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !(start.is_finite() && start > 0.0) {
            return Err(Error::Validation(format!("grid start must be positive, got {start} nm")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Validation(format!("grid step must be positive, got {step} nm")));
        }
        if count == 0 {
            return Err(Error::Validation("grid must contain at least one thickness".into()));
        }
        let last = start + (count - 1) as f64 * step;
        if last > MAX_THICKNESS_NM + GRID_SLACK {
            return Err(Error::Validation(format!(
                "grid ends at {last} nm, beyond the {MAX_THICKNESS_NM} nm working range"
            )));
        }
        Ok(Self { start, step, count })
    }

    /// `{10, 20, ..., 200}` nm.
    pub fn training() -> Self {
        Self { start: 10.0, step: 10.0, count: 20 }
    }

    /// `{5, 10, ..., 200}` nm.
    pub fn test() -> Self {
        Self { start: 5.0, step: 5.0, count: 40 }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn value(&self, index: usize) -> f64 {
        self.start + index as f64 * self.step
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.value(i))
    }

    /// Index of the grid point equal to `nm`, if any.
    pub fn index_of(&self, nm: f64) -> Option<usize> {
        let i = ((nm - self.start) / self.step).round();
        if i < 0.0 || i >= self.count as f64 {
            return None;
        }
        let i = i as usize;
        ((self.value(i) - nm).abs() <= GRID_SLACK).then_some(i)
    }

    pub fn contains(&self, nm: f64) -> bool {
        self.index_of(nm).is_some()
    }
}

impl FromStr for ThicknessGrid {
    type Err = Error;

    /// Parses `start:step:stop` in nm, e.g. `10:10:200`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let [start, step, stop] = parts.as_slice() else {
            return Err(Error::Validation(format!(
                "grid `{s}` is not of the form start:step:stop"
            )));
        };
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Validation(format!("grid `{s}`: `{v}` is not a number")))
        };
        let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
        if !(step > 0.0) || stop < start {
            return Err(Error::Validation(format!("grid `{s}` is empty or has nonpositive step")));
        }
        let span = (stop - start) / step;
        let count = span.round();
        if (span - count).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "grid `{s}`: stop is not reachable from start in whole steps"
            )));
        }
        Self::new(start, step, count as usize + 1)
    }
}

impl fmt::Display for ThicknessGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.step, self.value(self.count - 1))
    }
}

/// Exactly [`FEATURE_COUNT`] network inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != FEATURE_COUNT {
            return Err(Error::dimension("feature vector", FEATURE_COUNT, values.len()));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// How the 1000 profile pixels are reduced to 40 features.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DownsampleMode {
    /// Pixels `0, 25, ..., 975`.
    #[default]
    Stride,
    /// Mean of each block of 25 consecutive pixels.
    Block,
    /// The first 40 pixels.
    Head,
}

impl FromStr for DownsampleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "stride" => Ok(Self::Stride),
            "block" => Ok(Self::Block),
            "head" => Ok(Self::Head),
            other => Err(Error::Validation(format!(
                "unknown downsample mode `{other}` (expected stride, block or head)"
            ))),
        }
    }
}

impl fmt::Display for DownsampleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Stride => "stride",
            Self::Block => "block",
            Self::Head => "head",
        })
    }
}

/// Stride-25 subsampling of a 1000-pixel profile.
pub fn downsample(profile: &LineProfile) -> Result<FeatureVector> {
    downsample_with(profile, DownsampleMode::Stride)
}

pub fn downsample_with(profile: &LineProfile, mode: DownsampleMode) -> Result<FeatureVector> {
    let s = profile.samples();
    if s.len() != PROFILE_PIXELS {
        return Err(Error::dimension("line profile", PROFILE_PIXELS, s.len()));
    }
    let values = match mode {
        DownsampleMode::Stride => s.iter().step_by(STRIDE).copied().collect(),
        DownsampleMode::Block => s
            .chunks(STRIDE)
            .map(|c| c.iter().sum::<f64>() / STRIDE as f64)
            .collect(),
        DownsampleMode::Head => s[..FEATURE_COUNT].to_vec(),
    };
    Ok(FeatureVector(values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Train,
    Test,
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "train" => Ok(Self::Train),
            "test" => Ok(Self::Test),
            other => Err(Error::Validation(format!("unknown dataset kind `{other}`"))),
        }
    }
}

/// Where the feature values came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "source")]
pub enum Provenance {
    Clean,
    Noisy { bit_depth: u32, seed: u64 },
    /// Read back from CSV, which does not carry generation metadata.
    File,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub thickness_nm: f64,
    pub features: FeatureVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub kind: DatasetKind,
    pub provenance: Provenance,
    pub records: Vec<Record>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Knobs for dataset generation beyond the setup and grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationOptions {
    pub downsample: DownsampleMode,
    pub clamp: bool,
    /// Noisy realizations per thickness.
    pub realizations: usize,
}

impl Default for GenerationOptions {
    fn default() -> Self {
        Self {
            downsample: DownsampleMode::Stride,
            clamp: false,
            realizations: 1,
        }
    }
}

fn clean_features(
    setup: &OpticalSetup,
    nm: f64,
    mode: DownsampleMode,
) -> Result<(LineProfile, FeatureVector)> {
    let t = FilmThickness::from_nm(nm)?;
    t.check_unambiguous(setup.wavelength())?;
    let profile = synthesize_profile(t, setup)?;
    let features = downsample_with(&profile, mode)?;
    Ok((profile, features))
}

/// One clean record per grid thickness.
pub fn build_training_set(setup: &OpticalSetup, grid: &ThicknessGrid) -> Result<Dataset> {
    build_training_set_with(setup, grid, DownsampleMode::Stride)
}

pub fn build_training_set_with(
    setup: &OpticalSetup,
    grid: &ThicknessGrid,
    mode: DownsampleMode,
) -> Result<Dataset> {
    let records = grid
        .values()
        .map(|nm| {
            clean_features(setup, nm, mode).map(|(_, features)| Record {
                thickness_nm: nm,
                features,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        kind: DatasetKind::Train,
        provenance: Provenance::Clean,
        records,
    })
}

fn noisy_records(
    setup: &OpticalSetup,
    grid: &ThicknessGrid,
    detector: &DetectorModel,
    seed: u64,
    opts: &GenerationOptions,
) -> Result<Vec<Record>> {
    if opts.realizations == 0 {
        return Err(Error::Validation("realizations must be at least 1".into()));
    }
    let clean = grid
        .values()
        .map(|nm| clean_features(setup, nm, opts.downsample).map(|(p, _)| (nm, p)))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::with_capacity(clean.len() * opts.realizations);
    for r in 0..opts.realizations {
        for (i, (nm, profile)) in clean.iter().enumerate() {
            let index = (r * clean.len() + i) as u64;
            let mut rng = RngState::substream(seed, index);
            let noisy = add_shot_noise_with(profile, detector, &mut rng, opts.clamp)?;
            records.push(Record {
                thickness_nm: *nm,
                features: downsample_with(&noisy, opts.downsample)?,
            });
        }
    }
    Ok(records)
}

/// One noisy record per grid thickness. Record `i` draws its noise from
/// substream `i` of `seed`.
pub fn build_test_set(
    setup: &OpticalSetup,
    grid: &ThicknessGrid,
    detector: &DetectorModel,
    seed: u64,
) -> Result<Dataset> {
    build_test_set_with(setup, grid, detector, seed, &GenerationOptions::default())
}

/// Noisy test set with `opts.realizations` passes over the grid. Record
/// `r * grid.count() + i` uses substream of the same index, so the first pass
/// equals the single-realization set.
pub fn build_test_set_with(
    setup: &OpticalSetup,
    grid: &ThicknessGrid,
    detector: &DetectorModel,
    seed: u64,
    opts: &GenerationOptions,
) -> Result<Dataset> {
    Ok(Dataset {
        kind: DatasetKind::Test,
        provenance: Provenance::Noisy {
            bit_depth: detector.bit_depth(),
            seed,
        },
        records: noisy_records(setup, grid, detector, seed, opts)?,
    })
}

/// Training set built from noisy profiles, `opts.realizations` per class.
/// Not used by the default experiment, which trains on clean profiles.
pub fn build_noisy_training_set(
    setup: &OpticalSetup,
    grid: &ThicknessGrid,
    detector: &DetectorModel,
    seed: u64,
    opts: &GenerationOptions,
) -> Result<Dataset> {
    Ok(Dataset {
        kind: DatasetKind::Train,
        provenance: Provenance::Noisy {
            bit_depth: detector.bit_depth(),
            seed,
        },
        records: noisy_records(setup, grid, detector, seed, opts)?,
    })
}

fn header() -> Vec<String> {
    std::iter::once("thickness_nm".to_string())
        .chain((0..FEATURE_COUNT).map(|j| format!("f{j:03}")))
        .collect()
}

/// Writes `thickness_nm,f000,...,f039` followed by one row per record.
/// Floats use the shortest decimal that parses back to the same value.
pub fn save_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<File>, line: String| {
        out.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))
    };
    write(&mut out, header().join(",") + "\n")?;
    for r in &ds.records {
        let mut line = r.thickness_nm.to_string();
        for v in r.features.as_slice() {
            line.push(',');
            line.push_str(&v.to_string());
        }
        line.push('\n');
        write(&mut out, line)?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads a CSV written by [`save_dataset`]. The file carries no generation
/// metadata, so the caller states the kind and provenance is [`Provenance::File`].
pub fn load_dataset(path: impl AsRef<Path>, kind: DatasetKind) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file);
    let parse_err = |line: u64, column: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message,
    };
    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => parse_err(line, 0, format!("{other:?}")),
        }
    };

    let mut rows = reader.records();
    let expected = header();
    match rows.next() {
        None => return Err(parse_err(1, 1, "missing header".into())),
        Some(row) => {
            let row = row.map_err(csv_err)?;
            if let Some(col) = (0..expected.len().max(row.len()))
                .find(|&i| row.get(i) != expected.get(i).map(String::as_str))
            {
                return Err(parse_err(
                    1,
                    col + 1,
                    format!(
                        "header mismatch: expected `{}`, found `{}`",
                        expected.get(col).map_or("<end of line>", String::as_str),
                        row.get(col).unwrap_or("<end of line>")
                    ),
                ));
            }
        }
    }

    let mut records = Vec::new();
    for row in rows {
        let row = row.map_err(csv_err)?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != FEATURE_COUNT + 1 {
            return Err(parse_err(
                line,
                row.len().min(FEATURE_COUNT + 1) + 1,
                format!(
                    "expected {} fields (thickness and {FEATURE_COUNT} features), found {}",
                    FEATURE_COUNT + 1,
                    row.len()
                ),
            ));
        }
        let mut values = Vec::with_capacity(FEATURE_COUNT + 1);
        for (col, field) in row.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(line, col + 1, format!("`{field}` is not a number")))?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(parse_err(line, col + 1, format!("`{field}` is not a finite nonnegative value")));
            }
            values.push(v);
        }
        let thickness_nm = values.remove(0);
        records.push(Record {
            thickness_nm,
            features: FeatureVector(values),
        });
    }
    Ok(Dataset {
        kind,
        provenance: Provenance::File,
        records,
    })
}
