use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ann::{decode_argmax, decode_expectation, MlpNetwork};
use crate::dataset::{Dataset, Provenance, ThicknessGrid};
use crate::detector::DetectorModel;
use crate::error::{Error, Result};

/// Catalogue thickness next to both decoded estimates, all in nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub catalogue_nm: f64,
    pub ann_nm_argmax: f64,
    pub ann_nm_expect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub records: Vec<EvalRecord>,
    /// `None` for clean inputs.
    pub detector: Option<DetectorModel>,
    pub rms_argmax: f64,
    pub rms_expect: f64,
    /// Argmax RMS over records whose catalogue value is a training class;
    /// `None` if there are no such records.
    pub rms_ongrid_argmax: Option<f64>,
}

/// Root mean square of `true - predicted`.
pub fn rms_error(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Empty("RMS of no pairs"));
    }
    let sq: f64 = pairs.iter().map(|(t, p)| (t - p).powi(2)).sum();
    Ok((sq / pairs.len() as f64).sqrt())
}

impl EvalReport {
    /// Builds a report and fills the RMS fields from `records`.
    pub fn from_records(
        records: Vec<EvalRecord>,
        detector: Option<DetectorModel>,
        grid: &ThicknessGrid,
    ) -> Result<Self> {
        let (rms_argmax, rms_expect, rms_ongrid_argmax) = Self::rms_triplet(&records, grid)?;
        Ok(Self {
            records,
            detector,
            rms_argmax,
            rms_expect,
            rms_ongrid_argmax,
        })
    }

    fn rms_triplet(records: &[EvalRecord], grid: &ThicknessGrid) -> Result<(f64, f64, Option<f64>)> {
        let argmax: Vec<_> = records.iter().map(|r| (r.catalogue_nm, r.ann_nm_argmax)).collect();
        let expect: Vec<_> = records.iter().map(|r| (r.catalogue_nm, r.ann_nm_expect)).collect();
        let ongrid: Vec<_> = argmax.iter().copied().filter(|(t, _)| grid.contains(*t)).collect();
        Ok((
            rms_error(&argmax)?,
            rms_error(&expect)?,
            (!ongrid.is_empty()).then(|| rms_error(&ongrid)).transpose()?,
        ))
    }

    /// Recomputes the RMS fields and checks them against the stored ones.
    pub fn verify(&self, grid: &ThicknessGrid) -> Result<()> {
        let (a, e, o) = Self::rms_triplet(&self.records, grid)?;
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12;
        let ongrid_ok = match (o, self.rms_ongrid_argmax) {
            (Some(x), Some(y)) => close(x, y),
            (None, None) => true,
            _ => false,
        };
        if close(a, self.rms_argmax) && close(e, self.rms_expect) && ongrid_ok {
            Ok(())
        } else {
            Err(Error::Validation("stored RMS values disagree with the records".into()))
        }
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("report serializes") + "\n";
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line() as u64,
            column: e.column(),
            message: e.to_string(),
        })
    }
}

/// Runs every test record through the network and decodes it both ways.
pub fn evaluate(net: &MlpNetwork, test_set: &Dataset, grid: &ThicknessGrid) -> Result<EvalReport> {
    if net.output_size() != grid.count() {
        return Err(Error::dimension("network outputs vs grid classes", grid.count(), net.output_size()));
    }
    let records = test_set
        .records
        .iter()
        .map(|r| {
            let out = net.forward(r.features.as_slice())?;
            Ok(EvalRecord {
                catalogue_nm: r.thickness_nm,
                ann_nm_argmax: decode_argmax(&out, grid)?,
                ann_nm_expect: decode_expectation(&out, grid)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let detector = match test_set.provenance {
        Provenance::Noisy { bit_depth, .. } => Some(DetectorModel::new(bit_depth)?),
        _ => None,
    };
    EvalReport::from_records(records, detector, grid)
}

/// Fraction of on-grid records whose argmax estimate equals the catalogue
/// value; `None` when no record lies on the grid.
pub fn argmax_accuracy(report: &EvalReport, grid: &ThicknessGrid) -> Option<f64> {
    let on_grid: Vec<_> = report.records.iter().filter(|r| grid.contains(r.catalogue_nm)).collect();
    if on_grid.is_empty() {
        return None;
    }
    let hits = on_grid
        .iter()
        .filter(|r| (r.catalogue_nm - r.ann_nm_argmax).abs() < 1e-9)
        .count();
    Some(hits as f64 / on_grid.len() as f64)
}
