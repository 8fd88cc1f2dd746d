//! Evaluates a trained network on noisy test sets and writes the scatter CSV,
//! SVG and JSON report for each detector.

use fringe::ann::{train, MlpNetwork, TrainConfig};
use fringe::dataset::{build_test_set, build_training_set, ThicknessGrid};
use fringe::detector::DetectorModel;
use fringe::harness::{argmax_accuracy, emit_scatter, evaluate};
use fringe::optics::OpticalSetup;

fn main() -> fringe::Result<()> {
    let setup = OpticalSetup::default();
    let grid = ThicknessGrid::training();
    let (net, _) = train(MlpNetwork::standard(1), &build_training_set(&setup, &grid)?, &grid, &TrainConfig::default())?;

    let dir = std::env::temp_dir().join("fringe-scatter");
    std::fs::create_dir_all(&dir).map_err(|e| fringe::Error::Io { path: dir.clone(), source: e })?;
    for bits in [8, 10] {
        let test = build_test_set(&setup, &ThicknessGrid::test(), &DetectorModel::new(bits)?, 42)?;
        let report = evaluate(&net, &test, &grid)?;
        let stem = dir.join(format!("eval_{bits}bit"));
        report.save_json(stem.with_extension("json"))?;
        let files = emit_scatter(&report, &stem)?;
        println!(
            "{bits:>2}-bit  RMS argmax {:.3} nm  expectation {:.3} nm  on-grid argmax {:.3} nm  on-grid accuracy {:.0}%  -> {}",
            report.rms_argmax,
            report.rms_expect,
            report.rms_ongrid_argmax.unwrap_or(f64::NAN),
            100.0 * argmax_accuracy(&report, &grid).unwrap_or(f64::NAN),
            files.svg.display()
        );
    }
    Ok(())
}
