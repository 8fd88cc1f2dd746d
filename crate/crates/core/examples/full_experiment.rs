//! Runs the whole experiment from a config and prints the manifest summary.
//!
//! ```text
//! cargo run --release --example full_experiment -- [output-dir] [config-file]
//! ```

use std::path::PathBuf;

use fringe::harness::{run_pipeline, RunConfig};

fn main() -> fringe::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = RunConfig::from_env()?;
    cfg.output_dir = args.next().map_or_else(|| std::env::temp_dir().join("fringe-run"), PathBuf::from);
    if let Some(path) = args.next() {
        cfg.apply_file(path)?;
    }

    let outcome = run_pipeline(&cfg)?;
    let m = &outcome.manifest;
    if let Some(t) = &m.training {
        println!("trained {} epochs to MSE {:.2e}, closure {}/{}", t.epochs, t.final_mse, t.label_closure, t.records);
    }
    for d in &m.detectors {
        println!(
            "{:>2}-bit  argmax {:.3} nm  expectation {:.3} nm  on-grid {:?}",
            d.bit_depth, d.rms_argmax_nm, d.rms_expect_nm, d.rms_ongrid_argmax_nm
        );
    }
    if let Some(diff) = &m.rms_difference {
        println!("detector RMS differences: argmax {:.3} nm, expectation {:.3} nm", diff.argmax_nm, diff.expect_nm);
    }
    println!("reference RMS {} nm; {} artifacts in {}", m.reference_rms_nm, m.artifacts.len(), outcome.output_dir.display());
    Ok(())
}
