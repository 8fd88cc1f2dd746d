//! Builds the clean training set and a noisy test set, saves both as CSV and
//! reads them back.

use fringe::dataset::{
    build_test_set, build_training_set, load_dataset, save_dataset, DatasetKind, ThicknessGrid,
};
use fringe::detector::DetectorModel;
use fringe::optics::OpticalSetup;

fn main() -> fringe::Result<()> {
    let setup = OpticalSetup::default();
    let dir = std::env::temp_dir().join("fringe-datasets");
    std::fs::create_dir_all(&dir).map_err(|e| fringe::Error::Io { path: dir.clone(), source: e })?;

    let train = build_training_set(&setup, &ThicknessGrid::training())?;
    let test = build_test_set(&setup, &ThicknessGrid::test(), &DetectorModel::new(8)?, 42)?;
    let (train_path, test_path) = (dir.join("train.csv"), dir.join("test_8bit.csv"));
    save_dataset(&train, &train_path)?;
    save_dataset(&test, &test_path)?;

    let back = load_dataset(&test_path, DatasetKind::Test)?;
    assert_eq!(back.records, test.records);
    println!("train: {} records -> {}", train.len(), train_path.display());
    println!("test:  {} records -> {} (reloaded identically)", test.len(), test_path.display());

    let r = &test.records[3];
    let preview: Vec<String> = r.features.as_slice()[..6].iter().map(|v| format!("{v:.3}")).collect();
    println!("{} nm features start {}", r.thickness_nm, preview.join(" "));
    Ok(())
}
