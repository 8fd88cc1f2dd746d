//! Trains the 40-64-64-20 network on clean profiles and reports the loss
//! curve and label closure.

use std::time::Instant;

use fringe::ann::{decode_argmax, decode_expectation, train, MlpNetwork, TrainConfig};
use fringe::dataset::{build_training_set, ThicknessGrid};
use fringe::optics::OpticalSetup;

fn main() -> fringe::Result<()> {
    let grid = ThicknessGrid::training();
    let ds = build_training_set(&OpticalSetup::default(), &grid)?;
    let cfg = TrainConfig::default();

    let start = Instant::now();
    let (net, history) = train(MlpNetwork::standard(1), &ds, &grid, &cfg)?;
    println!("{} epochs in {:.2} s", history.len(), start.elapsed().as_secs_f64());
    for epoch in [1, 10, 100, 1000, history.len()] {
        if let Some(loss) = history.get(epoch - 1) {
            println!("  epoch {epoch:>5}  mean MSE {loss:.3e}");
        }
    }

    let mut closed = 0;
    for r in &ds.records {
        let out = net.forward(r.features.as_slice())?;
        let (argmax, expect) = (decode_argmax(&out, &grid)?, decode_expectation(&out, &grid)?);
        closed += usize::from(argmax == r.thickness_nm);
        println!("  {:>5} nm -> argmax {argmax:>5} nm, expectation {expect:8.3} nm", r.thickness_nm);
    }
    println!("label closure {closed}/{}", ds.len());
    Ok(())
}
