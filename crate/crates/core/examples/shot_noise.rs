//! Adds detector shot noise to a profile and checks the measured spread
//! against `1 / sqrt(G_max)`.

use fringe::detector::{add_shot_noise, snr, DetectorModel, RngState};
use fringe::optics::{synthesize_profile, FilmThickness, LineProfile, OpticalSetup};

fn main() -> fringe::Result<()> {
    let setup = OpticalSetup::default();
    let clean = synthesize_profile(FilmThickness::from_nm(40.0)?, &setup)?;
    for bits in [8, 10, 12] {
        let det = DetectorModel::new(bits)?;
        let mut rng = RngState::new(42);
        let noisy = add_shot_noise(&clean, &det, &mut rng)?;
        let rms = (clean
            .samples()
            .iter()
            .zip(noisy.samples())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / clean.len() as f64)
            .sqrt();

        let full = LineProfile::new(FilmThickness::from_nm(0.0)?, vec![1.0; 100_000])?;
        let draws = add_shot_noise(&full, &det, &mut rng)?;
        let mean = draws.samples().iter().sum::<f64>() / draws.len() as f64;
        let sigma = (draws.samples().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / draws.len() as f64).sqrt();

        println!(
            "{bits:>2}-bit  G_max {:>4}  predicted sigma {:.4}  measured at full scale {sigma:.4}  profile RMS change {rms:.4}",
            det.g_max(),
            snr(&det)
        );
    }
    Ok(())
}
