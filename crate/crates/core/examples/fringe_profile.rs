//! Synthesizes line profiles and compares the operative phase model with the
//! thickness-folded exact model.
//!
//! ```text
//! cargo run --example fringe_profile -- 62.5
//! ```

use fringe::optics::{
    aligned_exact_phase, exact_phase, fringe_intensity, sagittal_phase, synthesize_profile,
    thickness_phase, FilmThickness, OpticalSetup,
};

fn main() -> fringe::Result<()> {
    let nm: f64 = std::env::args().nth(1).map_or(Ok(100.0), |a| a.parse()).unwrap_or(100.0);
    let setup = OpticalSetup::default();
    let t = FilmThickness::from_nm(nm)?;
    let profile = synthesize_profile(t, &setup)?;

    println!("T = {nm} nm, {} pixels at {:.1} um pitch", profile.len(), setup.pixel_pitch() * 1e6);
    println!("center intensity {:.6}", profile.samples()[0]);
    let dark: Vec<usize> = (1..profile.len() - 1)
        .filter(|&k| {
            let s = profile.samples();
            s[k] < s[k - 1] && s[k] <= s[k + 1]
        })
        .take(5)
        .collect();
    println!("first dark pixels {dark:?}");

    let mut worst = (0.0f64, 0);
    for k in 0..setup.pixel_count() {
        let x = setup.pixel_x(k);
        let approx = sagittal_phase(x, 0.0, &setup)? - thickness_phase(t, setup.wavelength());
        let aligned = aligned_exact_phase(x, 0.0, t, &setup)?;
        let d = (fringe_intensity(approx) - fringe_intensity(aligned)).abs();
        if d > worst.0 {
            worst = (d, k);
        }
    }
    println!("largest intensity gap to the aligned exact model: {:.3e} at pixel {}", worst.0, worst.1);

    let raw = fringe_intensity(exact_phase(0.0, 0.0, t, &setup)?);
    println!("unaligned exact model at the center: {raw:.6} (always 1)");
    Ok(())
}
