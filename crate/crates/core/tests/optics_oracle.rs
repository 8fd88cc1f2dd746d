mod common;

use common::{dd_intensities, dd_phase, dd_sagitta, Dd};
use fringe::dataset::ThicknessGrid;
use fringe::optics::{
    aligned_exact_phase, exact_phase, fringe_intensity, sagittal_phase, synthesize_profile,
    thickness_phase, FilmThickness, OpticalSetup,
};
use proptest::prelude::*;

#[test]
fn sagittal_phase_matches_double_double_across_the_line() {
    let setup = OpticalSetup::default();
    for k in 0..setup.pixel_count() {
        let x = setup.pixel_x(k);
        let got = sagittal_phase(x, 0.0, &setup).unwrap();
        let want = dd_phase(dd_sagitta(Dd::from(setup.wavefront_radius()), x), setup.wavelength()).to_f64();
        let tol = 4.0 * f64::EPSILON * want.abs().max(1e-300);
        assert!((got - want).abs() <= tol, "pixel {k}: {got} vs {want}");
    }
}

#[test]
fn exact_phase_matches_double_double() {
    let setup = OpticalSetup::default();
    for nm in [0.0, 5.0, 100.0, 200.0] {
        let t = FilmThickness::from_nm(nm).unwrap();
        let r = Dd::from(setup.wavefront_radius()).sub(Dd::from(t.meters()).add(Dd::from(t.meters())));
        for k in (0..setup.pixel_count()).step_by(37) {
            let x = setup.pixel_x(k);
            let got = exact_phase(x, 0.0, t, &setup).unwrap();
            let want = dd_phase(dd_sagitta(r, x), setup.wavelength()).to_f64();
            assert!((got - want).abs() <= 1e-13 * want.abs().max(1e-3), "{nm} nm pixel {k}");
        }
    }
}

#[test]
fn profiles_match_double_double_intensities() {
    let setup = OpticalSetup::default();
    for nm in ThicknessGrid::test().values() {
        let t = FilmThickness::from_nm(nm).unwrap();
        let p = synthesize_profile(t, &setup).unwrap();
        for (k, &got) in p.samples().iter().enumerate() {
            let (_, want) = dd_intensities(setup.pixel_x(k), t.meters(), setup.wavefront_radius(), setup.wavelength());
            assert!((got - want).abs() < 1e-12, "{nm} nm pixel {k}: {got} vs {want}");
        }
    }
}

#[test]
fn aligned_exact_model_stays_within_bound() {
    let setup = OpticalSetup::default();
    let mut worst: f64 = 0.0;
    for nm in ThicknessGrid::test().values() {
        let t = FilmThickness::from_nm(nm).unwrap();
        for k in 0..setup.pixel_count() {
            let x = setup.pixel_x(k);
            let exact = fringe_intensity(aligned_exact_phase(x, 0.0, t, &setup).unwrap());
            let approx = fringe_intensity(sagittal_phase(x, 0.0, &setup).unwrap() - thickness_phase(t, setup.wavelength()));
            let (dd_exact, dd_approx) = dd_intensities(x, t.meters(), setup.wavefront_radius(), setup.wavelength());
            assert!((exact - dd_exact).abs() < 1e-11);
            assert!((approx - dd_approx).abs() < 1e-11);
            worst = worst.max((exact - approx).abs());
        }
    }
    // largest difference over the sweep, from a 50-digit evaluation
    assert!((worst - 2.0007e-3).abs() < 1e-6, "{worst}");
}

#[test]
fn unaligned_exact_model_differs_by_the_thickness_phase() {
    let setup = OpticalSetup::default();
    let t = FilmThickness::from_nm(62.5).unwrap();
    let center = exact_phase(0.0, 0.0, t, &setup).unwrap();
    assert_eq!(center, 0.0);
    let approx = sagittal_phase(0.0, 0.0, &setup).unwrap() - thickness_phase(t, setup.wavelength());
    assert!((approx + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert!((fringe_intensity(center) - fringe_intensity(approx)).abs() > 0.49);
}

#[test]
fn center_pixel_follows_thickness_phase() {
    let setup = OpticalSetup::default();
    for nm in ThicknessGrid::test().values() {
        let t = FilmThickness::from_nm(nm).unwrap();
        let p = synthesize_profile(t, &setup).unwrap();
        let want = (1.0 + (4.0 * std::f64::consts::PI * nm / 500.0).cos()) / 2.0;
        assert!((p.samples()[0] - want).abs() <= 1e-12, "{nm}");
    }
}

#[test]
fn domain_edge_is_rejected() {
    let setup = OpticalSetup::default();
    let r = setup.wavefront_radius();
    assert!(sagittal_phase(r, 0.0, &setup).is_err());
    assert!(sagittal_phase(0.6 * r, 0.8 * r, &setup).is_err());
    assert!(sagittal_phase(0.99 * r, 0.0, &setup).is_ok());
}

proptest! {
    #[test]
    fn intensity_is_bounded_and_periodic(phi in -1e4f64..1e4) {
        let i = fringe_intensity(phi);
        prop_assert!((0.0..=1.0).contains(&i));
        let shifted = fringe_intensity(phi + 2.0 * std::f64::consts::PI);
        prop_assert!((i - shifted).abs() < 1e-9);
    }

    #[test]
    fn thickness_half_wave_leaves_profile_unchanged(nm in 0.0f64..200.0) {
        // 4 pi T / lambda advances by 2 pi when T grows by lambda / 2
        let setup = OpticalSetup::default();
        let a = synthesize_profile(FilmThickness::from_nm(nm).unwrap(), &setup).unwrap();
        let b = synthesize_profile(FilmThickness::from_nm(nm + 250.0).unwrap(), &setup).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn sagittal_phase_is_radially_symmetric(x in 0.0f64..3e-3, theta in 0.0f64..std::f64::consts::TAU) {
        let setup = OpticalSetup::default();
        let on_axis = sagittal_phase(x, 0.0, &setup).unwrap();
        let rotated = sagittal_phase(x * theta.cos(), x * theta.sin(), &setup).unwrap();
        prop_assert!((on_axis - rotated).abs() <= 1e-12 * on_axis.max(1e-12));
        let mirrored = sagittal_phase(-x, 0.0, &setup).unwrap();
        prop_assert_eq!(on_axis, mirrored);
    }
}
