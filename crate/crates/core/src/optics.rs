//! Interference phase and intensity of a plane reference wave superposed on a
//! diverging spherical object wave reflected from a thin film.
//!
//! The object wave reaching the observation plane has radius of curvature
//! `R0`. At transverse radius `r` its surface lags the plane wave by the
//! sagitta `R0 - sqrt(R0^2 - r^2)`, which produces concentric fringes. A film
//! of thickness `T` adds a round-trip path of `2T`, shifting every fringe
//! phase by `4 pi T / lambda`.
//!
//! Lengths are in meters except [`FilmThickness`], which is stored in
//! nanometers because every grid in the experiment is specified that way.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nanometers per meter. Conversions divide by this so that whole-nanometer
/// values map to the correctly rounded length in meters.
pub const NM_PER_M: f64 = 1e9;

/// Observation geometry and illumination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalSetup {
    wavelength: f64,
    wavefront_radius: f64,
    pixel_pitch: f64,
    pixel_count: usize,
}

impl OpticalSetup {
    pub const DEFAULT_WAVELENGTH: f64 = 500e-9;
    pub const DEFAULT_WAVEFRONT_RADIUS: f64 = 0.05;
    pub const DEFAULT_PIXEL_COUNT: usize = 1000;

    pub fn new(
        wavelength: f64,
        wavefront_radius: f64,
        pixel_pitch: f64,
        pixel_count: usize,
    ) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::Validation(format!(
                "wavelength must be positive, got {wavelength} m"
            )));
        }
        if !(wavefront_radius.is_finite() && wavefront_radius > 0.0) {
            return Err(Error::Validation(format!(
                "wavefront radius must be positive, got {wavefront_radius} m"
            )));
        }
        if !(pixel_pitch.is_finite() && pixel_pitch > 0.0) {
            return Err(Error::Validation(format!(
                "pixel pitch must be positive, got {pixel_pitch} m"
            )));
        }
        if pixel_count == 0 {
            return Err(Error::Validation("pixel count must be at least 1".into()));
        }
        let extent = (pixel_count - 1) as f64 * pixel_pitch;
        if wavefront_radius <= extent {
            return Err(Error::Validation(format!(
                "wavefront radius {wavefront_radius} m does not exceed the sampled extent {extent} m"
            )));
        }
        Ok(Self {
            wavelength,
            wavefront_radius,
            pixel_pitch,
            pixel_count,
        })
    }

    /// Setup with the pixel pitch expressed as a multiple of the wavelength.
    pub fn with_pitch_in_wavelengths(
        wavelength: f64,
        wavefront_radius: f64,
        pitch_wavelengths: f64,
        pixel_count: usize,
    ) -> Result<Self> {
        Self::new(
            wavelength,
            wavefront_radius,
            pitch_wavelengths * wavelength,
            pixel_count,
        )
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn wavefront_radius(&self) -> f64 {
        self.wavefront_radius
    }

    pub fn pixel_pitch(&self) -> f64 {
        self.pixel_pitch
    }

    pub fn pixel_count(&self) -> usize {
        self.pixel_count
    }

    /// Transverse coordinate of pixel `k` on the radial cut `x_k = k * pitch`.
    pub fn pixel_x(&self, k: usize) -> f64 {
        k as f64 * self.pixel_pitch
    }
}

impl Default for OpticalSetup {
    fn default() -> Self {
        Self {
            wavelength: Self::DEFAULT_WAVELENGTH,
            wavefront_radius: Self::DEFAULT_WAVEFRONT_RADIUS,
            pixel_pitch: 4.0 * Self::DEFAULT_WAVELENGTH,
            pixel_count: Self::DEFAULT_PIXEL_COUNT,
        }
    }
}

/// Film thickness in nanometers.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FilmThickness(f64);

impl FilmThickness {
    pub fn from_nm(nm: f64) -> Result<Self> {
        if !(nm.is_finite() && nm >= 0.0) {
            return Err(Error::Validation(format!(
                "film thickness must be finite and nonnegative, got {nm} nm"
            )));
        }
        Ok(Self(nm))
    }

    pub fn nm(self) -> f64 {
        self.0
    }

    pub fn meters(self) -> f64 {
        self.0 / NM_PER_M
    }

    /// Checks that `4 pi T / lambda < 2 pi`, the range on which the
    /// thickness-to-phase map is one-to-one.
    pub fn check_unambiguous(self, wavelength: f64) -> Result<()> {
        if self.meters() >= wavelength / 2.0 {
            return Err(Error::Validation(format!(
                "thickness {} nm is not below half the wavelength ({} nm)",
                self.0,
                wavelength / 2.0 * NM_PER_M
            )));
        }
        Ok(())
    }
}

/// One-sided radial intensity cut through the fringe center.
#[derive(Debug, Clone, PartialEq)]
pub struct LineProfile {
    thickness: FilmThickness,
    samples: Vec<f64>,
}

impl LineProfile {
    /// Wraps externally produced samples. Samples must be finite and
    /// nonnegative; noisy profiles may exceed 1.
    pub fn new(thickness: FilmThickness, samples: Vec<f64>) -> Result<Self> {
        if let Some((k, s)) = samples
            .iter()
            .enumerate()
            .find(|(_, s)| !(s.is_finite() && **s >= 0.0))
        {
            return Err(Error::Validation(format!(
                "profile sample {k} is {s}, expected a finite nonnegative intensity"
            )));
        }
        Ok(Self { thickness, samples })
    }

    pub(crate) fn from_parts(thickness: FilmThickness, samples: Vec<f64>) -> Self {
        Self { thickness, samples }
    }

    pub fn thickness(&self) -> FilmThickness {
        self.thickness
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Sagitta `R - sqrt(R^2 - r2)` in the rational form `r2 / (R + sqrt(R^2 - r2))`,
/// which avoids subtracting two nearly equal numbers when `r2 << R^2`.
fn sagitta(radius: f64, r2: f64) -> Result<f64> {
    let arg = radius * radius - r2;
    if !(arg > 0.0) {
        return Err(Error::Domain(format!(
            "x^2 + y^2 = {r2} m^2 is not below R^2 = {} m^2",
            radius * radius
        )));
    }
    Ok(r2 / (radius + arg.sqrt()))
}

/// Position-dependent phase `2 pi (R0 - sqrt(R0^2 - x^2 - y^2)) / lambda`.
pub fn sagittal_phase(x: f64, y: f64, setup: &OpticalSetup) -> Result<f64> {
    let s = sagitta(setup.wavefront_radius, x * x + y * y)?;
    Ok(2.0 * std::f64::consts::PI * s / setup.wavelength)
}

/// Thickness-dependent phase `4 pi T / lambda`.
pub fn thickness_phase(thickness: FilmThickness, wavelength: f64) -> f64 {
    4.0 * std::f64::consts::PI * thickness.meters() / wavelength
}

/// Phase with the film's `2T` path folded into the wavefront radius,
/// `2 pi ((R0 - 2T) - sqrt((R0 - 2T)^2 - x^2 - y^2)) / lambda`.
///
/// This vanishes at the center for every `T`. The operative model
/// (`sagittal_phase - thickness_phase`) carries an extra constant
/// `-4 pi T / lambda`; see [`aligned_exact_phase`].
pub fn exact_phase(x: f64, y: f64, thickness: FilmThickness, setup: &OpticalSetup) -> Result<f64> {
    let radius = setup.wavefront_radius - 2.0 * thickness.meters();
    if !(radius > 0.0) {
        return Err(Error::Domain(format!(
            "film path 2T = {} m exceeds the wavefront radius",
            2.0 * thickness.meters()
        )));
    }
    let s = sagitta(radius, x * x + y * y)?;
    Ok(2.0 * std::f64::consts::PI * s / setup.wavelength)
}

/// [`exact_phase`] shifted by the constant `-4 pi T / lambda` so that it
/// shares the center value of the operative model. The remaining difference
/// from `sagittal_phase - thickness_phase` is `(4 pi T / lambda)(R0 / sqrt(R0^2 - r^2) - 1)`
/// to first order in `T`.
pub fn aligned_exact_phase(
    x: f64,
    y: f64,
    thickness: FilmThickness,
    setup: &OpticalSetup,
) -> Result<f64> {
    Ok(exact_phase(x, y, thickness, setup)? - thickness_phase(thickness, setup.wavelength))
}

/// Normalized two-beam intensity `(1 + cos dphi) / 2`.
pub fn fringe_intensity(delta_phi: f64) -> f64 {
    0.5 * (1.0 + delta_phi.cos())
}

/// Noiseless line profile for film thickness `thickness`, sampled at
/// `x_k = k * pitch`, `y = 0`.
pub fn synthesize_profile(thickness: FilmThickness, setup: &OpticalSetup) -> Result<LineProfile> {
    let shift = thickness_phase(thickness, setup.wavelength);
    let samples = (0..setup.pixel_count)
        .map(|k| sagittal_phase(setup.pixel_x(k), 0.0, setup).map(|p| fringe_intensity(p - shift)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LineProfile::from_parts(thickness, samples))
}
