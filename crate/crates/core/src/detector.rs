//! Grey-level detector model and Poisson shot noise.
//!
//! A clean normalized intensity `I` becomes `Poisson(I * G_max) / G_max`,
//! where `G_max = 2^bits - 1` is the full-scale grey value. At full scale the
//! relative noise is `1 / sqrt(G_max)`. Draws above `G_max` are kept unless
//! clamping is requested explicitly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::LineProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorModel {
    bit_depth: u32,
}

impl DetectorModel {
    pub fn new(bit_depth: u32) -> Result<Self> {
        if !(1..=32).contains(&bit_depth) {
            return Err(Error::Validation(format!(
                "detector bit depth must be in 1..=32, got {bit_depth}"
            )));
        }
        Ok(Self { bit_depth })
    }

    pub fn bit_depth(&self) -> u32 {
        self.bit_depth
    }

    /// Full-scale grey value `2^bits - 1`.
    pub fn g_max(&self) -> u64 {
        (1u64 << self.bit_depth) - 1
    }

    /// Relative shot noise at full scale, `1 / sqrt(G_max)`.
    pub fn noise_figure(&self) -> f64 {
        1.0 / (self.g_max() as f64).sqrt()
    }
}

/// Noise figure of the detector, `1 / sqrt(G_max)`.
pub fn snr(detector: &DetectorModel) -> f64 {
    detector.noise_figure()
}

/// Seedable random stream: ChaCha8 keyed by a 64-bit seed, with independent
/// substreams selected through the ChaCha stream counter.
///
/// `RngState::substream(seed, i)` depends only on `(seed, i)`, so records
/// can be generated in any order and still reproduce bit for bit.
#[derive(Debug, Clone)]
pub struct RngState {
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn substream(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { rng }
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub(crate) fn inner(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Below this mean the sampler inverts the CDF by sequential search.
const INVERSION_LIMIT: f64 = 30.0;

/// Poisson sampler for a fixed mean.
///
/// Small means use inversion by sequential search. Larger means use the
/// transformed rejection method with squeeze (PTRS, Hoermann 1993), which is
/// exact and needs about 1.2 uniform pairs per draw.
#[derive(Debug, Clone, Copy)]
pub struct Poisson {
    mean: f64,
    method: Method,
}

#[derive(Debug, Clone, Copy)]
enum Method {
    Zero,
    Inversion { p0: f64 },
    Ptrs(PtrsConstants),
}

#[derive(Debug, Clone, Copy)]
struct PtrsConstants {
    a: f64,
    b: f64,
    vr: f64,
    ln_inv_alpha: f64,
    ln_mean: f64,
}

impl Poisson {
    pub fn new(mean: f64) -> Result<Self> {
        if !(mean.is_finite() && mean >= 0.0) {
            return Err(Error::Domain(format!(
                "Poisson mean must be finite and nonnegative, got {mean}"
            )));
        }
        let method = if mean == 0.0 {
            Method::Zero
        } else if mean < INVERSION_LIMIT {
            Method::Inversion { p0: (-mean).exp() }
        } else {
            let b = 0.931 + 2.53 * mean.sqrt();
            let a = -0.059 + 0.024_83 * b;
            let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
            let vr = 0.9277 - 3.6224 / (b - 2.0);
            Method::Ptrs(PtrsConstants {
                a,
                b,
                vr,
                ln_inv_alpha: inv_alpha.ln(),
                ln_mean: mean.ln(),
            })
        };
        Ok(Self { mean, method })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sample(&self, rng: &mut RngState) -> u64 {
        match self.method {
            Method::Zero => 0,
            Method::Inversion { p0 } => self.sample_inversion(p0, rng),
            Method::Ptrs(c) => self.sample_ptrs(&c, rng),
        }
    }

    fn sample_inversion(&self, p0: f64, rng: &mut RngState) -> u64 {
        'draw: loop {
            let u = rng.uniform();
            let mut k = 0u64;
            let mut p = p0;
            let mut cdf = p0;
            while u > cdf {
                k += 1;
                p *= self.mean / k as f64;
                if p <= cdf * f64::EPSILON {
                    // u sits in the rounding gap just below 1; redraw
                    continue 'draw;
                }
                cdf += p;
            }
            return k;
        }
    }

    fn sample_ptrs(&self, c: &PtrsConstants, rng: &mut RngState) -> u64 {
        loop {
            let u = rng.uniform() - 0.5;
            let v = rng.uniform();
            let us = 0.5 - u.abs();
            let k = ((2.0 * c.a / us + c.b) * u + self.mean + 0.43).floor();
            if us >= 0.07 && v <= c.vr {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = v.ln() + c.ln_inv_alpha - (c.a / (us * us) + c.b).ln();
            let rhs = -self.mean + k * c.ln_mean - libm::lgamma(k + 1.0);
            if lhs <= rhs {
                return k as u64;
            }
        }
    }
}

/// One Poisson-distributed count with the given mean.
pub fn poisson_sample(mean: f64, rng: &mut RngState) -> Result<u64> {
    Ok(Poisson::new(mean)?.sample(rng))
}

/// Replaces every sample `I` by `Poisson(I * G_max) / G_max`.
pub fn add_shot_noise(
    profile: &LineProfile,
    detector: &DetectorModel,
    rng: &mut RngState,
) -> Result<LineProfile> {
    add_shot_noise_with(profile, detector, rng, false)
}

/// [`add_shot_noise`] with optional clamping of counts to `G_max`.
pub fn add_shot_noise_with(
    profile: &LineProfile,
    detector: &DetectorModel,
    rng: &mut RngState,
    clamp: bool,
) -> Result<LineProfile> {
    let g_max = detector.g_max();
    let scale = g_max as f64;
    let samples = profile
        .samples()
        .iter()
        .map(|&i| {
            let mut count = poisson_sample(i * scale, rng)?;
            if clamp {
                count = count.min(g_max);
            }
            Ok(count as f64 / scale)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LineProfile::from_parts(profile.thickness(), samples))
}
