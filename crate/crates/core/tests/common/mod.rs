//! Test-only oracles, independent of the library's computation paths.
#![allow(dead_code)]

use fringe::ann::{mse_loss, ClassCode, MlpNetwork};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Double-double number `hi + lo` with about 32 significant digits.
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    pub const PI: Dd = Dd { hi: std::f64::consts::PI, lo: 1.224_646_799_147_353_2e-16 };

    pub fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    pub fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(self.lo, o.lo);
        let s = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(s.hi, s.lo + t.lo)
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::from(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::from(q2)));
        let q3 = r.hi / o.hi;
        quick_two_sum(q1, q2).add(Dd::from(q3))
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::from(0.0);
        }
        // one Newton step from the f64 root doubles the precision
        let x = Dd::from(self.hi.sqrt());
        let r = self.sub(x.mul(x));
        x.add(r.div(x.add(x)))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Sagitta by direct subtraction `R - sqrt(R^2 - r^2)` in double-double.
pub fn dd_sagitta(radius: Dd, r: f64) -> Dd {
    let r = Dd::from(r);
    radius.sub(radius.mul(radius).sub(r.mul(r)).sqrt())
}

/// `2 pi * length / lambda`, reduced to `[0, 2 pi)` before leaving double-double.
pub fn dd_phase(length: Dd, wavelength: f64) -> Dd {
    Dd::PI.add(Dd::PI).mul(length).div(Dd::from(wavelength))
}

pub fn dd_reduce(phase: Dd) -> f64 {
    let two_pi = Dd::PI.add(Dd::PI);
    let turns = (phase.to_f64() / two_pi.to_f64()).floor();
    phase.sub(two_pi.mul(Dd::from(turns))).to_f64()
}

pub fn intensity(phase: f64) -> f64 {
    (1.0 + phase.cos()) / 2.0
}

/// Per-pixel intensities of the center-aligned exact model and of the
/// operative sagitta-minus-thickness model, both in double-double.
pub fn dd_intensities(x: f64, t_m: f64, radius: f64, wavelength: f64) -> (f64, f64) {
    let r0 = Dd::from(radius);
    let two_t = Dd::from(t_m).add(Dd::from(t_m));
    let shift = dd_phase(two_t, wavelength);
    let exact = dd_phase(dd_sagitta(r0.sub(two_t), x), wavelength).sub(shift);
    let approx = dd_phase(dd_sagitta(r0, x), wavelength).sub(shift);
    (intensity(dd_reduce(exact)), intensity(dd_reduce(approx)))
}

/// Pearson chi-square of `counts` against Poisson(`mean`) probabilities
/// evaluated directly, pooling neighbouring values until each bin expects at
/// least 5. Returns `(statistic, critical value at alpha)`.
pub fn poisson_chi_square(counts: &std::collections::BTreeMap<u64, u64>, mean: f64, n: u64, alpha: f64) -> (f64, f64) {
    let ln_pmf = |k: u64| -> f64 {
        if mean == 0.0 {
            return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
        }
        k as f64 * mean.ln() - mean - statrs::function::gamma::ln_gamma(k as f64 + 1.0)
    };
    let max_k = *counts.keys().max().unwrap_or(&0);
    let mut bins: Vec<(f64, f64)> = Vec::new(); // (expected, observed)
    let (mut exp_acc, mut obs_acc, mut cdf) = (0.0, 0.0, 0.0);
    let mut k = 0u64;
    loop {
        let p = ln_pmf(k).exp();
        cdf += p;
        exp_acc += p * n as f64;
        obs_acc += *counts.get(&k).unwrap_or(&0) as f64;
        let tail_small = (1.0 - cdf) * (n as f64) < 5.0;
        if exp_acc >= 5.0 && !tail_small {
            bins.push((exp_acc, obs_acc));
            exp_acc = 0.0;
            obs_acc = 0.0;
        }
        if tail_small && k >= max_k && k as f64 > mean {
            // remaining probability and observations go into the last bin
            let rest_obs: f64 = counts.range(k + 1..).map(|(_, c)| *c as f64).sum();
            exp_acc += (1.0 - cdf).max(0.0) * n as f64;
            obs_acc += rest_obs;
            match bins.last_mut() {
                Some(last) if exp_acc < 5.0 => {
                    last.0 += exp_acc;
                    last.1 += obs_acc;
                }
                _ => bins.push((exp_acc, obs_acc)),
            }
            break;
        }
        k += 1;
    }
    let stat: f64 = bins.iter().map(|(e, o)| (o - e).powi(2) / e).sum();
    let df = (bins.len() as f64 - 1.0).max(1.0);
    let crit = ChiSquared::new(df).unwrap().inverse_cdf(1.0 - alpha);
    (stat, crit)
}

fn sig(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Straight-line forward pass over explicit loops.
pub fn reference_forward(net: &MlpNetwork, x: &[f64]) -> Vec<f64> {
    let mut a = x.to_vec();
    for layer in net.layers() {
        a = (0..layer.outputs())
            .map(|o| {
                let row = &layer.weights()[o * layer.inputs()..(o + 1) * layer.inputs()];
                sig(layer.biases()[o] + row.iter().zip(&a).map(|(w, x)| w * x).sum::<f64>())
            })
            .collect();
    }
    a
}

/// Central finite differences of the loss with respect to every parameter,
/// in the same order as `Gradients::iter` (per layer: weights, then biases).
pub fn finite_difference_gradient(net: &MlpNetwork, x: &[f64], target: &ClassCode, eps: f64) -> Vec<f64> {
    let loss = |n: &MlpNetwork| mse_loss(&reference_forward(n, x), target).unwrap();
    let mut probe = net.clone();
    let mut out = Vec::new();
    for li in 0..net.layers().len() {
        for wi in 0..net.layers()[li].weights().len() {
            let orig = probe.layers()[li].weights()[wi];
            probe.layers_mut()[li].weights_mut()[wi] = orig + eps;
            let up = loss(&probe);
            probe.layers_mut()[li].weights_mut()[wi] = orig - eps;
            let down = loss(&probe);
            probe.layers_mut()[li].weights_mut()[wi] = orig;
            out.push((up - down) / (2.0 * eps));
        }
        for bi in 0..net.layers()[li].biases().len() {
            let orig = probe.layers()[li].biases()[bi];
            probe.layers_mut()[li].biases_mut()[bi] = orig + eps;
            let up = loss(&probe);
            probe.layers_mut()[li].biases_mut()[bi] = orig - eps;
            let down = loss(&probe);
            probe.layers_mut()[li].biases_mut()[bi] = orig;
            out.push((up - down) / (2.0 * eps));
        }
    }
    out
}

/// Largest violation of `|a - n| <= max(rel * max(|a|, |n|), floor)`, as the
/// ratio of the error to its allowance (pass when below 1).
pub fn worst_gradient_mismatch(analytic: &[f64], numeric: &[f64], rel: f64, floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / (rel * a.abs().max(n.abs())).max(floor))
        .fold(0.0, f64::max)
}

use fringe::dataset::{Dataset, DatasetKind, FeatureVector, Provenance, Record, FEATURE_COUNT};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Finite value drawn from a mix of plain fractions, round decimals and raw
/// bit patterns (which reach subnormals and extreme exponents).
pub fn random_finite(rng: &mut ChaCha8Rng, nonnegative: bool) -> f64 {
    let v = match rng.random_range(0..4) {
        0 => rng.random::<f64>(),
        1 => rng.random_range(0..1_000_000) as f64 / 1000.0,
        2 => 0.0,
        _ => loop {
            let v = f64::from_bits(rng.random::<u64>());
            if v.is_finite() {
                break v;
            }
        },
    };
    if nonnegative { v.abs() } else { v }
}

pub fn random_dataset(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(0..6);
    let records = (0..n)
        .map(|_| Record {
            thickness_nm: random_finite(&mut rng, true),
            features: FeatureVector::new((0..FEATURE_COUNT).map(|_| random_finite(&mut rng, true)).collect()).unwrap(),
        })
        .collect();
    Dataset { kind: DatasetKind::Train, provenance: Provenance::File, records }
}

pub fn random_network(seed: u64) -> MlpNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = MlpNetwork::standard(seed);
    for layer in net.layers_mut() {
        for w in layer.weights_mut() {
            if rng.random_bool(0.2) {
                *w = random_finite(&mut rng, false);
            }
        }
        for b in layer.biases_mut() {
            *b = random_finite(&mut rng, false);
        }
    }
    net
}

pub fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

pub fn datasets_bit_equal(a: &Dataset, b: &Dataset) -> bool {
    a.records.len() == b.records.len()
        && a.records.iter().zip(&b.records).all(|(x, y)| {
            x.thickness_nm.to_bits() == y.thickness_nm.to_bits() && same_bits(x.features.as_slice(), y.features.as_slice())
        })
}

pub fn networks_bit_equal(a: &MlpNetwork, b: &MlpNetwork) -> bool {
    a.layer_sizes() == b.layer_sizes()
        && a.layers().iter().zip(b.layers()).all(|(x, y)| same_bits(x.weights(), y.weights()) && same_bits(x.biases(), y.biases()))
}
