//! Seeded random streams.
//!
//! A stream is addressed by a master seed and a short path of integers
//! (level, replicate, purpose, ...). The path is mixed with SplitMix64 into a ChaCha8 key,
//! so streams with different paths are independent and any stream can be regenerated
//! without replaying others.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

pub type StreamRng = ChaCha8Rng;

/// Purpose tags that keep streams used for different jobs apart.
pub mod purpose {
    pub const POINTS: u64 = 0x01;
    pub const COUNT: u64 = 0x02;
    pub const THINNING: u64 = 0x03;
    pub const PROBES: u64 = 0x04;
    pub const BOOTSTRAP: u64 = 0x05;
    pub const HALFSPACE: u64 = 0x06;
    pub const HALFSPACE_INDEPENDENT: u64 = 0x07;
    pub const STRATUM: u64 = 0x08;
    pub const LATTICE: u64 = 0x09;
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed and a path into a 64-bit key.
pub fn derive_key(master: u64, path: &[u64]) -> u64 {
    let mut h = splitmix(master ^ 0x5375_7266_5363_616c);
    for (k, &p) in path.iter().enumerate() {
        h = splitmix(h ^ splitmix(p.wrapping_add((k as u64 + 1) << 56)));
    }
    h
}

/// Builds the stream addressed by `(master, path)`.
pub fn stream(master: u64, path: &[u64]) -> StreamRng {
    let k = derive_key(master, path);
    let mut seed = [0u8; 32];
    let mut z = k;
    for chunk in seed.chunks_exact_mut(8) {
        z = splitmix(z);
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Provenance of a random object: the master seed and the stream path it was drawn from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub master: u64,
    pub path: Vec<u64>,
}

impl SeedRecord {
    pub fn new(master: u64, path: &[u64]) -> Self {
        SeedRecord {
            master,
            path: path.to_vec(),
        }
    }

    pub fn child(&self, extra: &[u64]) -> SeedRecord {
        let mut path = self.path.clone();
        path.extend_from_slice(extra);
        SeedRecord {
            master: self.master,
            path,
        }
    }

    pub fn rng(&self, purpose: u64) -> StreamRng {
        let mut path = self.path.clone();
        path.push(purpose);
        stream(self.master, &path)
    }
}

/// Uniform draw in `[0, 1)`.
#[inline]
pub fn uniform<R: RngCore>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Poisson variate with the given mean.
///
/// Inversion by sequential search for `mean < 10`, Hörmann's PTRS transformed rejection
/// otherwise. Both branches consume a deterministic number of draws per seed.
pub fn poisson<R: RngCore>(rng: &mut R, mean: f64) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    if mean < 10.0 {
        let mut k = 0u64;
        let mut p = (-mean).exp();
        let mut s = p;
        let u = uniform(rng);
        while u > s {
            k += 1;
            p *= mean / k as f64;
            s += p;
            if p == 0.0 && s < u {
                // u is within rounding of 1; the remaining mass is negligible.
                break;
            }
        }
        return k;
    }
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let invalpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = uniform(rng) - 0.5;
        let v = uniform(rng);
        let us = 0.5 - u.abs();
        let kf = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return kf as u64;
        }
        if kf < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + invalpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mean + kf * loglam - ln_gamma(kf + 1.0);
        if lhs <= rhs {
            return kf as u64;
        }
    }
}
