//! Exact-or-sampled measurement helpers shared by the tree, rounding and check
//! modules, plus deterministic seed-stream splitting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::TheoryConstants;
use crate::error::Result;
use crate::poly::{fwht_synthesize, sign, Mask, MultilinearPolynomial};

/// How a probability over the cube was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Exact { points: u64 },
    MonteCarlo { samples: u64, seed: u64 },
}

impl Method {
    pub fn is_exact(&self) -> bool {
        matches!(self, Method::Exact { .. })
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the stream named `label`, item `index`, under `master`.
/// Stable across platforms and runs.
pub fn stream_seed(master: u64, label: &str, index: u64) -> u64 {
    // FNV-1a over the label
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    splitmix64(splitmix64(master ^ h) ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Variables of `0..n` not in `fixed`.
pub fn free_variables(n: usize, fixed: Mask) -> Vec<usize> {
    (0..n).filter(|&i| fixed & (1 << i) == 0).collect()
}

/// Nearest constant sign and its distance for a function of the `free` variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantFit {
    pub sign: i8,
    pub distance: f64,
    #[serde(flatten)]
    pub method: Method,
}

/// Fraction of points where `sign(p)` differs from `target`, over the
/// sub-cube spanned by `free`. `p` must not depend on any other variable.
pub fn disagreement_with_constant(
    p: &MultilinearPolynomial,
    free: &[usize],
    target: i8,
    constants: &TheoryConstants,
    seed: u64,
) -> Result<(f64, Method)> {
    let minus = count_negative(p, free, constants, seed)?;
    let (neg, total, method) = minus;
    let wrong = if target >= 0 { neg } else { total - neg };
    Ok((wrong as f64 / total as f64, method))
}

/// Majority sign (ties to `+1`) of `sign(p)` over the free sub-cube.
pub fn fit_constant(
    p: &MultilinearPolynomial,
    free: &[usize],
    constants: &TheoryConstants,
    seed: u64,
) -> Result<ConstantFit> {
    let (neg, total, method) = count_negative(p, free, constants, seed)?;
    let pos = total - neg;
    let (sign, wrong) = if pos >= neg { (1, neg) } else { (-1, pos) };
    Ok(ConstantFit { sign, distance: wrong as f64 / total as f64, method })
}

fn count_negative(
    p: &MultilinearPolynomial,
    free: &[usize],
    constants: &TheoryConstants,
    seed: u64,
) -> Result<(u64, u64, Method)> {
    if free.len() <= constants.enumeration_limit {
        let compact = p.compress(free)?;
        if free.is_empty() {
            let neg = u64::from(sign(compact.constant_term()) < 0);
            return Ok((neg, 1, Method::Exact { points: 1 }));
        }
        let table = fwht_synthesize(&compact, constants.enumeration_limit)?;
        let neg = table.values().iter().filter(|&&v| sign(v) < 0).count() as u64;
        let total = table.len() as u64;
        return Ok((neg, total, Method::Exact { points: total }));
    }
    let samples = constants.mc_samples as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut neg = 0;
    for _ in 0..samples {
        let mut point: Mask = 0;
        for &v in free {
            if rng.random::<bool>() {
                point |= 1 << v;
            }
        }
        if sign(p.evaluate_index(point)) < 0 {
            neg += 1;
        }
    }
    Ok((neg, samples, Method::MonteCarlo { samples, seed }))
}
