//! Reproducible parallel sampling.
//!
//! Samples are produced in fixed-size batches. Batch `b` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` positioned on stream `b`, so the output
//! vector depends only on `(seed, n)` and never on how rayon schedules the
//! batches or how many worker threads the ambient pool has.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

pub type Stream = ChaCha8Rng;

pub const BATCH_SIZE: usize = 4096;

/// RNG for substream `index` of `seed`.
pub fn substream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[inline]
pub fn standard_normal(rng: &mut Stream) -> f64 {
    StandardNormal.sample(rng)
}

/// Draws `n` values of `draw`, in a deterministic order.
pub fn sample_vec<F>(n: usize, seed: u64, draw: F) -> Vec<f64>
where
    F: Fn(&mut Stream) -> f64 + Sync,
{
    let batches = n.div_ceil(BATCH_SIZE);
    let chunks: Vec<Vec<f64>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, b as u64);
            let len = BATCH_SIZE.min(n - b * BATCH_SIZE);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    chunks.concat()
}

/// Like [`sample_vec`] for draws that produce a fixed-size record.
pub fn sample_records<const K: usize, F>(n: usize, seed: u64, draw: F) -> Vec<[f64; K]>
where
    F: Fn(&mut Stream) -> [f64; K] + Sync,
{
    let batches = n.div_ceil(BATCH_SIZE);
    let chunks: Vec<Vec<[f64; K]>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, b as u64);
            let len = BATCH_SIZE.min(n - b * BATCH_SIZE);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    chunks.concat()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub standard_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            standard_error: 0.0,
        }
    }

    /// |value − target| in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target).abs() / self.standard_error
    }
}

/// Mean and standard error of `f(x)` over `xs`, two-pass and compensated.
pub fn mean_estimate<F: Fn(f64) -> f64>(xs: &[f64], f: F) -> Estimate {
    let n = xs.len() as f64;
    let mean = xs.iter().map(|&x| f(x)).collect::<KahanSum>().value() / n;
    let ss = xs
        .iter()
        .map(|&x| {
            let d = f(x) - mean;
            d * d
        })
        .collect::<KahanSum>()
        .value();
    let var = if xs.len() > 1 { ss / (n - 1.0) } else { 0.0 };
    Estimate {
        value: mean,
        standard_error: (var / n).sqrt(),
    }
}
