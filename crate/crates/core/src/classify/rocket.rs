//! Random convolutional kernels producing two features per kernel: the
//! proportion of positive values and the maximum of the dilated
//! convolution output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::SeriesMatrix;
use crate::scalar::Scalar;

const LENGTHS: [usize; 3] = [7, 9, 11];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Kernel<T> {
    pub weights: Vec<T>,
    pub bias: T,
    pub dilation: usize,
    pub padded: bool,
}

impl<T: Scalar> Kernel<T> {
    fn span(&self) -> usize {
        (self.weights.len() - 1) * self.dilation
    }

    pub fn padding(&self) -> usize {
        if self.padded {
            self.span() / 2
        } else {
            0
        }
    }

    /// (proportion of positive values, max) of the convolution over `x`.
    pub fn apply(&self, x: &[T]) -> (T, T) {
        let m = x.len() as isize;
        let pad = self.padding() as isize;
        let out_len = m + 2 * pad - self.span() as isize;
        debug_assert!(out_len > 0);
        let mut positive = 0usize;
        let mut max = T::neg_infinity();
        for start in -pad..(out_len - pad) {
            let mut acc = self.bias;
            for (j, &w) in self.weights.iter().enumerate() {
                let idx = start + (j * self.dilation) as isize;
                if (0..m).contains(&idx) {
                    acc = acc + w * x[idx as usize];
                }
            }
            if acc > T::zero() {
                positive += 1;
            }
            if acc > max {
                max = acc;
            }
        }
        (T::of(positive as f64 / out_len as f64), max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct KernelBank<T> {
    pub kernels: Vec<Kernel<T>>,
    pub series_len: usize,
}

impl<T: Scalar> KernelBank<T> {
    /// Samples `count` kernels for series of length `series_len`.
    pub fn generate(count: usize, series_len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kernels = (0..count)
            .map(|_| {
                let len = LENGTHS[rng.random_range(0..LENGTHS.len())];
                let raw: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
                let mean = raw.iter().sum::<f64>() / len as f64;
                let mut weights: Vec<T> = raw[..len - 1].iter().map(|w| T::of(w - mean)).collect();
                // Closing weight makes the sequential sum exactly zero.
                let partial = weights.iter().fold(T::zero(), |acc, &w| acc + w);
                weights.push(-partial);
                let bias = T::of(rng.random_range(-1.0..=1.0));
                let ratio = (series_len.saturating_sub(1)) as f64 / (len - 1) as f64;
                let upper = if ratio > 1.0 { ratio.log2() } else { 0.0 };
                let u = if upper > 0.0 { rng.random_range(0.0..=upper) } else { 0.0 };
                let dilation = (2f64.powf(u).floor() as usize).max(1);
                let mut padded = rng.random_bool(0.5);
                if (len - 1) * dilation >= series_len {
                    padded = true;
                }
                Kernel {
                    weights,
                    bias,
                    dilation,
                    padded,
                }
            })
            .collect();
        Self { kernels, series_len }
    }

    pub fn num_features(&self) -> usize {
        2 * self.kernels.len()
    }

    /// `N × 2K` feature matrix, row-major, columns `[ppv_k, max_k]` per kernel.
    pub fn transform(&self, x: &SeriesMatrix<T>) -> Vec<T> {
        let p = self.num_features();
        let rows: Vec<Vec<T>> = (0..x.rows())
            .into_par_iter()
            .map(|i| {
                let series = x.row(i);
                let mut out = Vec::with_capacity(p);
                for k in &self.kernels {
                    let (ppv, max) = k.apply(series);
                    out.push(ppv);
                    out.push(max);
                }
                out
            })
            .collect();
        rows.concat()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernels_are_mean_centred_and_fit() {
        for m in [3usize, 8, 30, 200] {
            let bank = KernelBank::<f64>::generate(64, m, 3);
            for k in &bank.kernels {
                assert!(LENGTHS.contains(&k.weights.len()));
                let s: f64 = k.weights.iter().sum();
                assert!(s.abs() <= 1e-9 * k.weights.len() as f64);
                assert!((-1.0..=1.0).contains(&k.bias));
                assert!(k.dilation >= 1);
                if !k.padded {
                    assert!(k.span() < m);
                }
            }
        }
    }

    #[test]
    fn constant_input_with_zero_bias_gives_zero_ppv() {
        let mut bank = KernelBank::<f64>::generate(8, 20, 0);
        for k in &mut bank.kernels {
            k.bias = 0.0;
            k.padded = false;
            k.dilation = 1;
        }
        let x = SeriesMatrix::new(2, 20, [vec![1.0; 20], vec![2.0; 20]].concat()).unwrap();
        let f = bank.transform(&x);
        assert!(f.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = KernelBank::<f32>::generate(16, 50, 11);
        let b = KernelBank::<f32>::generate(16, 50, 11);
        assert_eq!(a, b);
        assert_ne!(a, KernelBank::<f32>::generate(16, 50, 12));
    }
}
