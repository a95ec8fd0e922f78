//! Seeded synthetic datasets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{SeriesMatrix, TimeSeriesDataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Class means of the four-class masking dataset. Classes 0 and 1 form one
/// latent group and 2 and 3 the other.
pub const MASKING_MEANS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];

/// Series of length `len` whose points are the class mean plus Gaussian
/// noise. Rows cycle through the classes.
pub fn gaussian_levels<T: Scalar>(means: &[f64], per_class: usize, len: usize, noise: f64, seed: u64) -> Result<TimeSeriesDataset<T>> {
    let normal = Normal::new(0.0, noise).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = means.len();
    let mut data = Vec::with_capacity(k * per_class * len);
    let mut labels = Vec::with_capacity(k * per_class);
    for i in 0..k * per_class {
        let c = i % k;
        labels.push(c);
        data.extend((0..len).map(|_| T::of(means[c] + normal.sample(&mut rng))));
    }
    TimeSeriesDataset::new(
        SeriesMatrix::new(k * per_class, len, data)?,
        labels,
        TimeSeriesDataset::<T>::default_names(k),
    )
}

/// Four levels a linear one-vs-rest classifier cannot fully separate: the
/// middle classes are masked by the outer ones.
pub fn masking_dataset<T: Scalar>(per_class: usize, len: usize, seed: u64) -> Result<TimeSeriesDataset<T>> {
    gaussian_levels(&MASKING_MEANS, per_class, len, 1.0, seed)
}
