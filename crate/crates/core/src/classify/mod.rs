//! Base classifiers used at tree nodes, inside splitters, and as the flat
//! baseline.
//!
//! Two kinds are provided: a ridge-regularised least-squares linear model on
//! the raw series, and a random-convolutional-kernel transform followed by a
//! ridge head. Both fit one-vs-rest ±1 targets in closed form and predict
//! by argmax with ties going to the smallest class id.

mod ridge;
mod rocket;

use serde::{Deserialize, Serialize};

use crate::dataset::{ClassId, SeriesMatrix, TimeSeriesDataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use rocket::{Kernel, KernelBank};

/// Something that can be trained on labelled series.
pub trait Learner<T: Scalar>: Send + Sync {
    type Model: Classifier<T>;

    /// Fits on rows of `x` labelled `y`, with labels in `0..num_classes`.
    fn fit(&self, x: &SeriesMatrix<T>, y: &[ClassId], num_classes: usize) -> Result<Self::Model>;
}

/// A trained model.
pub trait Classifier<T: Scalar>: Send + Sync {
    fn predict(&self, x: &SeriesMatrix<T>) -> Result<Vec<ClassId>>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    Linear,
    KernelRidge,
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ClassifierKind::Linear => "linear",
            ClassifierKind::KernelRidge => "kernel-ridge",
        })
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "svm" => Ok(Self::Linear),
            "kernel-ridge" | "rocket" => Ok(Self::KernelRidge),
            other => Err(Error::InvalidConfig(format!("unknown classifier kind '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub num_kernels: usize,
    pub ridge_lambda: f64,
    pub seed: u64,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        Self {
            kind: ClassifierKind::KernelRidge,
            num_kernels: 512,
            ridge_lambda: 1e-2,
            seed: 0,
        }
    }
}

impl ClassifierSpec {
    pub fn linear() -> Self {
        Self {
            kind: ClassifierKind::Linear,
            ..Self::default()
        }
    }

    pub fn kernel_ridge(num_kernels: usize) -> Self {
        Self {
            num_kernels,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_kernels == 0 {
            return Err(Error::InvalidConfig("num_kernels must be at least 1".into()));
        }
        if !(self.ridge_lambda > 0.0 && self.ridge_lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "ridge_lambda must be positive, got {}",
                self.ridge_lambda
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub enum FeatureState<T> {
    /// Raw series; column means subtracted.
    Raw { mean: Vec<T> },
    /// Kernel features standardised by training mean and deviation.
    Kernels { bank: KernelBank<T>, mean: Vec<T>, scale: Vec<T> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TrainedClassifier<T> {
    pub spec: ClassifierSpec,
    pub features: FeatureState<T>,
    /// `num_features × num_classes`, row-major.
    pub weights: Vec<T>,
    pub intercepts: Vec<T>,
    pub class_ids: Vec<ClassId>,
    pub series_len: usize,
}

const MODEL_FORMAT: &str = "hdcssf-classifier";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct ModelBlob<T> {
    format: String,
    version: u32,
    model: TrainedClassifier<T>,
}

impl<T: Scalar> TrainedClassifier<T> {
    pub fn num_features(&self) -> usize {
        match &self.features {
            FeatureState::Raw { mean } => mean.len(),
            FeatureState::Kernels { bank, .. } => bank.num_features(),
        }
    }

    fn featurize(&self, x: &SeriesMatrix<T>) -> Vec<T> {
        match &self.features {
            FeatureState::Raw { mean } => x
                .iter_rows()
                .flat_map(|row| row.iter().zip(mean).map(|(&v, &m)| v - m))
                .collect(),
            FeatureState::Kernels { bank, mean, scale } => {
                let p = bank.num_features();
                let mut f = bank.transform(x);
                for row in f.chunks_mut(p) {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = (*v - mean[j]) / scale[j];
                    }
                }
                f
            }
        }
    }

    /// Per-class decision scores, `N × num_classes` row-major.
    pub fn decision_scores(&self, x: &SeriesMatrix<T>) -> Result<Vec<T>> {
        if x.cols() != self.series_len {
            return Err(Error::LengthMismatch {
                expected: self.series_len,
                found: x.cols(),
            });
        }
        let p = self.num_features();
        let k = self.class_ids.len();
        let f = self.featurize(x);
        let mut out = Vec::with_capacity(x.rows() * k);
        for row in f.chunks(p.max(1)).take(x.rows()) {
            for c in 0..k {
                let s: T = (0..p).map(|j| row[j] * self.weights[j * k + c]).sum();
                out.push(s + self.intercepts[c]);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelBlob {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let blob: ModelBlob<T> = serde_json::from_str(s)?;
        if blob.format != MODEL_FORMAT || blob.version != MODEL_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported model blob {} v{}",
                blob.format, blob.version
            )));
        }
        Ok(blob.model)
    }
}

/// Argmax per row; earlier (smaller) class ids win ties.
fn argmax_rows<T: Scalar>(scores: &[T], k: usize, class_ids: &[ClassId]) -> Vec<ClassId> {
    scores
        .chunks(k)
        .map(|row| {
            let mut best = 0;
            for c in 1..k {
                if row[c] > row[best] {
                    best = c;
                }
            }
            class_ids[best]
        })
        .collect()
}

impl<T: Scalar> Classifier<T> for TrainedClassifier<T> {
    fn predict(&self, x: &SeriesMatrix<T>) -> Result<Vec<ClassId>> {
        let scores = self.decision_scores(x)?;
        Ok(argmax_rows(&scores, self.class_ids.len(), &self.class_ids))
    }
}

fn column_stats<T: Scalar>(f: &[T], n: usize, p: usize) -> (Vec<T>, Vec<T>) {
    let nf = T::of(n as f64);
    let mut mean = vec![T::zero(); p];
    for row in f.chunks(p) {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m = *m + v;
        }
    }
    mean.iter_mut().for_each(|m| *m = *m / nf);
    let mut var = vec![T::zero(); p];
    for row in f.chunks(p) {
        for j in 0..p {
            let d = row[j] - mean[j];
            var[j] = var[j] + d * d;
        }
    }
    let scale = var
        .into_iter()
        .map(|v| {
            let s = (v / nf).sqrt();
            if s > T::epsilon() {
                s
            } else {
                T::one()
            }
        })
        .collect();
    (mean, scale)
}

impl<T: Scalar> Learner<T> for ClassifierSpec {
    type Model = TrainedClassifier<T>;

    fn fit(&self, x: &SeriesMatrix<T>, y: &[ClassId], num_classes: usize) -> Result<TrainedClassifier<T>> {
        self.validate()?;
        if x.rows() != y.len() {
            return Err(Error::Shape(format!("{} rows, {} labels", x.rows(), y.len())));
        }
        let mut present = vec![false; num_classes];
        for &l in y {
            if l >= num_classes {
                return Err(Error::Classifier(format!("label {l} outside 0..{num_classes}")));
            }
            present[l] = true;
        }
        if present.iter().filter(|&&p| p).count() < 2 {
            return Err(Error::Classifier("training data must contain at least two classes".into()));
        }
        let n = x.rows();
        let m = x.cols();

        let (features, g) = match self.kind {
            ClassifierKind::Linear => {
                let (mean, _) = column_stats(x.as_slice(), n, m);
                let state = FeatureState::Raw { mean };
                let probe = TrainedClassifier {
                    spec: self.clone(),
                    features: state,
                    weights: Vec::new(),
                    intercepts: Vec::new(),
                    class_ids: Vec::new(),
                    series_len: m,
                };
                let g = probe.featurize(x);
                (probe.features, g)
            }
            ClassifierKind::KernelRidge => {
                let bank = KernelBank::generate(self.num_kernels, m, self.seed);
                let p = bank.num_features();
                let mut g = bank.transform(x);
                let (mean, scale) = column_stats(&g, n, p);
                for row in g.chunks_mut(p) {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = (*v - mean[j]) / scale[j];
                    }
                }
                (FeatureState::Kernels { bank, mean, scale }, g)
            }
        };
        let p = g.len() / n.max(1);

        let k = num_classes;
        let mut targets = vec![-T::one(); n * k];
        for (i, &l) in y.iter().enumerate() {
            targets[i * k + l] = T::one();
        }
        let nf = T::of(n as f64);
        let mut intercepts = vec![T::zero(); k];
        for row in targets.chunks(k) {
            for (b, &t) in intercepts.iter_mut().zip(row) {
                *b = *b + t;
            }
        }
        intercepts.iter_mut().for_each(|b| *b = *b / nf);
        for row in targets.chunks_mut(k) {
            for (t, &b) in row.iter_mut().zip(&intercepts) {
                *t = *t - b;
            }
        }
        let weights = ridge::ridge_solve(&g, n, p, &targets, k, T::of(self.ridge_lambda))?;
        Ok(TrainedClassifier {
            spec: self.clone(),
            features,
            weights,
            intercepts,
            class_ids: (0..k).collect(),
            series_len: m,
        })
    }
}

/// Fits `spec` on a whole dataset.
pub fn fit_classifier<T: Scalar>(spec: &ClassifierSpec, data: &TimeSeriesDataset<T>) -> Result<TrainedClassifier<T>> {
    spec.fit(data.values(), data.labels(), data.num_classes())
}

pub fn predict_classifier<T: Scalar>(model: &TrainedClassifier<T>, x: &SeriesMatrix<T>) -> Result<Vec<ClassId>> {
    model.predict(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n_per: usize, m: usize, gap: f64) -> TimeSeriesDataset<f64> {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut s = 1u64;
        for c in 0..2 {
            for _ in 0..n_per {
                let row: Vec<f64> = (0..m)
                    .map(|_| {
                        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                        let u = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                        c as f64 * gap + 0.2 * u
                    })
                    .collect();
                rows.push(row);
                labels.push(c);
            }
        }
        TimeSeriesDataset::new(SeriesMatrix::from_rows(&rows).unwrap(), labels, TimeSeriesDataset::<f64>::default_names(2))
            .unwrap()
    }

    #[test]
    fn linear_separates_shifted_classes() {
        let d = toy(10, 8, 2.0);
        let model = fit_classifier(&ClassifierSpec::linear(), &d).unwrap();
        assert_eq!(model.num_features(), 8);
        assert_eq!(model.predict(d.values()).unwrap(), d.labels());
    }

    #[test]
    fn kernel_ridge_is_deterministic() {
        let d = toy(6, 30, 1.0);
        let spec = ClassifierSpec::kernel_ridge(32);
        let a = fit_classifier(&spec, &d).unwrap();
        let b = fit_classifier(&spec, &d).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.num_features(), 64);
        let back = TrainedClassifier::<f64>::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn zero_weights_predict_smallest_class() {
        let d = toy(3, 4, 1.0);
        let mut model = fit_classifier(&ClassifierSpec::linear(), &d).unwrap();
        model.weights.iter_mut().for_each(|w| *w = 0.0);
        model.intercepts.iter_mut().for_each(|b| *b = 0.0);
        assert!(model.predict(d.values()).unwrap().iter().all(|&l| l == 0));
    }

    #[test]
    fn single_row_and_length_checks() {
        let d = toy(3, 4, 1.0);
        let model = fit_classifier(&ClassifierSpec::linear(), &d).unwrap();
        let one = d.values().select_rows(&[4]);
        assert_eq!(model.predict(&one).unwrap().len(), 1);
        let wrong = SeriesMatrix::new(1, 5, vec![0.0; 5]).unwrap();
        assert!(matches!(model.predict(&wrong), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn single_class_rejected() {
        let d = toy(3, 4, 1.0);
        let idx = d.indices_where(|c| c == 0);
        let only = d.subset(&idx);
        assert!(fit_classifier(&ClassifierSpec::linear(), &only).is_err());
    }

    #[test]
    fn constant_features_do_not_fail() {
        let x = SeriesMatrix::new(4, 3, vec![1.0; 12]).unwrap();
        let model: TrainedClassifier<f64> = ClassifierSpec::kernel_ridge(4).fit(&x, &[0, 0, 1, 1], 2).unwrap();
        assert_eq!(model.predict(&x).unwrap(), vec![0; 4]);
    }

    #[test]
    fn invalid_spec_rejected() {
        let d = toy(3, 4, 1.0);
        let mut spec = ClassifierSpec::linear();
        spec.ridge_lambda = 0.0;
        assert!(fit_classifier(&spec, &d).is_err());
        spec = ClassifierSpec::kernel_ridge(0);
        assert!(fit_classifier(&spec, &d).is_err());
    }
}
