#![allow(dead_code)]

use hdcssf::split::Splitter;
use hdcssf::treegen::grow_tree;
use hdcssf::{ClassId, ClassSet, Classifier, HierarchyTree, Learner, Result, SeriesMatrix, TimeSeriesDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Nearest class mean, ties to the smaller id.
pub struct Centroid;
pub struct CentroidModel(Vec<Vec<f64>>);

impl Classifier<f64> for CentroidModel {
    fn predict(&self, x: &SeriesMatrix<f64>) -> Result<Vec<ClassId>> {
        Ok(x.iter_rows()
            .map(|r| {
                let d = |c: &Vec<f64>| c.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                (0..self.0.len()).fold(0, |best, c| if d(&self.0[c]) < d(&self.0[best]) { c } else { best })
            })
            .collect())
    }
}

impl Learner<f64> for Centroid {
    type Model = CentroidModel;
    fn fit(&self, x: &SeriesMatrix<f64>, y: &[ClassId], k: usize) -> Result<CentroidModel> {
        let mut sums = vec![vec![0.0; x.cols()]; k];
        let mut n = vec![0.0f64; k];
        for (r, &l) in x.iter_rows().zip(y) {
            n[l] += 1.0;
            for (s, v) in sums[l].iter_mut().zip(r) {
                *s += v;
            }
        }
        for (s, n) in sums.iter_mut().zip(&n) {
            s.iter_mut().for_each(|v| *v /= n.max(1.0));
        }
        Ok(CentroidModel(sums))
    }
}

/// Reads the true class from the first value and memorises its label.
pub struct Oracle;
pub struct OracleModel(Vec<ClassId>);

impl Classifier<f64> for OracleModel {
    fn predict(&self, x: &SeriesMatrix<f64>) -> Result<Vec<ClassId>> {
        Ok(x.iter_rows().map(|r| self.0[r[0] as usize]).collect())
    }
}

impl Learner<f64> for Oracle {
    type Model = OracleModel;
    fn fit(&self, x: &SeriesMatrix<f64>, y: &[ClassId], _: usize) -> Result<OracleModel> {
        let mut map = vec![0; 64];
        for (r, &l) in x.iter_rows().zip(y) {
            map[r[0] as usize] = l;
        }
        Ok(OracleModel(map))
    }
}

/// Rows whose first value is the class id, `counts[c]` rows of class `c`.
pub fn labelled_rows(counts: &[usize]) -> TimeSeriesDataset<f64> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, &n) in counts.iter().enumerate() {
        for i in 0..n {
            rows.push(vec![c as f64, i as f64]);
            labels.push(c);
        }
    }
    TimeSeriesDataset::new(
        SeriesMatrix::from_rows(&rows).unwrap(),
        labels,
        TimeSeriesDataset::<f64>::default_names(counts.len()),
    )
    .unwrap()
}

/// Class levels with deterministic jitter; a nearest-centroid stub gets
/// most but not all rows right.
pub fn jittered_levels(classes: usize, per_class: usize) -> TimeSeriesDataset<f64> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..classes * per_class {
        let c = i % classes;
        let wobble = ((i * 7919) % 13) as f64 / 4.0;
        rows.push(vec![c as f64 + wobble, (c / 2) as f64 * 3.0 - wobble, c as f64]);
        labels.push(c);
    }
    TimeSeriesDataset::new(
        SeriesMatrix::from_rows(&rows).unwrap(),
        labels,
        TimeSeriesDataset::<f64>::default_names(classes),
    )
    .unwrap()
}

/// A tree grown with uniformly random split scores.
pub fn random_tree(num_classes: usize, seed: u64) -> HierarchyTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut score_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let splitter = Splitter::STOCHASTIC[rng.random_range(0..3)];
    let mut scorer = |_: &ClassSet, _: &ClassSet| -> Result<f64> { Ok(score_rng.random::<f64>()) };
    grow_tree(&ClassSet::range(num_classes), splitter, &mut scorer, &mut rng)
        .unwrap()
        .tree
}

/// Every hierarchy over `members`, one per similarity class, as pair lists.
pub fn enumerate_pairs(members: &[usize]) -> Vec<Vec<(Vec<usize>, Vec<usize>)>> {
    if members.len() == 1 {
        return vec![Vec::new()];
    }
    let (anchor, rest) = members.split_first().unwrap();
    let mut out = Vec::new();
    for mask in 0..(1u32 << rest.len()) - 1 {
        let mut left = vec![*anchor];
        let mut right = Vec::new();
        for (i, &c) in rest.iter().enumerate() {
            if mask >> i & 1 == 1 {
                left.push(c);
            } else {
                right.push(c);
            }
        }
        let lt = enumerate_pairs(&left);
        let rt = enumerate_pairs(&right);
        for l in &lt {
            for r in &rt {
                let mut pairs = vec![(left.clone(), right.clone())];
                pairs.extend(l.iter().cloned());
                pairs.extend(r.iter().cloned());
                out.push(pairs);
            }
        }
    }
    out
}

pub fn build(pairs: &[(Vec<usize>, Vec<usize>)]) -> HierarchyTree {
    HierarchyTree::build(
        pairs
            .iter()
            .map(|(a, b)| (ClassSet::new(a.clone()).unwrap(), ClassSet::new(b.clone()).unwrap()))
            .collect(),
    )
    .unwrap()
}

/// Two-sided p of a correlation by Simpson integration of the t density.
pub fn p_value_by_quadrature(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let t = r.abs() * (df / (1.0 - r * r)).sqrt();
    let ln_c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    let density = |x: f64| (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp();
    let steps = 200_000;
    let h = t / steps as f64;
    let mut acc = density(0.0) + density(t);
    for i in 1..steps {
        acc += density(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let half = acc * h / 3.0;
    1.0 - 2.0 * half
}

/// Lanczos approximation.
fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return std::f64::consts::PI.ln() - (std::f64::consts::PI * x).sin().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let mut a = G[0];
    for (i, g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Correlation straight from the covariance definition.
pub fn pearson_by_definition(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (n - 1.0);
    let sx = (x.iter().map(|a| (a - mx).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let sy = (y.iter().map(|b| (b - my).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    cov / (sx * sy)
}
