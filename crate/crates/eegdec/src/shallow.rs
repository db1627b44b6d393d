//! Baseline classifiers: one-vs-rest linear SVM trained by deterministic
//! epoch-based subgradient descent, and LDA with a ridge-regularized shared
//! covariance. Both standardize or whiten in f64 and break prediction ties
//! toward the lowest class index.

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{EegError, Result};
use crate::io::{read_eegd, write_eegd};
use crate::linalg::spd_inverse;
use crate::rng::mix_seed;

pub const SVM_C: f64 = 1.0;
pub const SVM_EPOCHS: usize = 200;
pub const LDA_RIDGE: f64 = 1e-3;

/// One-vs-rest linear SVM with stored feature standardization.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvmModel {
    pub weights: Array2<f64>, // n_classes × dim
    pub biases: Vec<f64>,
    pub c: f64,
    pub mean: Vec<f64>,
    pub std: Vec<f64>, // clamped > 0
}

impl LinearSvmModel {
    pub fn n_classes(&self) -> usize {
        self.weights.nrows()
    }

    pub fn dim(&self) -> usize {
        self.weights.ncols()
    }
}

fn class_count(labels: &[usize]) -> Result<usize> {
    let k = labels.iter().copied().max().map(|m| m + 1).unwrap_or(0);
    let mut present = vec![false; k];
    for &l in labels {
        present[l] = true;
    }
    let distinct = present.iter().filter(|&&p| p).count();
    if distinct < 2 {
        return Err(EegError::InvalidLabel(format!(
            "need at least 2 classes, got {distinct}"
        )));
    }
    Ok(k)
}

fn standardization(features: ArrayView2<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = features.nrows() as f64;
    let d = features.ncols();
    let mut mean = vec![0.0; d];
    let mut std = vec![0.0; d];
    for j in 0..d {
        let col = features.column(j);
        let m: f64 = col.iter().sum::<f64>() / n;
        let v: f64 = col.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / n;
        mean[j] = m;
        std[j] = v.sqrt().max(1e-12);
    }
    (mean, std)
}

fn standardize(features: ArrayView2<f64>, mean: &[f64], std: &[f64]) -> Array2<f64> {
    let mut z = features.to_owned();
    for mut row in z.outer_iter_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (*v - mean[j]) / std[j];
        }
    }
    z
}

/// Train one-vs-rest L2-regularized hinge-loss classifiers with a 1/(λt)
/// step schedule (λ = 1/(nC)) and seeded per-epoch shuffling. The bias is
/// learned as an augmented constant feature. Identical inputs and seed give
/// bit-identical models.
pub fn svm_fit(
    features: ArrayView2<f64>,
    labels: &[usize],
    c: f64,
    epochs: usize,
    seed: u64,
) -> Result<LinearSvmModel> {
    let n = features.nrows();
    if n != labels.len() {
        return Err(EegError::ShapeMismatch(format!(
            "{n} feature rows but {} labels",
            labels.len()
        )));
    }
    if n < 2 {
        return Err(EegError::InsufficientData("svm_fit needs >= 2 samples".into()));
    }
    if !(c > 0.0) {
        return Err(EegError::InvalidParameter(format!("C must be > 0, got {c}")));
    }
    let k = class_count(labels)?;
    let d = features.ncols();

    let (mean, std) = standardization(features);
    let z = standardize(features, &mean, &std);

    let lambda = 1.0 / (n as f64 * c);
    let mut weights = Array2::<f64>::zeros((k, d));
    let mut biases = vec![0.0; k];

    for class in 0..k {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x57A0, class as u64));
        let mut w = vec![0.0f64; d];
        let mut b = 0.0f64;
        let mut order: Vec<usize> = (0..n).collect();
        let mut t = 0u64;
        for _epoch in 0..epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                t += 1;
                let eta = 1.0 / (lambda * t as f64);
                let y = if labels[i] == class { 1.0 } else { -1.0 };
                let row = z.row(i);
                let margin = y * (row
                    .iter()
                    .zip(w.iter())
                    .map(|(&x, &wj)| x * wj)
                    .sum::<f64>()
                    + b);
                let shrink = 1.0 - eta * lambda; // = 1 - 1/t
                for wj in w.iter_mut() {
                    *wj *= shrink;
                }
                b *= shrink;
                if margin < 1.0 {
                    let step = eta * y;
                    for (wj, &x) in w.iter_mut().zip(row.iter()) {
                        *wj += step * x;
                    }
                    b += step;
                }
            }
        }
        for (j, &wj) in w.iter().enumerate() {
            weights[[class, j]] = wj;
        }
        biases[class] = b;
    }
    Ok(LinearSvmModel {
        weights,
        biases,
        c,
        mean,
        std,
    })
}

/// Decision values per class for already-standardized rows.
fn svm_scores(model: &LinearSvmModel, z: &Array2<f64>) -> Array2<f64> {
    let mut scores = Array2::<f64>::zeros((z.nrows(), model.n_classes()));
    for (i, row) in z.outer_iter().enumerate() {
        for class in 0..model.n_classes() {
            let w = model.weights.row(class);
            scores[[i, class]] =
                row.iter().zip(w.iter()).map(|(&x, &wj)| x * wj).sum::<f64>()
                    + model.biases[class];
        }
    }
    scores
}

fn argmax_lowest_tie(scores: &Array2<f64>) -> Vec<usize> {
    scores
        .outer_iter()
        .map(|row| {
            let mut best = 0usize;
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Argmax over one-vs-rest decision values; ties go to the lowest class index.
pub fn svm_predict(model: &LinearSvmModel, features: ArrayView2<f64>) -> Result<Vec<usize>> {
    if features.ncols() != model.dim() {
        return Err(EegError::ShapeMismatch(format!(
            "features have {} dims, model expects {}",
            features.ncols(),
            model.dim()
        )));
    }
    let z = standardize(features, &model.mean, &model.std);
    Ok(argmax_lowest_tie(&svm_scores(model, &z)))
}

/// LDA with shared ridge-regularized covariance and frequency priors.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    pub means: Array2<f64>, // n_classes × dim
    pub cov_inv: Array2<f64>,
    pub log_priors: Vec<f64>,
    pub ridge: f64,
}

impl LdaModel {
    pub fn n_classes(&self) -> usize {
        self.means.nrows()
    }

    pub fn dim(&self) -> usize {
        self.means.ncols()
    }
}

/// Fit LDA: class means, pooled (maximum-likelihood) within-class covariance
/// plus ridge·trace/d·I, priors from class frequencies.
pub fn lda_fit(features: ArrayView2<f64>, labels: &[usize], ridge: f64) -> Result<LdaModel> {
    let n = features.nrows();
    if n != labels.len() {
        return Err(EegError::ShapeMismatch(format!(
            "{n} feature rows but {} labels",
            labels.len()
        )));
    }
    if ridge < 0.0 {
        return Err(EegError::InvalidParameter("ridge must be >= 0".into()));
    }
    let k = class_count(labels)?;
    let d = features.ncols();
    let mut counts = vec![0usize; k];
    for &l in labels {
        counts[l] += 1;
    }
    for (class, &cnt) in counts.iter().enumerate() {
        if cnt < 2 {
            return Err(EegError::InsufficientData(format!(
                "class {class} has {cnt} samples, need >= 2"
            )));
        }
    }

    let mut means = Array2::<f64>::zeros((k, d));
    for (i, row) in features.outer_iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            means[[labels[i], j]] += v;
        }
    }
    for class in 0..k {
        for j in 0..d {
            means[[class, j]] /= counts[class] as f64;
        }
    }

    let mut cov = Array2::<f64>::zeros((d, d));
    for (i, row) in features.outer_iter().enumerate() {
        let m = means.row(labels[i]);
        let diff: Vec<f64> = row.iter().zip(m.iter()).map(|(&x, &mu)| x - mu).collect();
        for a in 0..d {
            for b in a..d {
                cov[[a, b]] += diff[a] * diff[b];
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = cov[[a, b]] / n as f64;
            cov[[a, b]] = v;
            cov[[b, a]] = v;
        }
    }
    let trace: f64 = (0..d).map(|i| cov[[i, i]]).sum();
    let shift = ridge * trace / d as f64;
    for i in 0..d {
        cov[[i, i]] += shift;
    }

    let cov_inv = spd_inverse(&cov)?;
    let log_priors: Vec<f64> = counts
        .iter()
        .map(|&cnt| (cnt as f64 / n as f64).ln())
        .collect();
    Ok(LdaModel {
        means,
        cov_inv,
        log_priors,
        ridge,
    })
}

fn lda_scores(model: &LdaModel, features: ArrayView2<f64>) -> Array2<f64> {
    let k = model.n_classes();
    let d = model.dim();
    // Precompute Σ⁻¹ μ_c and the constant term per class.
    let mut sigma_mu = Array2::<f64>::zeros((k, d));
    let mut consts = vec![0.0; k];
    for class in 0..k {
        let mu = model.means.row(class);
        for a in 0..d {
            let mut s = 0.0;
            for b in 0..d {
                s += model.cov_inv[[a, b]] * mu[b];
            }
            sigma_mu[[class, a]] = s;
        }
        let quad: f64 = (0..d).map(|a| mu[a] * sigma_mu[[class, a]]).sum();
        consts[class] = -0.5 * quad + model.log_priors[class];
    }
    let mut scores = Array2::<f64>::zeros((features.nrows(), k));
    for (i, row) in features.outer_iter().enumerate() {
        for class in 0..k {
            let dot: f64 = row
                .iter()
                .zip(sigma_mu.row(class).iter())
                .map(|(&x, &s)| x * s)
                .sum();
            scores[[i, class]] = dot + consts[class];
        }
    }
    scores
}

/// Argmax over discriminant scores; ties go to the lowest class index.
pub fn lda_predict(model: &LdaModel, features: ArrayView2<f64>) -> Result<Vec<usize>> {
    if features.ncols() != model.dim() {
        return Err(EegError::ShapeMismatch(format!(
            "features have {} dims, model expects {}",
            features.ncols(),
            model.dim()
        )));
    }
    Ok(argmax_lowest_tie(&lda_scores(model, features)))
}

#[derive(Serialize, Deserialize)]
struct SvmHeader {
    kind: String,
    n_classes: usize,
    dim: usize,
    c: f64,
}

impl LinearSvmModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        let header = SvmHeader {
            kind: "svm".into(),
            n_classes: self.n_classes(),
            dim: self.dim(),
            c: self.c,
        };
        let mut payload: Vec<f32> = Vec::new();
        payload.extend(self.weights.iter().map(|&v| v as f32));
        payload.extend(self.biases.iter().map(|&v| v as f32));
        payload.extend(self.mean.iter().map(|&v| v as f32));
        payload.extend(self.std.iter().map(|&v| v as f32));
        write_eegd(path, &header, &payload)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (header, payload): (SvmHeader, Vec<f32>) = read_eegd(path)?;
        if header.kind != "svm" {
            return Err(EegError::Format(format!(
                "expected kind \"svm\", got \"{}\"",
                header.kind
            )));
        }
        let (k, d) = (header.n_classes, header.dim);
        if payload.len() != k * d + k + 2 * d {
            return Err(EegError::Format("svm payload size mismatch".into()));
        }
        let mut it = payload.into_iter().map(|v| v as f64);
        let weights =
            Array2::from_shape_vec((k, d), (&mut it).take(k * d).collect()).unwrap();
        let biases: Vec<f64> = (&mut it).take(k).collect();
        let mean: Vec<f64> = (&mut it).take(d).collect();
        let std: Vec<f64> = it.collect();
        Ok(Self {
            weights,
            biases,
            c: header.c,
            mean,
            std,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct LdaHeader {
    kind: String,
    n_classes: usize,
    dim: usize,
    ridge: f64,
}

impl LdaModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        let header = LdaHeader {
            kind: "lda".into(),
            n_classes: self.n_classes(),
            dim: self.dim(),
            ridge: self.ridge,
        };
        let mut payload: Vec<f32> = Vec::new();
        payload.extend(self.means.iter().map(|&v| v as f32));
        payload.extend(self.cov_inv.iter().map(|&v| v as f32));
        payload.extend(self.log_priors.iter().map(|&v| v as f32));
        write_eegd(path, &header, &payload)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (header, payload): (LdaHeader, Vec<f32>) = read_eegd(path)?;
        if header.kind != "lda" {
            return Err(EegError::Format(format!(
                "expected kind \"lda\", got \"{}\"",
                header.kind
            )));
        }
        let (k, d) = (header.n_classes, header.dim);
        if payload.len() != k * d + d * d + k {
            return Err(EegError::Format("lda payload size mismatch".into()));
        }
        let mut it = payload.into_iter().map(|v| v as f64);
        let means = Array2::from_shape_vec((k, d), (&mut it).take(k * d).collect()).unwrap();
        let cov_inv =
            Array2::from_shape_vec((d, d), (&mut it).take(d * d).collect()).unwrap();
        let log_priors: Vec<f64> = it.collect();
        Ok(Self {
            means,
            cov_inv,
            log_priors,
            ridge: header.ridge,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// `k` Gaussian blobs in `dim`-D, unit spacing along coordinate axes.
    fn blobs(
        k: usize,
        dim: usize,
        per_class: usize,
        sigma: f64,
        seed: u64,
    ) -> (Array2<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, sigma).unwrap();
        let n = k * per_class;
        let mut x = Array2::<f64>::zeros((n, dim));
        let mut y = Vec::with_capacity(n);
        for class in 0..k {
            for i in 0..per_class {
                let row = class * per_class + i;
                for j in 0..dim {
                    let center = if j == class % dim { class as f64 } else { 0.0 };
                    x[[row, j]] = center + normal.sample(&mut rng);
                }
                y.push(class);
            }
        }
        (x, y)
    }

    fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
        pred.iter()
            .zip(truth)
            .filter(|(a, b)| a == b)
            .count() as f64
            / truth.len() as f64
    }

    #[test]
    fn svm_separable_blobs_reach_full_training_accuracy() {
        let (x, y) = blobs(2, 2, 30, 0.15, 3);
        let model = svm_fit(x.view(), &y, SVM_C, SVM_EPOCHS, 1).unwrap();
        let pred = svm_predict(&model, x.view()).unwrap();
        assert_eq!(accuracy(&pred, &y), 1.0);
    }

    #[test]
    fn svm_symmetric_data_has_tiny_bias() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 40;
        let mut x = Array2::<f64>::zeros((2 * n, 3));
        let mut y = Vec::new();
        for i in 0..n {
            let v: Vec<f64> = (0..3).map(|_| rng.random_range(0.5..2.0)).collect();
            for j in 0..3 {
                x[[2 * i, j]] = v[j];
                x[[2 * i + 1, j]] = -v[j];
            }
            y.push(0);
            y.push(1);
        }
        let model = svm_fit(x.view(), &y, 1.0, 200, 5).unwrap();
        for &b in &model.biases {
            assert!(b.abs() <= 1e-3, "bias {b} too large");
        }
    }

    #[test]
    fn svm_blobs_generalize() {
        let (xtr, ytr) = blobs(4, 10, 40, 0.2, 11);
        let (xte, yte) = blobs(4, 10, 40, 0.2, 12);
        let model = svm_fit(xtr.view(), &ytr, SVM_C, SVM_EPOCHS, 2).unwrap();
        let pred = svm_predict(&model, xte.view()).unwrap();
        let acc = accuracy(&pred, &yte);
        assert!(acc >= 0.95, "held-out accuracy {acc}");
    }

    #[test]
    fn svm_deterministic_and_seed_sensitive() {
        let (x, y) = blobs(3, 4, 20, 0.3, 21);
        let a = svm_fit(x.view(), &y, 1.0, 50, 7).unwrap();
        let b = svm_fit(x.view(), &y, 1.0, 50, 7).unwrap();
        assert_eq!(a, b, "same seed must give bit-identical models");
    }

    #[test]
    fn svm_tie_break_and_errors() {
        // Hand-built model: classes 1 and 2 tie, class 0 lower.
        let model = LinearSvmModel {
            weights: Array2::zeros((3, 2)),
            biases: vec![-1.0, 0.5, 0.5],
            c: 1.0,
            mean: vec![0.0, 0.0],
            std: vec![1.0, 1.0],
        };
        let x = Array2::zeros((1, 2));
        let pred = svm_predict(&model, x.view()).unwrap();
        assert_eq!(pred, vec![1]);

        let wrong = Array2::zeros((1, 3));
        assert!(matches!(
            svm_predict(&model, wrong.view()),
            Err(EegError::ShapeMismatch(_))
        ));

        let (x, _) = blobs(2, 2, 5, 0.1, 1);
        let single = vec![0usize; x.nrows()];
        assert!(matches!(
            svm_fit(x.view(), &single, 1.0, 10, 1),
            Err(EegError::InvalidLabel(_))
        ));
    }

    #[test]
    fn svm_standardization_idempotent_predictions() {
        let (x, y) = blobs(3, 5, 20, 0.3, 31);
        let model = svm_fit(x.view(), &y, 1.0, 50, 3).unwrap();
        let base = svm_predict(&model, x.view()).unwrap();
        // standardize then destandardize
        let mut xd = x.clone();
        for mut row in xd.outer_iter_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                let z = (*v - model.mean[j]) / model.std[j];
                *v = z * model.std[j] + model.mean[j];
            }
        }
        let again = svm_predict(&model, xd.view()).unwrap();
        assert_eq!(base, again);
    }

    #[test]
    fn lda_two_gaussians_boundary_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let n = 4000;
        let mut x = Array2::<f64>::zeros((2 * n, 1));
        let mut y = Vec::new();
        for i in 0..n {
            x[[2 * i, 0]] = -1.0 + normal.sample(&mut rng);
            x[[2 * i + 1, 0]] = 1.0 + normal.sample(&mut rng);
            y.push(0);
            y.push(1);
        }
        let model = lda_fit(x.view(), &y, 0.0).unwrap();
        // locate the decision boundary by bisection on the score difference
        let score_diff = |v: f64| {
            let f = Array2::from_shape_vec((1, 1), vec![v]).unwrap();
            let s = lda_scores(&model, f.view());
            s[[0, 0]] - s[[0, 1]]
        };
        let (mut lo, mut hi) = (-1.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if score_diff(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let boundary = 0.5 * (lo + hi);
        assert!(boundary.abs() <= 0.05, "boundary at {boundary}");
    }

    #[test]
    fn lda_duplication_invariance() {
        let (x, y) = blobs(3, 4, 15, 0.3, 17);
        let model_a = lda_fit(x.view(), &y, LDA_RIDGE).unwrap();

        let n = x.nrows();
        let mut xx = Array2::<f64>::zeros((2 * n, x.ncols()));
        let mut yy = Vec::with_capacity(2 * n);
        for i in 0..n {
            for j in 0..x.ncols() {
                xx[[i, j]] = x[[i, j]];
                xx[[n + i, j]] = x[[i, j]];
            }
        }
        yy.extend_from_slice(&y);
        yy.extend_from_slice(&y);
        let model_b = lda_fit(xx.view(), &yy, LDA_RIDGE).unwrap();
        for (a, b) in model_a.means.iter().zip(model_b.means.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in model_a.cov_inv.iter().zip(model_b.cov_inv.iter()) {
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn lda_blobs_generalize() {
        let (xtr, ytr) = blobs(4, 10, 40, 0.2, 41);
        let (xte, yte) = blobs(4, 10, 40, 0.2, 42);
        let model = lda_fit(xtr.view(), &ytr, LDA_RIDGE).unwrap();
        let pred = lda_predict(&model, xte.view()).unwrap();
        let acc = accuracy(&pred, &yte);
        assert!(acc >= 0.95, "held-out accuracy {acc}");
    }

    #[test]
    fn lda_class_means_predict_their_class() {
        let (x, y) = blobs(3, 4, 20, 0.25, 19);
        let model = lda_fit(x.view(), &y, LDA_RIDGE).unwrap();
        let pred = lda_predict(&model, model.means.view()).unwrap();
        assert_eq!(pred, vec![0, 1, 2]);
    }

    #[test]
    fn lda_midpoint_tie_goes_low() {
        // Equal priors, symmetric means: the midpoint scores tie exactly.
        let x = Array2::from_shape_vec(
            (4, 1),
            vec![-1.5, -0.5, 0.5, 1.5],
        )
        .unwrap();
        let y = vec![0, 0, 1, 1];
        let model = lda_fit(x.view(), &y, 0.0).unwrap();
        let mid = Array2::from_shape_vec((1, 1), vec![0.0]).unwrap();
        let pred = lda_predict(&model, mid.view()).unwrap();
        assert_eq!(pred, vec![0]);
    }

    #[test]
    fn lda_two_class_segment_crosses_once() {
        let (x, y) = blobs(2, 3, 30, 0.3, 23);
        let model = lda_fit(x.view(), &y, LDA_RIDGE).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let a: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..3.0)).collect();
            let b: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..3.0)).collect();
            let mut changes = 0;
            let mut last = None;
            for step in 0..=200 {
                let t = step as f64 / 200.0;
                let p: Vec<f64> = a.iter().zip(&b).map(|(&u, &v)| u + t * (v - u)).collect();
                let f = Array2::from_shape_vec((1, 3), p).unwrap();
                let pred = lda_predict(&model, f.view()).unwrap()[0];
                if let Some(prev) = last {
                    if prev != pred {
                        changes += 1;
                    }
                }
                last = Some(pred);
            }
            assert!(changes <= 1, "predictions changed {changes} times on a segment");
        }
    }

    #[test]
    fn lda_errors() {
        let (x, _) = blobs(2, 2, 5, 0.1, 1);
        let bad = vec![0usize, 0, 0, 0, 0, 0, 0, 0, 0, 1];
        assert!(matches!(
            lda_fit(x.view(), &bad, 0.0),
            Err(EegError::InsufficientData(_))
        ));
    }

    #[test]
    fn model_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let (x, y) = blobs(3, 4, 10, 0.2, 55);

        let svm = svm_fit(x.view(), &y, 1.0, 30, 1).unwrap();
        let p = dir.path().join("m.svm");
        svm.save(&p).unwrap();
        let svm2 = LinearSvmModel::load(&p).unwrap();
        assert_eq!(
            svm_predict(&svm, x.view()).unwrap(),
            svm_predict(&svm2, x.view()).unwrap()
        );

        let lda = lda_fit(x.view(), &y, LDA_RIDGE).unwrap();
        let p = dir.path().join("m.lda");
        lda.save(&p).unwrap();
        let lda2 = LdaModel::load(&p).unwrap();
        assert_eq!(
            lda_predict(&lda, x.view()).unwrap(),
            lda_predict(&lda2, x.view()).unwrap()
        );
    }
}
