//! Classical feature extraction: Welch band-power features for the PSD-SVM
//! baseline and one-vs-rest common spatial patterns for CSP-LDA.

use ndarray::{Array2, ArrayView2};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{EegError, Result};
use crate::io::{read_eegd, write_eegd};
use crate::linalg::generalized_eigh;
use crate::signal::EpochSet;

/// Frequency band with half-open range [lo_hz, hi_hz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandDefinition {
    pub name: String,
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl BandDefinition {
    pub fn new(name: &str, lo_hz: f64, hi_hz: f64) -> Self {
        Self {
            name: name.into(),
            lo_hz,
            hi_hz,
        }
    }
}

/// The four analysis bands: δ [1,4), θ [4,8), α [8,13), β [13,30).
pub fn default_bands() -> Vec<BandDefinition> {
    vec![
        BandDefinition::new("delta", 1.0, 4.0),
        BandDefinition::new("theta", 4.0, 8.0),
        BandDefinition::new("alpha", 8.0, 13.0),
        BandDefinition::new("beta", 13.0, 30.0),
    ]
}

pub const WELCH_WIN_S: f64 = 1.0;
pub const WELCH_OVERLAP: f64 = 0.5;

/// Welch PSD per channel: Hann-windowed overlapping segments, constant
/// detrend, one-sided density scaling (Σ PSD·Δf ≈ signal variance).
/// Output is channels × (L/2 + 1) bins with resolution fs/L, L = win_s·fs.
pub fn welch_psd(
    epoch: ArrayView2<f32>,
    fs: f64,
    win_s: f64,
    overlap: f64,
) -> Result<Array2<f64>> {
    let n = epoch.ncols();
    let l = (win_s * fs).round() as usize;
    if l < 8 {
        return Err(EegError::InvalidParameter(format!(
            "window of {l} samples is shorter than 8"
        )));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(EegError::InvalidParameter(format!(
            "overlap {overlap} outside [0, 1)"
        )));
    }
    if l > n {
        return Err(EegError::InvalidParameter(format!(
            "window of {l} samples longer than epoch of {n}"
        )));
    }
    let hop = ((l as f64) * (1.0 - overlap)).round().max(1.0) as usize;

    // periodic Hann window
    let window: Vec<f64> = (0..l)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / l as f64).cos()))
        .collect();
    let win_power: f64 = window.iter().map(|w| w * w).sum();

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(l);

    let bins = l / 2 + 1;
    let mut psd = Array2::<f64>::zeros((epoch.nrows(), bins));
    let mut buf = vec![Complex::new(0.0, 0.0); l];

    for (c, row) in epoch.outer_iter().enumerate() {
        let mut n_segments = 0usize;
        let mut start = 0usize;
        while start + l <= n {
            let seg = &row.as_slice().expect("contiguous epoch row")[start..start + l];
            let mean: f64 = seg.iter().map(|&v| v as f64).sum::<f64>() / l as f64;
            for (i, v) in seg.iter().enumerate() {
                buf[i] = Complex::new((*v as f64 - mean) * window[i], 0.0);
            }
            fft.process(&mut buf);
            for k in 0..bins {
                let mag2 = buf[k].norm_sqr();
                let one_sided = if k == 0 || (l % 2 == 0 && k == l / 2) {
                    1.0
                } else {
                    2.0
                };
                psd[[c, k]] += one_sided * mag2;
            }
            n_segments += 1;
            start += hop;
        }
        let scale = 1.0 / (fs * win_power * n_segments as f64);
        for k in 0..bins {
            psd[[c, k]] *= scale;
        }
    }
    Ok(psd)
}

/// Mean PSD per channel per band, flattened channel-major
/// (channel 0's bands first). 58 channels × 4 bands → 232 features.
pub fn band_powers(psd: &Array2<f64>, fs: f64, bands: &[BandDefinition]) -> Result<Vec<f64>> {
    let bins = psd.ncols();
    if bins < 2 {
        return Err(EegError::InvalidParameter("PSD needs at least 2 bins".into()));
    }
    let df = fs / (2.0 * (bins - 1) as f64);
    let nyquist = fs / 2.0;
    let mut features = Vec::with_capacity(psd.nrows() * bands.len());
    for band in bands {
        if !(band.lo_hz < band.hi_hz) || band.lo_hz < 0.0 || band.hi_hz > nyquist + 1e-9 {
            return Err(EegError::InvalidParameter(format!(
                "band {} [{}, {}) outside [0, {nyquist}]",
                band.name, band.lo_hz, band.hi_hz
            )));
        }
    }
    for c in 0..psd.nrows() {
        for band in bands {
            let mut sum = 0.0;
            let mut count = 0usize;
            for k in 0..bins {
                let f = k as f64 * df;
                if f >= band.lo_hz && f < band.hi_hz {
                    sum += psd[[c, k]];
                    count += 1;
                }
            }
            if count == 0 {
                return Err(EegError::InvalidParameter(format!(
                    "band {} [{}, {}) contains no PSD bins (Δf = {df})",
                    band.name, band.lo_hz, band.hi_hz
                )));
            }
            features.push(sum / count as f64);
        }
    }
    Ok(features)
}

pub const CSP_FILTERS_PER_CLASS: usize = 4;
pub const CSP_RIDGE: f64 = 1e-6;

/// One-vs-rest CSP spatial filters. `filters` rows are unit-normalized;
/// class c owns rows `class_ranges[c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CspModel {
    pub filters: Array2<f64>,
    pub class_ranges: Vec<(usize, usize)>,
    pub eigenvalues: Vec<f64>,
    pub ridge: f64,
    pub class_count: usize,
}

/// Per-trial covariance (channel-centered, trace-normalized), f64.
fn trial_covariance(epoch: ArrayView2<f32>) -> Result<Array2<f64>> {
    let c = epoch.nrows();
    let t = epoch.ncols();
    let mut centered = Array2::<f64>::zeros((c, t));
    for (i, row) in epoch.outer_iter().enumerate() {
        let mean: f64 = row.iter().map(|&v| v as f64).sum::<f64>() / t as f64;
        for (j, &v) in row.iter().enumerate() {
            centered[[i, j]] = v as f64 - mean;
        }
    }
    let mut cov = Array2::<f64>::zeros((c, c));
    for i in 0..c {
        for j in i..c {
            let mut s = 0.0;
            for k in 0..t {
                s += centered[[i, k]] * centered[[j, k]];
            }
            let v = s / t as f64;
            cov[[i, j]] = v;
            cov[[j, i]] = v;
        }
    }
    let trace: f64 = (0..c).map(|i| cov[[i, i]]).sum();
    if !trace.is_finite() || trace <= 0.0 {
        return Err(EegError::Numeric(format!(
            "trial covariance trace {trace} is not positive"
        )));
    }
    cov.mapv_inplace(|v| v / trace);
    Ok(cov)
}

fn ridge_regularize(mut cov: Array2<f64>, ridge: f64) -> Array2<f64> {
    let c = cov.nrows();
    let trace: f64 = (0..c).map(|i| cov[[i, i]]).sum();
    let shift = ridge * trace / c as f64;
    for i in 0..c {
        cov[[i, i]] += shift;
    }
    cov
}

/// Generalized eigensystem for one class against the rest:
/// Σ_c w = λ (Σ_c + Σ_rest) w, eigenvalues descending, eigenvectors as
/// columns of W (B-orthonormal so Wᵀ(Σ_c+Σ_rest)W = I).
pub fn csp_eigensystem(
    epochs: &EpochSet,
    class: usize,
    ridge: f64,
) -> Result<(ndarray::Array1<f64>, Array2<f64>)> {
    let c = epochs.channels();
    let mut sum_class = Array2::<f64>::zeros((c, c));
    let mut sum_rest = Array2::<f64>::zeros((c, c));
    let mut n_class = 0usize;
    let mut n_rest = 0usize;
    for t in 0..epochs.trials() {
        let cov = trial_covariance(epochs.data.index_axis(ndarray::Axis(0), t))?;
        if epochs.labels[t] == class {
            sum_class += &cov;
            n_class += 1;
        } else {
            sum_rest += &cov;
            n_rest += 1;
        }
    }
    if n_class < 2 || n_rest < 2 {
        return Err(EegError::InsufficientData(format!(
            "class {class}: {n_class} own trials / {n_rest} rest trials, need >= 2 each"
        )));
    }
    let sigma_class = ridge_regularize(sum_class / n_class as f64, ridge);
    let sigma_rest = ridge_regularize(sum_rest / n_rest as f64, ridge);
    let total = &sigma_class + &sigma_rest;
    generalized_eigh(&sigma_class, &total)
}

/// Fit one-vs-rest CSP: per class keep the top and bottom
/// `filters_per_class/2` generalized eigenvectors, rows unit-normalized.
pub fn csp_fit(epochs: &EpochSet, filters_per_class: usize, ridge: f64) -> Result<CspModel> {
    if filters_per_class < 2 || filters_per_class % 2 != 0 {
        return Err(EegError::InvalidParameter(format!(
            "filters_per_class must be even and >= 2, got {filters_per_class}"
        )));
    }
    if ridge < 0.0 {
        return Err(EegError::InvalidParameter("ridge must be >= 0".into()));
    }
    let c = epochs.channels();
    if filters_per_class > c {
        return Err(EegError::InvalidParameter(format!(
            "filters_per_class {filters_per_class} exceeds channel count {c}"
        )));
    }
    let k = epochs.n_classes();
    for class in 0..k {
        let count = epochs.labels.iter().filter(|&&l| l == class).count();
        if count < 2 {
            return Err(EegError::InsufficientData(format!(
                "class {class} has {count} trials, need >= 2"
            )));
        }
    }

    let half = filters_per_class / 2;
    let mut filters = Array2::<f64>::zeros((k * filters_per_class, c));
    let mut eigenvalues = Vec::with_capacity(k * filters_per_class);
    let mut class_ranges = Vec::with_capacity(k);
    for class in 0..k {
        let (vals, w) = csp_eigensystem(epochs, class, ridge)?;
        let row0 = class * filters_per_class;
        class_ranges.push((row0, row0 + filters_per_class));
        let selected: Vec<usize> = (0..half).chain(c - half..c).collect();
        for (slot, &col) in selected.iter().enumerate() {
            let norm: f64 = (0..c).map(|r| w[[r, col]] * w[[r, col]]).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return Err(EegError::Numeric("zero-norm CSP filter".into()));
            }
            for r in 0..c {
                filters[[row0 + slot, r]] = w[[r, col]] / norm;
            }
            eigenvalues.push(vals[col]);
        }
    }
    Ok(CspModel {
        filters,
        class_ranges,
        eigenvalues,
        ridge,
        class_count: k,
    })
}

/// Normalized log-variance features of the spatially filtered epoch:
/// log(var_i / Σ_j var_j). Scale-invariant by construction.
pub fn csp_transform(model: &CspModel, epoch: ArrayView2<f32>) -> Result<Vec<f64>> {
    let c = model.filters.ncols();
    if epoch.nrows() != c {
        return Err(EegError::ShapeMismatch(format!(
            "epoch has {} channels, model expects {c}",
            epoch.nrows()
        )));
    }
    let t = epoch.ncols();
    let n_filt = model.filters.nrows();
    let mut vars = Vec::with_capacity(n_filt);
    for f in 0..n_filt {
        let mut sum = 0.0f64;
        let mut sumsq = 0.0f64;
        for s in 0..t {
            let mut y = 0.0f64;
            for ch in 0..c {
                y += model.filters[[f, ch]] * epoch[[ch, s]] as f64;
            }
            sum += y;
            sumsq += y * y;
        }
        let mean = sum / t as f64;
        vars.push(sumsq / t as f64 - mean * mean);
    }
    let total: f64 = vars.iter().sum();
    if !(total > 0.0) || vars.iter().any(|&v| !(v > 0.0)) {
        return Err(EegError::DegenerateData(
            "csp_transform: zero variance after spatial filtering".into(),
        ));
    }
    Ok(vars.iter().map(|&v| (v / total).ln()).collect())
}

#[derive(Serialize, Deserialize)]
struct CspHeader {
    kind: String,
    class_count: usize,
    filters_per_class: usize,
    channels: usize,
    ridge: f64,
    eigenvalues: Vec<f64>,
}

impl CspModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        let fpc = self.filters.nrows() / self.class_count;
        let header = CspHeader {
            kind: "csp".into(),
            class_count: self.class_count,
            filters_per_class: fpc,
            channels: self.filters.ncols(),
            ridge: self.ridge,
            eigenvalues: self.eigenvalues.clone(),
        };
        let payload: Vec<f32> = self.filters.iter().map(|&v| v as f32).collect();
        write_eegd(path, &header, &payload)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (header, payload): (CspHeader, Vec<f32>) = read_eegd(path)?;
        if header.kind != "csp" {
            return Err(EegError::Format(format!(
                "expected kind \"csp\", got \"{}\"",
                header.kind
            )));
        }
        let rows = header.class_count * header.filters_per_class;
        if payload.len() != rows * header.channels {
            return Err(EegError::Format("csp payload size mismatch".into()));
        }
        let filters = Array2::from_shape_vec(
            (rows, header.channels),
            payload.into_iter().map(|v| v as f64).collect(),
        )
        .map_err(|e| EegError::Format(format!("csp shape: {e}")))?;
        let class_ranges = (0..header.class_count)
            .map(|c| (c * header.filters_per_class, (c + 1) * header.filters_per_class))
            .collect();
        Ok(Self {
            filters,
            class_ranges,
            eigenvalues: header.eigenvalues,
            ridge: header.ridge,
            class_count: header.class_count,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{Array2, Array3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sine_epoch(freqs: &[f64], fs: f64, channels: usize, n: usize) -> Array2<f32> {
        let mut e = Array2::<f32>::zeros((channels, n));
        for c in 0..channels {
            for s in 0..n {
                let t = s as f64 / fs;
                let mut v = 0.0;
                for &f in freqs {
                    v += (std::f64::consts::TAU * f * t).sin();
                }
                e[[c, s]] = v as f32;
            }
        }
        e
    }

    #[test]
    fn welch_peak_at_tone() {
        let e = sine_epoch(&[10.0], 250.0, 1, 500);
        let psd = welch_psd(e.view(), 250.0, 1.0, 0.5).unwrap();
        assert_eq!(psd.ncols(), 126);
        let peak = psd.row(0)[10];
        for k in 0..126 {
            let f = k as f64; // Δf = 1 Hz
            if !(8.0..=12.0).contains(&f) {
                assert!(peak >= 10.0 * psd.row(0)[k], "bin {k} too large");
            }
        }
    }

    #[test]
    fn welch_parseval_on_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 2000;
        let sigma = 1.7f64;
        let mut e = Array2::<f32>::zeros((1, n));
        for s in 0..n {
            let u: f64 = rng.random_range(-1.0..1.0);
            e[[0, s]] = (u * sigma * (3.0f64).sqrt()) as f32; // uniform with std sigma
        }
        let var: f64 = {
            let mean = e.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
            e.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n as f64
        };
        let psd = welch_psd(e.view(), 250.0, 1.0, 0.5).unwrap();
        let df = 1.0;
        let integral: f64 = psd.row(0).iter().sum::<f64>() * df;
        assert!(
            (integral - var).abs() / var < 0.1,
            "Parseval: integral {integral} vs variance {var}"
        );
    }

    #[test]
    fn welch_zero_signal_and_errors() {
        let e = Array2::<f32>::zeros((2, 300));
        let psd = welch_psd(e.view(), 250.0, 1.0, 0.5).unwrap();
        assert!(psd.iter().all(|&v| v == 0.0));

        assert!(matches!(
            welch_psd(e.view(), 250.0, 2.0, 0.5),
            Err(EegError::InvalidParameter(_))
        ));
        assert!(matches!(
            welch_psd(e.view(), 250.0, 1.0, 1.0),
            Err(EegError::InvalidParameter(_))
        ));
    }

    #[test]
    fn welch_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let n = 600;
            let mut e = Array2::<f32>::zeros((2, n));
            for c in 0..2 {
                for s in 0..n {
                    e[[c, s]] = rng.random_range(-2.0f32..2.0);
                }
            }
            let psd = welch_psd(e.view(), 250.0, 1.0, 0.5).unwrap();
            assert!(psd.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn band_powers_localize_tones() {
        let e = sine_epoch(&[10.0], 250.0, 1, 500);
        let psd = welch_psd(e.view(), 250.0, 1.0, 0.5).unwrap();
        let bands = default_bands();
        let f = band_powers(&psd, 250.0, &bands).unwrap();
        // order: delta, theta, alpha, beta
        assert!(f[2] > 5.0 * f[0]);
        assert!(f[2] > 5.0 * f[1]);
        assert!(f[2] > 5.0 * f[3]);

        let e = sine_epoch(&[2.0, 20.0], 250.0, 1, 500);
        let psd = welch_psd(e.view(), 250.0, 1.0, 0.5).unwrap();
        let f = band_powers(&psd, 250.0, &bands).unwrap();
        assert!(f[0] > 5.0 * f[1], "delta {} vs theta {}", f[0], f[1]);
        assert!(f[3] > 5.0 * f[1], "beta {} vs theta {}", f[3], f[1]);
    }

    #[test]
    fn band_powers_feature_count_and_linearity() {
        let e = sine_epoch(&[10.0], 250.0, 58, 500);
        let psd = welch_psd(e.view(), 250.0, 1.0, 0.5).unwrap();
        let f = band_powers(&psd, 250.0, &default_bands()).unwrap();
        assert_eq!(f.len(), 232);

        let doubled = &psd * 2.0;
        let f2 = band_powers(&doubled, 250.0, &default_bands()).unwrap();
        for (a, b) in f.iter().zip(&f2) {
            assert!((2.0 * a - b).abs() <= 1e-12 * b.abs().max(1e-300));
        }

        let bad = vec![BandDefinition::new("bad", 100.0, 200.0)];
        assert!(matches!(
            band_powers(&psd, 250.0, &bad),
            Err(EegError::InvalidParameter(_))
        ));
    }

    /// Deterministic orthogonal ±1 sequences: exactly zero mean, unit
    /// variance, zero cross-covariance over a multiple of 4 samples.
    fn orthogonal_pair(n: usize) -> (Vec<f32>, Vec<f32>) {
        assert_eq!(n % 4, 0);
        let s1: Vec<f32> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let s2: Vec<f32> = (0..n)
            .map(|i| if (i / 2) % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        (s1, s2)
    }

    fn analytic_epochs() -> EpochSet {
        // class 0: cov diag(2,1); class 1: cov diag(1,2)
        let n = 100;
        let (s1, s2) = orthogonal_pair(n);
        let sqrt2 = std::f32::consts::SQRT_2;
        let mut data = Array3::<f32>::zeros((4, 2, n));
        for trial in 0..4 {
            let class = trial % 2;
            for i in 0..n {
                if class == 0 {
                    data[[trial, 0, i]] = sqrt2 * s1[i];
                    data[[trial, 1, i]] = s2[i];
                } else {
                    data[[trial, 0, i]] = s1[i];
                    data[[trial, 1, i]] = sqrt2 * s2[i];
                }
            }
        }
        EpochSet::new(
            data,
            vec![0, 1, 0, 1],
            vec!["a".into(), "b".into()],
            250.0,
        )
        .unwrap()
    }

    #[test]
    fn csp_analytic_two_channel() {
        let epochs = analytic_epochs();
        let model = csp_fit(&epochs, 2, 0.0).unwrap();
        // class 0 top filter aligns with channel axis 0, eigenvalue 2/3
        assert!((model.eigenvalues[0] - 2.0 / 3.0).abs() < 0.01);
        let f = model.filters.row(0);
        let cos = f[0].abs() / (f[0] * f[0] + f[1] * f[1]).sqrt();
        assert!(cos > 0.99, "top class-0 filter not aligned: {f:?}");
        // class 1 symmetric
        let (lo, _) = model.class_ranges[1];
        assert!((model.eigenvalues[lo] - 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn csp_eigensystem_diagonalizes() {
        let epochs = analytic_epochs();
        let (vals, w) = csp_eigensystem(&epochs, 0, 1e-6).unwrap();
        for i in 1..vals.len() {
            assert!(vals[i - 1] >= vals[i] - 1e-12, "eigenvalues not descending");
        }
        // W diagonalizes both Σ_c (to eigenvalues) and Σ_total (to identity);
        // reconstruct Σ_total from the B-orthonormality residual.
        let c = epochs.channels();
        let mut sum0 = Array2::<f64>::zeros((c, c));
        let mut sum_total = Array2::<f64>::zeros((c, c));
        let mut n0 = 0;
        for t in 0..epochs.trials() {
            let cov = trial_covariance(epochs.data.index_axis(ndarray::Axis(0), t)).unwrap();
            if epochs.labels[t] == 0 {
                sum0 += &cov;
                n0 += 1;
            } else {
                sum_total += &cov;
            }
        }
        let sigma0 = ridge_regularize(sum0 / n0 as f64, 1e-6);
        let sigma_rest =
            ridge_regularize(sum_total / (epochs.trials() - n0) as f64, 1e-6);
        let total = &sigma0 + &sigma_rest;
        let wt_tw = w.t().dot(&total).dot(&w);
        let wt_cw = w.t().dot(&sigma0).dot(&w);
        for i in 0..c {
            for j in 0..c {
                let eye = if i == j { 1.0 } else { 0.0 };
                assert!((wt_tw[[i, j]] - eye).abs() < 1e-8);
                let expect = if i == j { vals[i] } else { 0.0 };
                assert!((wt_cw[[i, j]] - expect).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn csp_same_distribution_gives_half_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (c, n, trials) = (4, 1000, 20);
        let mut data = Array3::<f32>::zeros((trials, c, n));
        for t in 0..trials {
            for ch in 0..c {
                for s in 0..n {
                    data[[t, ch, s]] = rng.random_range(-1.0f32..1.0);
                }
            }
        }
        let labels: Vec<usize> = (0..trials).map(|t| t % 2).collect();
        let epochs =
            EpochSet::new(data, labels, vec!["a".into(), "b".into()], 250.0).unwrap();
        let (vals, _) = csp_eigensystem(&epochs, 0, 1e-6).unwrap();
        for v in vals.iter() {
            assert!((v - 0.5).abs() < 0.1, "eigenvalue {v} not near 0.5");
        }
    }

    #[test]
    fn csp_fit_scale_invariant() {
        let epochs = analytic_epochs();
        let model_a = csp_fit(&epochs, 2, 1e-6).unwrap();
        let mut scaled = epochs.clone();
        scaled.data.mapv_inplace(|v| v * 8.0);
        let model_b = csp_fit(&scaled, 2, 1e-6).unwrap();
        for (ra, rb) in model_a.filters.outer_iter().zip(model_b.filters.outer_iter()) {
            for (&a, &b) in ra.iter().zip(rb.iter()) {
                assert!((a.abs() - b.abs()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn csp_transform_properties() {
        let epochs = analytic_epochs();
        let model = csp_fit(&epochs, 2, 1e-6).unwrap();
        let epoch = epochs.data.index_axis(ndarray::Axis(0), 0);
        let f = csp_transform(&model, epoch).unwrap();
        assert_eq!(f.len(), 4);

        let scaled = epoch.mapv(|v| v * 4.0);
        let f2 = csp_transform(&model, scaled.view()).unwrap();
        for (a, b) in f.iter().zip(&f2) {
            assert!((a - b).abs() < 1e-12, "scale invariance: {a} vs {b}");
        }

        let zero = Array2::<f32>::zeros((2, 100));
        assert!(matches!(
            csp_transform(&model, zero.view()),
            Err(EegError::DegenerateData(_))
        ));

        let wrong = Array2::<f32>::zeros((3, 100));
        assert!(matches!(
            csp_transform(&model, wrong.view()),
            Err(EegError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn csp_fit_errors() {
        let epochs = analytic_epochs();
        assert!(matches!(
            csp_fit(&epochs, 3, 1e-6),
            Err(EegError::InvalidParameter(_))
        ));
        let few = epochs.select(&[0, 1]).unwrap();
        assert!(matches!(
            csp_fit(&few, 2, 1e-6),
            Err(EegError::InsufficientData(_))
        ));
    }

    #[test]
    fn csp_model_roundtrip() {
        let epochs = analytic_epochs();
        let model = csp_fit(&epochs, 2, 1e-6).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.csp");
        model.save(&path).unwrap();
        let back = CspModel::load(&path).unwrap();
        assert_eq!(back.class_count, model.class_count);
        assert_eq!(back.class_ranges, model.class_ranges);
        for (a, b) in model.filters.iter().zip(back.filters.iter()) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
