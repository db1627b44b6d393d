//! Continuous-signal representation, zero-phase IIR filtering, resampling,
//! and epoching.
//!
//! Filters are biquad cascades (4th order total for the notch and bandpass)
//! applied forward-backward, with odd-reflection padding and steady-state
//! initial conditions to keep edge transients out of the data.

use ndarray::{Array2, Array3};
use rayon::prelude::*;

use crate::error::{EegError, Result};
use crate::synth::{EventKind, ParadigmSchedule};

/// Default acquisition rate in Hz.
pub const DEFAULT_FS: f64 = 1000.0;
/// Default working rate after resampling, in Hz.
pub const WORKING_FS: f64 = 250.0;
/// Default channel count of the montage.
pub const DEFAULT_CHANNELS: usize = 58;
/// Default notch center frequency in Hz.
pub const NOTCH_HZ: f64 = 60.0;
/// Default notch quality factor.
pub const NOTCH_Q: f64 = 30.0;
/// Default bandpass edges in Hz applied before feature extraction.
pub const BANDPASS_LO_HZ: f64 = 0.5;
pub const BANDPASS_HI_HZ: f64 = 40.0;

/// 58-channel montage labels (10-10 layout, FCz/Fpz reserved for
/// reference/ground and therefore absent).
pub fn default_channel_names() -> Vec<String> {
    const NAMES: [&str; 58] = [
        "Fp1", "Fp2", "AF7", "AF3", "AF4", "AF8", "F7", "F5", "F3", "F1", "Fz", "F2", "F4", "F6",
        "F8", "FT7", "FC5", "FC3", "FC1", "FC2", "FC4", "FC6", "FT8", "T7", "C5", "C3", "C1",
        "Cz", "C2", "C4", "C6", "T8", "TP7", "CP5", "CP3", "CP1", "CPz", "CP2", "CP4", "CP6",
        "TP8", "P7", "P5", "P3", "P1", "Pz", "P2", "P4", "P6", "P8", "PO7", "PO3", "POz", "PO4",
        "PO8", "O1", "Oz", "O2",
    ];
    NAMES.iter().map(|s| s.to_string()).collect()
}

/// Multichannel continuous recording: `data` is channels × samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecording {
    pub data: Array2<f32>,
    pub fs: f64,
    pub channel_names: Vec<String>,
}

impl RawRecording {
    pub fn new(data: Array2<f32>, fs: f64, channel_names: Vec<String>) -> Result<Self> {
        if data.nrows() != channel_names.len() {
            return Err(EegError::ShapeMismatch(format!(
                "{} channels but {} channel names",
                data.nrows(),
                channel_names.len()
            )));
        }
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(EegError::InvalidParameter(
                "recording needs at least 1 channel and 1 sample".into(),
            ));
        }
        if !(fs > 0.0) {
            return Err(EegError::InvalidParameter(format!(
                "sampling rate must be positive, got {fs}"
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(EegError::Numeric("non-finite sample in recording".into()));
        }
        Ok(Self {
            data,
            fs,
            channel_names,
        })
    }

    pub fn channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn samples(&self) -> usize {
        self.data.ncols()
    }
}

/// Labeled trials: `data` is trials × channels × samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochSet {
    pub data: Array3<f32>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub fs: f64,
}

impl EpochSet {
    pub fn new(
        data: Array3<f32>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        fs: f64,
    ) -> Result<Self> {
        if data.shape()[0] != labels.len() {
            return Err(EegError::ShapeMismatch(format!(
                "{} trials but {} labels",
                data.shape()[0],
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(EegError::InvalidLabel(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        if !(fs > 0.0) {
            return Err(EegError::InvalidParameter(format!(
                "sampling rate must be positive, got {fs}"
            )));
        }
        Ok(Self {
            data,
            labels,
            class_names,
            fs,
        })
    }

    pub fn trials(&self) -> usize {
        self.data.shape()[0]
    }

    pub fn channels(&self) -> usize {
        self.data.shape()[1]
    }

    pub fn samples(&self) -> usize {
        self.data.shape()[2]
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Subset of trials in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let (c, s) = (self.channels(), self.samples());
        let mut data = Array3::<f32>::zeros((indices.len(), c, s));
        let mut labels = Vec::with_capacity(indices.len());
        for (dst, &src) in indices.iter().enumerate() {
            if src >= self.trials() {
                return Err(EegError::OutOfRange(format!(
                    "trial index {src} out of range ({} trials)",
                    self.trials()
                )));
            }
            data.index_axis_mut(ndarray::Axis(0), dst)
                .assign(&self.data.index_axis(ndarray::Axis(0), src));
            labels.push(self.labels[src]);
        }
        Self::new(data, labels, self.class_names.clone(), self.fs)
    }
}

// ---------------------------------------------------------------------------
// Biquad cascade, zero-phase application
// ---------------------------------------------------------------------------

/// Second-order IIR section, coefficients normalized so a0 = 1.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }

    /// Steady-state (transposed direct form II) state for a unit step input.
    fn step_state(&self) -> (f64, f64) {
        let g = self.dc_gain();
        (g - self.b0, self.b2 - self.a2 * g)
    }

    fn run(&self, buf: &mut [f64], init_scale: f64) {
        let (z1, z2) = self.step_state();
        let mut s1 = z1 * init_scale;
        let mut s2 = z2 * init_scale;
        for v in buf.iter_mut() {
            let x = *v;
            let y = self.b0 * x + s1;
            s1 = self.b1 * x - self.a1 * y + s2;
            s2 = self.b2 * x - self.a2 * y;
            *v = y;
        }
    }
}

/// RBJ notch biquad.
pub(crate) fn design_notch(center_hz: f64, quality: f64, fs: f64) -> Biquad {
    let w0 = 2.0 * std::f64::consts::PI * center_hz / fs;
    let alpha = w0.sin() / (2.0 * quality);
    let cos_w0 = w0.cos();
    let a0 = 1.0 + alpha;
    Biquad {
        b0: 1.0 / a0,
        b1: -2.0 * cos_w0 / a0,
        b2: 1.0 / a0,
        a1: -2.0 * cos_w0 / a0,
        a2: (1.0 - alpha) / a0,
    }
}

/// RBJ low-pass biquad with the given quality factor.
pub(crate) fn design_lowpass(cutoff_hz: f64, q: f64, fs: f64) -> Biquad {
    let w0 = 2.0 * std::f64::consts::PI * cutoff_hz / fs;
    let alpha = w0.sin() / (2.0 * q);
    let cos_w0 = w0.cos();
    let a0 = 1.0 + alpha;
    Biquad {
        b0: (1.0 - cos_w0) / 2.0 / a0,
        b1: (1.0 - cos_w0) / a0,
        b2: (1.0 - cos_w0) / 2.0 / a0,
        a1: -2.0 * cos_w0 / a0,
        a2: (1.0 - alpha) / a0,
    }
}

/// RBJ high-pass biquad with the given quality factor.
pub(crate) fn design_highpass(cutoff_hz: f64, q: f64, fs: f64) -> Biquad {
    let w0 = 2.0 * std::f64::consts::PI * cutoff_hz / fs;
    let alpha = w0.sin() / (2.0 * q);
    let cos_w0 = w0.cos();
    let a0 = 1.0 + alpha;
    Biquad {
        b0: (1.0 + cos_w0) / 2.0 / a0,
        b1: -(1.0 + cos_w0) / a0,
        b2: (1.0 + cos_w0) / 2.0 / a0,
        a1: -2.0 * cos_w0 / a0,
        a2: (1.0 - alpha) / a0,
    }
}

/// Butterworth low-pass of even order as a biquad cascade.
pub(crate) fn butterworth_lowpass(order: usize, cutoff_hz: f64, fs: f64) -> Vec<Biquad> {
    assert!(order >= 2 && order % 2 == 0);
    let n = order as f64;
    (0..order / 2)
        .map(|k| {
            let theta = std::f64::consts::PI * (2.0 * k as f64 + 1.0) / (2.0 * n);
            let q = 1.0 / (2.0 * theta.sin());
            design_lowpass(cutoff_hz, q, fs)
        })
        .collect()
}

/// Padding for the forward-backward pass: eight amplitude time constants of
/// the slowest pole in the cascade, so edge transients decay below 1e-3
/// before they reach the data.
fn filtfilt_pad(sections: &[Biquad]) -> usize {
    let mut max_radius = 0.0f64;
    for s in sections {
        // pole radius of z^2 + a1 z + a2: sqrt(a2) for a complex pair,
        // max |root| for a real pair
        let disc = s.a1 * s.a1 - 4.0 * s.a2;
        let r = if disc < 0.0 {
            s.a2.max(0.0).sqrt()
        } else {
            let sq = disc.sqrt();
            ((-s.a1 + sq) / 2.0).abs().max(((-s.a1 - sq) / 2.0).abs())
        };
        max_radius = max_radius.max(r.min(0.999_999));
    }
    if max_radius <= 0.0 {
        return 64;
    }
    let tau = -1.0 / max_radius.ln();
    ((8.0 * tau).ceil() as usize).max(64)
}

/// Boundary extension for the forward-backward pass. Even reflection keeps
/// the padding inside the signal's envelope (right for low-pass cascades,
/// where an out-of-envelope offset would sail straight through); odd
/// reflection is derivative-continuous at the junction (right for the notch,
/// which passes the offset as DC but rings on derivative kinks).
#[derive(Clone, Copy, PartialEq)]
pub(crate) enum Reflection {
    Even,
    Odd,
}

/// Zero-phase cascade application: reflection padding, forward pass with
/// step-matched initial state, then the same in reverse.
pub(crate) fn filtfilt(sections: &[Biquad], x: &[f64], reflection: Reflection) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let pad = filtfilt_pad(sections).min(n - 1);

    let reflect = |i: usize| match reflection {
        Reflection::Even => x[i],
        Reflection::Odd => 2.0 * x[0] - x[i],
    };
    let reflect_end = |i: usize| match reflection {
        Reflection::Even => x[n - 1 - i],
        Reflection::Odd => 2.0 * x[n - 1] - x[n - 1 - i],
    };
    let mut buf = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        buf.push(reflect(i));
    }
    buf.extend_from_slice(x);
    for i in 1..=pad {
        buf.push(reflect_end(i));
    }

    let cascade = |buf: &mut [f64]| {
        let x0 = buf[0];
        let mut scale = x0;
        for s in sections {
            s.run(buf, scale);
            scale *= s.dc_gain();
        }
    };
    cascade(&mut buf);
    buf.reverse();
    cascade(&mut buf);
    buf.reverse();

    buf[pad..pad + n].to_vec()
}

/// Apply a zero-phase biquad cascade to every channel of a recording.
fn filter_recording(rec: &RawRecording, sections: &[Biquad], reflection: Reflection) -> RawRecording {
    let inputs: Vec<Vec<f64>> = rec
        .data
        .outer_iter()
        .map(|row| row.iter().map(|&v| v as f64).collect())
        .collect();
    let rows: Vec<Vec<f32>> = inputs
        .par_iter()
        .map(|x| {
            filtfilt(sections, x, reflection)
                .into_iter()
                .map(|v| v as f32)
                .collect()
        })
        .collect();
    let mut data = Array2::<f32>::zeros((rec.channels(), rec.samples()));
    for (c, row) in rows.into_iter().enumerate() {
        for (s, v) in row.into_iter().enumerate() {
            data[[c, s]] = v;
        }
    }
    RawRecording {
        data,
        fs: rec.fs,
        channel_names: rec.channel_names.clone(),
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Zero-phase notch filter (two cascaded RBJ notch sections, 4th order).
pub fn notch_filter(rec: &RawRecording, center_hz: f64, quality: f64) -> Result<RawRecording> {
    if !(center_hz > 0.0) || center_hz >= rec.fs / 2.0 {
        return Err(EegError::InvalidParameter(format!(
            "notch center {center_hz} Hz outside (0, {}) Hz",
            rec.fs / 2.0
        )));
    }
    if !(quality > 0.0) {
        return Err(EegError::InvalidParameter(format!(
            "notch quality must be positive, got {quality}"
        )));
    }
    let section = design_notch(center_hz, quality, rec.fs);
    Ok(filter_recording(rec, &[section, section], Reflection::Odd))
}

/// Zero-phase band-pass: 2nd-order Butterworth high-pass at `lo_hz` cascaded
/// with a 2nd-order Butterworth low-pass at `hi_hz` (4th order total).
pub fn bandpass_filter(rec: &RawRecording, lo_hz: f64, hi_hz: f64) -> Result<RawRecording> {
    if !(lo_hz > 0.0) || !(hi_hz > lo_hz) || hi_hz >= rec.fs / 2.0 {
        return Err(EegError::InvalidParameter(format!(
            "bandpass ({lo_hz}, {hi_hz}) Hz invalid for fs {}",
            rec.fs
        )));
    }
    let q = std::f64::consts::FRAC_1_SQRT_2;
    let sections = [
        design_highpass(lo_hz, q, rec.fs),
        design_lowpass(hi_hz, q, rec.fs),
    ];
    Ok(filter_recording(rec, &sections, Reflection::Even))
}

/// Anti-alias low-pass (8th-order Butterworth at 0.4 × target rate) followed
/// by integer-factor decimation. Non-integer ratios are rejected.
pub fn resample(rec: &RawRecording, to_hz: f64) -> Result<RawRecording> {
    if !(to_hz > 0.0) {
        return Err(EegError::InvalidParameter(format!(
            "target rate must be positive, got {to_hz}"
        )));
    }
    if to_hz > rec.fs {
        return Err(EegError::UnsupportedUpsample {
            requested_hz: to_hz,
            source_hz: rec.fs,
        });
    }
    let ratio = rec.fs / to_hz;
    let factor = ratio.round();
    if (ratio - factor).abs() > 1e-9 {
        return Err(EegError::InvalidParameter(format!(
            "resample ratio {ratio} is not an integer"
        )));
    }
    let factor = factor as usize;
    if factor == 1 {
        return Ok(rec.clone());
    }

    let filtered = filter_recording(
        rec,
        &butterworth_lowpass(8, 0.4 * to_hz, rec.fs),
        Reflection::Even,
    );
    let n_out = rec.samples() / factor;
    let mut data = Array2::<f32>::zeros((rec.channels(), n_out));
    for c in 0..rec.channels() {
        for i in 0..n_out {
            data[[c, i]] = filtered.data[[c, i * factor]];
        }
    }
    Ok(RawRecording {
        data,
        fs: to_hz,
        channel_names: rec.channel_names.clone(),
    })
}

/// Cut one epoch per blank-image interval of the schedule, labeled by the
/// cued word. Epoch order follows schedule order.
pub fn epoch_stream(rec: &RawRecording, schedule: &ParadigmSchedule) -> Result<EpochSet> {
    let blanks: Vec<_> = schedule
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Blank)
        .collect();

    let epoch_len = (2.0 * rec.fs).round() as usize;
    let mut data = Array3::<f32>::zeros((blanks.len(), rec.channels(), epoch_len));
    let mut labels = Vec::with_capacity(blanks.len());
    for (t, ev) in blanks.iter().enumerate() {
        let start = (ev.start_s * rec.fs).round() as usize;
        let len = (ev.duration_s * rec.fs).round() as usize;
        if len != epoch_len {
            return Err(EegError::InvalidParameter(format!(
                "blank event at {}s has duration {}s, expected 2s",
                ev.start_s, ev.duration_s
            )));
        }
        if start + len > rec.samples() {
            return Err(EegError::OutOfRange(format!(
                "blank interval [{}, {}) samples exceeds recording length {}",
                start,
                start + len,
                rec.samples()
            )));
        }
        let word = ev.word_index.ok_or_else(|| {
            EegError::InvalidParameter("blank event carries no word index".into())
        })?;
        for c in 0..rec.channels() {
            for s in 0..len {
                data[[t, c, s]] = rec.data[[c, start + s]];
            }
        }
        labels.push(word);
    }
    EpochSet::new(data, labels, schedule.class_names.clone(), rec.fs)
}


/// The standard preprocessing chain: 60 Hz notch, 0.5-40 Hz band-pass,
/// resample to the 250 Hz working rate, then epoch on the schedule's blank
/// windows.
pub fn standard_preprocess(
    rec: &RawRecording,
    schedule: &ParadigmSchedule,
) -> Result<EpochSet> {
    let rec = notch_filter(rec, NOTCH_HZ, NOTCH_Q)?;
    let rec = bandpass_filter(&rec, BANDPASS_LO_HZ, BANDPASS_HI_HZ)?;
    let rec = resample(&rec, WORKING_FS)?;
    epoch_stream(&rec, schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::generate_schedule;

    fn sine_recording(freq: f64, fs: f64, seconds: f64, channels: usize) -> RawRecording {
        let n = (fs * seconds) as usize;
        let mut data = Array2::<f32>::zeros((channels, n));
        for c in 0..channels {
            for s in 0..n {
                let t = s as f64 / fs;
                data[[c, s]] = (2.0 * std::f64::consts::PI * freq * t).sin() as f32;
            }
        }
        RawRecording::new(data, fs, (0..channels).map(|i| format!("Ch{i:02}")).collect()).unwrap()
    }

    fn rms(row: &[f32]) -> f64 {
        (row.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>() / row.len() as f64).sqrt()
    }

    fn channel_rms(rec: &RawRecording, c: usize) -> f64 {
        rms(rec.data.row(c).as_slice().unwrap())
    }

    #[test]
    fn montage_has_58_labels() {
        let names = default_channel_names();
        assert_eq!(names.len(), 58);
        let mut unique = names.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), 58);
    }

    #[test]
    fn notch_kills_60_hz() {
        let rec = sine_recording(60.0, 1000.0, 4.0, 1);
        let out = notch_filter(&rec, 60.0, NOTCH_Q).unwrap();
        let ratio = channel_rms(&out, 0) / channel_rms(&rec, 0);
        assert!(ratio <= 0.1, "60 Hz RMS ratio {ratio} > 0.1");
    }

    #[test]
    fn notch_passes_10_hz() {
        let rec = sine_recording(10.0, 1000.0, 2.0, 1);
        let out = notch_filter(&rec, 60.0, NOTCH_Q).unwrap();
        let ratio = channel_rms(&out, 0) / channel_rms(&rec, 0);
        assert!(
            (ratio - 1.0).abs() <= 0.02,
            "10 Hz RMS ratio {ratio} deviates more than 2%"
        );
    }

    #[test]
    fn notch_zero_signal_and_errors() {
        let rec = RawRecording::new(Array2::zeros((2, 100)), 1000.0, vec!["a".into(), "b".into()])
            .unwrap();
        let out = notch_filter(&rec, 60.0, NOTCH_Q).unwrap();
        assert!(out.data.iter().all(|&v| v == 0.0));
        assert!(matches!(
            notch_filter(&rec, 500.0, NOTCH_Q),
            Err(EegError::InvalidParameter(_))
        ));
    }

    #[test]
    fn bandpass_contracts() {
        let pass = sine_recording(10.0, 1000.0, 4.0, 1);
        let out = bandpass_filter(&pass, 0.5, 40.0).unwrap();
        let r = channel_rms(&out, 0) / channel_rms(&pass, 0);
        assert!((r - 1.0).abs() <= 0.05, "10 Hz ratio {r}");

        let hi = sine_recording(100.0, 1000.0, 4.0, 1);
        let out = bandpass_filter(&hi, 0.5, 40.0).unwrap();
        let r = channel_rms(&out, 0) / channel_rms(&hi, 0);
        assert!(r <= 0.1, "100 Hz ratio {r}");

        let lo = sine_recording(0.1, 1000.0, 30.0, 1);
        let out = bandpass_filter(&lo, 0.5, 40.0).unwrap();
        let r = channel_rms(&out, 0) / channel_rms(&lo, 0);
        assert!(r <= 0.1, "0.1 Hz ratio {r}");

        assert!(matches!(
            bandpass_filter(&pass, 40.0, 0.5),
            Err(EegError::InvalidParameter(_))
        ));
    }

    #[test]
    fn filters_preserve_channel_count_and_order() {
        let mut rec = sine_recording(10.0, 1000.0, 1.0, 3);
        // make channels distinguishable by amplitude
        for (c, mut row) in rec.data.outer_iter_mut().enumerate() {
            row.mapv_inplace(|v| v * (c as f32 + 1.0));
        }
        let out = bandpass_filter(&rec, 0.5, 40.0).unwrap();
        assert_eq!(out.channels(), 3);
        assert_eq!(out.channel_names, rec.channel_names);
        let r0 = channel_rms(&out, 0);
        let r2 = channel_rms(&out, 2);
        assert!((r2 / r0 - 3.0).abs() < 0.05);
    }

    #[test]
    fn zero_phase_pulse_peak_stays_put() {
        let n = 4000;
        let mut data = Array2::<f32>::zeros((1, n));
        // symmetric raised-cosine pulse centered at sample 2000
        let center = 2000usize;
        let half = 200usize;
        for i in 0..2 * half {
            let w = 0.5 * (1.0 - (std::f64::consts::PI * 2.0 * i as f64 / (2 * half) as f64).cos());
            data[[0, center - half + i]] = w as f32;
        }
        let rec = RawRecording::new(data, 1000.0, vec!["c".into()]).unwrap();
        let input_peak = rec
            .data
            .row(0)
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let out = bandpass_filter(&rec, 0.5, 40.0).unwrap();
        let output_peak = out
            .data
            .row(0)
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(
            (input_peak as isize - output_peak as isize).abs() <= 1,
            "peak moved from {input_peak} to {output_peak}"
        );
    }

    #[test]
    fn notch_is_passive() {
        // mixed-tone signal: variance must not grow
        let fs = 1000.0;
        let n = 3000;
        let mut data = Array2::<f32>::zeros((1, n));
        for s in 0..n {
            let t = s as f64 / fs;
            let v = (2.0 * std::f64::consts::PI * 10.0 * t).sin()
                + 0.5 * (2.0 * std::f64::consts::PI * 60.0 * t).sin()
                + 0.2 * (2.0 * std::f64::consts::PI * 25.0 * t).sin();
            data[[0, s]] = v as f32;
        }
        let rec = RawRecording::new(data, fs, vec!["c".into()]).unwrap();
        let out = notch_filter(&rec, 60.0, NOTCH_Q).unwrap();
        let var_in: f64 = rec.data.iter().map(|&v| (v as f64).powi(2)).sum();
        let var_out: f64 = out.data.iter().map(|&v| (v as f64).powi(2)).sum();
        assert!(var_out <= var_in * 1.001);
    }

    #[test]
    fn resample_length_and_identity() {
        let rec = sine_recording(20.0, 1000.0, 2.0, 2);
        assert_eq!(rec.samples(), 2000);
        let out = resample(&rec, 250.0).unwrap();
        assert_eq!(out.samples(), 500);
        assert_eq!(out.fs, 250.0);

        let same = resample(&rec, 1000.0).unwrap();
        assert_eq!(same.data, rec.data);

        assert!(matches!(
            resample(&rec, 2000.0),
            Err(EegError::UnsupportedUpsample { .. })
        ));
        assert!(matches!(
            resample(&rec, 300.0),
            Err(EegError::InvalidParameter(_))
        ));
    }

    #[test]
    fn resample_preserves_tone() {
        let rec = sine_recording(20.0, 1000.0, 4.0, 1);
        let out = resample(&rec, 250.0).unwrap();
        // FFT peak via Goertzel-style correlation at 20 Hz
        let n = out.samples();
        let fs = out.fs;
        let mut best_amp = 0.0;
        let mut best_freq = 0.0;
        for k in 1..n / 2 {
            let f = k as f64 * fs / n as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for s in 0..n {
                let ph = 2.0 * std::f64::consts::PI * f * s as f64 / fs;
                re += out.data[[0, s]] as f64 * ph.cos();
                im += out.data[[0, s]] as f64 * ph.sin();
            }
            let amp = 2.0 * (re * re + im * im).sqrt() / n as f64;
            if amp > best_amp {
                best_amp = amp;
                best_freq = f;
            }
        }
        assert!((best_freq - 20.0).abs() < 0.5, "peak at {best_freq} Hz");
        assert!((best_amp - 1.0).abs() <= 0.02, "amplitude {best_amp}");
    }

    #[test]
    fn epoch_stream_matches_schedule() {
        let schedule = generate_schedule(4, 7).unwrap();
        let total_s = schedule.events.last().map(|e| e.start_s + e.duration_s).unwrap();
        let fs = 250.0;
        let n = (total_s * fs).round() as usize;
        let rec = RawRecording::new(
            Array2::from_elem((3, n), 1.0),
            fs,
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        let epochs = epoch_stream(&rec, &schedule).unwrap();
        assert_eq!(epochs.trials(), 16);
        assert_eq!(epochs.channels(), 3);
        assert_eq!(epochs.samples(), 500);
        for w in 0..4 {
            assert_eq!(epochs.labels.iter().filter(|&&l| l == w).count(), 4);
        }
    }

    #[test]
    fn epoch_stream_empty_and_out_of_range() {
        let schedule = ParadigmSchedule {
            events: vec![],
            class_names: vec!["w0".into(), "w1".into(), "w2".into(), "w3".into()],
        };
        let rec = RawRecording::new(Array2::zeros((1, 100)), 250.0, vec!["c".into()]).unwrap();
        let epochs = epoch_stream(&rec, &schedule).unwrap();
        assert_eq!(epochs.trials(), 0);

        let schedule = generate_schedule(4, 7).unwrap();
        // recording far too short for the schedule
        assert!(matches!(
            epoch_stream(&rec, &schedule),
            Err(EegError::OutOfRange(_))
        ));
    }
}
