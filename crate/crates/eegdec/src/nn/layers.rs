//! Network layers with explicit forward/backward passes. Each layer saves
//! exactly the intermediates its backward pass needs; the per-layer caches
//! collected in order form the tape.
//!
//! Convolution layout is [batch × channels × height × width] with EEG mapped
//! to height = electrodes, width = time.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::kernels::{axpy, dot, softmax_rows, softmax_rows_backward};
use super::tensor::{Scalar, Tensor};
use crate::error::{EegError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// "Same" pads symmetrically with the extra sample on the bottom/right when
/// the kernel is even; "Valid" does not pad.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    Same,
    Valid,
}

/// Truncated normal (±2σ) initialization used for attention and linear
/// weights.
pub(crate) fn trunc_normal(rng: &mut ChaCha8Rng, std: f64) -> f64 {
    loop {
        let z: f64 = StandardNormal.sample(rng);
        if z.abs() <= 2.0 {
            return z * std;
        }
    }
}

/// Fan-in-scaled uniform initialization used for convolution weights.
pub(crate) fn fan_in_uniform(rng: &mut ChaCha8Rng, fan_in: usize) -> f64 {
    let bound = 1.0 / (fan_in as f64).sqrt();
    rng.random_range(-bound..bound)
}

fn dims4(shape: &[usize]) -> Result<(usize, usize, usize, usize)> {
    if shape.len() != 4 {
        return Err(EegError::ShapeMismatch(format!(
            "expected a 4-D tensor, got {shape:?}"
        )));
    }
    Ok((shape[0], shape[1], shape[2], shape[3]))
}

// ---------------------------------------------------------------------------
// Grouped 2-D convolution (plain, depthwise, and pointwise are all instances)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct GroupedConv2d<F> {
    pub in_channels: usize,
    pub out_channels: usize,
    pub groups: usize,
    pub kernel: (usize, usize),
    pub padding: Padding,
    pub weight: Tensor<F>, // [OC, IC/groups, KH, KW]
    pub bias: Option<Tensor<F>>,
}

pub struct ConvCache<F> {
    xpad: Tensor<F>,
    in_shape: Vec<usize>,
    out_dims: (usize, usize),
    pad: (usize, usize),
}

impl<F: Scalar> GroupedConv2d<F> {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        groups: usize,
        kernel: (usize, usize),
        padding: Padding,
        bias: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 || kernel.0 == 0 || kernel.1 == 0 {
            return Err(EegError::InvalidParameter(
                "conv dimensions must be positive".into(),
            ));
        }
        if groups == 0 || in_channels % groups != 0 || out_channels % groups != 0 {
            return Err(EegError::InvalidParameter(format!(
                "groups {groups} must divide in {in_channels} and out {out_channels}"
            )));
        }
        let icpg = in_channels / groups;
        let fan_in = icpg * kernel.0 * kernel.1;
        let n = out_channels * icpg * kernel.0 * kernel.1;
        let weight = Tensor::from_vec(
            &[out_channels, icpg, kernel.0, kernel.1],
            (0..n).map(|_| F::from_f64(fan_in_uniform(rng, fan_in))).collect(),
        )?;
        let bias = if bias {
            Some(Tensor::zeros(&[out_channels]))
        } else {
            None
        };
        Ok(Self {
            in_channels,
            out_channels,
            groups,
            kernel,
            padding,
            weight,
            bias,
        })
    }

    fn geometry(&self, h: usize, w: usize) -> Result<(usize, usize, usize, usize)> {
        let (kh, kw) = self.kernel;
        match self.padding {
            Padding::Same => Ok((h, w, (kh - 1) / 2, (kw - 1) / 2)),
            Padding::Valid => {
                if h < kh || w < kw {
                    return Err(EegError::ShapeMismatch(format!(
                        "valid conv kernel {:?} larger than input {h}x{w}",
                        self.kernel
                    )));
                }
                Ok((h - kh + 1, w - kw + 1, 0, 0))
            }
        }
    }

    pub fn forward(&self, x: &Tensor<F>) -> Result<(Tensor<F>, ConvCache<F>)> {
        let (b, ic, h, w) = dims4(x.shape())?;
        if ic != self.in_channels {
            return Err(EegError::ShapeMismatch(format!(
                "conv expects {} input channels, got {ic}",
                self.in_channels
            )));
        }
        let (kh, kw) = self.kernel;
        let (oh, ow, pt, pl) = self.geometry(h, w)?;
        let (hp, wp) = (oh + kh - 1, ow + kw - 1);

        let mut xpad = Tensor::<F>::zeros(&[b, ic, hp, wp]);
        {
            let xd = x.data();
            let xp = xpad.data_mut();
            for bi in 0..b {
                for ci in 0..ic {
                    for hi in 0..h {
                        let src = ((bi * ic + ci) * h + hi) * w;
                        let dst = ((bi * ic + ci) * hp + hi + pt) * wp + pl;
                        xp[dst..dst + w].copy_from_slice(&xd[src..src + w]);
                    }
                }
            }
        }

        let oc = self.out_channels;
        let (icpg, ocpg) = (ic / self.groups, oc / self.groups);
        let mut y = Tensor::<F>::zeros(&[b, oc, oh, ow]);
        let xp = xpad.data();
        let wd = self.weight.data();
        y.data_mut()
            .par_chunks_mut(oc * oh * ow)
            .enumerate()
            .for_each(|(bi, yb)| {
                for oci in 0..oc {
                    let g = oci / ocpg;
                    for icg in 0..icpg {
                        let ci = g * icpg + icg;
                        for khi in 0..kh {
                            let wrow = &wd[(((oci * icpg) + icg) * kh + khi) * kw..][..kw];
                            for ohi in 0..oh {
                                let xrow =
                                    &xp[((bi * ic + ci) * hp + ohi + khi) * wp..][..wp];
                                let yrow = &mut yb[(oci * oh + ohi) * ow..][..ow];
                                for (kwi, &wv) in wrow.iter().enumerate() {
                                    axpy(wv, &xrow[kwi..kwi + ow], yrow);
                                }
                            }
                        }
                    }
                    if let Some(bias) = &self.bias {
                        let bv = bias.data()[oci];
                        for v in yb[oci * oh * ow..(oci + 1) * oh * ow].iter_mut() {
                            *v += bv;
                        }
                    }
                }
            });

        Ok((
            y,
            ConvCache {
                xpad,
                in_shape: x.shape().to_vec(),
                out_dims: (oh, ow),
                pad: (pt, pl),
            },
        ))
    }

    pub fn backward(
        &self,
        cache: &ConvCache<F>,
        dy: &Tensor<F>,
        want_dx: bool,
    ) -> Result<(Option<Tensor<F>>, Vec<Tensor<F>>)> {
        let (b, ic, h, w) = dims4(&cache.in_shape)?;
        let (oh, ow) = cache.out_dims;
        let (pt, pl) = cache.pad;
        let (kh, kw) = self.kernel;
        let (hp, wp) = (oh + kh - 1, ow + kw - 1);
        let oc = self.out_channels;
        let (icpg, ocpg) = (ic / self.groups, oc / self.groups);
        let xp = cache.xpad.data();
        let dyd = dy.data();
        let wd = self.weight.data();
        let wlen = self.weight.numel();

        // Per-sample weight/bias partials, reduced in batch order.
        let partials: Vec<(Vec<F>, Vec<F>)> = (0..b)
            .into_par_iter()
            .map(|bi| {
                let mut dw = vec![F::zero(); wlen];
                let mut db = vec![F::zero(); oc];
                for oci in 0..oc {
                    let g = oci / ocpg;
                    let mut bsum = F::zero();
                    for ohi in 0..oh {
                        let dyrow = &dyd[((bi * oc + oci) * oh + ohi) * ow..][..ow];
                        for &v in dyrow {
                            bsum += v;
                        }
                        for icg in 0..icpg {
                            let ci = g * icpg + icg;
                            for khi in 0..kh {
                                let xrow =
                                    &xp[((bi * ic + ci) * hp + ohi + khi) * wp..][..wp];
                                let dwrow =
                                    &mut dw[(((oci * icpg) + icg) * kh + khi) * kw..][..kw];
                                for (owi, &dyv) in dyrow.iter().enumerate() {
                                    axpy(dyv, &xrow[owi..owi + kw], dwrow);
                                }
                            }
                        }
                    }
                    db[oci] += bsum;
                }
                (dw, db)
            })
            .collect();
        let mut dw = Tensor::<F>::zeros(self.weight.shape());
        let mut db = vec![F::zero(); oc];
        for (dwb, dbb) in partials {
            for (a, &v) in dw.data_mut().iter_mut().zip(&dwb) {
                *a += v;
            }
            for (a, &v) in db.iter_mut().zip(&dbb) {
                *a += v;
            }
        }

        let dx = if want_dx {
            let mut dxpad = Tensor::<F>::zeros(&[b, ic, hp, wp]);
            dxpad
                .data_mut()
                .par_chunks_mut(ic * hp * wp)
                .enumerate()
                .for_each(|(bi, dxb)| {
                    for oci in 0..oc {
                        let g = oci / ocpg;
                        for icg in 0..icpg {
                            let ci = g * icpg + icg;
                            for khi in 0..kh {
                                let wrow =
                                    &wd[(((oci * icpg) + icg) * kh + khi) * kw..][..kw];
                                for ohi in 0..oh {
                                    let dyrow =
                                        &dyd[((bi * oc + oci) * oh + ohi) * ow..][..ow];
                                    let dxrow =
                                        &mut dxb[(ci * hp + ohi + khi) * wp..][..wp];
                                    for (owi, &dyv) in dyrow.iter().enumerate() {
                                        axpy(dyv, wrow, &mut dxrow[owi..owi + kw]);
                                    }
                                }
                            }
                        }
                    }
                });
            // strip padding
            let mut dx = Tensor::<F>::zeros(&[b, ic, h, w]);
            {
                let src = dxpad.data();
                let dst = dx.data_mut();
                for bi in 0..b {
                    for ci in 0..ic {
                        for hi in 0..h {
                            let s = ((bi * ic + ci) * hp + hi + pt) * wp + pl;
                            let d = ((bi * ic + ci) * h + hi) * w;
                            dst[d..d + w].copy_from_slice(&src[s..s + w]);
                        }
                    }
                }
            }
            Some(dx)
        } else {
            None
        };

        let mut grads = vec![dw];
        if self.bias.is_some() {
            grads.push(Tensor::from_vec(&[oc], db)?);
        }
        Ok((dx, grads))
    }

    pub fn params(&self) -> Vec<(&'static str, &Tensor<F>)> {
        let mut p = vec![("weight", &self.weight)];
        if let Some(b) = &self.bias {
            p.push(("bias", b));
        }
        p
    }

    pub fn params_mut(&mut self) -> Vec<(&'static str, &mut Tensor<F>)> {
        let mut p = vec![("weight", &mut self.weight)];
        if let Some(b) = &mut self.bias {
            p.push(("bias", b));
        }
        p
    }
}

// ---------------------------------------------------------------------------
// Depthwise-separable convolution: depthwise over time then 1×1 pointwise mix
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SeparableConv2d<F> {
    pub depthwise: GroupedConv2d<F>,
    pub pointwise: GroupedConv2d<F>,
}

pub struct SeparableCache<F> {
    dw: ConvCache<F>,
    pw: ConvCache<F>,
}

impl<F: Scalar> SeparableConv2d<F> {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: (usize, usize),
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let depthwise = GroupedConv2d::new(
            in_channels,
            in_channels,
            in_channels,
            kernel,
            Padding::Same,
            false,
            rng,
        )?;
        let pointwise = GroupedConv2d::new(
            in_channels,
            out_channels,
            1,
            (1, 1),
            Padding::Valid,
            false,
            rng,
        )?;
        Ok(Self {
            depthwise,
            pointwise,
        })
    }

    pub fn forward(&self, x: &Tensor<F>) -> Result<(Tensor<F>, SeparableCache<F>)> {
        let (mid, dw) = self.depthwise.forward(x)?;
        let (y, pw) = self.pointwise.forward(&mid)?;
        Ok((y, SeparableCache { dw, pw }))
    }

    pub fn backward(
        &self,
        cache: &SeparableCache<F>,
        dy: &Tensor<F>,
        want_dx: bool,
    ) -> Result<(Option<Tensor<F>>, Vec<Tensor<F>>)> {
        let (dmid, mut pw_grads) = self.pointwise.backward(&cache.pw, dy, true)?;
        let dmid = dmid.expect("pointwise input gradient requested");
        let (dx, mut dw_grads) = self.depthwise.backward(&cache.dw, &dmid, want_dx)?;
        dw_grads.append(&mut pw_grads);
        Ok((dx, dw_grads))
    }

    pub fn params(&self) -> Vec<(&'static str, &Tensor<F>)> {
        vec![
            ("depthwise_weight", &self.depthwise.weight),
            ("pointwise_weight", &self.pointwise.weight),
        ]
    }

    pub fn params_mut(&mut self) -> Vec<(&'static str, &mut Tensor<F>)> {
        vec![
            ("depthwise_weight", &mut self.depthwise.weight),
            ("pointwise_weight", &mut self.pointwise.weight),
        ]
    }
}

// ---------------------------------------------------------------------------
// Batch normalization over channels of a 4-D map
// ---------------------------------------------------------------------------

pub const BN_MOMENTUM: f64 = 0.1;
pub const BN_EPS: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct BatchNorm<F> {
    pub gamma: Tensor<F>,
    pub beta: Tensor<F>,
    pub momentum: f64,
    pub eps: f64,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
}

pub struct BnCache<F> {
    x_hat: Tensor<F>,
    inv_std: Vec<f64>,
}

impl<F: Scalar> BatchNorm<F> {
    pub fn new(num_features: usize, momentum: f64, eps: f64) -> Self {
        Self {
            gamma: Tensor::from_vec(&[num_features], vec![F::one(); num_features]).unwrap(),
            beta: Tensor::zeros(&[num_features]),
            momentum,
            eps,
            running_mean: vec![0.0; num_features],
            running_var: vec![1.0; num_features],
        }
    }

    /// In train mode returns the cache and the updated running statistics
    /// (applied by the caller, which owns the mutable node).
    #[allow(clippy::type_complexity)]
    pub fn forward(
        &self,
        x: &Tensor<F>,
        mode: Mode,
    ) -> Result<(Tensor<F>, Option<BnCache<F>>, Option<(Vec<f64>, Vec<f64>)>)> {
        let (b, c, h, w) = dims4(x.shape())?;
        if c != self.gamma.numel() {
            return Err(EegError::ShapeMismatch(format!(
                "batch norm expects {} channels, got {c}",
                self.gamma.numel()
            )));
        }
        let plane = h * w;
        let n = (b * plane) as f64;
        let xd = x.data();
        let mut y = Tensor::<F>::zeros(x.shape());

        match mode {
            Mode::Train => {
                let mut mean = vec![0.0f64; c];
                let mut var = vec![0.0f64; c];
                for ci in 0..c {
                    let mut s = 0.0f64;
                    for bi in 0..b {
                        let base = ((bi * c + ci) * h) * w;
                        for &v in &xd[base..base + plane] {
                            s += v.as_f64();
                        }
                    }
                    let m = s / n;
                    let mut ss = 0.0f64;
                    for bi in 0..b {
                        let base = ((bi * c + ci) * h) * w;
                        for &v in &xd[base..base + plane] {
                            let d = v.as_f64() - m;
                            ss += d * d;
                        }
                    }
                    mean[ci] = m;
                    var[ci] = ss / n;
                }
                let inv_std: Vec<f64> =
                    var.iter().map(|&v| 1.0 / (v + self.eps).sqrt()).collect();
                let mut x_hat = Tensor::<F>::zeros(x.shape());
                {
                    let xh = x_hat.data_mut();
                    let yd = y.data_mut();
                    for ci in 0..c {
                        let g = self.gamma.data()[ci];
                        let bt = self.beta.data()[ci];
                        let m = F::from_f64(mean[ci]);
                        let istd = F::from_f64(inv_std[ci]);
                        for bi in 0..b {
                            let base = ((bi * c + ci) * h) * w;
                            for i in base..base + plane {
                                let xh_v = (xd[i] - m) * istd;
                                xh[i] = xh_v;
                                yd[i] = g * xh_v + bt;
                            }
                        }
                    }
                }
                let new_mean: Vec<f64> = self
                    .running_mean
                    .iter()
                    .zip(&mean)
                    .map(|(&r, &m)| (1.0 - self.momentum) * r + self.momentum * m)
                    .collect();
                let new_var: Vec<f64> = self
                    .running_var
                    .iter()
                    .zip(&var)
                    .map(|(&r, &v)| (1.0 - self.momentum) * r + self.momentum * v)
                    .collect();
                Ok((y, Some(BnCache { x_hat, inv_std }), Some((new_mean, new_var))))
            }
            Mode::Eval => {
                let yd = y.data_mut();
                for ci in 0..c {
                    let g = self.gamma.data()[ci];
                    let bt = self.beta.data()[ci];
                    let m = F::from_f64(self.running_mean[ci]);
                    let istd = F::from_f64(1.0 / (self.running_var[ci] + self.eps).sqrt());
                    for bi in 0..b {
                        let base = ((bi * c + ci) * h) * w;
                        for i in base..base + plane {
                            yd[i] = g * (xd[i] - m) * istd + bt;
                        }
                    }
                }
                Ok((y, None, None))
            }
        }
    }

    pub fn backward(
        &self,
        cache: &BnCache<F>,
        dy: &Tensor<F>,
    ) -> Result<(Option<Tensor<F>>, Vec<Tensor<F>>)> {
        let (b, c, h, w) = dims4(dy.shape())?;
        let plane = h * w;
        let n = (b * plane) as f64;
        let xh = cache.x_hat.data();
        let dyd = dy.data();

        let mut dgamma = vec![F::zero(); c];
        let mut dbeta = vec![F::zero(); c];
        let mut dx = Tensor::<F>::zeros(dy.shape());
        for ci in 0..c {
            let mut sg = 0.0f64;
            let mut sb = 0.0f64;
            for bi in 0..b {
                let base = ((bi * c + ci) * h) * w;
                for i in base..base + plane {
                    sg += (dyd[i] * xh[i]).as_f64();
                    sb += dyd[i].as_f64();
                }
            }
            dgamma[ci] = F::from_f64(sg);
            dbeta[ci] = F::from_f64(sb);
            let g = self.gamma.data()[ci].as_f64();
            let istd = cache.inv_std[ci];
            let k = F::from_f64(g * istd / n);
            let mean_dy = F::from_f64(sb / n * n); // n·mean(dy) = sb
            let _ = mean_dy;
            let sb_f = F::from_f64(sb);
            let sg_f = F::from_f64(sg);
            let n_f = F::from_f64(n);
            let dxd = dx.data_mut();
            for bi in 0..b {
                let base = ((bi * c + ci) * h) * w;
                for i in base..base + plane {
                    dxd[i] = k * (n_f * dyd[i] - sb_f - xh[i] * sg_f);
                }
            }
        }
        Ok((
            Some(dx),
            vec![
                Tensor::from_vec(&[c], dgamma)?,
                Tensor::from_vec(&[c], dbeta)?,
            ],
        ))
    }
}

// ---------------------------------------------------------------------------
// Element-wise and structural layers
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Elu {
    pub alpha: f64,
}

impl Elu {
    pub fn forward<F: Scalar>(&self, x: &Tensor<F>) -> (Tensor<F>, Tensor<F>) {
        let alpha = F::from_f64(self.alpha);
        let y = x.map(|v| if v > F::zero() { v } else { alpha * (v.exp() - F::one()) });
        (y, x.clone())
    }

    pub fn backward<F: Scalar>(&self, x: &Tensor<F>, dy: &Tensor<F>) -> Tensor<F> {
        let alpha = F::from_f64(self.alpha);
        let mut dx = Tensor::<F>::zeros(dy.shape());
        for ((d, &xv), &dyv) in dx.data_mut().iter_mut().zip(x.data()).zip(dy.data()) {
            *d = if xv > F::zero() {
                dyv
            } else {
                dyv * alpha * xv.exp()
            };
        }
        dx
    }
}

#[derive(Debug, Clone)]
pub struct AvgPool {
    pub kernel: (usize, usize),
}

impl AvgPool {
    pub fn forward<F: Scalar>(&self, x: &Tensor<F>) -> Result<(Tensor<F>, Vec<usize>)> {
        let (b, c, h, w) = dims4(x.shape())?;
        let (ph, pw) = self.kernel;
        let (oh, ow) = (h / ph, w / pw);
        if oh == 0 || ow == 0 {
            return Err(EegError::ShapeMismatch(format!(
                "pool {:?} annihilates input {h}x{w}",
                self.kernel
            )));
        }
        let inv = F::from_f64(1.0 / (ph * pw) as f64);
        let mut y = Tensor::<F>::zeros(&[b, c, oh, ow]);
        let xd = x.data();
        let yd = y.data_mut();
        for bi in 0..b {
            for ci in 0..c {
                for ohi in 0..oh {
                    for owi in 0..ow {
                        let mut s = F::zero();
                        for dh in 0..ph {
                            let base = ((bi * c + ci) * h + ohi * ph + dh) * w + owi * pw;
                            for dw_ in 0..pw {
                                s += xd[base + dw_];
                            }
                        }
                        yd[((bi * c + ci) * oh + ohi) * ow + owi] = s * inv;
                    }
                }
            }
        }
        Ok((y, x.shape().to_vec()))
    }

    pub fn backward<F: Scalar>(&self, in_shape: &[usize], dy: &Tensor<F>) -> Result<Tensor<F>> {
        let (b, c, h, w) = dims4(in_shape)?;
        let (ph, pw) = self.kernel;
        let (oh, ow) = (h / ph, w / pw);
        let inv = F::from_f64(1.0 / (ph * pw) as f64);
        let mut dx = Tensor::<F>::zeros(in_shape);
        let dxd = dx.data_mut();
        let dyd = dy.data();
        for bi in 0..b {
            for ci in 0..c {
                for ohi in 0..oh {
                    for owi in 0..ow {
                        let g = dyd[((bi * c + ci) * oh + ohi) * ow + owi] * inv;
                        for dh in 0..ph {
                            let base = ((bi * c + ci) * h + ohi * ph + dh) * w + owi * pw;
                            for dw_ in 0..pw {
                                dxd[base + dw_] += g;
                            }
                        }
                    }
                }
            }
        }
        Ok(dx)
    }
}

/// Inverted dropout: scales kept activations by 1/(1−p) at train time so the
/// eval path is the identity.
#[derive(Debug, Clone)]
pub struct Dropout {
    pub p: f64,
}

impl Dropout {
    pub fn forward<F: Scalar>(
        &self,
        x: &Tensor<F>,
        mode: Mode,
        rng: &mut ChaCha8Rng,
    ) -> (Tensor<F>, Option<Vec<F>>) {
        if mode == Mode::Eval || self.p == 0.0 {
            return (x.clone(), None);
        }
        let keep_scale = F::from_f64(1.0 / (1.0 - self.p));
        let mask: Vec<F> = (0..x.numel())
            .map(|_| {
                if rng.random::<f64>() >= self.p {
                    keep_scale
                } else {
                    F::zero()
                }
            })
            .collect();
        let mut y = Tensor::<F>::zeros(x.shape());
        for ((yv, &xv), &m) in y.data_mut().iter_mut().zip(x.data()).zip(&mask) {
            *yv = xv * m;
        }
        (y, Some(mask))
    }

    pub fn backward<F: Scalar>(&self, mask: &Option<Vec<F>>, dy: &Tensor<F>) -> Tensor<F> {
        match mask {
            None => dy.clone(),
            Some(mask) => {
                let mut dx = Tensor::<F>::zeros(dy.shape());
                for ((d, &g), &m) in dx.data_mut().iter_mut().zip(dy.data()).zip(mask) {
                    *d = g * m;
                }
                dx
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Flatten;

impl Flatten {
    pub fn forward<F: Scalar>(&self, x: &Tensor<F>) -> Result<(Tensor<F>, Vec<usize>)> {
        let shape = x.shape().to_vec();
        if shape.is_empty() {
            return Err(EegError::ShapeMismatch("flatten needs a batch dim".into()));
        }
        let rest: usize = shape[1..].iter().product();
        Ok((x.reshaped(&[shape[0], rest])?, shape))
    }

    pub fn backward<F: Scalar>(&self, in_shape: &[usize], dy: &Tensor<F>) -> Result<Tensor<F>> {
        dy.reshaped(in_shape)
    }
}

// ---------------------------------------------------------------------------
// Linear over the last dimension
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Linear<F> {
    pub in_features: usize,
    pub out_features: usize,
    pub weight: Tensor<F>, // [out, in]
    pub bias: Tensor<F>,
}

impl<F: Scalar> Linear<F> {
    pub fn new(in_features: usize, out_features: usize, rng: &mut ChaCha8Rng) -> Self {
        let weight = Tensor::from_vec(
            &[out_features, in_features],
            (0..out_features * in_features)
                .map(|_| F::from_f64(trunc_normal(rng, 0.02)))
                .collect(),
        )
        .unwrap();
        Self {
            in_features,
            out_features,
            weight,
            bias: Tensor::zeros(&[out_features]),
        }
    }

    pub fn forward(&self, x: &Tensor<F>) -> Result<(Tensor<F>, Tensor<F>)> {
        let shape = x.shape();
        if shape.is_empty() || *shape.last().unwrap() != self.in_features {
            return Err(EegError::ShapeMismatch(format!(
                "linear expects last dim {}, got {:?}",
                self.in_features, shape
            )));
        }
        let rows = x.numel() / self.in_features;
        let mut out_shape = shape.to_vec();
        *out_shape.last_mut().unwrap() = self.out_features;
        let mut y = Tensor::<F>::zeros(&out_shape);
        let xd = x.data();
        let wd = self.weight.data();
        let bd = self.bias.data();
        let yd = y.data_mut();
        for r in 0..rows {
            let xrow = &xd[r * self.in_features..(r + 1) * self.in_features];
            let yrow = &mut yd[r * self.out_features..(r + 1) * self.out_features];
            for o in 0..self.out_features {
                yrow[o] = dot(xrow, &wd[o * self.in_features..(o + 1) * self.in_features])
                    + bd[o];
            }
        }
        Ok((y, x.clone()))
    }

    pub fn backward(
        &self,
        x: &Tensor<F>,
        dy: &Tensor<F>,
    ) -> Result<(Option<Tensor<F>>, Vec<Tensor<F>>)> {
        let rows = x.numel() / self.in_features;
        let xd = x.data();
        let dyd = dy.data();
        let wd = self.weight.data();
        let mut dw = Tensor::<F>::zeros(self.weight.shape());
        let mut db = vec![F::zero(); self.out_features];
        let mut dx = Tensor::<F>::zeros(x.shape());
        let dxd = dx.data_mut();
        {
            let dwd = dw.data_mut();
            for r in 0..rows {
                let xrow = &xd[r * self.in_features..(r + 1) * self.in_features];
                let dyrow = &dyd[r * self.out_features..(r + 1) * self.out_features];
                let dxrow = &mut dxd[r * self.in_features..(r + 1) * self.in_features];
                for o in 0..self.out_features {
                    let g = dyrow[o];
                    axpy(
                        g,
                        xrow,
                        &mut dwd[o * self.in_features..(o + 1) * self.in_features],
                    );
                    db[o] += g;
                    axpy(
                        g,
                        &wd[o * self.in_features..(o + 1) * self.in_features],
                        dxrow,
                    );
                }
            }
        }
        Ok((
            Some(dx),
            vec![dw, Tensor::from_vec(&[self.out_features], db)?],
        ))
    }
}

// ---------------------------------------------------------------------------
// Layer normalization over the last dimension
// ---------------------------------------------------------------------------

pub const LN_EPS: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct LayerNorm<F> {
    pub gamma: Tensor<F>,
    pub beta: Tensor<F>,
    pub eps: f64,
}

pub struct LnCache<F> {
    x_hat: Tensor<F>,
    inv_std: Vec<f64>,
}

impl<F: Scalar> LayerNorm<F> {
    pub fn new(dim: usize, eps: f64) -> Self {
        Self {
            gamma: Tensor::from_vec(&[dim], vec![F::one(); dim]).unwrap(),
            beta: Tensor::zeros(&[dim]),
            eps,
        }
    }

    pub fn forward(&self, x: &Tensor<F>) -> Result<(Tensor<F>, LnCache<F>)> {
        let d = self.gamma.numel();
        if x.shape().last() != Some(&d) {
            return Err(EegError::ShapeMismatch(format!(
                "layer norm expects last dim {d}, got {:?}",
                x.shape()
            )));
        }
        let rows = x.numel() / d;
        let mut x_hat = Tensor::<F>::zeros(x.shape());
        let mut y = Tensor::<F>::zeros(x.shape());
        let mut inv_std = Vec::with_capacity(rows);
        let xd = x.data();
        {
            let xh = x_hat.data_mut();
            let yd = y.data_mut();
            for r in 0..rows {
                let xrow = &xd[r * d..(r + 1) * d];
                let mean = xrow.iter().map(|v| v.as_f64()).sum::<f64>() / d as f64;
                let var = xrow
                    .iter()
                    .map(|v| {
                        let dv = v.as_f64() - mean;
                        dv * dv
                    })
                    .sum::<f64>()
                    / d as f64;
                let istd = 1.0 / (var + self.eps).sqrt();
                inv_std.push(istd);
                let m = F::from_f64(mean);
                let s = F::from_f64(istd);
                for i in 0..d {
                    let xh_v = (xrow[i] - m) * s;
                    xh[r * d + i] = xh_v;
                    yd[r * d + i] = self.gamma.data()[i] * xh_v + self.beta.data()[i];
                }
            }
        }
        Ok((y, LnCache { x_hat, inv_std }))
    }

    pub fn backward(
        &self,
        cache: &LnCache<F>,
        dy: &Tensor<F>,
    ) -> Result<(Option<Tensor<F>>, Vec<Tensor<F>>)> {
        let d = self.gamma.numel();
        let rows = dy.numel() / d;
        let xh = cache.x_hat.data();
        let dyd = dy.data();
        let mut dgamma = vec![F::zero(); d];
        let mut dbeta = vec![F::zero(); d];
        let mut dx = Tensor::<F>::zeros(dy.shape());
        let dxd = dx.data_mut();
        for r in 0..rows {
            let base = r * d;
            let mut sum_g = 0.0f64; // Σ dy·γ
            let mut sum_gx = 0.0f64; // Σ dy·γ·x_hat
            for i in 0..d {
                let dyg = (dyd[base + i] * self.gamma.data()[i]).as_f64();
                sum_g += dyg;
                sum_gx += dyg * xh[base + i].as_f64();
                dgamma[i] += dyd[base + i] * xh[base + i];
                dbeta[i] += dyd[base + i];
            }
            let istd = F::from_f64(cache.inv_std[r]);
            let mg = F::from_f64(sum_g / d as f64);
            let mgx = F::from_f64(sum_gx / d as f64);
            for i in 0..d {
                let dyg = dyd[base + i] * self.gamma.data()[i];
                dxd[base + i] = istd * (dyg - mg - xh[base + i] * mgx);
            }
        }
        Ok((
            Some(dx),
            vec![
                Tensor::from_vec(&[d], dgamma)?,
                Tensor::from_vec(&[d], dbeta)?,
            ],
        ))
    }
}

// ---------------------------------------------------------------------------
// Softmax over the last dimension
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Softmax;

impl Softmax {
    pub fn forward<F: Scalar>(&self, x: &Tensor<F>) -> Result<(Tensor<F>, Tensor<F>)> {
        let d = *x
            .shape()
            .last()
            .ok_or_else(|| EegError::ShapeMismatch("softmax needs a last dim".into()))?;
        let mut y = x.clone();
        softmax_rows(y.data_mut(), d);
        Ok((y.clone(), y))
    }

    pub fn backward<F: Scalar>(&self, y: &Tensor<F>, dy: &Tensor<F>) -> Tensor<F> {
        let d = *y.shape().last().unwrap();
        let mut dx = Tensor::<F>::zeros(dy.shape());
        softmax_rows_backward(y.data(), dy.data(), dx.data_mut(), d);
        dx
    }
}

// ---------------------------------------------------------------------------
// Feature-map-to-token reshape and learned positional embeddings
// ---------------------------------------------------------------------------

/// Reinterpret a [B, C, 1, W] feature map as W tokens of dimension C.
#[derive(Debug, Clone)]
pub struct TokensFromFeatureMap;

impl TokensFromFeatureMap {
    pub fn forward<F: Scalar>(&self, x: &Tensor<F>) -> Result<(Tensor<F>, Vec<usize>)> {
        let (b, c, h, w) = dims4(x.shape())?;
        if h != 1 {
            return Err(EegError::ShapeMismatch(format!(
                "token reshape expects height 1, got {h}"
            )));
        }
        let mut y = Tensor::<F>::zeros(&[b, w, c]);
        let xd = x.data();
        let yd = y.data_mut();
        for bi in 0..b {
            for ci in 0..c {
                for wi in 0..w {
                    yd[(bi * w + wi) * c + ci] = xd[(bi * c + ci) * w + wi];
                }
            }
        }
        Ok((y, x.shape().to_vec()))
    }

    pub fn backward<F: Scalar>(&self, in_shape: &[usize], dy: &Tensor<F>) -> Result<Tensor<F>> {
        let (b, c, _h, w) = dims4(in_shape)?;
        let mut dx = Tensor::<F>::zeros(in_shape);
        let dxd = dx.data_mut();
        let dyd = dy.data();
        for bi in 0..b {
            for ci in 0..c {
                for wi in 0..w {
                    dxd[(bi * c + ci) * w + wi] = dyd[(bi * w + wi) * c + ci];
                }
            }
        }
        Ok(dx)
    }
}

#[derive(Debug, Clone)]
pub struct PositionalEmbedding<F> {
    pub table: Tensor<F>, // [tokens, d_model]
}

impl<F: Scalar> PositionalEmbedding<F> {
    pub fn new(tokens: usize, d_model: usize, rng: &mut ChaCha8Rng) -> Self {
        let table = Tensor::from_vec(
            &[tokens, d_model],
            (0..tokens * d_model)
                .map(|_| F::from_f64(trunc_normal(rng, 0.02)))
                .collect(),
        )
        .unwrap();
        Self { table }
    }

    pub fn forward(&self, x: &Tensor<F>) -> Result<Tensor<F>> {
        let shape = x.shape();
        if shape.len() != 3 || &shape[1..] != self.table.shape() {
            return Err(EegError::ShapeMismatch(format!(
                "positional embedding {:?} does not match input {:?}",
                self.table.shape(),
                shape
            )));
        }
        let mut y = x.clone();
        let td = self.table.data();
        let n = td.len();
        for chunk in y.data_mut().chunks_mut(n) {
            for (v, &p) in chunk.iter_mut().zip(td) {
                *v += p;
            }
        }
        Ok(y)
    }

    pub fn backward(&self, dy: &Tensor<F>) -> Result<(Option<Tensor<F>>, Vec<Tensor<F>>)> {
        let n = self.table.numel();
        let mut dtable = Tensor::<F>::zeros(self.table.shape());
        for chunk in dy.data().chunks(n) {
            for (d, &g) in dtable.data_mut().iter_mut().zip(chunk) {
                *d += g;
            }
        }
        Ok((Some(dy.clone()), vec![dtable]))
    }
}
