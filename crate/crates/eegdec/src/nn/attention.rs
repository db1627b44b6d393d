//! Multi-head self-attention, the position-wise feed-forward network, and
//! the pre-layer-norm encoder block combining them with residual paths:
//! x += MHA(LN(x)); x += FFN(LN(x)).

use rand_chacha::ChaCha8Rng;

use super::kernels::{axpy, dot, mm_nn, mm_nt, mm_tn, softmax_rows, softmax_rows_backward};
use super::layers::{trunc_normal, Dropout, Elu, LayerNorm, LnCache, Mode};
use super::tensor::{Scalar, Tensor};
use crate::error::{EegError, Result};

/// y[rows × dout] = x[rows × din] · Wᵀ + b, with W stored [dout, din].
fn affine_forward<F: Scalar>(
    x: &[F],
    rows: usize,
    din: usize,
    dout: usize,
    w: &[F],
    b: &[F],
    y: &mut [F],
) {
    for r in 0..rows {
        let xrow = &x[r * din..(r + 1) * din];
        let yrow = &mut y[r * dout..(r + 1) * dout];
        for o in 0..dout {
            yrow[o] = dot(xrow, &w[o * din..(o + 1) * din]) + b[o];
        }
    }
}

/// Accumulates dw, db, and dx for the affine map above.
#[allow(clippy::too_many_arguments)]
fn affine_backward<F: Scalar>(
    x: &[F],
    dy: &[F],
    rows: usize,
    din: usize,
    dout: usize,
    w: &[F],
    dw: &mut [F],
    db: &mut [F],
    dx: &mut [F],
) {
    for r in 0..rows {
        let xrow = &x[r * din..(r + 1) * din];
        let dyrow = &dy[r * dout..(r + 1) * dout];
        let dxrow = &mut dx[r * din..(r + 1) * din];
        for o in 0..dout {
            let g = dyrow[o];
            axpy(g, xrow, &mut dw[o * din..(o + 1) * din]);
            db[o] += g;
            axpy(g, &w[o * din..(o + 1) * din], dxrow);
        }
    }
}

// ---------------------------------------------------------------------------
// Multi-head attention
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct MultiHeadAttention<F> {
    pub d_model: usize,
    pub heads: usize,
    pub wq: Tensor<F>,
    pub bq: Tensor<F>,
    pub wk: Tensor<F>,
    pub bk: Tensor<F>,
    pub wv: Tensor<F>,
    pub bv: Tensor<F>,
    pub wo: Tensor<F>,
    pub bo: Tensor<F>,
}

pub struct MhaCache<F> {
    x: Tensor<F>,
    q: Vec<F>,
    k: Vec<F>,
    v: Vec<F>,
    attn: Vec<F>, // [B, heads, T, T] softmax rows
    ctx: Vec<F>,  // [B, T, D] concatenated head outputs
}

impl<F: Scalar> MultiHeadAttention<F> {
    pub fn new(d_model: usize, heads: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        if heads == 0 || d_model % heads != 0 {
            return Err(EegError::InvalidParameter(format!(
                "d_model {d_model} not divisible by heads {heads}"
            )));
        }
        let mat = |rng: &mut ChaCha8Rng| {
            Tensor::from_vec(
                &[d_model, d_model],
                (0..d_model * d_model)
                    .map(|_| F::from_f64(trunc_normal(rng, 0.02)))
                    .collect(),
            )
            .unwrap()
        };
        Ok(Self {
            d_model,
            heads,
            wq: mat(rng),
            bq: Tensor::zeros(&[d_model]),
            wk: mat(rng),
            bk: Tensor::zeros(&[d_model]),
            wv: mat(rng),
            bv: Tensor::zeros(&[d_model]),
            wo: mat(rng),
            bo: Tensor::zeros(&[d_model]),
        })
    }

    fn check_input(&self, x: &Tensor<F>) -> Result<(usize, usize)> {
        let shape = x.shape();
        if shape.len() != 3 || shape[2] != self.d_model {
            return Err(EegError::ShapeMismatch(format!(
                "attention expects [batch, tokens, {}], got {shape:?}",
                self.d_model
            )));
        }
        Ok((shape[0], shape[1]))
    }

    pub fn forward(&self, x: &Tensor<F>) -> Result<(Tensor<F>, MhaCache<F>)> {
        let (b, t) = self.check_input(x)?;
        let d = self.d_model;
        let h = self.heads;
        let dh = d / h;
        let rows = b * t;
        let scale = F::from_f64(1.0 / (dh as f64).sqrt());

        let mut q = vec![F::zero(); rows * d];
        let mut k = vec![F::zero(); rows * d];
        let mut v = vec![F::zero(); rows * d];
        affine_forward(x.data(), rows, d, d, self.wq.data(), self.bq.data(), &mut q);
        affine_forward(x.data(), rows, d, d, self.wk.data(), self.bk.data(), &mut k);
        affine_forward(x.data(), rows, d, d, self.wv.data(), self.bv.data(), &mut v);

        let mut attn = vec![F::zero(); b * h * t * t];
        let mut ctx = vec![F::zero(); rows * d];
        let mut qh = vec![F::zero(); t * dh];
        let mut kh = vec![F::zero(); t * dh];
        let mut vh = vec![F::zero(); t * dh];
        let mut ctxh = vec![F::zero(); t * dh];
        for bi in 0..b {
            for hi in 0..h {
                gather_head(&q, bi, hi, t, d, dh, &mut qh);
                gather_head(&k, bi, hi, t, d, dh, &mut kh);
                gather_head(&v, bi, hi, t, d, dh, &mut vh);
                for qv in qh.iter_mut() {
                    *qv *= scale;
                }
                let a = &mut attn[(bi * h + hi) * t * t..][..t * t];
                a.iter_mut().for_each(|x| *x = F::zero());
                mm_nt(t, dh, t, &qh, &kh, a);
                softmax_rows(a, t);
                ctxh.iter_mut().for_each(|x| *x = F::zero());
                mm_nn(t, t, dh, a, &vh, &mut ctxh);
                scatter_head(&ctxh, bi, hi, t, d, dh, &mut ctx);
            }
        }

        let mut y = Tensor::<F>::zeros(x.shape());
        affine_forward(
            &ctx,
            rows,
            d,
            d,
            self.wo.data(),
            self.bo.data(),
            y.data_mut(),
        );
        Ok((
            y,
            MhaCache {
                x: x.clone(),
                q,
                k,
                v,
                attn,
                ctx,
            },
        ))
    }

    pub fn backward(
        &self,
        cache: &MhaCache<F>,
        dy: &Tensor<F>,
    ) -> Result<(Option<Tensor<F>>, Vec<Tensor<F>>)> {
        let (b, t) = self.check_input(&cache.x)?;
        let d = self.d_model;
        let h = self.heads;
        let dh = d / h;
        let rows = b * t;
        let scale = F::from_f64(1.0 / (dh as f64).sqrt());

        let mut dwo = Tensor::<F>::zeros(&[d, d]);
        let mut dbo = vec![F::zero(); d];
        let mut dctx = vec![F::zero(); rows * d];
        affine_backward(
            &cache.ctx,
            dy.data(),
            rows,
            d,
            d,
            self.wo.data(),
            dwo.data_mut(),
            &mut dbo,
            &mut dctx,
        );

        let mut dq = vec![F::zero(); rows * d];
        let mut dk = vec![F::zero(); rows * d];
        let mut dv = vec![F::zero(); rows * d];
        let mut qh = vec![F::zero(); t * dh];
        let mut kh = vec![F::zero(); t * dh];
        let mut vh = vec![F::zero(); t * dh];
        let mut dctxh = vec![F::zero(); t * dh];
        let mut da = vec![F::zero(); t * t];
        let mut ds = vec![F::zero(); t * t];
        let mut dqh = vec![F::zero(); t * dh];
        let mut dkh = vec![F::zero(); t * dh];
        let mut dvh = vec![F::zero(); t * dh];
        for bi in 0..b {
            for hi in 0..h {
                gather_head(&cache.q, bi, hi, t, d, dh, &mut qh);
                gather_head(&cache.k, bi, hi, t, d, dh, &mut kh);
                gather_head(&cache.v, bi, hi, t, d, dh, &mut vh);
                gather_head(&dctx, bi, hi, t, d, dh, &mut dctxh);
                let a = &cache.attn[(bi * h + hi) * t * t..][..t * t];

                da.iter_mut().for_each(|x| *x = F::zero());
                mm_nt(t, dh, t, &dctxh, &vh, &mut da);
                dvh.iter_mut().for_each(|x| *x = F::zero());
                mm_tn(t, t, dh, a, &dctxh, &mut dvh);
                softmax_rows_backward(a, &da, &mut ds, t);
                // S = (scale·Q)Kᵀ
                dqh.iter_mut().for_each(|x| *x = F::zero());
                mm_nn(t, t, dh, &ds, &kh, &mut dqh);
                for v in dqh.iter_mut() {
                    *v *= scale;
                }
                dkh.iter_mut().for_each(|x| *x = F::zero());
                mm_tn(t, t, dh, &ds, &qh, &mut dkh);
                for v in dkh.iter_mut() {
                    *v *= scale;
                }
                scatter_head(&dqh, bi, hi, t, d, dh, &mut dq);
                scatter_head(&dkh, bi, hi, t, d, dh, &mut dk);
                scatter_head(&dvh, bi, hi, t, d, dh, &mut dv);
            }
        }

        let mut dwq = Tensor::<F>::zeros(&[d, d]);
        let mut dbq = vec![F::zero(); d];
        let mut dwk = Tensor::<F>::zeros(&[d, d]);
        let mut dbk = vec![F::zero(); d];
        let mut dwv = Tensor::<F>::zeros(&[d, d]);
        let mut dbv = vec![F::zero(); d];
        let mut dx = Tensor::<F>::zeros(cache.x.shape());
        affine_backward(
            cache.x.data(),
            &dq,
            rows,
            d,
            d,
            self.wq.data(),
            dwq.data_mut(),
            &mut dbq,
            dx.data_mut(),
        );
        affine_backward(
            cache.x.data(),
            &dk,
            rows,
            d,
            d,
            self.wk.data(),
            dwk.data_mut(),
            &mut dbk,
            dx.data_mut(),
        );
        affine_backward(
            cache.x.data(),
            &dv,
            rows,
            d,
            d,
            self.wv.data(),
            dwv.data_mut(),
            &mut dbv,
            dx.data_mut(),
        );

        Ok((
            Some(dx),
            vec![
                dwq,
                Tensor::from_vec(&[d], dbq)?,
                dwk,
                Tensor::from_vec(&[d], dbk)?,
                dwv,
                Tensor::from_vec(&[d], dbv)?,
                dwo,
                Tensor::from_vec(&[d], dbo)?,
            ],
        ))
    }

    pub fn params(&self) -> Vec<(&'static str, &Tensor<F>)> {
        vec![
            ("wq", &self.wq),
            ("bq", &self.bq),
            ("wk", &self.wk),
            ("bk", &self.bk),
            ("wv", &self.wv),
            ("bv", &self.bv),
            ("wo", &self.wo),
            ("bo", &self.bo),
        ]
    }

    pub fn params_mut(&mut self) -> Vec<(&'static str, &mut Tensor<F>)> {
        vec![
            ("wq", &mut self.wq),
            ("bq", &mut self.bq),
            ("wk", &mut self.wk),
            ("bk", &mut self.bk),
            ("wv", &mut self.wv),
            ("bv", &mut self.bv),
            ("wo", &mut self.wo),
            ("bo", &mut self.bo),
        ]
    }
}

fn gather_head<F: Scalar>(
    full: &[F],
    bi: usize,
    hi: usize,
    t: usize,
    d: usize,
    dh: usize,
    out: &mut [F],
) {
    for ti in 0..t {
        let src = (bi * t + ti) * d + hi * dh;
        out[ti * dh..(ti + 1) * dh].copy_from_slice(&full[src..src + dh]);
    }
}

fn scatter_head<F: Scalar>(
    head: &[F],
    bi: usize,
    hi: usize,
    t: usize,
    d: usize,
    dh: usize,
    full: &mut [F],
) {
    for ti in 0..t {
        let dst = (bi * t + ti) * d + hi * dh;
        full[dst..dst + dh].copy_from_slice(&head[ti * dh..(ti + 1) * dh]);
    }
}

// ---------------------------------------------------------------------------
// Position-wise feed-forward: Linear → ELU → Dropout → Linear
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct FeedForward<F> {
    pub d_model: usize,
    pub hidden: usize,
    pub dropout_p: f64,
    pub w1: Tensor<F>, // [hidden, d_model]
    pub b1: Tensor<F>,
    pub w2: Tensor<F>, // [d_model, hidden]
    pub b2: Tensor<F>,
}

pub struct FfnCache<F> {
    x: Tensor<F>,
    z1: Vec<F>,
    dropped: Vec<F>,
    mask: Option<Vec<F>>,
}

impl<F: Scalar> FeedForward<F> {
    pub fn new(d_model: usize, hidden: usize, dropout_p: f64, rng: &mut ChaCha8Rng) -> Self {
        let w1 = Tensor::from_vec(
            &[hidden, d_model],
            (0..hidden * d_model)
                .map(|_| F::from_f64(trunc_normal(rng, 0.02)))
                .collect(),
        )
        .unwrap();
        let w2 = Tensor::from_vec(
            &[d_model, hidden],
            (0..d_model * hidden)
                .map(|_| F::from_f64(trunc_normal(rng, 0.02)))
                .collect(),
        )
        .unwrap();
        Self {
            d_model,
            hidden,
            dropout_p,
            w1,
            b1: Tensor::zeros(&[hidden]),
            w2,
            b2: Tensor::zeros(&[d_model]),
        }
    }

    pub fn forward(
        &self,
        x: &Tensor<F>,
        mode: Mode,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Tensor<F>, FfnCache<F>)> {
        if x.shape().last() != Some(&self.d_model) {
            return Err(EegError::ShapeMismatch(format!(
                "feed-forward expects last dim {}, got {:?}",
                self.d_model,
                x.shape()
            )));
        }
        let rows = x.numel() / self.d_model;
        let mut z1 = vec![F::zero(); rows * self.hidden];
        affine_forward(
            x.data(),
            rows,
            self.d_model,
            self.hidden,
            self.w1.data(),
            self.b1.data(),
            &mut z1,
        );
        let elu = Elu { alpha: 1.0 };
        let z1_t = Tensor::from_vec(&[rows, self.hidden], z1.clone())?;
        let (a, _) = elu.forward(&z1_t);
        let dropout = Dropout { p: self.dropout_p };
        let (dropped_t, mask) = dropout.forward(&a, mode, rng);
        let dropped = dropped_t.into_data();
        let mut y = Tensor::<F>::zeros(x.shape());
        affine_forward(
            &dropped,
            rows,
            self.hidden,
            self.d_model,
            self.w2.data(),
            self.b2.data(),
            y.data_mut(),
        );
        Ok((
            y,
            FfnCache {
                x: x.clone(),
                z1,
                dropped,
                mask,
            },
        ))
    }

    pub fn backward(
        &self,
        cache: &FfnCache<F>,
        dy: &Tensor<F>,
    ) -> Result<(Option<Tensor<F>>, Vec<Tensor<F>>)> {
        let rows = cache.x.numel() / self.d_model;
        let mut dw2 = Tensor::<F>::zeros(self.w2.shape());
        let mut db2 = vec![F::zero(); self.d_model];
        let mut ddropped = vec![F::zero(); rows * self.hidden];
        affine_backward(
            &cache.dropped,
            dy.data(),
            rows,
            self.hidden,
            self.d_model,
            self.w2.data(),
            dw2.data_mut(),
            &mut db2,
            &mut ddropped,
        );
        let dropout = Dropout { p: self.dropout_p };
        let ddropped_t = Tensor::from_vec(&[rows, self.hidden], ddropped)?;
        let da = dropout.backward(&cache.mask, &ddropped_t);
        let elu = Elu { alpha: 1.0 };
        let z1_t = Tensor::from_vec(&[rows, self.hidden], cache.z1.clone())?;
        let dz1 = elu.backward(&z1_t, &da);

        let mut dw1 = Tensor::<F>::zeros(self.w1.shape());
        let mut db1 = vec![F::zero(); self.hidden];
        let mut dx = Tensor::<F>::zeros(cache.x.shape());
        affine_backward(
            cache.x.data(),
            dz1.data(),
            rows,
            self.d_model,
            self.hidden,
            self.w1.data(),
            dw1.data_mut(),
            &mut db1,
            dx.data_mut(),
        );
        Ok((
            Some(dx),
            vec![
                dw1,
                Tensor::from_vec(&[self.hidden], db1)?,
                dw2,
                Tensor::from_vec(&[self.d_model], db2)?,
            ],
        ))
    }

    pub fn params(&self) -> Vec<(&'static str, &Tensor<F>)> {
        vec![
            ("w1", &self.w1),
            ("b1", &self.b1),
            ("w2", &self.w2),
            ("b2", &self.b2),
        ]
    }

    pub fn params_mut(&mut self) -> Vec<(&'static str, &mut Tensor<F>)> {
        vec![
            ("w1", &mut self.w1),
            ("b1", &mut self.b1),
            ("w2", &mut self.w2),
            ("b2", &mut self.b2),
        ]
    }
}

// ---------------------------------------------------------------------------
// Pre-layer-norm encoder block
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct EncoderBlock<F> {
    pub ln1: LayerNorm<F>,
    pub mha: MultiHeadAttention<F>,
    pub ln2: LayerNorm<F>,
    pub ffn: FeedForward<F>,
}

pub struct EncoderCache<F> {
    ln1: LnCache<F>,
    mha: MhaCache<F>,
    ln2: LnCache<F>,
    ffn: FfnCache<F>,
}

impl<F: Scalar> EncoderBlock<F> {
    pub fn new(
        d_model: usize,
        heads: usize,
        ffn_hidden: usize,
        dropout_p: f64,
        eps: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        Ok(Self {
            ln1: LayerNorm::new(d_model, eps),
            mha: MultiHeadAttention::new(d_model, heads, rng)?,
            ln2: LayerNorm::new(d_model, eps),
            ffn: FeedForward::new(d_model, ffn_hidden, dropout_p, rng),
        })
    }

    pub fn forward(
        &self,
        x: &Tensor<F>,
        mode: Mode,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Tensor<F>, EncoderCache<F>)> {
        let (u, ln1c) = self.ln1.forward(x)?;
        let (a, mhac) = self.mha.forward(&u)?;
        let x1 = x.add(&a)?;
        let (v, ln2c) = self.ln2.forward(&x1)?;
        let (f, ffnc) = self.ffn.forward(&v, mode, rng)?;
        let y = x1.add(&f)?;
        Ok((
            y,
            EncoderCache {
                ln1: ln1c,
                mha: mhac,
                ln2: ln2c,
                ffn: ffnc,
            },
        ))
    }

    pub fn backward(
        &self,
        cache: &EncoderCache<F>,
        dy: &Tensor<F>,
    ) -> Result<(Option<Tensor<F>>, Vec<Tensor<F>>)> {
        // y = x1 + ffn(ln2(x1)); x1 = x + mha(ln1(x))
        let (dv, ffn_grads) = self.ffn.backward(&cache.ffn, dy)?;
        let (dx1_ln2, ln2_grads) = self.ln2.backward(&cache.ln2, &dv.unwrap())?;
        let dx1 = dy.add(&dx1_ln2.unwrap())?;

        let (du, mha_grads) = self.mha.backward(&cache.mha, &dx1)?;
        let (dx_ln1, ln1_grads) = self.ln1.backward(&cache.ln1, &du.unwrap())?;
        let dx = dx1.add(&dx_ln1.unwrap())?;

        let mut grads = ln1_grads;
        grads.extend(mha_grads);
        grads.extend(ln2_grads);
        grads.extend(ffn_grads);
        Ok((Some(dx), grads))
    }

    pub fn params(&self) -> Vec<(String, &Tensor<F>)> {
        let mut p: Vec<(String, &Tensor<F>)> = vec![
            ("ln1.gamma".into(), &self.ln1.gamma),
            ("ln1.beta".into(), &self.ln1.beta),
        ];
        for (name, t) in self.mha.params() {
            p.push((format!("mha.{name}"), t));
        }
        p.push(("ln2.gamma".into(), &self.ln2.gamma));
        p.push(("ln2.beta".into(), &self.ln2.beta));
        for (name, t) in self.ffn.params() {
            p.push((format!("ffn.{name}"), t));
        }
        p
    }

    pub fn params_mut(&mut self) -> Vec<(String, &mut Tensor<F>)> {
        let mut p: Vec<(String, &mut Tensor<F>)> = vec![
            ("ln1.gamma".into(), &mut self.ln1.gamma),
            ("ln1.beta".into(), &mut self.ln1.beta),
        ];
        for (name, t) in self.mha.params_mut() {
            p.push((format!("mha.{name}"), t));
        }
        p.push(("ln2.gamma".into(), &mut self.ln2.gamma));
        p.push(("ln2.beta".into(), &mut self.ln2.beta));
        for (name, t) in self.ffn.params_mut() {
            p.push((format!("ffn.{name}"), t));
        }
        p
    }
}

/// Single-sequence multi-head attention on [tokens × d_model] input, the
/// functional form used by tests and shape probes.
pub fn mha_forward<F: Scalar>(
    x: &Tensor<F>,
    mha: &MultiHeadAttention<F>,
) -> Result<Tensor<F>> {
    let shape = x.shape();
    if shape.len() != 2 {
        return Err(EegError::ShapeMismatch(format!(
            "mha_forward expects [tokens, d_model], got {shape:?}"
        )));
    }
    let batched = x.reshaped(&[1, shape[0], shape[1]])?;
    let (y, _) = mha.forward(&batched)?;
    y.reshaped(&[shape[0], shape[1]])
}
