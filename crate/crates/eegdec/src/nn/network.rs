//! Sequential network: named nodes, the tape recorded by a forward pass, and
//! the reverse walk that fills in parameter (and optionally input) gradients.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::attention::{EncoderBlock, EncoderCache, FeedForward, FfnCache, MhaCache, MultiHeadAttention};
use super::layers::{
    AvgPool, BatchNorm, BnCache, ConvCache, Dropout, Elu, Flatten, GroupedConv2d, LayerNorm,
    Linear, LnCache, Mode, PositionalEmbedding, SeparableCache, SeparableConv2d, Softmax,
    TokensFromFeatureMap,
};
use super::tensor::{Scalar, Tensor};
use crate::error::{EegError, Result};

#[derive(Debug, Clone)]
pub enum Node<F> {
    Conv2d(GroupedConv2d<F>),
    Separable(SeparableConv2d<F>),
    BatchNorm(BatchNorm<F>),
    Elu(Elu),
    AvgPool(AvgPool),
    Dropout(Dropout),
    Flatten(Flatten),
    Linear(Linear<F>),
    LayerNorm(LayerNorm<F>),
    Mha(MultiHeadAttention<F>),
    FeedForward(FeedForward<F>),
    Softmax(Softmax),
    Tokens(TokensFromFeatureMap),
    PosEmbed(PositionalEmbedding<F>),
    Encoder(EncoderBlock<F>),
}

pub(crate) enum NodeCache<F> {
    Conv(ConvCache<F>),
    Separable(SeparableCache<F>),
    Bn(Option<BnCache<F>>),
    SavedInput(Tensor<F>),
    Shape(Vec<usize>),
    Mask(Option<Vec<F>>),
    Ln(LnCache<F>),
    Mha(MhaCache<F>),
    Ffn(FfnCache<F>),
    SavedOutput(Tensor<F>),
    Encoder(EncoderCache<F>),
    None,
}

#[derive(Debug, Clone)]
pub struct NamedNode<F> {
    pub name: String,
    pub node: Node<F>,
}

#[derive(Debug, Clone, Default)]
pub struct Network<F> {
    pub nodes: Vec<NamedNode<F>>,
}

/// Ordered record of one train-mode forward pass: per-node saved
/// intermediates, consumable by exactly one backward pass.
pub struct Tape<F> {
    caches: Vec<NodeCache<F>>,
    input_requires_grad: bool,
    consumed: bool,
}

/// Parameter gradients in `param_names()` order, plus the input gradient when
/// the input tensor had `requires_grad` set.
pub struct Gradients<F> {
    pub params: Vec<Tensor<F>>,
    pub input: Option<Tensor<F>>,
}

impl<F: Scalar> Network<F> {
    pub fn new(nodes: Vec<NamedNode<F>>) -> Self {
        Self { nodes }
    }

    /// Forward pass. Train mode records batch statistics into the batch-norm
    /// buffers and draws seeded dropout masks; eval mode uses running
    /// statistics and disables dropout. Always returns the tape.
    pub fn forward(&mut self, x: &Tensor<F>, mode: Mode, seed: u64) -> Result<(Tensor<F>, Tape<F>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut caches = Vec::with_capacity(self.nodes.len());
        let mut cur = x.clone();
        for (i, named) in self.nodes.iter_mut().enumerate() {
            let ctx = |e: EegError| {
                EegError::ShapeMismatch(format!("layer {i} ({}): {e}", named.name))
            };
            let (next, cache) = match &mut named.node {
                Node::Conv2d(conv) => {
                    let (y, c) = conv.forward(&cur).map_err(ctx)?;
                    (y, NodeCache::Conv(c))
                }
                Node::Separable(sep) => {
                    let (y, c) = sep.forward(&cur).map_err(ctx)?;
                    (y, NodeCache::Separable(c))
                }
                Node::BatchNorm(bn) => {
                    let (y, c, updates) = bn.forward(&cur, mode).map_err(ctx)?;
                    if let Some((mean, var)) = updates {
                        bn.running_mean = mean;
                        bn.running_var = var;
                    }
                    (y, NodeCache::Bn(c))
                }
                Node::Elu(elu) => {
                    let (y, saved) = elu.forward(&cur);
                    (y, NodeCache::SavedInput(saved))
                }
                Node::AvgPool(pool) => {
                    let (y, shape) = pool.forward(&cur).map_err(ctx)?;
                    (y, NodeCache::Shape(shape))
                }
                Node::Dropout(drop) => {
                    let (y, mask) = drop.forward(&cur, mode, &mut rng);
                    (y, NodeCache::Mask(mask))
                }
                Node::Flatten(fl) => {
                    let (y, shape) = fl.forward(&cur).map_err(ctx)?;
                    (y, NodeCache::Shape(shape))
                }
                Node::Linear(lin) => {
                    let (y, saved) = lin.forward(&cur).map_err(ctx)?;
                    (y, NodeCache::SavedInput(saved))
                }
                Node::LayerNorm(ln) => {
                    let (y, c) = ln.forward(&cur).map_err(ctx)?;
                    (y, NodeCache::Ln(c))
                }
                Node::Mha(mha) => {
                    let (y, c) = mha.forward(&cur).map_err(ctx)?;
                    (y, NodeCache::Mha(c))
                }
                Node::FeedForward(ffn) => {
                    let (y, c) = ffn.forward(&cur, mode, &mut rng).map_err(ctx)?;
                    (y, NodeCache::Ffn(c))
                }
                Node::Softmax(sm) => {
                    let (y, saved) = sm.forward(&cur).map_err(ctx)?;
                    (y, NodeCache::SavedOutput(saved))
                }
                Node::Tokens(tk) => {
                    let (y, shape) = tk.forward(&cur).map_err(ctx)?;
                    (y, NodeCache::Shape(shape))
                }
                Node::PosEmbed(pe) => {
                    let y = pe.forward(&cur).map_err(ctx)?;
                    (y, NodeCache::None)
                }
                Node::Encoder(enc) => {
                    let (y, c) = enc.forward(&cur, mode, &mut rng).map_err(ctx)?;
                    (y, NodeCache::Encoder(c))
                }
            };
            caches.push(cache);
            cur = next;
        }
        Ok((
            cur,
            Tape {
                caches,
                input_requires_grad: x.requires_grad,
                consumed: false,
            },
        ))
    }

    /// Eval-mode forward without recording a tape or touching any state.
    pub fn infer(&self, x: &Tensor<F>) -> Result<Tensor<F>> {
        // dropout never draws in eval mode, so the rng seed is irrelevant
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut cur = x.clone();
        for (i, named) in self.nodes.iter().enumerate() {
            let ctx = |e: EegError| {
                EegError::ShapeMismatch(format!("layer {i} ({}): {e}", named.name))
            };
            cur = match &named.node {
                Node::Conv2d(conv) => conv.forward(&cur).map_err(ctx)?.0,
                Node::Separable(sep) => sep.forward(&cur).map_err(ctx)?.0,
                Node::BatchNorm(bn) => bn.forward(&cur, Mode::Eval).map_err(ctx)?.0,
                Node::Elu(elu) => elu.forward(&cur).0,
                Node::AvgPool(pool) => pool.forward(&cur).map_err(ctx)?.0,
                Node::Dropout(_) => cur,
                Node::Flatten(fl) => fl.forward(&cur).map_err(ctx)?.0,
                Node::Linear(lin) => lin.forward(&cur).map_err(ctx)?.0,
                Node::LayerNorm(ln) => ln.forward(&cur).map_err(ctx)?.0,
                Node::Mha(mha) => mha.forward(&cur).map_err(ctx)?.0,
                Node::FeedForward(ffn) => {
                    ffn.forward(&cur, Mode::Eval, &mut rng).map_err(ctx)?.0
                }
                Node::Softmax(sm) => sm.forward(&cur).map_err(ctx)?.0,
                Node::Tokens(tk) => tk.forward(&cur).map_err(ctx)?.0,
                Node::PosEmbed(pe) => pe.forward(&cur).map_err(ctx)?,
                Node::Encoder(enc) => enc.forward(&cur, Mode::Eval, &mut rng).map_err(ctx)?.0,
            };
        }
        Ok(cur)
    }

    /// Eval-mode forward recording each node's output shape.
    pub fn infer_shapes(&self, x: &Tensor<F>) -> Result<Vec<(String, Vec<usize>)>> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut cur = x.clone();
        let mut shapes = Vec::with_capacity(self.nodes.len());
        for named in &self.nodes {
            cur = match &named.node {
                Node::Conv2d(conv) => conv.forward(&cur)?.0,
                Node::Separable(sep) => sep.forward(&cur)?.0,
                Node::BatchNorm(bn) => bn.forward(&cur, Mode::Eval)?.0,
                Node::Elu(elu) => elu.forward(&cur).0,
                Node::AvgPool(pool) => pool.forward(&cur)?.0,
                Node::Dropout(_) => cur,
                Node::Flatten(fl) => fl.forward(&cur)?.0,
                Node::Linear(lin) => lin.forward(&cur)?.0,
                Node::LayerNorm(ln) => ln.forward(&cur)?.0,
                Node::Mha(mha) => mha.forward(&cur)?.0,
                Node::FeedForward(ffn) => ffn.forward(&cur, Mode::Eval, &mut rng)?.0,
                Node::Softmax(sm) => sm.forward(&cur)?.0,
                Node::Tokens(tk) => tk.forward(&cur)?.0,
                Node::PosEmbed(pe) => pe.forward(&cur)?,
                Node::Encoder(enc) => enc.forward(&cur, Mode::Eval, &mut rng)?.0,
            };
            shapes.push((named.name.clone(), cur.shape().to_vec()));
        }
        Ok(shapes)
    }

    /// Reverse pass over a recorded tape. Gradients come back in
    /// `param_names()` order; a consumed tape is rejected.
    pub fn backward(&self, tape: &mut Tape<F>, loss_grad: &Tensor<F>) -> Result<Gradients<F>> {
        if tape.consumed {
            return Err(EegError::InvalidState(
                "tape already consumed by a backward pass".into(),
            ));
        }
        tape.consumed = true;

        let mut grads_rev: Vec<Vec<Tensor<F>>> = Vec::with_capacity(self.nodes.len());
        let mut dy = loss_grad.clone();
        for (i, (named, cache)) in self
            .nodes
            .iter()
            .zip(tape.caches.iter())
            .enumerate()
            .rev()
        {
            let want_dx = i > 0 || tape.input_requires_grad;
            let (dx, node_grads) = match (&named.node, cache) {
                (Node::Conv2d(conv), NodeCache::Conv(c)) => conv.backward(c, &dy, want_dx)?,
                (Node::Separable(sep), NodeCache::Separable(c)) => {
                    sep.backward(c, &dy, want_dx)?
                }
                (Node::BatchNorm(bn), NodeCache::Bn(Some(c))) => bn.backward(c, &dy)?,
                (Node::BatchNorm(_), NodeCache::Bn(None)) => {
                    return Err(EegError::InvalidState(
                        "backward through an eval-mode batch norm".into(),
                    ))
                }
                (Node::Elu(elu), NodeCache::SavedInput(x)) => {
                    (Some(elu.backward(x, &dy)), vec![])
                }
                (Node::AvgPool(pool), NodeCache::Shape(shape)) => {
                    (Some(pool.backward(shape, &dy)?), vec![])
                }
                (Node::Dropout(drop), NodeCache::Mask(mask)) => {
                    (Some(drop.backward(mask, &dy)), vec![])
                }
                (Node::Flatten(fl), NodeCache::Shape(shape)) => {
                    (Some(fl.backward(shape, &dy)?), vec![])
                }
                (Node::Linear(lin), NodeCache::SavedInput(x)) => lin.backward(x, &dy)?,
                (Node::LayerNorm(ln), NodeCache::Ln(c)) => ln.backward(c, &dy)?,
                (Node::Mha(mha), NodeCache::Mha(c)) => mha.backward(c, &dy)?,
                (Node::FeedForward(ffn), NodeCache::Ffn(c)) => ffn.backward(c, &dy)?,
                (Node::Softmax(sm), NodeCache::SavedOutput(y)) => {
                    (Some(sm.backward(y, &dy)), vec![])
                }
                (Node::Tokens(tk), NodeCache::Shape(shape)) => {
                    (Some(tk.backward(shape, &dy)?), vec![])
                }
                (Node::PosEmbed(pe), NodeCache::None) => pe.backward(&dy)?,
                (Node::Encoder(enc), NodeCache::Encoder(c)) => enc.backward(c, &dy)?,
                _ => {
                    return Err(EegError::InvalidState(format!(
                        "tape cache mismatch at layer {i} ({})",
                        named.name
                    )))
                }
            };
            grads_rev.push(node_grads);
            match dx {
                Some(g) => dy = g,
                None => {
                    // only legal at the first layer with no input grad wanted
                    debug_assert_eq!(i, 0);
                    let mut params = Vec::new();
                    for node_grads in grads_rev.into_iter().rev() {
                        params.extend(node_grads);
                    }
                    return Ok(Gradients {
                        params,
                        input: None,
                    });
                }
            }
        }
        let mut params = Vec::new();
        for node_grads in grads_rev.into_iter().rev() {
            params.extend(node_grads);
        }
        Ok(Gradients {
            params,
            input: if tape.input_requires_grad {
                Some(dy)
            } else {
                None
            },
        })
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        self.for_each_param(|name, _| names.push(name.to_string()));
        names
    }

    pub fn for_each_param(&self, mut f: impl FnMut(&str, &Tensor<F>)) {
        for named in &self.nodes {
            match &named.node {
                Node::Conv2d(conv) => {
                    for (n, t) in conv.params() {
                        f(&format!("{}.{n}", named.name), t);
                    }
                }
                Node::Separable(sep) => {
                    for (n, t) in sep.params() {
                        f(&format!("{}.{n}", named.name), t);
                    }
                }
                Node::BatchNorm(bn) => {
                    f(&format!("{}.gamma", named.name), &bn.gamma);
                    f(&format!("{}.beta", named.name), &bn.beta);
                }
                Node::Linear(lin) => {
                    f(&format!("{}.weight", named.name), &lin.weight);
                    f(&format!("{}.bias", named.name), &lin.bias);
                }
                Node::LayerNorm(ln) => {
                    f(&format!("{}.gamma", named.name), &ln.gamma);
                    f(&format!("{}.beta", named.name), &ln.beta);
                }
                Node::Mha(mha) => {
                    for (n, t) in mha.params() {
                        f(&format!("{}.{n}", named.name), t);
                    }
                }
                Node::FeedForward(ffn) => {
                    for (n, t) in ffn.params() {
                        f(&format!("{}.{n}", named.name), t);
                    }
                }
                Node::PosEmbed(pe) => {
                    f(&format!("{}.table", named.name), &pe.table);
                }
                Node::Encoder(enc) => {
                    for (n, t) in enc.params() {
                        f(&format!("{}.{n}", named.name), t);
                    }
                }
                Node::Elu(_)
                | Node::AvgPool(_)
                | Node::Dropout(_)
                | Node::Flatten(_)
                | Node::Softmax(_)
                | Node::Tokens(_) => {}
            }
        }
    }

    pub fn for_each_param_mut(
        &mut self,
        mut f: impl FnMut(&str, &mut Tensor<F>) -> Result<()>,
    ) -> Result<()> {
        for named in &mut self.nodes {
            match &mut named.node {
                Node::Conv2d(conv) => {
                    for (n, t) in conv.params_mut() {
                        f(&format!("{}.{n}", named.name), t)?;
                    }
                }
                Node::Separable(sep) => {
                    for (n, t) in sep.params_mut() {
                        f(&format!("{}.{n}", named.name), t)?;
                    }
                }
                Node::BatchNorm(bn) => {
                    f(&format!("{}.gamma", named.name), &mut bn.gamma)?;
                    f(&format!("{}.beta", named.name), &mut bn.beta)?;
                }
                Node::Linear(lin) => {
                    f(&format!("{}.weight", named.name), &mut lin.weight)?;
                    f(&format!("{}.bias", named.name), &mut lin.bias)?;
                }
                Node::LayerNorm(ln) => {
                    f(&format!("{}.gamma", named.name), &mut ln.gamma)?;
                    f(&format!("{}.beta", named.name), &mut ln.beta)?;
                }
                Node::Mha(mha) => {
                    for (n, t) in mha.params_mut() {
                        f(&format!("{}.{n}", named.name), t)?;
                    }
                }
                Node::FeedForward(ffn) => {
                    for (n, t) in ffn.params_mut() {
                        f(&format!("{}.{n}", named.name), t)?;
                    }
                }
                Node::PosEmbed(pe) => {
                    f(&format!("{}.table", named.name), &mut pe.table)?;
                }
                Node::Encoder(enc) => {
                    for (n, t) in enc.params_mut() {
                        f(&format!("{}.{n}", named.name), t)?;
                    }
                }
                Node::Elu(_)
                | Node::AvgPool(_)
                | Node::Dropout(_)
                | Node::Flatten(_)
                | Node::Softmax(_)
                | Node::Tokens(_) => {}
            }
        }
        Ok(())
    }

    /// Batch-norm running statistics as named f64 buffers, for checkpoints.
    pub fn buffers(&self) -> Vec<(String, Vec<f64>)> {
        let mut out = Vec::new();
        for named in &self.nodes {
            if let Node::BatchNorm(bn) = &named.node {
                out.push((format!("{}.running_mean", named.name), bn.running_mean.clone()));
                out.push((format!("{}.running_var", named.name), bn.running_var.clone()));
            }
        }
        out
    }

    pub fn set_buffer(&mut self, name: &str, values: &[f64]) -> Result<()> {
        for named in &mut self.nodes {
            if let Node::BatchNorm(bn) = &mut named.node {
                if name == format!("{}.running_mean", named.name) {
                    if values.len() != bn.running_mean.len() {
                        return Err(EegError::ShapeMismatch(format!(
                            "buffer {name} length mismatch"
                        )));
                    }
                    bn.running_mean = values.to_vec();
                    return Ok(());
                }
                if name == format!("{}.running_var", named.name) {
                    if values.len() != bn.running_var.len() {
                        return Err(EegError::ShapeMismatch(format!(
                            "buffer {name} length mismatch"
                        )));
                    }
                    bn.running_var = values.to_vec();
                    return Ok(());
                }
            }
        }
        Err(EegError::InvalidParameter(format!("no buffer named {name}")))
    }

    /// Flat parameter vector (f64), in `param_names()` order.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut flat = Vec::new();
        self.for_each_param(|_, t| flat.extend(t.to_f64_vec()));
        flat
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<()> {
        let mut offset = 0usize;
        self.for_each_param_mut(|name, t| {
            let n = t.numel();
            if offset + n > flat.len() {
                return Err(EegError::ShapeMismatch(format!(
                    "flat parameter vector too short at {name}"
                )));
            }
            for (dst, &src) in t.data_mut().iter_mut().zip(&flat[offset..offset + n]) {
                *dst = F::from_f64(src);
            }
            offset += n;
            Ok(())
        })?;
        if offset != flat.len() {
            return Err(EegError::ShapeMismatch(format!(
                "flat parameter vector has {} extra values",
                flat.len() - offset
            )));
        }
        Ok(())
    }
}
