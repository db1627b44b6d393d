//! Model assembly and training: the EEGNet-style backbone (temporal
//! convolution, spatial depthwise convolution, depthwise-separable block)
//! and its attention-augmented variant that reinterprets the final feature
//! map as a token sequence for pre-layer-norm multi-head-attention encoder
//! blocks.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{EegError, Result};
use crate::io::{read_eegd, write_eegd};
use crate::nn::{
    adam_step, argmax_rows, cross_entropy_from_probs, AdamHyper, AdamState, AvgPool, BatchNorm,
    Dropout, Elu, EncoderBlock, Flatten, GroupedConv2d, LayerNorm, Linear, Mode, NamedNode,
    Network, Node, Padding, PositionalEmbedding, Scalar, SeparableConv2d, Softmax, Tensor,
    TokensFromFeatureMap, BN_EPS, BN_MOMENTUM, LN_EPS,
};
use crate::rng::mix_seed;
use crate::signal::EpochSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Eegnet,
    Adnn,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::Eegnet => write!(f, "eegnet"),
            ModelKind::Adnn => write!(f, "adnn"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttentionConfig {
    pub d_model: usize,
    pub heads: usize,
    pub ffn_hidden: usize,
    pub n_blocks: usize,
    pub use_positional_embedding: bool,
}

impl Default for AttentionConfig {
    fn default() -> Self {
        Self {
            d_model: 16,
            heads: 2,
            ffn_hidden: 32,
            n_blocks: 1,
            use_positional_embedding: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdnnConfig {
    pub channels: usize,
    pub samples: usize,
    pub n_classes: usize,
    pub f1: usize,
    pub depth_multiplier: usize,
    pub f2: usize,
    pub temporal_kernel: usize,
    pub separable_kernel: usize,
    pub pool1: usize,
    pub pool2: usize,
    pub dropout_p: f64,
    pub attention: AttentionConfig,
    pub seed: u64,
}

impl Default for AdnnConfig {
    fn default() -> Self {
        Self {
            channels: 58,
            samples: 500,
            n_classes: 4,
            f1: 8,
            depth_multiplier: 2,
            f2: 16,
            temporal_kernel: 125,
            separable_kernel: 16,
            pool1: 4,
            pool2: 8,
            dropout_p: 0.25,
            attention: AttentionConfig::default(),
            seed: 0,
        }
    }
}

impl AdnnConfig {
    /// Token count entering the attention head:
    /// floor(floor(samples/pool1)/pool2).
    pub fn token_count(&self) -> usize {
        (self.samples / self.pool1) / self.pool2
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels == 0 || self.samples == 0 {
            return Err(EegError::InvalidConfig("channels/samples must be >= 1".into()));
        }
        if self.n_classes < 2 {
            return Err(EegError::InvalidConfig("need at least 2 classes".into()));
        }
        if self.f1 == 0 || self.depth_multiplier == 0 {
            return Err(EegError::InvalidConfig("f1 and depth multiplier must be >= 1".into()));
        }
        if self.f2 != self.f1 * self.depth_multiplier {
            return Err(EegError::InvalidConfig(format!(
                "f2 {} must equal f1·depth = {}",
                self.f2,
                self.f1 * self.depth_multiplier
            )));
        }
        if self.temporal_kernel == 0 || self.separable_kernel == 0 {
            return Err(EegError::InvalidConfig("kernel sizes must be >= 1".into()));
        }
        if self.pool1 == 0 || self.pool2 == 0 {
            return Err(EegError::InvalidConfig("pool sizes must be >= 1".into()));
        }
        if self.token_count() == 0 {
            return Err(EegError::InvalidConfig(format!(
                "pooling {}/{} annihilates the time axis of {} samples",
                self.pool1, self.pool2, self.samples
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(EegError::InvalidConfig(format!(
                "dropout_p {} outside [0, 1)",
                self.dropout_p
            )));
        }
        if self.attention.d_model != self.f2 {
            return Err(EegError::InvalidConfig(format!(
                "attention d_model {} must equal f2 {}",
                self.attention.d_model, self.f2
            )));
        }
        if self.attention.heads == 0 || self.attention.d_model % self.attention.heads != 0 {
            return Err(EegError::InvalidConfig(format!(
                "d_model {} not divisible by heads {}",
                self.attention.d_model, self.attention.heads
            )));
        }
        Ok(())
    }
}

fn backbone_nodes<F: Scalar>(cfg: &AdnnConfig, rng: &mut ChaCha8Rng) -> Result<Vec<NamedNode<F>>> {
    let mut nodes = Vec::new();
    let mut push = |name: &str, node: Node<F>| {
        nodes.push(NamedNode {
            name: name.to_string(),
            node,
        })
    };
    push(
        "block1.conv",
        Node::Conv2d(GroupedConv2d::new(
            1,
            cfg.f1,
            1,
            (1, cfg.temporal_kernel),
            Padding::Same,
            false,
            rng,
        )?),
    );
    push(
        "block1.bn1",
        Node::BatchNorm(BatchNorm::new(cfg.f1, BN_MOMENTUM, BN_EPS)),
    );
    push(
        "block1.dw",
        Node::Conv2d(GroupedConv2d::new(
            cfg.f1,
            cfg.f2,
            cfg.f1,
            (cfg.channels, 1),
            Padding::Valid,
            false,
            rng,
        )?),
    );
    push(
        "block1.bn2",
        Node::BatchNorm(BatchNorm::new(cfg.f2, BN_MOMENTUM, BN_EPS)),
    );
    push("block1.elu", Node::Elu(Elu { alpha: 1.0 }));
    push("block1.pool", Node::AvgPool(AvgPool { kernel: (1, cfg.pool1) }));
    push("block1.drop", Node::Dropout(Dropout { p: cfg.dropout_p }));
    push(
        "block2.sep",
        Node::Separable(SeparableConv2d::new(
            cfg.f2,
            cfg.f2,
            (1, cfg.separable_kernel),
            rng,
        )?),
    );
    push(
        "block2.bn",
        Node::BatchNorm(BatchNorm::new(cfg.f2, BN_MOMENTUM, BN_EPS)),
    );
    push("block2.elu", Node::Elu(Elu { alpha: 1.0 }));
    push("block2.pool", Node::AvgPool(AvgPool { kernel: (1, cfg.pool2) }));
    push("block2.drop", Node::Dropout(Dropout { p: cfg.dropout_p }));
    Ok(nodes)
}

fn classifier_nodes<F: Scalar>(
    cfg: &AdnnConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<NamedNode<F>>> {
    Ok(vec![
        NamedNode {
            name: "classifier.flatten".into(),
            node: Node::Flatten(Flatten),
        },
        NamedNode {
            name: "classifier.linear".into(),
            node: Node::Linear(Linear::new(
                cfg.f2 * cfg.token_count(),
                cfg.n_classes,
                rng,
            )),
        },
        NamedNode {
            name: "classifier.softmax".into(),
            node: Node::Softmax(Softmax),
        },
    ])
}

/// EEGNet backbone: two convolutional blocks then the flatten/linear/softmax
/// classifier.
pub fn build_eegnet<F: Scalar>(cfg: &AdnnConfig) -> Result<Network<F>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, 0x1217, 0));
    let mut nodes = backbone_nodes(cfg, &mut rng)?;
    nodes.extend(classifier_nodes(cfg, &mut rng)?);
    Ok(Network::new(nodes))
}

/// ADNN: the EEGNet backbone, its [f2 × 1 × tokens] feature map read as a
/// token sequence, learned positional embeddings, pre-LN encoder blocks, a
/// final layer norm, then the same classifier head.
pub fn build_adnn<F: Scalar>(cfg: &AdnnConfig) -> Result<Network<F>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, 0x1217, 0));
    let mut nodes = backbone_nodes(cfg, &mut rng)?;
    nodes.push(NamedNode {
        name: "attn.tokens".into(),
        node: Node::Tokens(TokensFromFeatureMap),
    });
    if cfg.attention.use_positional_embedding {
        nodes.push(NamedNode {
            name: "attn.pos".into(),
            node: Node::PosEmbed(PositionalEmbedding::new(
                cfg.token_count(),
                cfg.attention.d_model,
                &mut rng,
            )),
        });
    }
    for i in 0..cfg.attention.n_blocks {
        nodes.push(NamedNode {
            name: format!("attn.enc{i}"),
            node: Node::Encoder(EncoderBlock::new(
                cfg.attention.d_model,
                cfg.attention.heads,
                cfg.attention.ffn_hidden,
                cfg.dropout_p,
                LN_EPS,
                &mut rng,
            )?),
        });
    }
    nodes.push(NamedNode {
        name: "attn.final_ln".into(),
        node: Node::LayerNorm(LayerNorm::new(cfg.attention.d_model, LN_EPS)),
    });
    nodes.extend(classifier_nodes(cfg, &mut rng)?);
    Ok(Network::new(nodes))
}

pub fn build_model<F: Scalar>(kind: ModelKind, cfg: &AdnnConfig) -> Result<Network<F>> {
    match kind {
        ModelKind::Eegnet => build_eegnet(cfg),
        ModelKind::Adnn => build_adnn(cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainHyper {
    pub lr: f64,
    pub batch: usize,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            batch: 16,
            max_epochs: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub valid_acc: f64,
}

/// A trained network plus the per-channel normalization fitted on its
/// training set and the per-epoch history. Holds the
/// best-validation-accuracy checkpoint.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub cfg: AdnnConfig,
    pub network: Network<f32>,
    pub channel_mean: Vec<f32>,
    pub channel_std: Vec<f32>,
    pub history: Vec<EpochStats>,
}

fn channel_stats(set: &EpochSet) -> (Vec<f32>, Vec<f32>) {
    let (t, c, s) = (set.trials(), set.channels(), set.samples());
    let mut mean = vec![0.0f64; c];
    let mut std = vec![0.0f64; c];
    let n = (t * s) as f64;
    for ci in 0..c {
        let mut acc = 0.0f64;
        for ti in 0..t {
            for si in 0..s {
                acc += set.data[[ti, ci, si]] as f64;
            }
        }
        mean[ci] = acc / n;
        let mut ss = 0.0f64;
        for ti in 0..t {
            for si in 0..s {
                let d = set.data[[ti, ci, si]] as f64 - mean[ci];
                ss += d * d;
            }
        }
        std[ci] = (ss / n).sqrt().max(1e-6);
    }
    (
        mean.into_iter().map(|v| v as f32).collect(),
        std.into_iter().map(|v| v as f32).collect(),
    )
}

fn batch_tensor(
    set: &EpochSet,
    indices: &[usize],
    mean: &[f32],
    std: &[f32],
) -> Tensor<f32> {
    let (c, s) = (set.channels(), set.samples());
    let mut data = Vec::with_capacity(indices.len() * c * s);
    for &ti in indices {
        for ci in 0..c {
            let m = mean[ci];
            let sd = std[ci];
            for si in 0..s {
                data.push((set.data[[ti, ci, si]] - m) / sd);
            }
        }
    }
    Tensor::from_vec(&[indices.len(), 1, c, s], data).expect("batch tensor shape")
}

fn eval_accuracy(
    net: &Network<f32>,
    set: &EpochSet,
    mean: &[f32],
    std: &[f32],
) -> Result<f64> {
    let mut correct = 0usize;
    let indices: Vec<usize> = (0..set.trials()).collect();
    for chunk in indices.chunks(32) {
        let x = batch_tensor(set, chunk, mean, std);
        let probs = net.infer(&x)?;
        let pred = argmax_rows(&probs);
        for (p, &ti) in pred.iter().zip(chunk) {
            if *p == set.labels[ti] {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / set.trials() as f64)
}

fn check_set(cfg: &AdnnConfig, set: &EpochSet, what: &str) -> Result<()> {
    if set.trials() == 0 {
        return Err(EegError::InsufficientData(format!("{what} set is empty")));
    }
    if set.channels() != cfg.channels || set.samples() != cfg.samples {
        return Err(EegError::ShapeMismatch(format!(
            "{what} set is {}×{} per trial, config expects {}×{}",
            set.channels(),
            set.samples(),
            cfg.channels,
            cfg.samples
        )));
    }
    if let Some(&bad) = set.labels.iter().find(|&&l| l >= cfg.n_classes) {
        return Err(EegError::InvalidLabel(format!(
            "{what} label {bad} out of range for {} classes",
            cfg.n_classes
        )));
    }
    Ok(())
}

/// Train with cross-entropy and Adam: per-channel z-scoring fitted on the
/// training set, seeded shuffling each epoch, best-validation-accuracy
/// checkpointing. Deterministic given inputs and seeds.
pub fn train(
    kind: ModelKind,
    cfg: &AdnnConfig,
    train_set: &EpochSet,
    valid_set: &EpochSet,
    hyper: &TrainHyper,
) -> Result<TrainedModel> {
    cfg.validate()?;
    check_set(cfg, train_set, "train")?;
    check_set(cfg, valid_set, "valid")?;
    if hyper.batch == 0 || hyper.max_epochs == 0 {
        return Err(EegError::InvalidParameter(
            "batch and max_epochs must be >= 1".into(),
        ));
    }

    let (mean, std) = channel_stats(train_set);
    let mut net = build_model::<f32>(kind, cfg)?;
    let sizes: Vec<usize> = {
        let mut v = Vec::new();
        net.for_each_param(|_, t| v.push(t.numel()));
        v
    };
    let mut state = AdamState::for_sizes(&sizes);
    let adam = AdamHyper {
        lr: hyper.lr,
        ..AdamHyper::default()
    };

    let mut history = Vec::with_capacity(hyper.max_epochs);
    let mut best_acc = f64::NEG_INFINITY;
    let mut best_net = net.clone();

    let mut indices: Vec<usize> = (0..train_set.trials()).collect();
    for epoch in 0..hyper.max_epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(hyper.seed, 0x5F1E, epoch as u64));
        indices.shuffle(&mut rng);

        let mut loss_sum = 0.0f64;
        let mut correct = 0usize;
        for (step, chunk) in indices.chunks(hyper.batch).enumerate() {
            let x = batch_tensor(train_set, chunk, &mean, &std);
            let labels: Vec<usize> = chunk.iter().map(|&ti| train_set.labels[ti]).collect();
            let dropout_seed = mix_seed(hyper.seed, 0xD209, (epoch * 1_000_003 + step) as u64);
            let (probs, mut tape) = net.forward(&x, Mode::Train, dropout_seed)?;
            let (loss, dprobs) = cross_entropy_from_probs(&probs, &labels)?;
            if !loss.is_finite() {
                return Err(EegError::Divergence { epoch });
            }
            loss_sum += loss * chunk.len() as f64;
            let pred = argmax_rows(&probs);
            correct += pred
                .iter()
                .zip(&labels)
                .filter(|(a, b)| a == b)
                .count();

            let grads = net.backward(&mut tape, &dprobs)?;
            state.t += 1;
            let mut idx = 0usize;
            let t = state.t;
            let m = &mut state.m;
            let v = &mut state.v;
            net.for_each_param_mut(|name, p| {
                adam_step(name, p, &grads.params[idx], &mut m[idx], &mut v[idx], t, &adam)?;
                idx += 1;
                Ok(())
            })?;
        }

        let train_loss = loss_sum / train_set.trials() as f64;
        let train_acc = correct as f64 / train_set.trials() as f64;
        let valid_acc = eval_accuracy(&net, valid_set, &mean, &std)?;
        history.push(EpochStats {
            epoch,
            train_loss,
            train_acc,
            valid_acc,
        });
        if valid_acc > best_acc {
            best_acc = valid_acc;
            best_net = net.clone();
        }
    }

    Ok(TrainedModel {
        kind,
        cfg: cfg.clone(),
        network: best_net,
        channel_mean: mean,
        channel_std: std,
        history,
    })
}

/// Eval-mode prediction with the stored normalization. Ties go to the lowest
/// class index.
pub fn predict(model: &TrainedModel, epochs: &EpochSet) -> Result<(Vec<usize>, Array2<f32>)> {
    if epochs.channels() != model.cfg.channels || epochs.samples() != model.cfg.samples {
        return Err(EegError::ShapeMismatch(format!(
            "epochs are {}×{} per trial, model expects {}×{}",
            epochs.channels(),
            epochs.samples(),
            model.cfg.channels,
            model.cfg.samples
        )));
    }
    let k = model.cfg.n_classes;
    let mut labels = Vec::with_capacity(epochs.trials());
    let mut probs = Array2::<f32>::zeros((epochs.trials(), k));
    let indices: Vec<usize> = (0..epochs.trials()).collect();
    for chunk in indices.chunks(32) {
        let x = batch_tensor(epochs, chunk, &model.channel_mean, &model.channel_std);
        let p = model.network.infer(&x)?;
        labels.extend(argmax_rows(&p));
        for (row, &ti) in chunk.iter().enumerate() {
            for j in 0..k {
                probs[[ti, j]] = p.data()[row * k + j];
            }
        }
    }
    Ok((labels, probs))
}

#[derive(Serialize, Deserialize)]
struct ModelMeta {
    kind: ModelKind,
    cfg: AdnnConfig,
    channel_mean: Vec<f32>,
    channel_std: Vec<f32>,
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct ParamsHeader {
    kind: String,
    tensors: Vec<TensorEntry>,
    buffers: Vec<TensorEntry>,
}

impl TrainedModel {
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let meta = ModelMeta {
            kind: self.kind,
            cfg: self.cfg.clone(),
            channel_mean: self.channel_mean.clone(),
            channel_std: self.channel_std.clone(),
        };
        let meta_json = serde_json::to_string_pretty(&meta)
            .map_err(|e| EegError::Format(format!("meta encode: {e}")))?;
        std::fs::write(dir.join("model.json"), meta_json)?;

        let mut tensors = Vec::new();
        let mut payload: Vec<f32> = Vec::new();
        self.network.for_each_param(|name, t| {
            tensors.push(TensorEntry {
                name: name.to_string(),
                shape: t.shape().to_vec(),
            });
            payload.extend(t.data().iter().copied());
        });
        let mut buffers = Vec::new();
        for (name, values) in self.network.buffers() {
            buffers.push(TensorEntry {
                name,
                shape: vec![values.len()],
            });
            payload.extend(values.iter().map(|&v| v as f32));
        }
        let header = ParamsHeader {
            kind: "params".into(),
            tensors,
            buffers,
        };
        write_eegd(&dir.join("params.eegd"), &header, &payload)?;

        let mut csv = String::from("epoch,train_loss,train_acc,valid_acc\n");
        for h in &self.history {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                h.epoch, h.train_loss, h.train_acc, h.valid_acc
            ));
        }
        std::fs::write(dir.join("history.csv"), csv)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let meta_json = std::fs::read_to_string(dir.join("model.json"))?;
        let meta: ModelMeta = serde_json::from_str(&meta_json)
            .map_err(|e| EegError::Format(format!("meta decode: {e}")))?;
        let (header, payload): (ParamsHeader, Vec<f32>) = read_eegd(&dir.join("params.eegd"))?;
        if header.kind != "params" {
            return Err(EegError::Format(format!(
                "expected kind \"params\", got \"{}\"",
                header.kind
            )));
        }
        let mut net = build_model::<f32>(meta.kind, &meta.cfg)?;
        let mut offset = 0usize;
        let mut by_name: std::collections::HashMap<String, (Vec<usize>, Vec<f32>)> =
            std::collections::HashMap::new();
        for entry in &header.tensors {
            let n: usize = entry.shape.iter().product();
            if offset + n > payload.len() {
                return Err(EegError::Format("params payload too short".into()));
            }
            by_name.insert(
                entry.name.clone(),
                (entry.shape.clone(), payload[offset..offset + n].to_vec()),
            );
            offset += n;
        }
        net.for_each_param_mut(|name, t| {
            let (shape, data) = by_name.get(name).ok_or_else(|| {
                EegError::Format(format!("checkpoint missing parameter {name}"))
            })?;
            if shape != t.shape() {
                return Err(EegError::ShapeMismatch(format!(
                    "checkpoint {name} has shape {shape:?}, model expects {:?}",
                    t.shape()
                )));
            }
            t.data_mut().copy_from_slice(data);
            Ok(())
        })?;
        for entry in &header.buffers {
            let n: usize = entry.shape.iter().product();
            if offset + n > payload.len() {
                return Err(EegError::Format("params payload too short".into()));
            }
            let values: Vec<f64> = payload[offset..offset + n]
                .iter()
                .map(|&v| v as f64)
                .collect();
            net.set_buffer(&entry.name, &values)?;
            offset += n;
        }
        Ok(Self {
            kind: meta.kind,
            cfg: meta.cfg,
            network: net,
            channel_mean: meta.channel_mean,
            channel_std: meta.channel_std,
            history: Vec::new(),
        })
    }
}
