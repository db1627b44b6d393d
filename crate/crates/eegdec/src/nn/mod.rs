//! Reverse-mode autodiff over a fixed layer catalogue: the forward pass
//! records a tape of per-layer intermediates, the backward pass walks it once
//! in reverse. Generic over f32 (production) and f64 (the verification mode
//! every gradient check runs in).

pub mod adam;
pub mod attention;
pub mod gradcheck;
pub mod kernels;
pub mod layers;
pub mod loss;
pub mod network;
pub mod tensor;

pub use adam::{adam_step, AdamHyper, AdamState};
pub use attention::{mha_forward, EncoderBlock, FeedForward, MultiHeadAttention};
pub use gradcheck::{check_network_gradients, finite_difference_grad, rel_error};
pub use layers::{
    AvgPool, BatchNorm, Dropout, Elu, Flatten, GroupedConv2d, LayerNorm, Linear, Mode, Padding,
    PositionalEmbedding, SeparableConv2d, Softmax, TokensFromFeatureMap, BN_EPS, BN_MOMENTUM,
    LN_EPS,
};
pub use loss::{accuracy, argmax_rows, cross_entropy_from_probs};
pub use network::{Gradients, NamedNode, Network, Node, Tape};
pub use tensor::{Scalar, Tensor};
