//! Dense neural networks with manual reverse-mode differentiation and
//! Adam, in plain f64.

pub mod adam;
pub mod checkpoint;
pub mod layer;
pub mod matrix;
pub mod network;

pub use adam::AdamState;
pub use checkpoint::{Checkpoint, CheckpointError};
pub use layer::{Activation, DenseLayer};
pub use matrix::Matrix;
pub use network::{
    gaussian_logprob, Actor, ArchKind, Body, Critic, ResConcatBlock, TensorSet, ACTION_DIM,
    DEFAULT_HIDDEN,
};
