//! Fully connected GAN over price windows: networks, training, sampling and checkpoints.

pub mod adam;
pub mod checkpoint;
pub mod mlp;
pub mod model;
pub mod train;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_VERSION};
pub use mlp::{Activation, Dense, ForwardCache, Gradients, MlpParams};
pub use model::GanModel;
pub use train::{detect_collapse, probe_spread, train, CollapseReason, CollapseThresholds, GanConfig, TrainReport};
