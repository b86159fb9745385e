//! Architecture parsing, parameters, whole-network passes and checkpoints.

mod arch;
mod checkpoint;
mod model;
mod params;

pub use arch::{parse_architecture, parse_architecture_inferred, LayerSpec, NetworkSpec};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, MAGIC, VERSION};
pub use model::{
    backward, backward_from_logits, forward, loss_and_grad, predict, LayerTape, NetworkTape,
};
pub use params::{init_params, shapes, NetworkParams};
