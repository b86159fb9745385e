//! Forward and backward passes of the four layer kinds.
//!
//! Each forward call fills a tape holding what its backward pass needs;
//! a tape is private to one example.

mod conv;
mod head;
mod pool;
mod stat;

pub use conv::{
    restrict_columns, spectral_conv_backward, spectral_conv_forward, ConvGrads, ConvTape,
    SpectralConvParams,
};
pub use head::{
    fc_softmax_backward, fc_softmax_forward, nll_loss, softmax, FcGrads, FcParams, FcTape,
    PROB_FLOOR,
};
pub use pool::{dynamic_pool, dynamic_pool_backward, ActiveNodeSet, PoolTape};
pub use stat::{stat_len, statistical_backward, statistical_forward, StatTape};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
