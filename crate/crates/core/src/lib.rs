//! Graph-based isometry-invariant image classification.
//!
//! Images are treated as signals on an 8-neighbour pixel grid graph. The
//! network alternates polynomial spectral convolutions of the normalized
//! Laplacian with dynamic pooling over active vertex sets, then summarises
//! every feature map with Chebyshev-filtered magnitude statistics before a
//! small fully-connected softmax head. Rotations by multiples of 90 degrees,
//! flips and (away from the border) integer translations are graph
//! automorphisms, so the class probabilities are invariant to them.
//!
//! Module map:
//!
//! | module | contents |
//! |--------|----------|
//! | [`graph`] | grid graphs, CSR matrices, normalized Laplacian, automorphisms |
//! | [`spectral`] | polynomial filters, Chebyshev recursion, filter bank init, dense oracle |
//! | [`layers`] | conv / pooling / statistical / FC forward and backward passes |
//! | [`network`] | architecture strings, parameters, whole-network passes, checkpoints |
//! | [`optim`] | Adam, the training loop, evaluation and gradient checking |
//! | [`data`] | IDX ingestion, MNIST subsets and image transforms |
//! | [`cli`] | the `tigranet` command-line front end |

pub mod cli;
pub mod data;
pub mod error;
pub mod graph;
pub mod layers;
pub mod network;
pub mod optim;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{GridAutomorphism, GridGraph, NormalizedLaplacian};
pub use network::{NetworkParams, NetworkSpec};
pub use spectral::PolynomialFilter;
