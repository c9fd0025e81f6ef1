//! Decompositional quantum graph neural network, simulated classically.
//!
//! Graphs are split into per-node subgraphs; node features are encoded as
//! single-qubit states by a trained rotation circuit; each subgraph becomes
//! a tensor product of rotated qubit states whose measurement entropy feeds
//! the next layer; summed entropies give a scalar graph embedding that is
//! labelled by its nearest class centroid. Training is derivative free.
//!
//! Module map:
//! - [`qsim`]: statevector simulator
//! - [`graphdata`]: graphs, TUDataset parsing, decomposition, chunking
//! - [`mapping`]: trainable feature encoder
//! - [`model`]: forward pass, classifier, training, checkpoints
//! - [`optim`]: derivative-free trust-region minimizer
//! - [`cli`]: cross-validation, training and evaluation commands

pub mod cli;
pub mod graphdata;
pub mod mapping;
pub mod model;
pub mod optim;
pub mod qsim;
