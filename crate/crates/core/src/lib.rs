//! Parsimonious Bayesian context trees: variable-order Markov models whose
//! internal nodes partition the alphabet, with a Chinese restaurant process
//! prior over the partitions and Dirichlet-categorical leaves.

pub mod error;
pub mod experiment;
pub mod generator;
pub mod inference;
pub mod io;
pub mod likelihood;
pub mod metrics;
pub mod model;
pub mod rng;

pub use error::{PbctError, Result};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport, ModelSpec};
pub use inference::{build_fbm, fit_pbct, fit_vbm, FitConfig};
pub use io::ModelFile;
pub use model::{
    AlphaSchedule, ContextTree, CountTable, Hyperparams, NodeIndex, Partition, SequenceCorpus,
    Vocabulary,
};
pub use rng::RngSeed;
