//! Online learning of soft committee machines in the teacher-student setting.
//!
//! A student committee machine learns from a fixed teacher by online
//! gradient descent on a reused, pre-selected input pool. Four training
//! schemes are provided (plain SGD, dropout, SGD with weight decay, and
//! ensembles of independently trained machines) together with a harness
//! that records learning and test error curves.

pub mod cli;
pub mod error;
pub mod harness;
pub mod learning;
mod linalg;
pub mod metrics;
pub mod model;
pub mod rng;

pub use error::{Result, ScmError};
pub use harness::{ExperimentConfig, LearningCurve, Method};
pub use learning::{
    draw_mask, dropout_predict, dropout_step, ensemble_predict, l2_sgd_step, sgd_step,
    split_network, DropoutMask, EnsembleSpec,
};
pub use metrics::{mse, overlaps, ErrorPoint, OverlapSnapshot};
pub use model::{
    activation, activation_deriv, init_weights, sample_input, CommitteeMachine, InputVector,
};
