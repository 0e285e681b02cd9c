//! Gaussian-process regression from 2D joint vectors to 3D joint
//! coordinates: squared-exponential kernel, exact inference through a
//! Cholesky factor, marginal-likelihood hyperparameter fitting and one
//! independent GP per output dimension.

mod cholesky;
mod gp;
mod io;
mod kernel;
mod lifter;

pub use cholesky::Cholesky;
pub use gp::{
    fit_gp, gp_predict, initial_hyperparams, log_marginal_likelihood, optimize_hyperparams, GpModel, OptimizeOptions,
    OptimizeTrace,
};
pub use io::{load_lifter, read_lifter, save_lifter, write_lifter, LIFTER_MAGIC};
pub use kernel::{kernel_matrix, se_kernel, squared_distances, KernelFactor, SeHyperparams};
pub use lifter::{lift, train_lifter, GpLifter, MIN_TRAINING_POSES};
