//! Articulated 2D pose detection with tree-structured mixtures of parts,
//! fused with a background-subtraction blob cue, plus Gaussian-process
//! lifting of 2D joint detections to 3D poses.
//!
//! The crate is organised bottom-up:
//!
//! - [`imaging`]: image grids, running-average background model, blob masks,
//!   and a synthetic stick-figure scene generator with ground truth.
//! - [`features`]: HOG feature maps.
//! - [`model`]: the part-tree model, supervised fitting and its binary format.
//! - [`infer`]: responses, generalized distance transforms, message passing,
//!   backtracking and the multi-cue global optimizer.
//! - [`lift3d`]: squared-exponential Gaussian processes for 2D to 3D lifting.
//! - [`eval`]: PCK, MPJPE, double-counting rate and trace plots.
//! - [`pipeline`]: training and detection drivers shared by the CLI.
//! - [`experiment`]: experiment configuration and the file-based commands.

mod binio;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod features;
pub mod imaging;
pub mod infer;
pub mod lift3d;
pub mod model;
pub mod pipeline;
pub mod raster;
pub mod skeleton;

pub use error::{Error, Result};
pub use features::{compute_hog, crop_feature, FeatureMap, HogParams};
pub use imaging::{BackgroundModel, BlobMask, BoundingBox, ImageGrid};
pub use infer::Detection;
pub use lift3d::{GpLifter, GpModel, SeHyperparams};
pub use model::PartTreeModel;
