//! Image containers, background subtraction, blob masks and the synthetic
//! scene generator.

mod background;
mod grid;
mod mask;
pub mod pgm;
pub mod synth;

pub use background::{BackgroundModel, DEFAULT_LEARNING_RATE, DEFAULT_THRESHOLD};
pub use grid::ImageGrid;
pub use mask::{clean_mask, overlap_ratio, BlobMask, BoundingBox, MaskIntegral};
