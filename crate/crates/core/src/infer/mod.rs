//! Inference: unary responses, generalized distance transforms, tree message
//! passing with optional blob gating, backtracking, and the multi-cue
//! configuration score with its candidate-set optimizer.

mod candidates;
mod dt;
mod mc;
mod messages;
mod responses;

pub use candidates::{enumerate_candidates, optimize_global, Candidate, OptimizeOutcome, MAX_PRODUCT};
pub use dt::{distance_transform, distance_transform_1d, DtResult};
pub use mc::{config_score, detect_double_counts, overlap_factors, score_config, sibling_pairs, McScorer};
pub use messages::{backtrack, find_root, pass_messages, ChildMessage, MessageTables};
pub use responses::{part_overlaps, part_responses, ResponseStack};

use serde::{Deserialize, Serialize};

use crate::model::PartTreeModel;

/// Score given to suppressed or invalid placements.
pub const SENTINEL: f64 = -1e6;

/// Part placement on the cell lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Placement {
    pub cell: (usize, usize),
    pub type_index: usize,
}

/// A full-body configuration with its scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub placements: Vec<Placement>,
    pub root_score: f64,
    pub s_mc: Option<f64>,
    pub flags: Vec<String>,
}

impl Detection {
    pub fn new(placements: Vec<Placement>, root_score: f64) -> Self {
        Self {
            placements,
            root_score,
            s_mc: None,
            flags: Vec::new(),
        }
    }

    /// Template centres in pixels, one per part.
    pub fn pixels(&self, m: &PartTreeModel) -> Vec<(f64, f64)> {
        self.placements
            .iter()
            .enumerate()
            .map(|(i, p)| m.lattice_to_pixel(i, p.cell.0, p.cell.1))
            .collect()
    }

    /// Flattened `(x, y)` pixel coordinates in part order.
    pub fn pose2d(&self, m: &PartTreeModel) -> Vec<f64> {
        self.pixels(m).into_iter().flat_map(|(x, y)| [x, y]).collect()
    }

    pub fn to_record(&self, m: &PartTreeModel, frame_index: usize) -> DetectionRecord {
        DetectionRecord {
            frame_index,
            parts: self
                .pixels(m)
                .into_iter()
                .zip(&self.placements)
                .zip(&m.parts)
                .map(|(((x, y), p), spec)| PartRecord {
                    name: spec.name.clone(),
                    x_px: x,
                    y_px: y,
                    r#type: p.type_index,
                })
                .collect(),
            root_score: self.root_score,
            s_mc: self.s_mc,
            flags: self.flags.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartRecord {
    pub name: String,
    pub x_px: f64,
    pub y_px: f64,
    #[serde(rename = "type")]
    pub r#type: usize,
}

/// One line of a detections file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub frame_index: usize,
    pub parts: Vec<PartRecord>,
    pub root_score: f64,
    pub s_mc: Option<f64>,
    pub flags: Vec<String>,
}

impl DetectionRecord {
    pub fn pose2d(&self) -> Vec<f64> {
        self.parts.iter().flat_map(|p| [p.x_px, p.y_px]).collect()
    }
}

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}
