//! The part-tree model: per-part mixtures of linear templates, type
//! co-occurrence priors and quadratic deformation springs, together with its
//! supervised fitting routines and binary file format.

mod cluster;
mod fit;
mod io;

pub use cluster::{cluster_part_types, TypeClusters};
pub use fit::{fit_pairwise, fit_templates, ridge_discriminant, PairSample, PairwiseFitConfig};
pub use io::{load_model, read_model, save_model, write_model, MODEL_MAGIC, MODEL_VERSION};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::BoundingBox;
use crate::skeleton::{NUM_PARTS, PARTS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartSpec {
    pub name: String,
    pub parent: Option<usize>,
    pub n_types: usize,
    /// Template size in cells.
    pub template_w: usize,
    pub template_h: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartType {
    /// `template_w × template_h × channels`, row-major like [`crate::crop_feature`].
    pub filter: Vec<f64>,
    pub bias: f64,
    /// Mean offset from the parent, in cells.
    pub anchor: [f64; 2],
}

/// Weights on `[dx, dx², dy, dy²]` of the residual offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deformation {
    pub w_dx: f64,
    pub w_dx2: f64,
    pub w_dy: f64,
    pub w_dy2: f64,
}

impl Deformation {
    pub fn eval(&self, dx: f64, dy: f64) -> f64 {
        self.w_dx * dx + self.w_dx2 * dx * dx + self.w_dy * dy + self.w_dy2 * dy * dy
    }

    /// Maximum of [`Self::eval`] over all offsets.
    pub fn peak(&self) -> f64 {
        -(self.w_dx * self.w_dx) / (4.0 * self.w_dx2) - (self.w_dy * self.w_dy) / (4.0 * self.w_dy2)
    }

    pub fn is_concave(&self) -> bool {
        self.w_dx2 < 0.0 && self.w_dy2 < 0.0
    }

    /// Pins the residual to zero: a very stiff spring with no linear term.
    pub fn rigid(stiffness: f64) -> Self {
        Self {
            w_dx: 0.0,
            w_dx2: -stiffness,
            w_dy: 0.0,
            w_dy2: -stiffness,
        }
    }
}

/// Parameters linking a part to its parent, indexed `[child_type][parent_type]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseParams {
    pub n_child: usize,
    pub n_parent: usize,
    pub co_occurrence: Vec<f64>,
    pub deform: Vec<Deformation>,
}

impl PairwiseParams {
    pub fn cooc(&self, child_type: usize, parent_type: usize) -> f64 {
        self.co_occurrence[child_type * self.n_parent + parent_type]
    }

    pub fn deformation(&self, child_type: usize, parent_type: usize) -> &Deformation {
        &self.deform[child_type * self.n_parent + parent_type]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartTreeModel {
    pub parts: Vec<PartSpec>,
    pub types: Vec<Vec<PartType>>,
    /// `None` exactly at the root.
    pub pairwise: Vec<Option<PairwiseParams>>,
    pub cell_size: usize,
    pub n_orientations: usize,
}

/// Shape of the tree before any parameters are fitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeLayout {
    pub parts: Vec<PartSpec>,
}

impl TreeLayout {
    /// The 13-part human skeleton with square templates.
    pub fn human(template_w: usize, template_h: usize) -> Self {
        Self {
            parts: PARTS
                .iter()
                .map(|p| PartSpec {
                    name: p.name.to_string(),
                    parent: p.parent,
                    n_types: p.n_types,
                    template_w,
                    template_h,
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_tree(&self.parts)
    }
}

/// Checks a single root at index 0 and parents preceding children.
pub fn validate_tree(parts: &[PartSpec]) -> Result<()> {
    if parts.is_empty() {
        return Err(Error::config("a part tree needs at least one part"));
    }
    for (i, p) in parts.iter().enumerate() {
        match (i, p.parent) {
            (0, None) => {}
            (0, Some(_)) => return Err(Error::config("part 0 must be the root")),
            (_, None) => return Err(Error::config(format!("part {i} ({}) is a second root", p.name))),
            (_, Some(parent)) if parent >= i => {
                return Err(Error::config(format!(
                    "part {i} ({}) has parent {parent}, which does not precede it",
                    p.name
                )))
            }
            _ => {}
        }
        if p.n_types == 0 || p.template_w == 0 || p.template_h == 0 {
            return Err(Error::config(format!("part {i} ({}) has an empty dimension", p.name)));
        }
    }
    Ok(())
}

impl PartTreeModel {
    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn filter_len(&self, part: usize) -> usize {
        let p = &self.parts[part];
        p.template_w * p.template_h * self.n_orientations
    }

    pub fn children(&self, part: usize) -> impl Iterator<Item = usize> + '_ {
        self.parts
            .iter()
            .enumerate()
            .filter(move |(_, p)| p.parent == Some(part))
            .map(|(i, _)| i)
    }

    pub fn part_names(&self) -> Vec<String> {
        self.parts.iter().map(|p| p.name.clone()).collect()
    }

    pub fn is_standard_skeleton(&self) -> bool {
        self.parts.len() == NUM_PARTS
            && self
                .parts
                .iter()
                .zip(PARTS.iter())
                .all(|(a, b)| a.name == b.name && a.parent == b.parent)
    }

    /// Template window (cells) of `part` placed at lattice point `(px, py)`:
    /// top-left cell of the window.
    pub fn window_origin(&self, part: usize, px: usize, py: usize) -> (i64, i64) {
        let p = &self.parts[part];
        (
            px as i64 - (p.template_w / 2) as i64,
            py as i64 - (p.template_h / 2) as i64,
        )
    }

    /// Pixel-space box covered by the part template at lattice point `(px, py)`.
    pub fn part_box(&self, part: usize, px: usize, py: usize) -> BoundingBox {
        let p = &self.parts[part];
        let (ox, oy) = self.window_origin(part, px, py);
        let cs = self.cell_size as i64;
        BoundingBox::new(ox * cs, oy * cs, p.template_w * self.cell_size, p.template_h * self.cell_size)
    }

    /// Pixel coordinates of the template centre at lattice point `(px, py)`.
    pub fn lattice_to_pixel(&self, part: usize, px: usize, py: usize) -> (f64, f64) {
        let b = self.part_box(part, px, py);
        (b.x as f64 + b.w as f64 / 2.0, b.y as f64 + b.h as f64 / 2.0)
    }

    /// Nearest lattice point whose template centre is closest to `(x, y)`.
    pub fn pixel_to_lattice(&self, part: usize, x: f64, y: f64) -> (i64, i64) {
        let p = &self.parts[part];
        let cs = self.cell_size as f64;
        let fx = (p.template_w % 2) as f64 / 2.0;
        let fy = (p.template_h % 2) as f64 / 2.0;
        ((x / cs - fx).round() as i64, (y / cs - fy).round() as i64)
    }

    /// Structural checks shared by construction and deserialization.
    pub fn validate(&self) -> Result<()> {
        validate_tree(&self.parts)?;
        if self.cell_size == 0 || self.n_orientations == 0 {
            return Err(Error::config("feature configuration must be positive"));
        }
        if self.types.len() != self.parts.len() || self.pairwise.len() != self.parts.len() {
            return Err(Error::config("per-part tables do not match the part count"));
        }
        for (i, part) in self.parts.iter().enumerate() {
            if self.types[i].len() != part.n_types {
                return Err(Error::config(format!("part {} has {} types, expected {}", part.name, self.types[i].len(), part.n_types)));
            }
            let flen = self.filter_len(i);
            if self.types[i].iter().any(|t| t.filter.len() != flen) {
                return Err(Error::config(format!("part {} has a filter of the wrong length", part.name)));
            }
            match (part.parent, &self.pairwise[i]) {
                (None, None) => {}
                (Some(parent), Some(pw)) => {
                    let np = self.parts[parent].n_types;
                    if pw.n_child != part.n_types
                        || pw.n_parent != np
                        || pw.co_occurrence.len() != np * part.n_types
                        || pw.deform.len() != np * part.n_types
                    {
                        return Err(Error::config(format!("pairwise table of {} has the wrong shape", part.name)));
                    }
                    if let Some(d) = pw.deform.iter().find(|d| !d.is_concave()) {
                        return Err(Error::config(format!(
                            "deformation of {} is not strictly concave ({}, {})",
                            part.name, d.w_dx2, d.w_dy2
                        )));
                    }
                }
                _ => return Err(Error::config(format!("pairwise table presence wrong for {}", part.name))),
            }
        }
        Ok(())
    }
}
