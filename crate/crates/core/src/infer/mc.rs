use super::responses::ResponseStack;
use super::Placement;
use crate::imaging::{BlobMask, BoundingBox, MaskIntegral};
use crate::model::PartTreeModel;
use crate::skeleton::{PARTS, SIBLING_PAIRS};

/// Full tree score of a configuration: unary responses (bias included)
/// plus co-occurrence and deformation terms on every edge.
pub fn config_score(rs: &ResponseStack, m: &PartTreeModel, placements: &[Placement]) -> f64 {
    let mut total = 0.0;
    for (i, p) in placements.iter().enumerate() {
        total += rs.get(i, p.type_index, p.cell);
        total += edge_term(m, placements, i);
    }
    total
}

fn edge_term(m: &PartTreeModel, placements: &[Placement], i: usize) -> f64 {
    let Some(parent) = m.parts[i].parent else {
        return 0.0;
    };
    let pw = m.pairwise[i].as_ref().expect("validated tree");
    let (c, p) = (placements[i], placements[parent]);
    let anchor = m.types[i][c.type_index].anchor;
    let dx = c.cell.0 as f64 - p.cell.0 as f64 - anchor[0];
    let dy = c.cell.1 as f64 - p.cell.1 as f64 - anchor[1];
    pw.cooc(c.type_index, p.type_index) + pw.deformation(c.type_index, p.type_index).eval(dx, dy)
}

/// Left/right limb pairs of the standard skeleton present in `m`.
pub fn sibling_pairs(m: &PartTreeModel) -> Vec<(usize, usize)> {
    let names = m.part_names();
    let find = |name: &str| names.iter().position(|n| n == name);
    SIBLING_PAIRS
        .iter()
        .filter_map(|&(a, b)| Some((find(PARTS[a].name)?, find(PARTS[b].name)?)))
        .collect()
}

/// Overlap weights `F` for each part of a configuration.
///
/// Plain box/blob overlap ratio, except that left/right siblings split the
/// foreground they both cover: each is credited with half of the shared
/// pixels. Without this the score cannot tell two limbs apart from one limb
/// counted twice.
pub fn overlap_factors(m: &PartTreeModel, integral: &MaskIntegral, placements: &[Placement], pairs: &[(usize, usize)]) -> Vec<f64> {
    let boxes: Vec<BoundingBox> = placements
        .iter()
        .enumerate()
        .map(|(i, p)| m.part_box(i, p.cell.0, p.cell.1))
        .collect();
    let mut fg: Vec<f64> = boxes.iter().map(|b| integral.count_box(b) as f64).collect();
    for &(a, b) in pairs {
        if let Some((x0, y0, x1, y1)) = boxes[a].intersection(&boxes[b]) {
            let shared = integral.count(x0, y0, x1, y1) as f64;
            fg[a] -= 0.5 * shared;
            fg[b] -= 0.5 * shared;
        }
    }
    fg.iter().zip(&boxes).map(|(f, b)| f / b.area() as f64).collect()
}

/// Multi-cue score evaluator bound to one frame.
pub struct McScorer<'a> {
    pub model: &'a PartTreeModel,
    pub responses: &'a ResponseStack,
    pub integral: MaskIntegral,
    pub pairs: Vec<(usize, usize)>,
}

impl<'a> McScorer<'a> {
    pub fn new(model: &'a PartTreeModel, responses: &'a ResponseStack, mask: &BlobMask) -> Self {
        Self {
            model,
            responses,
            integral: MaskIntegral::new(mask),
            pairs: sibling_pairs(model),
        }
    }

    pub fn factors(&self, placements: &[Placement]) -> Vec<f64> {
        overlap_factors(self.model, &self.integral, placements, &self.pairs)
    }

    /// `Σ (ω·φ)·F_i + Σ (ω_ij·ψ + b_ij)·F_i·F_j + Σ b_i`.
    pub fn score(&self, placements: &[Placement]) -> f64 {
        let f = self.factors(placements);
        self.score_with(placements, &f)
    }

    pub fn score_with(&self, placements: &[Placement], f: &[f64]) -> f64 {
        let m = self.model;
        let mut total = 0.0;
        for (i, p) in placements.iter().enumerate() {
            let bias = m.types[i][p.type_index].bias;
            let appearance = self.responses.get(i, p.type_index, p.cell) - bias;
            total += appearance * f[i] + bias;
            if let Some(parent) = m.parts[i].parent {
                total += edge_term(m, placements, i) * f[i] * f[parent];
            }
        }
        total
    }
}

/// Multi-cue score of one configuration against a blob mask.
pub fn score_config(rs: &ResponseStack, m: &PartTreeModel, mask: &BlobMask, placements: &[Placement]) -> f64 {
    McScorer::new(m, rs, mask).score(placements)
}

/// Sibling pairs whose part boxes share more than `thresh1` of the smaller
/// box's area.
pub fn detect_double_counts(m: &PartTreeModel, placements: &[Placement], thresh1: f64) -> Vec<(usize, usize)> {
    sibling_pairs(m)
        .into_iter()
        .filter(|&(a, b)| {
            let ba = m.part_box(a, placements[a].cell.0, placements[a].cell.1);
            let bb = m.part_box(b, placements[b].cell.0, placements[b].cell.1);
            let smaller = ba.area().min(bb.area()) as f64;
            ba.intersection_area(&bb) as f64 > thresh1 * smaller
        })
        .collect()
}
