//! Histogram-of-oriented-gradients feature maps.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::ImageGrid;

pub const DEFAULT_CELL_SIZE: usize = 8;
pub const DEFAULT_ORIENTATIONS: usize = 9;
pub const DEFAULT_CLIP: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HogParams {
    pub cell_size: usize,
    pub n_orientations: usize,
    /// Block-normalized values are clipped here and renormalized; `None`
    /// keeps plain L2 block normalization.
    pub clip: Option<f64>,
}

impl Default for HogParams {
    fn default() -> Self {
        Self {
            cell_size: DEFAULT_CELL_SIZE,
            n_orientations: DEFAULT_ORIENTATIONS,
            clip: Some(DEFAULT_CLIP),
        }
    }
}

/// Dense per-cell features indexed `(cy, cx, channel)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub cells_x: usize,
    pub cells_y: usize,
    pub channels: usize,
    pub cell_size: usize,
    pub data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(cells_x: usize, cells_y: usize, channels: usize, cell_size: usize, data: Vec<f64>) -> Result<Self> {
        if cells_x == 0 || cells_y == 0 || channels == 0 || cell_size == 0 {
            return Err(Error::shape("feature map dimensions must be positive"));
        }
        if data.len() != cells_x * cells_y * channels {
            return Err(Error::shape(format!(
                "feature data length {} != {}x{}x{}",
                data.len(),
                cells_x,
                cells_y,
                channels
            )));
        }
        Ok(Self {
            cells_x,
            cells_y,
            channels,
            cell_size,
            data,
        })
    }

    pub fn cell(&self, cx: usize, cy: usize) -> &[f64] {
        let start = (cy * self.cells_x + cx) * self.channels;
        &self.data[start..start + self.channels]
    }

    pub fn get(&self, cx: usize, cy: usize, channel: usize) -> f64 {
        self.cell(cx, cy)[channel]
    }

    /// Dot product of `filter` with the `tpl_w`×`tpl_h` window anchored at
    /// `(cx, cy)`; `None` when the window leaves the map.
    pub fn window_dot(&self, cx: i64, cy: i64, tpl_w: usize, tpl_h: usize, filter: &[f64]) -> Option<f64> {
        if cx < 0 || cy < 0 || cx as usize + tpl_w > self.cells_x || cy as usize + tpl_h > self.cells_y {
            return None;
        }
        let (cx, cy) = (cx as usize, cy as usize);
        let row_len = tpl_w * self.channels;
        let mut acc = 0.0;
        for dy in 0..tpl_h {
            let start = ((cy + dy) * self.cells_x + cx) * self.channels;
            let row = &self.data[start..start + row_len];
            let f = &filter[dy * row_len..(dy + 1) * row_len];
            acc += row.iter().zip(f).map(|(a, b)| a * b).sum::<f64>();
        }
        Some(acc)
    }
}

/// HOG with the default clip.
pub fn compute_hog(image: &ImageGrid, cell_size: usize, n_orientations: usize) -> Result<FeatureMap> {
    compute_hog_with(
        image,
        &HogParams {
            cell_size,
            n_orientations,
            clip: Some(DEFAULT_CLIP),
        },
    )
}

pub fn compute_hog_with(image: &ImageGrid, params: &HogParams) -> Result<FeatureMap> {
    let cs = params.cell_size;
    let nb = params.n_orientations;
    if cs == 0 || nb == 0 {
        return Err(Error::config("cell size and orientation count must be positive"));
    }
    let (w, h) = image.dims();
    if w < 3 * cs || h < 3 * cs {
        return Err(Error::shape(format!(
            "image {w}x{h} is smaller than 3 cells of {cs} px"
        )));
    }
    let (ncx, ncy) = (w / cs, h / cs);

    let mut hist = vec![0.0; ncx * ncy * nb];
    let bin_width = PI / nb as f64;
    for y in 0..ncy * cs {
        for x in 0..ncx * cs {
            let (xi, yi) = (x as isize, y as isize);
            let gx = image.get_clamped(xi + 1, yi) - image.get_clamped(xi - 1, yi);
            let gy = image.get_clamped(xi, yi + 1) - image.get_clamped(xi, yi - 1);
            let mag = gx.hypot(gy);
            if mag == 0.0 {
                continue;
            }
            let mut theta = gy.atan2(gx);
            if theta < 0.0 {
                theta += PI;
            }
            if theta >= PI {
                theta -= PI;
            }
            let pos = theta / bin_width;
            let lo = pos.floor();
            let frac = pos - lo;
            let b0 = (lo as usize) % nb;
            let b1 = (b0 + 1) % nb;
            let cell = ((y / cs) * ncx + x / cs) * nb;
            hist[cell + b0] += mag * (1.0 - frac);
            hist[cell + b1] += mag * frac;
        }
    }

    // Every cell sits in four 2x2 blocks; blocks hanging off the map see zero
    // cells there.
    let mut out = vec![0.0; ncx * ncy * nb];
    let mut block = vec![0.0; 4 * nb];
    for by in -1..ncy as i64 {
        for bx in -1..ncx as i64 {
            let cells = [(bx, by), (bx + 1, by), (bx, by + 1), (bx + 1, by + 1)];
            for (k, &(cx, cy)) in cells.iter().enumerate() {
                let slot = &mut block[k * nb..(k + 1) * nb];
                if cx >= 0 && cy >= 0 && (cx as usize) < ncx && (cy as usize) < ncy {
                    let start = (cy as usize * ncx + cx as usize) * nb;
                    slot.copy_from_slice(&hist[start..start + nb]);
                } else {
                    slot.fill(0.0);
                }
            }
            normalize_block(&mut block, params.clip);
            for (k, &(cx, cy)) in cells.iter().enumerate() {
                if cx >= 0 && cy >= 0 && (cx as usize) < ncx && (cy as usize) < ncy {
                    let start = (cy as usize * ncx + cx as usize) * nb;
                    for (o, v) in out[start..start + nb].iter_mut().zip(&block[k * nb..(k + 1) * nb]) {
                        *o += 0.25 * v;
                    }
                }
            }
        }
    }
    FeatureMap::new(ncx, ncy, nb, cs, out)
}

fn normalize_block(block: &mut [f64], clip: Option<f64>) {
    let norm = block.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    block.iter_mut().for_each(|v| *v /= norm);
    if let Some(c) = clip {
        block.iter_mut().for_each(|v| *v = v.min(c));
        let renorm = block.iter().map(|v| v * v).sum::<f64>().sqrt();
        if renorm > 0.0 {
            block.iter_mut().for_each(|v| *v /= renorm);
        }
    }
}

/// The `tpl_w`×`tpl_h` window whose top-left cell is `anchor`, flattened
/// row-major as `(dy, dx, channel)`.
pub fn crop_feature(fm: &FeatureMap, anchor: (usize, usize), tpl_w: usize, tpl_h: usize) -> Result<Vec<f64>> {
    let (cx, cy) = anchor;
    if tpl_w == 0 || tpl_h == 0 || cx + tpl_w > fm.cells_x || cy + tpl_h > fm.cells_y {
        return Err(Error::shape(format!(
            "{tpl_w}x{tpl_h} window at ({cx},{cy}) exceeds {}x{} cells",
            fm.cells_x, fm.cells_y
        )));
    }
    let mut v = Vec::with_capacity(tpl_w * tpl_h * fm.channels);
    for dy in 0..tpl_h {
        let start = ((cy + dy) * fm.cells_x + cx) * fm.channels;
        v.extend_from_slice(&fm.data[start..start + tpl_w * fm.channels]);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn noise_image(w: usize, h: usize, seed: u64) -> ImageGrid {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ImageGrid::from_fn(w, h, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 33) % 256) as f64
        })
    }

    #[test]
    fn constant_image_gives_zero_features() {
        let fm = compute_hog(&ImageGrid::filled(32, 40, 77.0), 8, 9).unwrap();
        assert_eq!((fm.cells_x, fm.cells_y, fm.channels), (4, 5, 9));
        assert!(fm.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vertical_edge_fills_the_horizontal_gradient_bin() {
        let img = ImageGrid::from_fn(48, 48, |x, _| if x < 20 { 10.0 } else { 200.0 });
        let fm = compute_hog(&img, 8, 9).unwrap();
        // column of cells containing the edge at x=19/20
        let cx = 2;
        for cy in 0..fm.cells_y {
            let cell = fm.cell(cx, cy);
            let best = (0..9).max_by(|&a, &b| cell[a].total_cmp(&cell[b])).unwrap();
            assert_eq!(best, 0);
            assert!(cell[1..].iter().all(|&v| v < cell[0]));
        }
        // interior rows are identical
        for cy in 2..fm.cells_y - 2 {
            assert_eq!(fm.cell(cx, cy), fm.cell(cx, 1));
        }
    }

    #[test]
    fn half_turn_rotation_reindexes_cells() {
        let img = noise_image(40, 32, 9);
        let (w, h) = img.dims();
        let rot = ImageGrid::from_fn(w, h, |x, y| img.get(w - 1 - x, h - 1 - y));
        let a = compute_hog(&img, 8, 9).unwrap();
        let b = compute_hog(&rot, 8, 9).unwrap();
        for cy in 0..a.cells_y {
            for cx in 0..a.cells_x {
                let ra = a.cell(cx, cy);
                let rb = b.cell(a.cells_x - 1 - cx, a.cells_y - 1 - cy);
                for (u, v) in ra.iter().zip(rb) {
                    assert!((u - v).abs() < 1e-12, "{u} vs {v}");
                }
            }
        }
    }

    #[test]
    fn too_small_image_is_rejected() {
        assert!(matches!(
            compute_hog(&ImageGrid::filled(23, 100, 0.0), 8, 9),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn crops_follow_row_major_order() {
        let data: Vec<f64> = (0..4 * 4 * 2).map(|v| v as f64).collect();
        let fm = FeatureMap::new(4, 4, 2, 8, data.clone()).unwrap();
        assert_eq!(crop_feature(&fm, (2, 3), 1, 1).unwrap(), fm.cell(2, 3));
        assert_eq!(crop_feature(&fm, (0, 0), 4, 4).unwrap(), data);
        let mut expected = Vec::new();
        for (cx, cy) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            expected.extend_from_slice(&data[(cy * 4 + cx) * 2..(cy * 4 + cx) * 2 + 2]);
        }
        assert_eq!(crop_feature(&fm, (1, 1), 2, 2).unwrap(), expected);
        assert!(crop_feature(&fm, (3, 0), 2, 1).is_err());
    }

    #[test]
    fn window_dot_matches_crop() {
        let fm = compute_hog(&noise_image(48, 40, 3), 8, 9).unwrap();
        let filter: Vec<f64> = (0..2 * 3 * 9).map(|i| (i as f64 * 0.37).sin()).collect();
        let crop = crop_feature(&fm, (2, 1), 2, 3).unwrap();
        let direct: f64 = crop.iter().zip(&filter).map(|(a, b)| a * b).sum();
        let fast = fm.window_dot(2, 1, 2, 3, &filter).unwrap();
        assert!((direct - fast).abs() < 1e-12);
        assert_eq!(fm.window_dot(5, 0, 2, 3, &filter), None);
        assert_eq!(fm.window_dot(-1, 0, 2, 3, &filter), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn offset_invariance(seed in 0u64..1000, offset in -50.0f64..50.0) {
            let img = noise_image(32, 24, seed);
            let shifted = img.map(|v| v + offset);
            let a = compute_hog(&img, 8, 9).unwrap();
            let b = compute_hog(&shifted, 8, 9).unwrap();
            for (u, v) in a.data.iter().zip(&b.data) {
                prop_assert!((u - v).abs() < 1e-9);
            }
        }

        #[test]
        fn scale_invariance_without_clipping(seed in 0u64..1000, c in 0.1f64..10.0) {
            let img = noise_image(32, 24, seed);
            let scaled = img.map(|v| v * c);
            let p = HogParams { cell_size: 8, n_orientations: 9, clip: None };
            let a = compute_hog_with(&img, &p).unwrap();
            let b = compute_hog_with(&scaled, &p).unwrap();
            for (u, v) in a.data.iter().zip(&b.data) {
                prop_assert!((u - v).abs() < 1e-12);
            }
        }

        #[test]
        fn outputs_are_finite_and_bounded(seed in 0u64..1000, nb in 1usize..12) {
            let fm = compute_hog(&noise_image(40, 24, seed), 8, nb).unwrap();
            for &v in &fm.data {
                prop_assert!(v.is_finite() && (0.0..=1.0).contains(&v));
            }
        }
    }
}
