use super::{par_map, SENTINEL};
use crate::error::{Error, Result};
use crate::features::FeatureMap;
use crate::imaging::{BlobMask, ImageGrid, MaskIntegral};
use crate::model::PartTreeModel;

/// Unary score maps over the cell lattice, indexed `[part][type]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseStack {
    pub width: usize,
    pub height: usize,
    pub maps: Vec<Vec<ImageGrid>>,
}

impl ResponseStack {
    pub fn get(&self, part: usize, type_index: usize, cell: (usize, usize)) -> f64 {
        self.maps[part][type_index].get(cell.0, cell.1)
    }
}

/// Filter response plus bias at every lattice point; windows leaving the
/// feature map score [`SENTINEL`].
pub fn part_responses(fm: &FeatureMap, m: &PartTreeModel) -> Result<ResponseStack> {
    if fm.cell_size != m.cell_size || fm.channels != m.n_orientations {
        return Err(Error::shape(format!(
            "feature map (cell {}, {} channels) does not match model (cell {}, {} orientations)",
            fm.cell_size, fm.channels, m.cell_size, m.n_orientations
        )));
    }
    let (w, h) = (fm.cells_x, fm.cells_y);
    let jobs: Vec<(usize, usize)> = (0..m.num_parts())
        .flat_map(|i| (0..m.types[i].len()).map(move |t| (i, t)))
        .collect();
    let grids = par_map(&jobs, |&(i, t)| {
        let spec = &m.parts[i];
        let pt = &m.types[i][t];
        ImageGrid::from_fn(w, h, |x, y| {
            let (ox, oy) = m.window_origin(i, x, y);
            match fm.window_dot(ox, oy, spec.template_w, spec.template_h, &pt.filter) {
                Some(v) => v + pt.bias,
                None => SENTINEL,
            }
        })
    });
    let mut it = grids.into_iter();
    let maps = (0..m.num_parts())
        .map(|i| (0..m.types[i].len()).map(|_| it.next().unwrap()).collect())
        .collect();
    Ok(ResponseStack {
        width: w,
        height: h,
        maps,
    })
}

/// Box/blob overlap ratio of each part's template box at every lattice point.
pub fn part_overlaps(m: &PartTreeModel, mask: &BlobMask, width: usize, height: usize) -> Vec<ImageGrid> {
    let integral = MaskIntegral::new(mask);
    (0..m.num_parts())
        .map(|i| ImageGrid::from_fn(width, height, |x, y| integral.overlap_ratio(&m.part_box(i, x, y))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::crop_feature;
    use crate::model::{PartSpec, PartType};

    fn single_part(tw: usize, th: usize, types: Vec<PartType>, nb: usize) -> PartTreeModel {
        PartTreeModel {
            parts: vec![PartSpec {
                name: "root".into(),
                parent: None,
                n_types: types.len(),
                template_w: tw,
                template_h: th,
            }],
            types: vec![types],
            pairwise: vec![None],
            cell_size: 4,
            n_orientations: nb,
        }
    }

    fn feature_map(seed: u64) -> FeatureMap {
        let data = (0..6 * 5 * 3).map(|i| (((i as u64 + seed) * 2654435761) % 1000) as f64 / 1000.0).collect();
        FeatureMap::new(6, 5, 3, 4, data).unwrap()
    }

    #[test]
    fn zero_filter_gives_constant_bias_inside() {
        let m = single_part(2, 2, vec![PartType { filter: vec![0.0; 12], bias: 1.5, anchor: [0.0; 2] }], 3);
        let rs = part_responses(&feature_map(1), &m).unwrap();
        let g = &rs.maps[0][0];
        for y in 0..5 {
            for x in 0..6 {
                // window origin = (x-1, y-1); valid when x in 1..=5 and y in 1..=4
                let inside = (1..=5).contains(&x) && (1..=4).contains(&y);
                assert_eq!(g.get(x, y), if inside { 1.5 } else { SENTINEL });
            }
        }
    }

    #[test]
    fn matched_filter_peaks_at_its_source() {
        let fm = feature_map(7);
        let target = (3, 2);
        let crop = crop_feature(&fm, (target.0 - 1, target.1 - 1), 2, 2).unwrap();
        let norm = crop.iter().map(|v| v * v).sum::<f64>().sqrt();
        let filter: Vec<f64> = crop.iter().map(|v| v / norm).collect();
        let m = single_part(2, 2, vec![PartType { filter: filter.clone(), bias: 0.0, anchor: [0.0; 2] }], 3);
        let rs = part_responses(&fm, &m).unwrap();
        // exhaustive oracle
        let mut best = (0, 0, f64::NEG_INFINITY);
        for y in 1..5 {
            for x in 1..6 {
                let c = crop_feature(&fm, (x - 1, y - 1), 2, 2).unwrap();
                let v: f64 = c.iter().zip(&filter).map(|(a, b)| a * b).sum();
                assert!((rs.maps[0][0].get(x, y) - v).abs() < 1e-12);
                if v > best.2 {
                    best = (x, y, v);
                }
            }
        }
        assert_eq!((best.0, best.1), (rs.maps[0][0].argmax().0 % 6, rs.maps[0][0].argmax().0 / 6));
    }

    #[test]
    fn identical_filters_give_identical_maps() {
        let t = PartType { filter: (0..12).map(|i| i as f64 * 0.1).collect(), bias: -0.2, anchor: [0.0; 2] };
        let m = single_part(2, 2, vec![t.clone(), t], 3);
        let rs = part_responses(&feature_map(3), &m).unwrap();
        assert_eq!(rs.maps[0][0], rs.maps[0][1]);
    }

    #[test]
    fn mismatched_feature_config_is_rejected() {
        let m = single_part(2, 2, vec![PartType { filter: vec![0.0; 16], bias: 0.0, anchor: [0.0; 2] }], 4);
        assert!(matches!(part_responses(&feature_map(0), &m), Err(Error::Shape(_))));
    }
}
