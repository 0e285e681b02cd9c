use super::dt::distance_transform;
use super::responses::{part_overlaps, ResponseStack};
use super::{par_map, Detection, Placement, SENTINEL};
use crate::error::{Error, Result};
use crate::imaging::{BlobMask, ImageGrid};
use crate::model::PartTreeModel;

/// Message from a child to its parent, per parent type: the best achievable
/// child-subtree score at each parent cell, with the child type and cell
/// that achieve it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChildMessage {
    pub values: Vec<ImageGrid>,
    pub best_type: Vec<Vec<u16>>,
    pub best_cell: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MessageTables {
    pub width: usize,
    pub height: usize,
    /// `[part][type]`: (gated) unary plus incoming child messages.
    pub subtree: Vec<Vec<ImageGrid>>,
    /// `None` at the root.
    pub messages: Vec<Option<ChildMessage>>,
    pub root_type: Vec<u16>,
    pub root_map: ImageGrid,
}

/// Leaf-to-root max-product sweep over the part tree.
///
/// With `gate`, unary scores at cells whose part box overlaps the blob by
/// less than `thresh2` are replaced by [`SENTINEL`] before transformation.
/// Returns the root score map (max over root types) and the tables needed
/// for backtracking.
pub fn pass_messages(rs: &ResponseStack, m: &PartTreeModel, mask: Option<&BlobMask>, gate: bool, thresh2: f64) -> Result<(ImageGrid, MessageTables)> {
    let (w, h) = (rs.width, rs.height);
    let k = m.num_parts();
    if rs.maps.len() != k || (0..k).any(|i| rs.maps[i].len() != m.types[i].len()) {
        return Err(Error::shape("response stack does not match the model"));
    }
    let overlaps = if gate {
        let mask = mask.ok_or_else(|| Error::config("gating requested without a blob mask"))?;
        Some(part_overlaps(m, mask, w, h))
    } else {
        None
    };

    let mut subtree: Vec<Vec<ImageGrid>> = (0..k)
        .map(|i| {
            rs.maps[i]
                .iter()
                .map(|g| match &overlaps {
                    Some(ov) => ImageGrid::from_fn(w, h, |x, y| {
                        if ov[i].get(x, y) < thresh2 {
                            SENTINEL
                        } else {
                            g.get(x, y)
                        }
                    }),
                    None => g.clone(),
                })
                .collect()
        })
        .collect();
    let mut messages: Vec<Option<ChildMessage>> = vec![None; k];

    for c in (1..k).rev() {
        let parent = m.parts[c].parent.expect("validated tree");
        let pw = m.pairwise[c].as_ref().expect("validated tree");
        let n_child = m.types[c].len();
        let n_parent = m.types[parent].len();
        let jobs: Vec<(usize, usize)> = (0..n_parent).flat_map(|tp| (0..n_child).map(move |tc| (tp, tc))).collect();
        let child_scores = &subtree[c];
        let transformed = par_map(&jobs, |&(tp, tc)| {
            distance_transform(&child_scores[tc], pw.deformation(tc, tp), m.types[c][tc].anchor)
        });
        let mut transformed = transformed.into_iter();
        let mut msg = ChildMessage {
            values: Vec::with_capacity(n_parent),
            best_type: Vec::with_capacity(n_parent),
            best_cell: Vec::with_capacity(n_parent),
        };
        for tp in 0..n_parent {
            let mut val = vec![f64::NEG_INFINITY; w * h];
            let mut bt = vec![0u16; w * h];
            let mut bc = vec![0u32; w * h];
            for tc in 0..n_child {
                let dt = transformed.next().unwrap()?;
                let co = pw.cooc(tc, tp);
                for (q, v) in dt.values.data().iter().enumerate() {
                    let s = v + co;
                    if s > val[q] {
                        val[q] = s;
                        bt[q] = tc as u16;
                        bc[q] = dt.argmax[q] as u32;
                    }
                }
            }
            for (s, v) in subtree[parent][tp].data_mut().iter_mut().zip(&val) {
                *s += v;
            }
            msg.values.push(ImageGrid::new(w, h, val)?);
            msg.best_type.push(bt);
            msg.best_cell.push(bc);
        }
        messages[c] = Some(msg);
    }

    let mut root_vals = vec![f64::NEG_INFINITY; w * h];
    let mut root_type = vec![0u16; w * h];
    for (t, g) in subtree[0].iter().enumerate() {
        for (q, &v) in g.data().iter().enumerate() {
            if v > root_vals[q] {
                root_vals[q] = v;
                root_type[q] = t as u16;
            }
        }
    }
    let root_map = ImageGrid::new(w, h, root_vals)?;
    Ok((
        root_map.clone(),
        MessageTables {
            width: w,
            height: h,
            subtree,
            messages,
            root_type,
            root_map,
        },
    ))
}

/// Greedy non-maximum suppression: cells by descending score (ties to the
/// lower row-major index), each suppressing others within Chebyshev
/// distance `radius`; scores `≤ min_score` are dropped.
pub fn find_root(root_map: &ImageGrid, radius: usize, min_score: f64) -> Vec<((usize, usize), f64)> {
    let w = root_map.width();
    let mut order: Vec<usize> = (0..root_map.len()).filter(|&i| root_map.data()[i] > min_score).collect();
    order.sort_by(|&a, &b| root_map.data()[b].total_cmp(&root_map.data()[a]).then(a.cmp(&b)));
    let mut kept: Vec<((usize, usize), f64)> = Vec::new();
    for i in order {
        let (x, y) = (i % w, i / w);
        let clear = kept
            .iter()
            .all(|&((kx, ky), _)| kx.abs_diff(x) > radius || ky.abs_diff(y) > radius);
        if clear {
            kept.push(((x, y), root_map.data()[i]));
        }
    }
    kept
}

/// Root-to-leaf argmax trace through the stored message tables.
pub fn backtrack(root_cell: (usize, usize), tables: &MessageTables, m: &PartTreeModel) -> Detection {
    let w = tables.width;
    let k = m.num_parts();
    let mut placements = vec![
        Placement {
            cell: (0, 0),
            type_index: 0,
        };
        k
    ];
    let q0 = root_cell.1 * w + root_cell.0;
    placements[0] = Placement {
        cell: root_cell,
        type_index: tables.root_type[q0] as usize,
    };
    for c in 1..k {
        let parent = m.parts[c].parent.expect("validated tree");
        let pp = placements[parent];
        let q = pp.cell.1 * w + pp.cell.0;
        let msg = tables.messages[c].as_ref().expect("child message");
        let cell = msg.best_cell[pp.type_index][q] as usize;
        placements[c] = Placement {
            cell: (cell % w, cell / w),
            type_index: msg.best_type[pp.type_index][q] as usize,
        };
    }
    Detection::new(placements, tables.root_map.data()[q0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infer::config_score;
    use crate::model::{Deformation, PairwiseParams, PartSpec, PartType};

    /// Chain root ← a ← b with one type each on a tiny lattice.
    fn chain(w: usize, h: usize) -> (PartTreeModel, ResponseStack) {
        let parts = (0..3)
            .map(|i| PartSpec {
                name: format!("p{i}"),
                parent: if i == 0 { None } else { Some(i - 1) },
                n_types: 1,
                template_w: 1,
                template_h: 1,
            })
            .collect();
        let types = (0..3)
            .map(|i| vec![PartType { filter: vec![0.0], bias: 0.0, anchor: [i as f64 * 0.5, -0.25] }])
            .collect();
        let pairwise = (0..3)
            .map(|i| {
                (i > 0).then(|| PairwiseParams {
                    n_child: 1,
                    n_parent: 1,
                    co_occurrence: vec![-0.1 * i as f64],
                    deform: vec![Deformation { w_dx: 0.3, w_dx2: -0.6, w_dy: -0.2, w_dy2: -0.9 }],
                })
            })
            .collect();
        let m = PartTreeModel { parts, types, pairwise, cell_size: 1, n_orientations: 1 };
        let maps = (0..3)
            .map(|i| vec![ImageGrid::from_fn(w, h, |x, y| (((x * 7 + y * 3 + i * 5) % 9) as f64) * 0.4 - 1.0)])
            .collect();
        (m, ResponseStack { width: w, height: h, maps })
    }

    #[test]
    fn chain_matches_exhaustive_enumeration() {
        let (w, h) = (2, 2);
        let (m, rs) = chain(w, h);
        let (root_map, tables) = pass_messages(&rs, &m, None, false, 0.2).unwrap();
        let cells: Vec<(usize, usize)> = (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).collect();
        for &r in &cells {
            let mut best = f64::NEG_INFINITY;
            let mut best_cfg = vec![];
            for &a in &cells {
                for &b in &cells {
                    let cfg: Vec<Placement> = [r, a, b].iter().map(|&c| Placement { cell: c, type_index: 0 }).collect();
                    let s = config_score(&rs, &m, &cfg);
                    if s > best {
                        best = s;
                        best_cfg = cfg;
                    }
                }
            }
            assert!((root_map.get(r.0, r.1) - best).abs() < 1e-9);
            let d = backtrack(r, &tables, &m);
            assert_eq!(d.placements, best_cfg);
        }
    }

    #[test]
    fn root_only_map_is_best_unary() {
        let t = |b: f64| PartType { filter: vec![0.0], bias: b, anchor: [0.0; 2] };
        let m = PartTreeModel {
            parts: vec![PartSpec { name: "r".into(), parent: None, n_types: 2, template_w: 1, template_h: 1 }],
            types: vec![vec![t(0.0), t(0.0)]],
            pairwise: vec![None],
            cell_size: 1,
            n_orientations: 1,
        };
        let a = ImageGrid::from_fn(3, 2, |x, y| (x + y) as f64);
        let b = ImageGrid::from_fn(3, 2, |x, _| 2.0 - x as f64);
        let rs = ResponseStack { width: 3, height: 2, maps: vec![vec![a.clone(), b.clone()]] };
        let (root, tables) = pass_messages(&rs, &m, None, false, 0.2).unwrap();
        for (i, v) in root.data().iter().enumerate() {
            assert_eq!(*v, a.data()[i].max(b.data()[i]));
        }
        let d = backtrack((0, 0), &tables, &m);
        assert_eq!(d.placements[0], Placement { cell: (0, 0), type_index: 1 });
    }

    #[test]
    fn gating_with_full_mask_changes_nothing() {
        let (m, rs) = chain(4, 3);
        let mask = BlobMask::filled(4, 3, true);
        let (a, _) = pass_messages(&rs, &m, None, false, 0.2).unwrap();
        let (b, _) = pass_messages(&rs, &m, Some(&mask), true, 0.2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gating_only_lowers_scores() {
        let (m, rs) = chain(5, 4);
        let mask = BlobMask::from_fn(5, 4, |x, y| (x + y) % 3 == 0);
        let (a, _) = pass_messages(&rs, &m, None, false, 0.2).unwrap();
        let (b, _) = pass_messages(&rs, &m, Some(&mask), true, 0.2).unwrap();
        for (u, v) in a.data().iter().zip(b.data()) {
            assert!(v <= u);
        }
    }

    #[test]
    fn gating_without_mask_is_a_config_error() {
        let (m, rs) = chain(2, 2);
        assert!(matches!(pass_messages(&rs, &m, None, true, 0.2), Err(Error::Config(_))));
    }

    #[test]
    fn nms_examples() {
        let single = ImageGrid::from_fn(5, 5, |x, y| if (x, y) == (3, 1) { 2.0 } else { 0.0 });
        assert_eq!(find_root(&single, 1, 0.5), vec![((3, 1), 2.0)]);

        let twins = ImageGrid::from_fn(6, 4, |x, y| if (x, y) == (2, 1) || (x, y) == (3, 2) { 5.0 } else { 0.0 });
        assert_eq!(find_root(&twins, 2, 1.0), vec![((2, 1), 5.0)]);

        let apart = ImageGrid::from_fn(10, 4, |x, y| match (x, y) {
            (1, 1) => 3.0,
            (8, 2) => 4.0,
            _ => 0.0,
        });
        assert_eq!(find_root(&apart, 2, 1.0), vec![((8, 2), 4.0), ((1, 1), 3.0)]);
        assert!(find_root(&ImageGrid::filled(3, 3, -1.0), 1, 0.0).is_empty());
    }
}
