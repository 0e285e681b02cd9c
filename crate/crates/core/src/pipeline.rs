//! Model training from annotated frames, blob extraction over a sequence,
//! and the two detectors (tree backtracking alone, and blob-gated search
//! followed by the global multi-cue optimizer).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{compute_hog_with, crop_feature, FeatureMap, HogParams};
use crate::imaging::{clean_mask, BackgroundModel, BlobMask, ImageGrid};
use crate::infer::{
    backtrack, detect_double_counts, enumerate_candidates, find_root, optimize_global, par_map, part_responses, pass_messages,
    Detection, McScorer, ResponseStack,
};
use crate::model::{cluster_part_types, fit_pairwise, fit_templates, PairSample, PairwiseFitConfig, PartTreeModel, PartType, TreeLayout};
use crate::skeleton::{pair_label, NECK, POSE2D_LEN};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub hog: HogParams,
    pub layout: TreeLayout,
    /// Ridge penalty for the template discriminants.
    pub lambda: f64,
    /// Random background windows drawn per part.
    pub negatives_per_part: usize,
    pub pairwise: PairwiseFitConfig,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            hog: HogParams::default(),
            layout: TreeLayout::human(4, 4),
            lambda: 1.0,
            negatives_per_part: 800,
            pairwise: PairwiseFitConfig::default(),
        }
    }
}

/// Lattice point of each part, clamped so its template window stays inside
/// the feature map.
fn lattice_points(m: &PartTreeModel, fm: &FeatureMap, pose: &[f64]) -> Vec<(usize, usize)> {
    (0..m.num_parts())
        .map(|i| {
            let p = &m.parts[i];
            let (lx, ly) = m.pixel_to_lattice(i, pose[2 * i], pose[2 * i + 1]);
            let clamp = |v: i64, t: usize, n: usize| v.clamp((t / 2) as i64, (n + t / 2 - t) as i64) as usize;
            (clamp(lx, p.template_w, fm.cells_x), clamp(ly, p.template_h, fm.cells_y))
        })
        .collect()
}

fn window_crop(m: &PartTreeModel, fm: &FeatureMap, part: usize, cell: (usize, usize)) -> Result<Vec<f64>> {
    let p = &m.parts[part];
    let (ox, oy) = m.window_origin(part, cell.0, cell.1);
    crop_feature(fm, (ox as usize, oy as usize), p.template_w, p.template_h)
}

/// Fits templates, type clusters, springs and co-occurrences from frames
/// with ground-truth 2D poses.
///
/// Types come from k-means on each part's offset to its parent (the root
/// uses its offset to the neck). Positives are the ground-truth windows;
/// negatives are random windows at least two cells from the part.
pub fn train_model(frames: &[ImageGrid], poses: &[Vec<f64>], opts: &TrainOptions, seed: u64) -> Result<PartTreeModel> {
    if frames.is_empty() || frames.len() != poses.len() {
        return Err(Error::shape(format!("{} frames with {} poses", frames.len(), poses.len())));
    }
    if poses.iter().any(|p| p.len() != POSE2D_LEN) {
        return Err(Error::shape(format!("training poses must have {POSE2D_LEN} values")));
    }
    opts.layout.validate()?;
    let mut parts = opts.layout.parts.clone();
    let k = parts.len();
    if k != POSE2D_LEN / 2 {
        return Err(Error::config(format!("layout has {k} parts, poses have {}", POSE2D_LEN / 2)));
    }
    let cs = opts.hog.cell_size as f64;
    let maps: Vec<FeatureMap> = par_map(frames, |f| compute_hog_with(f, &opts.hog)).into_iter().collect::<Result<_>>()?;

    // geometry-only model for lattice conversions
    let mut model = PartTreeModel {
        parts: parts.clone(),
        types: Vec::new(),
        pairwise: vec![None; k],
        cell_size: opts.hog.cell_size,
        n_orientations: opts.hog.n_orientations,
    };
    let lattice: Vec<Vec<(usize, usize)>> = maps.iter().zip(poses).map(|(fm, p)| lattice_points(&model, fm, p)).collect();

    let mut labels = Vec::with_capacity(k);
    let mut anchors = Vec::with_capacity(k);
    for i in 0..k {
        let reference = parts[i].parent.unwrap_or(NECK);
        let offsets: Vec<[f64; 2]> = poses
            .iter()
            .map(|p| [(p[2 * i] - p[2 * reference]) / cs, (p[2 * i + 1] - p[2 * reference + 1]) / cs])
            .collect();
        let mut clusters = cluster_part_types(&offsets, parts[i].n_types, seed ^ (i as u64).wrapping_mul(0x9E37_79B9))?;
        // Fewer distinct offsets than types leaves some clusters empty; drop them.
        let mut used: Vec<usize> = clusters.labels.clone();
        used.sort_unstable();
        used.dedup();
        if used.len() < parts[i].n_types {
            log::info!("{}: {} of {} types populated", parts[i].name, used.len(), parts[i].n_types);
            for l in clusters.labels.iter_mut() {
                *l = used.binary_search(l).expect("label in use");
            }
            parts[i].n_types = used.len();
        }
        let spec = &parts[i];
        // anchors on the integer lattice the detector searches
        let mut anchor = vec![[0.0; 2]; spec.n_types];
        if let Some(parent) = spec.parent {
            let mut count = vec![0usize; spec.n_types];
            for (f, &t) in clusters.labels.iter().enumerate() {
                let (c, p) = (lattice[f][i], lattice[f][parent]);
                anchor[t][0] += c.0 as f64 - p.0 as f64;
                anchor[t][1] += c.1 as f64 - p.1 as f64;
                count[t] += 1;
            }
            for t in 0..spec.n_types {
                if count[t] == 0 {
                    return Err(Error::Data(format!("type {t} of {} has no training samples", spec.name)));
                }
                anchor[t] = [anchor[t][0] / count[t] as f64, anchor[t][1] / count[t] as f64];
            }
        }
        labels.push(clusters.labels);
        anchors.push(anchor);
    }

    model.parts = parts.clone();

    let per_part: Vec<usize> = (0..k).collect();
    let fitted = par_map(&per_part, |&i| -> Result<Vec<PartType>> {
        let spec = &parts[i];
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e65_6700 ^ i as u64);
        let mut negatives = Vec::with_capacity(opts.negatives_per_part);
        let mut attempts = 0;
        while negatives.len() < opts.negatives_per_part {
            attempts += 1;
            if attempts > 100 * opts.negatives_per_part.max(1) {
                return Err(Error::Data(format!("could not sample negatives for {}", spec.name)));
            }
            let f = rng.random_range(0..frames.len());
            let fm = &maps[f];
            if fm.cells_x < spec.template_w || fm.cells_y < spec.template_h {
                return Err(Error::shape("frame smaller than a part template"));
            }
            let x = rng.random_range(spec.template_w / 2..=fm.cells_x + spec.template_w / 2 - spec.template_w);
            let y = rng.random_range(spec.template_h / 2..=fm.cells_y + spec.template_h / 2 - spec.template_h);
            let gt = lattice[f][i];
            if gt.0.abs_diff(x) < 2 && gt.1.abs_diff(y) < 2 {
                continue;
            }
            negatives.push(window_crop(&model, fm, i, (x, y))?);
        }
        (0..spec.n_types)
            .map(|t| {
                let positives: Vec<Vec<f64>> = (0..frames.len())
                    .filter(|&f| labels[i][f] == t)
                    .map(|f| window_crop(&model, &maps[f], i, lattice[f][i]))
                    .collect::<Result<_>>()?;
                let (filter, bias) = fit_templates(&positives, &negatives, opts.lambda)?;
                Ok(PartType {
                    filter,
                    bias,
                    anchor: anchors[i][t],
                })
            })
            .collect()
    });
    model.types = fitted.into_iter().collect::<Result<_>>()?;

    for (i, spec) in parts.iter().enumerate() {
        let Some(parent) = spec.parent else { continue };
        let samples: Vec<PairSample> = (0..frames.len())
            .map(|f| {
                let tc = labels[i][f];
                let (c, p) = (lattice[f][i], lattice[f][parent]);
                PairSample {
                    child_type: tc,
                    parent_type: labels[parent][f],
                    residual: [
                        c.0 as f64 - p.0 as f64 - anchors[i][tc][0],
                        c.1 as f64 - p.1 as f64 - anchors[i][tc][1],
                    ],
                }
            })
            .collect();
        model.pairwise[i] = Some(fit_pairwise(&samples, spec.n_types, parts[parent].n_types, &opts.pairwise)?);
    }
    model.validate()?;
    Ok(model)
}

/// Foreground masks for a frame sequence. The background mean is updated
/// after each frame, only where that frame was classified as background.
pub fn blob_masks(bg: &BackgroundModel, frames: &[ImageGrid], min_area: usize) -> Result<Vec<BlobMask>> {
    let mut bg = bg.clone();
    let mut out = Vec::with_capacity(frames.len());
    for frame in frames {
        let raw = bg.subtract(frame)?;
        let next = bg.updated(frame)?;
        let mean = ImageGrid::from_fn(frame.width(), frame.height(), |x, y| {
            if raw.get(x, y) {
                bg.mean().get(x, y)
            } else {
                next.mean().get(x, y)
            }
        });
        bg = BackgroundModel::new(mean, bg.learning_rate(), bg.threshold())?;
        out.push(clean_mask(&raw, min_area));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectMode {
    Baseline,
    Enhanced,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectOptions {
    /// Fraction of the smaller sibling box that must be shared to flag a pair.
    pub thresh1: f64,
    /// Minimum box/blob overlap for gating and candidates.
    pub thresh2: f64,
    pub top_n: usize,
    pub hog_clip: Option<f64>,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            thresh1: 0.5,
            thresh2: 0.2,
            top_n: 5,
            hog_clip: HogParams::default().clip,
        }
    }
}

/// Intermediate products for one frame, kept for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDetections {
    pub responses: ResponseStack,
    pub root_map: ImageGrid,
    pub gated_root_map: ImageGrid,
    pub baseline: Detection,
    pub enhanced: Detection,
}

fn flag_labels(m: &PartTreeModel, pairs: &[(usize, usize)]) -> Vec<String> {
    let names = m.part_names();
    pairs.iter().map(|&p| pair_label(&names, p)).collect()
}

fn best_root(map: &ImageGrid, m: &PartTreeModel) -> Result<(usize, usize)> {
    let radius = m.parts.iter().map(|p| p.template_w.max(p.template_h)).max().unwrap_or(1);
    find_root(map, radius, f64::NEG_INFINITY)
        .first()
        .map(|&(c, _)| c)
        .ok_or_else(|| Error::Numerical("root score map has no finite cell".into()))
}

/// Runs both detectors on one frame.
///
/// Baseline: ungated message passing and backtracking. Enhanced: gated
/// message passing and backtracking; whichever of the two configurations
/// has the higher multi-cue score seeds the global optimizer, which then
/// resolves flagged sibling pairs. Both carry their multi-cue score and the
/// sibling pairs still flagged.
pub fn detect_frame(m: &PartTreeModel, frame: &ImageGrid, mask: &BlobMask, opts: &DetectOptions) -> Result<FrameDetections> {
    if frame.dims() != mask.dims() {
        return Err(Error::shape("frame and mask sizes differ"));
    }
    let hog = HogParams {
        cell_size: m.cell_size,
        n_orientations: m.n_orientations,
        clip: opts.hog_clip,
    };
    let fm = compute_hog_with(frame, &hog)?;
    let rs = part_responses(&fm, m)?;
    let scorer = McScorer::new(m, &rs, mask);

    let (root_map, tables) = pass_messages(&rs, m, None, false, opts.thresh2)?;
    let mut baseline = backtrack(best_root(&root_map, m)?, &tables, m);
    baseline.s_mc = Some(scorer.score(&baseline.placements));
    baseline.flags = flag_labels(m, &detect_double_counts(m, &baseline.placements, opts.thresh1));

    let (gated_root_map, gated_tables) = pass_messages(&rs, m, Some(mask), true, opts.thresh2)?;
    let mut gated = backtrack(best_root(&gated_root_map, m)?, &gated_tables, m);
    gated.s_mc = Some(scorer.score(&gated.placements));
    let start = if gated.s_mc >= baseline.s_mc { gated } else { baseline.clone() };

    let flagged = detect_double_counts(m, &start.placements, opts.thresh1);
    let (candidates, empty) = enumerate_candidates(&rs, m, mask, &start.placements, opts.thresh2, opts.top_n);
    let outcome = optimize_global(&scorer, &candidates, &start, &flagged);
    let mut enhanced = outcome.detection;
    enhanced.flags = flag_labels(m, &detect_double_counts(m, &enhanced.placements, opts.thresh1));
    if outcome.fallback {
        enhanced.flags.push("fallback".into());
    }
    enhanced.flags.extend(empty.into_iter().map(|p| format!("no_candidates:{p}")));
    Ok(FrameDetections {
        responses: rs,
        root_map,
        gated_root_map,
        baseline,
        enhanced,
    })
}

pub fn detect(m: &PartTreeModel, frame: &ImageGrid, mask: &BlobMask, mode: DetectMode, opts: &DetectOptions) -> Result<Detection> {
    let d = detect_frame(m, frame, mask, opts)?;
    Ok(match mode {
        DetectMode::Baseline => d.baseline,
        DetectMode::Enhanced => d.enhanced,
    })
}
