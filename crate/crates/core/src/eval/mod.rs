//! Accuracy metrics over detected 2D poses and lifted 3D poses.
//!
//! 2D poses are flat `[x0, y0, x1, y1, ...]` vectors in part order; 3D
//! poses are flat `[x, y, z]` triples in millimetres.

mod plot;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skeleton::{self, NECK, NUM_PARTS, PELVIS, POSE2D_LEN, POSE3D_LEN};

pub use plot::{render_line_chart, LineChart, Series};

pub const DEFAULT_ALPHA_PCK: f64 = 0.2;
pub const DEFAULT_MIN_SEP: f64 = 8.0;

/// Elbows, wrists, knees and ankles: the parts prone to left/right mix-ups.
pub const LIMB_PARTS: [usize; 8] = [
    skeleton::L_ELBOW,
    skeleton::R_ELBOW,
    skeleton::L_WRIST,
    skeleton::R_WRIST,
    skeleton::L_KNEE,
    skeleton::R_KNEE,
    skeleton::L_ANKLE,
    skeleton::R_ANKLE,
];

fn check_frames<T: AsRef<[f64]>>(a: &[T], b: &[T], len: usize, what: &str) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::shape(format!("{what}: {} predicted frames but {} ground-truth frames", a.len(), b.len())));
    }
    if let Some(bad) = a.iter().chain(b).find(|p| p.as_ref().len() != len) {
        return Err(Error::shape(format!("{what}: pose of length {}, expected {len}", bad.as_ref().len())));
    }
    Ok(())
}

fn point(p: &[f64], j: usize) -> (f64, f64) {
    (p[2 * j], p[2 * j + 1])
}

fn dist2d(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Ground-truth neck-to-pelvis length.
pub fn torso_length(gt: &[f64]) -> f64 {
    dist2d(point(gt, NECK), point(gt, PELVIS))
}

/// Whether each joint lies within `alpha · torso` of the truth.
pub fn pck_hits(det: &[f64], gt: &[f64], alpha: f64) -> Vec<bool> {
    let r = alpha * torso_length(gt);
    (0..NUM_PARTS).map(|j| dist2d(point(det, j), point(gt, j)) <= r).collect()
}

/// Per-joint fraction of frames with a correct localization.
pub fn pck<T: AsRef<[f64]>>(det: &[T], gt: &[T], alpha: f64) -> Result<Vec<f64>> {
    check_frames(det, gt, POSE2D_LEN, "pck")?;
    if det.is_empty() {
        return Err(Error::Data("pck over zero frames".into()));
    }
    let mut hits = vec![0usize; NUM_PARTS];
    for (d, g) in det.iter().zip(gt) {
        for (j, ok) in pck_hits(d.as_ref(), g.as_ref(), alpha).into_iter().enumerate() {
            hits[j] += ok as usize;
        }
    }
    Ok(hits.into_iter().map(|h| h as f64 / det.len() as f64).collect())
}

pub fn mean_over(per_joint: &[f64], joints: &[usize]) -> f64 {
    joints.iter().map(|&j| per_joint[j]).sum::<f64>() / joints.len() as f64
}

pub fn frame_joint_error(pred: &[f64], gt: &[f64]) -> f64 {
    let n = pred.len() / 3;
    (0..n)
        .map(|j| {
            let d: f64 = (0..3).map(|a| (pred[3 * j + a] - gt[3 * j + a]).powi(2)).sum();
            d.sqrt()
        })
        .sum::<f64>()
        / n as f64
}

/// Mean per-joint position error over all frames and joints.
pub fn mpjpe<T: AsRef<[f64]>>(pred: &[T], gt: &[T]) -> Result<f64> {
    check_frames(pred, gt, POSE3D_LEN, "mpjpe")?;
    if pred.is_empty() {
        return Err(Error::Data("mpjpe over zero frames".into()));
    }
    Ok(pred.iter().zip(gt).map(|(p, g)| frame_joint_error(p.as_ref(), g.as_ref())).sum::<f64>() / pred.len() as f64)
}

/// `(eligible, collided)` for one frame: a pair is eligible when the true
/// joints are at least `2·min_sep` apart and collides when the detected
/// ones are closer than `min_sep`.
pub fn frame_double_counts(det: &[f64], gt: &[f64], pairs: &[(usize, usize)], min_sep: f64) -> (usize, usize) {
    let mut eligible = 0;
    let mut hits = 0;
    for &(a, b) in pairs {
        if dist2d(point(gt, a), point(gt, b)) >= 2.0 * min_sep {
            eligible += 1;
            if dist2d(point(det, a), point(det, b)) < min_sep {
                hits += 1;
            }
        }
    }
    (eligible, hits)
}

/// Fraction of eligible (frame, sibling pair) events whose detections
/// collapsed onto each other. Zero when nothing is eligible.
pub fn double_count_rate<T: AsRef<[f64]>>(det: &[T], gt: &[T], pairs: &[(usize, usize)], min_sep: f64) -> Result<f64> {
    check_frames(det, gt, POSE2D_LEN, "double_count_rate")?;
    let (e, h) = det.iter().zip(gt).fold((0, 0), |(e, h), (d, g)| {
        let (fe, fh) = frame_double_counts(d.as_ref(), g.as_ref(), pairs, min_sep);
        (e + fe, h + fh)
    });
    Ok(if e == 0 { 0.0 } else { h as f64 / e as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub frame: usize,
    pub predicted: f64,
    pub truth: f64,
    pub residual: f64,
}

/// One coordinate of one 3D joint across a sequence, paired with the truth.
pub fn joint_trace<T: AsRef<[f64]>>(pred: &[T], gt: &[T], joint: usize, axis: usize) -> Result<Vec<TracePoint>> {
    check_frames(pred, gt, POSE3D_LEN, "joint_trace")?;
    if joint >= skeleton::NUM_JOINTS_3D || axis >= 3 {
        return Err(Error::shape(format!("no coordinate {axis} of joint {joint}")));
    }
    let k = 3 * joint + axis;
    Ok(pred
        .iter()
        .zip(gt)
        .enumerate()
        .map(|(frame, (p, g))| {
            let (p, g) = (p.as_ref()[k], g.as_ref()[k]);
            TracePoint {
                frame,
                predicted: p,
                truth: g,
                residual: p - g,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame_index: usize,
    pub pck_hits: usize,
    pub pair_events: usize,
    pub double_counts: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint_error_mm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_frames: usize,
    pub alpha_pck: f64,
    pub min_sep_px: f64,
    pub joint_names: Vec<String>,
    pub pck: Vec<f64>,
    pub mean_pck: f64,
    pub limb_pck: f64,
    pub double_count_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mpjpe_mm: Option<f64>,
    pub frames: Vec<FrameRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub alpha_pck: f64,
    pub min_sep: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            alpha_pck: DEFAULT_ALPHA_PCK,
            min_sep: DEFAULT_MIN_SEP,
        }
    }
}

impl EvalReport {
    /// `frame_indices`, `det2d` and `gt2d` align; 3D poses are optional but
    /// must align too when given.
    pub fn build<T: AsRef<[f64]>>(
        frame_indices: &[usize],
        det2d: &[T],
        gt2d: &[T],
        poses3d: Option<(&[T], &[T])>,
        opts: &EvalOptions,
    ) -> Result<Self> {
        if frame_indices.len() != det2d.len() {
            return Err(Error::shape(format!("{} frame indices for {} detections", frame_indices.len(), det2d.len())));
        }
        let per_joint = pck(det2d, gt2d, opts.alpha_pck)?;
        let pairs = skeleton::SIBLING_PAIRS;
        let rate = double_count_rate(det2d, gt2d, &pairs, opts.min_sep)?;
        let mpjpe_mm = match poses3d {
            Some((p, g)) => {
                if p.len() != det2d.len() {
                    return Err(Error::shape(format!("{} 3D predictions for {} detections", p.len(), det2d.len())));
                }
                Some(mpjpe(p, g)?)
            }
            None => None,
        };
        let frames = (0..det2d.len())
            .map(|i| {
                let (d, g) = (det2d[i].as_ref(), gt2d[i].as_ref());
                let (pair_events, double_counts) = frame_double_counts(d, g, &pairs, opts.min_sep);
                FrameRecord {
                    frame_index: frame_indices[i],
                    pck_hits: pck_hits(d, g, opts.alpha_pck).iter().filter(|&&b| b).count(),
                    pair_events,
                    double_counts,
                    joint_error_mm: poses3d.map(|(p, g)| frame_joint_error(p[i].as_ref(), g[i].as_ref())),
                }
            })
            .collect();
        Ok(Self {
            n_frames: det2d.len(),
            alpha_pck: opts.alpha_pck,
            min_sep_px: opts.min_sep,
            joint_names: skeleton::part_names().into_iter().map(String::from).collect(),
            mean_pck: per_joint.iter().sum::<f64>() / per_joint.len() as f64,
            limb_pck: mean_over(&per_joint, &LIMB_PARTS),
            pck: per_joint,
            double_count_rate: rate,
            mpjpe_mm,
            frames,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pose(seed: u64) -> Vec<f64> {
        (0..POSE2D_LEN).map(|i| 40.0 + ((i as u64 * 37 + seed * 11) % 97) as f64).collect()
    }

    fn standing() -> Vec<f64> {
        let mut p = vec![0.0; POSE2D_LEN];
        for j in 0..NUM_PARTS {
            p[2 * j] = 100.0 + if j % 2 == 0 { 20.0 } else { -20.0 } * (j > 1) as i32 as f64;
            p[2 * j + 1] = 30.0 + 12.0 * j as f64;
        }
        p
    }

    #[test]
    fn pck_examples() {
        let g = vec![standing(), standing()];
        assert!(pck(&g, &g, 0.2).unwrap().iter().all(|&v| v == 1.0));
        let origin = vec![vec![0.0; POSE2D_LEN]; 2];
        assert!(pck(&origin, &g, 0.2).unwrap().iter().all(|&v| v == 0.0));
        let half = vec![standing(), vec![0.0; POSE2D_LEN]];
        assert!(pck(&half, &g, 0.2).unwrap().iter().all(|&v| v == 0.5));
        assert!(matches!(pck(&g[..1], &g, 0.2), Err(Error::Shape(_))));
    }

    #[test]
    fn mpjpe_examples() {
        let g: Vec<f64> = (0..POSE3D_LEN).map(|i| i as f64).collect();
        assert_eq!(mpjpe(&[g.clone()], &[g.clone()]).unwrap(), 0.0);
        let shifted: Vec<f64> = g.iter().enumerate().map(|(i, v)| if i % 3 == 0 { v + 10.0 } else { *v }).collect();
        assert!((mpjpe(&[shifted], &[g.clone()]).unwrap() - 10.0).abs() < 1e-12);
        let mut one = g.clone();
        one[9] += 3.0;
        one[10] += 4.0;
        assert!((mpjpe(&[one], &[g]).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn double_count_examples() {
        let g = standing();
        let pairs = [(skeleton::L_ELBOW, skeleton::R_ELBOW)];
        // elbows 40 px apart in truth
        let mut coincident = g.clone();
        coincident[2 * skeleton::R_ELBOW] = coincident[2 * skeleton::L_ELBOW];
        coincident[2 * skeleton::R_ELBOW + 1] = coincident[2 * skeleton::L_ELBOW + 1];
        assert_eq!(double_count_rate(&[coincident.clone()], &[g.clone()], &pairs, 8.0).unwrap(), 1.0);
        assert_eq!(double_count_rate(&[g.clone()], &[g.clone()], &pairs, 8.0).unwrap(), 0.0);
        let det = vec![coincident, g.clone(), g.clone(), g.clone()];
        let gt = vec![g.clone(); 4];
        assert_eq!(double_count_rate(&det, &gt, &pairs, 8.0).unwrap(), 0.25);
    }

    #[test]
    fn trace_examples() {
        let g: Vec<Vec<f64>> = (0..21).map(|f| (0..POSE3D_LEN).map(|i| (i + f) as f64).collect()).collect();
        let t = joint_trace(&g, &g, skeleton::J_L_ELBOW, 0).unwrap();
        assert_eq!(t.len(), 21);
        assert!(t.iter().all(|p| p.residual == 0.0));
        let off: Vec<Vec<f64>> = g.iter().map(|p| p.iter().map(|v| v + 5.0).collect()).collect();
        assert!(joint_trace(&off, &g, 3, 2).unwrap().iter().all(|p| p.residual == 5.0));
    }

    #[test]
    fn report_serializes() {
        let g = vec![standing(), pose(2)];
        let r = EvalReport::build(&[0, 1], &g, &g, None, &EvalOptions::default()).unwrap();
        assert_eq!(r.mean_pck, 1.0);
        let back: EvalReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    proptest! {
        #[test]
        fn pck_is_monotone_in_alpha(seed in 0u64..1000, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let det = vec![pose(seed), pose(seed + 1)];
            let gt = vec![pose(seed + 2), standing()];
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let p_lo = pck(&det, &gt, lo).unwrap();
            let p_hi = pck(&det, &gt, hi).unwrap();
            prop_assert!(p_lo.iter().zip(&p_hi).all(|(l, h)| l <= h));
        }

        #[test]
        fn offsets_shift_mpjpe_by_at_most_their_norm(
            seed in 0u64..1000,
            v in prop::array::uniform3(-50.0f64..50.0),
        ) {
            let g: Vec<f64> = (0..POSE3D_LEN).map(|i| ((i as u64 * 31 + seed) % 211) as f64).collect();
            let p: Vec<f64> = g.iter().enumerate().map(|(i, x)| x + ((i * 7) % 5) as f64).collect();
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            let moved = |q: &[f64]| q.iter().enumerate().map(|(i, x)| x + v[i % 3]).collect::<Vec<_>>();
            let before = mpjpe(&[p.clone()], &[g.clone()]).unwrap();
            let after = mpjpe(&[moved(&p)], &[g.clone()]).unwrap();
            prop_assert!(after <= before + norm + 1e-9);
            prop_assert!((mpjpe(&[moved(&g)], &[g.clone()]).unwrap() - norm).abs() < 1e-9);
        }
    }
}
