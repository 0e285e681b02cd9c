//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use partforest::eval::{double_count_rate, mean_over, mpjpe, pck, LIMB_PARTS};
use partforest::experiment::{read_jsonl, run_pipeline, ExperimentConfig, Layout};
use partforest::imaging::synth::{render_background, synth_sequence, SyntheticScene, Sampling};
use partforest::imaging::{BackgroundModel, BlobMask, ImageGrid};
use partforest::infer::{backtrack, distance_transform, distance_transform_1d, pass_messages, Placement, ResponseStack};
use partforest::lift3d::{gp_predict, lift, log_marginal_likelihood, train_lifter, GpLifter, GpModel, SeHyperparams};
use partforest::model::{Deformation, PairwiseParams, PartSpec, PartTreeModel, PartType};
use partforest::pipeline::{blob_masks, detect_frame, train_model, FrameDetections};
use partforest::skeleton::SIBLING_PAIRS;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------------------------------------------------------------- 1

fn random_tree(rng: &mut ChaCha8Rng) -> (PartTreeModel, ResponseStack) {
    let k = rng.random_range(1..=4);
    let (w, h) = (rng.random_range(1..=5), rng.random_range(1..=5));
    let mut parts = Vec::with_capacity(k);
    for i in 0..k {
        parts.push(PartSpec {
            name: format!("p{i}"),
            parent: if i == 0 { None } else { Some(rng.random_range(0..i)) },
            n_types: rng.random_range(1..=3),
            template_w: 1,
            template_h: 1,
        });
    }
    let types: Vec<Vec<PartType>> = parts
        .iter()
        .map(|p| {
            (0..p.n_types)
                .map(|_| PartType {
                    filter: vec![0.0],
                    bias: 0.0,
                    anchor: [rng.random_range(-2..=2) as f64, rng.random_range(-2..=2) as f64],
                })
                .collect()
        })
        .collect();
    let pairwise = parts
        .iter()
        .map(|p| {
            p.parent.map(|parent| {
                let n = p.n_types * parts[parent].n_types;
                PairwiseParams {
                    n_child: p.n_types,
                    n_parent: parts[parent].n_types,
                    co_occurrence: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
                    deform: (0..n)
                        .map(|_| Deformation {
                            w_dx: rng.random_range(-1.0..1.0),
                            w_dx2: rng.random_range(-2.0..-0.05),
                            w_dy: rng.random_range(-1.0..1.0),
                            w_dy2: rng.random_range(-2.0..-0.05),
                        })
                        .collect(),
                }
            })
        })
        .collect();
    let maps = parts
        .iter()
        .map(|p| {
            (0..p.n_types)
                .map(|_| ImageGrid::from_fn(w, h, |_, _| rng.random_range(-2.0..2.0)))
                .collect()
        })
        .collect();
    let m = PartTreeModel {
        parts,
        types,
        pairwise,
        cell_size: 1,
        n_orientations: 1,
    };
    (m, ResponseStack { width: w, height: h, maps })
}

/// Eq. 2 evaluated directly from the parameters.
fn tree_score(m: &PartTreeModel, rs: &ResponseStack, cfg: &[Placement]) -> f64 {
    let mut s = 0.0;
    for (i, c) in cfg.iter().enumerate() {
        s += rs.maps[i][c.type_index].get(c.cell.0, c.cell.1);
        if let Some(p) = m.parts[i].parent {
            let pw = m.pairwise[i].as_ref().unwrap();
            let k = c.type_index * pw.n_parent + cfg[p].type_index;
            let a = m.types[i][c.type_index].anchor;
            let dx = c.cell.0 as f64 - cfg[p].cell.0 as f64 - a[0];
            let dy = c.cell.1 as f64 - cfg[p].cell.1 as f64 - a[1];
            let d = &pw.deform[k];
            s += pw.co_occurrence[k] + d.w_dx * dx + d.w_dx2 * dx * dx + d.w_dy * dy + d.w_dy2 * dy * dy;
        }
    }
    s
}

fn exhaustive(m: &PartTreeModel, rs: &ResponseStack) -> (f64, Vec<Placement>) {
    let states: Vec<Vec<Placement>> = m
        .parts
        .iter()
        .map(|p| {
            let mut v = Vec::new();
            for y in 0..rs.height {
                for x in 0..rs.width {
                    for t in 0..p.n_types {
                        v.push(Placement { cell: (x, y), type_index: t });
                    }
                }
            }
            v
        })
        .collect();
    let mut idx = vec![0usize; states.len()];
    let mut best = (f64::NEG_INFINITY, Vec::new());
    loop {
        let cfg: Vec<Placement> = idx.iter().enumerate().map(|(i, &j)| states[i][j]).collect();
        let s = tree_score(m, rs, &cfg);
        if s > best.0 {
            best = (s, cfg);
        }
        let mut i = 0;
        loop {
            if i == idx.len() {
                return best;
            }
            idx[i] += 1;
            if idx[i] < states[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst, mut config_mismatch) = (0.0f64, 0);
    for _ in 0..200 {
        let (m, rs) = random_tree(&mut rng);
        let (root_map, tables) = pass_messages(&rs, &m, None, false, 0.0).unwrap();
        let (q, _) = root_map.argmax();
        let det = backtrack((q % rs.width, q / rs.width), &tables, &m);
        let (best, cfg) = exhaustive(&m, &rs);
        worst = worst.max((det.root_score - best).abs()).max((tree_score(&m, &rs, &det.placements) - best).abs());
        if det.placements != cfg {
            config_mismatch += 1;
        }
    }
    let el = t0.elapsed();
    outcome(
        worst <= 1e-9 && config_mismatch == 0 && el < Duration::from_secs(30),
        format!("200 trees, max |score diff| {worst:.2e}, configuration mismatches {config_mismatch}, {:.1}s", el.as_secs_f64()),
    )
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut arg_mismatch) = (0.0f64, 0);
    for case in 0..500 {
        // half the cases, in both dimensionalities, use integer data so ties
        // occur and are exact
        let integer = (case / 2) % 2 == 0;
        let two_d = case % 2 == 1;
        let (w, h) = if two_d {
            (rng.random_range(1..=32), rng.random_range(1..=32))
        } else {
            (rng.random_range(1..=32), 1)
        };
        let mut val = |lo: f64, hi: f64| {
            if integer {
                rng.random_range(lo as i64..=hi as i64) as f64
            } else {
                rng.random_range(lo..hi)
            }
        };
        let src: Vec<f64> = (0..w * h).map(|_| val(-5.0, 5.0)).collect();
        let d = Deformation {
            w_dx: val(-2.0, 2.0),
            w_dx2: -val(1.0, 3.0).max(if integer { 1.0 } else { 0.01 }),
            w_dy: val(-2.0, 2.0),
            w_dy2: -val(1.0, 3.0).max(if integer { 1.0 } else { 0.01 }),
        };
        let anchor = [val(-3.0, 3.0), val(-3.0, 3.0)];
        let (got, arg): (Vec<f64>, Vec<usize>) = if two_d {
            let r = distance_transform(&ImageGrid::new(w, h, src.clone()).unwrap(), &d, anchor).unwrap();
            (r.values.data().to_vec(), r.argmax)
        } else {
            distance_transform_1d(&src, d.w_dx, d.w_dx2, anchor[0]).unwrap()
        };
        for qy in 0..h {
            for qx in 0..w {
                let mut best = (f64::NEG_INFINITY, 0);
                for py in 0..h {
                    for px in 0..w {
                        let dx = px as f64 - qx as f64 - anchor[0];
                        let mut v = src[py * w + px] + (d.w_dx * dx + d.w_dx2 * dx * dx);
                        if two_d {
                            let dy = py as f64 - qy as f64 - anchor[1];
                            v += d.w_dy * dy + d.w_dy2 * dy * dy;
                        }
                        if v > best.0 {
                            best = (v, py * w + px);
                        }
                    }
                }
                let q = qy * w + qx;
                worst = worst.max((got[q] - best.0).abs());
                if arg[q] != best.1 {
                    arg_mismatch += 1;
                }
            }
        }
    }
    outcome(
        worst <= 1e-9 && arg_mismatch == 0,
        format!("500 maps (1-D and 2-D, up to 32x32), max |diff| {worst:.2e}, argmax mismatches {arg_mismatch}"),
    )
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, d) = (8, 3);
    let mut grad_err = 0.0f64;
    for _ in 0..20 {
        let x: Vec<f64> = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
        let logs = [rng.random_range(-1.0..1.0), rng.random_range(-0.5..1.0), rng.random_range(-4.0..-1.0)];
        let (_, g) = log_marginal_likelihood(&x, n, d, &y, &SeHyperparams::from_logs(logs)).unwrap();
        for k in 0..3 {
            let eps = 1e-5;
            let at = |s: f64| {
                let mut l = logs;
                l[k] += s;
                log_marginal_likelihood(&x, n, d, &y, &SeHyperparams::from_logs(l)).unwrap().0
            };
            grad_err = grad_err.max(((at(eps) - at(-eps)) / (2.0 * eps) - g[k]).abs());
        }
    }

    let mut interp_err = 0.0f64;
    for _ in 0..10 {
        let m = 12;
        let x: Vec<f64> = (0..m * 2).map(|i| (i / 2) as f64 * 0.9 + if i % 2 == 0 { rng.random_range(0.0..0.3) } else { rng.random_range(-3.0..3.0) }).collect();
        let y: Vec<f64> = (0..m).map(|_| rng.random_range(-20.0..20.0)).collect();
        let h = SeHyperparams::new(50.0, 0.7, 1e-12).unwrap();
        let gp = GpModel::condition(&x, m, 2, &y, h, Arc::new(vec![0.0, 0.0]), 0.0).unwrap();
        for i in 0..m {
            interp_err = interp_err.max((gp_predict(&gp, &x[2 * i..2 * i + 2]).0 - y[i]).abs());
        }
    }

    let mut cond_err = 0.0f64;
    for _ in 0..10 {
        let m = 7;
        let x: Vec<f64> = (0..m * 2).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = SeHyperparams::new(0.8, 1.2, 0.03).unwrap();
        let mean = Arc::new(vec![0.1, -0.2]);
        let full = GpModel::condition(&x, m, 2, &y, h, Arc::clone(&mean), 0.0).unwrap();
        let part = GpModel::condition(&x[..2 * (m - 1)], m - 1, 2, &y[..m - 1], h, mean, 0.0).unwrap();
        let xn = &x[2 * (m - 1)..];
        let xs = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let (mn, _) = gp_predict(&part, xn);
        let c_sn = part.posterior_covariance(&xs, xn);
        let c_nn = part.posterior_covariance(xn, xn) + h.noise_variance();
        let (ms, vs) = gp_predict(&part, &xs);
        let (mf, vf) = gp_predict(&full, &xs);
        cond_err = cond_err
            .max((mf - (ms + c_sn * (y[m - 1] - mn) / c_nn)).abs())
            .max((vf - (vs - c_sn * c_sn / c_nn)).abs());
    }
    outcome(
        grad_err < 1e-5 && interp_err < 1e-6 && cond_err < 1e-8,
        format!("gradient vs FD {grad_err:.2e} (20 problems, n=8), interpolation {interp_err:.2e}, conditioning {cond_err:.2e}"),
    )
}

// ---------------------------------------------------------------- shared experiment

struct StressSet {
    cfg: ExperimentConfig,
    model: PartTreeModel,
    lifter: GpLifter,
    scenes: Vec<SyntheticScene>,
    masks: Vec<BlobMask>,
    detections: Vec<FrameDetections>,
    elapsed: Duration,
}

fn stress_set() -> StressSet {
    let t0 = Instant::now();
    let cfg = ExperimentConfig::default();
    let actor = cfg.actor_style().unwrap();
    let (canvas, style) = (cfg.canvas(), cfg.render_style());
    let train = synth_sequence(cfg.n_train, cfg.action, &actor, canvas, &style, Sampling::Train, cfg.seed).unwrap();
    let frames: Vec<ImageGrid> = train.iter().map(|s| s.frame.clone()).collect();
    let poses2d: Vec<Vec<f64>> = train.iter().map(|s| s.pose2d.clone()).collect();
    let poses3d: Vec<Vec<f64>> = train.iter().map(|s| s.pose3d.clone()).collect();
    let model = train_model(&frames, &poses2d, &cfg.train_options(), cfg.seed).unwrap();
    let lifter = train_lifter(&poses2d, &poses3d, &cfg.gp_options()).unwrap();
    let scenes = synth_sequence(50, cfg.action, &actor, canvas, &style, Sampling::Test, cfg.seed).unwrap();
    let plates: Vec<ImageGrid> = (0..cfg.bg_plates as u64)
        .map(|k| render_background(canvas, &style, cfg.seed * 1000 + 1000 + k).unwrap())
        .collect();
    let bg = BackgroundModel::from_plates(&plates, cfg.bg_learning_rate, cfg.bg_threshold).unwrap();
    let test_frames: Vec<ImageGrid> = scenes.iter().map(|s| s.frame.clone()).collect();
    let masks = blob_masks(&bg, &test_frames, cfg.min_blob_area).unwrap();
    let opts = cfg.detect_options();
    let detections = scenes
        .iter()
        .zip(&masks)
        .map(|(s, mk)| detect_frame(&model, &s.frame, mk, &opts).unwrap())
        .collect();
    StressSet {
        elapsed: t0.elapsed(),
        cfg,
        model,
        lifter,
        scenes,
        masks,
        detections,
    }
}

fn criterion_4(s: &StressSet) -> Outcome {
    let gt: Vec<Vec<f64>> = s.scenes.iter().map(|x| x.pose2d.clone()).collect();
    let base: Vec<Vec<f64>> = s.detections.iter().map(|d| d.baseline.pose2d(&s.model)).collect();
    let enh: Vec<Vec<f64>> = s.detections.iter().map(|d| d.enhanced.pose2d(&s.model)).collect();
    let a = s.cfg.alpha_pck;
    let pb = mean_over(&pck(&base, &gt, a).unwrap(), &LIMB_PARTS);
    let pe = mean_over(&pck(&enh, &gt, a).unwrap(), &LIMB_PARTS);
    let db = double_count_rate(&base, &gt, &SIBLING_PAIRS, s.cfg.min_sep_px).unwrap();
    let de = double_count_rate(&enh, &gt, &SIBLING_PAIRS, s.cfg.min_sep_px).unwrap();
    outcome(
        de < db && pe - pb >= 0.05 && s.elapsed < Duration::from_secs(300),
        format!(
            "actor {}, 50 frames: double-count rate {db:.3} -> {de:.3}, limb PCK {pb:.3} -> {pe:.3} (gain {:+.3}), {:.0}s",
            s.cfg.actor,
            pe - pb,
            s.elapsed.as_secs_f64()
        ),
    )
}

fn criterion_5(s: &StressSet) -> Outcome {
    let violations = s
        .detections
        .iter()
        .filter(|d| !(d.enhanced.s_mc.unwrap() >= d.baseline.s_mc.unwrap()))
        .count();
    let gain: f64 = s.detections.iter().map(|d| d.enhanced.s_mc.unwrap() - d.baseline.s_mc.unwrap()).sum::<f64>()
        / s.detections.len() as f64;
    outcome(
        violations == 0,
        format!("{} frames, violations {violations}, mean s_mc gain {gain:.3}", s.detections.len()),
    )
}

fn criterion_6(s: &StressSet) -> Outcome {
    let opts = s.cfg.detect_options();
    let mut map_diff = 0.0f64;
    let mut outside = 0;
    for sc in &s.scenes {
        let ones = BlobMask::filled(sc.frame.width(), sc.frame.height(), true);
        let d = detect_frame(&s.model, &sc.frame, &ones, &opts).unwrap();
        for (a, b) in d.root_map.data().iter().zip(d.gated_root_map.data()) {
            map_diff = map_diff.max((a - b).abs());
        }
        let t = detect_frame(&s.model, &sc.frame, &sc.true_mask, &opts).unwrap();
        let (x, y) = t.enhanced.pixels(&s.model)[0];
        let blob = sc.true_mask.dilated(8.0);
        if !blob.get_signed(x.floor() as i64, y.floor() as i64) {
            outside += 1;
        }
    }
    outcome(
        map_diff <= 1e-9 && outside == 0,
        format!(
            "{} frames: all-ones mask max root-map diff {map_diff:.2e}, roots outside dilated true blob {outside}",
            s.scenes.len()
        ),
    )
}

fn criterion_7(s: &StressSet) -> Outcome {
    let cfg = &s.cfg;
    let actor = cfg.actor_style().unwrap();
    let held_out = synth_sequence(cfg.n_test, cfg.action, &actor, cfg.canvas(), &cfg.render_style(), Sampling::Test, cfg.seed).unwrap();
    let lift_all = |poses: &[Vec<f64>]| -> Vec<Vec<f64>> { poses.iter().map(|p| lift(&s.lifter, p).unwrap().0).collect() };
    let gt2d: Vec<Vec<f64>> = held_out.iter().map(|x| x.pose2d.clone()).collect();
    let gt3d: Vec<Vec<f64>> = held_out.iter().map(|x| x.pose3d.clone()).collect();
    let e_gt = mpjpe(&lift_all(&gt2d), &gt3d).unwrap();

    let stress3d: Vec<Vec<f64>> = s.scenes.iter().map(|x| x.pose3d.clone()).collect();
    let base: Vec<Vec<f64>> = s.detections.iter().map(|d| d.baseline.pose2d(&s.model)).collect();
    let enh: Vec<Vec<f64>> = s.detections.iter().map(|d| d.enhanced.pose2d(&s.model)).collect();
    let e_base = mpjpe(&lift_all(&base), &stress3d).unwrap();
    let e_enh = mpjpe(&lift_all(&enh), &stress3d).unwrap();
    outcome(
        e_gt < 15.0 && e_enh <= e_base,
        format!(
            "train {} / test {}: ground-truth 2D MPJPE {e_gt:.4} mm; stress set lifted baseline {e_base:.1} mm, enhanced {e_enh:.1} mm",
            s.lifter.n_train(),
            held_out.len()
        ),
    )
}

// ---------------------------------------------------------------- 8

fn criterion_8() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let run = |dir: &std::path::Path| {
        let cfg = ExperimentConfig {
            out_dir: dir.to_path_buf(),
            ..ExperimentConfig::default()
        };
        run_pipeline(&cfg).unwrap();
        Layout::new(dir)
    };
    let (la, lb) = (run(a.path()), run(b.path()));
    use partforest::pipeline::DetectMode::{Baseline, Enhanced};
    let mut files = Vec::new();
    for m in [Baseline, Enhanced] {
        files.push((la.detections(m), lb.detections(m)));
        files.push((la.predictions(m), lb.predictions(m)));
        files.push((la.report(m), lb.report(m)));
    }
    let differing: Vec<String> = files
        .iter()
        .filter(|(x, y)| std::fs::read(x).unwrap() != std::fs::read(y).unwrap())
        .map(|(x, _)| x.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    let rows = read_jsonl::<serde_json::Value>(&la.detections(Enhanced)).unwrap().len();
    outcome(
        differing.is_empty(),
        format!("{} files compared ({rows} frames each), differing: {differing:?}", files.len()),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut report = |name: &'static str, o: Outcome| {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((name, o));
    };
    report("1 inference oracle equivalence", criterion_1());
    report("2 distance transform correctness", criterion_2());
    report("3 GPR numerics", criterion_3());
    let s = stress_set();
    report("4 double-counting reduction", criterion_4(&s));
    report("5 optimizer dominance", criterion_5(&s));
    report("6 gating soundness", criterion_6(&s));
    report("7 end-to-end lifting", criterion_7(&s));
    drop(s.masks);
    report("8 determinism", criterion_8());
    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
