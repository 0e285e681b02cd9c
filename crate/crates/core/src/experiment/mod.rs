//! File-based experiment pipeline: synthesize a dataset, train the part
//! model and the lifter, detect, lift, evaluate and render overlays.
//!
//! Every command reads and writes plain files under one output directory
//! (see [`Layout`]) and is deterministic for a fixed config.

mod config;

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

pub use config::{ConfigValue, ExperimentConfig};

use crate::error::{Error, Result};
use crate::eval::{joint_trace, render_line_chart, EvalReport, LineChart, Series};
use crate::imaging::pgm::{read_grid, write_grid, write_mask};
use crate::imaging::synth::{render_background, synth_sequence, Action, Sampling, SyntheticScene};
use crate::imaging::{BackgroundModel, BlobMask, ImageGrid};
use crate::infer::{par_map, DetectionRecord};
use crate::lift3d::{lift, load_lifter, save_lifter, train_lifter, GpLifter};
use crate::model::{load_model, save_model, PartTreeModel};
use crate::pipeline::{blob_masks, detect_frame, train_model, DetectMode};
use crate::raster::{Rgb, RgbImage, BLACK, WHITE};
use crate::skeleton::{self, POSE2D_LEN, POSE3D_LEN};

/// Paths of every artifact under an output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn dataset(&self) -> PathBuf {
        self.root.join("dataset")
    }

    pub fn model(&self) -> PathBuf {
        self.root.join("model.pfm")
    }

    pub fn lifter(&self) -> PathBuf {
        self.root.join("lifter.gpl")
    }

    pub fn detections(&self, mode: DetectMode) -> PathBuf {
        self.root.join(format!("detections_{}.jsonl", mode_name(mode)))
    }

    pub fn predictions(&self, mode: DetectMode) -> PathBuf {
        self.root.join(format!("predictions_{}.jsonl", mode_name(mode)))
    }

    pub fn report(&self, mode: DetectMode) -> PathBuf {
        self.root.join(format!("report_{}.json", mode_name(mode)))
    }

    pub fn plots(&self) -> PathBuf {
        self.root.join("plots")
    }

    pub fn overlays(&self) -> PathBuf {
        self.root.join("overlays")
    }
}

pub fn mode_name(mode: DetectMode) -> &'static str {
    match mode {
        DetectMode::Baseline => "baseline",
        DetectMode::Enhanced => "enhanced",
    }
}

/// One line of `train.jsonl` / `test.jsonl`. Paths are relative to the
/// dataset directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub frame_path: String,
    pub mask_path: String,
    pub pose2d: Vec<f64>,
    pub pose3d: Vec<f64>,
    pub action: Action,
    pub seed: u64,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub action: Action,
    pub actor: String,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub backgrounds: Vec<String>,
}

/// One line of a predictions file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub frame_index: usize,
    pub pose3d: Vec<f64>,
    pub variance: Vec<f64>,
}

/// A dataset directory with its manifest and scene lists loaded.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub dir: PathBuf,
    pub manifest: DatasetManifest,
    pub train: Vec<SceneRecord>,
    pub test: Vec<SceneRecord>,
}

impl Dataset {
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: DatasetManifest = read_json(&dir.join("dataset.json"))?;
        let train: Vec<SceneRecord> = read_jsonl(&dir.join("train.jsonl"))?;
        let test: Vec<SceneRecord> = read_jsonl(&dir.join("test.jsonl"))?;
        if train.len() != manifest.n_train || test.len() != manifest.n_test {
            return Err(Error::Data(format!(
                "manifest lists {}/{} train/test scenes, files hold {}/{}",
                manifest.n_train,
                manifest.n_test,
                train.len(),
                test.len()
            )));
        }
        for s in train.iter().chain(&test) {
            if s.pose2d.len() != POSE2D_LEN || s.pose3d.len() != POSE3D_LEN {
                return Err(Error::Data(format!("scene {} ({}) has malformed poses", s.index, s.frame_path)));
            }
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            train,
            test,
        })
    }

    pub fn frames(&self, scenes: &[SceneRecord]) -> Result<Vec<ImageGrid>> {
        scenes.iter().map(|s| read_grid(&self.dir.join(&s.frame_path))).collect()
    }

    pub fn background(&self, cfg: &ExperimentConfig) -> Result<BackgroundModel> {
        let plates = self
            .manifest
            .backgrounds
            .iter()
            .map(|p| read_grid(&self.dir.join(p)))
            .collect::<Result<Vec<_>>>()?;
        BackgroundModel::from_plates(&plates, cfg.bg_learning_rate, cfg.bg_threshold)
    }

    /// Background-subtraction masks of the test frames, in order.
    pub fn test_masks(&self, cfg: &ExperimentConfig, frames: &[ImageGrid]) -> Result<Vec<BlobMask>> {
        blob_masks(&self.background(cfg)?, frames, cfg.min_blob_area)
    }
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => create_dir(p),
        _ => Ok(()),
    }
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    create_parent(path)?;
    let mut buf = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut buf, r)?;
        buf.push(b'\n');
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (no, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str(&line)
            .map_err(|e| Error::Data(format!("{}: line {}: {e}", path.display(), no + 1)))?;
        out.push(row);
    }
    Ok(out)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    create_parent(path)?;
    let mut buf = serde_json::to_vec_pretty(value)?;
    buf.push(b'\n');
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthSummary {
    pub n_train: usize,
    pub n_test: usize,
    pub n_backgrounds: usize,
}

fn write_split(dir: &Path, split: &str, scenes: &[SyntheticScene]) -> Result<Vec<SceneRecord>> {
    create_dir(&dir.join(split))?;
    scenes
        .iter()
        .map(|s| {
            let frame_path = format!("{split}/frame_{:05}.pgm", s.index);
            let mask_path = format!("{split}/mask_{:05}.pgm", s.index);
            write_grid(&dir.join(&frame_path), &s.frame)?;
            write_mask(&dir.join(&mask_path), &s.true_mask)?;
            Ok(SceneRecord {
                frame_path,
                mask_path,
                pose2d: s.pose2d.clone(),
                pose3d: s.pose3d.clone(),
                action: s.action,
                seed: s.rng_seed,
                index: s.index,
            })
        })
        .collect()
}

/// Renders training and test sequences plus empty background plates into
/// `dataset_dir`.
pub fn cmd_synth(cfg: &ExperimentConfig, dataset_dir: &Path) -> Result<SynthSummary> {
    cfg.validate()?;
    let actor = cfg.actor_style()?;
    let (canvas, style) = (cfg.canvas(), cfg.render_style());
    let train = synth_sequence(cfg.n_train, cfg.action, &actor, canvas, &style, Sampling::Train, cfg.seed)?;
    let test = synth_sequence(cfg.n_test, cfg.action, &actor, canvas, &style, Sampling::Test, cfg.seed)?;
    create_dir(dataset_dir)?;
    let train_rows = write_split(dataset_dir, "train", &train)?;
    let test_rows = write_split(dataset_dir, "test", &test)?;
    let mut backgrounds = Vec::with_capacity(cfg.bg_plates);
    for k in 0..cfg.bg_plates {
        let name = format!("background_{k:02}.pgm");
        let plate = render_background(canvas, &style, cfg.seed.wrapping_mul(1000).wrapping_add(1000 + k as u64))?;
        write_grid(&dataset_dir.join(&name), &plate)?;
        backgrounds.push(name);
    }
    write_jsonl(&dataset_dir.join("train.jsonl"), &train_rows)?;
    write_jsonl(&dataset_dir.join("test.jsonl"), &test_rows)?;
    write_json(
        &dataset_dir.join("dataset.json"),
        &DatasetManifest {
            action: cfg.action,
            actor: cfg.actor.clone(),
            seed: cfg.seed,
            n_train: cfg.n_train,
            n_test: cfg.n_test,
            backgrounds,
        },
    )?;
    log::info!("synthesized {} train and {} test frames in {}", cfg.n_train, cfg.n_test, dataset_dir.display());
    Ok(SynthSummary {
        n_train: cfg.n_train,
        n_test: cfg.n_test,
        n_backgrounds: cfg.bg_plates,
    })
}

/// Trains the part model on the training frames and the lifter on the
/// training (2D, 3D) ground-truth pairs.
pub fn cmd_train(cfg: &ExperimentConfig, dataset: &Path, model_out: &Path, lifter_out: &Path) -> Result<(PartTreeModel, GpLifter)> {
    cfg.validate()?;
    let ds = Dataset::load(dataset)?;
    let frames = ds.frames(&ds.train)?;
    let poses2d: Vec<Vec<f64>> = ds.train.iter().map(|s| s.pose2d.clone()).collect();
    let poses3d: Vec<Vec<f64>> = ds.train.iter().map(|s| s.pose3d.clone()).collect();
    let model = train_model(&frames, &poses2d, &cfg.train_options(), cfg.seed)?;
    log::info!("trained part model on {} frames", frames.len());
    let lifter = train_lifter(&poses2d, &poses3d, &cfg.gp_options())?;
    log::info!("trained lifter on {} poses", poses2d.len());
    create_parent(model_out)?;
    create_parent(lifter_out)?;
    save_model(&model, model_out)?;
    save_lifter(&lifter, lifter_out)?;
    Ok((model, lifter))
}

/// Baseline and enhanced detections for every test frame, in frame order.
pub fn detect_test_set(cfg: &ExperimentConfig, model: &PartTreeModel, ds: &Dataset) -> Result<(Vec<DetectionRecord>, Vec<DetectionRecord>)> {
    let frames = ds.frames(&ds.test)?;
    let masks = ds.test_masks(cfg, &frames)?;
    let opts = cfg.detect_options();
    let jobs: Vec<usize> = (0..frames.len()).collect();
    let results = par_map(&jobs, |&k| detect_frame(model, &frames[k], &masks[k], &opts));
    let mut baseline = Vec::with_capacity(frames.len());
    let mut enhanced = Vec::with_capacity(frames.len());
    for (k, r) in results.into_iter().enumerate() {
        let r = r?;
        let index = ds.test[k].index;
        baseline.push(r.baseline.to_record(model, index));
        enhanced.push(r.enhanced.to_record(model, index));
    }
    Ok((baseline, enhanced))
}

/// Runs one detector over the test split and writes one JSON line per frame.
pub fn cmd_detect(cfg: &ExperimentConfig, model: &Path, dataset: &Path, mode: DetectMode, out: &Path) -> Result<Vec<DetectionRecord>> {
    cfg.validate()?;
    let model = load_model(model)?;
    let ds = Dataset::load(dataset)?;
    let (baseline, enhanced) = detect_test_set(cfg, &model, &ds)?;
    let rows = match mode {
        DetectMode::Baseline => baseline,
        DetectMode::Enhanced => enhanced,
    };
    write_jsonl(out, &rows)?;
    log::info!("wrote {} {} detections to {}", rows.len(), mode_name(mode), out.display());
    Ok(rows)
}

/// Lifts each 2D pose; rows keep the given frame indices.
pub fn lift_poses(lifter: &GpLifter, frame_indices: &[usize], poses2d: &[Vec<f64>]) -> Result<Vec<PredictionRecord>> {
    if frame_indices.len() != poses2d.len() {
        return Err(Error::Data(format!("{} frame indices for {} poses", frame_indices.len(), poses2d.len())));
    }
    frame_indices
        .iter()
        .zip(poses2d)
        .map(|(&frame_index, p)| {
            let (pose3d, variance) = lift(lifter, p)?;
            Ok(PredictionRecord {
                frame_index,
                pose3d,
                variance,
            })
        })
        .collect()
}

pub fn cmd_lift(lifter: &Path, detections: &Path, out: &Path) -> Result<Vec<PredictionRecord>> {
    let lifter = load_lifter(lifter)?;
    let dets: Vec<DetectionRecord> = read_jsonl(detections)?;
    let idx: Vec<usize> = dets.iter().map(|d| d.frame_index).collect();
    let poses: Vec<Vec<f64>> = dets.iter().map(|d| d.pose2d()).collect();
    if let Some(p) = poses.iter().find(|p| p.len() != POSE2D_LEN) {
        return Err(Error::Data(format!("detection with {} coordinates, expected {POSE2D_LEN}", p.len())));
    }
    let rows = lift_poses(&lifter, &idx, &poses)?;
    write_jsonl(out, &rows)?;
    Ok(rows)
}

/// 3D joint and coordinate traced in the evaluation plot: the left elbow's
/// forward (z) coordinate, which swings with the gait.
pub const TRACE_JOINT: usize = skeleton::J_L_ELBOW;
pub const TRACE_AXIS: usize = 2;

const TRUTH_COLOR: Rgb = [30, 30, 30];
const PRED_COLOR: Rgb = [200, 40, 40];
const ERROR_COLOR: Rgb = [40, 80, 200];

fn check_alignment(what: &str, scenes: &[SceneRecord], indices: impl Iterator<Item = usize>) -> Result<()> {
    let got: Vec<usize> = indices.collect();
    if got.len() != scenes.len() {
        return Err(Error::Data(format!("{what} has {} frames, test split has {}", got.len(), scenes.len())));
    }
    if let Some((k, (s, g))) = scenes.iter().zip(&got).enumerate().find(|(_, (s, g))| s.index != **g) {
        return Err(Error::Data(format!("{what} row {k} is frame {g}, expected frame {}", s.index)));
    }
    Ok(())
}

/// Scores detections (and optionally their lifted 3D poses) against the
/// test split, writes the report and trace plots named after `stem`.
pub fn cmd_eval(
    cfg: &ExperimentConfig,
    dataset: &Path,
    detections: &Path,
    predictions: Option<&Path>,
    report_out: &Path,
    plot_dir: &Path,
) -> Result<EvalReport> {
    let ds = Dataset::load(dataset)?;
    let dets: Vec<DetectionRecord> = read_jsonl(detections)?;
    check_alignment("detections", &ds.test, dets.iter().map(|d| d.frame_index))?;
    let preds: Option<Vec<PredictionRecord>> = predictions.map(read_jsonl).transpose()?;
    if let Some(p) = &preds {
        check_alignment("predictions", &ds.test, p.iter().map(|r| r.frame_index))?;
    }
    let idx: Vec<usize> = dets.iter().map(|d| d.frame_index).collect();
    let det2d: Vec<Vec<f64>> = dets.iter().map(|d| d.pose2d()).collect();
    let gt2d: Vec<Vec<f64>> = ds.test.iter().map(|s| s.pose2d.clone()).collect();
    let gt3d: Vec<Vec<f64>> = ds.test.iter().map(|s| s.pose3d.clone()).collect();
    let pred3d: Option<Vec<Vec<f64>>> = preds.as_ref().map(|p| p.iter().map(|r| r.pose3d.clone()).collect());
    let report = EvalReport::build(
        &idx,
        &det2d,
        &gt2d,
        pred3d.as_deref().map(|p| (p, gt3d.as_slice())),
        &cfg.eval_options(),
    )
    .map_err(|e| match e {
        Error::Shape(m) => Error::Data(m),
        other => other,
    })?;
    write_json(report_out, &report)?;

    if let Some(p) = &pred3d {
        create_dir(plot_dir)?;
        let stem = report_out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
        let trace = joint_trace(p, &gt3d, TRACE_JOINT, TRACE_AXIS)?;
        let name = skeleton::JOINT_NAMES_3D[TRACE_JOINT].to_uppercase();
        let chart = LineChart {
            title: format!("{name} {}", ["X", "Y", "Z"][TRACE_AXIS]),
            x_label: "FRAME INDEX".into(),
            y_label: "MM".into(),
            series: vec![
                Series {
                    name: "TRUTH".into(),
                    color: TRUTH_COLOR,
                    points: trace.iter().map(|t| (t.frame as f64, t.truth)).collect(),
                },
                Series {
                    name: "PREDICTED".into(),
                    color: PRED_COLOR,
                    points: trace.iter().map(|t| (t.frame as f64, t.predicted)).collect(),
                },
            ],
        };
        render_line_chart(&chart, 640, 360)?.save_png(&plot_dir.join(format!("{stem}_trace.png")))?;
        let errors: Vec<(f64, f64)> = report
            .frames
            .iter()
            .filter_map(|f| f.joint_error_mm.map(|e| (f.frame_index as f64, e)))
            .collect();
        let chart = LineChart {
            title: "MEAN JOINT ERROR".into(),
            x_label: "FRAME INDEX".into(),
            y_label: "MM".into(),
            series: vec![Series {
                name: "ERROR".into(),
                color: ERROR_COLOR,
                points: errors,
            }],
        };
        render_line_chart(&chart, 640, 360)?.save_png(&plot_dir.join(format!("{stem}_error.png")))?;
    }
    Ok(report)
}

const LEFT_COLOR: Rgb = [230, 60, 60];
const RIGHT_COLOR: Rgb = [60, 110, 240];
const CENTER_COLOR: Rgb = [40, 190, 90];
const LABEL_BAND: usize = 12;

fn part_color(name: &str) -> Rgb {
    if name.starts_with("left") {
        LEFT_COLOR
    } else if name.starts_with("right") {
        RIGHT_COLOR
    } else {
        CENTER_COLOR
    }
}

fn draw_panel(img: &mut RgbImage, frame: &ImageGrid, det: &DetectionRecord, label: &str, x0: i64) {
    let y0 = LABEL_BAND as i64;
    for y in 0..frame.height() {
        for x in 0..frame.width() {
            let v = frame.get(x, y).round().clamp(0.0, 255.0) as u8;
            img.put(x0 + x as i64, y0 + y as i64, [v, v, v]);
        }
    }
    let at = |i: usize| {
        let p = &det.parts[i];
        (x0 + p.x_px.round() as i64, y0 + p.y_px.round() as i64)
    };
    for (i, def) in skeleton::PARTS.iter().enumerate() {
        if let (Some(parent), true) = (def.parent, i < det.parts.len()) {
            let ((ax, ay), (bx, by)) = (at(i), at(parent));
            img.thick_line(ax, ay, bx, by, part_color(&det.parts[i].name));
        }
    }
    for (i, p) in det.parts.iter().enumerate() {
        let (x, y) = at(i);
        img.disc(x, y, 2, part_color(&p.name));
    }
    let text = if det.flags.is_empty() {
        label.to_uppercase()
    } else {
        format!("{} ({})", label.to_uppercase(), det.flags.len())
    };
    img.text(x0 + 2, 2, &text, 1, BLACK);
}

/// Draws each detection set over the test frames, side by side, one PNG per
/// frame. `sets` pairs a panel label with its detections file.
pub fn cmd_render(dataset: &Path, sets: &[(String, PathBuf)], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if sets.is_empty() {
        return Err(Error::config("render needs at least one detections file"));
    }
    let ds = Dataset::load(dataset)?;
    let loaded = sets
        .iter()
        .map(|(label, path)| {
            let rows: Vec<DetectionRecord> = read_jsonl(path)?;
            check_alignment(&path.display().to_string(), &ds.test, rows.iter().map(|d| d.frame_index))?;
            if rows.iter().any(|d| d.parts.len() != skeleton::NUM_PARTS) {
                return Err(Error::Data(format!("{}: detections must list {} parts", path.display(), skeleton::NUM_PARTS)));
            }
            Ok((label.as_str(), rows))
        })
        .collect::<Result<Vec<_>>>()?;
    create_dir(out_dir)?;
    let mut written = Vec::with_capacity(ds.test.len());
    for (k, scene) in ds.test.iter().enumerate() {
        let frame = read_grid(&ds.dir.join(&scene.frame_path))?;
        let (w, h) = frame.dims();
        let mut img = RgbImage::new(w * loaded.len(), h + LABEL_BAND, WHITE);
        for (p, (label, rows)) in loaded.iter().enumerate() {
            draw_panel(&mut img, &frame, &rows[k], label, (p * w) as i64);
        }
        let path = out_dir.join(format!("frame_{:05}.png", scene.index));
        img.save_png(&path)?;
        written.push(path);
    }
    Ok(written)
}

/// Paths and headline numbers from [`run_pipeline`].
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSummary {
    pub baseline: EvalReport,
    pub enhanced: EvalReport,
    pub artifacts: Vec<PathBuf>,
}

/// Every command in sequence, both detectors, under `cfg.out_dir`.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<PipelineSummary> {
    let layout = Layout::new(&cfg.out_dir);
    create_dir(&layout.root)?;
    cfg.save(&layout.root.join("config.txt"))?;
    cmd_synth(cfg, &layout.dataset())?;
    let (model, _) = cmd_train(cfg, &layout.dataset(), &layout.model(), &layout.lifter())?;
    let ds = Dataset::load(&layout.dataset())?;
    let (baseline, enhanced) = detect_test_set(cfg, &model, &ds)?;
    write_jsonl(&layout.detections(DetectMode::Baseline), &baseline)?;
    write_jsonl(&layout.detections(DetectMode::Enhanced), &enhanced)?;
    let mut reports = Vec::new();
    for mode in [DetectMode::Baseline, DetectMode::Enhanced] {
        cmd_lift(&layout.lifter(), &layout.detections(mode), &layout.predictions(mode))?;
        reports.push(cmd_eval(
            cfg,
            &layout.dataset(),
            &layout.detections(mode),
            Some(&layout.predictions(mode)),
            &layout.report(mode),
            &layout.plots(),
        )?);
    }
    let sets: Vec<(String, PathBuf)> = [DetectMode::Baseline, DetectMode::Enhanced]
        .into_iter()
        .map(|m| (mode_name(m).to_string(), layout.detections(m)))
        .collect();
    let mut artifacts = cmd_render(&layout.dataset(), &sets, &layout.overlays())?;
    for mode in [DetectMode::Baseline, DetectMode::Enhanced] {
        artifacts.extend([layout.detections(mode), layout.predictions(mode), layout.report(mode)]);
    }
    artifacts.extend([layout.model(), layout.lifter()]);
    let enhanced = reports.pop().unwrap();
    let baseline = reports.pop().unwrap();
    Ok(PipelineSummary {
        baseline,
        enhanced,
        artifacts,
    })
}

/// Writes a short human-readable summary line for a report.
pub fn print_report_summary(out: &mut impl Write, label: &str, r: &EvalReport) -> std::io::Result<()> {
    write!(
        out,
        "{label}: frames {} mean PCK {:.3} limb PCK {:.3} double-count rate {:.3}",
        r.n_frames, r.mean_pck, r.limb_pck, r.double_count_rate
    )?;
    if let Some(m) = r.mpjpe_mm {
        write!(out, " MPJPE {m:.1} mm")?;
    }
    writeln!(out)
}
