//! Browser bindings for three interactive views: baseline vs enhanced
//! detection on a synthetic frame, a 1-D generalized distance transform, and
//! a 1-D Gaussian-process fit.
//!
//! The computations live in [`ops`] and are plain Rust; the exported
//! functions only convert errors for JavaScript.

use wasm_bindgen::prelude::*;

pub mod ops {
    use partforest::experiment::ExperimentConfig;
    use partforest::imaging::synth::{render_background, render_scene, synth_sequence, ActorStyle, PoseParams, Sampling};
    use partforest::imaging::{clean_mask, BackgroundModel, ImageGrid};
    use partforest::infer::distance_transform_1d;
    use partforest::lift3d::{fit_gp, gp_predict, OptimizeOptions};
    use partforest::pipeline::{detect_frame, train_model};
    use partforest::{Error, PartTreeModel, Result};
    use serde_json::json;

    /// A small part model and the background used to cut blobs.
    pub struct DetectorState {
        pub cfg: ExperimentConfig,
        pub model: PartTreeModel,
        pub background: BackgroundModel,
    }

    pub fn train_detector(n_train: usize, negatives_per_part: usize, actor: &str, seed: u64) -> Result<DetectorState> {
        let cfg = ExperimentConfig {
            n_train,
            negatives_per_part,
            actor: actor.to_string(),
            seed,
            ..ExperimentConfig::default()
        };
        cfg.validate()?;
        let style = cfg.render_style();
        let train = synth_sequence(n_train, cfg.action, &cfg.actor_style()?, cfg.canvas(), &style, Sampling::Train, seed)?;
        let frames: Vec<ImageGrid> = train.iter().map(|s| s.frame.clone()).collect();
        let poses: Vec<Vec<f64>> = train.iter().map(|s| s.pose2d.clone()).collect();
        let model = train_model(&frames, &poses, &cfg.train_options(), seed)?;
        let plates = (0..cfg.bg_plates as u64)
            .map(|k| render_background(cfg.canvas(), &style, seed * 1000 + 1000 + k))
            .collect::<Result<Vec<_>>>()?;
        let background = BackgroundModel::from_plates(&plates, cfg.bg_learning_rate, cfg.bg_threshold)?;
        Ok(DetectorState { cfg, model, background })
    }

    /// Renders one frame at `phase`, detects with both detectors and returns
    /// the frame as RGBA plus a JSON description of both results.
    pub fn detect_phase(state: &DetectorState, phase: f64, seed: u64) -> Result<(Vec<u8>, String)> {
        let cfg = &state.cfg;
        let params = PoseParams {
            action: cfg.action,
            phase,
            actor: ActorStyle::from_id(&cfg.actor)?,
        };
        let scene = render_scene(&params, cfg.canvas(), &cfg.render_style(), seed)?;
        let mask = clean_mask(&state.background.subtract(&scene.frame)?, cfg.min_blob_area);
        let d = detect_frame(&state.model, &scene.frame, &mask, &cfg.detect_options())?;
        let rgba = scene
            .frame
            .data()
            .iter()
            .zip(mask.bits())
            .flat_map(|(v, &fg)| {
                let g = v.round().clamp(0.0, 255.0) as u8;
                if fg {
                    [g, g.saturating_add(20), g, 255]
                } else {
                    [g, g, g, 255]
                }
            })
            .collect();
        let m = &state.model;
        let info = json!({
            "width": scene.frame.width(),
            "height": scene.frame.height(),
            "truth": scene.pose2d,
            "baseline": d.baseline.to_record(m, 0),
            "enhanced": d.enhanced.to_record(m, 0),
            "parents": m.parts.iter().map(|p| p.parent.map_or(-1, |v| v as i64)).collect::<Vec<_>>(),
        });
        Ok((rgba, info.to_string()))
    }

    /// Values followed by argmax indices of the max-form transform of `src`.
    pub fn dt_1d(src: &[f64], lin: f64, quad: f64, shift: f64) -> Result<Vec<f64>> {
        let (v, a) = distance_transform_1d(src, lin, quad, shift)?;
        Ok(v.into_iter().chain(a.into_iter().map(|i| i as f64)).collect())
    }

    /// Fits a GP to `(xs, ys)` and evaluates it on `grid`: means, then
    /// variances, then the three fitted log-hyperparameters.
    pub fn gp_curve(xs: &[f64], ys: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(Error::Input("need matching, non-empty x and y".into()));
        }
        let opts = OptimizeOptions {
            max_iter: 200,
            ..OptimizeOptions::default()
        };
        let gp = fit_gp(xs, xs.len(), 1, ys, &opts)?;
        let pred: Vec<(f64, f64)> = grid.iter().map(|x| gp_predict(&gp, &[*x])).collect();
        let logs = gp.hyper.logs();
        Ok(pred
            .iter()
            .map(|p| p.0)
            .chain(pred.iter().map(|p| p.1))
            .chain(logs)
            .collect())
    }
}

fn js_err(e: partforest::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Detector {
    state: ops::DetectorState,
}

#[wasm_bindgen]
impl Detector {
    /// Trains a detector on `n_train` synthetic frames.
    #[wasm_bindgen(constructor)]
    pub fn new(n_train: usize, negatives_per_part: usize, actor: &str, seed: u64) -> Result<Detector, JsError> {
        ops::train_detector(n_train, negatives_per_part, actor, seed)
            .map(|state| Detector { state })
            .map_err(js_err)
    }

    /// RGBA pixels of the rendered frame; call [`Detector::info`] after.
    pub fn detect(&mut self, phase: f64, seed: u64) -> Result<DetectView, JsError> {
        let (rgba, info) = ops::detect_phase(&self.state, phase, seed).map_err(js_err)?;
        Ok(DetectView { rgba, info })
    }
}

#[wasm_bindgen]
pub struct DetectView {
    rgba: Vec<u8>,
    info: String,
}

#[wasm_bindgen]
impl DetectView {
    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }

    /// JSON with frame size, ground truth and both detection records.
    pub fn info(&self) -> String {
        self.info.clone()
    }
}

#[wasm_bindgen]
pub fn dt_1d(src: Vec<f64>, lin: f64, quad: f64, shift: f64) -> Result<Vec<f64>, JsError> {
    ops::dt_1d(&src, lin, quad, shift).map_err(js_err)
}

#[wasm_bindgen]
pub fn gp_curve(xs: Vec<f64>, ys: Vec<f64>, grid: Vec<f64>) -> Result<Vec<f64>, JsError> {
    ops::gp_curve(&xs, &ys, &grid).map_err(js_err)
}

#[cfg(test)]
mod tests {
    use super::ops::*;

    #[test]
    fn distance_transform_returns_values_then_indices() {
        let out = dt_1d(&[0.0, 5.0, 0.0, 0.0], 0.0, -1.0, 0.0).unwrap();
        assert_eq!(out.len(), 8);
        assert_eq!(&out[..4], &[4.0, 5.0, 4.0, 1.0]);
        assert_eq!(&out[4..], &[1.0, 1.0, 1.0, 1.0]);
        assert!(dt_1d(&[0.0], 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn gp_curve_passes_near_its_points() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| x.sin()).collect();
        let out = gp_curve(&xs, &ys, &xs).unwrap();
        assert_eq!(out.len(), 2 * xs.len() + 3);
        for (m, y) in out[..6].iter().zip(&ys) {
            assert!((m - y).abs() < 0.1);
        }
        assert!(out[6..12].iter().all(|v| *v > 0.0));
        assert!(gp_curve(&[0.0], &[], &[0.0]).is_err());
    }

    #[test]
    fn small_detector_runs_end_to_end() {
        let s = train_detector(16, 40, "S2", 3).unwrap();
        let (rgba, info) = detect_phase(&s, 0.3, 9).unwrap();
        let v: serde_json::Value = serde_json::from_str(&info).unwrap();
        let (w, h) = (v["width"].as_u64().unwrap() as usize, v["height"].as_u64().unwrap() as usize);
        assert_eq!(rgba.len(), 4 * w * h);
        assert_eq!(v["enhanced"]["parts"].as_array().unwrap().len(), 13);
        assert!(v["enhanced"]["s_mc"].as_f64().unwrap() >= v["baseline"]["s_mc"].as_f64().unwrap());
    }
}
