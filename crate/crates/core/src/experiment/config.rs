use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::eval::EvalOptions;
use crate::features::HogParams;
use crate::imaging::synth::{Action, ActorStyle, Canvas, RenderStyle};
use crate::lift3d::OptimizeOptions;
use crate::model::{PairwiseFitConfig, TreeLayout};
use crate::pipeline::{DetectOptions, TrainOptions};

/// A value that can live on the right-hand side of a config line.
pub trait ConfigValue: Sized {
    fn parse_value(s: &str) -> Result<Self>;
    fn render_value(&self) -> String;
}

fn bad(s: &str, what: &str) -> Error {
    Error::config(format!("cannot parse {s:?} as {what}"))
}

impl ConfigValue for f64 {
    fn parse_value(s: &str) -> Result<Self> {
        let v: f64 = s.parse().map_err(|_| bad(s, "a number"))?;
        if !v.is_finite() {
            return Err(bad(s, "a finite number"));
        }
        Ok(v)
    }
    fn render_value(&self) -> String {
        // Display prints the shortest string that parses back to the same bits
        format!("{self}")
    }
}

impl ConfigValue for usize {
    fn parse_value(s: &str) -> Result<Self> {
        s.parse().map_err(|_| bad(s, "a non-negative integer"))
    }
    fn render_value(&self) -> String {
        self.to_string()
    }
}

impl ConfigValue for u64 {
    fn parse_value(s: &str) -> Result<Self> {
        s.parse().map_err(|_| bad(s, "a non-negative integer"))
    }
    fn render_value(&self) -> String {
        self.to_string()
    }
}

impl ConfigValue for String {
    fn parse_value(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(bad(s, "a non-empty string"));
        }
        Ok(s.to_string())
    }
    fn render_value(&self) -> String {
        self.clone()
    }
}

impl ConfigValue for PathBuf {
    fn parse_value(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(bad(s, "a path"));
        }
        Ok(PathBuf::from(s))
    }
    fn render_value(&self) -> String {
        self.display().to_string()
    }
}

impl ConfigValue for Action {
    fn parse_value(s: &str) -> Result<Self> {
        Action::from_str(s)
    }
    fn render_value(&self) -> String {
        self.to_string()
    }
}

impl ConfigValue for Option<f64> {
    fn parse_value(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(None),
            _ => f64::parse_value(s).map(Some),
        }
    }
    fn render_value(&self) -> String {
        self.map_or_else(|| "none".into(), |v| v.render_value())
    }
}

macro_rules! experiment_config {
    ($($(#[doc = $doc:literal])* $key:ident: $ty:ty = $default:expr;)*) => {
        /// Every knob of an experiment run. The file form is one `key = value`
        /// per line; `#` starts a comment.
        #[derive(Debug, Clone, PartialEq)]
        pub struct ExperimentConfig {
            $($(#[doc = $doc])* pub $key: $ty,)*
        }

        impl Default for ExperimentConfig {
            fn default() -> Self {
                Self { $($key: $default,)* }
            }
        }

        impl ExperimentConfig {
            pub const KEYS: &'static [&'static str] = &[$(stringify!($key),)*];

            /// Sets one field from its text form.
            pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
                match key {
                    $(stringify!($key) => {
                        self.$key = <$ty as ConfigValue>::parse_value(value)
                            .map_err(|e| Error::config(format!("{key}: {e}")))?;
                    })*
                    other => return Err(Error::config(format!("unknown key {other:?}"))),
                }
                Ok(())
            }

            /// All fields in declaration order.
            pub fn to_text(&self) -> String {
                let mut s = String::new();
                $(writeln!(s, "{} = {}", stringify!($key), self.$key.render_value()).unwrap();)*
                s
            }
        }
    };
}

experiment_config! {
    action: Action = Action::Walk;
    /// `S1`, `S2` or `S3`.
    actor: String = "S2".into();
    n_train: usize = 200;
    n_test: usize = 21;
    seed: u64 = 7;
    thresh1: f64 = 0.5;
    thresh2: f64 = 0.2;
    top_n: usize = 5;
    bg_learning_rate: f64 = crate::imaging::DEFAULT_LEARNING_RATE;
    bg_threshold: f64 = crate::imaging::DEFAULT_THRESHOLD;
    /// Empty plates averaged into the initial background.
    bg_plates: usize = 5;
    min_blob_area: usize = 20;
    cell_size: usize = 4;
    n_orientations: usize = crate::features::DEFAULT_ORIENTATIONS;
    hog_clip: Option<f64> = Some(crate::features::DEFAULT_CLIP);
    template_w: usize = 4;
    template_h: usize = 4;
    ridge_lambda: f64 = 1.0;
    negatives_per_part: usize = 800;
    min_variance: f64 = PairwiseFitConfig::default().min_variance;
    max_variance: f64 = PairwiseFitConfig::default().max_variance;
    gp_max_iter: usize = 500;
    gp_grad_tol: f64 = 1e-6;
    canvas_width: usize = Canvas::default().width;
    canvas_height: usize = Canvas::default().height;
    noise_sigma: f64 = RenderStyle::default().noise_sigma;
    alpha_pck: f64 = crate::eval::DEFAULT_ALPHA_PCK;
    min_sep_px: f64 = crate::eval::DEFAULT_MIN_SEP;
    out_dir: PathBuf = PathBuf::from("out");
}

impl ExperimentConfig {
    /// Parses the file form. Unknown or repeated keys are errors; missing
    /// keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected key = value", no + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::config(format!("line {}: duplicate key {key:?}", no + 1)));
            }
            cfg.set(key, value.trim())
                .map_err(|e| Error::config(format!("line {}: {e}", no + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(Error::config(msg.to_string())) };
        ActorStyle::from_id(&self.actor)?;
        check(self.n_train >= crate::lift3d::MIN_TRAINING_POSES, "n_train must be at least 8")?;
        check(self.n_test >= 1, "n_test must be positive")?;
        check((0.0..=1.0).contains(&self.thresh1), "thresh1 must lie in [0, 1]")?;
        check((0.0..=1.0).contains(&self.thresh2), "thresh2 must lie in [0, 1]")?;
        check(self.top_n >= 1, "top_n must be positive")?;
        check(self.bg_learning_rate > 0.0 && self.bg_learning_rate <= 1.0, "bg_learning_rate must lie in (0, 1]")?;
        check(self.bg_threshold >= 0.0, "bg_threshold must be non-negative")?;
        check(self.bg_plates >= 1, "bg_plates must be positive")?;
        check(self.cell_size >= 1 && self.n_orientations >= 1, "cell_size and n_orientations must be positive")?;
        check(self.hog_clip.map_or(true, |c| c > 0.0), "hog_clip must be positive or none")?;
        check(self.template_w >= 1 && self.template_h >= 1, "template sizes must be positive")?;
        check(self.ridge_lambda >= 0.0, "ridge_lambda must be non-negative")?;
        check(self.negatives_per_part >= 1, "negatives_per_part must be positive")?;
        check(
            self.min_variance > 0.0 && self.min_variance <= self.max_variance && self.max_variance <= 500.0,
            "variance bounds must satisfy 0 < min_variance <= max_variance <= 500",
        )?;
        check(self.gp_grad_tol > 0.0, "gp_grad_tol must be positive")?;
        check(self.canvas_width >= 16 && self.canvas_height >= 16, "canvas must be at least 16x16")?;
        check(self.noise_sigma >= 0.0, "noise_sigma must be non-negative")?;
        check(self.alpha_pck > 0.0 && self.min_sep_px > 0.0, "alpha_pck and min_sep_px must be positive")?;
        Ok(())
    }

    pub fn actor_style(&self) -> Result<ActorStyle> {
        ActorStyle::from_id(&self.actor)
    }

    pub fn canvas(&self) -> Canvas {
        Canvas {
            width: self.canvas_width,
            height: self.canvas_height,
        }
    }

    pub fn render_style(&self) -> RenderStyle {
        RenderStyle {
            noise_sigma: self.noise_sigma,
            ..RenderStyle::default()
        }
    }

    pub fn hog(&self) -> HogParams {
        HogParams {
            cell_size: self.cell_size,
            n_orientations: self.n_orientations,
            clip: self.hog_clip,
        }
    }

    pub fn train_options(&self) -> TrainOptions {
        TrainOptions {
            hog: self.hog(),
            layout: TreeLayout::human(self.template_w, self.template_h),
            lambda: self.ridge_lambda,
            negatives_per_part: self.negatives_per_part,
            pairwise: PairwiseFitConfig {
                min_variance: self.min_variance,
                max_variance: self.max_variance,
            },
        }
    }

    pub fn detect_options(&self) -> DetectOptions {
        DetectOptions {
            thresh1: self.thresh1,
            thresh2: self.thresh2,
            top_n: self.top_n,
            hog_clip: self.hog_clip,
        }
    }

    pub fn gp_options(&self) -> OptimizeOptions {
        OptimizeOptions {
            max_iter: self.gp_max_iter,
            grad_tol: self.gp_grad_tol,
            ..OptimizeOptions::default()
        }
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            alpha_pck: self.alpha_pck,
            min_sep: self.min_sep_px,
        }
    }
}
