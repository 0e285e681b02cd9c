use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use partforest::experiment::{
    cmd_detect, cmd_eval, cmd_lift, cmd_render, cmd_synth, cmd_train, mode_name, print_report_summary, run_pipeline,
    ExperimentConfig, Layout,
};
use partforest::pipeline::DetectMode;
use partforest::{Error, Result};

/// Articulated pose detection on synthetic scenes: synthesize, train,
/// detect, lift to 3D, evaluate and render.
#[derive(Parser, Debug)]
#[command(name = "partforest", version)]
struct Cli {
    /// Experiment config (key = value lines); defaults apply to missing keys.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
#[group(multiple = false)]
struct ModeFlags {
    /// Tree backtracking only.
    #[arg(long)]
    baseline: bool,
    /// Blob-gated search plus the global optimizer (default).
    #[arg(long)]
    enhanced: bool,
}

impl ModeFlags {
    fn mode(self) -> DetectMode {
        if self.baseline {
            DetectMode::Baseline
        } else {
            DetectMode::Enhanced
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render training/test scenes and background plates.
    Synth {
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Train the part model and the 3D lifter.
    Train {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        lifter: Option<PathBuf>,
    },
    /// Detect 2D poses on the test split.
    Detect {
        #[command(flatten)]
        mode: ModeFlags,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Lift detections to 3D poses.
    Lift {
        #[command(flatten)]
        mode: ModeFlags,
        #[arg(long)]
        lifter: Option<PathBuf>,
        #[arg(long)]
        detections: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Score detections and predictions; writes a JSON report and plots.
    Eval {
        #[command(flatten)]
        mode: ModeFlags,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        detections: Option<PathBuf>,
        /// Predictions file; `none` skips 3D scoring.
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        plots: Option<PathBuf>,
    },
    /// Draw detections over the test frames, one panel per detections file.
    Render {
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// `LABEL=PATH`; repeatable. Defaults to baseline and enhanced.
        #[arg(long = "detections", value_name = "LABEL=PATH")]
        detections: Vec<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// All of the above, for both detectors.
    Run,
}

fn init_logging() -> Result<()> {
    let level = match std::env::var("PARTFOREST_LOG") {
        Err(_) => log::LevelFilter::Warn,
        Ok(v) => match v.as_str() {
            "error" => log::LevelFilter::Error,
            "info" => log::LevelFilter::Info,
            "debug" => log::LevelFilter::Debug,
            other => {
                return Err(Error::Config(format!(
                    "PARTFOREST_LOG must be error, info or debug, got {other:?}"
                )))
            }
        },
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    Ok(())
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p).map_err(|e| match e {
            Error::Io { path, source } => Error::Config(format!("{}: {source}", path.display())),
            other => other,
        })?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn or(p: &Option<PathBuf>, default: PathBuf) -> PathBuf {
    p.clone().unwrap_or(default)
}

fn parse_set(s: &str) -> Result<(String, PathBuf)> {
    match s.split_once('=') {
        Some((label, path)) if !label.is_empty() && !path.is_empty() => Ok((label.to_string(), PathBuf::from(path))),
        _ => Err(Error::Config(format!("--detections expects LABEL=PATH, got {s:?}"))),
    }
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let l = Layout::new(&cfg.out_dir);
    let stdout = &mut std::io::stdout();
    match &cli.command {
        Command::Synth { dataset } => {
            let s = cmd_synth(&cfg, &or(dataset, l.dataset()))?;
            println!("train frames {}\ntest frames {}\nbackground plates {}", s.n_train, s.n_test, s.n_backgrounds);
        }
        Command::Train { dataset, model, lifter } => {
            let (m, g) = cmd_train(&cfg, &or(dataset, l.dataset()), &or(model, l.model()), &or(lifter, l.lifter()))?;
            println!("model parts {}\nlifter outputs {} from {} poses", m.num_parts(), g.output_dim(), g.n_train());
        }
        Command::Detect { mode, model, dataset, output } => {
            let mode = mode.mode();
            let rows = cmd_detect(&cfg, &or(model, l.model()), &or(dataset, l.dataset()), mode, &or(output, l.detections(mode)))?;
            let flagged = rows.iter().filter(|r| !r.flags.is_empty()).count();
            println!("{} detections {}, flagged {}", mode_name(mode), rows.len(), flagged);
        }
        Command::Lift { mode, lifter, detections, output } => {
            let mode = mode.mode();
            let rows = cmd_lift(&or(lifter, l.lifter()), &or(detections, l.detections(mode)), &or(output, l.predictions(mode)))?;
            println!("lifted {} poses", rows.len());
        }
        Command::Eval { mode, dataset, detections, predictions, report, plots } => {
            let mode = mode.mode();
            let predictions = match predictions {
                Some(p) if p.as_os_str() == "none" => None,
                Some(p) => Some(p.clone()),
                None => Some(l.predictions(mode)),
            };
            let r = cmd_eval(
                &cfg,
                &or(dataset, l.dataset()),
                &or(detections, l.detections(mode)),
                predictions.as_deref(),
                &or(report, l.report(mode)),
                &or(plots, l.plots()),
            )?;
            print_report_summary(stdout, mode_name(mode), &r).map_err(|e| Error::Io { path: "<stdout>".into(), source: e })?;
        }
        Command::Render { dataset, detections, output } => {
            let sets = if detections.is_empty() {
                [DetectMode::Baseline, DetectMode::Enhanced]
                    .into_iter()
                    .map(|m| (mode_name(m).to_string(), l.detections(m)))
                    .collect()
            } else {
                detections.iter().map(|s| parse_set(s)).collect::<Result<Vec<_>>>()?
            };
            let written = cmd_render(&or(dataset, l.dataset()), &sets, &or(output, l.overlays()))?;
            println!("wrote {} overlays", written.len());
        }
        Command::Run => {
            let s = run_pipeline(&cfg)?;
            let io = |e| Error::Io { path: Path::new("<stdout>").into(), source: e };
            print_report_summary(stdout, "baseline", &s.baseline).map_err(io)?;
            print_report_summary(stdout, "enhanced", &s.enhanced).map_err(io)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_logging() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
