use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use sarcd::ddi::{deep_difference_stages, DdiStages};
use sarcd::metrics::evaluate;
use sarcd::pfcmc::{pfcmc, ThreeWayMap};
use sarcd::pipeline::rundir::{self, RunDir};
use sarcd::pipeline::{classify_intermediate, sweep, sweep_csv, PipelineConfig};
use sarcd::raster::{load_raster, save_f32, save_pgm_bytes};
use sarcd::synth::{generate_pair, preview_gray, SceneSpec};
use sarcd::{BinaryMap, Error, Raster};

/// Exit code when the input carries no usable difference.
const EXIT_DEGENERATE_INPUT: u8 = 2;
/// Exit code when the classifier could not be trained and the map is the
/// clustering result alone.
const EXIT_FALLBACK: u8 = 3;

#[derive(Parser)]
#[command(name = "sarcd", version, about = "Change detection for bi-temporal SAR images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a speckled synthetic image pair with ground truth.
    Synth(SynthArgs),
    /// Compute the deep difference image into a run directory.
    Ddi(StageArgs),
    /// Pseudo-label the difference image (runs `ddi` first if needed).
    Cluster(StageArgs),
    /// Full detector; scores the result when --truth is given.
    Detect(DetectArgs),
    /// Score a change map against ground truth.
    Eval(EvalArgs),
    /// Score the detector over a grid of T and b values.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Scene description (JSON); omitted fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct StageArgs {
    /// Detector configuration (JSON). Defaults to the run directory's
    /// config.json when present.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// First acquisition (SARF or PGM).
    #[arg(long)]
    i1: Option<PathBuf>,
    /// Second acquisition (SARF or PGM).
    #[arg(long)]
    i2: Option<PathBuf>,
    /// Run directory.
    #[arg(long)]
    out: PathBuf,
    /// Reuse stage files already present in the run directory.
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    stage: StageArgs,
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Change map (PGM or SARF, thresholded at one half).
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Write the metrics here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    i1: PathBuf,
    #[arg(long)]
    i2: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Accumulation counts, comma separated.
    #[arg(long = "t", value_delimiter = ',', default_values_t = [1usize, 3, 5, 7, 9, 11])]
    t_list: Vec<usize>,
    /// Center biases, comma separated.
    #[arg(long = "b", value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.0f64])]
    b_list: Vec<f64>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Ddi(a) => ddi_stage(&a).map(|_| Status::Ok),
        Command::Cluster(a) => cluster_stage(&a).map(|_| Status::Ok),
        Command::Detect(a) => detect(a),
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => sweep_cmd(a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Fallback) => ExitCode::from(EXIT_FALLBACK),
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::DegenerateInput(_)) => ExitCode::from(EXIT_DEGENERATE_INPUT),
                Some(Error::DegenerateTraining(_)) => ExitCode::from(EXIT_FALLBACK),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

enum Status {
    Ok,
    Fallback,
}

fn read_scene(path: &Path) -> anyhow::Result<SceneSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn synth(a: SynthArgs) -> anyhow::Result<Status> {
    let mut spec: SceneSpec = match &a.config {
        Some(p) => read_scene(p)?,
        None => SceneSpec::default(),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let scene = generate_pair::<f64>(&spec)?;
    fs::create_dir_all(&a.out)?;
    let (w, h) = (scene.i1.width(), scene.i1.height());
    save_f32(&scene.i1, a.out.join("i1.sarf"))?;
    save_f32(&scene.i2, a.out.join("i2.sarf"))?;
    save_pgm_bytes(w, h, &preview_gray(&scene.i1, 0.99), a.out.join("i1.pgm"))?;
    save_pgm_bytes(w, h, &preview_gray(&scene.i2, 0.99), a.out.join("i2.pgm"))?;
    scene.truth.save_pgm(a.out.join("truth.pgm"))?;
    fs::write(a.out.join("scene.json"), serde_json::to_string_pretty(&spec)?)?;
    info!("{} changed of {} pixels written to {}", scene.truth.count_changed(), w * h, a.out.display());
    Ok(Status::Ok)
}

/// Explicit --config, else the run directory's saved config, else defaults;
/// --seed overrides. The effective config is written back to the run dir.
fn stage_config(a: &StageArgs, dir: &RunDir) -> anyhow::Result<PipelineConfig> {
    let saved = dir.path(rundir::CONFIG);
    let mut cfg = match &a.config {
        Some(p) => PipelineConfig::from_json(&fs::read_to_string(p)?)?,
        None if saved.is_file() => PipelineConfig::from_json(&fs::read_to_string(&saved)?)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    fs::write(saved, cfg.to_json())?;
    Ok(cfg)
}

fn load_inputs(a: &StageArgs) -> anyhow::Result<(Raster<f64>, Raster<f64>)> {
    let (Some(p1), Some(p2)) = (&a.i1, &a.i2) else {
        bail!("--i1 and --i2 are required unless the run directory already holds the difference image");
    };
    let i1 = load_raster(p1).with_context(|| format!("loading {}", p1.display()))?;
    let i2 = load_raster(p2).with_context(|| format!("loading {}", p2.display()))?;
    Ok((i1, i2))
}

/// Difference-image stages as stored on disk; every later stage reads them
/// back so a resumed run sees exactly what a fresh one does.
fn ddi_stage(a: &StageArgs) -> anyhow::Result<(RunDir, PipelineConfig, DdiStages<f64>)> {
    let dir = RunDir::create(&a.out)?;
    let cfg = stage_config(a, &dir)?;
    let reusable =
        a.resume && [rundir::POOLED1, rundir::POOLED2, rundir::LOG_RATIO, rundir::DDI].iter().all(|f| dir.has(f));
    if reusable {
        info!("reusing difference image in {}", a.out.display());
    } else {
        let (i1, i2) = load_inputs(a)?;
        let stages = deep_difference_stages(&i1, &i2, &cfg.ddi())?;
        dir.save_ddi_stages(&stages)?;
        info!("difference image written to {}", a.out.display());
    }
    let stages = dir.load_ddi_stages()?;
    Ok((dir, cfg, stages))
}

fn cluster_stage(a: &StageArgs) -> anyhow::Result<(RunDir, PipelineConfig, DdiStages<f64>, ThreeWayMap)> {
    let resume = StageArgs { resume: a.resume || (a.i1.is_none() && a.i2.is_none()), ..a.clone() };
    let (dir, cfg, stages) = ddi_stage(&resume)?;
    let path = dir.path(rundir::PSEUDO);
    let pseudo = if a.resume && path.is_file() {
        info!("reusing pseudo-labels in {}", path.display());
        ThreeWayMap::load_pgm(&path)?
    } else {
        let pseudo = pfcmc(&stages.ddi, &cfg.pfcmc())?;
        pseudo.save_pgm(&path)?;
        pseudo
    };
    info!(
        "pseudo-labels: {} changed, {} unchanged, {} intermediate",
        pseudo.count(sarcd::pfcmc::PixelClass::Changed),
        pseudo.count(sarcd::pfcmc::PixelClass::Unchanged),
        pseudo.count(sarcd::pfcmc::PixelClass::Intermediate)
    );
    Ok((dir, cfg, stages, pseudo))
}

fn detect(a: DetectArgs) -> anyhow::Result<Status> {
    let (dir, cfg, stages, pseudo) = cluster_stage(&a.stage)?;
    let cls = classify_intermediate(&stages.pooled1, &stages.pooled2, &pseudo, &cfg)?;
    if let Some(model) = &cls.pcanet {
        model.save(dir.path(rundir::PCANET))?;
    }
    if let Some(model) = &cls.svm {
        model.save(dir.path(rundir::SVM))?;
    }
    cls.change_map.save_pgm(dir.path(rundir::CHANGE_MAP))?;
    info!("{} intermediate pixels classified; {} changed in total", cls.predicted, cls.change_map.count_changed());
    if let Some(truth) = &a.truth {
        let truth = load_map(truth)?;
        let report = evaluate(&cls.change_map, &truth)?;
        fs::write(dir.path(rundir::METRICS), report.to_json())?;
        println!("{}", report.to_json());
    }
    Ok(match cls.fallback {
        Some(why) => {
            warn!("classifier not trained ({why}); change map is the clustering result");
            Status::Fallback
        }
        None => Status::Ok,
    })
}

fn load_map(path: &Path) -> anyhow::Result<BinaryMap> {
    let raster: Raster<f64> = load_raster(path).with_context(|| format!("loading {}", path.display()))?;
    Ok(BinaryMap::from_raster(&raster))
}

fn eval(a: EvalArgs) -> anyhow::Result<Status> {
    let report = evaluate(&load_map(&a.map)?, &load_map(&a.truth)?)?;
    match &a.out {
        Some(p) => fs::write(p, report.to_json())?,
        None => println!("{}", report.to_json()),
    }
    Ok(Status::Ok)
}

fn sweep_cmd(a: SweepArgs) -> anyhow::Result<Status> {
    let mut cfg = match &a.config {
        Some(p) => PipelineConfig::from_json(&fs::read_to_string(p)?)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let i1: Raster<f64> = load_raster(&a.i1)?;
    let i2: Raster<f64> = load_raster(&a.i2)?;
    let truth = load_map(&a.truth)?;
    let rows = sweep(&i1, &i2, &truth, &cfg, &a.t_list, &a.b_list);
    let csv = sweep_csv(&rows);
    match &a.out {
        Some(p) => fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(Status::Ok)
}
