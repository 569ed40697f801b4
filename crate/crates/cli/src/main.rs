//! Command-line surface for the dataset and evaluation pipeline.
//!
//! Machine-readable JSON goes to stdout; everything human-readable goes to
//! stderr. Exit codes: 0 success, 1 validation error (bad arguments, bad
//! data), 2 I/O error (missing or unreadable files).

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use changekit::builder::{build_dataset, DatasetStats, Task, Turn};
use changekit::eval::evaluate;
use changekit::io::{
    load_manifest, load_mask, load_pair_records, load_predictions, read_jsonl, write_jsonl,
};
use changekit::mask::{
    connected_components_filtered, region_of, ChangeCategory, ChangeInstance, GridRegion,
    LabelMask,
};
use changekit::prompt::{compose, FineCues};
use changekit::vision::{
    forward_fine_grained, stub_encode, ConvKernel, FeatureTensor, ParamSet, PYRAMID_STRIDES,
};
use changekit::Error;

use config::{parse_connectivity, Config};

#[derive(Parser)]
#[command(
    name = "changekit",
    version,
    about = "Build, inspect and score instruction datasets over bi-temporal change imagery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonOpts {
    /// Flat key=value config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for template selection and parameter generation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Component adjacency rule: four or eight.
    #[arg(long, global = true)]
    connectivity: Option<String>,
    /// Dialogues generated per pair.
    #[arg(long = "dialogues-per-pair", global = true)]
    dialogues_per_pair: Option<usize>,
    /// Minimum component area in pixels.
    #[arg(long = "min-area", global = true)]
    min_area: Option<usize>,
    /// Binarization threshold for the change-probability mask.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Template bank TSV replacing the built-in one.
    #[arg(long = "template-bank", global = true)]
    template_bank: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build an instruction JSONL dataset from a corpus manifest.
    BuildDataset {
        manifest: PathBuf,
        out: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Report per-category counts, instances and grid regions of a mask.
    AnalyzeMask {
        mask: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Compose the dual-granularity prompt for a query over a mask.
    ComposePrompt {
        caption: String,
        mask: PathBuf,
        query: String,
        /// Prior turns as JSONL lines {"role": ..., "content": ...}.
        #[arg(long)]
        history: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Score a prediction file against a dataset.
    Evaluate {
        dataset: PathBuf,
        predictions: PathBuf,
        /// Restrict scoring to one task.
        #[arg(long)]
        task: Option<TaskArg>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Per-task record counts of an existing dataset.
    Stats { dataset: PathBuf },
    /// Run the seeded forward pass over two images and analyze its mask.
    VisionDemo {
        image_before: PathBuf,
        image_after: PathBuf,
        /// Zero the mask head (uniform 0.5 probabilities, empty change set).
        #[arg(long = "zero-head")]
        zero_head: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Caption,
    Binary,
    Count,
    Localization,
    Dialogue,
}

impl From<TaskArg> for Task {
    fn from(value: TaskArg) -> Task {
        match value {
            TaskArg::Caption => Task::Caption,
            TaskArg::Binary => Task::Binary,
            TaskArg::Count => Task::Count,
            TaskArg::Localization => Task::Localization,
            TaskArg::Dialogue => Task::Dialogue,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Failure {
        Failure {
            code: if error.is_io() { 2 } else { 1 },
            message: error.to_string(),
        }
    }
}

impl Failure {
    fn io(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err)
            if matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            err.exit()
        }
        Err(err) => {
            eprintln!("{err}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn resolve_config(common: &CommonOpts) -> Result<Config, Failure> {
    let mut config = Config::default();
    if let Some(path) = &common.config {
        config.apply_file(path)?;
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(connectivity) = &common.connectivity {
        config.connectivity = parse_connectivity(connectivity)?;
    }
    if let Some(dialogues) = common.dialogues_per_pair {
        config.dialogues_per_pair = dialogues;
    }
    if let Some(min_area) = common.min_area {
        config.min_area = min_area;
    }
    if let Some(threshold) = common.threshold {
        config.threshold = threshold;
    }
    if let Some(bank) = &common.template_bank {
        config.template_bank = Some(bank.clone());
    }
    config.validate()?;
    Ok(config)
}

fn emit_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string(value).expect("report serialization cannot fail")
    );
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::BuildDataset {
            manifest,
            out,
            common,
        } => cmd_build_dataset(&manifest, &out, &common),
        Command::AnalyzeMask { mask, common } => cmd_analyze_mask(&mask, &common),
        Command::ComposePrompt {
            caption,
            mask,
            query,
            history,
            common,
        } => cmd_compose_prompt(&caption, &mask, &query, history.as_deref(), &common),
        Command::Evaluate {
            dataset,
            predictions,
            task,
            common: _,
        } => cmd_evaluate(&dataset, &predictions, task.map(Task::from)),
        Command::Stats { dataset } => cmd_stats(&dataset),
        Command::VisionDemo {
            image_before,
            image_after,
            zero_head,
            common,
        } => cmd_vision_demo(&image_before, &image_after, zero_head, &common),
    }
}

fn cmd_build_dataset(manifest: &Path, out: &Path, common: &CommonOpts) -> Result<(), Failure> {
    let config = resolve_config(common)?;
    let bank = config.template_bank()?;
    let manifest = load_manifest(manifest)?;
    let pairs = load_pair_records(&manifest)?;
    let (records, stats) = build_dataset(&pairs, &bank, &config.build_config())?;
    write_jsonl(&records, out)?;
    eprintln!("wrote {} records to {}", stats.total, out.display());
    emit_json(&stats);
    Ok(())
}

#[derive(Serialize)]
struct InstanceReport<'a> {
    #[serde(flatten)]
    instance: &'a ChangeInstance,
    region: &'static str,
}

#[derive(Serialize)]
struct MaskReport<'a> {
    width: u32,
    height: u32,
    counts: std::collections::BTreeMap<&'static str, usize>,
    instances: Vec<InstanceReport<'a>>,
    regions: std::collections::BTreeMap<&'static str, Vec<&'static str>>,
}

fn analyze(mask: &LabelMask, config: &Config) -> (Vec<ChangeInstance>, Vec<ChangeInstance>) {
    let run = |category| {
        connected_components_filtered(mask, category, config.connectivity, config.min_area)
    };
    (run(ChangeCategory::Road), run(ChangeCategory::Building))
}

fn cmd_analyze_mask(mask_path: &Path, common: &CommonOpts) -> Result<(), Failure> {
    let config = resolve_config(common)?;
    let mask = load_mask(mask_path)?;
    let (roads, buildings) = analyze(&mask, &config);

    let mut counts = std::collections::BTreeMap::new();
    counts.insert("road", roads.len());
    counts.insert("building", buildings.len());

    let region_names = |instances: &[ChangeInstance]| -> Vec<&'static str> {
        let mut regions: Vec<GridRegion> = instances
            .iter()
            .map(|i| {
                region_of(i.centroid.0, i.centroid.1, mask.width(), mask.height())
                    .expect("centroid lies inside the mask")
            })
            .collect();
        regions.sort();
        regions.dedup();
        regions.into_iter().map(GridRegion::name).collect()
    };
    let mut regions = std::collections::BTreeMap::new();
    regions.insert("road", region_names(&roads));
    regions.insert("building", region_names(&buildings));

    let all: Vec<&ChangeInstance> = roads.iter().chain(buildings.iter()).collect();
    let instances = all
        .iter()
        .map(|instance| InstanceReport {
            instance,
            region: region_of(
                instance.centroid.0,
                instance.centroid.1,
                mask.width(),
                mask.height(),
            )
            .expect("centroid lies inside the mask")
            .name(),
        })
        .collect();

    emit_json(&MaskReport {
        width: mask.width(),
        height: mask.height(),
        counts,
        instances,
        regions,
    });
    Ok(())
}

fn load_history(path: &Path) -> Result<Vec<Turn>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Failure::io(format!("file not found: {}", path.display()))
        } else {
            Failure::io(format!("{}: {e}", path.display()))
        }
    })?;
    let mut turns = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let turn: Turn = serde_json::from_str(line).map_err(|e| Error::MalformedJson {
            path: path.to_path_buf(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        turns.push(turn);
    }
    Ok(turns)
}

fn cmd_compose_prompt(
    caption: &str,
    mask_path: &Path,
    query: &str,
    history: Option<&Path>,
    common: &CommonOpts,
) -> Result<(), Failure> {
    let config = resolve_config(common)?;
    let mask = load_mask(mask_path)?;
    let cues = FineCues::from_mask(&mask, config.connectivity, config.min_area);
    let turns = match history {
        Some(path) => load_history(path)?,
        None => Vec::new(),
    };
    let prompt = compose(caption, &cues, query, &turns)?;
    println!("{}", prompt.text);
    Ok(())
}

fn cmd_evaluate(dataset: &Path, predictions: &Path, task: Option<Task>) -> Result<(), Failure> {
    let records = read_jsonl(dataset)?;
    let predictions = load_predictions(predictions)?;
    let report = evaluate(&records, &predictions, task)?;
    if report.coverage.missing_predictions > 0 {
        eprintln!(
            "warning: {} of {} scored records had no prediction and were scored as unparseable",
            report.coverage.missing_predictions, report.coverage.evaluated
        );
    }
    emit_json(&report);
    Ok(())
}

fn cmd_stats(dataset: &Path) -> Result<(), Failure> {
    let records = read_jsonl(dataset)?;
    emit_json(&DatasetStats::of(&records));
    Ok(())
}

fn load_image_tensor(path: &Path) -> Result<FeatureTensor, Failure> {
    let dynamic = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(source) if source.kind() == std::io::ErrorKind::NotFound => {
            Failure::io(format!("file not found: {}", path.display()))
        }
        other => Failure {
            code: 1,
            message: format!("{}: {other}", path.display()),
        },
    })?;
    let rgb = dynamic.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let mut data = vec![0.0f64; 3 * h * w];
    for (x, y, pixel) in rgb.enumerate_pixels() {
        for c in 0..3 {
            data[(c * h + y as usize) * w + x as usize] = pixel.0[c] as f64 / 255.0;
        }
    }
    Ok(FeatureTensor::from_data(3, h, w, data)?)
}

#[derive(Serialize)]
struct ShapeReport {
    channels: usize,
    height: usize,
    width: usize,
}

#[derive(Serialize)]
struct DemoReport {
    seed: u64,
    threshold: f64,
    pyramid_strides: [usize; 4],
    pyramid: Vec<ShapeReport>,
    decoded: ShapeReport,
    mask: DemoMaskReport,
    changed_components: usize,
    regions: Vec<&'static str>,
}

#[derive(Serialize)]
struct DemoMaskReport {
    height: usize,
    width: usize,
    min: f64,
    max: f64,
    mean: f64,
    changed_pixels: usize,
}

fn cmd_vision_demo(
    before: &Path,
    after: &Path,
    zero_head: bool,
    common: &CommonOpts,
) -> Result<(), Failure> {
    let config = resolve_config(common)?;
    let img1 = load_image_tensor(before)?;
    let img2 = load_image_tensor(after)?;
    let mut params = ParamSet::seeded(config.seed, config.vision_config())?;
    if zero_head {
        params.head = ConvKernel::zeros(1, params.config.decoder_channels, 1);
    }

    let pyramid = stub_encode(&img1, &params)?;
    let shapes: Vec<ShapeReport> = pyramid
        .levels()
        .iter()
        .map(|l| ShapeReport {
            channels: l.channels(),
            height: l.height(),
            width: l.width(),
        })
        .collect();

    let (prob, label) = forward_fine_grained(&img1, &img2, &params, config.threshold)?;
    let decoded = ShapeReport {
        channels: params.config.decoder_channels,
        height: img1.height() / 2,
        width: img1.width() / 2,
    };

    let data = prob.data();
    let changed_pixels = label.labels().iter().filter(|&&v| v != 0).count();
    // The binarized mask stores its single "changed" class under code 1.
    let components = connected_components_filtered(
        &label,
        ChangeCategory::Road,
        config.connectivity,
        config.min_area,
    );
    let mut regions: Vec<GridRegion> = components
        .iter()
        .map(|i| {
            region_of(i.centroid.0, i.centroid.1, label.width(), label.height())
                .expect("centroid lies inside the mask")
        })
        .collect();
    regions.sort();
    regions.dedup();

    emit_json(&DemoReport {
        seed: config.seed,
        threshold: config.threshold,
        pyramid_strides: PYRAMID_STRIDES,
        pyramid: shapes,
        decoded,
        mask: DemoMaskReport {
            height: prob.height(),
            width: prob.width(),
            min: data.iter().copied().fold(f64::INFINITY, f64::min),
            max: data.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: data.iter().sum::<f64>() / data.len() as f64,
            changed_pixels,
        },
        changed_components: components.len(),
        regions: regions.into_iter().map(GridRegion::name).collect(),
    });
    Ok(())
}
