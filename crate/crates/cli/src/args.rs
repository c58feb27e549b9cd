use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use odcal_core::model::{DEFAULT_BIN_COUNT, DEFAULT_CONF_FILTER, DEFAULT_IOU_THRESHOLD};

/// Uncertainty-calibration evaluation for object detectors.
#[derive(Debug, Parser)]
#[command(name = "odcal", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Match detections to ground truth and report QGC, SGC, EGCE, D-ECE and mAP.
    Evaluate(EvaluateArgs),
    /// Inject synthetic TP/FP/FN entries into the matched bags and track averaged metrics.
    Perturb(PerturbArgs),
    /// Emit per-bin confidence/precision diagnostics as CSV.
    Bins(BinsArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// COCO annotation file.
    #[arg(long)]
    pub gt: PathBuf,
    /// COCO detection-results file.
    #[arg(long)]
    pub dets: PathBuf,
    /// Skip detections that reference unknown images or categories instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    /// IoU threshold for a detection to count as a true positive.
    #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD, value_parser = unit_interval)]
    pub iou: f64,
    /// Number of confidence bins for EGCE and D-ECE.
    #[arg(long, default_value_t = DEFAULT_BIN_COUNT, value_parser = positive_count)]
    pub bins: usize,
    /// Minimum confidence for entries to enter EGCE and D-ECE bins.
    #[arg(long, default_value_t = DEFAULT_CONF_FILTER, value_parser = half_open_unit)]
    pub conf_filter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Absolute,
    Averaged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Fp,
    Tp,
    Fn,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Reporting mode recorded in the report.
    #[arg(long, value_enum, default_value_t = Mode::Absolute)]
    pub mode: Mode,
    /// Report output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Kind of entry to inject.
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Confidence range `low,high` for injected entries (not allowed with `--kind fn`).
    #[arg(long, value_parser = conf_range)]
    pub conf_range: Option<(f64, f64)>,
    /// Injection fractions as `start:end:step`.
    #[arg(long, default_value = "0.05:1.0:0.05", value_parser = steps)]
    pub steps: (f64, f64, f64),
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Series CSV output path (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BinsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Bin CSV output path (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn real(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = real(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn half_open_unit(s: &str) -> Result<f64, String> {
    let v = real(s)?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1)"))
    }
}

fn positive_count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

fn conf_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("`{s}` is not of the form low,high"))?;
    Ok((unit_interval(a)?, unit_interval(b)?))
}

fn steps(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, end, step] = parts.as_slice() else {
        return Err(format!("`{s}` is not of the form start:end:step"));
    };
    let (start, end, step) = (real(start)?, real(end)?, real(step)?);
    if start < 0.0 || start > end || step <= 0.0 {
        return Err(format!("`{s}` needs 0 <= start <= end and step > 0"));
    }
    Ok((start, end, step))
}
