mod args;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use odcal_core::io::{self, DatasetBundle, Referential, ReportFormat};
use odcal_core::matching::{match_detections, MatchOutcome};
use odcal_core::metrics::{build_bins, evaluate, MetricReport};
use odcal_core::perturbation::{run_series, InjectionKind, PerturbationPlan};
use odcal_core::{EvalConfig, ReportingMode};

use args::{BinsArgs, Cli, Command, EvaluateArgs, Format, InputArgs, Kind, MetricArgs, Mode, PerturbArgs};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    // Usage errors exit with status 2 before any file is read.
    if let Command::Perturb(p) = &cli.command {
        check_perturb_flags(p);
    }

    let result = match &cli.command {
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Perturb(a) => cmd_perturb(a),
        Command::Bins(a) => cmd_bins(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn usage_error(kind: ErrorKind, message: String) -> ! {
    let mut cmd = Cli::command();
    cmd.build();
    let perturb = cmd
        .find_subcommand_mut("perturb")
        .expect("perturb subcommand exists");
    perturb.error(kind, message).exit()
}

fn check_perturb_flags(p: &PerturbArgs) {
    match (p.kind, p.conf_range) {
        (Kind::Fn, Some(_)) => usage_error(
            ErrorKind::ArgumentConflict,
            "--conf-range cannot be used with --kind fn".into(),
        ),
        (Kind::Fp | Kind::Tp, None) => usage_error(
            ErrorKind::MissingRequiredArgument,
            "--conf-range is required with --kind fp and --kind tp".into(),
        ),
        (_, Some((low, high))) if low > high => usage_error(
            ErrorKind::ValueValidation,
            format!("--conf-range low {low} exceeds high {high}"),
        ),
        _ => {}
    }
}

fn config(metric: &MetricArgs, mode: ReportingMode) -> EvalConfig {
    EvalConfig {
        iou_threshold: metric.iou,
        bin_count: metric.bins,
        conf_filter: metric.conf_filter,
        reporting_mode: mode,
    }
}

fn load_and_match(input: &InputArgs, config: &EvalConfig) -> Result<(DatasetBundle, MatchOutcome)> {
    let bundle = io::load_ground_truth(&input.gt).context("loading ground truth")?;
    let mode = if input.lenient { Referential::Lenient } else { Referential::Strict };
    let detections = io::load_detections(&input.dets, &bundle, mode).context("loading detections")?;
    let outcome = match_detections(&detections, &bundle.ground_truths, config.iou_threshold)?;
    Ok((bundle, outcome))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("writing to stdout"),
    }
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let mode = match a.mode {
        Mode::Absolute => ReportingMode::Absolute,
        Mode::Averaged => ReportingMode::Averaged,
    };
    let config = config(&a.metric, mode);
    let (bundle, outcome) = load_and_match(&a.input, &config)?;
    let report = evaluate(&outcome, &config)?;
    if let Some(path) = &a.out {
        let format = match a.format {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
        };
        io::write_report(&report, path, format)?;
    }
    print_summary(&report, &bundle);
    Ok(())
}

fn print_summary(report: &MetricReport, bundle: &DatasetBundle) {
    let c = &report.config;
    let n = &report.counts;
    println!(
        "images {}  categories {}  ground truths {}  (crowd skipped {})",
        bundle.images.len(),
        bundle.categories.len(),
        bundle.ground_truths.len(),
        bundle.crowd_skipped
    );
    println!(
        "IoU {}  bins {}  conf filter {}  mode {}",
        c.iou_threshold, c.bin_count, c.conf_filter, c.reporting_mode
    );
    println!();
    println!("{:<8}{:>16}{:>16}", "metric", "absolute", "averaged");
    let rows = [
        ("QGC", report.absolute.qgc, report.averaged.qgc),
        ("SGC", report.absolute.sgc, report.averaged.sgc),
        ("EGCE", report.absolute.egce, report.averaged.egce),
        ("D-ECE", report.absolute.dece, report.averaged.dece),
    ];
    for (name, abs, avg) in rows {
        println!("{name:<8}{abs:>16.6}{avg:>16.6}");
    }
    match report.map {
        Some(m) => println!("{:<8}{:>16.6}", "mAP", m),
        None => println!("{:<8}{:>16}", "mAP", "undefined"),
    }
    println!();
    println!(
        "TP {}  FP {}  FN {}  N {}  binned TP {}  binned FP {}",
        n.tp, n.fp, n.fn_count, n.n, n.binned_tp, n.binned_fp
    );
    for w in &report.warnings {
        println!("warning: {w}");
    }
}

fn cmd_perturb(a: &PerturbArgs) -> Result<()> {
    let config = config(&a.metric, ReportingMode::Averaged);
    let (_, outcome) = load_and_match(&a.input, &config)?;
    let kind = match a.kind {
        Kind::Fp => InjectionKind::Fp,
        Kind::Tp => InjectionKind::Tp,
        Kind::Fn => InjectionKind::Fn,
    };
    let (conf_low, conf_high) = a.conf_range.unwrap_or((0.0, 0.0));
    let (start_fraction, end_fraction, step) = a.steps;
    let plan = PerturbationPlan {
        kind,
        conf_low,
        conf_high,
        start_fraction,
        end_fraction,
        step,
        seed: a.seed,
    };
    let series = run_series(&outcome.bags, &plan, &config)?;
    write_output(a.out.as_deref(), &io::series_to_csv(&series))
}

fn cmd_bins(a: &BinsArgs) -> Result<()> {
    let config = config(&a.metric, ReportingMode::Absolute);
    let (_, outcome) = load_and_match(&a.input, &config)?;
    let set = build_bins(&outcome.bags, config.bin_count, config.conf_filter);
    write_output(a.out.as_deref(), &io::bins_to_csv(&set))
}
