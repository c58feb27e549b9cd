//! COCO-format ingestion and report / series / bin serialization.
//!
//! Ground truth is a COCO annotation document (`images`, `annotations`,
//! `categories`, boxes as `[x, y, w, h]`). Detections are a COCO results
//! array of `{image_id, category_id, bbox, score}`. All text output is UTF-8
//! with `\n` line endings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::metrics::{BinSet, CalibrationValues, MetricReport, PopulationCounts};
use crate::model::{BoundingBox, ClassId, ConfidenceBags, Detection, EvalConfig, GroundTruth, ImageId};
use crate::perturbation::PerturbationSeries;

/// Ground truth and lookup tables loaded from an annotation document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetBundle {
    pub ground_truths: Vec<GroundTruth>,
    pub categories: BTreeMap<ClassId, String>,
    pub images: Vec<ImageId>,
    /// Annotations skipped because they were flagged `iscrowd`.
    pub crowd_skipped: usize,
}

impl DatasetBundle {
    pub fn has_image(&self, id: ImageId) -> bool {
        self.images.binary_search(&id).is_ok()
    }

    pub fn has_category(&self, id: ClassId) -> bool {
        self.categories.contains_key(&id)
    }
}

/// How detections referencing unknown images or categories are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Referential {
    /// Reject the file.
    #[default]
    Strict,
    /// Skip the entry with a warning.
    Lenient,
}

#[derive(Deserialize)]
struct CocoDocument {
    images: Vec<CocoImage>,
    annotations: Vec<CocoAnnotation>,
    categories: Vec<CocoCategory>,
}

#[derive(Deserialize)]
struct CocoImage {
    id: u64,
}

#[derive(Deserialize)]
struct CocoAnnotation {
    #[serde(default)]
    id: Option<u64>,
    image_id: u64,
    category_id: u32,
    bbox: [f64; 4],
    #[serde(default)]
    iscrowd: u8,
}

#[derive(Deserialize)]
struct CocoCategory {
    id: u32,
    name: String,
}

#[derive(Deserialize)]
struct CocoResult {
    image_id: u64,
    category_id: u32,
    bbox: [f64; 4],
    score: f64,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key_path = e.path().to_string();
        Error::Malformed {
            path: path.to_path_buf(),
            key_path,
            message: e.into_inner().to_string(),
        }
    })
}

fn bbox_from(raw: [f64; 4]) -> Option<BoundingBox> {
    BoundingBox::new(raw[0], raw[1], raw[2], raw[3]).ok()
}

/// Loads a COCO annotation document.
pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<DatasetBundle> {
    let path = path.as_ref();
    parse_ground_truth(&read_text(path)?, path)
}

/// Parses a COCO annotation document; `path` is used for error context only.
pub fn parse_ground_truth(text: &str, path: &Path) -> Result<DatasetBundle> {
    let doc: CocoDocument = parse_json(text, path)?;

    let mut images: Vec<ImageId> = doc.images.iter().map(|i| ImageId(i.id)).collect();
    images.sort_unstable();
    images.dedup();
    let categories: BTreeMap<ClassId, String> = doc
        .categories
        .into_iter()
        .map(|c| (ClassId(c.id), c.name))
        .collect();

    let mut bundle = DatasetBundle {
        ground_truths: Vec::with_capacity(doc.annotations.len()),
        categories,
        images,
        crowd_skipped: 0,
    };

    for (index, ann) in doc.annotations.iter().enumerate() {
        let context = match ann.id {
            Some(id) => format!("annotations[{index}] (id {id})"),
            None => format!("annotations[{index}]"),
        };
        let image_id = ImageId(ann.image_id);
        if !bundle.has_image(image_id) {
            return Err(Error::UnknownImage {
                path: path.to_path_buf(),
                context,
                image_id: ann.image_id,
            });
        }
        let class_id = ClassId(ann.category_id);
        if !bundle.has_category(class_id) {
            return Err(Error::UnknownCategory {
                path: path.to_path_buf(),
                context,
                category_id: ann.category_id,
            });
        }
        if ann.iscrowd != 0 {
            bundle.crowd_skipped += 1;
            continue;
        }
        let bbox = bbox_from(ann.bbox).ok_or_else(|| Error::InvalidAnnotationBox {
            path: path.to_path_buf(),
            context,
            bbox: ann.bbox,
        })?;
        bundle.ground_truths.push(GroundTruth::new(image_id, class_id, bbox));
    }

    if bundle.crowd_skipped > 0 {
        log::warn!(
            "{}: skipped {} crowd annotations",
            path.display(),
            bundle.crowd_skipped
        );
    }
    Ok(bundle)
}

/// Loads a COCO detection-results array, checking references against `bundle`.
pub fn load_detections(path: impl AsRef<Path>, bundle: &DatasetBundle, mode: Referential) -> Result<Vec<Detection>> {
    let path = path.as_ref();
    parse_detections(&read_text(path)?, path, bundle, mode)
}

/// Parses a COCO detection-results array; `path` is used for error context only.
pub fn parse_detections(text: &str, path: &Path, bundle: &DatasetBundle, mode: Referential) -> Result<Vec<Detection>> {
    let raw: Vec<CocoResult> = parse_json(text, path)?;
    let mut out = Vec::with_capacity(raw.len());
    let mut skipped = 0usize;
    for (index, r) in raw.into_iter().enumerate() {
        if !(0.0..=1.0).contains(&r.score) {
            return Err(Error::ScoreOutOfRange {
                path: path.to_path_buf(),
                index,
                score: r.score,
            });
        }
        let bbox = bbox_from(r.bbox).ok_or_else(|| Error::InvalidAnnotationBox {
            path: path.to_path_buf(),
            context: format!("detection entry {index}"),
            bbox: r.bbox,
        })?;
        let image_id = ImageId(r.image_id);
        let class_id = ClassId(r.category_id);
        let reference_error = if !bundle.has_image(image_id) {
            Some(Error::UnknownImage {
                path: path.to_path_buf(),
                context: format!("detection entry {index}"),
                image_id: r.image_id,
            })
        } else if !bundle.has_category(class_id) {
            Some(Error::UnknownCategory {
                path: path.to_path_buf(),
                context: format!("detection entry {index}"),
                category_id: r.category_id,
            })
        } else {
            None
        };
        if let Some(err) = reference_error {
            match mode {
                Referential::Strict => return Err(err),
                Referential::Lenient => {
                    log::warn!("skipping: {err}");
                    skipped += 1;
                    continue;
                }
            }
        }
        out.push(Detection::new(image_id, class_id, bbox, r.score)?);
    }
    if skipped > 0 {
        log::warn!("{}: skipped {skipped} detections with unknown references", path.display());
    }
    Ok(out)
}

/// Report output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

const REPORT_CSV_HEADER: &str = "mode,iou_threshold,bin_count,conf_filter,map,qgc,sgc,egce,dece,\
qgc_avg,sgc_avg,egce_avg,dece_avg,n,tp,fp,fn,binned_tp,binned_fp";

pub fn report_to_json(report: &MetricReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn report_from_json(text: &str) -> Result<MetricReport> {
    parse_json(text, Path::new("<report>"))
}

/// One header row and one data row. An undefined mAP is an empty field.
pub fn report_to_csv(report: &MetricReport) -> String {
    let c = &report.config;
    let (a, v, n) = (&report.absolute, &report.averaged, &report.counts);
    let map = report.map.map(|m| m.to_string()).unwrap_or_default();
    format!(
        "{REPORT_CSV_HEADER}\n{},{},{},{},{map},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        c.reporting_mode,
        c.iou_threshold,
        c.bin_count,
        c.conf_filter,
        a.qgc,
        a.sgc,
        a.egce,
        a.dece,
        v.qgc,
        v.sgc,
        v.egce,
        v.dece,
        n.n,
        n.tp,
        n.fp,
        n.fn_count,
        n.binned_tp,
        n.binned_fp,
    )
}

fn csv_error(message: impl Into<String>) -> Error {
    Error::Malformed {
        path: PathBuf::from("<report.csv>"),
        key_path: String::new(),
        message: message.into(),
    }
}

/// Parses the output of [`report_to_csv`].
pub fn report_from_csv(text: &str) -> Result<MetricReport> {
    let mut lines = text.lines();
    if lines.next() != Some(REPORT_CSV_HEADER) {
        return Err(csv_error("unexpected header"));
    }
    let row = lines.next().ok_or_else(|| csv_error("missing data row"))?;
    let fields: Vec<&str> = row.split(',').collect();
    if fields.len() != REPORT_CSV_HEADER.split(',').count() {
        return Err(csv_error(format!("expected 19 fields, found {}", fields.len())));
    }
    fn num<T: std::str::FromStr>(s: &str) -> Result<T> {
        s.parse().map_err(|_| csv_error(format!("bad number `{s}`")))
    }
    let f = |i: usize| num::<f64>(fields[i]);
    let u = |i: usize| num::<u64>(fields[i]);
    Ok(MetricReport {
        config: EvalConfig {
            reporting_mode: fields[0].parse()?,
            iou_threshold: f(1)?,
            bin_count: num(fields[2])?,
            conf_filter: f(3)?,
        },
        map: if fields[4].is_empty() { None } else { Some(f(4)?) },
        absolute: CalibrationValues {
            qgc: f(5)?,
            sgc: f(6)?,
            egce: f(7)?,
            dece: f(8)?,
        },
        averaged: CalibrationValues {
            qgc: f(9)?,
            sgc: f(10)?,
            egce: f(11)?,
            dece: f(12)?,
        },
        counts: PopulationCounts {
            n: u(13)?,
            tp: u(14)?,
            fp: u(15)?,
            fn_count: u(16)?,
            binned_tp: u(17)?,
            binned_fp: u(18)?,
        },
        warnings: Vec::new(),
    })
}

pub fn write_report(report: &MetricReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let text = match format {
        ReportFormat::Json => report_to_json(report)?,
        ReportFormat::Csv => report_to_csv(report),
    };
    write_text(path.as_ref(), &text)
}

/// Formats `x` with `digits` significant digits, like C's `%.*g`.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let precision = digits.max(1) - 1;
    let sci = format!("{:.*e}", precision, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (precision as i32 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const SERIES_CSV_HEADER: &str = "fraction,qgc,sgc,egce,dece,n,tp,fp,fn";

/// Plot-ready CSV of averaged metrics, rows in ascending fraction.
pub fn series_to_csv(series: &PerturbationSeries) -> String {
    let mut rows: Vec<&(f64, MetricReport)> = series.points.iter().collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = String::from(SERIES_CSV_HEADER);
    out.push('\n');
    for (fraction, report) in rows {
        let v = &report.averaged;
        let c = &report.counts;
        let g = |x: f64| format_significant(x, 6);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            g(*fraction),
            g(v.qgc),
            g(v.sgc),
            g(v.egce),
            g(v.dece),
            c.n,
            c.tp,
            c.fp,
            c.fn_count
        );
    }
    out
}

pub fn write_series(series: &PerturbationSeries, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &series_to_csv(series))
}

pub const BINS_CSV_HEADER: &str = "bin_index,lower,upper,count_tp,count_fp,conf,prec";

/// Per-bin diagnostics for reliability diagrams. Empty bins leave `conf` and `prec` blank.
pub fn bins_to_csv(set: &BinSet) -> String {
    let mut out = String::from(BINS_CSV_HEADER);
    out.push('\n');
    for (i, bin) in set.bins().iter().enumerate() {
        let index = i + 1;
        let (lower, upper) = set.bounds(index);
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{index},{lower},{upper},{},{},{},{}",
            bin.tp.len(),
            bin.fp.len(),
            opt(bin.confidence()),
            opt(bin.precision())
        );
    }
    out
}

pub fn write_bins(set: &BinSet, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &bins_to_csv(set))
}

/// Writes bags as JSON `{"tp": [...], "fp": [...], "fn_count": n}`.
pub fn save_bags(bags: &ConfidenceBags, path: impl AsRef<Path>) -> Result<()> {
    let mut s = serde_json::to_string(bags)?;
    s.push('\n');
    write_text(path.as_ref(), &s)
}

pub fn load_bags(path: impl AsRef<Path>) -> Result<ConfidenceBags> {
    let path = path.as_ref();
    let bags: ConfidenceBags = parse_json(&read_text(path)?, path)?;
    // Deserialization bypasses the constructor's range check.
    ConfidenceBags::new(bags.tp().to_vec(), bags.fp().to_vec(), bags.fn_count())
}
