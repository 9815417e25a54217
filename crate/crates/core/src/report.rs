//! Batch evaluation over a dataset directory and rendering of the comparison
//! report.
//!
//! A dataset root holds one subdirectory per scene. Each scene directory
//! contains `original.<png|jpg|jpeg>`, any number of method-named enhanced
//! images sharing the original's dimensions, an optional `annotations.json`
//! (LabelMe subset) and an optional `reference_chart.json`. Cell failures are
//! collected per cell and never abort the batch.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checker::{evaluate_checker, parse_annotations, CheckerReference, PatchAnnotation};
use crate::config::MetricConfig;
use crate::error::{Error, Result};
use crate::image::{load_image, resize_bilinear, ImageBuffer};
use crate::iqa::{entropy, mse_psnr, qu, ssim, visible_edge_count, Psnr};
use crate::nr::{ccf, uciqe, uiqm};

/// Identifier of a measure the batch driver can compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureId {
    Uciqe,
    Uiqm,
    Ccf,
    De2000,
    Phi,
    Mse,
    Psnr,
    Ssim,
    Qu,
    Entropy,
    Edges,
}

/// Whether larger or smaller values of a measure indicate better quality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    HigherBetter,
    LowerBetter,
}

impl MeasureId {
    pub const ALL: [MeasureId; 11] = [
        MeasureId::Uciqe,
        MeasureId::Uiqm,
        MeasureId::Ccf,
        MeasureId::De2000,
        MeasureId::Phi,
        MeasureId::Mse,
        MeasureId::Psnr,
        MeasureId::Ssim,
        MeasureId::Qu,
        MeasureId::Entropy,
        MeasureId::Edges,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MeasureId::Uciqe => "uciqe",
            MeasureId::Uiqm => "uiqm",
            MeasureId::Ccf => "ccf",
            MeasureId::De2000 => "de2000",
            MeasureId::Phi => "phi",
            MeasureId::Mse => "mse",
            MeasureId::Psnr => "psnr",
            MeasureId::Ssim => "ssim",
            MeasureId::Qu => "qu",
            MeasureId::Entropy => "entropy",
            MeasureId::Edges => "edges",
        }
    }

    /// Error measures are lower-better, quality measures higher-better.
    pub fn polarity(&self) -> Polarity {
        match self {
            MeasureId::De2000 | MeasureId::Phi | MeasureId::Mse => Polarity::LowerBetter,
            _ => Polarity::HigherBetter,
        }
    }

    /// Measures computed against the scene's original image.
    pub fn is_full_reference(&self) -> bool {
        matches!(self, MeasureId::Mse | MeasureId::Psnr | MeasureId::Ssim | MeasureId::Qu)
    }

    /// Measures computed through the colour-checker protocol.
    pub fn needs_checker(&self) -> bool {
        matches!(self, MeasureId::De2000 | MeasureId::Phi)
    }

    fn decimals(&self) -> usize {
        match self {
            MeasureId::Ssim | MeasureId::Qu => 4,
            MeasureId::Edges => 0,
            _ => 2,
        }
    }

    /// Parses a comma-separated measure list.
    pub fn parse_list(list: &str) -> Result<Vec<MeasureId>> {
        let mut out = Vec::new();
        for token in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let id = token
                .parse::<MeasureId>()
                .map_err(|_| Error::Layout(format!("unknown measure {token:?}")))?;
            if !out.contains(&id) {
                out.push(id);
            }
        }
        if out.is_empty() {
            return Err(Error::Layout("no measures requested".into()));
        }
        Ok(out)
    }
}

impl FromStr for MeasureId {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        MeasureId::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or(())
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One scene directory of the dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub name: String,
    pub original: PathBuf,
    /// Method name and image path, sorted by name.
    pub methods: Vec<(String, PathBuf)>,
    pub annotations: Option<PathBuf>,
    pub chart: Option<PathBuf>,
}

/// Scanned dataset directory.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetLayout {
    pub root: PathBuf,
    pub scenes: Vec<Scene>,
}

fn is_image_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| {
            let e = e.to_ascii_lowercase();
            e == "png" || e == "jpg" || e == "jpeg"
        })
        .unwrap_or(false)
}

impl DatasetLayout {
    /// Scans `root` for scene subdirectories. A directory with image files
    /// must contain an `original.*` image; directories without images are
    /// ignored.
    pub fn scan(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref();
        if !root.is_dir() {
            return Err(Error::Layout(format!("{} is not a directory", root.display())));
        }
        let mut scenes = Vec::new();
        let mut entries: Vec<_> = std::fs::read_dir(root)
            .map_err(|source| Error::FileRead { path: root.to_path_buf(), source })?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_dir())
            .collect();
        entries.sort();

        for dir in entries {
            let name = dir
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or_default()
                .to_string();
            let mut images: Vec<PathBuf> = std::fs::read_dir(&dir)
                .map_err(|source| Error::FileRead { path: dir.clone(), source })?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.is_file() && is_image_file(p))
                .collect();
            if images.is_empty() {
                continue;
            }
            images.sort();

            let mut original = None;
            let mut methods: Vec<(String, PathBuf)> = Vec::new();
            for img in images {
                let stem = img
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or_default()
                    .to_string();
                if stem.eq_ignore_ascii_case("original") {
                    original = Some(img);
                } else {
                    if methods.iter().any(|(m, _)| *m == stem) {
                        return Err(Error::Layout(format!(
                            "scene {name:?} has two images for method {stem:?}"
                        )));
                    }
                    methods.push((stem, img));
                }
            }
            let original = original.ok_or_else(|| {
                Error::Layout(format!("scene {name:?} has images but no original.*"))
            })?;
            methods.sort();

            let optional = |file: &str| {
                let p = dir.join(file);
                p.is_file().then_some(p)
            };
            scenes.push(Scene {
                name,
                original,
                methods,
                annotations: optional("annotations.json"),
                chart: optional("reference_chart.json"),
            });
        }
        Ok(Self { root: root.to_path_buf(), scenes })
    }
}

/// A score value; PSNR of identical images carries the infinity sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Score {
    Finite(f64),
    Infinite,
}

impl Score {
    fn as_ord(&self) -> f64 {
        match self {
            Score::Finite(v) => *v,
            Score::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for Score {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Score::Finite(v) => s.serialize_f64(*v),
            Score::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Score;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> std::result::Result<Score, E> {
                Ok(Score::Finite(v))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<Score, E> {
                Ok(Score::Finite(v as f64))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<Score, E> {
                Ok(Score::Finite(v as f64))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<Score, E> {
                if v == "inf" {
                    Ok(Score::Infinite)
                } else {
                    Err(E::custom(format!("unexpected score string {v:?}")))
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// One (scene, column, measure) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Cell {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub score: Option<Score>,
    /// Benign reason the cell is not computed (no error).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
    /// Failure reason; any errored cell makes the CLI exit nonzero.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    #[serde(default)]
    pub best_in_row: bool,
    #[serde(default)]
    pub worse_than_original: bool,
}

impl Cell {
    fn score(v: f64) -> Self {
        Cell { score: Some(Score::Finite(v)), ..Default::default() }
    }

    fn note(reason: impl Into<String>) -> Self {
        Cell { note: Some(reason.into()), ..Default::default() }
    }

    fn error(reason: impl fmt::Display) -> Self {
        Cell { error: Some(reason.to_string()), ..Default::default() }
    }
}

/// Per-measure cells of one scene, aligned with the report's `measures`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    pub measure: MeasureId,
    pub cells: Vec<Cell>,
}

/// All rows of one scene. `columns[0]` is always `"original"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneReport {
    pub scene: String,
    pub columns: Vec<String>,
    pub rows: Vec<MeasureRow>,
}

/// Identifies the constants and options a report was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub constants_version: String,
    pub config_hash: String,
    pub preprocess_quarter: bool,
}

/// The scenes x methods x measures score matrix with its flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub provenance: Provenance,
    pub measures: Vec<MeasureId>,
    pub scenes: Vec<SceneReport>,
}

impl ComparisonReport {
    pub fn has_errors(&self) -> bool {
        self.scenes
            .iter()
            .flat_map(|s| &s.rows)
            .flat_map(|r| &r.cells)
            .any(|c| c.error.is_some())
    }
}

/// Batch evaluation options.
#[derive(Debug, Clone)]
pub struct EvaluateOptions {
    pub measures: Vec<MeasureId>,
    /// Quarter-size bilinear resize plus 8-bit conversion before scoring.
    pub preprocess_quarter: bool,
    /// Evaluate (scene, column) cells on the worker pool. The report is
    /// identical to a sequential run.
    pub parallel: bool,
    /// Chart used when a scene has no `reference_chart.json`.
    pub fallback_chart: Option<CheckerReference>,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        Self {
            measures: vec![MeasureId::Uciqe, MeasureId::Uiqm, MeasureId::Ccf],
            preprocess_quarter: false,
            parallel: true,
            fallback_chart: None,
        }
    }
}

struct SceneContext {
    original: Result<ImageBuffer>,
    annotations: Option<Result<Vec<PatchAnnotation>>>,
    chart: Option<Result<CheckerReference>>,
}

fn load_prepared(path: &Path, options: &EvaluateOptions) -> Result<ImageBuffer> {
    let img = load_image(path)?;
    if options.preprocess_quarter {
        Ok(resize_bilinear(&img, 0.25)?.to_u8_depth())
    } else {
        Ok(img)
    }
}

fn scene_context(scene: &Scene, config: &MetricConfig, options: &EvaluateOptions) -> SceneContext {
    let needs_checker = options.measures.iter().any(MeasureId::needs_checker);
    let annotations = needs_checker.then(|| {
        scene
            .annotations
            .as_ref()
            .ok_or_else(|| {
                Error::Layout(format!("scene {:?} has no annotations.json", scene.name))
            })
            .and_then(parse_annotations)
    });
    let chart = needs_checker.then(|| match &scene.chart {
        Some(path) => CheckerReference::load(path),
        None => Ok(options
            .fallback_chart
            .clone()
            .unwrap_or_else(CheckerReference::builtin)),
    });
    let _ = config;
    SceneContext {
        original: load_prepared(&scene.original, options),
        annotations,
        chart,
    }
}

fn checker_aggregate(
    measure: MeasureId,
    img: &ImageBuffer,
    ctx: &SceneContext,
    config: &MetricConfig,
) -> Cell {
    let annotations = match ctx.annotations.as_ref().expect("checker context") {
        Ok(a) => a,
        Err(e) => return Cell::error(e),
    };
    let chart = match ctx.chart.as_ref().expect("checker context") {
        Ok(c) => c,
        Err(e) => return Cell::error(e),
    };
    let scores = match evaluate_checker(img, annotations, chart, None, config) {
        Ok(s) => s,
        Err(e) => return Cell::error(e),
    };
    match measure {
        MeasureId::De2000 => {
            let mean = scores.iter().map(|s| s.delta_e00).sum::<f64>() / scores.len() as f64;
            Cell::score(mean)
        }
        MeasureId::Phi => {
            let phis: Vec<f64> = scores.iter().filter_map(|s| s.phi_degrees).collect();
            if phis.is_empty() {
                Cell::note("no achromatic patches annotated")
            } else {
                Cell::score(phis.iter().sum::<f64>() / phis.len() as f64)
            }
        }
        _ => unreachable!("not a checker measure"),
    }
}

fn measure_column(
    scene: &Scene,
    ctx: &SceneContext,
    column: usize,
    config: &MetricConfig,
    options: &EvaluateOptions,
) -> Vec<Cell> {
    let is_original = column == 0;
    let img = if is_original {
        match &ctx.original {
            Ok(img) => img.clone(),
            Err(e) => return vec![Cell::error(e); options.measures.len()],
        }
    } else {
        match load_prepared(&scene.methods[column - 1].1, options) {
            Ok(img) => img,
            Err(e) => return vec![Cell::error(e); options.measures.len()],
        }
    };

    options
        .measures
        .iter()
        .map(|&measure| {
            if measure.is_full_reference() {
                if is_original {
                    return Cell::note("reference image");
                }
                let reference = match &ctx.original {
                    Ok(r) => r,
                    Err(e) => return Cell::error(format!("original unavailable: {e}")),
                };
                return match measure {
                    MeasureId::Mse => match mse_psnr::<f64>(reference, &img) {
                        Ok((mse, _)) => Cell::score(mse),
                        Err(e) => Cell::error(e),
                    },
                    MeasureId::Psnr => match mse_psnr::<f64>(reference, &img) {
                        Ok((_, Psnr::Infinite)) => {
                            Cell { score: Some(Score::Infinite), ..Default::default() }
                        }
                        Ok((_, Psnr::Db(db))) => Cell::score(db),
                        Err(e) => Cell::error(e),
                    },
                    MeasureId::Ssim => match ssim::<f64>(reference, &img, &config.ssim) {
                        Ok(v) => Cell::score(v),
                        Err(e) => Cell::error(e),
                    },
                    MeasureId::Qu => match qu::<f64>(reference, &img, &config.ssim) {
                        Ok(q) => Cell::score(q.value),
                        Err(e) => Cell::error(e),
                    },
                    _ => unreachable!(),
                };
            }
            if measure.needs_checker() {
                return checker_aggregate(measure, &img, ctx, config);
            }
            match measure {
                MeasureId::Uciqe => match uciqe::<f64>(&img, config) {
                    Ok(b) => Cell::score(b.value),
                    Err(e) => Cell::error(e),
                },
                MeasureId::Uiqm => match uiqm::<f64>(&img, config) {
                    Ok(b) => Cell::score(b.value),
                    Err(e) => Cell::error(e),
                },
                MeasureId::Ccf => match ccf::<f64>(&img, config) {
                    Ok(b) => Cell::score(b.value),
                    Err(e) => Cell::error(e),
                },
                MeasureId::Entropy => match entropy::<f64>(&img) {
                    Ok(v) => Cell::score(v),
                    Err(e) => Cell::error(e),
                },
                MeasureId::Edges => match visible_edge_count::<f64>(&img, config.edge_threshold) {
                    Ok((count, _)) => Cell::score(count as f64),
                    Err(e) => Cell::error(e),
                },
                _ => unreachable!(),
            }
        })
        .collect()
}

/// Applies the best-in-row and worse-than-original flags to one scene's rows,
/// honouring each measure's polarity. Ties are all flagged best.
pub fn apply_flags(scene: &mut SceneReport) {
    for row in &mut scene.rows {
        let polarity = row.measure.polarity();
        let mut best: Option<f64> = None;
        for cell in &row.cells {
            if let Some(score) = &cell.score {
                let v = score.as_ord();
                best = Some(match (best, polarity) {
                    (None, _) => v,
                    (Some(b), Polarity::HigherBetter) => b.max(v),
                    (Some(b), Polarity::LowerBetter) => b.min(v),
                });
            }
        }
        let original = row.cells.first().and_then(|c| c.score.as_ref()).map(Score::as_ord);
        for (i, cell) in row.cells.iter_mut().enumerate() {
            let Some(score) = &cell.score else { continue };
            let v = score.as_ord();
            cell.best_in_row = best == Some(v);
            if i > 0 {
                if let Some(orig) = original {
                    cell.worse_than_original = match polarity {
                        Polarity::HigherBetter => v < orig,
                        Polarity::LowerBetter => v > orig,
                    };
                }
            }
        }
    }
}

/// Evaluates the whole dataset into a comparison report.
pub fn evaluate_batch(
    layout: &DatasetLayout,
    config: &MetricConfig,
    options: &EvaluateOptions,
) -> Result<ComparisonReport> {
    if options.measures.is_empty() {
        return Err(Error::Layout("no measures requested".into()));
    }

    let contexts: Vec<SceneContext> = if options.parallel {
        layout
            .scenes
            .par_iter()
            .map(|s| scene_context(s, config, options))
            .collect()
    } else {
        layout
            .scenes
            .iter()
            .map(|s| scene_context(s, config, options))
            .collect()
    };

    let tasks: Vec<(usize, usize)> = layout
        .scenes
        .iter()
        .enumerate()
        .flat_map(|(si, s)| (0..=s.methods.len()).map(move |ci| (si, ci)))
        .collect();

    let compute = |&(si, ci): &(usize, usize)| {
        measure_column(&layout.scenes[si], &contexts[si], ci, config, options)
    };
    let columns: Vec<Vec<Cell>> = if options.parallel {
        tasks.par_iter().map(compute).collect()
    } else {
        tasks.iter().map(compute).collect()
    };

    let mut scenes = Vec::with_capacity(layout.scenes.len());
    let mut cursor = 0usize;
    for scene in &layout.scenes {
        let ncols = scene.methods.len() + 1;
        let mut names = Vec::with_capacity(ncols);
        names.push("original".to_string());
        names.extend(scene.methods.iter().map(|(m, _)| m.clone()));

        let mut rows: Vec<MeasureRow> = options
            .measures
            .iter()
            .map(|&measure| MeasureRow { measure, cells: Vec::with_capacity(ncols) })
            .collect();
        for col in &columns[cursor..cursor + ncols] {
            for (row, cell) in rows.iter_mut().zip(col) {
                row.cells.push(cell.clone());
            }
        }
        cursor += ncols;

        let mut report = SceneReport { scene: scene.name.clone(), columns: names, rows };
        apply_flags(&mut report);
        scenes.push(report);
    }

    Ok(ComparisonReport {
        provenance: Provenance {
            constants_version: config.constants.version.clone(),
            config_hash: config.hash(),
            preprocess_quarter: options.preprocess_quarter,
        },
        measures: options.measures.clone(),
        scenes,
    })
}

/// Output syntax for [`render_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

/// Renders a report. The output is byte-deterministic for a fixed report.
pub fn render_report(report: &ComparisonReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => render_markdown(report),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Json => {
            let mut out = serde_json::to_string_pretty(report).expect("report serializes");
            out.push('\n');
            out
        }
    }
}

fn format_score(cell: &Cell, measure: MeasureId) -> String {
    match (&cell.score, &cell.error) {
        (Some(Score::Finite(v)), _) => format!("{v:.prec$}", prec = measure.decimals()),
        (Some(Score::Infinite), _) => "inf".into(),
        (None, Some(_)) => "err".into(),
        (None, None) => "n/a".into(),
    }
}

fn render_markdown(report: &ComparisonReport) -> String {
    let mut out = String::new();
    out.push_str("# Quality comparison report\n\n");
    out.push_str(&format!(
        "- constants version: {}\n- config hash: {}\n- quarter-resize preprocessing: {}\n\n",
        report.provenance.constants_version,
        report.provenance.config_hash,
        if report.provenance.preprocess_quarter { "on" } else { "off" },
    ));
    out.push_str(
        "Legend: the best value in each row is bold; a trailing `!` marks a value \
         worse than the original; `n/a` is not computed; `err` failed.\n",
    );

    for &measure in &report.measures {
        // Column union across scenes, original first.
        let mut columns: Vec<String> = vec!["original".into()];
        for scene in &report.scenes {
            for name in &scene.columns {
                if !columns.contains(name) {
                    columns.push(name.clone());
                }
            }
        }
        let direction = match measure.polarity() {
            Polarity::HigherBetter => "higher is better",
            Polarity::LowerBetter => "lower is better",
        };
        out.push_str(&format!("\n## {measure} ({direction})\n\n"));
        out.push_str(&format!("| scene | {} |\n", columns.join(" | ")));
        out.push_str(&format!("|---|{}\n", "---:|".repeat(columns.len())));
        for scene in &report.scenes {
            let row = scene
                .rows
                .iter()
                .find(|r| r.measure == measure)
                .expect("rows align with measures");
            let mut line = format!("| {} |", scene.scene);
            for col in &columns {
                let cell = scene
                    .columns
                    .iter()
                    .position(|c| c == col)
                    .map(|i| &row.cells[i]);
                match cell {
                    None => line.push_str("  |"),
                    Some(cell) => {
                        let mut text = format_score(cell, measure);
                        if cell.best_in_row && cell.score.is_some() {
                            text = format!("**{text}**");
                        }
                        if cell.worse_than_original {
                            text.push('!');
                        }
                        line.push_str(&format!(" {text} |"));
                    }
                }
            }
            line.push('\n');
            out.push_str(&line);
        }
    }
    out
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn render_csv(report: &ComparisonReport) -> String {
    let mut out = String::from("scene,column,measure,value,best_in_row,worse_than_original,note,error\n");
    for scene in &report.scenes {
        for row in &scene.rows {
            for (column, cell) in scene.columns.iter().zip(&row.cells) {
                let value = match &cell.score {
                    Some(Score::Finite(v)) => format!("{v}"),
                    Some(Score::Infinite) => "inf".into(),
                    None => String::new(),
                };
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    csv_escape(&scene.scene),
                    csv_escape(column),
                    row.measure,
                    value,
                    cell.best_in_row,
                    cell.worse_than_original,
                    csv_escape(cell.note.as_deref().unwrap_or("")),
                    csv_escape(cell.error.as_deref().unwrap_or("")),
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene_with(measure: MeasureId, values: &[Option<f64>]) -> SceneReport {
        let mut scene = SceneReport {
            scene: "s".into(),
            columns: (0..values.len())
                .map(|i| if i == 0 { "original".into() } else { format!("m{i}") })
                .collect(),
            rows: vec![MeasureRow {
                measure,
                cells: values
                    .iter()
                    .map(|v| match v {
                        Some(v) => Cell::score(*v),
                        None => Cell::note("missing"),
                    })
                    .collect(),
            }],
        };
        apply_flags(&mut scene);
        scene
    }

    #[test]
    fn higher_better_flags() {
        // original 0.50, method A 0.70 (best), method B 0.40 (worse).
        let scene = scene_with(MeasureId::Uciqe, &[Some(0.5), Some(0.7), Some(0.4)]);
        let cells = &scene.rows[0].cells;
        assert!(!cells[0].best_in_row && !cells[0].worse_than_original);
        assert!(cells[1].best_in_row && !cells[1].worse_than_original);
        assert!(!cells[2].best_in_row && cells[2].worse_than_original);
    }

    #[test]
    fn lower_better_flags() {
        // errors: method A larger than original is worse, smallest is best.
        let scene = scene_with(MeasureId::De2000, &[Some(20.0), Some(25.0), Some(3.0)]);
        let cells = &scene.rows[0].cells;
        assert!(!cells[0].best_in_row);
        assert!(cells[1].worse_than_original && !cells[1].best_in_row);
        assert!(cells[2].best_in_row && !cells[2].worse_than_original);
    }

    #[test]
    fn ties_flag_all_best() {
        let scene = scene_with(MeasureId::Uiqm, &[Some(1.0), Some(2.0), Some(2.0)]);
        let cells = &scene.rows[0].cells;
        assert!(cells[1].best_in_row && cells[2].best_in_row);
    }

    #[test]
    fn unavailable_cells_do_not_participate() {
        let scene = scene_with(MeasureId::Uciqe, &[None, Some(0.4), None]);
        let cells = &scene.rows[0].cells;
        assert!(cells[1].best_in_row);
        assert!(!cells[1].worse_than_original, "no original to compare against");
    }

    #[test]
    fn equality_is_not_worse() {
        let scene = scene_with(MeasureId::Uciqe, &[Some(0.5), Some(0.5)]);
        assert!(!scene.rows[0].cells[1].worse_than_original);
    }

    #[test]
    fn markdown_marks_best_and_worse() {
        let scene = scene_with(MeasureId::Uciqe, &[Some(0.5), Some(0.7), Some(0.4)]);
        let report = ComparisonReport {
            provenance: Provenance {
                constants_version: "1".into(),
                config_hash: "deadbeef".into(),
                preprocess_quarter: false,
            },
            measures: vec![MeasureId::Uciqe],
            scenes: vec![scene],
        };
        let md = render_report(&report, ReportFormat::Markdown);
        assert!(md.contains("**0.70**"), "{md}");
        assert_eq!(md.matches("0.40!").count(), 1, "{md}");
        assert_eq!(md.matches("**").count() / 2, 1);
    }

    #[test]
    fn rendering_is_deterministic() {
        let scene = scene_with(MeasureId::Phi, &[Some(30.69), Some(0.23), Some(35.41)]);
        let report = ComparisonReport {
            provenance: Provenance {
                constants_version: "1".into(),
                config_hash: "cafe".into(),
                preprocess_quarter: true,
            },
            measures: vec![MeasureId::Phi],
            scenes: vec![scene],
        };
        for format in [ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::Json] {
            assert_eq!(render_report(&report, format), render_report(&report, format));
        }
    }

    #[test]
    fn empty_report_renders_valid_documents() {
        let report = ComparisonReport {
            provenance: Provenance {
                constants_version: "1".into(),
                config_hash: "0".into(),
                preprocess_quarter: false,
            },
            measures: vec![],
            scenes: vec![],
        };
        let md = render_report(&report, ReportFormat::Markdown);
        assert!(md.starts_with("# Quality comparison report"));
        let csv = render_report(&report, ReportFormat::Csv);
        assert_eq!(csv.lines().count(), 1);
        let json = render_report(&report, ReportFormat::Json);
        let back: ComparisonReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn json_round_trip_preserves_scores_and_sentinels() {
        let mut scene = scene_with(MeasureId::Psnr, &[Some(0.1234567890123), Some(48.13)]);
        scene.rows[0].cells[0].score = Some(Score::Infinite);
        apply_flags(&mut scene);
        let report = ComparisonReport {
            provenance: Provenance {
                constants_version: "1".into(),
                config_hash: "f00d".into(),
                preprocess_quarter: false,
            },
            measures: vec![MeasureId::Psnr],
            scenes: vec![scene],
        };
        let json = render_report(&report, ReportFormat::Json);
        let back: ComparisonReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn measure_list_parsing() {
        let ids = MeasureId::parse_list("uciqe, uiqm,ccf,de2000,phi,psnr,ssim,qu,entropy,edges").unwrap();
        assert_eq!(ids.len(), 10);
        assert!(MeasureId::parse_list("uciqe,bogus").is_err());
        assert!(MeasureId::parse_list("").is_err());
        assert_eq!(MeasureId::parse_list("mse,mse").unwrap(), vec![MeasureId::Mse]);
    }
}
