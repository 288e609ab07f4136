//! Image–text–contour triplet manifests built from mask datasets.
//!
//! A build writes `out_dir/<source>/<class_name>/<image_stem>.png` contour
//! maps, `out_dir/manifest.jsonl` (one [`TripletRecord`] per line) and
//! `out_dir/manifest.meta.json` (class table and build parameters).
//! Relative paths inside a manifest resolve against the manifest's directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::m2c::{mask_to_contour, ClassSpec, ClassTable, Connectivity};
use crate::metrics::with_pool;
use crate::raster::{load_mask, save_contour};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const META_FILE: &str = "manifest.meta.json";
const IMAGE_EXTENSIONS: [&str; 7] = ["png", "jpg", "jpeg", "tif", "tiff", "bmp", "webp"];

/// The bare template `"Edge of all {name}s"`, with no irregular plurals.
pub fn prompt_for(class_name: &str) -> Result<String> {
    PromptTemplate::literal().render(class_name)
}

/// `"Edge of all {plural}"`, where the plural is `name + "s"` unless the
/// override table says otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub plural_overrides: BTreeMap<String, String>,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        let plural_overrides = [
            ("grass", "grass"),
            ("water", "water"),
            ("vegetation", "vegetation"),
            ("farmland", "farmland"),
            ("clutter", "clutter"),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        Self { plural_overrides }
    }
}

impl PromptTemplate {
    pub fn literal() -> Self {
        Self {
            plural_overrides: BTreeMap::new(),
        }
    }

    pub fn render(&self, class_name: &str) -> Result<String> {
        if class_name.trim().is_empty() {
            return Err(Error::Class("empty class name".into()));
        }
        Ok(match self.plural_overrides.get(class_name) {
            Some(plural) => format!("Edge of all {plural}"),
            None => format!("Edge of all {class_name}s"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    #[default]
    Train,
    Val,
    Test,
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?} (train|val|test)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripletRecord {
    pub image_path: String,
    pub prompt: String,
    pub class_name: String,
    pub class_index: u8,
    pub contour_path: String,
    pub source_dataset: String,
    pub split: Split,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_override: Option<String>,
}

impl TripletRecord {
    pub fn image_stem(&self) -> String {
        Path::new(&self.image_path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }
}

/// Parameters a manifest was built with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildInfo {
    pub toolkit_version: String,
    pub connectivity: Connectivity,
    pub source_dataset: String,
    pub split: Split,
    pub ignore_index: Option<u8>,
    pub prompt_template: PromptTemplate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ManifestMeta {
    class_table: ClassTable,
    created_with: BuildInfo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub records: Vec<TripletRecord>,
    pub class_table: ClassTable,
    pub created_with: BuildInfo,
}

fn meta_path(manifest: &Path) -> PathBuf {
    manifest.with_file_name(META_FILE)
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl Manifest {
    /// Reads `manifest.jsonl` and its metadata sidecar.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let records = read_records(path)?;
        let mp = meta_path(path);
        let text = fs::read_to_string(&mp).map_err(|e| Error::io(&mp, e))?;
        let meta: ManifestMeta =
            serde_json::from_str(&text).map_err(|e| Error::Json { path: mp, source: e })?;
        Ok(Self {
            records,
            class_table: meta.class_table,
            created_with: meta.created_with,
        })
    }

    /// Writes the JSONL manifest and sidecar into `dir`, returning the
    /// manifest path.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let dir = dir.as_ref();
        let path = dir.join(MANIFEST_FILE);
        let mut buf = Vec::new();
        for r in &self.records {
            serde_json::to_writer(&mut buf, r).map_err(|e| Error::Json {
                path: path.clone(),
                source: e,
            })?;
            buf.push(b'\n');
        }
        fs::write(&path, &buf).map_err(|e| Error::io(&path, e))?;
        let meta = ManifestMeta {
            class_table: self.class_table.clone(),
            created_with: self.created_with.clone(),
        };
        let mp = meta_path(&path);
        let mut text = serde_json::to_string_pretty(&meta)
            .map_err(|e| Error::Json { path: mp.clone(), source: e })?;
        text.push('\n');
        fs::write(&mp, text).map_err(|e| Error::io(&mp, e))?;
        Ok(path)
    }

    pub fn stats(&self) -> Composition {
        stats(&self.records)
    }
}

/// Strictly parses every line of a JSONL manifest.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<TripletRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| {
                Error::Invalid(format!("{}:{}: {e}", path.display(), i + 1))
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildOptions {
    pub connectivity: Connectivity,
    /// Default provenance tag; a non-empty [`ClassSpec::source_dataset`]
    /// takes precedence.
    pub source_dataset: String,
    pub split: Split,
    pub ignore_index: Option<u8>,
    pub prompt_template: PromptTemplate,
    pub workers: Option<usize>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            connectivity: Connectivity::Four,
            source_dataset: "custom".into(),
            split: Split::Train,
            ignore_index: None,
            prompt_template: PromptTemplate::default(),
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileError {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildOutcome {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    /// `(image_stem, class_index)` pairs with no foreground pixels.
    pub skipped: Vec<(String, u8)>,
    pub errors: Vec<FileError>,
}

fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if path.is_file() && is_image {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn source_for<'a>(c: &'a ClassSpec, opts: &'a BuildOptions) -> &'a str {
    if c.source_dataset.is_empty() {
        &opts.source_dataset
    } else {
        &c.source_dataset
    }
}

fn check_path_component(what: &str, s: &str) -> Result<()> {
    if s.is_empty() || s == "." || s == ".." || s.contains(['/', '\\']) {
        return Err(Error::Invalid(format!("{what} {s:?} is not a valid directory name")));
    }
    Ok(())
}

struct ImageResult {
    records: Vec<TripletRecord>,
    skipped: Vec<(String, u8)>,
    error: Option<FileError>,
}

fn convert_image(
    image: &Path,
    masks_dir: &Path,
    table: &ClassTable,
    out_dir: &Path,
    opts: &BuildOptions,
) -> ImageResult {
    let mut res = ImageResult {
        records: Vec::new(),
        skipped: Vec::new(),
        error: None,
    };
    let stem = image
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let fail = |path: &Path, message: String| FileError {
        path: path.display().to_string(),
        message,
    };
    let mask_path = masks_dir.join(format!("{stem}.png"));
    if !mask_path.is_file() {
        res.error = Some(fail(&mask_path, format!("no mask for image {}", image.display())));
        return res;
    }
    let mask = match load_mask(&mask_path, opts.ignore_index) {
        Ok(m) => m,
        Err(e) => {
            res.error = Some(fail(&mask_path, e.to_string()));
            return res;
        }
    };
    let image_path = match image.canonicalize() {
        Ok(p) => p.display().to_string(),
        Err(e) => {
            res.error = Some(fail(image, e.to_string()));
            return res;
        }
    };
    for class in table.classes() {
        if mask.count(class.index) == 0 {
            res.skipped.push((stem.clone(), class.index));
            continue;
        }
        let outcome = (|| -> Result<TripletRecord> {
            let contour = mask_to_contour(&mask, class.index, opts.connectivity)?;
            let source = source_for(class, opts);
            let rel = format!("{source}/{}/{stem}.png", class.name);
            let dest = out_dir.join(&rel);
            if let Some(parent) = dest.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            save_contour(&contour, &dest)?;
            let prompt = match &class.prompt_override {
                Some(p) => p.clone(),
                None => opts.prompt_template.render(&class.name)?,
            };
            Ok(TripletRecord {
                image_path: image_path.clone(),
                prompt,
                class_name: class.name.clone(),
                class_index: class.index,
                contour_path: rel,
                source_dataset: source.to_string(),
                split: opts.split,
                prompt_override: class.prompt_override.clone(),
            })
        })();
        match outcome {
            Ok(r) => res.records.push(r),
            Err(e) => {
                res.error = Some(fail(&mask_path, e.to_string()));
                res.records.clear();
                return res;
            }
        }
    }
    res
}

/// Converts every `(image, class)` pair with foreground into a triplet.
///
/// Per-image failures (missing or unreadable masks) are collected in
/// [`BuildOutcome::errors`] while the remaining images are still converted;
/// only failures affecting the whole build return `Err`.
pub fn build_manifest(
    images_dir: impl AsRef<Path>,
    masks_dir: impl AsRef<Path>,
    class_table: &ClassTable,
    out_dir: impl AsRef<Path>,
    opts: &BuildOptions,
) -> Result<BuildOutcome> {
    let (images_dir, masks_dir, out_dir) =
        (images_dir.as_ref(), masks_dir.as_ref(), out_dir.as_ref());
    check_path_component("source dataset", &opts.source_dataset)?;
    for c in class_table.classes() {
        check_path_component("class name", &c.name)?;
        check_path_component("source dataset", source_for(c, opts))?;
    }
    let images = list_images(images_dir)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let results: Vec<ImageResult> = with_pool(opts.workers, || {
        images
            .par_iter()
            .map(|img| convert_image(img, masks_dir, class_table, out_dir, opts))
            .collect()
    })?;

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        records.extend(r.records);
        skipped.extend(r.skipped);
        errors.extend(r.error);
    }
    let manifest = Manifest {
        records,
        class_table: class_table.clone(),
        created_with: BuildInfo {
            toolkit_version: crate::VERSION.to_string(),
            connectivity: opts.connectivity,
            source_dataset: opts.source_dataset.clone(),
            split: opts.split,
            ignore_index: opts.ignore_index,
            prompt_template: opts.prompt_template.clone(),
        },
    };
    let manifest_path = manifest.write(out_dir)?;
    Ok(BuildOutcome {
        manifest,
        manifest_path,
        skipped,
        errors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Share {
    pub name: String,
    pub count: usize,
    pub percent: f64,
}

/// Sample counts and percentages per source, per class and per
/// (source, class) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    pub total: usize,
    pub per_source: Vec<Share>,
    pub per_class: Vec<Share>,
    pub per_source_class: Vec<Share>,
}

pub fn stats(records: &[TripletRecord]) -> Composition {
    let total = records.len();
    let shares = |keys: Vec<String>| -> Vec<Share> {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for k in keys {
            *counts.entry(k).or_default() += 1;
        }
        counts
            .into_iter()
            .map(|(name, count)| Share {
                name,
                count,
                percent: 100.0 * count as f64 / total as f64,
            })
            .collect()
    };
    Composition {
        total,
        per_source: shares(records.iter().map(|r| r.source_dataset.clone()).collect()),
        per_class: shares(records.iter().map(|r| r.class_name.clone()).collect()),
        per_source_class: shares(
            records
                .iter()
                .map(|r| format!("{}/{}", r.source_dataset, r.class_name))
                .collect(),
        ),
    }
}

impl Composition {
    /// Plain-text table with counts and one-decimal percentages.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let width = self
            .per_source
            .iter()
            .chain(&self.per_class)
            .chain(&self.per_source_class)
            .map(|s| s.name.chars().count())
            .max()
            .unwrap_or(0)
            .max(12);
        for (title, rows) in [
            ("source", &self.per_source),
            ("class", &self.per_class),
            ("source/class", &self.per_source_class),
        ] {
            let _ = writeln!(out, "{title:<width$}  {:>8}  {:>7}", "samples", "percent");
            for s in rows {
                let _ = writeln!(out, "{:<width$}  {:>8}  {:>6.1}%", s.name, s.count, s.percent);
            }
            let _ = writeln!(out);
        }
        let _ = writeln!(out, "{:<width$}  {:>8}", "total", self.total);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Schema,
    MissingFile,
    DuplicateKey,
    TemplateMismatch,
    UnknownClass,
    Metadata,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// 1-based manifest line, 0 for file-level problems.
    pub line: usize,
    pub kind: ViolationKind,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {:?}: {}", self.line, self.kind, self.message)
    }
}

/// Checks schema, referenced files, duplicate `(image_path, class_index)`
/// keys, prompt/template consistency and class-table membership.
pub fn validate_manifest(path: impl AsRef<Path>) -> Result<Vec<Violation>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    let mut push = |line, kind, message: String| out.push(Violation { line, kind, message });

    let mp = meta_path(path);
    let meta: Option<ManifestMeta> = match fs::read_to_string(&mp) {
        Ok(t) => match serde_json::from_str(&t) {
            Ok(m) => Some(m),
            Err(e) => {
                push(0, ViolationKind::Metadata, format!("{}: {e}", mp.display()));
                None
            }
        },
        Err(_) => {
            push(0, ViolationKind::Metadata, format!("missing {}", mp.display()));
            None
        }
    };
    let template = meta
        .as_ref()
        .map(|m| m.created_with.prompt_template.clone())
        .unwrap_or_default();

    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TripletRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                push(n, ViolationKind::Schema, e.to_string());
                continue;
            }
        };
        for (field, p) in [("image_path", &rec.image_path), ("contour_path", &rec.contour_path)] {
            if !resolve(base, p).is_file() {
                push(n, ViolationKind::MissingFile, format!("{field} {p} does not exist"));
            }
        }
        if !seen.insert((rec.image_path.clone(), rec.class_index)) {
            push(
                n,
                ViolationKind::DuplicateKey,
                format!("duplicate ({}, {})", rec.image_path, rec.class_index),
            );
        }
        let expected = match &rec.prompt_override {
            Some(p) => Ok(p.clone()),
            None => template.render(&rec.class_name),
        };
        match expected {
            Ok(exp) if exp == rec.prompt => {}
            Ok(exp) => push(
                n,
                ViolationKind::TemplateMismatch,
                format!("prompt {:?}, expected {exp:?}", rec.prompt),
            ),
            Err(e) => push(n, ViolationKind::Schema, e.to_string()),
        }
        if let Some(m) = &meta {
            match m.class_table.get(rec.class_index) {
                None => push(
                    n,
                    ViolationKind::UnknownClass,
                    format!("class index {} not in class table", rec.class_index),
                ),
                Some(c) if c.name != rec.class_name => push(
                    n,
                    ViolationKind::UnknownClass,
                    format!(
                        "class {} is named {:?} in the table, record says {:?}",
                        rec.class_index, c.name, rec.class_name
                    ),
                ),
                Some(_) => {}
            }
        }
    }
    Ok(out)
}

/// Writes `records` as JSON Lines; used for hand-assembled manifests.
pub fn write_records(path: impl AsRef<Path>, records: &[TripletRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        writeln!(f, "{line}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
