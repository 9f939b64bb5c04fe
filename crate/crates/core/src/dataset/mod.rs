//! In-memory datasets, generation and file formats.
//!
//! Layout shared by both formats (names are fixed):
//!
//! | key | type | shape |
//! |-----|------|-------|
//! | `images` | u8 | N x H x W x 3 |
//! | `masks` | u8 | N x H x W |
//! | `attributes` | UTF-8 JSON | N |
//! | `labels/<name>` | i64 | N |
//! | `splits/{train,valid,test}` | u64 | any |
//! | `splits/<name>/{train,valid,test}` | u64 | any |
//! | `instance_ids` | u16 | N x H x W (scenes) |
//! | `instance_masks` | u8 | M x H x W (scenes) |
//! | `instance_offsets` | u64 | N + 1 (scenes) |
//!
//! The manifest is stored as JSON next to the arrays and in a
//! `<stem>.manifest.json` sidecar.

mod hdf5;
mod npz;
mod preview;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::attributes::AttributeSampler;
use crate::corrupt::{self, CorruptionSpec};
use crate::fonts::{Alphabet, FontCatalog};
use crate::partition::{iid_cut, PartitionError, PartitionResult};
use crate::recipe::{Plan, RecipeConfig, RecipeError};
use crate::render::Renderer;
use crate::rng::Substream;
use crate::scene::SceneComposer;

pub use preview::{dump_sample, preview, preview_size};

/// Version of the on-disk layout.
pub const FORMAT_VERSION: u32 = 1;
pub const GENERATOR_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Recipe(#[from] RecipeError),
    #[error("sample {index}: {message}")]
    Sample { index: usize, message: String },
    #[error("n_samples must be at least 1")]
    Empty,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: cannot tell the format from the extension (use .h5, .hdf5 or .npz)")]
    UnknownFormat { path: PathBuf },
    #[error("{path}: extension does not match format {format:?}")]
    FormatMismatch { path: PathBuf, format: Format },
    #[error("{path}: corrupt container: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("{0}")]
    Write(String),
    #[error("invalid container: {0}")]
    Invalid(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("preview: {0}")]
    Preview(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Hdf5,
    Npz,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "h5" | "hdf5" => Some(Format::Hdf5),
            "npz" => Some(Format::Npz),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Symbols,
    Scenes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub generator_version: String,
    pub created_unix: u64,
    pub master_seed: u64,
    pub recipe: String,
    pub n_samples: usize,
    pub kind: DatasetKind,
    /// Resolved recipe; enough to regenerate the payload.
    pub config: Json,
    /// Description of the attribute distributions actually used.
    pub sampler: Json,
    /// False when generated with caller-supplied functions.
    pub portable: bool,
    /// `[language, symbol]` of every class index.
    pub classes: Vec<(String, char)>,
    /// Font of every font label index.
    pub fonts: Vec<String>,
}

impl Manifest {
    /// Equality ignoring the creation time.
    pub fn same_content(&self, other: &Manifest) -> bool {
        let mut a = self.clone();
        a.created_unix = other.created_unix;
        &a == other
    }
}

/// Index sets of one partition.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SplitSets {
    pub train: Vec<u64>,
    pub valid: Vec<u64>,
    pub test: Vec<u64>,
    /// Strategy, parameters and attributes.
    pub info: Json,
}

impl SplitSets {
    pub fn sizes(&self) -> [usize; 3] {
        [self.train.len(), self.valid.len(), self.test.len()]
    }

    pub fn sets(&self) -> [(&'static str, &[u64]); 3] {
        [("train", &self.train), ("valid", &self.valid), ("test", &self.test)]
    }
}

impl From<&PartitionResult> for SplitSets {
    fn from(p: &PartitionResult) -> Self {
        let conv = |v: &[usize]| v.iter().map(|&i| i as u64).collect();
        SplitSets {
            train: conv(&p.train),
            valid: conv(&p.valid),
            test: conv(&p.test),
            info: json!({ "strategy": p.strategy, "params": p.params, "attributes": p.attributes }),
        }
    }
}

/// Per-scene instance masks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Instances {
    /// N x H x W; 0 background, k + 1 for instance k.
    pub ids: Vec<u16>,
    /// M x H x W, instances of scene i at `offsets[i]..offsets[i + 1]`.
    pub masks: Vec<u8>,
    pub offsets: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetContainer {
    pub height: usize,
    pub width: usize,
    pub images: Vec<u8>,
    pub masks: Vec<u8>,
    /// One JSON record per sample.
    pub attributes: Vec<String>,
    pub labels: BTreeMap<String, Vec<i64>>,
    pub instances: Option<Instances>,
    pub splits: SplitSets,
    pub named_splits: BTreeMap<String, SplitSets>,
    pub manifest: Manifest,
}

impl DatasetContainer {
    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let s = self.pixels() * 3;
        &self.images[i * s..(i + 1) * s]
    }

    pub fn mask(&self, i: usize) -> &[u8] {
        let s = self.pixels();
        &self.masks[i * s..(i + 1) * s]
    }

    pub fn record(&self, i: usize) -> Result<Json, DatasetError> {
        serde_json::from_str(&self.attributes[i])
            .map_err(|e| DatasetError::Invalid(format!("attribute record {i}: {e}")))
    }

    /// Checks the shape invariants.
    pub fn validate(&self) -> Result<(), DatasetError> {
        let n = self.len();
        let bad = |m: String| Err(DatasetError::Invalid(m));
        if n == 0 {
            return bad("no samples".into());
        }
        if self.images.len() != n * self.pixels() * 3 {
            return bad(format!("images hold {} bytes, expected {}", self.images.len(), n * self.pixels() * 3));
        }
        if self.masks.len() != n * self.pixels() {
            return bad(format!("masks hold {} bytes, expected {}", self.masks.len(), n * self.pixels()));
        }
        for (name, l) in &self.labels {
            if l.len() != n {
                return bad(format!("labels/{name} has {} entries, expected {n}", l.len()));
            }
        }
        let all = std::iter::once(("", &self.splits)).chain(self.named_splits.iter().map(|(k, v)| (k.as_str(), v)));
        for (name, s) in all {
            for (set, idx) in s.sets() {
                if let Some(&i) = idx.iter().find(|&&i| i as usize >= n) {
                    return bad(format!("split {name}/{set} holds index {i} >= {n}"));
                }
            }
        }
        if let Some(inst) = &self.instances {
            if inst.ids.len() != n * self.pixels() || inst.offsets.len() != n + 1 {
                return bad("instance arrays do not match the sample count".into());
            }
            let m = *inst.offsets.last().unwrap_or(&0) as usize;
            if inst.masks.len() != m * self.pixels() || inst.offsets.windows(2).any(|w| w[0] > w[1]) {
                return bad("instance offsets do not match the mask stack".into());
            }
        }
        if self.manifest.n_samples != n {
            return bad(format!("manifest says {} samples, container holds {n}", self.manifest.n_samples));
        }
        Ok(())
    }

    /// Equality of everything except the manifest creation time.
    pub fn same_content(&self, other: &DatasetContainer) -> bool {
        self.same_payload(other)
            && self.splits == other.splits
            && self.named_splits == other.named_splits
            && self.manifest.same_content(&other.manifest)
    }

    /// Equality of the generated arrays and records.
    pub fn same_payload(&self, other: &DatasetContainer) -> bool {
        self.height == other.height
            && self.width == other.width
            && self.images == other.images
            && self.masks == other.masks
            && self.attributes == other.attributes
            && self.labels == other.labels
            && self.instances == other.instances
    }

    /// Adds a named split. Names must not clash with the default sets.
    pub fn add_split(&mut self, name: &str, split: &PartitionResult) -> Result<(), DatasetError> {
        if name.is_empty() || matches!(name, "train" | "valid" | "test") || name.contains('/') {
            return Err(DatasetError::Invalid(format!("`{name}` cannot name a split")));
        }
        if !split.is_partition_of(self.len()) {
            return Err(DatasetError::Invalid("split does not partition the samples".into()));
        }
        self.named_splits.insert(name.to_owned(), SplitSets::from(split));
        Ok(())
    }

    /// Values of an attribute across samples. `path` is looked up in the
    /// record's `attributes` object first, then in the record itself; a
    /// dotted suffix indexes into arrays (`translation.0`).
    pub fn attribute_values(&self, path: &str) -> Result<Vec<Json>, DatasetError> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let rec = self.record(i)?;
            let v = lookup(rec.get("attributes").unwrap_or(&Json::Null), path)
                .or_else(|| lookup(&rec, path))
                .ok_or_else(|| DatasetError::UnknownAttribute(path.to_owned()))?;
            out.push(v.clone());
        }
        Ok(out)
    }

    /// Numeric attribute values.
    pub fn numeric_attribute(&self, path: &str) -> Result<Vec<f64>, DatasetError> {
        self.attribute_values(path)?
            .into_iter()
            .map(|v| v.as_f64().ok_or_else(|| DatasetError::Invalid(format!("`{path}` is not numeric"))))
            .collect()
    }

    pub fn write(&self, path: &Path, format: Option<Format>) -> Result<(), DatasetError> {
        self.validate()?;
        let detected = Format::from_path(path).ok_or_else(|| DatasetError::UnknownFormat { path: path.into() })?;
        if let Some(f) = format {
            if f != detected {
                return Err(DatasetError::FormatMismatch { path: path.into(), format: f });
            }
        }
        match detected {
            Format::Hdf5 => hdf5::write(self, path)?,
            Format::Npz => npz::write(self, path)?,
        }
        let sidecar = sidecar_path(path);
        let text = serde_json::to_string_pretty(&self.manifest).expect("serializable");
        std::fs::write(&sidecar, text).map_err(|source| DatasetError::Io { path: sidecar, source })
    }

    pub fn read(path: &Path) -> Result<Self, DatasetError> {
        if !path.exists() {
            return Err(DatasetError::Io {
                path: path.into(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
            });
        }
        let c = match Format::from_path(path).ok_or_else(|| DatasetError::UnknownFormat { path: path.into() })? {
            Format::Hdf5 => hdf5::read(path)?,
            Format::Npz => npz::read(path)?,
        };
        c.validate().map_err(|e| DatasetError::Corrupt { path: path.into(), message: e.to_string() })?;
        Ok(c)
    }
}

fn lookup<'a>(v: &'a Json, path: &str) -> Option<&'a Json> {
    let mut cur = v;
    for part in path.split('.') {
        cur = match cur {
            Json::Object(m) => m.get(part)?,
            Json::Array(a) => a.get(part.parse::<usize>().ok()?)?,
            _ => return None,
        };
    }
    Some(cur)
}

/// `<dir>/<stem>.manifest.json` next to a dataset file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.manifest.json"))
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn run_parallel<T: Send>(
    n: usize,
    workers: usize,
    f: impl Fn(usize) -> Result<T, String> + Sync + Send,
) -> Result<Vec<T>, DatasetError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| DatasetError::Pool(e.to_string()))?;
    let results: Vec<Result<T, String>> = pool.install(|| (0..n).into_par_iter().map(&f).collect());
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| r.map_err(|message| DatasetError::Sample { index, message }))
        .collect()
}

struct SymbolOut {
    image: Vec<u8>,
    mask: Vec<u8>,
    record: String,
    clean: i64,
    noisy: i64,
    font: i64,
}

/// Renders one sample of a symbol dataset.
pub struct SymbolPipeline<'c> {
    renderer: Renderer<'c>,
    sampler: AttributeSampler,
    corruption: CorruptionSpec,
    fonts: Vec<String>,
    recipe: String,
}

/// A sample of a symbol dataset with its bookkeeping.
#[derive(Debug, Clone)]
pub struct GeneratedSymbol {
    pub image: Vec<u8>,
    pub mask: Vec<u8>,
    pub record: Json,
    pub class: usize,
    pub noisy_label: usize,
}

impl<'c> SymbolPipeline<'c> {
    pub fn new(catalog: &'c FontCatalog, sampler: AttributeSampler, corruption: CorruptionSpec) -> Self {
        let fonts: BTreeSet<String> = sampler.alphabets().iter().flat_map(|a| a.fonts.iter().cloned()).collect();
        Self {
            renderer: Renderer::new(catalog),
            sampler,
            corruption,
            fonts: fonts.into_iter().collect(),
            recipe: String::new(),
        }
    }

    /// Recipe name written into every record.
    pub fn with_recipe(mut self, name: &str) -> Self {
        self.recipe = name.to_owned();
        self
    }

    pub fn sampler(&self) -> &AttributeSampler {
        &self.sampler
    }

    pub fn fonts(&self) -> &[String] {
        &self.fonts
    }

    /// Sample `index`: attributes, omission, render, pixel noise, label noise.
    pub fn generate(&self, seed: u64, index: u64) -> Result<GeneratedSymbol, String> {
        let stream = Substream::new(seed, index);
        let mut attrs = self.sampler.sample_stream(&stream).map_err(|e| e.to_string())?;
        let missing = corrupt::omit_symbol(&mut attrs, self.corruption.missing_p, &mut corrupt::missing_rng(&stream));
        let mut f = self
            .renderer
            .render_float(&attrs, self.corruption.occlusion.as_ref(), &stream)
            .map_err(|e| e.to_string())?;
        let pixel_noise = match self.corruption.pixel_noise {
            Some(p) => corrupt::corrupt_pixels(&mut f.image, p.p_image, p.sigma, &mut corrupt::pixel_rng(&stream)),
            None => false,
        };
        let class = self
            .sampler
            .class_of(&attrs.language, attrs.char)
            .ok_or_else(|| format!("{:?} is not in the {} alphabet", attrs.char, attrs.language))?;
        let noisy = corrupt::corrupt_label(
            class,
            self.sampler.n_classes(),
            self.corruption.label_noise_p,
            &mut corrupt::label_rng(&stream),
        );
        let record = json!({
            "index": index,
            "recipe": self.recipe,
            "generator_version": GENERATOR_VERSION,
            "class": class,
            "attributes": attrs,
            "label_noisy": noisy.label,
            "label_corrupted": noisy.resampled,
            "pixel_noise": pixel_noise,
            "missing": missing,
            "occluders": f.occluders,
        });
        Ok(GeneratedSymbol { image: f.image_u8(), mask: f.mask(), record, class, noisy_label: noisy.label })
    }

    fn font_label(&self, font: &str) -> i64 {
        self.fonts.binary_search_by(|f| f.as_str().cmp(font)).map(|i| i as i64).unwrap_or(-1)
    }
}

fn classes_of(alphabets: &[Alphabet]) -> Vec<(String, char)> {
    alphabets.iter().flat_map(|a| a.codepoints.iter().map(move |&c| (a.language.clone(), c))).collect()
}

/// Generates a dataset from a recipe. The result does not depend on `workers`.
pub fn generate_dataset(
    catalog: &FontCatalog,
    recipe: &RecipeConfig,
    n_samples: usize,
    master_seed: u64,
    workers: usize,
) -> Result<DatasetContainer, DatasetError> {
    if n_samples == 0 {
        return Err(DatasetError::Empty);
    }
    let mut config = recipe.clone();
    config.n_samples = Some(n_samples);
    config.seed = Some(master_seed);
    match recipe.plan(catalog)? {
        Plan::Symbols { sampler, corruption } => {
            generate_symbols(catalog, &config, sampler, corruption, n_samples, master_seed, workers)
        }
        Plan::Scenes { alphabet, spec } => {
            let renderer = Renderer::new(catalog);
            let composer = SceneComposer::new(&renderer, alphabet.clone(), spec)
                .map_err(|e| DatasetError::Invalid(e.to_string()))?;
            let scenes = run_parallel(n_samples, workers, |i| {
                composer.compose(master_seed, i as u64).map_err(|e| e.to_string())
            })?;
            let (h, w) = (config.resolution[0], config.resolution[1]);
            let mut c = empty_container(h, w, n_samples);
            let mut inst = Instances { offsets: vec![0], ..Default::default() };
            let mut clean = Vec::with_capacity(n_samples);
            let mut overlap = Vec::with_capacity(n_samples);
            let mut count = Vec::with_capacity(n_samples);
            for (i, s) in scenes.into_iter().enumerate() {
                c.images.extend_from_slice(&s.image);
                let mut union = vec![0u8; h * w];
                for m in &s.instance_masks {
                    for (u, &v) in union.iter_mut().zip(m) {
                        *u = (*u).max(v);
                    }
                    inst.masks.extend_from_slice(m);
                }
                c.masks.extend_from_slice(&union);
                inst.ids.extend_from_slice(&s.instance_ids);
                inst.offsets.push(inst.offsets.last().unwrap() + s.instance_masks.len() as u64);
                clean.push(s.target_count as i64);
                overlap.push(i64::from(s.overlap));
                count.push(s.symbols.len() as i64);
                let record = json!({
                    "index": i,
                    "recipe": config.name,
                    "generator_version": GENERATOR_VERSION,
                    "target": composer.spec().target,
                    "target_count": s.target_count,
                    "overlap": s.overlap,
                    "labels": s.labels(),
                    "points": s.points,
                    "symbols": s.symbols,
                });
                c.attributes.push(record.to_string());
            }
            c.labels.insert("clean".into(), clean);
            c.labels.insert("overlap".into(), overlap);
            c.labels.insert("symbols".into(), count);
            c.instances = Some(inst);
            c.splits = SplitSets::from(&iid_cut(n_samples, config.split_ratios, master_seed)?);
            c.manifest = Manifest {
                format_version: FORMAT_VERSION,
                generator_version: GENERATOR_VERSION.into(),
                created_unix: now_unix(),
                master_seed,
                recipe: config.name.clone(),
                n_samples,
                kind: DatasetKind::Scenes,
                config: config.to_json(),
                sampler: json!({ "scene": composer.spec() }),
                portable: true,
                classes: classes_of(std::slice::from_ref(&alphabet)),
                fonts: alphabet.fonts.clone(),
            };
            Ok(c)
        }
    }
}

fn empty_container(h: usize, w: usize, n: usize) -> DatasetContainer {
    DatasetContainer {
        height: h,
        width: w,
        images: Vec::with_capacity(n * h * w * 3),
        masks: Vec::with_capacity(n * h * w),
        attributes: Vec::with_capacity(n),
        labels: BTreeMap::new(),
        instances: None,
        splits: SplitSets::default(),
        named_splits: BTreeMap::new(),
        manifest: Manifest {
            format_version: FORMAT_VERSION,
            generator_version: GENERATOR_VERSION.into(),
            created_unix: 0,
            master_seed: 0,
            recipe: String::new(),
            n_samples: n,
            kind: DatasetKind::Symbols,
            config: Json::Null,
            sampler: Json::Null,
            portable: true,
            classes: Vec::new(),
            fonts: Vec::new(),
        },
    }
}

/// Generates a symbol dataset from an explicit sampler. `config` is recorded
/// in the manifest; it should describe how `sampler` was built.
pub fn generate_symbols(
    catalog: &FontCatalog,
    config: &RecipeConfig,
    sampler: AttributeSampler,
    corruption: CorruptionSpec,
    n_samples: usize,
    master_seed: u64,
    workers: usize,
) -> Result<DatasetContainer, DatasetError> {
    if n_samples == 0 {
        return Err(DatasetError::Empty);
    }
    let pipeline = SymbolPipeline::new(catalog, sampler, corruption).with_recipe(&config.name);
    let outs = run_parallel(n_samples, workers, |i| {
        let g = pipeline.generate(master_seed, i as u64)?;
        let font = g.record["attributes"]["font"].as_str().unwrap_or_default();
        Ok(SymbolOut {
            font: pipeline.font_label(font),
            image: g.image,
            mask: g.mask,
            record: g.record.to_string(),
            clean: g.class as i64,
            noisy: g.noisy_label as i64,
        })
    })?;
    let [h, w] = pipeline.sampler.resolution();
    let mut c = empty_container(h, w, n_samples);
    let mut clean = Vec::with_capacity(n_samples);
    let mut noisy = Vec::with_capacity(n_samples);
    let mut font = Vec::with_capacity(n_samples);
    for o in outs {
        c.images.extend_from_slice(&o.image);
        c.masks.extend_from_slice(&o.mask);
        c.attributes.push(o.record);
        clean.push(o.clean);
        noisy.push(o.noisy);
        font.push(o.font);
    }
    c.labels.insert("clean".into(), clean);
    c.labels.insert("noisy".into(), noisy);
    c.labels.insert("font".into(), font);
    c.splits = SplitSets::from(&iid_cut(n_samples, config.split_ratios, master_seed)?);
    let mut config = config.clone();
    config.n_samples = Some(n_samples);
    config.seed = Some(master_seed);
    c.manifest = Manifest {
        format_version: FORMAT_VERSION,
        generator_version: GENERATOR_VERSION.into(),
        created_unix: now_unix(),
        master_seed,
        recipe: config.name.clone(),
        n_samples,
        kind: DatasetKind::Symbols,
        config: config.to_json(),
        sampler: pipeline.sampler.describe(),
        portable: pipeline.sampler.is_portable(),
        classes: classes_of(pipeline.sampler.alphabets()),
        fonts: pipeline.fonts.clone(),
    };
    Ok(c)
}

/// Rebuilds a dataset from its manifest.
pub fn regenerate(catalog: &FontCatalog, manifest: &Manifest, workers: usize) -> Result<DatasetContainer, DatasetError> {
    if !manifest.portable {
        return Err(DatasetError::Invalid("dataset was generated with caller-supplied functions".into()));
    }
    let recipe: RecipeConfig = serde_json::from_value(manifest.config.clone())
        .map_err(|e| DatasetError::Invalid(format!("manifest config: {e}")))?;
    generate_dataset(catalog, &recipe, manifest.n_samples, manifest.master_seed, workers)
}
