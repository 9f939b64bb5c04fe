//! Font discovery, alphabets and glyph outlines.
//!
//! A catalog holds one [`FontRecord`] per font face found under a directory.
//! Faces of the same family are linked so that a bold or italic request on a
//! regular face uses the real bold/italic face when one was installed, and a
//! synthesized one otherwise.

mod language;
mod outline;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

pub use language::{known_languages, language_codepoints};
pub use outline::{BBox, Outline, Point, SYNTHETIC_BOLD_STRENGTH, SYNTHETIC_ITALIC_SHEAR};

use outline::FlatteningBuilder;

/// Languages supported by fewer faces than this are not offered.
pub const MIN_FONTS_PER_LANGUAGE: usize = 10;

/// Fonts shipped with the crate, resolved at compile time.
pub const BUNDLED_FONT_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../assets/fonts");

/// Blacklist shipped with the generator.
pub const DEFAULT_BLACKLIST: &str = include_str!("../../../../assets/blacklist.txt");

#[derive(Debug, Error)]
pub enum FontError {
    #[error("font directory {0} does not exist")]
    MissingDirectory(PathBuf),
    #[error("no loadable fonts under {0}")]
    NoFonts(PathBuf),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown font `{0}`")]
    UnknownFont(String),
    #[error("unknown language `{0}`")]
    UnknownLanguage(String),
    #[error("language `{language}` has {fonts} usable fonts, fewer than the required {MIN_FONTS_PER_LANGUAGE}")]
    LanguageExcluded { language: String, fonts: usize },
    #[error("font `{font}` has no glyph for {codepoint:?}")]
    MissingGlyph { font: String, codepoint: char },
}

/// Sibling faces of the same family, by record id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceVariants {
    pub bold: Option<String>,
    pub italic: Option<String>,
    pub bold_italic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FontRecord {
    /// `"{family} {style}"`, unique within a catalog.
    pub id: String,
    pub path: PathBuf,
    /// Face index inside a collection file; 0 for plain font files.
    pub face_index: u32,
    pub family: String,
    pub style: String,
    pub is_bold: bool,
    pub is_italic: bool,
    pub supports_bold: bool,
    pub supports_italic: bool,
    /// Languages whose complete alphabet the face covers.
    pub languages: BTreeSet<String>,
    pub blacklisted: bool,
    pub variants: FaceVariants,
}

/// Codepoints of one language together with the faces able to draw all of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    pub language: String,
    /// Canonical order; the class index of a symbol is its position here.
    pub codepoints: Vec<char>,
    /// Eligible font ids, sorted.
    pub fonts: Vec<String>,
}

impl Alphabet {
    pub fn class_of(&self, c: char) -> Option<usize> {
        self.codepoints.binary_search(&c).ok()
    }
}

/// A glyph ready for rendering.
#[derive(Debug, Clone)]
pub struct Glyph {
    pub outline: Outline,
    pub bbox: BBox,
    /// Record id of the face the outline came from.
    pub face: String,
    pub synthetic_bold: bool,
    pub synthetic_italic: bool,
}

#[derive(Debug, Serialize)]
pub struct CatalogSummary<'a> {
    pub font_dir: &'a Path,
    pub fonts: usize,
    pub blacklisted: usize,
    pub languages: BTreeMap<String, usize>,
    pub warnings: &'a [String],
    pub records: &'a [FontRecord],
}

/// Immutable set of loaded faces.
#[derive(Debug)]
pub struct FontCatalog {
    font_dir: PathBuf,
    records: Vec<FontRecord>,
    blobs: Vec<Arc<[u8]>>,
    index: HashMap<String, usize>,
    warnings: Vec<String>,
}

struct Candidate {
    record: FontRecord,
    blob: Arc<[u8]>,
}

/// Parses a blacklist: one font id per line, `#` starts a comment.
pub fn parse_blacklist(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect()
}

fn is_font_file(path: &Path) -> bool {
    matches!(
        path.extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref(),
        Some("ttf" | "otf" | "ttc" | "otc")
    )
}

fn face_name(face: &ttf_parser::Face<'_>, preferred: u16, fallback: u16) -> Option<String> {
    let pick = |id: u16| {
        let mut names: Vec<_> = face.names().into_iter().filter(|n| n.name_id == id).collect();
        // English (US) Windows names first.
        names.sort_by_key(|n| (n.language_id != 0x0409, n.platform_id as u8));
        names.into_iter().find_map(|n| n.to_string()).filter(|s| !s.trim().is_empty())
    };
    pick(preferred).or_else(|| pick(fallback)).map(|s| s.trim().to_owned())
}

fn covers(face: &ttf_parser::Face<'_>, codepoints: &[char]) -> bool {
    codepoints
        .iter()
        .all(|&c| matches!(face.glyph_index(c), Some(g) if g.0 != 0))
}

fn inspect_face(path: &Path, blob: &Arc<[u8]>, index: u32) -> Result<FontRecord, String> {
    let face = ttf_parser::Face::parse(blob, index).map_err(|e| e.to_string())?;
    let family = face_name(&face, 16, 1).ok_or("no family name")?;
    let style = face_name(&face, 17, 2).unwrap_or_else(|| "Regular".to_owned());
    let languages = known_languages()
        .filter(|code| {
            language_codepoints(code).is_some_and(|cps| covers(&face, &cps))
        })
        .map(str::to_owned)
        .collect();
    Ok(FontRecord {
        id: format!("{family} {style}"),
        path: path.to_path_buf(),
        face_index: index,
        family,
        style,
        is_bold: face.is_bold() || face.weight().to_number() >= 600,
        is_italic: face.is_italic() || face.is_oblique(),
        supports_bold: false,
        supports_italic: false,
        languages,
        blacklisted: false,
        variants: FaceVariants::default(),
    })
}

impl FontCatalog {
    /// Loads every parseable face under `font_dir`. Unparseable files become
    /// warnings. Faces named in `blacklist` are loaded but flagged.
    pub fn load(font_dir: &Path, blacklist: &BTreeSet<String>) -> Result<Self, FontError> {
        if !font_dir.is_dir() {
            return Err(FontError::MissingDirectory(font_dir.to_path_buf()));
        }
        let mut files: Vec<PathBuf> = WalkDir::new(font_dir)
            .follow_links(true)
            .into_iter()
            .filter_map(Result::ok)
            .filter(|e| e.file_type().is_file() && is_font_file(e.path()))
            .map(|e| e.into_path())
            .collect();
        files.sort();

        let mut warnings = Vec::new();
        let mut candidates = Vec::new();
        for path in files {
            let bytes = fs::read(&path).map_err(|source| FontError::Io { path: path.clone(), source })?;
            let blob: Arc<[u8]> = bytes.into();
            let faces = ttf_parser::fonts_in_collection(&blob).unwrap_or(1);
            for index in 0..faces {
                match inspect_face(&path, &blob, index) {
                    Ok(record) => candidates.push(Candidate { record, blob: blob.clone() }),
                    Err(e) => warnings.push(format!("{}#{index}: {e}", path.display())),
                }
            }
        }
        if candidates.is_empty() {
            return Err(FontError::NoFonts(font_dir.to_path_buf()));
        }

        candidates.sort_by(|a, b| {
            (&a.record.id, &a.record.path, a.record.face_index)
                .cmp(&(&b.record.id, &b.record.path, b.record.face_index))
        });
        let mut records = Vec::with_capacity(candidates.len());
        let mut blobs = Vec::with_capacity(candidates.len());
        for c in candidates {
            if records.last().is_some_and(|r: &FontRecord| r.id == c.record.id) {
                warnings.push(format!(
                    "duplicate font id `{}` at {}, keeping the first",
                    c.record.id,
                    c.record.path.display()
                ));
                continue;
            }
            records.push(c.record);
            blobs.push(c.blob);
        }

        link_variants(&mut records);
        for r in &mut records {
            r.blacklisted = blacklist.contains(&r.id);
        }
        for w in &warnings {
            log::warn!("{w}");
        }
        let index = records.iter().enumerate().map(|(i, r)| (r.id.clone(), i)).collect();
        Ok(Self { font_dir: font_dir.to_path_buf(), records, blobs, index, warnings })
    }

    /// Loads with a blacklist file; `None` uses [`DEFAULT_BLACKLIST`].
    pub fn load_with_blacklist_file(font_dir: &Path, blacklist: Option<&Path>) -> Result<Self, FontError> {
        let text = match blacklist {
            Some(p) => fs::read_to_string(p).map_err(|source| FontError::Io { path: p.to_path_buf(), source })?,
            None => DEFAULT_BLACKLIST.to_owned(),
        };
        Self::load(font_dir, &parse_blacklist(&text))
    }

    pub fn font_dir(&self) -> &Path {
        &self.font_dir
    }

    /// All records sorted by id.
    pub fn records(&self) -> &[FontRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn eligible(&self) -> impl Iterator<Item = &FontRecord> {
        self.records.iter().filter(|r| !r.blacklisted)
    }

    pub fn get(&self, id: &str) -> Option<&FontRecord> {
        self.index.get(id).map(|&i| &self.records[i])
    }

    fn face(&self, id: &str) -> Result<(usize, ttf_parser::Face<'_>), FontError> {
        let &i = self.index.get(id).ok_or_else(|| FontError::UnknownFont(id.to_owned()))?;
        let face = ttf_parser::Face::parse(&self.blobs[i], self.records[i].face_index)
            .map_err(|_| FontError::UnknownFont(id.to_owned()))?;
        Ok((i, face))
    }

    /// Whether `id` has a non-empty glyph for every codepoint in `cps`, and no
    /// two codepoints share a glyph (fonts drawing placeholder boxes fail this).
    fn draws_all(&self, id: &str, cps: &[char]) -> bool {
        let Ok((_, face)) = self.face(id) else { return false };
        if !covers(&face, cps) {
            return false;
        }
        let mut seen = std::collections::HashSet::with_capacity(cps.len());
        cps.iter().all(|&c| {
            let gid = face.glyph_index(c).expect("covered");
            seen.insert(gid.0) && face.glyph_bounding_box(gid).is_some()
        })
    }

    /// The alphabet of `language`, cut to its first `max_symbols` codepoints,
    /// with the sorted ids of non-blacklisted faces drawing all of them, cut
    /// to the first `max_fonts`.
    pub fn alphabet(
        &self,
        language: &str,
        max_symbols: Option<usize>,
        max_fonts: Option<usize>,
    ) -> Result<Alphabet, FontError> {
        let mut codepoints =
            language_codepoints(language).ok_or_else(|| FontError::UnknownLanguage(language.to_owned()))?;
        if let Some(k) = max_symbols {
            codepoints.truncate(k);
        }
        let mut fonts: Vec<String> = self
            .eligible()
            .filter(|r| self.draws_all(&r.id, &codepoints))
            .map(|r| r.id.clone())
            .collect();
        if fonts.len() < MIN_FONTS_PER_LANGUAGE {
            return Err(FontError::LanguageExcluded { language: language.to_owned(), fonts: fonts.len() });
        }
        if let Some(k) = max_fonts {
            fonts.truncate(k);
        }
        Ok(Alphabet { language: language.to_owned(), codepoints, fonts })
    }

    /// Every language meeting the font threshold under the given caps.
    pub fn available_languages(&self, max_symbols: Option<usize>, max_fonts: Option<usize>) -> Vec<Alphabet> {
        known_languages()
            .filter_map(|l| self.alphabet(l, max_symbols, max_fonts).ok())
            .collect()
    }

    fn raw_outline(&self, id: &str, c: char) -> Result<Outline, FontError> {
        let (_, face) = self.face(id)?;
        let missing = || FontError::MissingGlyph { font: id.to_owned(), codepoint: c };
        let gid = face.glyph_index(c).filter(|g| g.0 != 0).ok_or_else(missing)?;
        let upem = f64::from(face.units_per_em());
        let mut builder = FlatteningBuilder::new(upem);
        face.outline_glyph(gid, &mut builder).ok_or_else(missing)?;
        let outline = builder.finish(upem);
        if outline.is_empty() {
            return Err(missing());
        }
        Ok(outline)
    }

    /// Outline of `c` in font `id`. Bold and italic use the family's real
    /// faces when installed and synthesize the style otherwise.
    pub fn glyph_outline(&self, id: &str, c: char, bold: bool, italic: bool) -> Result<Glyph, FontError> {
        let record = self.get(id).ok_or_else(|| FontError::UnknownFont(id.to_owned()))?;
        let want_bold = bold && !record.is_bold;
        let want_italic = italic && !record.is_italic;
        let v = &record.variants;
        let mut attempts: Vec<(&str, bool, bool)> = Vec::new();
        if want_bold && want_italic {
            if let Some(f) = &v.bold_italic {
                attempts.push((f, false, false));
            }
            if let Some(f) = &v.bold {
                attempts.push((f, false, true));
            }
            if let Some(f) = &v.italic {
                attempts.push((f, true, false));
            }
        } else if want_bold {
            if let Some(f) = &v.bold {
                attempts.push((f, false, false));
            }
        } else if want_italic {
            if let Some(f) = &v.italic {
                attempts.push((f, false, false));
            }
        }
        attempts.push((id, want_bold, want_italic));

        let mut last_err = None;
        for (face, synth_bold, synth_italic) in attempts {
            match self.raw_outline(face, c) {
                Ok(mut outline) => {
                    if synth_italic {
                        outline = outline.sheared(SYNTHETIC_ITALIC_SHEAR);
                    }
                    if synth_bold {
                        let strength = outline.units_per_em * SYNTHETIC_BOLD_STRENGTH;
                        outline = outline.emboldened(strength);
                    }
                    let bbox = outline.bbox().expect("non-empty outline");
                    return Ok(Glyph {
                        outline,
                        bbox,
                        face: face.to_owned(),
                        synthetic_bold: synth_bold,
                        synthetic_italic: synth_italic,
                    });
                }
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.expect("at least one attempt"))
    }

    /// First eligible face (by id) with a glyph for `c`.
    pub fn face_with_glyph(&self, c: char) -> Option<&FontRecord> {
        self.eligible().find(|r| self.raw_outline(&r.id, c).is_ok())
    }

    pub fn summary(&self) -> CatalogSummary<'_> {
        let mut languages = BTreeMap::new();
        for code in known_languages() {
            let n = self.eligible().filter(|r| r.languages.contains(code)).count();
            languages.insert(code.to_owned(), n);
        }
        CatalogSummary {
            font_dir: &self.font_dir,
            fonts: self.records.len(),
            blacklisted: self.records.iter().filter(|r| r.blacklisted).count(),
            languages,
            warnings: &self.warnings,
            records: &self.records,
        }
    }
}

fn link_variants(records: &mut [FontRecord]) {
    let mut families: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        families.entry(r.family.clone()).or_default().push(i);
    }
    for members in families.values() {
        for &i in members {
            let find = |bold: bool, italic: bool| {
                members
                    .iter()
                    .map(|&j| &records[j])
                    .find(|r| r.is_bold == bold && r.is_italic == italic)
                    .map(|r| r.id.clone())
            };
            let (b, it) = (records[i].is_bold, records[i].is_italic);
            let variants = FaceVariants {
                bold: if b { None } else { find(true, it) },
                italic: if it { None } else { find(b, true) },
                bold_italic: if b || it { None } else { find(true, true) },
            };
            let r = &mut records[i];
            r.supports_bold = r.is_bold || variants.bold.is_some();
            r.supports_italic = r.is_italic || variants.italic.is_some();
            r.variants = variants;
        }
    }
}
