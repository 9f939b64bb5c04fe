//! Latent attribute space and samplers.
//!
//! A sampler holds one distribution per attribute. Each attribute draws from
//! its own random stream (see [`crate::rng`]), so replacing the distribution
//! of one attribute leaves every other attribute of every sample unchanged.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::color::random_hsv;
use crate::fonts::Alphabet;
use crate::render::{
    GradientMode, PatternSpec, CAMOUFLAGE_LINE_COUNT, CAMOUFLAGE_LINE_WIDTH_32, CAMOUFLAGE_PALETTE_SIZE,
    MIN_RESOLUTION,
};
use crate::rng::Substream;

/// Constants of the default distributions.
pub mod defaults {
    pub const SCALE_MIN: f64 = 0.35;
    pub const SCALE_MAX: f64 = 0.9;
    pub const ROTATION_STD: f64 = 0.3;
    pub const ROTATION_LIMIT: f64 = std::f64::consts::FRAC_PI_3;
    pub const BOLD_P: f64 = 0.5;
    pub const ITALIC_P: f64 = 0.5;
    pub const TRANSLATION: [f64; 2] = [-1.0, 1.0];
    pub const SHADE_MIN_VALUE: f64 = 0.3;
    pub const RESOLUTION: [usize; 2] = [32, 32];
}

/// Attribute names accepted by [`AttributeSampler::with_override`].
pub const ATTRIBUTE_NAMES: [&str; 10] = [
    "language",
    "char",
    "font",
    "translation",
    "scale",
    "rotation",
    "bold",
    "italic",
    "foreground",
    "background",
];

/// Full latent description of one symbol image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolAttributes {
    pub char: char,
    pub font: String,
    pub language: String,
    pub translation: [f64; 2],
    pub scale: f64,
    pub rotation: f64,
    pub bold: bool,
    pub italic: bool,
    pub foreground: PatternSpec,
    pub background: PatternSpec,
    /// `[height, width]` in pixels.
    pub resolution: [usize; 2],
    /// False when the symbol was deliberately left out of the image.
    #[serde(default = "yes")]
    pub visible: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Text,
    Char,
    Float,
    Pair,
    Bool,
    Pattern,
}

fn kind_of(attr: &str) -> Option<Kind> {
    Some(match attr {
        "language" | "font" => Kind::Text,
        "char" => Kind::Char,
        "scale" | "rotation" => Kind::Float,
        "translation" => Kind::Pair,
        "bold" | "italic" => Kind::Bool,
        "foreground" | "background" => Kind::Pattern,
        _ => return None,
    })
}

/// A sampled or constant attribute value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Float(f64),
    Pair([f64; 2]),
    Text(String),
    Pattern(PatternSpec),
}

impl Value {
    fn kind(&self) -> Kind {
        match self {
            Value::Bool(_) => Kind::Bool,
            Value::Float(_) => Kind::Float,
            Value::Pair(_) => Kind::Pair,
            Value::Text(s) if s.chars().count() == 1 => Kind::Char,
            Value::Text(_) => Kind::Text,
            Value::Pattern(_) => Kind::Pattern,
        }
    }

    fn fits(&self, kind: Kind) -> bool {
        let k = self.kind();
        k == kind || (k == Kind::Char && kind == Kind::Text)
    }
}

/// Which layer a camouflage distribution paints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Foreground,
    Background,
}

/// Named distributions with parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", content = "params", rename_all = "snake_case")]
pub enum Parametric {
    Uniform { low: f64, high: f64 },
    /// Independent uniform draws for both components of a pair.
    UniformPair { low: f64, high: f64 },
    Normal { mean: f64, std: f64 },
    /// Normal restricted to `[low, high]` by rejection.
    TruncatedNormal { mean: f64, std: f64, low: f64, high: f64 },
    /// `exp(U(ln low, ln high))`.
    LogUniform { low: f64, high: f64 },
    /// `median * exp(sigma * N(0, 1))`.
    LogNormal { median: f64, sigma: f64 },
    Bernoulli { p: f64 },
    /// Uniform over the languages given to the sampler.
    UniformLanguage,
    /// Uniform over the alphabet of the sampled language.
    UniformChar,
    /// Uniform over the fonts of the sampled language.
    UniformFont,
    /// Gradient with `stops` random HSV colors (value at least `min_value`);
    /// radial with probability `radial_p`, else linear at a uniform angle.
    Shades { min_value: f64, min_stops: u32, max_stops: u32, radial_p: f64 },
    /// Camouflage strokes. Both layers of an image share one palette and one
    /// random orientation, the foreground turned a quarter turn from the
    /// background. `line_width` is in pixels at a 32 px frame.
    Camouflage { layer: Layer, palette_size: u32, line_width: f64, line_count: u32 },
}

impl Parametric {
    fn output(&self) -> Kind {
        match self {
            Parametric::Uniform { .. }
            | Parametric::Normal { .. }
            | Parametric::TruncatedNormal { .. }
            | Parametric::LogUniform { .. }
            | Parametric::LogNormal { .. } => Kind::Float,
            Parametric::UniformPair { .. } => Kind::Pair,
            Parametric::Bernoulli { .. } => Kind::Bool,
            Parametric::UniformLanguage => Kind::Text,
            Parametric::UniformChar => Kind::Char,
            Parametric::UniformFont => Kind::Text,
            Parametric::Shades { .. } | Parametric::Camouflage { .. } => Kind::Pattern,
        }
    }

    /// Lower bound of the support, when bounded.
    fn min_value(&self) -> Option<f64> {
        match *self {
            Parametric::Uniform { low, .. } | Parametric::UniformPair { low, .. } => Some(low),
            Parametric::TruncatedNormal { low, .. } => Some(low),
            Parametric::LogUniform { low, .. } => Some(low),
            Parametric::LogNormal { .. } => Some(0.0),
            _ => None,
        }
    }

    fn check(&self) -> Result<(), String> {
        let ordered = |lo: f64, hi: f64| {
            if lo.is_finite() && hi.is_finite() && lo <= hi {
                Ok(())
            } else {
                Err(format!("bounds {lo}..{hi} must be finite and ordered"))
            }
        };
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be finite and non-negative, got {v}"))
            }
        };
        match *self {
            Parametric::Uniform { low, high } | Parametric::UniformPair { low, high } => ordered(low, high),
            Parametric::Normal { mean, std } => {
                if !mean.is_finite() {
                    return Err("mean must be finite".into());
                }
                nonneg("std", std)
            }
            Parametric::TruncatedNormal { mean, std, low, high } => {
                ordered(low, high)?;
                if !mean.is_finite() || !(std > 0.0) {
                    return Err("truncated normal needs a finite mean and positive std".into());
                }
                // Keep rejection sampling cheap.
                let z = |x: f64| (x - mean) / std;
                if z(high) < -3.0 || z(low) > 3.0 {
                    return Err("truncation interval has negligible mass".into());
                }
                Ok(())
            }
            Parametric::LogUniform { low, high } => {
                ordered(low, high)?;
                if low > 0.0 {
                    Ok(())
                } else {
                    Err("log-uniform bounds must be positive".into())
                }
            }
            Parametric::LogNormal { median, sigma } => {
                if !(median > 0.0 && median.is_finite()) {
                    return Err("log-normal median must be positive".into());
                }
                nonneg("sigma", sigma)
            }
            Parametric::Bernoulli { p } => {
                if (0.0..=1.0).contains(&p) {
                    Ok(())
                } else {
                    Err(format!("probability {p} outside [0, 1]"))
                }
            }
            Parametric::UniformLanguage | Parametric::UniformChar | Parametric::UniformFont => Ok(()),
            Parametric::Shades { min_value, min_stops, max_stops, radial_p } => {
                if !(0.0..=1.0).contains(&min_value) || !(0.0..=1.0).contains(&radial_p) {
                    return Err("min_value and radial_p must lie in [0, 1]".into());
                }
                if !(2 <= min_stops && min_stops <= max_stops && max_stops <= 3) {
                    return Err("gradient stops must satisfy 2 <= min_stops <= max_stops <= 3".into());
                }
                Ok(())
            }
            Parametric::Camouflage { palette_size, line_width, line_count, .. } => {
                if palette_size == 0 || line_count == 0 || !(line_width > 0.0) {
                    return Err("camouflage needs positive palette size, line width and line count".into());
                }
                Ok(())
            }
        }
    }
}

/// Caller-supplied sampling function. It receives the attribute's own random
/// stream.
pub type GeneratorFn = Arc<dyn Fn(&mut ChaCha8Rng) -> Result<Value, String> + Send + Sync>;

/// Rewrites a fully sampled record; used for dependent attributes.
pub type JointHook = Arc<dyn Fn(SymbolAttributes, &mut ChaCha8Rng) -> Result<SymbolAttributes, String> + Send + Sync>;

#[derive(Clone)]
pub enum Distribution {
    Constant(Value),
    Parametric(Parametric),
    /// `label` identifies the function in manifests.
    Generator { label: String, f: GeneratorFn },
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Distribution::Parametric(p) => f.debug_tuple("Parametric").field(p).finish(),
            Distribution::Generator { label, .. } => f.debug_struct("Generator").field("label", label).finish(),
        }
    }
}

impl Distribution {
    pub fn constant(v: impl Into<Value>) -> Self {
        Distribution::Constant(v.into())
    }

    pub fn generator(
        label: impl Into<String>,
        f: impl Fn(&mut ChaCha8Rng) -> Result<Value, String> + Send + Sync + 'static,
    ) -> Self {
        Distribution::Generator { label: label.into(), f: Arc::new(f) }
    }

    /// Parses the recipe form for `attr`: a bare constant, `{"constant": v}`
    /// or `{"dist": name, "params": {...}}`.
    pub fn from_json(attr: &str, v: &Json) -> Result<Self, AttributeError> {
        let kind = kind_of(attr).ok_or_else(|| AttributeError::UnknownAttribute(attr.to_owned()))?;
        let domain = |reason: String| AttributeError::Domain { attr: attr.to_owned(), reason };
        if let Some(obj) = v.as_object() {
            if obj.contains_key("dist") {
                let p: Parametric = serde_json::from_value(v.clone()).map_err(|e| domain(e.to_string()))?;
                return Ok(Distribution::Parametric(p));
            }
            if let Some(c) = obj.get("constant") {
                return constant_from_json(kind, c).map(Distribution::Constant).map_err(domain);
            }
        }
        constant_from_json(kind, v).map(Distribution::Constant).map_err(domain)
    }

    pub fn to_json(&self) -> Json {
        match self {
            Distribution::Constant(v) => json!({ "constant": v }),
            Distribution::Parametric(p) => serde_json::to_value(p).expect("serializable"),
            Distribution::Generator { label, .. } => json!({ "generator": label }),
        }
    }
}

fn constant_from_json(kind: Kind, v: &Json) -> Result<Value, String> {
    let bad = || format!("{v} is not a valid constant here");
    Ok(match kind {
        Kind::Bool => Value::Bool(v.as_bool().ok_or_else(bad)?),
        Kind::Float => Value::Float(v.as_f64().ok_or_else(bad)?),
        Kind::Pair => {
            if let Some(x) = v.as_f64() {
                Value::Pair([x, x])
            } else {
                Value::Pair(serde_json::from_value(v.clone()).map_err(|_| bad())?)
            }
        }
        Kind::Text | Kind::Char => Value::Text(v.as_str().ok_or_else(bad)?.to_owned()),
        Kind::Pattern => Value::Pattern(serde_json::from_value(v.clone()).map_err(|e| e.to_string())?),
    })
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<[f64; 2]> for Value {
    fn from(v: [f64; 2]) -> Self {
        Value::Pair(v)
    }
}

impl From<char> for Value {
    fn from(v: char) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_owned())
    }
}

impl From<PatternSpec> for Value {
    fn from(v: PatternSpec) -> Self {
        Value::Pattern(v)
    }
}

#[derive(Debug, Error)]
pub enum AttributeError {
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("invalid distribution for `{attr}`: {reason}")]
    Domain { attr: String, reason: String },
    #[error("sampler needs at least one non-empty alphabet")]
    EmptyAlphabet,
    #[error("resolution {0}x{1} is below 8x8")]
    Resolution(usize, usize),
    #[error("sample {index}: generator for `{attr}` failed: {message}")]
    Generator { index: u64, attr: String, message: String },
    #[error("sample {index}: joint hook failed: {message}")]
    Hook { index: u64, message: String },
}

/// Distribution over [`SymbolAttributes`].
#[derive(Clone)]
pub struct AttributeSampler {
    alphabets: Vec<Alphabet>,
    resolution: [usize; 2],
    dists: BTreeMap<&'static str, Distribution>,
    joint_hook: Option<(String, JointHook)>,
}

impl fmt::Debug for AttributeSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AttributeSampler")
            .field("languages", &self.alphabets.iter().map(|a| &a.language).collect::<Vec<_>>())
            .field("resolution", &self.resolution)
            .field("dists", &self.dists)
            .field("joint_hook", &self.joint_hook.as_ref().map(|h| &h.0))
            .finish()
    }
}

/// Gradient shades used by the default sampler.
pub fn default_shades() -> Parametric {
    Parametric::Shades { min_value: defaults::SHADE_MIN_VALUE, min_stops: 2, max_stops: 2, radial_p: 0.0 }
}

pub fn default_camouflage(layer: Layer) -> Parametric {
    Parametric::Camouflage {
        layer,
        palette_size: CAMOUFLAGE_PALETTE_SIZE,
        line_width: CAMOUFLAGE_LINE_WIDTH_32,
        line_count: CAMOUFLAGE_LINE_COUNT,
    }
}

/// The default sampler over one alphabet.
pub fn default_sampler(alphabet: Alphabet, resolution: [usize; 2]) -> Result<AttributeSampler, AttributeError> {
    AttributeSampler::new(vec![alphabet], resolution)
}

impl AttributeSampler {
    /// Default distributions over several alphabets; the language is drawn
    /// uniformly, then the symbol and font within it.
    pub fn new(alphabets: Vec<Alphabet>, resolution: [usize; 2]) -> Result<Self, AttributeError> {
        if alphabets.is_empty() || alphabets.iter().any(|a| a.codepoints.is_empty() || a.fonts.is_empty()) {
            return Err(AttributeError::EmptyAlphabet);
        }
        let [h, w] = resolution;
        if h < MIN_RESOLUTION || w < MIN_RESOLUTION {
            return Err(AttributeError::Resolution(h, w));
        }
        use Parametric as P;
        let [tlo, thi] = defaults::TRANSLATION;
        let dists = BTreeMap::from([
            ("language", Distribution::Parametric(P::UniformLanguage)),
            ("char", Distribution::Parametric(P::UniformChar)),
            ("font", Distribution::Parametric(P::UniformFont)),
            ("translation", Distribution::Parametric(P::UniformPair { low: tlo, high: thi })),
            (
                "scale",
                Distribution::Parametric(P::LogUniform { low: defaults::SCALE_MIN, high: defaults::SCALE_MAX }),
            ),
            (
                "rotation",
                Distribution::Parametric(P::TruncatedNormal {
                    mean: 0.0,
                    std: defaults::ROTATION_STD,
                    low: -defaults::ROTATION_LIMIT,
                    high: defaults::ROTATION_LIMIT,
                }),
            ),
            ("bold", Distribution::Parametric(P::Bernoulli { p: defaults::BOLD_P })),
            ("italic", Distribution::Parametric(P::Bernoulli { p: defaults::ITALIC_P })),
            ("foreground", Distribution::Parametric(default_shades())),
            ("background", Distribution::Parametric(default_shades())),
        ]);
        Ok(Self { alphabets, resolution, dists, joint_hook: None })
    }

    pub fn alphabets(&self) -> &[Alphabet] {
        &self.alphabets
    }

    pub fn resolution(&self) -> [usize; 2] {
        self.resolution
    }

    pub fn distribution(&self, attr: &str) -> Option<&Distribution> {
        self.dists.get(attr)
    }

    /// Total number of classes; classes of later languages follow those of
    /// earlier ones.
    pub fn n_classes(&self) -> usize {
        self.alphabets.iter().map(|a| a.codepoints.len()).sum()
    }

    pub fn class_of(&self, language: &str, c: char) -> Option<usize> {
        let mut offset = 0;
        for a in &self.alphabets {
            if a.language == language {
                return a.class_of(c).map(|k| offset + k);
            }
            offset += a.codepoints.len();
        }
        None
    }

    /// The symbol of a global class index.
    pub fn class_symbol(&self, class: usize) -> Option<(&str, char)> {
        let mut k = class;
        for a in &self.alphabets {
            if k < a.codepoints.len() {
                return Some((&a.language, a.codepoints[k]));
            }
            k -= a.codepoints.len();
        }
        None
    }

    /// A copy with `attr` drawn from `dist`.
    pub fn with_override(&self, attr: &str, dist: Distribution) -> Result<Self, AttributeError> {
        let key = ATTRIBUTE_NAMES
            .iter()
            .copied()
            .find(|n| *n == attr)
            .ok_or_else(|| AttributeError::UnknownAttribute(attr.to_owned()))?;
        self.check(key, &dist)
            .map_err(|reason| AttributeError::Domain { attr: key.to_owned(), reason })?;
        let mut out = self.clone();
        out.dists.insert(key, dist);
        Ok(out)
    }

    pub fn with_resolution(&self, resolution: [usize; 2]) -> Result<Self, AttributeError> {
        let [h, w] = resolution;
        if h < MIN_RESOLUTION || w < MIN_RESOLUTION {
            return Err(AttributeError::Resolution(h, w));
        }
        let mut out = self.clone();
        out.resolution = resolution;
        Ok(out)
    }

    /// A copy whose samples pass through `hook` after all attributes are drawn.
    pub fn with_joint_hook(
        &self,
        label: impl Into<String>,
        hook: impl Fn(SymbolAttributes, &mut ChaCha8Rng) -> Result<SymbolAttributes, String> + Send + Sync + 'static,
    ) -> Self {
        let mut out = self.clone();
        out.joint_hook = Some((label.into(), Arc::new(hook)));
        out
    }

    /// False when a generator function or joint hook is installed; such
    /// samplers cannot be rebuilt from their description.
    pub fn is_portable(&self) -> bool {
        self.joint_hook.is_none() && !self.dists.values().any(|d| matches!(d, Distribution::Generator { .. }))
    }

    fn check(&self, attr: &str, dist: &Distribution) -> Result<(), String> {
        let kind = kind_of(attr).expect("known attribute");
        match dist {
            Distribution::Generator { .. } => Ok(()),
            Distribution::Constant(v) => {
                if !v.fits(kind) {
                    return Err(format!("constant {v:?} has the wrong type"));
                }
                match (attr, v) {
                    ("scale", Value::Float(s)) if !(*s > 0.0 && s.is_finite()) => {
                        Err(format!("scale must be positive, got {s}"))
                    }
                    ("rotation", Value::Float(r)) if !r.is_finite() => Err("rotation must be finite".into()),
                    ("translation", Value::Pair(t)) if !t.iter().all(|x| x.is_finite()) => {
                        Err("translation must be finite".into())
                    }
                    ("language", Value::Text(l)) if !self.alphabets.iter().any(|a| &a.language == l) => {
                        Err(format!("language `{l}` is not among the sampler's alphabets"))
                    }
                    ("char", Value::Text(s)) => {
                        let c = s.chars().next().unwrap_or('\0');
                        if self.alphabets.iter().any(|a| a.class_of(c).is_some()) {
                            Ok(())
                        } else {
                            Err(format!("{c:?} is not in the sampler's alphabet"))
                        }
                    }
                    ("font", Value::Text(f)) if !self.alphabets.iter().all(|a| a.fonts.contains(f)) => {
                        Err(format!("font `{f}` cannot draw the whole alphabet"))
                    }
                    (_, Value::Pattern(p)) => p.validate().map_err(|e| e.to_string()),
                    _ => Ok(()),
                }
            }
            Distribution::Parametric(p) => {
                p.check()?;
                let out = p.output();
                if !(out == kind || (out == Kind::Text && kind == Kind::Text)) {
                    return Err(format!("{p:?} does not produce values for this attribute"));
                }
                match (attr, p) {
                    ("language", Parametric::UniformLanguage)
                    | ("char", Parametric::UniformChar)
                    | ("font", Parametric::UniformFont) => Ok(()),
                    ("language" | "char" | "font", _) => Err(format!("{p:?} does not apply here")),
                    ("scale", _) if !p.min_value().is_some_and(|m| m >= 0.0) => {
                        Err("scale distribution must have positive support".into())
                    }
                    ("scale", Parametric::Uniform { low, .. }) if *low <= 0.0 => {
                        Err("scale distribution must have positive support".into())
                    }
                    _ => Ok(()),
                }
            }
        }
    }

    /// Draws the record of sample `index`. Pure in `(self, master_seed, index)`.
    pub fn sample(&self, master_seed: u64, index: u64) -> Result<SymbolAttributes, AttributeError> {
        self.sample_stream(&Substream::new(master_seed, index))
    }

    /// Same as [`sample`](Self::sample) on an explicit stream.
    pub fn sample_stream(&self, stream: &Substream) -> Result<SymbolAttributes, AttributeError> {
        let index = stream.index();
        let draw = |attr: &'static str, ctx: &Ctx<'_>| -> Result<Value, AttributeError> {
            let mut rng = stream.rng(attr);
            match &self.dists[attr] {
                Distribution::Constant(v) => Ok(v.clone()),
                Distribution::Parametric(p) => Ok(draw_parametric(p, &mut rng, ctx, stream)),
                Distribution::Generator { f, .. } => {
                    let v = f(&mut rng).map_err(|message| AttributeError::Generator {
                        index,
                        attr: attr.to_owned(),
                        message,
                    })?;
                    if v.fits(kind_of(attr).expect("known")) {
                        Ok(v)
                    } else {
                        Err(AttributeError::Generator {
                            index,
                            attr: attr.to_owned(),
                            message: format!("returned {v:?}, which has the wrong type"),
                        })
                    }
                }
            }
        };

        let mut ctx = Ctx { sampler: self, alphabet: &self.alphabets[0] };
        let language = match draw("language", &ctx)? {
            Value::Text(l) => l,
            _ => unreachable!("checked kind"),
        };
        ctx.alphabet = self
            .alphabets
            .iter()
            .find(|a| a.language == language)
            .ok_or_else(|| AttributeError::Generator {
                index,
                attr: "language".into(),
                message: format!("unknown language `{language}`"),
            })?;
        let text = |v: Value| match v {
            Value::Text(s) => s,
            _ => unreachable!("checked kind"),
        };
        let float = |v: Value| match v {
            Value::Float(x) => x,
            _ => unreachable!("checked kind"),
        };
        let boolean = |v: Value| match v {
            Value::Bool(b) => b,
            _ => unreachable!("checked kind"),
        };
        let pattern = |v: Value| match v {
            Value::Pattern(p) => p,
            _ => unreachable!("checked kind"),
        };
        let c = text(draw("char", &ctx)?).chars().next().expect("single char");
        let translation = match draw("translation", &ctx)? {
            Value::Pair(t) => t,
            _ => unreachable!("checked kind"),
        };
        let attrs = SymbolAttributes {
            char: c,
            font: text(draw("font", &ctx)?),
            language,
            translation,
            scale: float(draw("scale", &ctx)?),
            rotation: float(draw("rotation", &ctx)?),
            bold: boolean(draw("bold", &ctx)?),
            italic: boolean(draw("italic", &ctx)?),
            foreground: pattern(draw("foreground", &ctx)?),
            background: pattern(draw("background", &ctx)?),
            resolution: self.resolution,
            visible: true,
        };
        match &self.joint_hook {
            None => Ok(attrs),
            Some((_, hook)) => {
                let mut rng = stream.rng("joint");
                hook(attrs, &mut rng).map_err(|message| AttributeError::Hook { index, message })
            }
        }
    }

    /// JSON description of every distribution.
    pub fn describe(&self) -> Json {
        let dists: serde_json::Map<String, Json> =
            self.dists.iter().map(|(k, d)| ((*k).to_owned(), d.to_json())).collect();
        json!({
            "resolution": self.resolution,
            "languages": self.alphabets.iter().map(|a| json!({
                "language": a.language,
                "symbols": a.codepoints.len(),
                "fonts": a.fonts,
            })).collect::<Vec<_>>(),
            "distributions": dists,
            "joint_hook": self.joint_hook.as_ref().map(|h| h.0.clone()),
            "portable": self.is_portable(),
        })
    }
}

struct Ctx<'a> {
    sampler: &'a AttributeSampler,
    alphabet: &'a Alphabet,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn draw_parametric(p: &Parametric, rng: &mut ChaCha8Rng, ctx: &Ctx<'_>, stream: &Substream) -> Value {
    let uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| if lo < hi { rng.gen_range(lo..hi) } else { lo };
    match *p {
        Parametric::Uniform { low, high } => Value::Float(uniform(rng, low, high)),
        Parametric::UniformPair { low, high } => Value::Pair([uniform(rng, low, high), uniform(rng, low, high)]),
        Parametric::Normal { mean, std } => Value::Float(mean + std * normal(rng)),
        Parametric::TruncatedNormal { mean, std, low, high } => loop {
            let x = mean + std * normal(rng);
            if (low..=high).contains(&x) {
                break Value::Float(x);
            }
        },
        Parametric::LogUniform { low, high } => Value::Float(uniform(rng, low.ln(), high.ln()).exp()),
        Parametric::LogNormal { median, sigma } => Value::Float(median * (sigma * normal(rng)).exp()),
        Parametric::Bernoulli { p } => Value::Bool(rng.gen::<f64>() < p),
        Parametric::UniformLanguage => {
            let langs = &ctx.sampler.alphabets;
            Value::Text(langs[rng.gen_range(0..langs.len())].language.clone())
        }
        Parametric::UniformChar => {
            let cps = &ctx.alphabet.codepoints;
            Value::Text(cps[rng.gen_range(0..cps.len())].to_string())
        }
        Parametric::UniformFont => {
            let fonts = &ctx.alphabet.fonts;
            Value::Text(fonts[rng.gen_range(0..fonts.len())].clone())
        }
        Parametric::Shades { min_value, min_stops, max_stops, radial_p } => {
            let n = rng.gen_range(min_stops..=max_stops) as usize;
            let radial = rng.gen::<f64>() < radial_p;
            let mode = if radial {
                GradientMode::Radial { center: [rng.gen(), rng.gen()], radius: rng.gen_range(0.5..1.0) }
            } else {
                GradientMode::Linear { angle: rng.gen_range(0.0..2.0 * PI) }
            };
            let stops = (0..n).map(|_| random_hsv(rng, min_value)).collect();
            Value::Pattern(PatternSpec::Gradient { mode, stops })
        }
        Parametric::Camouflage { layer, palette_size, line_width, line_count } => {
            // Shared by both layers of the image.
            let mut shared = stream.rng("camouflage");
            let background: f64 = shared.gen_range(0.0..PI);
            let palette_seed: u64 = shared.gen();
            let orientation = match layer {
                Layer::Background => background,
                Layer::Foreground => {
                    let o = (background + 0.5 * PI).rem_euclid(PI);
                    if o >= PI {
                        0.0
                    } else {
                        o
                    }
                }
            };
            let [h, w] = ctx.sampler.resolution;
            Value::Pattern(PatternSpec::Camouflage {
                palette_seed,
                palette_size,
                orientation,
                line_width: line_width * h.min(w) as f64 / 32.0,
                line_count,
            })
        }
    }
}
