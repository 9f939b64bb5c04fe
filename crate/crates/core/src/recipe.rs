//! Named, fully resolved generator configurations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::attributes::{
    default_camouflage, AttributeError, AttributeSampler, Distribution, Layer, Parametric,
};
use crate::corrupt::{CorruptionError, CorruptionSpec, PixelNoise};
use crate::fonts::{Alphabet, FontCatalog, FontError};
use crate::partition::DEFAULT_RATIOS;
use crate::render::{CountLaw, OccluderSpec, PatternSpec};
use crate::scene::{OverlapPolicy, ScaleLaw, SceneSpec};

/// Built-in recipe names.
pub const RECIPES: [&str; 16] = [
    "default",
    "camouflage",
    "korean-1k",
    "less-variations",
    "solid",
    "shades",
    "al-label-noise",
    "al-pixel-noise",
    "al-missing",
    "al-cropped",
    "al-occluded",
    "counting-fixed",
    "counting-variable",
    "counting-crowded",
    "fewshot-multilingual",
    "al-no-noise",
];

/// Alternative spellings of built-in names.
const ALIASES: [(&str, &str); 7] = [
    ("no-noise", "al-no-noise"),
    ("label-noise", "al-label-noise"),
    ("pixel-noise", "al-pixel-noise"),
    ("missing", "al-missing"),
    ("cropped", "al-cropped"),
    ("out-of-the-box", "al-cropped"),
    ("occluded", "al-occluded"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Texture {
    /// Two-color linear gradients for foreground and background.
    #[default]
    DefaultShades,
    /// Two or three colors, linear or radial.
    Shades,
    /// White symbol on black.
    Solid,
    Camouflage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Languages {
    One(String),
    /// Every language meeting the font threshold under the caps.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecipeConfig {
    pub name: String,
    pub languages: Languages,
    pub max_symbols: Option<usize>,
    pub max_fonts: Option<usize>,
    /// `[height, width]`.
    pub resolution: [usize; 2],
    pub texture: Texture,
    /// Attribute name to distribution, in the recipe JSON form. Applied
    /// after the texture.
    pub overrides: BTreeMap<String, Json>,
    pub corruption: CorruptionSpec,
    /// Present for counting recipes.
    pub scene: Option<SceneSpec>,
    pub split_ratios: [f64; 3],
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
}

impl Default for RecipeConfig {
    fn default() -> Self {
        Self {
            name: "default".into(),
            languages: Languages::One("english".into()),
            max_symbols: None,
            max_fonts: None,
            resolution: [32, 32],
            texture: Texture::DefaultShades,
            overrides: BTreeMap::new(),
            corruption: CorruptionSpec::default(),
            scene: None,
            split_ratios: DEFAULT_RATIOS,
            n_samples: None,
            seed: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum RecipeError {
    #[error("unknown recipe `{0}`")]
    UnknownRecipe(String),
    #[error("invalid recipe: {0}")]
    Invalid(String),
    #[error(transparent)]
    Font(#[from] FontError),
    #[error(transparent)]
    Attribute(#[from] AttributeError),
    #[error(transparent)]
    Corruption(#[from] CorruptionError),
}

fn bold_large() -> [(&'static str, Json); 2] {
    [
        ("bold", json!(true)),
        ("scale", json!({"dist": "log_normal", "params": {"median": 0.7, "sigma": 0.1}})),
    ]
}

pub fn canonical_name(name: &str) -> Option<&'static str> {
    RECIPES
        .iter()
        .copied()
        .find(|r| *r == name)
        .or_else(|| ALIASES.iter().find(|(a, _)| *a == name).map(|(_, r)| *r))
}

/// The built-in recipe `name` (aliases accepted).
pub fn builtin(name: &str) -> Result<RecipeConfig, RecipeError> {
    let canonical = canonical_name(name).ok_or_else(|| RecipeError::UnknownRecipe(name.to_owned()))?;
    let mut r = RecipeConfig { name: canonical.to_owned(), ..Default::default() };
    let set = |r: &mut RecipeConfig, pairs: &[(&str, Json)]| {
        for (k, v) in pairs {
            r.overrides.insert((*k).to_owned(), v.clone());
        }
    };
    match canonical {
        "default" | "al-no-noise" => {}
        "camouflage" => {
            r.texture = Texture::Camouflage;
            set(&mut r, &bold_large());
        }
        "solid" => {
            r.texture = Texture::Solid;
            set(&mut r, &bold_large());
        }
        "shades" => {
            r.texture = Texture::Shades;
            set(&mut r, &bold_large());
        }
        "korean-1k" => {
            r.languages = Languages::One("korean".into());
            r.max_symbols = Some(1000);
        }
        "less-variations" => set(
            &mut r,
            &[
                ("bold", json!(false)),
                ("italic", json!(false)),
                ("scale", json!({"dist": "log_uniform", "params": {"low": 0.55, "high": 0.75}})),
                ("rotation", json!({"dist": "normal", "params": {"mean": 0.0, "std": 0.1}})),
            ],
        ),
        "al-label-noise" => r.corruption.label_noise_p = 0.1,
        "al-pixel-noise" => r.corruption.pixel_noise = Some(PixelNoise { p_image: 0.5, sigma: 0.7 }),
        "al-missing" => r.corruption.missing_p = 0.1,
        "al-cropped" => set(
            &mut r,
            &[("translation", json!({"dist": "uniform_pair", "params": {"low": -2.0, "high": 2.0}}))],
        ),
        "al-occluded" => {
            r.corruption.occlusion =
                Some(OccluderSpec { count: CountLaw::Bernoulli { p: 0.2 }, ..Default::default() })
        }
        "counting-fixed" => {
            r.resolution = [128, 128];
            r.scene = Some(SceneSpec::default());
        }
        "counting-variable" => {
            r.resolution = [128, 128];
            r.scene = Some(SceneSpec {
                scale: ScaleLaw::LogNormal { median: 0.1, sigma: 0.5 },
                ..Default::default()
            });
        }
        "counting-crowded" => {
            r.resolution = [128, 128];
            r.scene = Some(SceneSpec { count: [30, 50], overlap: OverlapPolicy::Allow, ..Default::default() });
        }
        "fewshot-multilingual" => {
            r.languages = Languages::All;
            r.max_symbols = Some(200);
            r.max_fonts = Some(200);
        }
        _ => unreachable!("every canonical name is handled"),
    }
    Ok(r)
}

/// What a recipe generates.
#[derive(Debug, Clone)]
pub enum Plan {
    Symbols { sampler: AttributeSampler, corruption: CorruptionSpec },
    Scenes { alphabet: Alphabet, spec: SceneSpec },
}

impl RecipeConfig {
    /// Parses a recipe file. A `"base"` key names the built-in recipe the
    /// file starts from (default: `"default"`); other keys replace the base
    /// values, except `overrides`, which is merged per attribute.
    pub fn from_json(v: &Json) -> Result<Self, RecipeError> {
        let obj = v.as_object().ok_or_else(|| RecipeError::Invalid("recipe must be a JSON object".into()))?;
        let base_name = obj.get("base").and_then(Json::as_str).unwrap_or("default");
        let base = builtin(base_name)?;
        let mut merged = serde_json::to_value(&base).expect("serializable");
        let m = merged.as_object_mut().expect("object");
        for (k, val) in obj {
            if k == "base" {
                continue;
            }
            if k == "overrides" {
                let extra = val
                    .as_object()
                    .ok_or_else(|| RecipeError::Invalid("`overrides` must be an object".into()))?;
                let dst = m.get_mut("overrides").and_then(Json::as_object_mut).expect("object");
                for (a, d) in extra {
                    dst.insert(a.clone(), d.clone());
                }
            } else {
                m.insert(k.clone(), val.clone());
            }
        }
        if !obj.contains_key("name") && obj.contains_key("base") {
            m.insert("name".into(), json!(base.name));
        }
        serde_json::from_value(merged).map_err(|e| RecipeError::Invalid(e.to_string()))
    }

    pub fn to_json(&self) -> Json {
        serde_json::to_value(self).expect("serializable")
    }

    pub fn is_scene(&self) -> bool {
        self.scene.is_some()
    }

    /// Alphabets this recipe draws from.
    pub fn alphabets(&self, catalog: &FontCatalog) -> Result<Vec<Alphabet>, RecipeError> {
        match &self.languages {
            Languages::One(l) => Ok(vec![catalog.alphabet(l, self.max_symbols, self.max_fonts)?]),
            Languages::All => {
                let all = catalog.available_languages(self.max_symbols, self.max_fonts);
                if all.is_empty() {
                    return Err(RecipeError::Font(FontError::LanguageExcluded {
                        language: "any".into(),
                        fonts: 0,
                    }));
                }
                Ok(all)
            }
        }
    }

    /// Resolves the recipe against a catalog.
    pub fn plan(&self, catalog: &FontCatalog) -> Result<Plan, RecipeError> {
        self.corruption.validate()?;
        let alphabets = self.alphabets(catalog)?;
        if let Some(spec) = &self.scene {
            if alphabets.len() != 1 {
                return Err(RecipeError::Invalid("counting scenes need exactly one language".into()));
            }
            if !self.corruption.is_empty() || !self.overrides.is_empty() {
                return Err(RecipeError::Invalid(
                    "counting scenes take neither corruptions nor attribute overrides".into(),
                ));
            }
            let mut spec = spec.clone();
            spec.resolution = self.resolution;
            let alphabet = alphabets.into_iter().next().expect("one alphabet");
            return Ok(Plan::Scenes { alphabet, spec });
        }
        let mut sampler = AttributeSampler::new(alphabets, self.resolution)?;
        let (fg, bg) = match self.texture {
            Texture::DefaultShades => (None, None),
            Texture::Shades => {
                let shades = Parametric::Shades { min_value: 0.3, min_stops: 2, max_stops: 3, radial_p: 0.5 };
                (Some(Distribution::Parametric(shades.clone())), Some(Distribution::Parametric(shades)))
            }
            Texture::Solid => (
                Some(Distribution::constant(PatternSpec::Solid { color: crate::color::WHITE })),
                Some(Distribution::constant(PatternSpec::Solid { color: crate::color::BLACK })),
            ),
            Texture::Camouflage => (
                Some(Distribution::Parametric(default_camouflage(Layer::Foreground))),
                Some(Distribution::Parametric(default_camouflage(Layer::Background))),
            ),
        };
        if let Some(d) = fg {
            sampler = sampler.with_override("foreground", d)?;
        }
        if let Some(d) = bg {
            sampler = sampler.with_override("background", d)?;
        }
        for (attr, v) in &self.overrides {
            sampler = sampler.with_override(attr, Distribution::from_json(attr, v)?)?;
        }
        Ok(Plan::Symbols { sampler, corruption: self.corruption.clone() })
    }
}
