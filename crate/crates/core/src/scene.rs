//! Multi-symbol counting scenes.

use std::f64::consts::{FRAC_PI_3, PI};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attributes::{defaults, SymbolAttributes};
use crate::color::random_hsv;
use crate::fonts::Alphabet;
use crate::render::{composite, paint_region, GradientMode, PatternSpec, RenderError, Renderer, MIN_RESOLUTION};
use crate::rng::Substream;

/// Retries allowed per scene when enforcing an overlap policy.
pub const MAX_RETRIES: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ScaleLaw {
    Fixed { value: f64 },
    /// `median * exp(sigma * N(0, 1))`.
    LogNormal { median: f64, sigma: f64 },
}

impl ScaleLaw {
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            ScaleLaw::Fixed { value } => value,
            ScaleLaw::LogNormal { median, sigma } => {
                let e: f64 = StandardNormal.sample(rng);
                median * (sigma * e).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapPolicy {
    Allow,
    /// No two symbols may share a symbol pixel.
    Reject,
    /// At least two symbols must share a symbol pixel.
    Require,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    /// `[height, width]`.
    pub resolution: [usize; 2],
    /// Symbol count is uniform on `count.0..=count.1`.
    pub count: [u32; 2],
    pub target: char,
    pub p_target: f64,
    pub scale: ScaleLaw,
    pub overlap: OverlapPolicy,
    /// Minimum HSV value of the shaded background and symbol colors.
    pub shade_min_value: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            resolution: [128, 128],
            count: [3, 10],
            target: 'a',
            p_target: 0.7,
            scale: ScaleLaw::Fixed { value: 0.1 },
            overlap: OverlapPolicy::Allow,
            shade_min_value: defaults::SHADE_MIN_VALUE,
        }
    }
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("invalid scene spec: {0}")]
    Spec(String),
    #[error("scene {index}: overlap policy `{policy:?}` not satisfied after {MAX_RETRIES} retries")]
    Overlap { index: u64, policy: OverlapPolicy },
    #[error(transparent)]
    Render(#[from] RenderError),
}

/// One composed scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSample {
    pub height: usize,
    pub width: usize,
    pub image: Vec<u8>,
    /// Coverage of each symbol on its own, in z-order.
    pub instance_masks: Vec<Vec<u8>>,
    /// 0 for background, `k + 1` where instance `k` is the topmost symbol
    /// pixel (mask >= 128).
    pub instance_ids: Vec<u16>,
    pub symbols: Vec<SymbolAttributes>,
    /// `[row, col]` of each instance's point annotation.
    pub points: Vec<[usize; 2]>,
    pub target_count: usize,
    pub overlap: bool,
}

impl SceneSample {
    pub fn labels(&self) -> Vec<char> {
        self.symbols.iter().map(|s| s.char).collect()
    }
}

/// Whether any two masks have a common symbol pixel.
pub fn masks_overlap(masks: &[Vec<u8>]) -> bool {
    let Some(first) = masks.first() else { return false };
    let mut seen = vec![false; first.len()];
    for m in masks {
        for (s, &v) in seen.iter_mut().zip(m) {
            if v >= 128 {
                if *s {
                    return true;
                }
                *s = true;
            }
        }
    }
    false
}

/// Centroid of the symbol pixels snapped to the nearest symbol pixel; the
/// brightest pixel when the mask has no symbol pixel.
pub fn point_annotation(mask: &[u8], width: usize) -> Option<[usize; 2]> {
    let inside: Vec<usize> = (0..mask.len()).filter(|&i| mask[i] >= 128).collect();
    if inside.is_empty() {
        let (i, &v) = mask.iter().enumerate().max_by_key(|&(i, &v)| (v, std::cmp::Reverse(i)))?;
        return (v > 0).then_some([i / width, i % width]);
    }
    let n = inside.len() as f64;
    let cy = inside.iter().map(|&i| (i / width) as f64).sum::<f64>() / n;
    let cx = inside.iter().map(|&i| (i % width) as f64).sum::<f64>() / n;
    let best = inside
        .iter()
        .copied()
        .min_by(|&a, &b| {
            let d = |i: usize| ((i / width) as f64 - cy).powi(2) + ((i % width) as f64 - cx).powi(2);
            d(a).total_cmp(&d(b)).then(a.cmp(&b))
        })
        .expect("non-empty");
    Some([best / width, best % width])
}

/// Indices of scenes without and with overlapping symbols.
pub fn split_by_overlap(flags: &[bool]) -> (Vec<usize>, Vec<usize>) {
    let mut clean = Vec::new();
    let mut overlapping = Vec::new();
    for (i, &f) in flags.iter().enumerate() {
        if f {
            overlapping.push(i);
        } else {
            clean.push(i);
        }
    }
    (clean, overlapping)
}

fn shade(rng: &mut ChaCha8Rng, min_value: f64) -> PatternSpec {
    let angle = rng.gen_range(0.0..2.0 * PI);
    PatternSpec::Gradient {
        mode: GradientMode::Linear { angle },
        stops: vec![random_hsv(rng, min_value), random_hsv(rng, min_value)],
    }
}

/// Composes counting scenes over one alphabet.
pub struct SceneComposer<'r, 'c> {
    renderer: &'r Renderer<'c>,
    alphabet: Alphabet,
    spec: SceneSpec,
    others: Vec<char>,
}

impl<'r, 'c> SceneComposer<'r, 'c> {
    pub fn new(renderer: &'r Renderer<'c>, alphabet: Alphabet, spec: SceneSpec) -> Result<Self, SceneError> {
        let [lo, hi] = spec.count;
        if lo < 1 || lo > hi {
            return Err(SceneError::Spec(format!("count range {lo}..={hi} must start at 1 or more")));
        }
        if !(0.0..=1.0).contains(&spec.p_target) {
            return Err(SceneError::Spec("p_target must lie in [0, 1]".into()));
        }
        let [h, w] = spec.resolution;
        if h < MIN_RESOLUTION || w < MIN_RESOLUTION {
            return Err(SceneError::Spec(format!("resolution {h}x{w} is below 8x8")));
        }
        let scale_ok = match spec.scale {
            ScaleLaw::Fixed { value } => value > 0.0,
            ScaleLaw::LogNormal { median, sigma } => median > 0.0 && sigma >= 0.0,
        };
        if !scale_ok {
            return Err(SceneError::Spec("scale law must be positive".into()));
        }
        if alphabet.fonts.is_empty() {
            return Err(SceneError::Spec("alphabet has no fonts".into()));
        }
        let others: Vec<char> = alphabet.codepoints.iter().copied().filter(|&c| c != spec.target).collect();
        if others.is_empty() && spec.p_target < 1.0 {
            return Err(SceneError::Spec("alphabet has no symbol besides the target".into()));
        }
        Ok(Self { renderer, alphabet, spec, others })
    }

    pub fn spec(&self) -> &SceneSpec {
        &self.spec
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Everything about symbol `k` except its position.
    fn symbol(&self, stream: &Substream, k: u64) -> SymbolAttributes {
        let s = stream.child("symbol", k);
        let mut rng = s.rng("char");
        let c = if rng.gen::<f64>() < self.spec.p_target {
            self.spec.target
        } else {
            self.others[rng.gen_range(0..self.others.len())]
        };
        let font = self.alphabet.fonts[s.rng("font").gen_range(0..self.alphabet.fonts.len())].clone();
        let scale = self.spec.scale.sample(&mut s.rng("scale"));
        let mut rng = s.rng("rotation");
        let rotation = loop {
            let e: f64 = StandardNormal.sample(&mut rng);
            let r = defaults::ROTATION_STD * e;
            if r.abs() <= FRAC_PI_3 {
                break r;
            }
        };
        SymbolAttributes {
            char: c,
            font,
            language: self.alphabet.language.clone(),
            translation: [0.0, 0.0],
            scale,
            rotation,
            bold: s.rng("bold").gen::<f64>() < defaults::BOLD_P,
            italic: s.rng("italic").gen::<f64>() < defaults::ITALIC_P,
            foreground: shade(&mut s.rng("foreground"), self.spec.shade_min_value),
            background: PatternSpec::Solid { color: [0.0; 3] },
            resolution: self.spec.resolution,
            visible: true,
        }
    }

    /// Uniform position inside the frame: translation `U(-1, 1)` per axis.
    fn position(stream: &Substream, k: u64, attempt: u64) -> [f64; 2] {
        let mut rng = stream.child("symbol", k).child("position", attempt).rng("translation");
        [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]
    }

    pub fn compose(&self, master_seed: u64, index: u64) -> Result<SceneSample, SceneError> {
        let stream = Substream::new(master_seed, index);
        let [lo, hi] = self.spec.count;
        let n = stream.rng("count").gen_range(lo..=hi) as u64;
        let mut symbols: Vec<SymbolAttributes> = (0..n).map(|k| self.symbol(&stream, k)).collect();
        let background = shade(&mut stream.rng("background"), self.spec.shade_min_value);
        let mut coverages = Vec::with_capacity(n as usize);
        let mut masks: Vec<Vec<u8>> = Vec::with_capacity(n as usize);
        let mut retries = 0u32;
        let fail = || SceneError::Overlap { index, policy: self.spec.overlap };

        match self.spec.overlap {
            OverlapPolicy::Allow | OverlapPolicy::Require => {
                let mut attempt = 0u64;
                loop {
                    coverages.clear();
                    for (k, s) in symbols.iter_mut().enumerate() {
                        s.translation = Self::position(&stream, k as u64, attempt);
                        coverages.push(self.renderer.symbol_coverage(s)?);
                    }
                    masks = coverages.iter().map(|c| c.to_mask()).collect();
                    if self.spec.overlap == OverlapPolicy::Allow || masks_overlap(&masks) {
                        break;
                    }
                    retries += 1;
                    attempt += 1;
                    if retries > MAX_RETRIES {
                        return Err(fail());
                    }
                }
            }
            OverlapPolicy::Reject => {
                let [h, w] = self.spec.resolution;
                let mut occupied = vec![false; h * w];
                for (k, s) in symbols.iter_mut().enumerate() {
                    let mut attempt = 0u64;
                    loop {
                        s.translation = Self::position(&stream, k as u64, attempt);
                        let cov = self.renderer.symbol_coverage(s)?;
                        let mask = cov.to_mask();
                        let clash = mask.iter().zip(&occupied).any(|(&m, &o)| m >= 128 && o);
                        if !clash {
                            for (o, &m) in occupied.iter_mut().zip(&mask) {
                                *o |= m >= 128;
                            }
                            coverages.push(cov);
                            masks.push(mask);
                            break;
                        }
                        retries += 1;
                        attempt += 1;
                        if retries > MAX_RETRIES {
                            return Err(fail());
                        }
                    }
                }
            }
        }

        let [h, w] = self.spec.resolution;
        let mut image = background.paint(h, w);
        let mut instance_ids = vec![0u16; h * w];
        for (k, ((s, cov), mask)) in symbols.iter_mut().zip(&coverages).zip(&masks).enumerate() {
            s.background = background.clone();
            let fg = paint_region(&s.foreground, &cov.data, h, w);
            composite(&mut image, &fg, &cov.data);
            for (id, &m) in instance_ids.iter_mut().zip(mask) {
                if m >= 128 {
                    *id = (k + 1) as u16;
                }
            }
        }
        let points = masks
            .iter()
            .map(|m| point_annotation(m, w).unwrap_or([h / 2, w / 2]))
            .collect();
        let target_count = symbols.iter().filter(|s| s.char == self.spec.target).count();
        let overlap = masks_overlap(&masks);
        Ok(SceneSample {
            height: h,
            width: w,
            image: image.iter().flat_map(|p| p.map(crate::color::quantize)).collect(),
            instance_masks: masks,
            instance_ids,
            symbols,
            points,
            target_count,
            overlap,
        })
    }
}
