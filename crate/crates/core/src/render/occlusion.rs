//! Distractor shapes drawn over a rendered symbol.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::color::{random_hsv, Rgb};
use crate::fonts::{Outline, Point};

pub const CIRCLE: char = '\u{25CF}';
pub const SQUARE: char = '\u{25A0}';
pub const TRIANGLE: char = '\u{25B2}';

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum CountLaw {
    Fixed { n: u32 },
    /// One occluder with probability `p`, none otherwise.
    Bernoulli { p: f64 },
    /// Uniform on `lo..=hi`.
    Uniform { lo: u32, hi: u32 },
}

impl CountLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match *self {
            CountLaw::Fixed { n } => n,
            CountLaw::Bernoulli { p } => u32::from(rng.gen::<f64>() < p),
            CountLaw::Uniform { lo, hi } => rng.gen_range(lo..=hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccluderSpec {
    pub shapes: Vec<char>,
    pub count: CountLaw,
    /// Uniform range, same meaning as the symbol scale.
    pub scale: [f64; 2],
    /// Uniform range per axis, same meaning as the symbol translation.
    pub translation: [f64; 2],
    /// Fixed color; `None` draws a random HSV color per occluder.
    pub color: Option<Rgb>,
}

impl Default for OccluderSpec {
    fn default() -> Self {
        Self {
            shapes: vec![CIRCLE, SQUARE, TRIANGLE],
            count: CountLaw::Fixed { n: 1 },
            scale: [0.4, 0.7],
            translation: [-1.0, 1.0],
            color: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OccluderError {
    #[error("occluder spec has no shapes")]
    NoShapes,
    #[error("occluder scale range {0:?} must be positive and ordered")]
    Scale([String; 2]),
    #[error("occluder probability must lie in [0, 1]")]
    Probability,
    #[error("occluder count range is empty")]
    CountRange,
}

impl OccluderSpec {
    pub fn validate(&self) -> Result<(), OccluderError> {
        if self.shapes.is_empty() {
            return Err(OccluderError::NoShapes);
        }
        let [lo, hi] = self.scale;
        if !(lo > 0.0 && lo <= hi) {
            return Err(OccluderError::Scale([lo.to_string(), hi.to_string()]));
        }
        match self.count {
            CountLaw::Bernoulli { p } if !(0.0..=1.0).contains(&p) => Err(OccluderError::Probability),
            CountLaw::Uniform { lo, hi } if lo > hi => Err(OccluderError::CountRange),
            _ => Ok(()),
        }
    }

    /// Draws the occluders of one image.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Occluder> {
        let n = self.count.sample(rng);
        (0..n)
            .map(|_| {
                let shape = self.shapes[rng.gen_range(0..self.shapes.len())];
                let [slo, shi] = self.scale;
                let scale = if slo == shi { slo } else { rng.gen_range(slo..shi) };
                let [tlo, thi] = self.translation;
                let mut t = [tlo; 2];
                if tlo < thi {
                    t = [rng.gen_range(tlo..thi), rng.gen_range(tlo..thi)];
                }
                let color = self.color.unwrap_or_else(|| random_hsv(rng, 0.0));
                Occluder { shape, scale, translation: t, color, overlap: 0.0 }
            })
            .collect()
    }
}

/// One drawn occluder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occluder {
    pub shape: char,
    pub scale: f64,
    pub translation: [f64; 2],
    pub color: Rgb,
    /// Fraction of symbol pixels (mask >= 128) under this occluder.
    pub overlap: f64,
}

/// Outline used when no installed font draws `shape`. Units per em 1000, y up.
pub fn builtin_shape(shape: char) -> Outline {
    let pts: Vec<Point> = match shape {
        TRIANGLE => vec![Point::new(0.0, 0.0), Point::new(800.0, 0.0), Point::new(400.0, 700.0)],
        CIRCLE => (0..64)
            .map(|i| {
                let a = i as f64 * std::f64::consts::TAU / 64.0;
                Point::new(400.0 + 400.0 * a.cos(), 400.0 + 400.0 * a.sin())
            })
            .collect(),
        _ => vec![
            Point::new(0.0, 0.0),
            Point::new(800.0, 0.0),
            Point::new(800.0, 800.0),
            Point::new(0.0, 800.0),
        ],
    };
    Outline { contours: vec![pts], units_per_em: 1000.0 }
}

/// Fraction of symbol pixels (mask >= 128) where the occluder coverage is
/// at least one half. Zero when the symbol has no pixels.
pub fn overlap_fraction(mask: &[u8], occluder: &[f32]) -> f64 {
    let mut symbol = 0usize;
    let mut hit = 0usize;
    for (&m, &c) in mask.iter().zip(occluder) {
        if m >= 128 {
            symbol += 1;
            if c >= 0.5 {
                hit += 1;
            }
        }
    }
    if symbol == 0 {
        0.0
    } else {
        hit as f64 / symbol as f64
    }
}
