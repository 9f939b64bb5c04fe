//! Label noise, pixel noise and symbol omission.
//!
//! Every transform draws from its own slot of the sample's stream, so turning
//! one corruption on or off never changes anything else about a sample.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attributes::SymbolAttributes;
use crate::render::OccluderSpec;
use crate::rng::Substream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelNoise {
    /// Probability that an image receives noise.
    pub p_image: f64,
    /// Standard deviation in `[0, 1]` intensity units.
    pub sigma: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    #[serde(default)]
    pub label_noise_p: f64,
    #[serde(default)]
    pub pixel_noise: Option<PixelNoise>,
    #[serde(default)]
    pub missing_p: f64,
    /// Occluders drawn over each image.
    #[serde(default)]
    pub occlusion: Option<OccluderSpec>,
}

#[derive(Debug, Error, PartialEq)]
pub enum CorruptionError {
    #[error("{0} must lie in [0, 1]")]
    Probability(&'static str),
    #[error("pixel noise sigma must be finite and non-negative")]
    Sigma,
    #[error("occlusion: {0}")]
    Occluder(String),
}

impl CorruptionSpec {
    pub fn is_empty(&self) -> bool {
        self == &Self::default()
    }

    pub fn validate(&self) -> Result<(), CorruptionError> {
        let prob = |name, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(CorruptionError::Probability(name))
            }
        };
        prob("label_noise_p", self.label_noise_p)?;
        prob("missing_p", self.missing_p)?;
        if let Some(n) = self.pixel_noise {
            prob("pixel_noise.p_image", n.p_image)?;
            if !(n.sigma >= 0.0 && n.sigma.is_finite()) {
                return Err(CorruptionError::Sigma);
            }
        }
        if let Some(o) = &self.occlusion {
            o.validate().map_err(|e| CorruptionError::Occluder(e.to_string()))?;
        }
        Ok(())
    }
}

/// Outcome of [`corrupt_label`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoisyLabel {
    pub label: usize,
    /// The label was redrawn. A redraw may land on the true label.
    pub resampled: bool,
}

/// With probability `p` replaces `true_label` by a label uniform over all
/// `n_classes`, the true one included.
pub fn corrupt_label(true_label: usize, n_classes: usize, p: f64, rng: &mut ChaCha8Rng) -> NoisyLabel {
    if p > 0.0 && n_classes > 0 && rng.gen::<f64>() < p {
        NoisyLabel { label: rng.gen_range(0..n_classes), resampled: true }
    } else {
        NoisyLabel { label: true_label, resampled: false }
    }
}

/// With probability `p_image` adds `N(0, sigma)` to every channel of every
/// pixel and clamps to `[0, 1]`. Returns whether noise was added.
pub fn corrupt_pixels(image: &mut [[f32; 3]], p_image: f64, sigma: f64, rng: &mut ChaCha8Rng) -> bool {
    if !(rng.gen::<f64>() < p_image) {
        return false;
    }
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).expect("validated sigma");
        for px in image.iter_mut() {
            for v in px.iter_mut() {
                let x = f64::from(*v) + normal.sample(rng);
                *v = x.clamp(0.0, 1.0) as f32;
            }
        }
    }
    true
}

/// With probability `p` marks the symbol as not drawn. Returns whether it was.
pub fn omit_symbol(attrs: &mut SymbolAttributes, p: f64, rng: &mut ChaCha8Rng) -> bool {
    let omit = rng.gen::<f64>() < p;
    if omit {
        attrs.visible = false;
    }
    omit
}

/// Per-sample corruption slots.
pub mod slots {
    pub const LABEL: &str = "corrupt.label";
    pub const PIXELS: &str = "corrupt.pixels";
    pub const MISSING: &str = "corrupt.missing";
}

pub fn label_rng(stream: &Substream) -> ChaCha8Rng {
    stream.rng(slots::LABEL)
}

pub fn pixel_rng(stream: &Substream) -> ChaCha8Rng {
    stream.rng(slots::PIXELS)
}

pub fn missing_rng(stream: &Substream) -> ChaCha8Rng {
    stream.rng(slots::MISSING)
}
