//! Foreground and background textures.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::color::{random_hsv, Rgb};

/// Stroke width of camouflage lines at a 32 px frame; scales with resolution.
pub const CAMOUFLAGE_LINE_WIDTH_32: f64 = 2.0;
pub const CAMOUFLAGE_LINE_COUNT: u32 = 40;
pub const CAMOUFLAGE_PALETTE_SIZE: u32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GradientMode {
    /// Colors vary along `angle` (radians, image x axis = 0, y down).
    Linear { angle: f64 },
    /// Colors vary with distance from `center` (fractions of width, height);
    /// `radius` is a fraction of the smaller image side.
    Radial { center: [f64; 2], radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PatternSpec {
    Solid {
        color: Rgb,
    },
    Gradient {
        #[serde(flatten)]
        mode: GradientMode,
        /// Two or three colors, evenly spaced.
        stops: Vec<Rgb>,
    },
    /// Parallel colored strokes. Foreground and background of one image use
    /// the same `palette_seed`, so they draw from the same colors and differ
    /// only by `orientation`.
    Camouflage {
        palette_seed: u64,
        palette_size: u32,
        /// Stroke direction in `[0, pi)`.
        orientation: f64,
        /// Pixels.
        line_width: f64,
        line_count: u32,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PatternError {
    #[error("gradient needs 2 or 3 stops, got {0}")]
    GradientStops(usize),
    #[error("camouflage orientation {0} outside [0, pi)")]
    Orientation(f64),
    #[error("camouflage needs a positive line width, line count and palette size")]
    Camouflage,
}

impl PatternSpec {
    pub fn validate(&self) -> Result<(), PatternError> {
        match self {
            PatternSpec::Solid { .. } => Ok(()),
            PatternSpec::Gradient { stops, .. } => {
                if (2..=3).contains(&stops.len()) {
                    Ok(())
                } else {
                    Err(PatternError::GradientStops(stops.len()))
                }
            }
            PatternSpec::Camouflage { orientation, line_width, line_count, palette_size, .. } => {
                if !(0.0..PI).contains(orientation) {
                    return Err(PatternError::Orientation(*orientation));
                }
                if *line_width <= 0.0 || *line_count == 0 || *palette_size == 0 {
                    return Err(PatternError::Camouflage);
                }
                Ok(())
            }
        }
    }

    /// Paints the pattern over a full `height x width` frame.
    pub fn paint(&self, height: usize, width: usize) -> Vec<[f32; 3]> {
        self.paint_where(&vec![true; height * width], height, width)
    }

    /// Paints the pixels where `region` is set; the others stay black.
    pub fn paint_where(&self, region: &[bool], height: usize, width: usize) -> Vec<[f32; 3]> {
        let mut out = vec![[0.0; 3]; height * width];
        match self {
            PatternSpec::Solid { color } => {
                let c = to_f32(*color);
                for (o, _) in out.iter_mut().zip(region).filter(|(_, &r)| r) {
                    *o = c;
                }
            }
            PatternSpec::Gradient { mode, stops } => fill_gradient(&mut out, region, mode, stops, height, width),
            PatternSpec::Camouflage { .. } => fill_camouflage(&mut out, region, self, height, width),
        }
        out
    }
}

fn to_f32(c: Rgb) -> [f32; 3] {
    [c[0] as f32, c[1] as f32, c[2] as f32]
}

fn lerp_stops(stops: &[Rgb], t: f64) -> Rgb {
    let t = t.clamp(0.0, 1.0);
    match stops.len() {
        0 => [0.0; 3],
        1 => stops[0],
        n => {
            let pos = t * (n - 1) as f64;
            let i = (pos.floor() as usize).min(n - 2);
            let f = pos - i as f64;
            let (a, b) = (stops[i], stops[i + 1]);
            [a[0] + (b[0] - a[0]) * f, a[1] + (b[1] - a[1]) * f, a[2] + (b[2] - a[2]) * f]
        }
    }
}

fn fill_gradient(
    out: &mut [[f32; 3]],
    region: &[bool],
    mode: &GradientMode,
    stops: &[Rgb],
    height: usize,
    width: usize,
) {
    let (h, w) = (height as f64, width as f64);
    let (s, c) = match mode {
        GradientMode::Linear { angle } => angle.sin_cos(),
        GradientMode::Radial { .. } => (0.0, 0.0),
    };
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            if !region[i] {
                continue;
            }
            let px = x as f64 + 0.5;
            let py = y as f64 + 0.5;
            let t = match mode {
                GradientMode::Linear { .. } => {
                    let extent = 0.5 * (c.abs() * w + s.abs() * h);
                    let proj = (px - 0.5 * w) * c + (py - 0.5 * h) * s;
                    0.5 * (proj / extent.max(1e-9) + 1.0)
                }
                GradientMode::Radial { center, radius } => {
                    let dx = px - center[0] * w;
                    let dy = py - center[1] * h;
                    (dx * dx + dy * dy).sqrt() / (radius * h.min(w)).max(1e-9)
                }
            };
            out[i] = to_f32(lerp_stops(stops, t));
        }
    }
}

/// Colors shared by all camouflage regions with the same palette seed.
pub fn camouflage_palette(palette_seed: u64, palette_size: u32) -> Vec<Rgb> {
    let mut rng = ChaCha8Rng::seed_from_u64(palette_seed);
    (0..palette_size).map(|_| random_hsv(&mut rng, 0.0)).collect()
}

/// Paints camouflage strokes into the pixels where `region` is set.
///
/// Strokes run along `orientation`, are `line_width` pixels wide and lie side
/// by side, centered on the frame; stroke `k` takes palette color
/// `k mod palette_size`. Pixels are sampled at their centers without
/// anti-aliasing, so every painted pixel carries a palette color.
pub fn fill_camouflage(out: &mut [[f32; 3]], region: &[bool], spec: &PatternSpec, height: usize, width: usize) {
    let PatternSpec::Camouflage { palette_seed, palette_size, orientation, line_width, line_count } = spec else {
        return;
    };
    if !region.iter().any(|&r| r) {
        return;
    }
    let palette: Vec<[f32; 3]> = camouflage_palette(*palette_seed, *palette_size).into_iter().map(to_f32).collect();
    // Unit normal to the strokes.
    let (s, c) = orientation.sin_cos();
    let (nx, ny) = (-s, c);
    let (cx, cy) = (0.5 * width as f64, 0.5 * height as f64);
    let count = f64::from(*line_count);
    let k = palette.len() as i64;
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            if !region[i] {
                continue;
            }
            let d = (x as f64 + 0.5 - cx) * nx + (y as f64 + 0.5 - cy) * ny;
            let stroke = (d / line_width + 0.5 * count).floor();
            let idx = if stroke < 0.0 || stroke >= count { 0 } else { (stroke as i64).rem_euclid(k) as usize };
            out[i] = palette[idx];
        }
    }
}
