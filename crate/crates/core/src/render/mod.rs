//! Turns attribute records into images and masks.
//!
//! All color math happens in `[0, 1]` floats; quantization to 8 bits is the
//! last step so that pixel noise can be added in between.

mod occlusion;
mod pattern;
mod raster;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attributes::SymbolAttributes;
use crate::color::quantize;
use crate::fonts::{BBox, FontCatalog, FontError, Outline, Point};
use crate::rng::Substream;

pub use occlusion::{
    builtin_shape, overlap_fraction, CountLaw, Occluder, OccluderError, OccluderSpec, CIRCLE, SQUARE, TRIANGLE,
};
pub use pattern::{
    camouflage_palette, fill_camouflage, GradientMode, PatternError, PatternSpec, CAMOUFLAGE_LINE_COUNT,
    CAMOUFLAGE_LINE_WIDTH_32, CAMOUFLAGE_PALETTE_SIZE,
};
pub use raster::{fill_polygons, Coverage, SUBSAMPLES};

/// Smallest supported frame side.
pub const MIN_RESOLUTION: usize = 8;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error(transparent)]
    Font(#[from] FontError),
    #[error("scale must be positive and finite, got {0}")]
    Scale(f64),
    #[error("resolution {0}x{1} is below {MIN_RESOLUTION}x{MIN_RESOLUTION}")]
    Resolution(usize, usize),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Occluder(#[from] OccluderError),
}

/// Top-left corner of a `bbox`-sized box in a `frame`-sized image.
///
/// Each axis maps `t` linearly over the slack `(frame - bbox) / 2`: `0`
/// centers the box, `-1` and `1` put it flush against the borders, and larger
/// magnitudes push it out of the frame.
pub fn translation_to_pixels(t: [f64; 2], bbox: [f64; 2], frame: [f64; 2]) -> [f64; 2] {
    [
        (frame[0] - bbox[0]) * 0.5 * (1.0 + t[0]),
        (frame[1] - bbox[1]) * 0.5 * (1.0 + t[1]),
    ]
}

/// Outline mapped to pixel space (x right, y down).
#[derive(Debug, Clone)]
pub struct Placed {
    pub contours: Vec<Vec<(f64, f64)>>,
    /// Bounds of the placed outline in pixels, possibly outside the frame.
    pub bbox: BBox,
}

/// Scales `outline` so the larger side of `bbox` spans `scale * min(h, w)`
/// pixels, rotates it counter-clockwise by `rotation` around the box center,
/// then positions the rotated bounds with [`translation_to_pixels`].
pub fn place_outline(
    outline: &Outline,
    bbox: &BBox,
    scale: f64,
    rotation: f64,
    translation: [f64; 2],
    height: usize,
    width: usize,
) -> Placed {
    let side = bbox.width().max(bbox.height()).max(1e-9);
    let px = scale * height.min(width) as f64 / side;
    let c = bbox.center();
    let (sin, cos) = rotation.sin_cos();
    let mut contours: Vec<Vec<(f64, f64)>> = outline
        .contours
        .iter()
        .map(|contour| {
            contour
                .iter()
                .map(|p| {
                    let x = (p.x - c.x) * px;
                    let y = (c.y - p.y) * px;
                    (x * cos + y * sin, -x * sin + y * cos)
                })
                .collect()
        })
        .collect();
    let rotated = BBox::of_points(
        contours.iter().flatten().map(|&(x, y)| Point::new(x, y)).collect::<Vec<_>>().iter(),
    )
    .unwrap_or(BBox { min: Point::new(0.0, 0.0), max: Point::new(0.0, 0.0) });
    let [left, top] = translation_to_pixels(
        translation,
        [rotated.width(), rotated.height()],
        [width as f64, height as f64],
    );
    let dx = left - rotated.min.x;
    let dy = top - rotated.min.y;
    for p in contours.iter_mut().flatten() {
        p.0 += dx;
        p.1 += dy;
    }
    let bbox = BBox {
        min: Point::new(left, top),
        max: Point::new(left + rotated.width(), top + rotated.height()),
    };
    Placed { contours, bbox }
}

/// A render before quantization.
#[derive(Debug, Clone)]
pub struct FloatRender {
    pub height: usize,
    pub width: usize,
    pub image: Vec<[f32; 3]>,
    /// Symbol coverage before occluders; all zero when the symbol is hidden.
    pub coverage: Coverage,
    pub occluders: Vec<Occluder>,
}

impl FloatRender {
    pub fn mask(&self) -> Vec<u8> {
        self.coverage.to_mask()
    }

    /// Interleaved 8-bit RGB.
    pub fn image_u8(&self) -> Vec<u8> {
        self.image.iter().flat_map(|p| p.map(quantize)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderedSample {
    pub height: usize,
    pub width: usize,
    /// Row-major interleaved RGB, `height * width * 3` bytes.
    pub image: Vec<u8>,
    /// Symbol coverage, 255 = fully covered.
    pub mask: Vec<u8>,
    pub attributes: SymbolAttributes,
    pub occluders: Vec<Occluder>,
}

/// Blends `paint` over `image` with per-pixel weight `cov`.
pub fn composite(image: &mut [[f32; 3]], paint: &[[f32; 3]], cov: &[f32]) {
    for ((dst, src), &c) in image.iter_mut().zip(paint).zip(cov) {
        if c <= 0.0 {
            continue;
        }
        for k in 0..3 {
            dst[k] = dst[k] * (1.0 - c) + src[k] * c;
        }
    }
}

/// Paints `pattern` where `cov` is positive; other pixels are left black.
pub fn paint_region(pattern: &PatternSpec, cov: &[f32], height: usize, width: usize) -> Vec<[f32; 3]> {
    let region: Vec<bool> = cov.iter().map(|&c| c > 0.0).collect();
    pattern.paint_where(&region, height, width)
}

/// Renders attribute records against one font catalog.
#[derive(Debug)]
pub struct Renderer<'a> {
    catalog: &'a FontCatalog,
    shapes: Mutex<HashMap<char, Arc<Outline>>>,
}

impl<'a> Renderer<'a> {
    pub fn new(catalog: &'a FontCatalog) -> Self {
        Self { catalog, shapes: Mutex::new(HashMap::new()) }
    }

    pub fn catalog(&self) -> &'a FontCatalog {
        self.catalog
    }

    /// Outline of an occluder shape: the glyph from the first eligible face
    /// that has one, or a built-in polygon.
    pub fn shape_outline(&self, shape: char) -> Arc<Outline> {
        let mut cache = self.shapes.lock().expect("shape cache poisoned");
        cache
            .entry(shape)
            .or_insert_with(|| {
                let outline = self
                    .catalog
                    .face_with_glyph(shape)
                    .and_then(|r| self.catalog.glyph_outline(&r.id, shape, false, false).ok())
                    .map(|g| g.outline)
                    .unwrap_or_else(|| builtin_shape(shape));
                Arc::new(outline)
            })
            .clone()
    }

    /// Coverage of the symbol alone, ignoring `visible` and textures.
    pub fn symbol_coverage(&self, attrs: &SymbolAttributes) -> Result<Coverage, RenderError> {
        let [h, w] = attrs.resolution;
        check_frame(h, w)?;
        if !(attrs.scale > 0.0 && attrs.scale.is_finite()) {
            return Err(RenderError::Scale(attrs.scale));
        }
        let glyph = self.catalog.glyph_outline(&attrs.font, attrs.char, attrs.bold, attrs.italic)?;
        let placed = place_outline(&glyph.outline, &glyph.bbox, attrs.scale, attrs.rotation, attrs.translation, h, w);
        Ok(fill_polygons(&placed.contours, w, h))
    }

    /// Background, symbol, then occluders, in floating point.
    pub fn render_float(
        &self,
        attrs: &SymbolAttributes,
        occluders: Option<&OccluderSpec>,
        stream: &Substream,
    ) -> Result<FloatRender, RenderError> {
        let [h, w] = attrs.resolution;
        check_frame(h, w)?;
        attrs.foreground.validate()?;
        attrs.background.validate()?;
        let mut image = attrs.background.paint(h, w);
        let coverage = if attrs.visible {
            let cov = self.symbol_coverage(attrs)?;
            let fg = paint_region(&attrs.foreground, &cov.data, h, w);
            composite(&mut image, &fg, &cov.data);
            cov
        } else {
            if !(attrs.scale > 0.0 && attrs.scale.is_finite()) {
                return Err(RenderError::Scale(attrs.scale));
            }
            Coverage::empty(w, h)
        };

        let mut drawn = Vec::new();
        if let Some(spec) = occluders {
            spec.validate()?;
            let mut rng = stream.rng("occluders");
            drawn = spec.sample(&mut rng);
            if !drawn.is_empty() {
                let mask = coverage.to_mask();
                for occ in &mut drawn {
                    let cov = self.occluder_coverage(occ, h, w);
                    occ.overlap = overlap_fraction(&mask, &cov.data);
                    let paint = vec![occ.color.map(|v| v as f32); h * w];
                    composite(&mut image, &paint, &cov.data);
                }
            }
        }
        Ok(FloatRender { height: h, width: w, image, coverage, occluders: drawn })
    }

    pub fn occluder_coverage(&self, occ: &Occluder, height: usize, width: usize) -> Coverage {
        let outline = self.shape_outline(occ.shape);
        let bbox = outline.bbox().expect("shape outlines are non-empty");
        let placed = place_outline(&outline, &bbox, occ.scale, 0.0, occ.translation, height, width);
        fill_polygons(&placed.contours, width, height)
    }

    pub fn render(
        &self,
        attrs: &SymbolAttributes,
        occluders: Option<&OccluderSpec>,
        stream: &Substream,
    ) -> Result<RenderedSample, RenderError> {
        let f = self.render_float(attrs, occluders, stream)?;
        Ok(RenderedSample {
            height: f.height,
            width: f.width,
            image: f.image_u8(),
            mask: f.mask(),
            attributes: attrs.clone(),
            occluders: f.occluders,
        })
    }
}

fn check_frame(h: usize, w: usize) -> Result<(), RenderError> {
    if h < MIN_RESOLUTION || w < MIN_RESOLUTION {
        return Err(RenderError::Resolution(h, w));
    }
    Ok(())
}
