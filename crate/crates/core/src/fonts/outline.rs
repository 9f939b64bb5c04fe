//! Flattened glyph outlines.

use serde::{Deserialize, Serialize};

/// Shear applied to synthesize an italic face.
pub const SYNTHETIC_ITALIC_SHEAR: f64 = 0.2;

/// Outward offset applied per side to synthesize a bold face, in ems.
pub const SYNTHETIC_BOLD_STRENGTH: f64 = 1.0 / 48.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Axis-aligned box, `min` inclusive, `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new((self.min.x + self.max.x) * 0.5, (self.min.y + self.max.y) * 0.5)
    }

    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a Point>) -> Option<BBox> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut b = BBox { min: first, max: first };
        for p in it {
            b.min.x = b.min.x.min(p.x);
            b.min.y = b.min.y.min(p.y);
            b.max.x = b.max.x.max(p.x);
            b.max.y = b.max.y.max(p.y);
        }
        Some(b)
    }
}

/// A glyph as closed polygons in font units (y up). Curves are flattened at
/// build time with a fixed tolerance, so two builds of the same glyph are
/// identical.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Outline {
    pub contours: Vec<Vec<Point>>,
    pub units_per_em: f64,
}

impl Outline {
    pub fn is_empty(&self) -> bool {
        self.contours.iter().all(|c| c.len() < 3)
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.contours.iter().flatten()
    }

    pub fn bbox(&self) -> Option<BBox> {
        BBox::of_points(self.points())
    }

    /// Sum of signed contour areas (positive = counter-clockwise in y-up).
    pub fn signed_area(&self) -> f64 {
        self.contours.iter().map(|c| signed_area(c)).sum()
    }

    /// Horizontal shear around the baseline.
    pub fn sheared(mut self, shear: f64) -> Self {
        for p in self.contours.iter_mut().flatten() {
            p.x += shear * p.y;
        }
        self
    }

    /// Moves every edge outward by `strength` font units, thickening strokes.
    /// Holes shrink by the same amount.
    pub fn emboldened(mut self, strength: f64) -> Self {
        // Outward normal is on the right of travel for counter-clockwise fill.
        let sign = if self.signed_area() >= 0.0 { 1.0 } else { -1.0 };
        for contour in &mut self.contours {
            let n = contour.len();
            if n < 3 {
                continue;
            }
            let src = contour.clone();
            for i in 0..n {
                let prev = src[(i + n - 1) % n];
                let cur = src[i];
                let next = src[(i + 1) % n];
                let n1 = edge_normal(prev, cur, sign);
                let n2 = edge_normal(cur, next, sign);
                let (mx, my) = match (n1, n2) {
                    (Some(a), Some(b)) => {
                        let d = 1.0 + a.0 * b.0 + a.1 * b.1;
                        // Limit the miter on sharp turns.
                        let d = d.max(0.5);
                        ((a.0 + b.0) / d, (a.1 + b.1) / d)
                    }
                    (Some(a), None) | (None, Some(a)) => a,
                    (None, None) => (0.0, 0.0),
                };
                contour[i] = Point::new(cur.x + strength * mx, cur.y + strength * my);
            }
        }
        self
    }
}

fn edge_normal(a: Point, b: Point, sign: f64) -> Option<(f64, f64)> {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len = (dx * dx + dy * dy).sqrt();
    if len < 1e-12 {
        return None;
    }
    Some((sign * dy / len, -sign * dx / len))
}

pub fn signed_area(contour: &[Point]) -> f64 {
    let n = contour.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = contour[i];
        let b = contour[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    acc * 0.5
}

/// Collects a `ttf_parser` outline into flattened contours.
pub(crate) struct FlatteningBuilder {
    contours: Vec<Vec<Point>>,
    current: Vec<Point>,
    tolerance: f64,
}

impl FlatteningBuilder {
    pub fn new(units_per_em: f64) -> Self {
        Self {
            contours: Vec::new(),
            current: Vec::new(),
            tolerance: units_per_em / 1000.0,
        }
    }

    pub fn finish(mut self, units_per_em: f64) -> Outline {
        self.flush();
        Outline { contours: self.contours, units_per_em }
    }

    fn flush(&mut self) {
        let mut c = std::mem::take(&mut self.current);
        if c.len() > 1 && c.first() == c.last() {
            c.pop();
        }
        if c.len() >= 3 {
            self.contours.push(c);
        }
    }

    fn last(&self) -> Point {
        *self.current.last().unwrap_or(&Point::new(0.0, 0.0))
    }

    fn segments(&self, control_len: f64) -> usize {
        // Subdivision count grows with the square root of curve length.
        ((control_len / self.tolerance).sqrt() * 0.5).ceil().clamp(1.0, 32.0) as usize
    }
}

fn dist(a: Point, b: Point) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

impl ttf_parser::OutlineBuilder for FlatteningBuilder {
    fn move_to(&mut self, x: f32, y: f32) {
        self.flush();
        self.current.push(Point::new(f64::from(x), f64::from(y)));
    }

    fn line_to(&mut self, x: f32, y: f32) {
        self.current.push(Point::new(f64::from(x), f64::from(y)));
    }

    fn quad_to(&mut self, x1: f32, y1: f32, x: f32, y: f32) {
        let p0 = self.last();
        let p1 = Point::new(f64::from(x1), f64::from(y1));
        let p2 = Point::new(f64::from(x), f64::from(y));
        let n = self.segments(dist(p0, p1) + dist(p1, p2));
        for i in 1..=n {
            let t = i as f64 / n as f64;
            let u = 1.0 - t;
            self.current.push(Point::new(
                u * u * p0.x + 2.0 * u * t * p1.x + t * t * p2.x,
                u * u * p0.y + 2.0 * u * t * p1.y + t * t * p2.y,
            ));
        }
    }

    fn curve_to(&mut self, x1: f32, y1: f32, x2: f32, y2: f32, x: f32, y: f32) {
        let p0 = self.last();
        let p1 = Point::new(f64::from(x1), f64::from(y1));
        let p2 = Point::new(f64::from(x2), f64::from(y2));
        let p3 = Point::new(f64::from(x), f64::from(y));
        let n = self.segments(dist(p0, p1) + dist(p1, p2) + dist(p2, p3));
        for i in 1..=n {
            let t = i as f64 / n as f64;
            let u = 1.0 - t;
            let (a, b, c, d) = (u * u * u, 3.0 * u * u * t, 3.0 * u * t * t, t * t * t);
            self.current.push(Point::new(
                a * p0.x + b * p1.x + c * p2.x + d * p3.x,
                a * p0.y + b * p1.y + c * p2.y + d * p3.y,
            ));
        }
    }

    fn close(&mut self) {
        self.flush();
    }
}
