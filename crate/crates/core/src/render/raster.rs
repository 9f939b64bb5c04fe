//! Scanline polygon fill with anti-aliasing.
//!
//! Each pixel row is sampled by four sub-scanlines. Along a sub-scanline the
//! covered spans are computed exactly (non-zero winding) and their
//! horizontal extent is accumulated with fractional end pixels, so the
//! result approximates true area coverage without any platform-dependent
//! arithmetic.

pub const SUBSAMPLES: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Edge {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    winding: i32,
}

/// Per-pixel coverage in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Coverage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl Coverage {
    pub fn empty(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![0.0; width * height] }
    }

    pub fn at(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    /// 8-bit mask; 255 is full coverage.
    pub fn to_mask(&self) -> Vec<u8> {
        self.data.iter().map(|&c| crate::color::quantize(c)).collect()
    }
}

/// Fills closed polygons given in pixel coordinates (y down).
pub fn fill_polygons(contours: &[Vec<(f64, f64)>], width: usize, height: usize) -> Coverage {
    let mut cov = Coverage::empty(width, height);
    let mut edges = Vec::new();
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for contour in contours {
        let n = contour.len();
        if n < 3 {
            continue;
        }
        for i in 0..n {
            let (ax, ay) = contour[i];
            let (bx, by) = contour[(i + 1) % n];
            if ay == by {
                continue;
            }
            ymin = ymin.min(ay.min(by));
            ymax = ymax.max(ay.max(by));
            edges.push(if ay < by {
                Edge { x0: ax, y0: ay, x1: bx, y1: by, winding: 1 }
            } else {
                Edge { x0: bx, y0: by, x1: ax, y1: ay, winding: -1 }
            });
        }
    }
    if edges.is_empty() || width == 0 || height == 0 {
        return cov;
    }
    edges.sort_by(|a, b| a.y0.total_cmp(&b.y0));

    let row_lo = ymin.floor().max(0.0) as usize;
    let row_hi = (ymax.ceil().max(0.0) as usize).min(height);
    let weight = 1.0 / SUBSAMPLES as f64;
    let mut crossings: Vec<(f64, i32)> = Vec::with_capacity(16);
    let mut row = vec![0.0f64; width];

    for py in row_lo..row_hi {
        row.iter_mut().for_each(|v| *v = 0.0);
        let mut touched = false;
        for sub in 0..SUBSAMPLES {
            let ys = py as f64 + (sub as f64 + 0.5) * weight;
            crossings.clear();
            for e in &edges {
                if e.y0 > ys {
                    break;
                }
                if ys < e.y1 {
                    let x = e.x0 + (ys - e.y0) * (e.x1 - e.x0) / (e.y1 - e.y0);
                    crossings.push((x, e.winding));
                }
            }
            if crossings.len() < 2 {
                continue;
            }
            crossings.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut wind = 0;
            for i in 0..crossings.len() - 1 {
                wind += crossings[i].1;
                if wind != 0 {
                    touched |= add_span(&mut row, crossings[i].0, crossings[i + 1].0, weight);
                }
            }
        }
        if touched {
            let out = &mut cov.data[py * width..(py + 1) * width];
            for (o, v) in out.iter_mut().zip(&row) {
                *o = v.clamp(0.0, 1.0) as f32;
            }
        }
    }
    cov
}

fn add_span(row: &mut [f64], a: f64, b: f64, weight: f64) -> bool {
    let w = row.len() as f64;
    let a = a.max(0.0);
    let b = b.min(w);
    if b <= a {
        return false;
    }
    let ia = a.floor() as usize;
    let ib = b.floor() as usize;
    if ia == ib {
        row[ia] += (b - a) * weight;
        return true;
    }
    row[ia] += (ia as f64 + 1.0 - a) * weight;
    for v in &mut row[ia + 1..ib] {
        *v += weight;
    }
    if ib < row.len() {
        row[ib] += (b - ib as f64) * weight;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<(f64, f64)> {
        vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    }

    #[test]
    fn pixel_aligned_square_is_exact() {
        let c = fill_polygons(&[rect(2.0, 2.0, 6.0, 5.0)], 8, 8);
        let total: f32 = c.data.iter().sum();
        assert!((total - 12.0).abs() < 1e-6);
        assert_eq!(c.at(2, 2), 1.0);
        assert_eq!(c.at(1, 2), 0.0);
        assert_eq!(c.at(6, 2), 0.0);
    }

    #[test]
    fn half_pixel_edges() {
        let c = fill_polygons(&[rect(1.5, 1.0, 3.5, 2.0)], 5, 3);
        assert!((c.at(1, 1) - 0.5).abs() < 1e-6);
        assert!((c.at(2, 1) - 1.0).abs() < 1e-6);
        assert!((c.at(3, 1) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn area_matches_triangle() {
        let tri = vec![(0.0, 0.0), (20.0, 0.0), (0.0, 20.0)];
        let c = fill_polygons(&[tri], 32, 32);
        let total: f32 = c.data.iter().sum();
        assert!((total - 200.0).abs() < 2.0, "{total}");
    }

    #[test]
    fn nonzero_winding_hole() {
        let outer = rect(0.0, 0.0, 10.0, 10.0);
        let mut hole = rect(3.0, 3.0, 7.0, 7.0);
        hole.reverse();
        let c = fill_polygons(&[outer, hole], 10, 10);
        assert_eq!(c.at(5, 5), 0.0);
        assert_eq!(c.at(1, 1), 1.0);
        let total: f32 = c.data.iter().sum();
        assert!((total - 84.0).abs() < 1e-4);
    }

    #[test]
    fn clipped_to_frame() {
        let c = fill_polygons(&[rect(-5.0, -5.0, 3.0, 3.0)], 4, 4);
        let total: f32 = c.data.iter().sum();
        assert!((total - 9.0).abs() < 1e-6);
    }
}
