use std::path::Path;

use image::{Rgb, RgbImage};

use super::{DatasetContainer, DatasetError};

const SEPARATOR: Rgb<u8> = Rgb([128, 128, 128]);

/// `(height, width)` of a preview grid with 1 px separators and border.
pub fn preview_size(height: usize, width: usize, rows: usize, cols: usize) -> (usize, usize) {
    (rows * (height + 1) + 1, cols * (width + 1) + 1)
}

/// Tiles the first `rows x cols` samples into a PNG, row-major.
pub fn preview(c: &DatasetContainer, rows: usize, cols: usize, path: &Path) -> Result<(), DatasetError> {
    if c.is_empty() {
        return Err(DatasetError::Preview("empty container".into()));
    }
    if rows == 0 || cols == 0 || rows * cols > c.len() {
        return Err(DatasetError::Preview(format!(
            "a {rows}x{cols} grid needs between 1 and {} samples",
            c.len()
        )));
    }
    let (h, w) = (c.height, c.width);
    let (ph, pw) = preview_size(h, w, rows, cols);
    let mut img = RgbImage::from_pixel(pw as u32, ph as u32, SEPARATOR);
    for k in 0..rows * cols {
        let (oy, ox) = ((k / cols) * (h + 1) + 1, (k % cols) * (w + 1) + 1);
        let src = c.image(k);
        for y in 0..h {
            for x in 0..w {
                let p = &src[(y * w + x) * 3..(y * w + x) * 3 + 3];
                img.put_pixel((ox + x) as u32, (oy + y) as u32, Rgb([p[0], p[1], p[2]]));
            }
        }
    }
    img.save_with_format(path, image::ImageFormat::Png).map_err(|e| DatasetError::Preview(e.to_string()))
}

/// Writes sample `index` as `<prefix>.png` plus `<prefix>.json` holding its
/// attribute record.
pub fn dump_sample(c: &DatasetContainer, index: usize, prefix: &Path) -> Result<(), DatasetError> {
    if index >= c.len() {
        return Err(DatasetError::Preview(format!("index {index} out of range for {} samples", c.len())));
    }
    let (h, w) = (c.height as u32, c.width as u32);
    let img = RgbImage::from_raw(w, h, c.image(index).to_vec()).expect("buffer matches frame");
    let png = prefix.with_extension("png");
    img.save_with_format(&png, image::ImageFormat::Png).map_err(|e| DatasetError::Preview(e.to_string()))?;
    let json = prefix.with_extension("json");
    let text = serde_json::to_string_pretty(&c.record(index)?).expect("serializable");
    std::fs::write(&json, text).map_err(|source| DatasetError::Io { path: json, source })
}
