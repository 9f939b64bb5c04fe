use rand::Rng;

/// Linear RGB, each channel in `[0, 1]`.
pub type Rgb = [f64; 3];

pub const BLACK: Rgb = [0.0, 0.0, 0.0];
pub const WHITE: Rgb = [1.0, 1.0, 1.0];

pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> Rgb {
    let h = h.rem_euclid(1.0) * 6.0;
    let sector = h.floor();
    let f = h - sector;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match sector as u8 {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}

/// Color with hue and saturation uniform in `[0, 1)` and value uniform in
/// `[min_value, 1]`.
pub fn random_hsv<R: Rng + ?Sized>(rng: &mut R, min_value: f64) -> Rgb {
    let h = rng.gen::<f64>();
    let s = rng.gen::<f64>();
    let v = min_value + (1.0 - min_value) * rng.gen::<f64>();
    hsv_to_rgb(h, s, v)
}

/// Quantizes a `[0, 1]` intensity to 8 bits.
#[inline]
pub fn quantize(x: f32) -> u8 {
    // Round half up; avoids a libm call on baseline x86-64.
    (x.clamp(0.0, 1.0) * 255.0 + 0.5) as u8
}
