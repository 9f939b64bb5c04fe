//! Statistical and geometric oracles shared by the test targets.
#![allow(dead_code)]

use std::f64::consts::PI;

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Chi-square homogeneity test of two samples over 8 bins of width 32, one
/// test per channel. True when no channel rejects at level `alpha`.
pub fn same_color_distribution(image: &[u8], mask: &[u8], alpha: f64) -> bool {
    (0..3).all(|ch| {
        let mut fg = [0f64; 8];
        let mut bg = [0f64; 8];
        for (i, &m) in mask.iter().enumerate() {
            let bin = usize::from(image[i * 3 + ch] / 32);
            match m {
                255 => fg[bin] += 1.0,
                0 => bg[bin] += 1.0,
                _ => {}
            }
        }
        let (nf, nb) = (fg.iter().sum::<f64>(), bg.iter().sum::<f64>());
        if nf == 0.0 || nb == 0.0 {
            return true;
        }
        let n = nf + nb;
        let mut stat = 0.0;
        let mut used = 0;
        for b in 0..8 {
            let col = fg[b] + bg[b];
            if col == 0.0 {
                continue;
            }
            used += 1;
            let (ef, eb) = (nf * col / n, nb * col / n);
            stat += (fg[b] - ef).powi(2) / ef + (bg[b] - eb).powi(2) / eb;
        }
        if used <= 1 {
            return true;
        }
        stat < ChiSquared::new((used - 1) as f64).unwrap().inverse_cdf(1.0 - alpha)
    })
}

pub const ORIENTATION_BINS: usize = 36;

/// Magnitude-weighted histograms over `[0, pi)` of the gradient orientation
/// of the color structure tensor, for pixels with mask 255 (first) and mask 0
/// (second). Border pixels are skipped.
pub fn orientation_histograms(image: &[u8], mask: &[u8], h: usize, w: usize) -> [[f64; ORIENTATION_BINS]; 2] {
    let px = |y: usize, x: usize, c: usize| f64::from(image[(y * w + x) * 3 + c]);
    let mut hist = [[0.0; ORIENTATION_BINS]; 2];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let region = match mask[y * w + x] {
                255 => 0,
                0 => 1,
                _ => continue,
            };
            let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
            for c in 0..3 {
                let gx = px(y - 1, x + 1, c) + 2.0 * px(y, x + 1, c) + px(y + 1, x + 1, c)
                    - px(y - 1, x - 1, c)
                    - 2.0 * px(y, x - 1, c)
                    - px(y + 1, x - 1, c);
                let gy = px(y + 1, x - 1, c) + 2.0 * px(y + 1, x, c) + px(y + 1, x + 1, c)
                    - px(y - 1, x - 1, c)
                    - 2.0 * px(y - 1, x, c)
                    - px(y - 1, x + 1, c);
                sxx += gx * gx;
                syy += gy * gy;
                sxy += gx * gy;
            }
            let magnitude = (sxx + syy).sqrt();
            if magnitude == 0.0 {
                continue;
            }
            let angle = (0.5 * (2.0 * sxy).atan2(sxx - syy)).rem_euclid(PI);
            let bin = ((angle / PI * ORIENTATION_BINS as f64) as usize).min(ORIENTATION_BINS - 1);
            hist[region][bin] += magnitude;
        }
    }
    hist
}

/// Centre of the heaviest bin, or `None` for an empty histogram.
pub fn peak(hist: &[f64; ORIENTATION_BINS]) -> Option<f64> {
    let (k, &v) = hist.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    (v > 0.0).then(|| (k as f64 + 0.5) * PI / ORIENTATION_BINS as f64)
}

/// Distance between two orientations modulo pi.
pub fn orientation_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Peak orientations of the two regions differ by at least `min_gap`.
pub fn orientations_differ(image: &[u8], mask: &[u8], h: usize, w: usize, min_gap: f64) -> bool {
    let [fg, bg] = orientation_histograms(image, mask, h, w);
    match (peak(&fg), peak(&bg)) {
        (Some(a), Some(b)) => orientation_gap(a, b) >= min_gap,
        _ => false,
    }
}

/// `|x - p| <= 3 sqrt(p (1 - p) / n)`.
pub fn within_3_sigma(x: f64, p: f64, n: usize) -> bool {
    (x - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

/// `2 Phi(-d / sigma)`: chance that `N(0, sigma)` added to a value at
/// distance `d` from both ends of `[0, 1]` leaves the interval.
pub fn two_sided_tail(d: f64, sigma: f64) -> f64 {
    2.0 * Normal::new(0.0, 1.0).unwrap().cdf(-d / sigma)
}

/// Chi-square goodness of fit of `counts` against equal cell probabilities.
/// Returns `(statistic, critical value at level alpha)`.
pub fn uniform_gof(counts: &[usize], alpha: f64) -> (f64, f64) {
    let n: usize = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let stat = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    (stat, ChiSquared::new((counts.len() - 1) as f64).unwrap().inverse_cdf(1.0 - alpha))
}

/// Brute-force test of whether any two masks share a pixel at or above 128.
pub fn any_pair_overlaps(masks: &[&[u8]]) -> bool {
    for i in 0..masks.len() {
        for j in i + 1..masks.len() {
            if masks[i].iter().zip(masks[j]).any(|(&a, &b)| a >= 128 && b >= 128) {
                return true;
            }
        }
    }
    false
}

/// Two-sample Kolmogorov-Smirnov statistic by direct evaluation of both
/// empirical CDFs at every observed value.
pub fn ks(x: &[f64], y: &[f64]) -> f64 {
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let cdf = |s: &[f64], v: f64| s.partition_point(|&u| u <= v) as f64 / s.len() as f64;
    xs.iter().chain(&ys).map(|&v| (cdf(&xs, v) - cdf(&ys, v)).abs()).fold(0.0, f64::max)
}
