//! Training-free contour predictor: box blur, central-difference gradient
//! magnitude, normalization to `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{GrayImage, ProbMap};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalize {
    /// Divide by the largest magnitude.
    GlobalMax,
    /// Divide by the nearest-rank percentile `p` (in `(50, 100]`) and clip
    /// at 1. Falls back to the global max when that percentile is zero.
    Percentile(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub blur_radius: u32,
    pub normalize: Normalize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            blur_radius: 1,
            normalize: Normalize::GlobalMax,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if let Normalize::Percentile(p) = self.normalize {
            if !(p > 50.0 && p <= 100.0) {
                return Err(Error::Domain(format!("percentile must be in (50, 100], got {p}")));
            }
        }
        Ok(())
    }
}

// Mean over the window clipped to the image, accumulated as deviations from
// the centre pixel so constant regions stay exactly constant. Summation order
// depends only on the window offsets, so interior results are
// translation-exact.
fn box_blur<S: Scalar>(img: &GrayImage<S>, r: u32) -> Vec<S> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let px = img.pixels();
    if r == 0 {
        return px.to_vec();
    }
    let r = r as i64;
    let mut horiz = vec![S::zero(); px.len()];
    for y in 0..h {
        for x in 0..w {
            let (lo, hi) = ((x - r).max(0), (x + r).min(w - 1));
            let c = px[(y * w + x) as usize];
            let mut s = S::zero();
            for xx in lo..=hi {
                s = s + (px[(y * w + xx) as usize] - c);
            }
            horiz[(y * w + x) as usize] = c + s / S::from_count((hi - lo + 1) as u64);
        }
    }
    let mut out = vec![S::zero(); px.len()];
    for y in 0..h {
        let (lo, hi) = ((y - r).max(0), (y + r).min(h - 1));
        for x in 0..w {
            let c = horiz[(y * w + x) as usize];
            let mut s = S::zero();
            for yy in lo..=hi {
                s = s + (horiz[(yy * w + x) as usize] - c);
            }
            out[(y * w + x) as usize] = c + s / S::from_count((hi - lo + 1) as u64);
        }
    }
    out
}

fn gradient_magnitude<S: Scalar>(v: &[S], w: i64, h: i64) -> Vec<S> {
    let half = S::from_f64_lossy(0.5);
    let at = |x: i64, y: i64| v[(y.clamp(0, h - 1) * w + x.clamp(0, w - 1)) as usize];
    let mut out = Vec::with_capacity(v.len());
    for y in 0..h {
        for x in 0..w {
            let gx = (at(x + 1, y) - at(x - 1, y)) * half;
            let gy = (at(x, y + 1) - at(x, y - 1)) * half;
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    out
}

pub fn predict_gradient<S: Scalar>(image: &GrayImage<S>, cfg: &BaselineConfig) -> Result<ProbMap<S>> {
    cfg.validate()?;
    if image.pixels().is_empty() {
        return Err(Error::InvalidRaster("empty image".into()));
    }
    let blurred = box_blur(image, cfg.blur_radius);
    let mag = gradient_magnitude(&blurred, image.width() as i64, image.height() as i64);
    let max = mag.iter().fold(S::zero(), |a, &b| a.max(b));
    let scale = match cfg.normalize {
        Normalize::GlobalMax => max,
        Normalize::Percentile(p) => {
            let mut sorted = mag.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite magnitudes"));
            let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
            let v = sorted[rank.clamp(1, sorted.len()) - 1];
            if v > S::zero() {
                v
            } else {
                max
            }
        }
    };
    let probs = if scale > S::zero() {
        mag.into_iter().map(|m| (m / scale).min(S::one())).collect()
    } else {
        vec![S::zero(); mag.len()]
    };
    ProbMap::new(image.width(), image.height(), probs)
}
