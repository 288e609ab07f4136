//! Seeded synthetic scenes (rectangles, discs and strips on a textured
//! background) with matching semantic masks, for demos and end-to-end tests.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::m2c::{ClassSpec, ClassTable};
use crate::raster::{save_gray, save_mask, GrayImage, SegMask};

pub const BACKGROUND: u8 = 0;
pub const BUILDING: u8 = 1;
pub const ROAD: u8 = 2;
pub const WATER: u8 = 3;

pub fn class_table() -> ClassTable {
    ClassTable::new(vec![
        ClassSpec::new(BUILDING, "building"),
        ClassSpec::new(ROAD, "road"),
        ClassSpec::new(WATER, "water"),
    ])
    .expect("static table is valid")
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub image: GrayImage<f64>,
    pub mask: SegMask,
}

/// Scene with at least one disc (water), one strip (road) and one rectangle
/// (building). `noise` is the half-width of uniform per-pixel intensity noise.
pub fn scene(seed: u64, width: u32, height: u32, noise: f64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (width as i64, height as i64);
    let mut labels = vec![BACKGROUND; (w * h) as usize];
    let unit = (w.min(h) / 16).max(2);

    let n_water = rng.gen_range(1..=2);
    for _ in 0..n_water {
        let r = rng.gen_range(unit..=3 * unit);
        let cx = rng.gen_range(0..w);
        let cy = rng.gen_range(0..h);
        for y in (cy - r).max(0)..(cy + r + 1).min(h) {
            for x in (cx - r).max(0)..(cx + r + 1).min(w) {
                if (x - cx).pow(2) + (y - cy).pow(2) <= r * r {
                    labels[(y * w + x) as usize] = WATER;
                }
            }
        }
    }
    let n_roads = rng.gen_range(1..=2);
    for _ in 0..n_roads {
        let half = rng.gen_range(1..=(unit / 2).max(1));
        if rng.gen_bool(0.5) {
            let c = rng.gen_range(half..(h - half).max(half + 1));
            for y in (c - half).max(0)..(c + half + 1).min(h) {
                for x in 0..w {
                    labels[(y * w + x) as usize] = ROAD;
                }
            }
        } else {
            let c = rng.gen_range(half..(w - half).max(half + 1));
            for y in 0..h {
                for x in (c - half).max(0)..(c + half + 1).min(w) {
                    labels[(y * w + x) as usize] = ROAD;
                }
            }
        }
    }
    let n_buildings = rng.gen_range(2..=6);
    for _ in 0..n_buildings {
        let bw = rng.gen_range(unit..=3 * unit);
        let bh = rng.gen_range(unit..=3 * unit);
        let x0 = rng.gen_range(0..(w - bw).max(1));
        let y0 = rng.gen_range(0..(h - bh).max(1));
        for y in y0..(y0 + bh).min(h) {
            for x in x0..(x0 + bw).min(w) {
                labels[(y * w + x) as usize] = BUILDING;
            }
        }
    }

    let tone = |c: u8| match c {
        BUILDING => 0.85,
        ROAD => 0.55,
        WATER => 0.15,
        _ => 0.35,
    };
    let pixels: Vec<f64> = labels
        .iter()
        .map(|&c| {
            let n = if noise > 0.0 { rng.gen_range(-noise..=noise) } else { 0.0 };
            (tone(c) + n).clamp(0.0, 1.0)
        })
        .collect();
    Scene {
        image: GrayImage::new(width, height, pixels).expect("sized"),
        mask: SegMask::new(width, height, labels, None).expect("sized"),
    }
}

#[derive(Debug, Clone)]
pub struct FixturePaths {
    pub images_dir: PathBuf,
    pub masks_dir: PathBuf,
    pub classes_path: PathBuf,
}

/// Writes `n_images` scenes as `images/tile_NNN.png` and `masks/tile_NNN.png`
/// plus `classes.json` under `root`.
pub fn write_fixture(root: impl AsRef<Path>, n_images: usize, size: u32, seed: u64) -> Result<FixturePaths> {
    let root = root.as_ref();
    let images_dir = root.join("images");
    let masks_dir = root.join("masks");
    for d in [&images_dir, &masks_dir] {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    for i in 0..n_images {
        let s = scene(seed.wrapping_add(i as u64), size, size, 0.03);
        let name = format!("tile_{i:03}.png");
        save_gray(&s.image, images_dir.join(&name))?;
        save_mask(&s.mask, masks_dir.join(&name))?;
    }
    let classes_path = root.join("classes.json");
    let text = serde_json::to_string_pretty(&class_table()).map_err(|e| Error::Json {
        path: classes_path.clone(),
        source: e,
    })?;
    fs::write(&classes_path, text).map_err(|e| Error::io(&classes_path, e))?;
    Ok(FixturePaths {
        images_dir,
        masks_dir,
        classes_path,
    })
}
