use super::{ContourMap, ProbMap, SeShape, StructuringElement};
use crate::scalar::Scalar;

/// Binary dilation with the footprint clipped at the image border.
pub fn dilate(c: &ContourMap, se: &StructuringElement) -> ContourMap {
    let r = se.radius();
    if r == 0 {
        return c.clone();
    }
    match se.shape() {
        SeShape::Square => dilate_square(c, r as usize),
        SeShape::Disk => dilate_stamp(c, &se.offsets()),
    }
}

// Separable: a square footprint is a horizontal run followed by a vertical one.
fn dilate_square(c: &ContourMap, r: usize) -> ContourMap {
    let (w, h) = (c.width as usize, c.height as usize);
    let mut horiz = vec![false; w * h];
    let mut prefix = vec![0u32; w.max(h) + 1];
    for y in 0..h {
        let row = &c.bits[y * w..(y + 1) * w];
        for x in 0..w {
            prefix[x + 1] = prefix[x] + row[x] as u32;
        }
        for x in 0..w {
            let lo = x.saturating_sub(r);
            let hi = (x + r + 1).min(w);
            horiz[y * w + x] = prefix[hi] > prefix[lo];
        }
    }
    let mut out = vec![false; w * h];
    for x in 0..w {
        for y in 0..h {
            prefix[y + 1] = prefix[y] + horiz[y * w + x] as u32;
        }
        for y in 0..h {
            let lo = y.saturating_sub(r);
            let hi = (y + r + 1).min(h);
            out[y * w + x] = prefix[hi] > prefix[lo];
        }
    }
    ContourMap::from_raw(c.width, c.height, out)
}

fn dilate_stamp(c: &ContourMap, offsets: &[(i64, i64)]) -> ContourMap {
    let (w, h) = (c.width as i64, c.height as i64);
    let mut out = vec![false; c.bits.len()];
    for (x, y) in c.points() {
        for &(dx, dy) in offsets {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx >= 0 && ny >= 0 && nx < w && ny < h {
                out[(ny * w + nx) as usize] = true;
            }
        }
    }
    ContourMap::from_raw(c.width, c.height, out)
}

/// Pixel is on iff its probability is strictly greater than `t`.
pub fn binarize<S: Scalar>(p: &ProbMap<S>, t: S) -> ContourMap {
    ContourMap::from_raw(
        p.width,
        p.height,
        p.probs.iter().map(|&v| v > t).collect(),
    )
}

/// Zhang–Suen thinning to a one-pixel-wide 8-connected skeleton. Pixels
/// outside the image count as background.
pub fn thin(c: &ContourMap) -> ContourMap {
    let (w, h) = (c.width as i64, c.height as i64);
    let mut bits = c.bits.clone();
    let at = |bits: &[bool], x: i64, y: i64| -> bool {
        x >= 0 && y >= 0 && x < w && y < h && bits[(y * w + x) as usize]
    };
    let mut to_clear = Vec::new();
    loop {
        let mut changed = false;
        for pass in 0..2 {
            to_clear.clear();
            for y in 0..h {
                for x in 0..w {
                    if !bits[(y * w + x) as usize] {
                        continue;
                    }
                    // P2..P9 clockwise from north
                    let n = [
                        at(&bits, x, y - 1),
                        at(&bits, x + 1, y - 1),
                        at(&bits, x + 1, y),
                        at(&bits, x + 1, y + 1),
                        at(&bits, x, y + 1),
                        at(&bits, x - 1, y + 1),
                        at(&bits, x - 1, y),
                        at(&bits, x - 1, y - 1),
                    ];
                    let b = n.iter().filter(|&&v| v).count();
                    if !(2..=6).contains(&b) {
                        continue;
                    }
                    let a = (0..8).filter(|&i| !n[i] && n[(i + 1) % 8]).count();
                    if a != 1 {
                        continue;
                    }
                    let (p2, p4, p6, p8) = (n[0], n[2], n[4], n[6]);
                    let keep = if pass == 0 {
                        (p2 && p4 && p6) || (p4 && p6 && p8)
                    } else {
                        (p2 && p4 && p8) || (p2 && p6 && p8)
                    };
                    if !keep {
                        to_clear.push((y * w + x) as usize);
                    }
                }
            }
            for &i in &to_clear {
                bits[i] = false;
            }
            changed |= !to_clear.is_empty();
        }
        if !changed {
            break;
        }
    }
    ContourMap::from_raw(c.width, c.height, bits)
}
