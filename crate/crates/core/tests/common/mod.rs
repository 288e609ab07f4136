//! Reference implementations used only by tests. Each one is written from
//! the definition, without calling the library routine it checks.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random label grid with `n_classes` classes (0..n) and, optionally, some
/// pixels set to `ignore`. Labels come in blobs so boundaries are non-trivial.
pub fn random_labels(r: &mut ChaCha8Rng, w: usize, h: usize, n_classes: u8, ignore: Option<u8>) -> Vec<u8> {
    let mut labels: Vec<u8> = (0..w * h).map(|_| r.gen_range(0..n_classes)).collect();
    // a few smoothing passes: copy a random neighbour
    for _ in 0..2 {
        let prev = labels.clone();
        for y in 0..h {
            for x in 0..w {
                let nx = (x as i64 + r.gen_range(-1..=1)).clamp(0, w as i64 - 1) as usize;
                let ny = (y as i64 + r.gen_range(-1..=1)).clamp(0, h as i64 - 1) as usize;
                labels[y * w + x] = prev[ny * w + nx];
            }
        }
    }
    if let Some(ig) = ignore {
        for v in labels.iter_mut() {
            if r.gen_bool(0.08) {
                *v = ig;
            }
        }
    }
    labels
}

/// Contour oracle: a pixel of `cls` is on iff one of its listed neighbours is
/// inside the image, not `cls`, and not `ignore`.
pub fn contour_oracle(labels: &[u8], w: usize, h: usize, cls: u8, ignore: Option<u8>, eight: bool) -> Vec<bool> {
    let mut out = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            if labels[y * w + x] != cls {
                continue;
            }
            let mut hit = false;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    if !eight && dx != 0 && dy != 0 {
                        continue;
                    }
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let q = labels[ny as usize * w + nx as usize];
                    if q != cls && Some(q) != ignore {
                        hit = true;
                    }
                }
            }
            out[y * w + x] = hit;
        }
    }
    out
}

// (row, col) steps in clockwise order starting east (rows grow downwards).
const DIRS: [(i64, i64); 8] = [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)];

fn dir_of(from: (i64, i64), to: (i64, i64)) -> usize {
    let d = (to.0 - from.0, to.1 - from.1);
    DIRS.iter().position(|&s| s == d).expect("adjacent")
}

/// Topological border following (Suzuki & Abe) over every outer and hole
/// border of an 8-connected foreground, with the outside of the image as
/// background. Returns the set of pixels visited on some border.
pub fn border_following(fg: &[bool], w: usize, h: usize) -> Vec<bool> {
    let (pw, ph) = (w as i64 + 2, h as i64 + 2);
    let mut f = vec![0i32; (pw * ph) as usize];
    for y in 0..h {
        for x in 0..w {
            if fg[y * w + x] {
                f[((y as i64 + 1) * pw + x as i64 + 1) as usize] = 1;
            }
        }
    }
    let idx = |p: (i64, i64)| (p.0 * pw + p.1) as usize;
    let mut nbd = 1;
    for i in 1..ph - 1 {
        for j in 1..pw - 1 {
            let v = f[idx((i, j))];
            let start = if v == 1 && f[idx((i, j - 1))] == 0 {
                (i, j - 1)
            } else if v >= 1 && f[idx((i, j + 1))] == 0 {
                (i, j + 1)
            } else {
                continue;
            };
            nbd += 1;
            let origin = (i, j);
            let d0 = dir_of(origin, start);
            let first = (0..8)
                .map(|k| {
                    let s = DIRS[(d0 + k) % 8];
                    (i + s.0, j + s.1)
                })
                .find(|&p| f[idx(p)] != 0);
            let Some(p1) = first else {
                f[idx(origin)] = -nbd;
                continue;
            };
            let (mut p2, mut p3) = (p1, origin);
            loop {
                let d = dir_of(p3, p2);
                let mut east_zero = false;
                let mut p4 = p2;
                for k in 1..=8 {
                    let dd = (d + 8 - k) % 8;
                    let q = (p3.0 + DIRS[dd].0, p3.1 + DIRS[dd].1);
                    if f[idx(q)] != 0 {
                        p4 = q;
                        break;
                    }
                    if dd == 0 {
                        east_zero = true;
                    }
                }
                if east_zero {
                    f[idx(p3)] = -nbd;
                } else if f[idx(p3)] == 1 {
                    f[idx(p3)] = nbd;
                }
                if p4 == origin && p3 == p1 {
                    break;
                }
                p2 = p3;
                p3 = p4;
            }
        }
    }
    let mut out = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let v = f[((y as i64 + 1) * pw + x as i64 + 1) as usize];
            out[y * w + x] = v != 0 && v != 1;
        }
    }
    out
}

/// Maximum one-to-one assignment by exhaustive search with bound pruning.
pub fn brute_force_matching(pred: &[(u32, u32)], gt: &[(u32, u32)], t: u32) -> usize {
    assert!(gt.len() <= 64);
    let t2 = (t as i64) * (t as i64);
    let adj: Vec<Vec<usize>> = pred
        .iter()
        .map(|&(px, py)| {
            (0..gt.len())
                .filter(|&j| {
                    let dx = px as i64 - gt[j].0 as i64;
                    let dy = py as i64 - gt[j].1 as i64;
                    dx * dx + dy * dy <= t2
                })
                .collect()
        })
        .collect();
    let limit = pred.len().min(gt.len());
    fn go(adj: &[Vec<usize>], i: usize, used: u64, cur: usize, best: &mut usize, limit: usize) {
        if cur > *best {
            *best = cur;
        }
        if i == adj.len() || *best == limit || cur + (adj.len() - i) <= *best {
            return;
        }
        for &j in &adj[i] {
            if used & (1 << j) == 0 {
                go(adj, i + 1, used | (1 << j), cur + 1, best, limit);
            }
        }
        go(adj, i + 1, used, cur, best, limit);
    }
    let mut best = 0;
    go(&adj, 0, 0, 0, &mut best, limit);
    best
}

pub fn random_points(r: &mut ChaCha8Rng, w: u32, h: u32, max: usize) -> Vec<(u32, u32)> {
    let n = r.gen_range(0..=max);
    let mut pts: Vec<(u32, u32)> = (0..n).map(|_| (r.gen_range(0..w), r.gen_range(0..h))).collect();
    pts.sort_unstable();
    pts.dedup();
    pts
}

/// F1 from raw counts, with both-empty scoring 1.
pub fn f_from_counts(n_pred: u64, n_gt: u64, pred_hits: u64, gt_hits: u64) -> f64 {
    if n_pred == 0 && n_gt == 0 {
        return 1.0;
    }
    let p = if n_pred == 0 { 0.0 } else { pred_hits as f64 / n_pred as f64 };
    let r = if n_gt == 0 { 0.0 } else { gt_hits as f64 / n_gt as f64 };
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Subset of JSON Schema: type, enum, required, properties,
/// additionalProperties (bool), items, minItems, minimum, maximum,
/// exclusiveMinimum. Returns the violations found.
pub fn check_schema(schema: &Value, v: &Value, at: &str, errs: &mut Vec<String>) {
    if let Some(t) = schema.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "boolean" => v.is_boolean(),
            "number" => v.is_number(),
            "integer" => v.is_u64() || v.is_i64(),
            _ => true,
        };
        if !ok {
            errs.push(format!("{at}: expected {t}, got {v}"));
            return;
        }
    }
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(v) {
            errs.push(format!("{at}: {v} not in {options:?}"));
        }
    }
    if let Some(x) = v.as_f64() {
        if let Some(m) = schema.get("minimum").and_then(Value::as_f64) {
            if x < m {
                errs.push(format!("{at}: {x} < {m}"));
            }
        }
        if let Some(m) = schema.get("maximum").and_then(Value::as_f64) {
            if x > m {
                errs.push(format!("{at}: {x} > {m}"));
            }
        }
        if let Some(m) = schema.get("exclusiveMinimum").and_then(Value::as_f64) {
            if x <= m {
                errs.push(format!("{at}: {x} <= {m}"));
            }
        }
    }
    if let Some(obj) = v.as_object() {
        for key in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            let k = key.as_str().unwrap();
            if !obj.contains_key(k) {
                errs.push(format!("{at}: missing {k}"));
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        for (k, child) in obj {
            match props.and_then(|p| p.get(k)) {
                Some(s) => check_schema(s, child, &format!("{at}.{k}"), errs),
                None => {
                    if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
                        errs.push(format!("{at}: unexpected key {k}"));
                    }
                }
            }
        }
    }
    if let Some(arr) = v.as_array() {
        if let Some(n) = schema.get("minItems").and_then(Value::as_u64) {
            if (arr.len() as u64) < n {
                errs.push(format!("{at}: {} items < {n}", arr.len()));
            }
        }
        if let Some(item) = schema.get("items") {
            for (i, child) in arr.iter().enumerate() {
                check_schema(item, child, &format!("{at}[{i}]"), errs);
            }
        }
    }
}
