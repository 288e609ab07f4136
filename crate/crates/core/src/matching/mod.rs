//! One-to-one correspondence between predicted and ground-truth contour
//! pixels within a Euclidean pixel tolerance.
//!
//! Two independent routes compute the same maximum matching cardinality:
//! [`match_exact`] enumerates every pixel pair and runs simple augmenting
//! paths; [`match_fast`] generates candidates from a uniform grid and runs
//! Hopcroft–Karp. [`match_loose`] is the non-normative "any neighbour within
//! tolerance" test kept for comparison.

mod grid;
mod hopcroft_karp;

pub use grid::GridIndex;
pub use hopcroft_karp::{maximum_matching, BipartiteGraph};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::ContourMap;
use crate::scalar::Scalar;

/// Smallest even integer `>= x`, for `x > 0`.
pub fn even_ceil<S: Scalar>(x: S) -> Result<u32> {
    if !x.is_finite() || x <= S::zero() {
        return Err(Error::Domain(format!("even_ceil needs a finite positive input, got {x}")));
    }
    let two = S::one() + S::one();
    let e = (x / two).ceil() * two;
    e.to_u32()
        .ok_or_else(|| Error::Domain(format!("even_ceil({x}) does not fit in u32")))
}

/// Which image side defines the scale `S` in `T = even_ceil(S * d_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeRule {
    #[default]
    MaxSide,
    MinSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub d_max: f64,
    pub image_size: u32,
    pub t_pixels: u32,
}

impl Tolerance {
    pub fn new(d_max: f64, image_size: u32) -> Result<Self> {
        if !d_max.is_finite() || d_max <= 0.0 {
            return Err(Error::Domain(format!("d_max must be positive, got {d_max}")));
        }
        if image_size == 0 {
            return Err(Error::Domain("zero-sized image".into()));
        }
        Ok(Self {
            d_max,
            image_size,
            t_pixels: even_ceil(image_size as f64 * d_max)?,
        })
    }

    /// Tolerance of exactly `t_pixels` (even, positive), expressed as
    /// `S = 1, d_max = t_pixels`.
    pub fn from_pixels(t_pixels: u32) -> Result<Self> {
        if t_pixels == 0 || !t_pixels.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "pixel tolerance must be even and positive, got {t_pixels}"
            )));
        }
        Ok(Self {
            d_max: t_pixels as f64,
            image_size: 1,
            t_pixels,
        })
    }
}

/// Tolerance for a `width × height` image with `S = max(width, height)`.
pub fn tolerance_for(d_max: f64, width: u32, height: u32) -> Result<Tolerance> {
    tolerance_with_rule(d_max, width, height, SizeRule::MaxSide)
}

pub fn tolerance_with_rule(d_max: f64, width: u32, height: u32, rule: SizeRule) -> Result<Tolerance> {
    if width == 0 || height == 0 {
        return Err(Error::Domain(format!("zero-sized image {width}x{height}")));
    }
    let size = match rule {
        SizeRule::MaxSide => width.max(height),
        SizeRule::MinSide => width.min(height),
    };
    Tolerance::new(d_max, size)
}

/// Hit counts behind precision (`pred_hits / n_pred`) and recall
/// (`gt_hits / n_gt`).
pub trait Tally {
    fn n_pred(&self) -> u64;
    fn n_gt(&self) -> u64;
    fn pred_hits(&self) -> u64;
    fn gt_hits(&self) -> u64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct MatchResult {
    pub n_pred: u64,
    pub n_gt: u64,
    pub n_matched: u64,
}

impl Tally for MatchResult {
    fn n_pred(&self) -> u64 {
        self.n_pred
    }
    fn n_gt(&self) -> u64 {
        self.n_gt
    }
    fn pred_hits(&self) -> u64 {
        self.n_matched
    }
    fn gt_hits(&self) -> u64 {
        self.n_matched
    }
}

impl std::ops::Add for MatchResult {
    type Output = MatchResult;

    fn add(self, o: MatchResult) -> MatchResult {
        MatchResult {
            n_pred: self.n_pred + o.n_pred,
            n_gt: self.n_gt + o.n_gt,
            n_matched: self.n_matched + o.n_matched,
        }
    }
}

/// Existence-test counts: a pixel is a hit if any pixel of the other map lies
/// within tolerance, regardless of reuse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct LooseMatch {
    pub n_pred: u64,
    pub n_gt: u64,
    pub pred_hits: u64,
    pub gt_hits: u64,
}

impl Tally for LooseMatch {
    fn n_pred(&self) -> u64 {
        self.n_pred
    }
    fn n_gt(&self) -> u64 {
        self.n_gt
    }
    fn pred_hits(&self) -> u64 {
        self.pred_hits
    }
    fn gt_hits(&self) -> u64 {
        self.gt_hits
    }
}

impl std::ops::Add for LooseMatch {
    type Output = LooseMatch;

    fn add(self, o: LooseMatch) -> LooseMatch {
        LooseMatch {
            n_pred: self.n_pred + o.n_pred,
            n_gt: self.n_gt + o.n_gt,
            pred_hits: self.pred_hits + o.pred_hits,
            gt_hits: self.gt_hits + o.gt_hits,
        }
    }
}

fn within(a: (u32, u32), b: (u32, u32), t: u32) -> bool {
    let dx = a.0 as i64 - b.0 as i64;
    let dy = a.1 as i64 - b.1 as i64;
    dx * dx + dy * dy <= (t as i64) * (t as i64)
}

/// Reference matcher: all `n_pred × n_gt` pairs are tested and the maximum
/// matching is grown one augmenting path at a time. Quadratic; intended for
/// cross-checking [`match_fast`].
pub fn match_exact(pred: &ContourMap, gt: &ContourMap, tol: &Tolerance) -> Result<MatchResult> {
    pred.ensure_same_dims(gt)?;
    let p: Vec<_> = pred.points().collect();
    let g: Vec<_> = gt.points().collect();
    let adj: Vec<Vec<usize>> = p
        .iter()
        .map(|&a| (0..g.len()).filter(|&j| within(a, g[j], tol.t_pixels)).collect())
        .collect();
    Ok(MatchResult {
        n_pred: p.len() as u64,
        n_gt: g.len() as u64,
        n_matched: kuhn_matching(&adj, g.len()) as u64,
    })
}

fn kuhn_matching(adj: &[Vec<usize>], n_right: usize) -> usize {
    const NONE: usize = usize::MAX;
    let mut match_r = vec![NONE; n_right];
    let mut seen = vec![usize::MAX; n_right];
    let mut size = 0;
    for root in 0..adj.len() {
        // (left vertex, number of its edges already tried)
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(top) = stack.last_mut() {
            let (u, k) = *top;
            if k == adj[u].len() {
                stack.pop();
                continue;
            }
            top.1 += 1;
            let v = adj[u][k];
            if seen[v] == root {
                continue;
            }
            seen[v] = root;
            if match_r[v] == NONE {
                for &(x, kx) in &stack {
                    match_r[adj[x][kx - 1]] = x;
                }
                size += 1;
                break;
            }
            stack.push((match_r[v], 0));
        }
    }
    size
}

/// Maximum tolerance matching over grid-bucketed candidates (Hopcroft–Karp).
/// The smaller pixel set forms the left side; cardinality is symmetric so the
/// result does not depend on that choice.
pub fn match_fast(pred: &ContourMap, gt: &ContourMap, tol: &Tolerance) -> Result<MatchResult> {
    pred.ensure_same_dims(gt)?;
    let p: Vec<_> = pred.points().collect();
    let g: Vec<_> = gt.points().collect();
    let mut out = MatchResult {
        n_pred: p.len() as u64,
        n_gt: g.len() as u64,
        n_matched: 0,
    };
    if p.is_empty() || g.is_empty() {
        return Ok(out);
    }
    let (left, right) = if p.len() <= g.len() { (&p, &g) } else { (&g, &p) };
    let graph = candidate_graph(left, right, pred.dims(), tol.t_pixels);
    out.n_matched = maximum_matching(&graph) as u64;
    Ok(out)
}

fn candidate_graph(
    left: &[(u32, u32)],
    right: &[(u32, u32)],
    dims: (u32, u32),
    t: u32,
) -> BipartiteGraph {
    let index = GridIndex::new(right, dims, t.max(1));
    let mut offsets = Vec::with_capacity(left.len() + 1);
    let mut targets = Vec::new();
    offsets.push(0u32);
    for &a in left {
        index.for_each_within(a, t, |j| targets.push(j as u32));
        offsets.push(targets.len() as u32);
    }
    BipartiteGraph::new(left.len(), right.len(), offsets, targets)
}

/// Existence-test counts. Not a one-to-one matching.
pub fn match_loose(pred: &ContourMap, gt: &ContourMap, tol: &Tolerance) -> Result<LooseMatch> {
    pred.ensure_same_dims(gt)?;
    let p: Vec<_> = pred.points().collect();
    let g: Vec<_> = gt.points().collect();
    let hits = |from: &[(u32, u32)], to: &[(u32, u32)]| -> u64 {
        if to.is_empty() {
            return 0;
        }
        let index = GridIndex::new(to, pred.dims(), tol.t_pixels.max(1));
        from.iter()
            .filter(|&&a| index.any_within(a, tol.t_pixels))
            .count() as u64
    };
    Ok(LooseMatch {
        n_pred: p.len() as u64,
        n_gt: g.len() as u64,
        pred_hits: hits(&p, &g),
        gt_hits: hits(&g, &p),
    })
}
