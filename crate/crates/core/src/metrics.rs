//! Threshold sweeps and dataset scores: precision/recall/F per threshold,
//! ODS (one threshold for the whole dataset), OIS (best threshold per image)
//! and LineIoU@k.
//!
//! Counts are summed as integers before any ratio is taken, and every
//! reduction runs over cells in (image, threshold) order, so a report is a
//! deterministic function of its inputs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{
    match_fast, match_loose, tolerance_with_rule, LooseMatch, MatchResult, SizeRule, Tally,
    Tolerance,
};
use crate::raster::{binarize, dilate, thin, ContourMap, ProbMap, SeShape, StructuringElement};
use crate::scalar::Scalar;

pub const DEFAULT_D_MAX: f64 = 0.0075;
pub const DEFAULT_THRESHOLDS: usize = 51;
pub const DEFAULT_IOU_KERNEL: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf<S> {
    pub precision: S,
    pub recall: S,
    pub f: S,
}

/// Summed hit counts; the common currency of one-to-one and loose matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Counts {
    pub n_pred: u64,
    pub n_gt: u64,
    pub pred_hits: u64,
    pub gt_hits: u64,
}

impl Counts {
    pub fn of<T: Tally>(t: &T) -> Self {
        Self {
            n_pred: t.n_pred(),
            n_gt: t.n_gt(),
            pred_hits: t.pred_hits(),
            gt_hits: t.gt_hits(),
        }
    }
}

impl Tally for Counts {
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

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        self.n_pred += o.n_pred;
        self.n_gt += o.n_gt;
        self.pred_hits += o.pred_hits;
        self.gt_hits += o.gt_hits;
    }
}

/// Precision, recall and F1 of one tally.
///
/// Both sides empty scores 1/1/1. An empty prediction (or empty ground truth)
/// alone scores 0 on the side whose denominator vanishes.
pub fn prf<S: Scalar, T: Tally>(m: &T) -> Prf<S> {
    let (n_pred, n_gt) = (m.n_pred(), m.n_gt());
    if n_pred == 0 && n_gt == 0 {
        return Prf {
            precision: S::one(),
            recall: S::one(),
            f: S::one(),
        };
    }
    let ratio = |hits: u64, n: u64| {
        if n == 0 {
            S::zero()
        } else {
            S::from_count(hits) / S::from_count(n)
        }
    };
    let precision = ratio(m.pred_hits(), n_pred);
    let recall = ratio(m.gt_hits(), n_gt);
    let sum = precision + recall;
    let f = if sum == S::zero() {
        S::zero()
    } else {
        (precision + precision) * recall / sum
    };
    Prf {
        precision,
        recall,
        f,
    }
}

/// `k` interior thresholds `i / (k + 1)`, `i = 1..=k`.
pub fn uniform_thresholds<S: Scalar>(k: usize) -> Vec<S> {
    let denom = S::from_count(k as u64 + 1);
    (1..=k as u64).map(|i| S::from_count(i) / denom).collect()
}

/// Per-image, per-threshold tallies. `per_image[i][j]` is image `i` at
/// `thresholds[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSweep<S, C = MatchResult> {
    pub thresholds: Vec<S>,
    pub per_image: Vec<Vec<C>>,
}

impl<S: Scalar, C: Tally> ThresholdSweep<S, C> {
    fn check(&self) -> Result<()> {
        if self.thresholds.is_empty() {
            return Err(Error::Invalid("sweep has no thresholds".into()));
        }
        if self.per_image.iter().any(|row| row.len() != self.thresholds.len()) {
            return Err(Error::Invalid("sweep is missing cells".into()));
        }
        Ok(())
    }

    /// Dataset-level counts at threshold index `j`.
    pub fn totals_at(&self, j: usize) -> Counts {
        let mut acc = Counts::default();
        for row in &self.per_image {
            acc += Counts::of(&row[j]);
        }
        acc
    }
}

/// Options for producing sweep cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepOptions {
    /// Skeletonize each binarized prediction before matching.
    pub thinning: bool,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

pub(crate) fn with_pool<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Invalid(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn check_pairs<S: Scalar>(preds: &[ProbMap<S>], gts: &[ContourMap]) -> Result<()> {
    if preds.len() != gts.len() {
        return Err(Error::Invalid(format!(
            "{} predictions for {} ground-truth maps",
            preds.len(),
            gts.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::Invalid("no images to evaluate".into()));
    }
    for (p, g) in preds.iter().zip(gts) {
        if p.dims() != g.dims() {
            return Err(Error::Dimension {
                left: p.dims(),
                right: g.dims(),
            });
        }
    }
    Ok(())
}

fn prepare<S: Scalar>(pred: &ProbMap<S>, t: S, thinning: bool) -> ContourMap {
    let b = binarize(pred, t);
    if thinning {
        thin(&b)
    } else {
        b
    }
}

fn sweep_cells<S, C, M>(
    preds: &[ProbMap<S>],
    gts: &[ContourMap],
    thresholds: Vec<S>,
    opts: SweepOptions,
    matcher: M,
) -> Result<ThresholdSweep<S, C>>
where
    S: Scalar,
    C: Send,
    M: Fn(&ContourMap, &ContourMap) -> Result<C> + Sync,
{
    check_pairs(preds, gts)?;
    let k = thresholds.len();
    let cells: Vec<Result<C>> = with_pool(opts.workers, || {
        (0..preds.len() * k)
            .into_par_iter()
            .map(|cell| {
                let (i, j) = (cell / k, cell % k);
                matcher(&prepare(&preds[i], thresholds[j], opts.thinning), &gts[i])
            })
            .collect()
    })?;
    let mut per_image = Vec::with_capacity(preds.len());
    let mut it = cells.into_iter();
    for _ in 0..preds.len() {
        per_image.push(it.by_ref().take(k).collect::<Result<Vec<C>>>()?);
    }
    Ok(ThresholdSweep {
        thresholds,
        per_image,
    })
}

/// One-to-one tolerance matching of every image at `k_thresholds` uniform
/// interior thresholds.
pub fn sweep<S: Scalar>(
    preds: &[ProbMap<S>],
    gts: &[ContourMap],
    tol: &Tolerance,
    k_thresholds: usize,
    opts: SweepOptions,
) -> Result<ThresholdSweep<S>> {
    if k_thresholds < 2 {
        return Err(Error::Domain(format!("need at least 2 thresholds, got {k_thresholds}")));
    }
    let tol = *tol;
    sweep_cells(preds, gts, uniform_thresholds(k_thresholds), opts, |p, g| {
        match_fast(p, g, &tol)
    })
}

/// Existence-test variant of [`sweep`].
pub fn sweep_loose<S: Scalar>(
    preds: &[ProbMap<S>],
    gts: &[ContourMap],
    tol: &Tolerance,
    k_thresholds: usize,
    opts: SweepOptions,
) -> Result<ThresholdSweep<S, LooseMatch>> {
    if k_thresholds < 2 {
        return Err(Error::Domain(format!("need at least 2 thresholds, got {k_thresholds}")));
    }
    let tol = *tol;
    sweep_cells(preds, gts, uniform_thresholds(k_thresholds), opts, |p, g| {
        match_loose(p, g, &tol)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdsScore<S> {
    pub f: S,
    pub threshold: S,
    pub index: usize,
}

/// Best dataset-level F over thresholds; ties go to the lower threshold.
pub fn ods<S: Scalar, C: Tally>(sweep: &ThresholdSweep<S, C>) -> Result<OdsScore<S>> {
    sweep.check()?;
    let mut best: Option<OdsScore<S>> = None;
    for (j, &t) in sweep.thresholds.iter().enumerate() {
        let f = prf::<S, _>(&sweep.totals_at(j)).f;
        if best.is_none_or(|b| f > b.f) {
            best = Some(OdsScore {
                f,
                threshold: t,
                index: j,
            });
        }
    }
    Ok(best.expect("non-empty thresholds"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OisScore<S> {
    pub f: S,
    /// Chosen threshold index per image.
    pub chosen: Vec<usize>,
}

/// Aggregate F after each image picks its own best threshold (ties to the
/// lower threshold).
pub fn ois<S: Scalar, C: Tally>(sweep: &ThresholdSweep<S, C>) -> Result<OisScore<S>> {
    sweep.check()?;
    let mut acc = Counts::default();
    let mut chosen = Vec::with_capacity(sweep.per_image.len());
    for row in &sweep.per_image {
        let mut best_j = 0;
        let mut best_f = prf::<S, _>(&row[0]).f;
        for (j, cell) in row.iter().enumerate().skip(1) {
            let f = prf::<S, _>(cell).f;
            if f > best_f {
                best_f = f;
                best_j = j;
            }
        }
        acc += Counts::of(&row[best_j]);
        chosen.push(best_j);
    }
    Ok(OisScore {
        f: prf::<S, _>(&acc).f,
        chosen,
    })
}

/// IoU after dilating both maps with a `k × k` square.
pub fn line_iou<S: Scalar>(pred: &ContourMap, gt: &ContourMap, k: u32) -> Result<S> {
    line_iou_with(pred, gt, &StructuringElement::square(k)?)
}

pub fn line_iou_with<S: Scalar>(pred: &ContourMap, gt: &ContourMap, se: &StructuringElement) -> Result<S> {
    pred.ensure_same_dims(gt)?;
    let p = dilate(pred, se);
    let g = dilate(gt, se);
    let (mut inter, mut union) = (0u64, 0u64);
    for (&a, &b) in p.bits().iter().zip(g.bits()) {
        inter += (a && b) as u64;
        union += (a || b) as u64;
    }
    if union == 0 {
        return Ok(S::one());
    }
    Ok(S::from_count(inter) / S::from_count(union))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    #[default]
    OneToOne,
    Loose,
}

/// Every parameter that influences an [`EvalReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalParams {
    pub d_max: f64,
    pub thresholds: usize,
    pub iou_kernel: u32,
    pub iou_kernel_shape: SeShape,
    pub thinning: bool,
    pub matching: MatchMode,
    pub size_rule: SizeRule,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            d_max: DEFAULT_D_MAX,
            thresholds: DEFAULT_THRESHOLDS,
            iou_kernel: DEFAULT_IOU_KERNEL,
            iou_kernel_shape: SeShape::Square,
            thinning: false,
            matching: MatchMode::OneToOne,
            size_rule: SizeRule::MaxSide,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScore<S> {
    pub threshold: S,
    pub precision: S,
    pub recall: S,
    pub f: S,
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageScore<S> {
    pub ois_threshold: S,
    pub ois_f: S,
    pub f_at_ods: S,
    pub line_iou: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport<S> {
    pub toolkit_version: String,
    pub params: EvalParams,
    pub n_images: usize,
    pub tolerance: Tolerance,
    pub ods_f: S,
    pub ods_threshold: S,
    pub ois_f: S,
    pub line_iou: S,
    pub per_threshold_prf: Vec<ThresholdScore<S>>,
    pub per_image: Vec<ImageScore<S>>,
}

/// Full protocol: sweep, ODS, OIS and the per-image mean LineIoU at the ODS
/// threshold. All images must share one size, which fixes the tolerance.
pub fn evaluate<S: Scalar>(
    preds: &[ProbMap<S>],
    gts: &[ContourMap],
    params: &EvalParams,
    workers: Option<usize>,
) -> Result<EvalReport<S>> {
    check_pairs(preds, gts)?;
    let dims = gts[0].dims();
    if let Some(g) = gts.iter().find(|g| g.dims() != dims) {
        return Err(Error::Dimension {
            left: dims,
            right: g.dims(),
        });
    }
    let tol = tolerance_with_rule(params.d_max, dims.0, dims.1, params.size_rule)?;
    let se = StructuringElement::new(params.iou_kernel_shape, params.iou_kernel)?;
    let opts = SweepOptions {
        thinning: params.thinning,
        workers,
    };
    match params.matching {
        MatchMode::OneToOne => {
            let s = sweep(preds, gts, &tol, params.thresholds, opts)?;
            report(preds, gts, params, tol, &se, &s, workers)
        }
        MatchMode::Loose => {
            let s = sweep_loose(preds, gts, &tol, params.thresholds, opts)?;
            report(preds, gts, params, tol, &se, &s, workers)
        }
    }
}

fn report<S: Scalar, C: Tally + Sync>(
    preds: &[ProbMap<S>],
    gts: &[ContourMap],
    params: &EvalParams,
    tolerance: Tolerance,
    se: &StructuringElement,
    sweep: &ThresholdSweep<S, C>,
    workers: Option<usize>,
) -> Result<EvalReport<S>> {
    let best = ods(sweep)?;
    let per_image_best = ois(sweep)?;
    let ious: Vec<Result<S>> = with_pool(workers, || {
        preds
            .par_iter()
            .zip(gts)
            .map(|(p, g)| line_iou_with::<S>(&prepare(p, best.threshold, params.thinning), g, se))
            .collect()
    })?;
    let ious = ious.into_iter().collect::<Result<Vec<S>>>()?;
    let mean_iou = ious.iter().fold(S::zero(), |a, &b| a + b) / S::from_count(ious.len() as u64);

    let per_threshold_prf = sweep
        .thresholds
        .iter()
        .enumerate()
        .map(|(j, &threshold)| {
            let counts = sweep.totals_at(j);
            let s = prf::<S, _>(&counts);
            ThresholdScore {
                threshold,
                precision: s.precision,
                recall: s.recall,
                f: s.f,
                counts,
            }
        })
        .collect();
    let per_image = sweep
        .per_image
        .iter()
        .zip(&per_image_best.chosen)
        .zip(&ious)
        .map(|((row, &j), &line_iou)| ImageScore {
            ois_threshold: sweep.thresholds[j],
            ois_f: prf::<S, _>(&row[j]).f,
            f_at_ods: prf::<S, _>(&row[best.index]).f,
            line_iou,
        })
        .collect();
    Ok(EvalReport {
        toolkit_version: crate::VERSION.to_string(),
        params: *params,
        n_images: preds.len(),
        tolerance,
        ods_f: best.f,
        ods_threshold: best.threshold,
        ois_f: per_image_best.f,
        line_iou: mean_iou,
        per_threshold_prf,
        per_image,
    })
}
