//! Raster value types shared by every stage: label masks, binary contour
//! maps, probability maps and grayscale images, plus PNG I/O and binary
//! morphology.
//!
//! All rasters are row-major with `index = y * width + x` and are immutable
//! once constructed.

mod morph;
mod png_io;

pub use morph::{binarize, dilate, thin};
pub use png_io::{
    load_contour, load_gray, load_mask, load_png, load_png_with_limits, load_prob, save_contour,
    save_gray, save_mask, save_prob, LoadedRaster, PngLimits, RasterKind, DEFAULT_MAX_SIDE,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_len(width: u32, height: u32, len: usize) -> Result<()> {
    let expected = width as usize * height as usize;
    if len != expected {
        return Err(Error::InvalidRaster(format!(
            "{width}x{height} raster needs {expected} entries, got {len}"
        )));
    }
    Ok(())
}

/// 256-entry membership set over 8-bit class indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct LabelSet([u64; 4]);

impl LabelSet {
    const ALL: LabelSet = LabelSet([u64::MAX; 4]);
    const EMPTY: LabelSet = LabelSet([0; 4]);

    fn contains(&self, v: u8) -> bool {
        self.0[(v >> 6) as usize] & (1 << (v & 63)) != 0
    }

    fn insert(&mut self, v: u8) {
        self.0[(v >> 6) as usize] |= 1 << (v & 63);
    }

    fn remove(&mut self, v: u8) {
        self.0[(v >> 6) as usize] &= !(1 << (v & 63));
    }
}

impl std::fmt::Debug for LabelSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set()
            .entries((0..=255u8).filter(|&v| self.contains(v)))
            .finish()
    }
}

/// Grid of semantic class indices.
///
/// Every label is either a declared class or the optional ignore index. A mask
/// built with [`SegMask::new`] declares every value except the ignore index;
/// [`SegMask::with_declared_classes`] narrows that to a class table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegMask {
    width: u32,
    height: u32,
    labels: Vec<u8>,
    ignore_index: Option<u8>,
    declared: LabelSet,
}

impl SegMask {
    pub fn new(width: u32, height: u32, labels: Vec<u8>, ignore_index: Option<u8>) -> Result<Self> {
        check_len(width, height, labels.len())?;
        let mut declared = LabelSet::ALL;
        if let Some(ignore) = ignore_index {
            declared.remove(ignore);
        }
        Ok(Self {
            width,
            height,
            labels,
            ignore_index,
            declared,
        })
    }

    /// Restricts the declared classes, failing if any pixel carries a label
    /// that is neither declared nor the ignore index.
    pub fn with_declared_classes(mut self, classes: &[u8]) -> Result<Self> {
        let mut declared = LabelSet::EMPTY;
        for &c in classes {
            if Some(c) == self.ignore_index {
                return Err(Error::Class(format!(
                    "class {c} collides with the ignore index"
                )));
            }
            declared.insert(c);
        }
        if let Some(bad) = self
            .labels
            .iter()
            .find(|&&v| !declared.contains(v) && Some(v) != self.ignore_index)
        {
            return Err(Error::Class(format!(
                "mask contains undeclared label {bad}"
            )));
        }
        self.declared = declared;
        Ok(self)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn ignore_index(&self) -> Option<u8> {
        self.ignore_index
    }

    pub fn is_declared(&self, class: u8) -> bool {
        self.declared.contains(class)
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.labels[(y * self.width + x) as usize]
    }

    /// Number of pixels labelled `class`.
    pub fn count(&self, class: u8) -> usize {
        self.labels.iter().filter(|&&v| v == class).count()
    }
}

/// Binary contour raster (ground truth or a binarized prediction).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ContourMap {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl std::fmt::Debug for ContourMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ContourMap({}x{}, {} on)", self.width, self.height, self.count())
    }
}

impl ContourMap {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        check_len(width, height, bits.len())?;
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    /// Map with exactly the given `(x, y)` pixels set. Out-of-range points are
    /// an error.
    pub fn from_points(
        width: u32,
        height: u32,
        points: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self> {
        let mut map = Self::empty(width, height);
        for (x, y) in points {
            if x >= width || y >= height {
                return Err(Error::InvalidRaster(format!(
                    "point ({x}, {y}) outside {width}x{height}"
                )));
            }
            map.bits[(y * width + x) as usize] = true;
        }
        Ok(map)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[(y * self.width + x) as usize]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Set pixels as `(x, y)` in row-major order.
    pub fn points(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i as u32 % w, i as u32 / w))
    }

    pub fn is_subset_of(&self, other: &ContourMap) -> bool {
        self.dims() == other.dims()
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub(crate) fn ensure_same_dims(&self, other: &ContourMap) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::Dimension {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(())
    }

    pub(crate) fn from_raw(width: u32, height: u32, bits: Vec<bool>) -> Self {
        debug_assert_eq!(bits.len(), width as usize * height as usize);
        Self {
            width,
            height,
            bits,
        }
    }
}

/// Contour probability map with values in the closed interval `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap<S> {
    width: u32,
    height: u32,
    probs: Vec<S>,
}

impl<S: Scalar> ProbMap<S> {
    pub fn new(width: u32, height: u32, probs: Vec<S>) -> Result<Self> {
        check_len(width, height, probs.len())?;
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(**p >= S::zero() && **p <= S::one()))
        {
            return Err(Error::InvalidRaster(format!(
                "probability {p} at index {i} is outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            probs,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> S) -> Result<Self> {
        let mut probs = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                probs.push(f(x, y));
            }
        }
        Self::new(width, height, probs)
    }

    /// `1` on contour pixels, `0` elsewhere.
    pub fn from_contour(c: &ContourMap) -> Self {
        Self {
            width: c.width,
            height: c.height,
            probs: c
                .bits
                .iter()
                .map(|&b| if b { S::one() } else { S::zero() })
                .collect(),
        }
    }

    pub fn zeros(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            probs: vec![S::zero(); width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn get(&self, x: u32, y: u32) -> S {
        self.probs[(y * self.width + x) as usize]
    }

}

/// Single-channel intensity image, values nominally in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage<S> {
    width: u32,
    height: u32,
    pixels: Vec<S>,
}

impl<S: Scalar> GrayImage<S> {
    pub fn new(width: u32, height: u32, pixels: Vec<S>) -> Result<Self> {
        check_len(width, height, pixels.len())?;
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidRaster("non-finite pixel value".into()));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> S) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[S] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> S {
        self.pixels[(y * self.width + x) as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeShape {
    Square,
    Disk,
}

/// Odd-sized structuring element centred on its middle pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StructuringElement {
    shape: SeShape,
    size: u32,
}

impl StructuringElement {
    pub fn new(shape: SeShape, size: u32) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "structuring element size must be odd and >= 1, got {size}"
            )));
        }
        Ok(Self { shape, size })
    }

    pub fn square(size: u32) -> Result<Self> {
        Self::new(SeShape::Square, size)
    }

    /// Disk of radius `(size - 1) / 2`: offsets with `dx² + dy² <= r²`.
    pub fn disk(size: u32) -> Result<Self> {
        Self::new(SeShape::Disk, size)
    }

    pub fn shape(&self) -> SeShape {
        self.shape
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn radius(&self) -> i64 {
        (self.size as i64 - 1) / 2
    }

    /// Footprint offsets `(dx, dy)` in row-major order.
    pub fn offsets(&self) -> Vec<(i64, i64)> {
        let r = self.radius();
        let mut out = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                if self.shape == SeShape::Square || dx * dx + dy * dy <= r * r {
                    out.push((dx, dy));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_checks() {
        assert!(SegMask::new(2, 2, vec![0; 3], None).is_err());
        assert!(ContourMap::new(3, 1, vec![true; 3]).is_ok());
        assert!(ProbMap::<f64>::new(1, 1, vec![1.5]).is_err());
        assert!(ProbMap::<f64>::new(1, 1, vec![f64::NAN]).is_err());
        assert!(ProbMap::<f32>::new(1, 2, vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn declared_classes() {
        let m = SegMask::new(2, 1, vec![1, 255], Some(255)).unwrap();
        assert!(m.is_declared(7));
        assert!(!m.is_declared(255));
        let m = m.with_declared_classes(&[0, 1]).unwrap();
        assert!(!m.is_declared(7));
        let bad = SegMask::new(2, 1, vec![1, 3], None).unwrap();
        assert!(bad.with_declared_classes(&[0, 1]).is_err());
    }

    #[test]
    fn se_validation() {
        assert!(StructuringElement::square(0).is_err());
        assert!(StructuringElement::square(4).is_err());
        assert_eq!(StructuringElement::square(3).unwrap().offsets().len(), 9);
        assert_eq!(StructuringElement::disk(3).unwrap().offsets().len(), 5);
        assert_eq!(StructuringElement::disk(1).unwrap().offsets(), vec![(0, 0)]);
    }

    #[test]
    fn points_are_row_major() {
        let c = ContourMap::from_points(4, 3, [(3, 0), (1, 2), (0, 1)]).unwrap();
        assert_eq!(c.points().collect::<Vec<_>>(), vec![(3, 0), (0, 1), (1, 2)]);
        assert!(ContourMap::from_points(4, 3, [(4, 0)]).is_err());
    }
}
