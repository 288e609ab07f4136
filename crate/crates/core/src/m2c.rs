//! Mask-to-contour conversion: per-class inner boundaries of a semantic mask.
//!
//! A pixel of class `c` is a contour pixel iff at least one in-image
//! neighbour carries a *labelled* class other than `c`. Out-of-image
//! positions and ignore-labelled pixels never make a pixel a contour pixel.
//! With the default 4-neighbour test this is exactly the pixel set visited
//! when following every outer and hole border of the class region
//! (8-connected contours), restricted to borders that face labelled pixels.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{ContourMap, SegMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    #[default]
    Four,
    Eight,
}

impl Connectivity {
    pub fn offsets(self) -> &'static [(i64, i64)] {
        match self {
            Connectivity::Four => &[(0, -1), (-1, 0), (1, 0), (0, 1)],
            Connectivity::Eight => &[
                (-1, -1),
                (0, -1),
                (1, -1),
                (-1, 0),
                (1, 0),
                (-1, 1),
                (0, 1),
                (1, 1),
            ],
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(format!("connectivity must be 4 or 8, got {other}")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

/// One semantic class: its mask value, prompt name and provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub index: u8,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub source_dataset: String,
    /// Free-form prompt used verbatim instead of the class template
    /// (referring-expression datasets).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_override: Option<String>,
}

impl ClassSpec {
    pub fn new(index: u8, name: impl Into<String>) -> Self {
        Self {
            index,
            name: name.into(),
            source_dataset: String::new(),
            prompt_override: None,
        }
    }
}

/// Validated class table: unique indices, non-empty names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ClassSpec>", into = "Vec<ClassSpec>")]
pub struct ClassTable(Vec<ClassSpec>);

impl ClassTable {
    pub fn new(classes: Vec<ClassSpec>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::Class("class table is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for c in &classes {
            if c.name.trim().is_empty() {
                return Err(Error::Class(format!("class {} has an empty name", c.index)));
            }
            if c.name.contains(['/', '\\']) {
                return Err(Error::Class(format!(
                    "class name {:?} contains a path separator",
                    c.name
                )));
            }
            if !seen.insert(c.index) {
                return Err(Error::Class(format!("duplicate class index {}", c.index)));
            }
        }
        Ok(Self(classes))
    }

    /// Reads a JSON array of `{"index": .., "name": ..}` objects.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let classes: Vec<ClassSpec> = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::new(classes)
    }

    pub fn classes(&self) -> &[ClassSpec] {
        &self.0
    }

    pub fn get(&self, index: u8) -> Option<&ClassSpec> {
        self.0.iter().find(|c| c.index == index)
    }

    pub fn indices(&self) -> Vec<u8> {
        self.0.iter().map(|c| c.index).collect()
    }
}

impl TryFrom<Vec<ClassSpec>> for ClassTable {
    type Error = Error;

    fn try_from(v: Vec<ClassSpec>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ClassTable> for Vec<ClassSpec> {
    fn from(t: ClassTable) -> Self {
        t.0
    }
}

/// Inner boundary of class `cls` in `mask`.
pub fn mask_to_contour(mask: &SegMask, cls: u8, connectivity: Connectivity) -> Result<ContourMap> {
    if Some(cls) == mask.ignore_index() {
        return Err(Error::Class(format!("class {cls} is the ignore index")));
    }
    if !mask.is_declared(cls) {
        return Err(Error::Class(format!("class {cls} is not declared for this mask")));
    }
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let labels = mask.labels();
    let ignore = mask.ignore_index();
    let offsets = connectivity.offsets();
    let mut bits = vec![false; labels.len()];
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            if labels[i] != cls {
                continue;
            }
            bits[i] = offsets.iter().any(|&(dx, dy)| {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    return false;
                }
                let q = labels[(ny * w + nx) as usize];
                q != cls && Some(q) != ignore
            });
        }
    }
    Ok(ContourMap::from_raw(mask.width(), mask.height(), bits))
}

/// Contour of one class together with whether the class occurs in the mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassContour {
    pub contour: ContourMap,
    pub foreground_pixels: usize,
}

impl ClassContour {
    /// True when the class has no pixels in the mask.
    pub fn is_absent(&self) -> bool {
        self.foreground_pixels == 0
    }
}

pub fn mask_to_contours_all(
    mask: &SegMask,
    classes: &[ClassSpec],
    connectivity: Connectivity,
) -> Result<BTreeMap<u8, ClassContour>> {
    if classes.is_empty() {
        return Err(Error::Class("no classes requested".into()));
    }
    let mut out = BTreeMap::new();
    for c in classes {
        let contour = mask_to_contour(mask, c.index, connectivity)?;
        out.insert(
            c.index,
            ClassContour {
                contour,
                foreground_pixels: mask.count(c.index),
            },
        );
    }
    Ok(out)
}
