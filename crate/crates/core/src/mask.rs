//! Change-mask analytics: connected components, counts and 3x3 grid
//! localization over multi-class change masks.
//!
//! A [`LabelMask`] stores one category code per pixel (0 = no change,
//! 1 = road, 2 = building). Components are maximal sets of same-category
//! pixels under 4- or 8-adjacency; each becomes a [`ChangeInstance`] with a
//! pixel count, centroid and bounding box. Centroids map to one of nine
//! named regions via [`region_of`].

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Pixel adjacency rule for component extraction. `Eight` also connects
/// diagonal neighbors and is the default everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[derive(Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}


/// The two annotated change categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeCategory {
    Road,
    Building,
}

impl ChangeCategory {
    pub const ALL: [ChangeCategory; 2] = [ChangeCategory::Road, ChangeCategory::Building];

    /// Label code stored in masks.
    pub fn code(self) -> u8 {
        match self {
            ChangeCategory::Road => 1,
            ChangeCategory::Building => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(ChangeCategory::Road),
            2 => Some(ChangeCategory::Building),
            _ => None,
        }
    }

    /// Key used in JSON output ("road" / "building").
    pub fn key(self) -> &'static str {
        match self {
            ChangeCategory::Road => "road",
            ChangeCategory::Building => "building",
        }
    }

    /// Plural noun used inside instruction text.
    pub fn noun_plural(self) -> &'static str {
        match self {
            ChangeCategory::Road => "roads",
            ChangeCategory::Building => "buildings",
        }
    }
}

/// One of the nine named cells of the 3x3 localization grid.
///
/// The declaration order is the canonical ordering used whenever region
/// sets are rendered or compared, so the derived `Ord` is the canonical
/// one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GridRegion {
    #[serde(rename = "top left corner")]
    TopLeftCorner,
    #[serde(rename = "left")]
    Left,
    #[serde(rename = "lower left corner")]
    LowerLeftCorner,
    #[serde(rename = "top")]
    Top,
    #[serde(rename = "center")]
    Center,
    #[serde(rename = "lower")]
    Lower,
    #[serde(rename = "top right corner")]
    TopRightCorner,
    #[serde(rename = "right")]
    Right,
    #[serde(rename = "lower right corner")]
    LowerRightCorner,
}

impl GridRegion {
    /// All nine regions in canonical order.
    pub const ALL: [GridRegion; 9] = [
        GridRegion::TopLeftCorner,
        GridRegion::Left,
        GridRegion::LowerLeftCorner,
        GridRegion::Top,
        GridRegion::Center,
        GridRegion::Lower,
        GridRegion::TopRightCorner,
        GridRegion::Right,
        GridRegion::LowerRightCorner,
    ];

    /// Region for a (row, col) cell of the 3x3 grid, row-major from the top
    /// left.
    pub fn from_cell(row: usize, col: usize) -> GridRegion {
        debug_assert!(row < 3 && col < 3);
        match (row, col) {
            (0, 0) => GridRegion::TopLeftCorner,
            (0, 1) => GridRegion::Top,
            (0, 2) => GridRegion::TopRightCorner,
            (1, 0) => GridRegion::Left,
            (1, 1) => GridRegion::Center,
            (1, 2) => GridRegion::Right,
            (2, 0) => GridRegion::LowerLeftCorner,
            (2, 1) => GridRegion::Lower,
            _ => GridRegion::LowerRightCorner,
        }
    }

    /// Human-readable name, as used in responses and reports.
    pub fn name(self) -> &'static str {
        match self {
            GridRegion::TopLeftCorner => "top left corner",
            GridRegion::Left => "left",
            GridRegion::LowerLeftCorner => "lower left corner",
            GridRegion::Top => "top",
            GridRegion::Center => "center",
            GridRegion::Lower => "lower",
            GridRegion::TopRightCorner => "top right corner",
            GridRegion::Right => "right",
            GridRegion::LowerRightCorner => "lower right corner",
        }
    }

    /// Position in the canonical ordering.
    pub fn canonical_index(self) -> usize {
        self as usize
    }

    /// Render a region set as a comma-joined string in canonical order, or
    /// the literal `No change` for the empty set.
    pub fn join(regions: &[GridRegion]) -> String {
        if regions.is_empty() {
            return "No change".to_string();
        }
        regions
            .iter()
            .map(|r| r.name())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Per-pixel change-category raster for a bi-temporal pair, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    width: u32,
    height: u32,
    labels: Vec<u8>,
}

impl LabelMask {
    /// All-zero (unchanged) mask.
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidMask(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        Ok(LabelMask {
            width,
            height,
            labels: vec![0; width as usize * height as usize],
        })
    }

    /// Build from a row-major label buffer; every value must be 0, 1 or 2.
    pub fn from_labels(width: u32, height: u32, labels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidMask(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if labels.len() != width as usize * height as usize {
            return Err(Error::InvalidMask(format!(
                "label buffer has {} entries for a {width}x{height} mask",
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&v| v > 2) {
            return Err(Error::UnknownLabel(bad));
        }
        Ok(LabelMask {
            width,
            height,
            labels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label(&self, x: u32, y: u32) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.labels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, code: u8) -> Result<()> {
        if x >= self.width || y >= self.height {
            return Err(Error::PointOutsideImage);
        }
        if code > 2 {
            return Err(Error::UnknownLabel(code));
        }
        self.labels[y as usize * self.width as usize + x as usize] = code;
        Ok(())
    }

    /// Fill an axis-aligned rectangle (inclusive bounds) with a label code.
    pub fn fill_rect(&mut self, x0: u32, y0: u32, x1: u32, y1: u32, code: u8) -> Result<()> {
        for y in y0..=y1 {
            for x in x0..=x1 {
                self.set(x, y, code)?;
            }
        }
        Ok(())
    }

    /// True when no pixel carries a change label.
    pub fn is_unchanged(&self) -> bool {
        self.labels.iter().all(|&v| v == 0)
    }
}

/// Inclusive pixel bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
}

impl BoundingBox {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min as f64 && x <= self.x_max as f64 && y >= self.y_min as f64 && y <= self.y_max as f64
    }
}

/// One connected changed region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangeInstance {
    pub category: ChangeCategory,
    pub pixel_count: usize,
    pub centroid: (f64, f64),
    pub bbox: BoundingBox,
}

const FOUR_NEIGHBORS: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
const EIGHT_NEIGHBORS: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Pixel sets of every connected component of `category`, each sorted by
/// (y, x) and the list ordered like [`connected_components`].
pub fn component_pixel_sets(
    mask: &LabelMask,
    category: ChangeCategory,
    connectivity: Connectivity,
) -> Vec<Vec<(u32, u32)>> {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let code = category.code();
    let neighbors: &[(i64, i64)] = match connectivity {
        Connectivity::Four => &FOUR_NEIGHBORS,
        Connectivity::Eight => &EIGHT_NEIGHBORS,
    };

    let mut visited = vec![false; w * h];
    let mut components: Vec<Vec<(u32, u32)>> = Vec::new();
    let mut stack: Vec<(u32, u32)> = Vec::new();

    for y in 0..h as u32 {
        for x in 0..w as u32 {
            let idx = y as usize * w + x as usize;
            if visited[idx] || mask.label(x, y) != code {
                continue;
            }
            let mut pixels = Vec::new();
            visited[idx] = true;
            stack.push((x, y));
            while let Some((cx, cy)) = stack.pop() {
                pixels.push((cx, cy));
                for &(dx, dy) in neighbors {
                    let nx = cx as i64 + dx;
                    let ny = cy as i64 + dy;
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let (nx, ny) = (nx as u32, ny as u32);
                    let nidx = ny as usize * w + nx as usize;
                    if !visited[nidx] && mask.label(nx, ny) == code {
                        visited[nidx] = true;
                        stack.push((nx, ny));
                    }
                }
            }
            pixels.sort_unstable_by_key(|&(px, py)| (py, px));
            components.push(pixels);
        }
    }

    components.sort_by_key(|pixels| bbox_of(pixels).map(|b| (b.y_min, b.x_min, b.x_max, b.y_max)));
    components
}

fn bbox_of(pixels: &[(u32, u32)]) -> Option<BoundingBox> {
    let first = pixels.first()?;
    let mut bbox = BoundingBox {
        x_min: first.0,
        y_min: first.1,
        x_max: first.0,
        y_max: first.1,
    };
    for &(x, y) in pixels {
        bbox.x_min = bbox.x_min.min(x);
        bbox.y_min = bbox.y_min.min(y);
        bbox.x_max = bbox.x_max.max(x);
        bbox.y_max = bbox.y_max.max(y);
    }
    Some(bbox)
}

/// Extract one [`ChangeInstance`] per connected component of `category`,
/// ordered by the (y_min, x_min) of their bounding boxes.
pub fn connected_components(
    mask: &LabelMask,
    category: ChangeCategory,
    connectivity: Connectivity,
) -> Vec<ChangeInstance> {
    connected_components_filtered(mask, category, connectivity, 1)
}

/// Like [`connected_components`] but dropping components smaller than
/// `min_area` pixels.
pub fn connected_components_filtered(
    mask: &LabelMask,
    category: ChangeCategory,
    connectivity: Connectivity,
    min_area: usize,
) -> Vec<ChangeInstance> {
    component_pixel_sets(mask, category, connectivity)
        .into_iter()
        .filter(|pixels| pixels.len() >= min_area.max(1))
        .map(|pixels| {
            let bbox = bbox_of(&pixels).expect("component is non-empty");
            let centroid = centroid_of(&pixels).expect("component is non-empty");
            ChangeInstance {
                category,
                pixel_count: pixels.len(),
                centroid,
                bbox,
            }
        })
        .collect()
}

/// Number of connected components of `category` under the default
/// 8-connectivity.
pub fn count_changes(mask: &LabelMask, category: ChangeCategory) -> usize {
    count_changes_with(mask, category, Connectivity::Eight, 1)
}

pub fn count_changes_with(
    mask: &LabelMask,
    category: ChangeCategory,
    connectivity: Connectivity,
    min_area: usize,
) -> usize {
    connected_components_filtered(mask, category, connectivity, min_area).len()
}

/// Arithmetic mean of the member pixel centers.
pub fn centroid_of(pixels: &[(u32, u32)]) -> Result<(f64, f64)> {
    if pixels.is_empty() {
        return Err(Error::EmptyComponent);
    }
    let n = pixels.len() as f64;
    let (sx, sy) = pixels
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x as f64, sy + y as f64));
    Ok((sx / n, sy / n))
}

/// Map a point to its 3x3 grid region. Cells are assigned by flooring
/// `3 * coord / extent`, clamped to index 2, so a point exactly on an
/// interior grid line belongs to the higher-index cell.
pub fn region_of(x: f64, y: f64, width: u32, height: u32) -> Result<GridRegion> {
    if !(x >= 0.0 && x < width as f64 && y >= 0.0 && y < height as f64) {
        return Err(Error::PointOutsideImage);
    }
    let col = (((3.0 * x) / width as f64).floor() as usize).min(2);
    let row = (((3.0 * y) / height as f64).floor() as usize).min(2);
    Ok(GridRegion::from_cell(row, col))
}

/// Deduplicated grid regions of the component centroids of `category`,
/// in canonical order. Empty when the category has no components.
pub fn localize_changes(mask: &LabelMask, category: ChangeCategory) -> Vec<GridRegion> {
    localize_changes_with(mask, category, Connectivity::Eight, 1)
}

pub fn localize_changes_with(
    mask: &LabelMask,
    category: ChangeCategory,
    connectivity: Connectivity,
    min_area: usize,
) -> Vec<GridRegion> {
    let mut regions = BTreeSet::new();
    for instance in connected_components_filtered(mask, category, connectivity, min_area) {
        let (cx, cy) = instance.centroid;
        // A centroid of in-bounds pixels is always in bounds.
        let region = region_of(cx, cy, mask.width(), mask.height())
            .expect("centroid lies inside the mask");
        regions.insert(region);
    }
    regions.into_iter().collect()
}
