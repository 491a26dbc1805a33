//! Pixel containers and grid conventions.
//!
//! Every raster in this crate is row-major with `x` as the column and `y` as
//! the row, origin at the top-left corner: the sample at `(x, y)` lives at
//! index `y * width + x`. Intensities are dimensionless `f64` scalars nominally
//! in `[0, 255]`; derived images (distance maps, gradient magnitudes) may
//! exceed 255 but must stay finite.

use crate::error::{Error, Result};

/// Pixel adjacency used by all flooding, reconstruction, and component ops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    /// Edge-adjacent neighbors only (N, S, W, E).
    #[default]
    Four,
    /// Edge- and corner-adjacent neighbors.
    Eight,
}

impl Connectivity {
    /// Neighbor offsets in the fixed scan order N, S, W, E, NW, NE, SW, SE.
    pub fn offsets(self) -> &'static [(i32, i32)] {
        const EIGHT: [(i32, i32); 8] = [
            (0, -1),
            (0, 1),
            (-1, 0),
            (1, 0),
            (-1, -1),
            (1, -1),
            (-1, 1),
            (1, 1),
        ];
        match self {
            Connectivity::Four => &EIGHT[..4],
            Connectivity::Eight => &EIGHT[..],
        }
    }

    /// The complementary adjacency: a 4-connected foreground pairs with an
    /// 8-connected background and vice versa, so that a closed curve in one
    /// topology separates the plane in the other.
    pub fn dual(self) -> Connectivity {
        match self {
            Connectivity::Four => Connectivity::Eight,
            Connectivity::Eight => Connectivity::Four,
        }
    }
}

/// In-bounds neighbors of `(x, y)` in a `width` x `height` grid, in the fixed
/// deterministic order N, S, W, E (then NW, NE, SW, SE for eight-connectivity).
/// Out-of-bounds positions are clipped, never wrapped; the center pixel is not
/// its own neighbor. Flooding results depend on this order being stable.
pub fn neighbors(x: u32, y: u32, width: u32, height: u32, conn: Connectivity) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(8);
    for &(dx, dy) in conn.offsets() {
        let nx = x as i64 + dx as i64;
        let ny = y as i64 + dy as i64;
        if nx >= 0 && ny >= 0 && (nx as u64) < width as u64 && (ny as u64) < height as u64 {
            out.push((nx as u32, ny as u32));
        }
    }
    out
}

/// A grayscale raster of `f64` scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<f64>,
}

impl GrayImage {
    /// Constant-valued image. `fill` must be finite.
    pub fn new(width: u32, height: u32, fill: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if !fill.is_finite() {
            return Err(Error::NonFiniteImage { x: 0, y: 0 });
        }
        Ok(Self { width, height, data: vec![fill; (width as usize) * (height as usize)] })
    }

    /// Wraps a row-major buffer. Rejects zero dimensions, length mismatches,
    /// and non-finite samples — the rest of the crate relies on all three.
    pub fn from_vec(width: u32, height: u32, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if data.len() != (width as usize) * (height as usize) {
            return Err(Error::DimensionMismatch(format!(
                "buffer holds {} samples, expected {}x{} = {}",
                data.len(),
                width,
                height,
                (width as usize) * (height as usize)
            )));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteImage {
                x: (bad % width as usize) as u32,
                y: (bad / width as usize) as u32,
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn idx(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y as usize) * (self.width as usize) + (x as usize)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.data[self.idx(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: f64) {
        let i = self.idx(x, y);
        self.data[i] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `(min, max)` over all samples.
    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Same-shape image with every sample passed through `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn same_size(&self, other: &GrayImage) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// A boolean raster; true pixels are the set of interest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, fill: bool) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { width, height, data: vec![fill; (width as usize) * (height as usize)] })
    }

    pub fn from_vec(width: u32, height: u32, data: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if data.len() != (width as usize) * (height as usize) {
            return Err(Error::DimensionMismatch(format!(
                "buffer holds {} samples, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn idx(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y as usize) * (self.width as usize) + (x as usize)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[self.idx(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        let i = self.idx(x, y);
        self.data[i] = v;
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [bool] {
        &mut self.data
    }

    pub fn count_true(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn same_size(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Pixelwise union; shapes must match.
    pub fn union(&self, other: &BinaryMask) -> Result<BinaryMask> {
        if !self.same_size(other) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a || b).collect();
        BinaryMask::from_vec(self.width, self.height, data)
    }
}

/// A labeled partition of the grid. Label 0 marks watershed-line or background
/// pixels; positive labels are the regions and always form the contiguous
/// range `1..=n_labels`, each occurring at least once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: u32,
    height: u32,
    data: Vec<u32>,
    n_labels: u32,
}

impl LabelMap {
    /// Validates the contiguous-label invariant while wrapping the buffer.
    pub fn from_vec(width: u32, height: u32, data: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if data.len() != (width as usize) * (height as usize) {
            return Err(Error::DimensionMismatch(format!(
                "buffer holds {} samples, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        let max = data.iter().copied().max().unwrap_or(0);
        let mut seen = vec![false; max as usize + 1];
        for &v in &data {
            seen[v as usize] = true;
        }
        if let Some(gap) = (1..=max).find(|&k| !seen[k as usize]) {
            return Err(Error::Range(format!(
                "label {gap} is absent but the maximum label is {max}; labels must be contiguous"
            )));
        }
        Ok(Self { width, height, data, n_labels: max })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Number of positive labels (the maximum label value).
    pub fn n_labels(&self) -> u32 {
        self.n_labels
    }

    #[inline]
    pub fn idx(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y as usize) * (self.width as usize) + (x as usize)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u32 {
        self.data[self.idx(x, y)]
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    /// Mask of pixels carrying label 0.
    pub fn zero_mask(&self) -> BinaryMask {
        BinaryMask::from_vec(self.width, self.height, self.data.iter().map(|&v| v == 0).collect())
            .expect("label map is non-empty")
    }
}

/// Labels the connected components of `mask` (true pixels) under `conn`.
/// Components are numbered `1..=n` by the raster order of their first pixel;
/// false pixels get 0. This numbering rule is shared by every op that
/// enumerates marker or minimum components, so region identities line up
/// across the whole pipeline.
pub fn label_components(mask: &BinaryMask, conn: Connectivity) -> (LabelMap, u32) {
    let (w, h) = (mask.width(), mask.height());
    let mut labels = vec![0u32; mask.data().len()];
    let mut next = 0u32;
    let mut queue = std::collections::VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            let i = mask.idx(x, y);
            if !mask.data()[i] || labels[i] != 0 {
                continue;
            }
            next += 1;
            labels[i] = next;
            queue.push_back((x, y));
            while let Some((cx, cy)) = queue.pop_front() {
                for (nx, ny) in neighbors(cx, cy, w, h, conn) {
                    let ni = mask.idx(nx, ny);
                    if mask.data()[ni] && labels[ni] == 0 {
                        labels[ni] = next;
                        queue.push_back((nx, ny));
                    }
                }
            }
        }
    }
    let map = LabelMap::from_vec(w, h, labels).expect("component labels are contiguous");
    (map, next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbors_corner_four() {
        assert_eq!(neighbors(0, 0, 3, 3, Connectivity::Four), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn neighbors_interior_eight() {
        let n = neighbors(1, 1, 3, 3, Connectivity::Eight);
        assert_eq!(n.len(), 8);
        // Fixed order: N, S, W, E, NW, NE, SW, SE.
        assert_eq!(
            n,
            vec![(1, 0), (1, 2), (0, 1), (2, 1), (0, 0), (2, 0), (0, 2), (2, 2)]
        );
    }

    #[test]
    fn neighbors_strip_interior() {
        assert_eq!(neighbors(0, 1, 1, 3, Connectivity::Four), vec![(0, 0), (0, 2)]);
    }

    #[test]
    fn neighbors_single_pixel_image() {
        assert!(neighbors(0, 0, 1, 1, Connectivity::Eight).is_empty());
    }

    #[test]
    fn gray_image_rejects_bad_buffers() {
        assert!(matches!(GrayImage::from_vec(0, 3, vec![]), Err(Error::ZeroDimension)));
        assert!(matches!(
            GrayImage::from_vec(2, 2, vec![0.0; 3]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            GrayImage::from_vec(2, 1, vec![0.0, f64::NAN]),
            Err(Error::NonFiniteImage { x: 1, y: 0 })
        ));
    }

    #[test]
    fn label_map_rejects_gaps() {
        // Label 2 missing while 3 present.
        assert!(LabelMap::from_vec(2, 2, vec![0, 1, 3, 1]).is_err());
        let ok = LabelMap::from_vec(2, 2, vec![0, 1, 2, 1]).unwrap();
        assert_eq!(ok.n_labels(), 2);
    }

    #[test]
    fn components_raster_numbering() {
        // Two diagonal pixels: separate under four-connectivity, joined under eight.
        let mut m = BinaryMask::new(3, 3, false).unwrap();
        m.set(0, 0, true);
        m.set(1, 1, true);
        let (four, n4) = label_components(&m, Connectivity::Four);
        assert_eq!(n4, 2);
        assert_eq!(four.get(0, 0), 1);
        assert_eq!(four.get(1, 1), 2);
        let (_, n8) = label_components(&m, Connectivity::Eight);
        assert_eq!(n8, 1);
    }
}
