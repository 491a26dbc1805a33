//! Grayscale and binary mathematical morphology.
//!
//! The primitives here (flat erosion/dilation, geodesic reconstruction,
//! hole filling, regional minima, minima imposition, the exact Euclidean
//! distance transform, and the skeleton by influence zones) are the building
//! blocks the marker pipeline is assembled from.
//!
//! Border policy: a structuring element hanging over the image edge simply
//! loses its out-of-bounds cells — erosion takes the min and dilation the max
//! over the in-bounds window only. That is equivalent to padding with +inf
//! (erosion) or -inf (dilation) and keeps the complement duality
//! `dilate(img) == 255 - erode(255 - img)` exact on the `[0, 255]` range,
//! borders included.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::grid::{label_components, neighbors, BinaryMask, Connectivity, GrayImage, LabelMap};

/// Flat structuring element shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeShape {
    /// All offsets with `max(|dx|, |dy|) <= radius`.
    Square,
    /// The axis-aligned plus: offsets with `dx == 0` or `dy == 0`.
    Cross,
    /// Offsets with `dx^2 + dy^2 <= radius^2`.
    Disk,
}

/// A flat structuring element, always containing its origin.
/// Radius 0 degenerates to the single-pixel element (erosion and dilation
/// become the identity).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuringElement {
    pub shape: SeShape,
    pub radius: u32,
}

impl StructuringElement {
    pub fn square(radius: u32) -> Self {
        Self { shape: SeShape::Square, radius }
    }

    pub fn cross(radius: u32) -> Self {
        Self { shape: SeShape::Cross, radius }
    }

    pub fn disk(radius: u32) -> Self {
        Self { shape: SeShape::Disk, radius }
    }

    /// Member offsets in row-major scan order.
    pub fn offsets(&self) -> Vec<(i32, i32)> {
        let r = self.radius as i32;
        let mut out = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                let inside = match self.shape {
                    SeShape::Square => true,
                    SeShape::Cross => dx == 0 || dy == 0,
                    SeShape::Disk => dx * dx + dy * dy <= r * r,
                };
                if inside {
                    out.push((dx, dy));
                }
            }
        }
        out
    }
}

fn window_fold(
    img: &GrayImage,
    se: &StructuringElement,
    init: f64,
    fold: impl Fn(f64, f64) -> f64,
) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let offsets = se.offsets();
    let mut out = vec![init; img.data().len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = init;
            for &(dx, dy) in &offsets {
                let nx = x as i64 + dx as i64;
                let ny = y as i64 + dy as i64;
                if nx >= 0 && ny >= 0 && (nx as u64) < w as u64 && (ny as u64) < h as u64 {
                    acc = fold(acc, img.get(nx as u32, ny as u32));
                }
            }
            out[img.idx(x, y)] = acc;
        }
    }
    GrayImage::from_vec(w, h, out).expect("window fold preserves shape and finiteness")
}

/// Flat erosion: each output pixel is the minimum of the input over the
/// structuring element centered there (out-of-bounds cells excluded).
pub fn erode(img: &GrayImage, se: &StructuringElement) -> GrayImage {
    window_fold(img, se, f64::INFINITY, f64::min)
}

/// Flat dilation: windowed maximum, the complement dual of [`erode`].
pub fn dilate(img: &GrayImage, se: &StructuringElement) -> GrayImage {
    window_fold(img, se, f64::NEG_INFINITY, f64::max)
}

/// Binary erosion: true where every in-bounds window cell is true.
pub fn erode_mask(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let offsets = se.offsets();
    let mut out = vec![false; mask.data().len()];
    for y in 0..h {
        for x in 0..w {
            out[mask.idx(x, y)] = offsets.iter().all(|&(dx, dy)| {
                let nx = x as i64 + dx as i64;
                let ny = y as i64 + dy as i64;
                nx < 0
                    || ny < 0
                    || nx as u64 >= w as u64
                    || ny as u64 >= h as u64
                    || mask.get(nx as u32, ny as u32)
            });
        }
    }
    BinaryMask::from_vec(w, h, out).expect("same shape")
}

/// Binary dilation: true where any in-bounds window cell is true.
pub fn dilate_mask(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let offsets = se.offsets();
    let mut out = vec![false; mask.data().len()];
    for y in 0..h {
        for x in 0..w {
            out[mask.idx(x, y)] = offsets.iter().any(|&(dx, dy)| {
                let nx = x as i64 + dx as i64;
                let ny = y as i64 + dy as i64;
                nx >= 0
                    && ny >= 0
                    && (nx as u64) < w as u64
                    && (ny as u64) < h as u64
                    && mask.get(nx as u32, ny as u32)
            });
        }
    }
    BinaryMask::from_vec(w, h, out).expect("same shape")
}

fn check_marker_under_mask(marker: &GrayImage, mask: &GrayImage) -> Result<()> {
    if !marker.same_size(mask) {
        return Err(Error::DimensionMismatch(format!(
            "marker {}x{} vs mask {}x{}",
            marker.width(),
            marker.height(),
            mask.width(),
            mask.height()
        )));
    }
    for y in 0..marker.height() {
        for x in 0..marker.width() {
            if marker.get(x, y) > mask.get(x, y) {
                return Err(Error::MarkerExceedsMask {
                    x,
                    y,
                    marker: marker.get(x, y),
                    mask: mask.get(x, y),
                });
            }
        }
    }
    Ok(())
}

/// Geodesic reconstruction by dilation of `marker` under `mask`.
///
/// The result is the pointwise limit of repeatedly dilating the marker with
/// the elementary neighborhood of `conn` and clipping under the mask — the
/// largest image that is both `<= mask` and reachable from the marker by
/// non-decreasing connected growth. Requires `marker <= mask` everywhere.
///
/// Internally this runs the raster / anti-raster sweep pair followed by a
/// FIFO propagation queue instead of literally iterating elementary
/// dilations; the fixed point is identical and the queue version touches
/// each pixel a small constant number of times.
pub fn reconstruct_by_dilation(
    marker: &GrayImage,
    mask: &GrayImage,
    conn: Connectivity,
) -> Result<GrayImage> {
    check_marker_under_mask(marker, mask)?;
    let (w, h) = (mask.width(), mask.height());
    let mut g = marker.clone();

    // Causal neighbors: already visited in a raster scan (and mirrored for
    // the anti-raster pass below).
    let forward: &[(i32, i32)] = match conn {
        Connectivity::Four => &[(-1, 0), (0, -1)],
        Connectivity::Eight => &[(-1, 0), (0, -1), (-1, -1), (1, -1)],
    };
    let backward: &[(i32, i32)] = match conn {
        Connectivity::Four => &[(1, 0), (0, 1)],
        Connectivity::Eight => &[(1, 0), (0, 1), (1, 1), (-1, 1)],
    };
    let in_bounds = |x: i64, y: i64| x >= 0 && y >= 0 && (x as u64) < w as u64 && (y as u64) < h as u64;

    for y in 0..h {
        for x in 0..w {
            let mut v = g.get(x, y);
            for &(dx, dy) in forward {
                let (nx, ny) = (x as i64 + dx as i64, y as i64 + dy as i64);
                if in_bounds(nx, ny) {
                    v = v.max(g.get(nx as u32, ny as u32));
                }
            }
            g.set(x, y, v.min(mask.get(x, y)));
        }
    }

    let mut queue = VecDeque::new();
    for y in (0..h).rev() {
        for x in (0..w).rev() {
            let mut v = g.get(x, y);
            for &(dx, dy) in backward {
                let (nx, ny) = (x as i64 + dx as i64, y as i64 + dy as i64);
                if in_bounds(nx, ny) {
                    v = v.max(g.get(nx as u32, ny as u32));
                }
            }
            let v = v.min(mask.get(x, y));
            g.set(x, y, v);
            for &(dx, dy) in backward {
                let (nx, ny) = (x as i64 + dx as i64, y as i64 + dy as i64);
                if in_bounds(nx, ny) {
                    let (nx, ny) = (nx as u32, ny as u32);
                    if g.get(nx, ny) < v && g.get(nx, ny) < mask.get(nx, ny) {
                        queue.push_back((x, y));
                        break;
                    }
                }
            }
        }
    }

    while let Some((x, y)) = queue.pop_front() {
        let v = g.get(x, y);
        for (nx, ny) in neighbors(x, y, w, h, conn) {
            let gn = g.get(nx, ny);
            let mn = mask.get(nx, ny);
            if gn < v && gn < mn {
                g.set(nx, ny, v.min(mn));
                queue.push_back((nx, ny));
            }
        }
    }
    Ok(g)
}

/// Opening by reconstruction: erode, then grow back under the original image.
/// Flattens bright detail smaller than the element while preserving the exact
/// contours of everything that survives.
pub fn open_by_reconstruction(
    img: &GrayImage,
    se: &StructuringElement,
    conn: Connectivity,
) -> Result<GrayImage> {
    reconstruct_by_dilation(&erode(img, se), img, conn)
}

/// Closing by reconstruction: the complement dual of
/// [`open_by_reconstruction`] on the `[0, 255]` intensity scale. Fills dark
/// detail smaller than the element.
pub fn close_by_reconstruction(
    img: &GrayImage,
    se: &StructuringElement,
    conn: Connectivity,
) -> Result<GrayImage> {
    let inv = img.map(|v| 255.0 - v);
    Ok(open_by_reconstruction(&inv, se, conn)?.map(|v| 255.0 - v))
}

/// Fills holes: false-pixel components not connected to the image border
/// become true. The background flood runs under the dual of `conn` (an
/// 8-connected background for a 4-connected foreground and vice versa), so a
/// closed foreground curve encloses a hole while diagonal background gaps
/// still drain it. A "hole" reachable from the border is background, not a
/// hole, and survives.
pub fn fill_holes(mask: &BinaryMask, conn: Connectivity) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let mut outside = vec![false; mask.data().len()];
    let mut queue = VecDeque::new();
    let seed = |x: u32, y: u32, outside: &mut Vec<bool>, queue: &mut VecDeque<(u32, u32)>| {
        let i = mask.idx(x, y);
        if !mask.data()[i] && !outside[i] {
            outside[i] = true;
            queue.push_back((x, y));
        }
    };
    for x in 0..w {
        seed(x, 0, &mut outside, &mut queue);
        seed(x, h - 1, &mut outside, &mut queue);
    }
    for y in 0..h {
        seed(0, y, &mut outside, &mut queue);
        seed(w - 1, y, &mut outside, &mut queue);
    }
    while let Some((x, y)) = queue.pop_front() {
        for (nx, ny) in neighbors(x, y, w, h, conn.dual()) {
            seed(nx, ny, &mut outside, &mut queue);
        }
    }
    let data = mask
        .data()
        .iter()
        .zip(&outside)
        .map(|(&m, &o)| m || !o)
        .collect();
    BinaryMask::from_vec(w, h, data).expect("same shape")
}

/// Regional minima: plateaus (connected constant-value sets) with no
/// strictly lower neighbor. Every pixel of a qualifying plateau is marked.
pub fn regional_minima(img: &GrayImage, conn: Connectivity) -> BinaryMask {
    let (w, h) = (img.width(), img.height());
    let mut out = vec![false; img.data().len()];
    let mut visited = vec![false; img.data().len()];
    let mut plateau = Vec::new();
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            if visited[img.idx(x, y)] {
                continue;
            }
            let level = img.get(x, y);
            let mut is_min = true;
            plateau.clear();
            queue.push_back((x, y));
            visited[img.idx(x, y)] = true;
            while let Some((cx, cy)) = queue.pop_front() {
                plateau.push(img.idx(cx, cy));
                for (nx, ny) in neighbors(cx, cy, w, h, conn) {
                    let nv = img.get(nx, ny);
                    if nv == level {
                        let ni = img.idx(nx, ny);
                        if !visited[ni] {
                            visited[ni] = true;
                            queue.push_back((nx, ny));
                        }
                    } else if nv < level {
                        is_min = false;
                    }
                }
            }
            if is_min {
                for &i in &plateau {
                    out[i] = true;
                }
            }
        }
    }
    BinaryMask::from_vec(w, h, out).expect("same shape")
}

/// Rewrites `img` so that its regional minima are exactly the connected
/// components of `markers`, and nothing else.
///
/// Construction: build the marker function `m` (0 on markers, 255 elsewhere),
/// shift the original relief up by one (clamped to 255), take the pointwise
/// minimum with `m`, and reconstruct that by erosion from `m`. The +1 shift
/// guarantees non-marker pixels end strictly above 0, so every parasitic
/// minimum drowns; relative order between non-marker pixels is preserved up
/// to the shift.
pub fn impose_minima(
    img: &GrayImage,
    markers: &BinaryMask,
    conn: Connectivity,
) -> Result<GrayImage> {
    if img.width() != markers.width() || img.height() != markers.height() {
        return Err(Error::DimensionMismatch(format!(
            "image {}x{} vs markers {}x{}",
            img.width(),
            img.height(),
            markers.width(),
            markers.height()
        )));
    }
    if markers.count_true() == 0 {
        return Err(Error::EmptyMarker);
    }
    let (w, h) = (img.width(), img.height());
    let n = img.data().len();
    let mut marker_fn = Vec::with_capacity(n);
    let mut clipped = Vec::with_capacity(n);
    for i in 0..n {
        let m = if markers.data()[i] { 0.0 } else { 255.0 };
        marker_fn.push(m);
        clipped.push(((img.data()[i] + 1.0).min(255.0)).min(m));
    }
    let marker_fn = GrayImage::from_vec(w, h, marker_fn)?;
    let clipped = GrayImage::from_vec(w, h, clipped)?;
    // Reconstruction by erosion via the complement dual of reconstruction by
    // dilation; both operands live in [0, 255] by construction.
    let inv = reconstruct_by_dilation(
        &marker_fn.map(|v| 255.0 - v),
        &clipped.map(|v| 255.0 - v),
        conn,
    )?;
    Ok(inv.map(|v| 255.0 - v))
}

/// Exact Euclidean distance to the nearest true pixel, for every pixel.
/// Errors with [`Error::EmptyMask`] when there is no true pixel at all.
///
/// Two separable passes over squared distances (per-column scan, then a
/// per-row lower envelope of parabolas) make this exact and linear in the
/// pixel count — no chamfer approximation.
pub fn distance_transform(mask: &BinaryMask) -> Result<GrayImage> {
    if mask.count_true() == 0 {
        return Err(Error::EmptyMask);
    }
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    const FAR: f64 = 1e12;

    // Pass 1: squared distance to the nearest true pixel within each column.
    let mut colsq = vec![0.0f64; w * h];
    for x in 0..w {
        let mut d = FAR;
        for y in 0..h {
            d = if mask.data()[y * w + x] { 0.0 } else { (d + 1.0).min(FAR) };
            colsq[y * w + x] = d;
        }
        d = FAR;
        for y in (0..h).rev() {
            d = if mask.data()[y * w + x] { 0.0 } else { (d + 1.0).min(FAR) };
            let v = colsq[y * w + x].min(d);
            colsq[y * w + x] = v * v;
        }
    }

    // Pass 2: per-row lower envelope of the parabolas q -> (x - q)^2 + colsq.
    let mut out = vec![0.0f64; w * h];
    let mut v = vec![0usize; w];
    let mut z = vec![0.0f64; w + 1];
    for y in 0..h {
        let row = &colsq[y * w..(y + 1) * w];
        let mut k = 0usize;
        v[0] = 0;
        z[0] = f64::NEG_INFINITY;
        z[1] = f64::INFINITY;
        for q in 1..w {
            let mut s;
            loop {
                let p = v[k];
                s = ((row[q] + (q * q) as f64) - (row[p] + (p * p) as f64))
                    / (2.0 * (q as f64 - p as f64));
                if s <= z[k] {
                    debug_assert!(k > 0);
                    k -= 1;
                } else {
                    break;
                }
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
        }
        k = 0;
        for q in 0..w {
            while z[k + 1] < q as f64 {
                k += 1;
            }
            let p = v[k];
            let d2 = (q as f64 - p as f64) * (q as f64 - p as f64) + row[p];
            out[y * w + q] = d2.sqrt();
        }
    }
    GrayImage::from_vec(mask.width(), mask.height(), out)
}

/// Skeleton by influence zones: every pixel is labeled with the raster-order
/// identity of the nearest marker component, computed by flooding the
/// Euclidean distance transform with the marker components as seeds. Pixels
/// claimed at exactly equal flood distance stay 0 and form the returned
/// skeleton mask (empty when there is only one component).
pub fn skiz(markers: &BinaryMask, conn: Connectivity) -> Result<(LabelMap, BinaryMask)> {
    if markers.count_true() == 0 {
        return Err(Error::EmptyMarker);
    }
    let dt = distance_transform(markers)?;
    let result = crate::watershed::marker_watershed(&dt, markers, conn)?;
    let lines = result.labels.zero_mask();
    Ok((result.labels, lines))
}

/// Convenience: the connected components of a mask as in
/// [`label_components`], re-exported here because marker construction and
/// flooding both depend on the same raster numbering.
pub fn mask_components(mask: &BinaryMask, conn: Connectivity) -> (LabelMap, u32) {
    label_components(mask, conn)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: u32, h: u32, v: &[f64]) -> GrayImage {
        GrayImage::from_vec(w, h, v.to_vec()).unwrap()
    }

    fn mask(w: u32, h: u32, v: &[u8]) -> BinaryMask {
        BinaryMask::from_vec(w, h, v.iter().map(|&b| b != 0).collect()).unwrap()
    }

    #[test]
    fn erode_spreads_a_dark_corner() {
        // Single dark pixel in the corner of a bright 3x3; a radius-1 square
        // window reaches it from the four pixels of the top-left 2x2 block.
        let mut img = gray(3, 3, &[255.0; 9]);
        img.set(0, 0, 0.0);
        let er = erode(&img, &StructuringElement::square(1));
        let expect = [0.0, 0.0, 255.0, 0.0, 0.0, 255.0, 255.0, 255.0, 255.0];
        assert_eq!(er.data(), &expect);
    }

    #[test]
    fn dilation_is_the_complement_dual_of_erosion() {
        // Deterministic pseudo-random 8x8 in [0, 255], all three shapes.
        let vals: Vec<f64> = (0..64).map(|i| ((i * 73 + 19) % 256) as f64).collect();
        let img = gray(8, 8, &vals);
        for se in [
            StructuringElement::square(1),
            StructuringElement::cross(2),
            StructuringElement::disk(2),
        ] {
            let a = dilate(&img, &se);
            let b = erode(&img.map(|v| 255.0 - v), &se).map(|v| 255.0 - v);
            assert_eq!(a.data(), b.data(), "duality failed for {se:?}");
        }
    }

    #[test]
    fn radius_zero_is_identity() {
        let vals: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let img = gray(4, 3, &vals);
        assert_eq!(erode(&img, &StructuringElement::disk(0)).data(), img.data());
        assert_eq!(dilate(&img, &StructuringElement::square(0)).data(), img.data());
    }

    #[test]
    fn reconstruction_matches_the_spec_strip() {
        let mask_img = gray(5, 1, &[0.0, 3.0, 0.0, 2.0, 0.0]);
        let marker = gray(5, 1, &[0.0, 1.0, 0.0, 0.0, 0.0]);
        let rec = reconstruct_by_dilation(&marker, &mask_img, Connectivity::Four).unwrap();
        // Growth under the mask cannot cross the zero at index 2, and cannot
        // exceed the marker peak of 1.
        assert_eq!(rec.data(), &[0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn reconstruction_rejects_marker_above_mask() {
        let mask_img = gray(2, 1, &[5.0, 5.0]);
        let marker = gray(2, 1, &[6.0, 0.0]);
        assert!(matches!(
            reconstruct_by_dilation(&marker, &mask_img, Connectivity::Four),
            Err(Error::MarkerExceedsMask { x: 0, y: 0, .. })
        ));
    }

    #[test]
    fn fill_holes_closes_a_ring_but_not_a_c_shape() {
        // 5x5 ring of true pixels with a false center: the center fills.
        let ring = mask(
            5,
            5,
            &[
                0, 0, 0, 0, 0, //
                0, 1, 1, 1, 0, //
                0, 1, 0, 1, 0, //
                0, 1, 1, 1, 0, //
                0, 0, 0, 0, 0,
            ],
        );
        let filled = fill_holes(&ring, Connectivity::Four);
        assert!(filled.get(2, 2));
        assert_eq!(filled.count_true(), 9);

        // Break the ring: the former hole leaks to the border and survives.
        let mut c_shape = ring.clone();
        c_shape.set(2, 1, false);
        let filled_c = fill_holes(&c_shape, Connectivity::Four);
        assert!(!filled_c.get(2, 2));
        assert_eq!(filled_c.count_true(), ring.count_true() - 1);
    }

    #[test]
    fn fill_holes_on_all_false_is_identity() {
        let empty = BinaryMask::new(4, 4, false).unwrap();
        assert_eq!(fill_holes(&empty, Connectivity::Four), empty);
    }

    #[test]
    fn fill_holes_leaves_a_checkerboard_alone() {
        // Isolated false pixels on a checkerboard touch the border flood
        // diagonally; with the dual (8-connected) background they are not
        // enclosed holes.
        let mut data = Vec::new();
        for y in 0..6u32 {
            for x in 0..6u32 {
                data.push((x + y) % 2 == 0);
            }
        }
        let checker = BinaryMask::from_vec(6, 6, data).unwrap();
        assert_eq!(fill_holes(&checker, Connectivity::Four), checker);
    }

    #[test]
    fn regional_minima_of_a_valley_strip() {
        let img = gray(5, 1, &[0.0, 1.0, 2.0, 1.0, 0.0]);
        let m = regional_minima(&img, Connectivity::Four);
        assert_eq!(
            m.data(),
            &[true, false, false, false, true]
        );
    }

    #[test]
    fn regional_minima_with_interior_pit() {
        let img = gray(5, 1, &[1.0, 1.0, 2.0, 0.0, 2.0]);
        let m = regional_minima(&img, Connectivity::Four);
        // Two separate minima: the level-1 plateau at indices 0-1 (its only
        // outside neighbor, index 2, is higher) and the lone pit at index 3.
        assert_eq!(m.data(), &[true, true, false, true, false]);
    }

    #[test]
    fn regional_minima_of_a_constant_image_is_everything() {
        let img = GrayImage::new(3, 2, 7.0).unwrap();
        assert_eq!(regional_minima(&img, Connectivity::Eight).count_true(), 6);
    }

    #[test]
    fn impose_minima_drowns_the_natural_pit() {
        let img = gray(5, 1, &[5.0, 3.0, 5.0, 2.0, 5.0]);
        let mut mk = BinaryMask::new(5, 1, false).unwrap();
        mk.set(0, 0, true);
        let imposed = impose_minima(&img, &mk, Connectivity::Four).unwrap();
        let minima = regional_minima(&imposed, Connectivity::Four);
        assert_eq!(minima.data(), &[true, false, false, false, false]);
        assert_eq!(imposed.get(0, 0), 0.0);
    }

    #[test]
    fn impose_minima_with_all_true_marker_flattens_everything() {
        let img = gray(3, 1, &[9.0, 4.0, 1.0]);
        let mk = BinaryMask::new(3, 1, true).unwrap();
        let imposed = impose_minima(&img, &mk, Connectivity::Four).unwrap();
        assert_eq!(imposed.data(), &[0.0, 0.0, 0.0]);
        assert_eq!(regional_minima(&imposed, Connectivity::Four).count_true(), 3);
    }

    #[test]
    fn impose_minima_requires_a_marker() {
        let img = gray(2, 2, &[1.0; 4]);
        let mk = BinaryMask::new(2, 2, false).unwrap();
        assert!(matches!(
            impose_minima(&img, &mk, Connectivity::Four),
            Err(Error::EmptyMarker)
        ));
    }

    #[test]
    fn distance_transform_single_seed() {
        let mut mk = BinaryMask::new(3, 3, false).unwrap();
        mk.set(0, 0, true);
        let dt = distance_transform(&mk).unwrap();
        assert_eq!(dt.get(0, 0), 0.0);
        assert_eq!(dt.get(2, 0), 2.0);
        assert!((dt.get(1, 1) - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!((dt.get(2, 2) - 8.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn distance_transform_all_true_is_zero() {
        let mk = BinaryMask::new(4, 2, true).unwrap();
        let dt = distance_transform(&mk).unwrap();
        assert!(dt.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn distance_transform_rejects_empty_mask() {
        let mk = BinaryMask::new(3, 3, false).unwrap();
        assert!(matches!(distance_transform(&mk), Err(Error::EmptyMask)));
    }

    #[test]
    fn skiz_of_a_seven_pixel_strip() {
        let mut mk = BinaryMask::new(7, 1, false).unwrap();
        mk.set(0, 0, true);
        mk.set(6, 0, true);
        let (labels, lines) = skiz(&mk, Connectivity::Four).unwrap();
        assert_eq!(labels.data(), &[1, 1, 1, 0, 2, 2, 2]);
        assert_eq!(lines.count_true(), 1);
        assert!(lines.get(3, 0));
    }

    #[test]
    fn skiz_of_one_component_has_no_skeleton() {
        let mut mk = BinaryMask::new(4, 4, false).unwrap();
        mk.set(1, 1, true);
        let (labels, lines) = skiz(&mk, Connectivity::Four).unwrap();
        assert!(labels.data().iter().all(|&v| v == 1));
        assert_eq!(lines.count_true(), 0);
    }
}
