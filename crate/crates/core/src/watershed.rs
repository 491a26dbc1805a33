//! Immersion watershed and its brute-force reference flooder.
//!
//! [`watershed_vs`] implements the classic sorted-pixel immersion scheme:
//! intensities are quantized to the integer working scale 0..=255, regional
//! minima become the initial basins (numbered 1..=K by the raster position of
//! each component's first pixel), and the relief floods level by level. Within
//! one level every still-unlabeled pixel of the current threshold set joins
//! the basin that is strictly closest by breadth-first (geodesic) distance;
//! pixels reached by two or more distinct basins at exactly the same distance
//! stay unlabeled. Such contested pixels get reconsidered at later levels —
//! rising water can open a shorter path and break the tie — and whatever is
//! still unlabeled once the relief is submerged forms the watershed lines
//! (label 0).
//!
//! [`flooding_oracle`] computes the same partition straight from the
//! recursive influence-zone definition: per level it rebuilds the geodesic
//! distance from every active basin across the whole threshold set and takes
//! strict argmins. It is deliberately literal — quadratic in the number of
//! basins — and therefore capped at 64x64 inputs; its purpose is to be
//! obviously faithful so the fast flooder can be checked against it
//! exhaustively.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::grid::{label_components, neighbors, BinaryMask, Connectivity, GrayImage, LabelMap};
use crate::morph::{impose_minima, regional_minima};

/// Side limit for [`flooding_oracle`].
pub const ORACLE_MAX_SIDE: u32 = 64;

/// Sentinel for "reached from several basins at equal distance".
const MULTI: u32 = u32::MAX;

/// Flooding works on integer levels: clamp to `[0, 255]`, then round half up.
#[inline]
pub fn quantize_level(v: f64) -> u8 {
    (v.clamp(0.0, 255.0) + 0.5).floor() as u8
}

/// A watershed partition: `labels` is 0 on watershed lines and `1..=n_basins`
/// inside catchment basins; every basin contains exactly one regional-minimum
/// component of the flooded (quantized) relief.
#[derive(Debug, Clone)]
pub struct WatershedResult {
    pub labels: LabelMap,
    pub n_basins: u32,
    pub watershed_pixels: usize,
}

/// The ascending threshold decomposition of a quantized relief: `levels` are
/// the distinct quantized values present, and `threshold_sets[i]` holds every
/// pixel with value `<= levels[i]`. The sets are nested and the last one
/// covers the whole image.
#[derive(Debug, Clone)]
pub struct FloodLevelSets {
    pub levels: Vec<u8>,
    pub threshold_sets: Vec<BinaryMask>,
}

impl FloodLevelSets {
    pub fn build(img: &GrayImage) -> Result<Self> {
        let q: Vec<u8> = img.data().iter().map(|&v| quantize_level(v)).collect();
        let mut present = [false; 256];
        for &v in &q {
            present[v as usize] = true;
        }
        let levels: Vec<u8> = (0..=255u8).filter(|&l| present[l as usize]).collect();
        let mut threshold_sets = Vec::with_capacity(levels.len());
        for &l in &levels {
            threshold_sets.push(BinaryMask::from_vec(
                img.width(),
                img.height(),
                q.iter().map(|&v| v <= l).collect(),
            )?);
        }
        Ok(Self { levels, threshold_sets })
    }
}

fn quantized(img: &GrayImage) -> (Vec<u8>, GrayImage) {
    let q: Vec<u8> = img.data().iter().map(|&v| quantize_level(v)).collect();
    let qimg = GrayImage::from_vec(
        img.width(),
        img.height(),
        q.iter().map(|&v| v as f64).collect(),
    )
    .expect("quantized copy keeps the shape");
    (q, qimg)
}

/// Labels the regional minima of the quantized relief `1..=K` in raster order
/// of each component's first pixel. Both flooders share this so their basin
/// numbering is identical, not merely equal up to renaming.
fn prelabeled_minima(qimg: &GrayImage, conn: Connectivity) -> (Vec<u32>, u32) {
    let minima = regional_minima(qimg, conn);
    let (labels, count) = label_components(&minima, conn);
    (labels.data().to_vec(), count)
}

/// Sorted-pixel immersion watershed of a grayscale relief.
///
/// Levels are processed in ascending order through counting-sort buckets.
/// Within a level, the breadth-first front starts from all basin pixels that
/// touch the level's unlabeled domain (seeded in raster order) and each
/// domain pixel tracks the label reaching it first along with a collision
/// flag, so "strictly closer wins, equal distance stays contested" comes out
/// exactly as the influence-zone definition demands.
pub fn watershed_vs(img: &GrayImage, conn: Connectivity) -> Result<WatershedResult> {
    let (w, h) = (img.width(), img.height());
    let n = img.data().len();
    let (q, qimg) = quantized(img);
    let (mut label, n_basins) = prelabeled_minima(&qimg, conn);

    // Counting sort: pixel indices per level, raster order within a level.
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); 256];
    for (i, &v) in q.iter().enumerate() {
        buckets[v as usize].push(i as u32);
    }

    let stride = w as usize;
    let mut domain_gen = vec![0u32; n];
    let mut dist_gen = vec![0u32; n];
    let mut dist = vec![0u32; n];
    let mut cand = vec![0u32; n];
    let mut gen = 0u32;
    let mut pending: Vec<u32> = Vec::new();
    let mut queue: VecDeque<u32> = VecDeque::new();
    let mut domain: Vec<u32> = Vec::new();
    let mut sources: Vec<u32> = Vec::new();

    for level in 0..256usize {
        if buckets[level].is_empty() {
            // The threshold set did not grow; contested pixels stay contested.
            continue;
        }
        gen += 1;
        domain.clear();
        domain.extend(pending.iter().copied());
        domain.extend(buckets[level].iter().copied().filter(|&i| label[i as usize] == 0));
        pending.clear();
        if domain.is_empty() {
            continue; // this level only added pre-labeled minima
        }
        for &i in &domain {
            domain_gen[i as usize] = gen;
        }

        // Seeds: labeled pixels bordering the domain, in raster order.
        sources.clear();
        for &i in &domain {
            let (x, y) = ((i as usize % stride) as u32, (i as usize / stride) as u32);
            for (nx, ny) in neighbors(x, y, w, h, conn) {
                let j = ny as usize * stride + nx as usize;
                if label[j] != 0 && dist_gen[j] != gen {
                    dist_gen[j] = gen;
                    dist[j] = 0;
                    cand[j] = label[j];
                    sources.push(j as u32);
                }
            }
        }
        sources.sort_unstable();
        queue.clear();
        queue.extend(sources.iter().copied());

        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            let cu = cand[u as usize];
            let (x, y) = ((u as usize % stride) as u32, (u as usize / stride) as u32);
            for (nx, ny) in neighbors(x, y, w, h, conn) {
                let vpix = ny as usize * stride + nx as usize;
                if domain_gen[vpix] != gen {
                    continue; // only unlabeled pixels of the level are claimable
                }
                if dist_gen[vpix] != gen {
                    dist_gen[vpix] = gen;
                    dist[vpix] = du + 1;
                    cand[vpix] = cu;
                    queue.push_back(vpix as u32);
                } else if dist[vpix] == du + 1 && cand[vpix] != cu {
                    cand[vpix] = MULTI;
                }
            }
        }

        for &i in &domain {
            let iu = i as usize;
            if dist_gen[iu] == gen && cand[iu] != MULTI {
                label[iu] = cand[iu];
            } else {
                // Contested at this level (or, impossibly, unreached): the
                // pixel stays unlabeled and competes again when the water
                // rises. Whatever remains at the end is watershed line.
                debug_assert!(dist_gen[iu] == gen, "domain pixel unreachable from any basin");
                pending.push(i);
            }
        }
    }

    let watershed_pixels = label.iter().filter(|&&l| l == 0).count();
    Ok(WatershedResult {
        labels: LabelMap::from_vec(w, h, label)?,
        n_basins,
        watershed_pixels,
    })
}

/// Reference flooder, straight from the level-recursion definition.
///
/// Starting from the lowest threshold set, each next set is the union of that
/// level's new regional minima and the geodesic influence zones of the
/// previous basins inside the new set: a pixel joins the basin it is strictly
/// closest to (breadth-first distance within the set), equidistant pixels
/// stay out for now, and the final watershed is the complement of the last
/// flooded set. Rejects images larger than 64x64 — every per-level distance
/// field is rebuilt from scratch for every basin, which is the point.
pub fn flooding_oracle(img: &GrayImage, conn: Connectivity) -> Result<WatershedResult> {
    let (w, h) = (img.width(), img.height());
    if w > ORACLE_MAX_SIDE || h > ORACLE_MAX_SIDE {
        return Err(Error::ImageTooLarge { width: w, height: h, max: ORACLE_MAX_SIDE });
    }
    let n = img.data().len();
    let (_q, qimg) = quantized(img);
    let (minima_label, n_basins) = prelabeled_minima(&qimg, conn);
    let sets = FloodLevelSets::build(&qimg)?;
    let stride = w as usize;

    let mut label = vec![0u32; n];
    let mut best_d = vec![u32::MAX; n];
    let mut best_lab = vec![0u32; n];
    let mut tied = vec![false; n];
    let mut d = vec![u32::MAX; n];
    let mut queue: VecDeque<u32> = VecDeque::new();

    for (li, t) in sets.threshold_sets.iter().enumerate() {
        if li == 0 {
            // The lowest threshold set is exactly the union of the lowest
            // regional minima; adopt them as the initial basins.
            for i in 0..n {
                if t.data()[i] {
                    debug_assert!(minima_label[i] != 0);
                    label[i] = minima_label[i];
                }
            }
            continue;
        }

        for i in 0..n {
            best_d[i] = u32::MAX;
            best_lab[i] = 0;
            tied[i] = false;
        }

        // Geodesic distance within the threshold set, one basin at a time.
        let active: Vec<u32> = {
            let mut seen = vec![false; n_basins as usize + 1];
            for &l in &label {
                if l != 0 {
                    seen[l as usize] = true;
                }
            }
            (1..=n_basins).filter(|&b| seen[b as usize]).collect()
        };
        for &b in &active {
            for i in 0..n {
                d[i] = u32::MAX;
            }
            queue.clear();
            for i in 0..n {
                if label[i] == b {
                    d[i] = 0;
                    queue.push_back(i as u32);
                }
            }
            while let Some(u) = queue.pop_front() {
                let du = d[u as usize];
                let (x, y) = ((u as usize % stride) as u32, (u as usize / stride) as u32);
                for (nx, ny) in neighbors(x, y, w, h, conn) {
                    let v = ny as usize * stride + nx as usize;
                    if t.data()[v] && d[v] == u32::MAX {
                        d[v] = du + 1;
                        queue.push_back(v as u32);
                    }
                }
            }
            for i in 0..n {
                if !t.data()[i] || label[i] != 0 || d[i] == u32::MAX {
                    continue;
                }
                if d[i] < best_d[i] {
                    best_d[i] = d[i];
                    best_lab[i] = b;
                    tied[i] = false;
                } else if d[i] == best_d[i] {
                    tied[i] = true;
                }
            }
        }

        for i in 0..n {
            if !t.data()[i] || label[i] != 0 {
                continue;
            }
            if best_d[i] == u32::MAX {
                // Unreachable from every basin: a component made purely of
                // this level's new regional minima.
                debug_assert!(minima_label[i] != 0);
                label[i] = minima_label[i];
            } else if !tied[i] {
                label[i] = best_lab[i];
            }
        }
    }

    let watershed_pixels = label.iter().filter(|&&l| l == 0).count();
    Ok(WatershedResult {
        labels: LabelMap::from_vec(w, h, label)?,
        n_basins,
        watershed_pixels,
    })
}

/// Marker-controlled watershed: imposes the marker components as the only
/// minima of the relief, then floods. Basin `k` contains marker component `k`
/// (raster numbering), so the caller controls exactly how many regions come
/// out.
pub fn marker_watershed(
    img: &GrayImage,
    markers: &BinaryMask,
    conn: Connectivity,
) -> Result<WatershedResult> {
    let imposed = impose_minima(img, markers, conn)?;
    watershed_vs(&imposed, conn)
}

/// Sobel gradient magnitude with edge replication.
///
/// Horizontal and vertical 3x3 Sobel responses (weights 1/2/1) are combined
/// as `sqrt(gx^2 + gy^2)`; the result is not rescaled, so a unit step yields
/// magnitude 4 on the two columns or rows adjacent to the step. Out-of-bounds
/// taps clamp to the nearest edge pixel, which keeps a constant image exactly
/// flat at zero.
pub fn gradient_magnitude(img: &GrayImage) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let sample = |x: i64, y: i64| -> f64 {
        let cx = x.clamp(0, w as i64 - 1) as u32;
        let cy = y.clamp(0, h as i64 - 1) as u32;
        img.get(cx, cy)
    };
    let mut out = Vec::with_capacity(img.data().len());
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let gx = (sample(x + 1, y - 1) + 2.0 * sample(x + 1, y) + sample(x + 1, y + 1))
                - (sample(x - 1, y - 1) + 2.0 * sample(x - 1, y) + sample(x - 1, y + 1));
            let gy = (sample(x - 1, y + 1) + 2.0 * sample(x, y + 1) + sample(x + 1, y + 1))
                - (sample(x - 1, y - 1) + 2.0 * sample(x, y - 1) + sample(x + 1, y - 1));
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    GrayImage::from_vec(w, h, out).expect("gradient keeps the shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: u32, h: u32, v: &[f64]) -> GrayImage {
        GrayImage::from_vec(w, h, v.to_vec()).unwrap()
    }

    #[test]
    fn quantization_rounds_half_up_and_clamps() {
        assert_eq!(quantize_level(0.49), 0);
        assert_eq!(quantize_level(0.5), 1);
        assert_eq!(quantize_level(254.5), 255);
        assert_eq!(quantize_level(-3.0), 0);
        assert_eq!(quantize_level(1000.0), 255);
    }

    #[test]
    fn constant_image_floods_to_a_single_basin() {
        let img = GrayImage::new(4, 3, 42.0).unwrap();
        let res = watershed_vs(&img, Connectivity::Four).unwrap();
        assert_eq!(res.n_basins, 1);
        assert_eq!(res.watershed_pixels, 0);
        assert!(res.labels.data().iter().all(|&l| l == 1));
    }

    #[test]
    fn valley_strip_splits_at_the_crest() {
        let img = gray(5, 1, &[0.0, 1.0, 2.0, 1.0, 0.0]);
        let res = watershed_vs(&img, Connectivity::Four).unwrap();
        assert_eq!(res.labels.data(), &[1, 1, 0, 2, 2]);
        assert_eq!(res.n_basins, 2);
        assert_eq!(res.watershed_pixels, 1);
    }

    #[test]
    fn oracle_handles_a_mid_level_minimum() {
        // The center pixel is a regional minimum of its own level and must
        // become a third basin, fenced off by two watershed pixels.
        let img = gray(5, 1, &[0.0, 2.0, 1.0, 2.0, 0.0]);
        let res = flooding_oracle(&img, Connectivity::Four).unwrap();
        assert_eq!(res.n_basins, 3);
        assert_eq!(res.labels.data(), &[1, 0, 2, 0, 3]);
        let fast = watershed_vs(&img, Connectivity::Four).unwrap();
        assert_eq!(fast.labels.data(), res.labels.data());
    }

    #[test]
    fn flooder_matches_oracle_on_an_asymmetric_plateau() {
        // A level-9 plateau touching two basins at different geodesic depths.
        let img = gray(4, 1, &[0.0, 9.0, 9.0, 0.0]);
        let fast = watershed_vs(&img, Connectivity::Four).unwrap();
        let slow = flooding_oracle(&img, Connectivity::Four).unwrap();
        // Influence zones split an even plateau cleanly: no watershed pixel.
        assert_eq!(fast.labels.data(), &[1, 1, 2, 2]);
        assert_eq!(slow.labels.data(), fast.labels.data());
    }

    #[test]
    fn two_pit_grid_splits_along_the_ridge() {
        #[rustfmt::skip]
        let img = gray(5, 5, &[
            0.0, 1.0, 5.0, 1.0, 0.0,
            0.0, 1.0, 5.0, 1.0, 0.0,
            0.0, 1.0, 5.0, 1.0, 0.0,
            0.0, 1.0, 5.0, 1.0, 0.0,
            0.0, 1.0, 5.0, 1.0, 0.0,
        ]);
        let fast = watershed_vs(&img, Connectivity::Four).unwrap();
        let slow = flooding_oracle(&img, Connectivity::Four).unwrap();
        assert_eq!(fast.labels.data(), slow.labels.data());
        assert_eq!(fast.n_basins, 2);
        for y in 0..5 {
            assert_eq!(fast.labels.get(0, y), 1);
            assert_eq!(fast.labels.get(4, y), 2);
            assert_eq!(fast.labels.get(2, y), 0, "ridge column is watershed");
        }
    }

    #[test]
    fn oracle_rejects_large_images() {
        let img = GrayImage::new(65, 4, 0.0).unwrap();
        assert!(matches!(
            flooding_oracle(&img, Connectivity::Four),
            Err(Error::ImageTooLarge { width: 65, .. })
        ));
    }

    #[test]
    fn level_sets_are_nested_and_end_at_the_full_image() {
        let img = gray(3, 2, &[3.0, 0.0, 7.0, 0.0, 3.0, 7.0]);
        let sets = FloodLevelSets::build(&img).unwrap();
        assert_eq!(sets.levels, vec![0, 3, 7]);
        for w in sets.threshold_sets.windows(2) {
            for i in 0..w[0].data().len() {
                assert!(!w[0].data()[i] || w[1].data()[i], "threshold sets must nest");
            }
        }
        assert_eq!(sets.threshold_sets.last().unwrap().count_true(), 6);
    }

    #[test]
    fn marker_watershed_on_flat_relief_splits_midway() {
        let img = GrayImage::new(7, 1, 10.0).unwrap();
        let mut mk = BinaryMask::new(7, 1, false).unwrap();
        mk.set(0, 0, true);
        mk.set(6, 0, true);
        let res = marker_watershed(&img, &mk, Connectivity::Four).unwrap();
        assert_eq!(res.labels.data(), &[1, 1, 1, 0, 2, 2, 2]);
        assert_eq!(res.n_basins, 2);
    }

    #[test]
    fn marker_watershed_suppresses_unmarked_minima() {
        let img = gray(5, 1, &[0.0, 1.0, 2.0, 1.0, 0.0]);
        let mut mk = BinaryMask::new(5, 1, false).unwrap();
        mk.set(0, 0, true);
        let res = marker_watershed(&img, &mk, Connectivity::Four).unwrap();
        assert_eq!(res.n_basins, 1);
        assert_eq!(res.watershed_pixels, 0);
        assert!(res.labels.data().iter().all(|&l| l == 1));
    }

    #[test]
    fn whole_image_marker_yields_one_basin() {
        let img = gray(3, 3, &(0..9).map(|v| v as f64).collect::<Vec<_>>());
        let mk = BinaryMask::new(3, 3, true).unwrap();
        let res = marker_watershed(&img, &mk, Connectivity::Four).unwrap();
        assert_eq!(res.n_basins, 1);
        assert_eq!(res.watershed_pixels, 0);
    }

    #[test]
    fn gradient_of_constant_image_is_zero() {
        let img = GrayImage::new(5, 4, 99.0).unwrap();
        assert!(gradient_magnitude(&img).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_of_a_vertical_step() {
        // Columns 0..=1 at 0, columns 2..=3 at 50: magnitude 4*50 on the two
        // columns adjacent to the step, 0 far away.
        let mut img = GrayImage::new(4, 5, 0.0).unwrap();
        for y in 0..5 {
            img.set(2, y, 50.0);
            img.set(3, y, 50.0);
        }
        let g = gradient_magnitude(&img);
        for y in 0..5 {
            assert_eq!(g.get(1, y), 200.0);
            assert_eq!(g.get(2, y), 200.0);
            assert_eq!(g.get(0, y), 0.0);
            assert_eq!(g.get(3, y), 0.0);
        }
    }

    #[test]
    fn gradient_of_single_pixel_image_is_zero() {
        let img = GrayImage::new(1, 1, 123.0).unwrap();
        assert_eq!(gradient_magnitude(&img).data(), &[0.0]);
    }

    #[test]
    fn eight_connectivity_merges_diagonal_minima() {
        #[rustfmt::skip]
        let img = gray(3, 3, &[
            0.0, 9.0, 9.0,
            9.0, 0.0, 9.0,
            9.0, 9.0, 0.0,
        ]);
        let four = watershed_vs(&img, Connectivity::Four).unwrap();
        assert_eq!(four.n_basins, 3);
        let eight = watershed_vs(&img, Connectivity::Eight).unwrap();
        assert_eq!(eight.n_basins, 1);
        for conn in [Connectivity::Four, Connectivity::Eight] {
            let fast = watershed_vs(&img, conn).unwrap();
            let slow = flooding_oracle(&img, conn).unwrap();
            assert_eq!(fast.labels.data(), slow.labels.data());
        }
    }
}
