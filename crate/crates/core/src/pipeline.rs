//! End-to-end segmentation drivers: the marker-controlled watershed
//! pipeline, the plain watershed baseline it is compared against, and the
//! region/boundary metrics used to quantify over-segmentation.
//!
//! The full pipeline runs three stages on a (optionally Hann-tapered)
//! image:
//!
//! 1. **Binary extraction** — threshold, hole fill, and a two-phase active
//!    contour refine the image into an object mask.
//! 2. **Marker construction** — reconstruction-based smoothing followed by
//!    regional minima marks object interiors; the skeleton by influence
//!    zones of the binary marks the background ridges between objects.
//! 3. **Flooding** — the markers are imposed as the only minima of the
//!    gradient (or raw) relief, which is then flooded by the immersion
//!    watershed.
//!
//! The baseline skips stages 1–2 and floods the relief directly; comparing
//! region counts demonstrates how much spurious fragmentation the markers
//! remove.

use std::time::Instant;

use crate::contour::{chan_vese, ChanVeseParams};
use crate::error::{Error, Result};
use crate::grid::{label_components, BinaryMask, Connectivity, GrayImage, LabelMap};
use crate::morph::{
    close_by_reconstruction, distance_transform, erode_mask, fill_holes, open_by_reconstruction,
    regional_minima, skiz, StructuringElement,
};
use crate::octsim::hann2d;
use crate::watershed::{gradient_magnitude, marker_watershed, watershed_vs};

/// Relief flooded by the watershed stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FloodSource {
    /// Sobel gradient magnitude of the input.
    #[default]
    Gradient,
    /// The input intensities themselves.
    Raw,
}

/// Which intensity extreme counts as an object interior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectPolarity {
    /// Objects are dark on a bright background (fluid interiors).
    #[default]
    Dark,
    /// Objects are bright on a dark background.
    Bright,
}

/// Block layout of the optional 2D taper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TaperBlock {
    /// One window spanning the whole image.
    #[default]
    Full,
    /// Tile the image with `n` x `n` windows (edge tiles shrink to fit;
    /// leftover 1-pixel strips get weight zero).
    Size(u32),
}

/// Knobs for the segmentation pipeline.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Binary-extraction threshold on the `[0, 255]` scale.
    pub threshold: f64,
    /// Keep pixels at or below the threshold (default); `false` keeps
    /// pixels at or above it instead.
    pub threshold_keep_low: bool,
    /// Radius of the disk used by the marker-stage smoothing. `None`
    /// scales the reference radius 5 proportionally from a 900-pixel
    /// short side: `max(1, round(5 * min(w, h) / 900))`.
    pub fg_se_radius: Option<u32>,
    /// Pixel adjacency used by every flooding step.
    pub conn: Connectivity,
    /// Apply the 2D raised-cosine taper before anything else.
    pub hann_taper: bool,
    /// Taper layout when `hann_taper` is set.
    pub hann_block: TaperBlock,
    /// Active-contour parameters for the binary stage.
    pub chan_vese: ChanVeseParams,
    /// Relief to flood.
    pub flood_on: FloodSource,
    /// Object polarity.
    pub objects: ObjectPolarity,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            threshold: 245.0,
            threshold_keep_low: true,
            fg_se_radius: None,
            conn: Connectivity::Four,
            hann_taper: false,
            hann_block: TaperBlock::Full,
            chan_vese: ChanVeseParams::default(),
            flood_on: FloodSource::Gradient,
            objects: ObjectPolarity::Dark,
        }
    }
}

/// Per-region summary: pixel count, centroid, and inclusive bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionStats {
    pub label: u32,
    pub area_px: u64,
    pub cx: f64,
    pub cy: f64,
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

/// Stage outputs kept alongside the final labels.
#[derive(Debug, Clone)]
pub struct Intermediates {
    /// Binary object mask from the pre-processing stage (pipeline only).
    pub binary: Option<BinaryMask>,
    /// The flooded gradient relief (absent when flooding raw intensities).
    pub gradient: Option<GrayImage>,
    /// Object-interior markers (pipeline only).
    pub fg_markers: Option<BinaryMask>,
    /// Background ridge markers (pipeline only).
    pub bg_markers: Option<BinaryMask>,
    /// Pixels left unlabeled by the flood.
    pub watershed_lines: BinaryMask,
}

/// Result of a segmentation run.
#[derive(Debug, Clone)]
pub struct SegmentationReport {
    pub labels: LabelMap,
    pub n_regions: u32,
    /// Count of label-0 pixels (the ridge lines).
    pub watershed_pixels: usize,
    pub region_stats: Vec<RegionStats>,
    /// Wall-clock time of the segmentation call, in milliseconds.
    pub elapsed_ms: f64,
    pub intermediates: Option<Intermediates>,
}

/// Region-count ratio and boundary agreement against a reference labeling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OversegMetrics {
    /// `n_regions / n_truth_regions`; 1.0 is ideal, large values mean
    /// over-segmentation.
    pub ratio: f64,
    /// F1 of label-0 pixels against the reference's label-0 pixels with a
    /// 2-px match tolerance.
    pub boundary_f1: f64,
}

fn validate_config(cfg: &PipelineConfig) -> Result<()> {
    if !(cfg.threshold.is_finite() && (0.0..=255.0).contains(&cfg.threshold)) {
        return Err(Error::Range(format!(
            "threshold must be in [0, 255], got {}",
            cfg.threshold
        )));
    }
    if let Some(r) = cfg.fg_se_radius {
        if r == 0 {
            return Err(Error::Range("fg_se_radius must be >= 1".into()));
        }
    }
    if let TaperBlock::Size(n) = cfg.hann_block {
        if n < 2 {
            return Err(Error::Range(format!(
                "taper block size must be >= 2, got {n}"
            )));
        }
    }
    Ok(())
}

/// The marker-stage smoothing radius for an image of the given size.
pub fn resolve_fg_se_radius(cfg: &PipelineConfig, width: u32, height: u32) -> u32 {
    cfg.fg_se_radius.unwrap_or_else(|| {
        let short = width.min(height) as f64;
        ((5.0 * short / 900.0).round() as u32).max(1)
    })
}

/// Multiplies the image pointwise by the raised-cosine taper in the
/// requested block layout. Edge tiles use a window of their own (smaller)
/// size; a leftover strip thinner than 2 px cannot carry a window and is
/// zeroed, matching the zero borders of every tile.
pub fn taper_image(img: &GrayImage, block: TaperBlock) -> Result<GrayImage> {
    let (w, h) = (img.width(), img.height());
    match block {
        TaperBlock::Full => {
            let win = hann2d(w, h)?;
            let data = img
                .data()
                .iter()
                .zip(win.data().iter())
                .map(|(a, b)| a * b)
                .collect();
            GrayImage::from_vec(w, h, data)
        }
        TaperBlock::Size(n) => {
            let mut out = vec![0.0f64; img.data().len()];
            let mut ty = 0u32;
            while ty < h {
                let bh = n.min(h - ty);
                let mut tx = 0u32;
                while tx < w {
                    let bw = n.min(w - tx);
                    if bw >= 2 && bh >= 2 {
                        let win = hann2d(bw, bh)?;
                        for dy in 0..bh {
                            for dx in 0..bw {
                                let i = img.idx(tx + dx, ty + dy);
                                out[i] = img.data()[i] * win.get(dx, dy);
                            }
                        }
                    }
                    tx += bw;
                }
                ty += bh;
            }
            GrayImage::from_vec(w, h, out)
        }
    }
}

/// Stage 1: binary object extraction.
///
/// Thresholds the image (keeping the low side by default), fills enclosed
/// holes, and refines the result with the two-phase active contour. When
/// the threshold keeps every pixel the contour cannot start from the
/// all-true mask, so the init falls back to a mean split of the image; a
/// constant image has no split at all and the all-true mask is returned
/// unrefined. A threshold that keeps nothing is an error.
pub fn preprocess_binary(img: &GrayImage, cfg: &PipelineConfig) -> Result<BinaryMask> {
    validate_config(cfg)?;
    let keep = |v: f64| {
        if cfg.threshold_keep_low {
            v <= cfg.threshold
        } else {
            v >= cfg.threshold
        }
    };
    let mask0 = BinaryMask::from_vec(
        img.width(),
        img.height(),
        img.data().iter().map(|&v| keep(v)).collect(),
    )?;
    let mask1 = fill_holes(&mask0, cfg.conn);
    let n = img.data().len();
    let kept = mask1.count_true();
    if kept == 0 {
        return Err(Error::DegenerateInit);
    }
    if kept < n {
        return chan_vese(img, &mask1, &cfg.chan_vese);
    }
    // Everything survived the threshold: split on the mean instead.
    let mean = img.data().iter().sum::<f64>() / n as f64;
    let split: Vec<bool> = img
        .data()
        .iter()
        .map(|&v| match cfg.objects {
            ObjectPolarity::Dark => v <= mean,
            ObjectPolarity::Bright => v >= mean,
        })
        .collect();
    let split_true = split.iter().filter(|&&b| b).count();
    if split_true == 0 || split_true == n {
        // Constant image: nothing to contour, keep the full mask.
        return Ok(mask1);
    }
    let init = BinaryMask::from_vec(img.width(), img.height(), split)?;
    chan_vese(img, &init, &cfg.chan_vese)
}

/// Stage 2a: object-interior markers.
///
/// Smooths the image with opening then closing by reconstruction (disk of
/// the configured radius), takes regional minima (maxima for bright
/// objects, via complement), and erodes the marker mask by a 1-px disk to
/// pull markers off object edges. Any marker component the erosion would
/// erase entirely is restored as its first pixel in raster order, so no
/// object loses its marker.
pub fn foreground_markers(img: &GrayImage, cfg: &PipelineConfig) -> Result<BinaryMask> {
    validate_config(cfg)?;
    let radius = resolve_fg_se_radius(cfg, img.width(), img.height());
    let se = StructuringElement::disk(radius);
    let work = match cfg.objects {
        ObjectPolarity::Dark => img.clone(),
        ObjectPolarity::Bright => img.map(|v| 255.0 - v),
    };
    let smoothed = close_by_reconstruction(
        &open_by_reconstruction(&work, &se, cfg.conn)?,
        &se,
        cfg.conn,
    )?;
    let minima = regional_minima(&smoothed, cfg.conn);
    let eroded = erode_mask(&minima, &StructuringElement::disk(1));

    // Restore components the erosion wiped out.
    let (comp_labels, n_comps) = label_components(&minima, cfg.conn);
    let mut survived = vec![false; n_comps as usize + 1];
    let mut first_pixel = vec![usize::MAX; n_comps as usize + 1];
    for (i, (&lbl, &kept)) in comp_labels.data().iter().zip(eroded.data().iter()).enumerate() {
        if lbl != 0 {
            if kept {
                survived[lbl as usize] = true;
            }
            if first_pixel[lbl as usize] == usize::MAX {
                first_pixel[lbl as usize] = i;
            }
        }
    }
    let mut out = eroded.data().to_vec();
    for comp in 1..=n_comps as usize {
        if !survived[comp] {
            out[first_pixel[comp]] = true;
        }
    }
    BinaryMask::from_vec(img.width(), img.height(), out)
}

/// Stage 2b: background ridge markers — the skeleton by influence zones of
/// the binary object mask. The ridges run maximally far from every object,
/// so they mark background without ever touching an object pixel.
pub fn background_markers(binary: &BinaryMask, cfg: &PipelineConfig) -> Result<BinaryMask> {
    validate_config(cfg)?;
    if binary.count_true() == 0 {
        return Err(Error::EmptyMask);
    }
    let (_, ridges) = skiz(binary, cfg.conn)?;
    Ok(ridges)
}

/// Runs the full marker-controlled pipeline.
///
/// Output labels number the object (foreground-marker) regions before the
/// background regions, each group in raster order, so region identities are
/// stable across runs. The report carries all intermediates.
pub fn run_modified(img: &GrayImage, cfg: &PipelineConfig) -> Result<SegmentationReport> {
    validate_config(cfg)?;
    let start = Instant::now();
    let input = if cfg.hann_taper {
        taper_image(img, cfg.hann_block)?
    } else {
        img.clone()
    };
    let binary = preprocess_binary(&input, cfg)?;
    let fg = foreground_markers(&input, cfg)?;
    let bg = background_markers(&binary, cfg)?;
    let markers = fg.union(&bg)?;
    let surface = match cfg.flood_on {
        FloodSource::Gradient => gradient_magnitude(&input),
        FloodSource::Raw => input.clone(),
    };
    let flood = marker_watershed(&surface, &markers, cfg.conn)?;
    let (labels, n_regions) = relabel_foreground_first(&flood.labels, &fg, &bg, cfg.conn)?;
    let (region_stats, watershed_pixels) = compute_region_stats(&labels);
    let watershed_lines = labels.zero_mask();
    Ok(SegmentationReport {
        labels,
        n_regions,
        watershed_pixels,
        region_stats,
        elapsed_ms: start.elapsed().as_secs_f64() * 1000.0,
        intermediates: Some(Intermediates {
            binary: Some(binary),
            gradient: match cfg.flood_on {
                FloodSource::Gradient => Some(surface),
                FloodSource::Raw => None,
            },
            fg_markers: Some(fg),
            bg_markers: Some(bg),
            watershed_lines,
        }),
    })
}

/// Runs the unmarked watershed over the same relief: no taper, no binary
/// stage, no markers — every regional minimum of the relief floods.
pub fn run_baseline(img: &GrayImage, cfg: &PipelineConfig) -> Result<SegmentationReport> {
    validate_config(cfg)?;
    let start = Instant::now();
    let surface = match cfg.flood_on {
        FloodSource::Gradient => gradient_magnitude(img),
        FloodSource::Raw => img.clone(),
    };
    let flood = watershed_vs(&surface, cfg.conn)?;
    let (region_stats, watershed_pixels) = compute_region_stats(&flood.labels);
    let watershed_lines = flood.labels.zero_mask();
    Ok(SegmentationReport {
        n_regions: flood.n_basins,
        watershed_pixels,
        region_stats,
        elapsed_ms: start.elapsed().as_secs_f64() * 1000.0,
        intermediates: Some(Intermediates {
            binary: None,
            gradient: match cfg.flood_on {
                FloodSource::Gradient => Some(surface),
                FloodSource::Raw => None,
            },
            fg_markers: None,
            bg_markers: None,
            watershed_lines,
        }),
        labels: flood.labels,
    })
}

/// Region-count ratio and boundary F1 of a report against a reference
/// labeling of the same size.
pub fn overseg_ratio(report: &SegmentationReport, truth: &LabelMap) -> Result<OversegMetrics> {
    if report.labels.width() != truth.width() || report.labels.height() != truth.height() {
        return Err(Error::DimensionMismatch(format!(
            "report is {}x{} but truth is {}x{}",
            report.labels.width(),
            report.labels.height(),
            truth.width(),
            truth.height()
        )));
    }
    if truth.n_labels() == 0 {
        return Err(Error::Range("reference labeling has no regions".into()));
    }
    let ratio = report.n_regions as f64 / truth.n_labels() as f64;
    let boundary_f1 = zero_set_f1(&report.labels, truth)?;
    Ok(OversegMetrics { ratio, boundary_f1 })
}

/// F1 of the two label maps' zero sets under a 2-px bidirectional match
/// tolerance. Two empty zero sets agree perfectly; one empty set against a
/// non-empty one scores zero.
fn zero_set_f1(pred: &LabelMap, truth: &LabelMap) -> Result<f64> {
    let pz = pred.zero_mask();
    let tz = truth.zero_mask();
    let np = pz.count_true();
    let nt = tz.count_true();
    if np == 0 && nt == 0 {
        return Ok(1.0);
    }
    if np == 0 || nt == 0 {
        return Ok(0.0);
    }
    const TOL: f64 = 2.0 + 1e-9;
    let d_truth = distance_transform(&tz)?;
    let d_pred = distance_transform(&pz)?;
    let hits_p = pz
        .data()
        .iter()
        .zip(d_truth.data().iter())
        .filter(|(&p, &d)| p && d <= TOL)
        .count();
    let hits_t = tz
        .data()
        .iter()
        .zip(d_pred.data().iter())
        .filter(|(&t, &d)| t && d <= TOL)
        .count();
    let precision = hits_p as f64 / np as f64;
    let recall = hits_t as f64 / nt as f64;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

/// Renumbers flood basins so foreground-marker regions come first (in
/// raster order of their marker components), then background regions.
/// Watershed pixels stay 0.
fn relabel_foreground_first(
    labels: &LabelMap,
    fg: &BinaryMask,
    bg: &BinaryMask,
    conn: Connectivity,
) -> Result<(LabelMap, u32)> {
    let mut old_max = 0u32;
    for &l in labels.data() {
        old_max = old_max.max(l);
    }
    let mut map = vec![0u32; old_max as usize + 1];
    let mut next = 0u32;
    for mask in [fg, bg] {
        let (comps, n_comps) = label_components(mask, conn);
        let mut seen_first = vec![false; n_comps as usize + 1];
        for (i, &c) in comps.data().iter().enumerate() {
            if c != 0 && !seen_first[c as usize] {
                seen_first[c as usize] = true;
                let basin = labels.data()[i];
                debug_assert_ne!(basin, 0, "marker pixels always flood");
                if basin != 0 && map[basin as usize] == 0 {
                    next += 1;
                    map[basin as usize] = next;
                }
            }
        }
    }
    debug_assert!(
        labels.data().iter().all(|&l| l == 0 || map[l as usize] != 0),
        "every basin grows from a marker component"
    );
    let data: Vec<u32> = labels.data().iter().map(|&l| map[l as usize]).collect();
    Ok((LabelMap::from_vec(labels.width(), labels.height(), data)?, next))
}

fn compute_region_stats(labels: &LabelMap) -> (Vec<RegionStats>, usize) {
    let n = labels.n_labels() as usize;
    let mut area = vec![0u64; n + 1];
    let mut sx = vec![0.0f64; n + 1];
    let mut sy = vec![0.0f64; n + 1];
    let mut x0 = vec![u32::MAX; n + 1];
    let mut y0 = vec![u32::MAX; n + 1];
    let mut x1 = vec![0u32; n + 1];
    let mut y1 = vec![0u32; n + 1];
    let mut zeros = 0usize;
    for y in 0..labels.height() {
        for x in 0..labels.width() {
            let l = labels.get(x, y) as usize;
            if l == 0 {
                zeros += 1;
                continue;
            }
            area[l] += 1;
            sx[l] += x as f64;
            sy[l] += y as f64;
            x0[l] = x0[l].min(x);
            y0[l] = y0[l].min(y);
            x1[l] = x1[l].max(x);
            y1[l] = y1[l].max(y);
        }
    }
    let stats = (1..=n)
        .map(|l| RegionStats {
            label: l as u32,
            area_px: area[l],
            cx: sx[l] / area[l] as f64,
            cy: sy[l] / area[l] as f64,
            x0: x0[l],
            y0: y0[l],
            x1: x1[l],
            y1: y1[l],
        })
        .collect();
    (stats, zeros)
}
