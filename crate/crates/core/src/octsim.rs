//! Spectral-domain scan simulation and reconstruction, plus a synthetic
//! 2D phantom generator with ground truth.
//!
//! One depth profile is recovered from a spectrally sampled interference
//! signal by windowing (optional) and a discrete Fourier transform; only the
//! first half of the spectrum carries unique depth information for a real
//! signal, so profiles hold `floor(N/2)` bins with DC at index 0.
//!
//! The phantom generator lays out randomly placed elliptical seed regions,
//! partitions the canvas into their influence zones, and renders the zone
//! boundaries as bright walls around dark compartments — a controllable
//! stand-in for layered biological imagery with a known segmentation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{label_components, BinaryMask, Connectivity, GrayImage, LabelMap};
use crate::morph::skiz;

/// Raised-cosine taper of length `n`: `w(i) = (1 - cos(2*pi*i/(n-1))) / 2`.
///
/// Endpoints are exactly zero and the profile is symmetric. Needs `n >= 2`
/// because of the `n - 1` divisor.
pub fn hann1d(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let denom = (n - 1) as f64;
    Ok((0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / denom).cos()))
        .collect())
}

/// Separable 2D raised-cosine taper: `W(i,j) = hann1d(p)[i] * hann1d(q)[j]`
/// where `i` runs along the width and `j` along the height.
///
/// All border weights are exactly zero; the center of an odd-sized window
/// is exactly one.
pub fn hann2d(p: u32, q: u32) -> Result<GrayImage> {
    if p < 2 {
        return Err(Error::DimensionTooSmall(p as usize));
    }
    if q < 2 {
        return Err(Error::DimensionTooSmall(q as usize));
    }
    let wx = hann1d(p as usize)?;
    let wy = hann1d(q as usize)?;
    let mut data = Vec::with_capacity((p * q) as usize);
    for row in wy.iter() {
        for col in wx.iter() {
            data.push(row * col);
        }
    }
    GrayImage::from_vec(p, q, data)
}

/// One spectrally resolved acquisition: detector intensity at `N` evenly
/// spaced wavenumbers. Always at least 2 samples, all finite.
#[derive(Debug, Clone)]
pub struct SpectralScan {
    samples: Vec<f64>,
}

impl SpectralScan {
    /// Wraps raw samples, enforcing the length and finiteness invariants.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::DimensionTooSmall(samples.len()));
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Depth-resolved reflectivity magnitudes; bin 0 is the DC term.
#[derive(Debug, Clone)]
pub struct DepthProfile {
    magnitudes: Vec<f64>,
}

impl DepthProfile {
    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    /// Index of the strongest non-DC bin (ties resolved to the lowest bin),
    /// or `None` when the profile has no bins past DC.
    pub fn peak_bin(&self) -> Option<usize> {
        if self.magnitudes.len() < 2 {
            return None;
        }
        let mut best = 1usize;
        for (i, m) in self.magnitudes.iter().enumerate().skip(2) {
            if *m > self.magnitudes[best] {
                best = i;
            }
        }
        Some(best)
    }
}

/// Taper applied to a scan before the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowKind {
    #[default]
    None,
    Hann,
}

/// Turns a spectral scan into a depth profile: optional taper, then the
/// discrete Fourier transform, keeping the magnitudes of the first
/// `floor(N/2)` bins.
pub fn reconstruct_ascan(scan: &SpectralScan, window: WindowKind) -> Result<DepthProfile> {
    let n = scan.len();
    if let Some(index) = scan.samples().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteSample { index });
    }
    let mut buffer: Vec<Complex<f64>> = match window {
        WindowKind::None => scan.samples().iter().map(|&v| Complex::new(v, 0.0)).collect(),
        WindowKind::Hann => {
            let w = hann1d(n)?;
            scan.samples()
                .iter()
                .zip(w.iter())
                .map(|(&v, &wv)| Complex::new(v * wv, 0.0))
                .collect()
        }
    };
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    fft.process(&mut buffer);
    let magnitudes = buffer.iter().take(n / 2).map(|c| c.norm()).collect();
    Ok(DepthProfile { magnitudes })
}

/// Simulates a spectral acquisition of point reflectors: each `(depth_bin,
/// amplitude)` contributes `amplitude * cos(2*pi*depth_bin*k/n)` on top of a
/// unit background, plus optional additive Gaussian noise from a seeded
/// generator.
///
/// Depth bins must be distinct and lie in `1..=n/2 - 1` so each reflector
/// maps to a unique non-DC profile bin.
pub fn synth_interferogram(
    reflectors: &[(usize, f64)],
    n: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<SpectralScan> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::Range(format!(
            "noise_sigma must be finite and >= 0, got {noise_sigma}"
        )));
    }
    let max_bin = n / 2;
    let mut seen: Vec<usize> = Vec::with_capacity(reflectors.len());
    for &(bin, amplitude) in reflectors {
        if bin == 0 || bin >= max_bin {
            return Err(Error::DepthOutOfRange {
                bin,
                reason: format!("valid depth bins for n={n} are 1..={}", max_bin.saturating_sub(1)),
            });
        }
        if seen.contains(&bin) {
            return Err(Error::DepthOutOfRange {
                bin,
                reason: "duplicate depth bin".into(),
            });
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::Range(format!(
                "reflector amplitude must be finite and > 0, got {amplitude}"
            )));
        }
        seen.push(bin);
    }

    let mut samples = vec![1.0f64; n];
    for &(bin, amplitude) in reflectors {
        let omega = 2.0 * std::f64::consts::PI * bin as f64 / n as f64;
        for (k, s) in samples.iter_mut().enumerate() {
            *s += amplitude * (omega * k as f64).cos();
        }
    }
    if noise_sigma > 0.0 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_sigma).expect("validated sigma");
        for s in samples.iter_mut() {
            *s += normal.sample(&mut rng);
        }
    }
    SpectralScan::new(samples)
}

/// A synthetic 2D test image with its exact segmentation.
///
/// `truth` labels each dark compartment `1..=n_sacs`; walls and the border
/// frame are 0. The image is the noise-free rendering with multiplicative
/// speckle applied; `truth` is always noise-free.
#[derive(Debug, Clone)]
pub struct Phantom {
    pub image: GrayImage,
    pub truth: LabelMap,
    pub n_sacs: u32,
    pub seed: u64,
}

const PHANTOM_MARGIN: u32 = 10;
const MIN_SEED_SEPARATION: f64 = 8.0;
const PLACEMENT_TRIES_PER_SEED: usize = 200;
const PLACEMENT_RESTARTS: usize = 32;
/// Border frame thickness. Must stay wider than the marker-stage smoothing
/// radius at the default scale so that an erosion leaves a seed ring at the
/// image border: reconstruction then regrows the whole bright wall network
/// from that ring instead of flattening it away.
const PHANTOM_FRAME: usize = 4;

/// Generates a deterministic phantom: `n_sacs` dark elliptical-seeded
/// compartments separated by 2-px bright walls (the thickened boundaries of
/// the seeds' influence zones) inside a 4-px bright frame.
///
/// Seeds are placed by rejection sampling at a spacing that starts generous
/// and relaxes down to a hard floor of 8 px; if even the floor cannot fit
/// all seeds the call fails with [`Error::TooManySacs`]. All randomness
/// (placement, ellipse shapes, speckle) comes from one stream seeded by
/// `seed`, so identical arguments give byte-identical phantoms.
pub fn synth_phantom(
    width: u32,
    height: u32,
    n_sacs: u32,
    wall_intensity: f64,
    sac_intensity: f64,
    speckle_sigma: f64,
    seed: u64,
) -> Result<Phantom> {
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimension);
    }
    if n_sacs == 0 {
        return Err(Error::Range("n_sacs must be >= 1".into()));
    }
    for (name, v) in [("wall_intensity", wall_intensity), ("sac_intensity", sac_intensity)] {
        if !(v.is_finite() && (0.0..=255.0).contains(&v)) {
            return Err(Error::Range(format!("{name} must be in [0, 255], got {v}")));
        }
    }
    if !(speckle_sigma >= 0.0 && speckle_sigma.is_finite()) {
        return Err(Error::Range(format!(
            "speckle_sigma must be finite and >= 0, got {speckle_sigma}"
        )));
    }

    let too_many = || Error::TooManySacs {
        requested: n_sacs,
        width,
        height,
    };
    if width <= 2 * PHANTOM_MARGIN || height <= 2 * PHANTOM_MARGIN {
        return Err(too_many());
    }
    let (x_lo, x_hi) = (PHANTOM_MARGIN, width - 1 - PHANTOM_MARGIN);
    let (y_lo, y_hi) = (PHANTOM_MARGIN, height - 1 - PHANTOM_MARGIN);

    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    // Spacing target: roomy for few sacs, relaxed geometrically on failure.
    let area_per_sac = (width as f64 * height as f64) / n_sacs as f64;
    let initial_sep = (0.35 * area_per_sac.sqrt()).max(MIN_SEED_SEPARATION);
    let mut centers: Vec<(u32, u32)> = Vec::with_capacity(n_sacs as usize);
    let mut placed = false;
    for restart in 0..PLACEMENT_RESTARTS {
        let sep = (initial_sep * 0.8f64.powi(restart as i32)).max(MIN_SEED_SEPARATION);
        let sep_sq = sep * sep;
        centers.clear();
        let mut ok = true;
        'seeds: for _ in 0..n_sacs {
            for _ in 0..PLACEMENT_TRIES_PER_SEED {
                let cx = rng.random_range(x_lo..=x_hi);
                let cy = rng.random_range(y_lo..=y_hi);
                let far_enough = centers.iter().all(|&(px, py)| {
                    let dx = px as f64 - cx as f64;
                    let dy = py as f64 - cy as f64;
                    dx * dx + dy * dy >= sep_sq
                });
                if far_enough {
                    centers.push((cx, cy));
                    continue 'seeds;
                }
            }
            ok = false;
            break;
        }
        if ok {
            placed = true;
            break;
        }
    }
    if !placed {
        return Err(too_many());
    }

    // Elliptical seed regions: semi-axes in [2, 3.5), random orientation.
    // The 8-px separation floor keeps them pairwise disjoint and non-adjacent.
    let mut seed_mask = vec![false; (width as usize) * (height as usize)];
    for &(cx, cy) in &centers {
        let a: f64 = rng.random_range(2.0..3.5);
        let b: f64 = rng.random_range(2.0..3.5);
        let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let (sin_t, cos_t) = theta.sin_cos();
        for dy in -4i64..=4 {
            for dx in -4i64..=4 {
                let x = cx as i64 + dx;
                let y = cy as i64 + dy;
                if x < 0 || y < 0 || x >= width as i64 || y >= height as i64 {
                    continue;
                }
                let rx = dx as f64 * cos_t + dy as f64 * sin_t;
                let ry = -(dx as f64) * sin_t + dy as f64 * cos_t;
                if (rx / a).powi(2) + (ry / b).powi(2) <= 1.0 {
                    seed_mask[y as usize * width as usize + x as usize] = true;
                }
            }
        }
    }
    let seeds = BinaryMask::from_vec(width, height, seed_mask)?;
    let (seed_labels, n_components) = label_components(&seeds, Connectivity::Four);
    debug_assert_eq!(n_components, n_sacs, "seed regions must stay disjoint");

    let (zones, _) = skiz(&seeds, Connectivity::Four)?;

    // Walls: the border frame, the influence-zone tie pixels, and the 1-px
    // ring of each zone facing a different zone. Zones can meet between
    // pixel columns with no tie pixel at all, so thickness must come from
    // the facing rings: every inter-zone edge gets one wall pixel on each
    // side, making the separating band at least 2 px everywhere.
    let w = width as usize;
    let h = height as usize;
    let zd = zones.data();
    let mut wall = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let z = zd[i];
            let frame = x < PHANTOM_FRAME
                || y < PHANTOM_FRAME
                || x + PHANTOM_FRAME >= w
                || y + PHANTOM_FRAME >= h;
            wall[i] = frame
                || z == 0
                || (x + 1 < w && zd[i + 1] != z)
                || (x > 0 && zd[i - 1] != z)
                || (y + 1 < h && zd[i + w] != z)
                || (y > 0 && zd[i - w] != z);
        }
    }

    // Truth: influence zones minus walls. Degenerate geometry can shear off
    // slivers of a zone, so keep only the part still connected to its seed.
    let mut truth = vec![0u32; w * h];
    for i in 0..w * h {
        if !wall[i] {
            truth[i] = zones.data()[i];
        }
    }
    for &(cx, cy) in &centers {
        let label = seed_labels.get(cx, cy);
        debug_assert!(label >= 1);
        let start = cy as usize * w + cx as usize;
        debug_assert_eq!(truth[start], label, "seed center must survive the walls");
        let mut keep = vec![false; w * h];
        let mut queue = std::collections::VecDeque::new();
        keep[start] = true;
        queue.push_back((cx, cy));
        while let Some((qx, qy)) = queue.pop_front() {
            for (nx, ny) in crate::grid::neighbors(qx, qy, width, height, Connectivity::Four) {
                let ni = ny as usize * w + nx as usize;
                if !keep[ni] && truth[ni] == label {
                    keep[ni] = true;
                    queue.push_back((nx, ny));
                }
            }
        }
        for i in 0..w * h {
            if truth[i] == label && !keep[i] {
                truth[i] = 0;
            }
        }
    }
    // Relabel by raster order of first appearance so labels stay contiguous.
    let mut remap = vec![0u32; n_sacs as usize + 1];
    let mut next = 0u32;
    for t in truth.iter_mut() {
        if *t != 0 {
            if remap[*t as usize] == 0 {
                next += 1;
                remap[*t as usize] = next;
            }
            *t = remap[*t as usize];
        }
    }
    debug_assert_eq!(next, n_sacs);
    let truth = LabelMap::from_vec(width, height, truth)?;

    let mut pixels = vec![0.0f64; w * h];
    for i in 0..w * h {
        pixels[i] = if wall[i] { wall_intensity } else { sac_intensity };
    }
    if speckle_sigma > 0.0 {
        let normal = Normal::new(0.0, speckle_sigma).expect("validated sigma");
        for p in pixels.iter_mut() {
            *p = (*p * (1.0 + normal.sample(&mut rng))).clamp(0.0, 255.0);
        }
    }
    let image = GrayImage::from_vec(width, height, pixels)?;

    Ok(Phantom {
        image,
        truth,
        n_sacs,
        seed,
    })
}
