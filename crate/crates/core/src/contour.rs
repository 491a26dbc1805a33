//! Two-phase region-based active contour (piecewise-constant model).
//!
//! Evolves a level-set function `phi` so that its positive region settles on
//! the part of the image best described by one constant intensity, with the
//! complement described by another. The driving forces are the squared
//! deviations from the two region means plus a length penalty on the
//! interface; the scheme is explicit gradient descent with a regularized
//! Dirac window (`eps = 1`) and curvature from central differences.
//!
//! Implementation notes that matter for reproducibility:
//!
//! * `phi` is initialized to the signed distance of the init mask, measured
//!   to the half-pixel midline between inside and outside samples, so
//!   interface pixels start at `|phi| = 0.5` rather than `1.0`.
//! * The region means `c1`/`c2` are plain means over the current sign
//!   partition (not smoothed-Heaviside weighted), so a converged mask
//!   reports the exact region means.
//! * `phi` is re-anchored to a signed distance every `reinit_every`
//!   iterations, but only when the sign partition has changed since the
//!   last anchoring — otherwise sub-pixel interface motion accumulated
//!   across iterations would be erased and a slowly starting contour could
//!   never move at all.
//! * Convergence requires both that fewer than `tol * n_pixels` pixels
//!   changed sign in the latest update and that fewer than `tol * n_pixels`
//!   are still moving toward a sign change (`phi * dphi < 0`). The second
//!   clause keeps a slow front alive while letting a genuinely stationary
//!   contour stop on its first update.

use crate::error::{Error, Result};
use crate::grid::{BinaryMask, GrayImage};
use crate::morph::distance_transform;

/// Tuning knobs for [`chan_vese`].
#[derive(Debug, Clone)]
pub struct ChanVeseParams {
    /// Length-penalty weight (non-negative).
    pub mu: f64,
    /// Fidelity weight for the positive (inside) region.
    pub lambda1: f64,
    /// Fidelity weight for the negative (outside) region.
    pub lambda2: f64,
    /// Explicit time step.
    pub dt: f64,
    /// Hard iteration cap.
    pub max_iters: usize,
    /// Convergence threshold on the changed / still-moving pixel fraction.
    pub tol: f64,
    /// Re-anchor `phi` to a signed distance every this many iterations.
    pub reinit_every: usize,
}

impl Default for ChanVeseParams {
    fn default() -> Self {
        Self {
            mu: 0.25,
            lambda1: 1.0,
            lambda2: 1.0,
            dt: 0.5,
            max_iters: 200,
            tol: 1e-3,
            reinit_every: 20,
        }
    }
}

/// Diagnostics from a contour run.
///
/// `c1`/`c2` are the final region means expressed in the *input* intensity
/// scale (the evolution itself runs on a min-max normalized copy).
/// `energies` holds the segmentation energy of the mask after every update,
/// with `energies[0]` the energy of the init mask, so its length is
/// `iterations + 1`. Energies are evaluated on the normalized image.
#[derive(Debug, Clone)]
pub struct ChanVeseTrace {
    pub c1: f64,
    pub c2: f64,
    pub iterations: usize,
    pub energies: Vec<f64>,
}

/// Segments `img` into a two-phase partition seeded by `init`.
///
/// Returns the final positive region. See [`chan_vese_with_trace`] for the
/// variant that also reports region means, iteration count, and the energy
/// trajectory.
///
/// # Errors
///
/// [`Error::DimensionMismatch`] if `img` and `init` disagree on size,
/// [`Error::DegenerateInit`] if `init` is all-true or all-false,
/// [`Error::NonFiniteImage`] if the image holds a NaN or infinity, and
/// [`Error::Range`] for out-of-range parameters.
pub fn chan_vese(img: &GrayImage, init: &BinaryMask, params: &ChanVeseParams) -> Result<BinaryMask> {
    chan_vese_with_trace(img, init, params).map(|(mask, _)| mask)
}

/// Same evolution as [`chan_vese`], additionally returning a [`ChanVeseTrace`].
pub fn chan_vese_with_trace(
    img: &GrayImage,
    init: &BinaryMask,
    params: &ChanVeseParams,
) -> Result<(BinaryMask, ChanVeseTrace)> {
    validate_params(params)?;
    if img.width() != init.width() || img.height() != init.height() {
        return Err(Error::DimensionMismatch(format!(
            "image is {}x{} but init mask is {}x{}",
            img.width(),
            img.height(),
            init.width(),
            init.height()
        )));
    }
    let n = img.data().len();
    let n_true = init.count_true();
    if n_true == 0 || n_true == n {
        return Err(Error::DegenerateInit);
    }
    if let Some(i) = img.data().iter().position(|v| !v.is_finite()) {
        let x = (i % img.width() as usize) as u32;
        let y = (i / img.width() as usize) as u32;
        return Err(Error::NonFiniteImage { x, y });
    }

    let width = img.width() as usize;
    let height = img.height() as usize;
    let (lo, hi) = img.min_max();
    let range = hi - lo;
    // A constant image normalizes to all zeros; the means then coincide and
    // only the length penalty moves the contour.
    let u: Vec<f64> = if range > 0.0 {
        img.data().iter().map(|v| (v - lo) / range).collect()
    } else {
        vec![0.0; n]
    };

    let mut phi = signed_distance(init)?;
    let mut phi_next = vec![0.0f64; n];
    let mut mask_at_anchor: Vec<bool> = init.data().to_vec();

    let mut energies = Vec::with_capacity(params.max_iters + 1);
    let (c1_0, c2_0) = region_means(&u, &phi);
    energies.push(mask_energy(&u, &phi, width, height, params, c1_0, c2_0));

    let stop_count = params.tol * n as f64;
    let mut iterations = 0usize;

    for it in 1..=params.max_iters {
        let (c1, c2) = region_means(&u, &phi);
        let mut changed = 0usize;
        let mut moving_toward = 0usize;

        for y in 0..height {
            for x in 0..width {
                let i = y * width + x;
                let at = |xx: isize, yy: isize| -> f64 {
                    let cx = xx.clamp(0, width as isize - 1) as usize;
                    let cy = yy.clamp(0, height as isize - 1) as usize;
                    phi[cy * width + cx]
                };
                let (xi, yi) = (x as isize, y as isize);
                let c = phi[i];
                let px = (at(xi + 1, yi) - at(xi - 1, yi)) / 2.0;
                let py = (at(xi, yi + 1) - at(xi, yi - 1)) / 2.0;
                let pxx = at(xi + 1, yi) - 2.0 * c + at(xi - 1, yi);
                let pyy = at(xi, yi + 1) - 2.0 * c + at(xi, yi - 1);
                let pxy = (at(xi + 1, yi + 1) - at(xi + 1, yi - 1) - at(xi - 1, yi + 1)
                    + at(xi - 1, yi - 1))
                    / 4.0;
                let grad_sq = px * px + py * py;
                let kappa =
                    (pxx * py * py - 2.0 * px * py * pxy + pyy * px * px) / (grad_sq.powf(1.5) + 1e-8);
                let dirac = 1.0 / (std::f64::consts::PI * (1.0 + c * c));
                let uv = u[i];
                let force = params.mu * kappa - params.lambda1 * (uv - c1) * (uv - c1)
                    + params.lambda2 * (uv - c2) * (uv - c2);
                let dphi = params.dt * dirac * force;
                let next = c + dphi;
                phi_next[i] = next;
                if (next > 0.0) != (c > 0.0) {
                    changed += 1;
                } else if next * dphi < 0.0 {
                    moving_toward += 1;
                }
            }
        }

        std::mem::swap(&mut phi, &mut phi_next);
        iterations = it;
        let (ec1, ec2) = region_means(&u, &phi);
        energies.push(mask_energy(&u, &phi, width, height, params, ec1, ec2));

        if (changed as f64) < stop_count && (moving_toward as f64) < stop_count {
            break;
        }

        if it % params.reinit_every == 0 {
            let mask_now: Vec<bool> = phi.iter().map(|&v| v > 0.0).collect();
            let k = mask_now.iter().filter(|&&b| b).count();
            if mask_now != mask_at_anchor && k > 0 && k < n {
                let m = BinaryMask::from_vec(img.width(), img.height(), mask_now.clone())?;
                phi = signed_distance(&m)?;
                mask_at_anchor = mask_now;
            }
        }
    }

    let out: Vec<bool> = phi.iter().map(|&v| v > 0.0).collect();
    let (c1n, c2n) = region_means(&u, &phi);
    let (c1, c2) = if range > 0.0 {
        (c1n * range + lo, c2n * range + lo)
    } else {
        (lo, lo)
    };
    let mask = BinaryMask::from_vec(img.width(), img.height(), out)?;
    let trace = ChanVeseTrace {
        c1,
        c2,
        iterations,
        energies,
    };
    Ok((mask, trace))
}

fn validate_params(p: &ChanVeseParams) -> Result<()> {
    if !(p.mu >= 0.0 && p.mu.is_finite()) {
        return Err(Error::Range(format!("mu must be finite and >= 0, got {}", p.mu)));
    }
    if !(p.lambda1 > 0.0 && p.lambda1.is_finite()) || !(p.lambda2 > 0.0 && p.lambda2.is_finite()) {
        return Err(Error::Range(format!(
            "lambda1/lambda2 must be finite and > 0, got {} / {}",
            p.lambda1, p.lambda2
        )));
    }
    if !(p.dt > 0.0 && p.dt.is_finite()) {
        return Err(Error::Range(format!("dt must be finite and > 0, got {}", p.dt)));
    }
    if p.max_iters == 0 {
        return Err(Error::Range("max_iters must be >= 1".into()));
    }
    if !(p.tol > 0.0 && p.tol.is_finite()) {
        return Err(Error::Range(format!("tol must be finite and > 0, got {}", p.tol)));
    }
    if p.reinit_every == 0 {
        return Err(Error::Range("reinit_every must be >= 1".into()));
    }
    Ok(())
}

/// Signed distance to the interface between `mask` and its complement,
/// positive inside. The interface is taken to run halfway between adjacent
/// inside/outside pixel centers, so the nearest samples sit at `±0.5`.
fn signed_distance(mask: &BinaryMask) -> Result<Vec<f64>> {
    let inv_data: Vec<bool> = mask.data().iter().map(|&b| !b).collect();
    let inv = BinaryMask::from_vec(mask.width(), mask.height(), inv_data)?;
    let d_to_true = distance_transform(mask)?;
    let d_to_false = distance_transform(&inv)?;
    Ok(mask
        .data()
        .iter()
        .zip(d_to_true.data().iter().zip(d_to_false.data().iter()))
        .map(|(&inside, (&dt, &df))| if inside { df - 0.5 } else { -(dt - 0.5) })
        .collect())
}

fn region_means(u: &[f64], phi: &[f64]) -> (f64, f64) {
    let (mut s1, mut n1, mut s2, mut n2) = (0.0f64, 0usize, 0.0f64, 0usize);
    for (uv, pv) in u.iter().zip(phi.iter()) {
        if *pv > 0.0 {
            s1 += uv;
            n1 += 1;
        } else {
            s2 += uv;
            n2 += 1;
        }
    }
    (
        if n1 > 0 { s1 / n1 as f64 } else { 0.0 },
        if n2 > 0 { s2 / n2 as f64 } else { 0.0 },
    )
}

/// Two-phase piecewise-constant energy of the sign partition of `phi`:
/// length penalty (counted as 4-adjacent sign-differing pixel pairs) plus
/// the two fidelity sums against the supplied region means.
fn mask_energy(
    u: &[f64],
    phi: &[f64],
    width: usize,
    height: usize,
    params: &ChanVeseParams,
    c1: f64,
    c2: f64,
) -> f64 {
    let mut perim = 0usize;
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            let here = phi[i] > 0.0;
            if x + 1 < width && (phi[i + 1] > 0.0) != here {
                perim += 1;
            }
            if y + 1 < height && (phi[i + width] > 0.0) != here {
                perim += 1;
            }
        }
    }
    let mut fid = 0.0f64;
    for (uv, pv) in u.iter().zip(phi.iter()) {
        if *pv > 0.0 {
            fid += params.lambda1 * (uv - c1) * (uv - c1);
        } else {
            fid += params.lambda2 * (uv - c2) * (uv - c2);
        }
    }
    params.mu * perim as f64 + fid
}
