//! One-parameter family of corner maps between the half-guide domain
//! `0 <= Re z <= pi, Im z >= 0` and the strip coordinate `xi = u + iv`:
//!
//! `xi = F(z) = \int_0^z (tan(phi/2))^q dphi`.
//!
//! The integrand has positive real part on the full strip `0 < Re z < pi`,
//! so the principal branch is analytic there and any straight segment inside
//! the (convex) domain is a valid integration path. The two corners sit at
//! `z = 0` (image `xi = 0`, Jacobian blows up) and `z = pi` (image
//! `xi = pi sec(pi q/2)`, Jacobian vanishes).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::adaptive_gl;

/// Corner exclusion radius in z units; inside it the exact Jacobian and the
/// Newton inversion refuse to evaluate and callers splice in the asymptotic
/// forms.
pub const CORNER_EXCLUSION: f64 = 1e-6;

/// Quadrature relative tolerance for map evaluations.
const MAP_TOL: f64 = 1e-11;

/// Newton inversion target: |F(z) - xi| below this is converged.
const INVERSE_TOL: f64 = 1e-10;

/// Strip-side constants of the map for a given bend fraction.
#[derive(Debug, Clone, Copy)]
pub struct StripGeometry {
    pub q: f64,
    /// `sec(pi q / 2)`; the mode basis is `sin(n u / d)`.
    pub d: f64,
    /// Full transverse extent of `u`: `pi d`.
    pub width: f64,
}

impl StripGeometry {
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::Domain(format!("q must lie in [0,1), got {q}")));
        }
        let d = 1.0 / (PI * q / 2.0).cos();
        Ok(StripGeometry { q, d, width: PI * d })
    }

    /// Transverse mode constant `epsilon_n = -n^2 / d^2`.
    pub fn epsilon(&self, n: usize) -> f64 {
        let nd = n as f64 / self.d;
        -nd * nd
    }
}

/// A matched pair of coordinates with the Jacobian at the point.
#[derive(Debug, Clone, Copy)]
pub struct MapSample {
    pub z: Complex64,
    pub xi: Complex64,
    pub jacobian: f64,
}

/// Iso-line grid of samples, ordered by (u-line index, then v ascending).
#[derive(Debug, Clone)]
pub struct MapGrid {
    pub q: f64,
    pub samples: Vec<MapSample>,
}

fn ctan_pow(z: Complex64, q: f64) -> Complex64 {
    // tan(z/2) has a pole at z = pi; evaluate through the reflection
    // cot((pi-z)/2) there so no cancellation happens near the pole.
    if z.re > std::f64::consts::FRAC_PI_2 {
        ((Complex64::new(PI, 0.0) - z) * 0.5).tan().powf(-q)
    } else {
        (z * 0.5).tan().powf(q)
    }
}

/// Map derivative `F'(z) = (tan(z/2))^q`.
pub fn map_derivative(q: f64, z: Complex64) -> Complex64 {
    ctan_pow(z, q)
}

/// Integral of the map integrand from 0 to `z` with the power-law
/// substitution `s = tau^{1/(1+q)}` that removes the derivative singularity
/// of the integrand at the origin.
fn integral_from_origin(q: f64, z: Complex64) -> Complex64 {
    let kappa = 1.0 / (1.0 + q);
    let limit = (z * 0.5).powf(q);
    let f = |tau: f64| -> Complex64 {
        if tau <= 0.0 {
            return limit;
        }
        let s = tau.powf(kappa);
        ctan_pow(z * s, q) * tau.powf(kappa - 1.0)
    };
    z * kappa * adaptive_gl(&f, 0.0, 1.0, MAP_TOL)
}

/// Integral along the real axis from `a` to `pi` with the substitution
/// `w = (pi - phi)^{1-q}` that removes the pole-end power of the integrand.
fn integral_to_outer_corner(q: f64, a: f64) -> f64 {
    let p = 1.0 / (1.0 - q);
    let w_hi = (PI - a).powf(1.0 - q);
    let f = |w: f64| -> Complex64 {
        let s = w.powf(p);
        if s < 1e-300 {
            // Analytic limit of the substituted integrand at the corner.
            return Complex64::new(2f64.powf(q) * p, 0.0);
        }
        // tan((pi-s)/2) = cot(s/2), evaluated without the cancelling
        // subtraction from pi.
        let cot = 1.0 / (s * 0.5).tan();
        Complex64::new(cot.powf(q) * p * w.powf(p - 1.0), 0.0)
    };
    adaptive_gl(&f, 0.0, w_hi, MAP_TOL).re
}

fn in_closed_half_guide(z: Complex64) -> bool {
    (-1e-12..=PI + 1e-12).contains(&z.re) && z.im >= -1e-12
}

/// Forward map `F(z)` for `z` in the closed half-guide domain.
pub fn forward_map(q: f64, z: Complex64) -> Result<Complex64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Domain(format!("q must lie in [0,1), got {q}")));
    }
    if !in_closed_half_guide(z) {
        return Err(Error::Domain(format!(
            "z = {z} lies outside the half-guide domain 0 <= Re z <= pi, Im z >= 0"
        )));
    }
    Ok(forward_map_unchecked(q, z))
}

/// Forward map without the domain check; valid on the full strip
/// `0 <= Re z <= pi`, any imaginary part.
pub(crate) fn forward_map_unchecked(q: f64, z: Complex64) -> Complex64 {
    if q == 0.0 {
        return z;
    }
    if z.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    // Real-axis points close to the pole-end get the dedicated substitution;
    // elsewhere the straight segment from the origin is enough.
    if z.im.abs() < 1e-14 && z.re > 2.0 {
        let split = 1.5;
        let head = integral_from_origin(q, Complex64::new(split, 0.0));
        let tail = integral_to_outer_corner(q, split) - integral_to_outer_corner(q, z.re.min(PI));
        return head + Complex64::new(tail, 0.0);
    }
    integral_from_origin(q, z)
}

/// Short-segment increment `F(z1) - F(z0)` for interior points, used by the
/// Newton inversion to avoid re-integrating from the origin.
fn forward_increment(q: f64, z0: Complex64, z1: Complex64) -> Complex64 {
    let delta = z1 - z0;
    let f = |t: f64| ctan_pow(z0 + delta * t, q);
    delta * adaptive_gl(&f, 0.0, 1.0, MAP_TOL)
}

/// Seed for the inversion near the inner corner, from the leading power of
/// the map: `z ~ (2^q (1+q) xi)^{1/(1+q)}`.
pub(crate) fn inner_corner_seed(q: f64, xi: Complex64) -> Complex64 {
    (2f64.powf(q) * (1.0 + q) * xi).powf(1.0 / (1.0 + q))
}

/// Invert the map by Newton iteration with continuation from `seed`.
/// Converges to `|F(z) - xi| < 1e-10`; signals corner proximity within the
/// exclusion radius of either corner, where `F'` degenerates.
pub fn inverse_map(q: f64, xi: Complex64, seed: Complex64) -> Result<Complex64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Domain(format!("q must lie in [0,1), got {q}")));
    }
    if q == 0.0 {
        return Ok(xi);
    }
    let strip = StripGeometry::new(q)?;
    // The two corner images are exact fixed points of the map.
    if xi.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if (xi - Complex64::new(strip.width, 0.0)).norm() < 1e-13 * strip.width {
        return Ok(Complex64::new(PI, 0.0));
    }

    let mut z = if seed.norm() > 0.0 && in_closed_half_guide(seed) {
        seed
    } else {
        inner_corner_seed(q, xi)
    };
    z.re = z.re.clamp(1e-12, PI - 1e-12);
    let mut f_val = forward_map_unchecked(q, z);
    let mut residual = (f_val - xi).norm();
    for _ in 0..80 {
        if residual < INVERSE_TOL {
            if z.norm() < CORNER_EXCLUSION || (z - Complex64::new(PI, 0.0)).norm() < CORNER_EXCLUSION
            {
                return Err(Error::CornerSingularity(CORNER_EXCLUSION));
            }
            return Ok(z);
        }
        let deriv = map_derivative(q, z);
        let mut step = (xi - f_val) / deriv;
        // Keep iterates inside the analyticity strip.
        let mut z_new = z + step;
        let mut tries = 0;
        while (z_new.re < 1e-13 || z_new.re > PI - 1e-13) && tries < 40 {
            step *= 0.5;
            z_new = z + step;
            tries += 1;
        }
        let f_new = f_val + forward_increment(q, z, z_new);
        let r_new = (f_new - xi).norm();
        if r_new > residual {
            // Damp once; if still worse, re-anchor from scratch to purge
            // accumulated increment error.
            let z_half = z + step * 0.5;
            let f_half = f_val + forward_increment(q, z, z_half);
            let r_half = (f_half - xi).norm();
            if r_half < r_new {
                z = z_half;
                f_val = f_half;
                residual = r_half;
                continue;
            }
        }
        z = z_new;
        f_val = f_new;
        residual = r_new;
    }
    // Final full re-evaluation in case increments drifted.
    let exact = forward_map_unchecked(q, z);
    if (exact - xi).norm() < INVERSE_TOL {
        if z.norm() < CORNER_EXCLUSION || (z - Complex64::new(PI, 0.0)).norm() < CORNER_EXCLUSION {
            return Err(Error::CornerSingularity(CORNER_EXCLUSION));
        }
        return Ok(z);
    }
    Err(Error::NonConvergence(format!(
        "map inversion stalled at |F(z)-xi| = {residual:.3e} for xi = {xi}"
    )))
}

/// Exact Jacobian `|dz/dxi|^2 = |cot(z/2)|^{2q}` away from the corners.
pub fn jacobian_exact(q: f64, z: Complex64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Domain(format!("q must lie in [0,1), got {q}")));
    }
    if z.norm() < CORNER_EXCLUSION || (z - Complex64::new(PI, 0.0)).norm() < CORNER_EXCLUSION {
        return Err(Error::CornerSingularity(CORNER_EXCLUSION));
    }
    Ok((z * 0.5).tan().norm().powf(-2.0 * q))
}

/// Asymptotic regimes of the Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    NearInner,
    NearOuter,
    Far,
}

/// Prefactor of the inner-corner power law.
pub fn inner_prefactor(q: f64) -> f64 {
    ((1.0 + q) / 2.0).powf(-2.0 * q / (q + 1.0))
}

/// Prefactor of the outer-corner power law.
pub fn outer_prefactor(q: f64) -> f64 {
    (2.0 * (1.0 - q)).powf(2.0 * q / (1.0 - q))
}

/// Far-field affine tail of the map: `F(z) ~ e^{i pi q/2} z + C(q)` high up
/// the strip. Returns the constant `C(q)`.
pub(crate) fn far_field_offset(q: f64) -> Complex64 {
    let anchor = Complex64::new(PI / 2.0, 30.0);
    forward_map_unchecked(q, anchor) - Complex64::from_polar(1.0, PI * q / 2.0) * anchor
}

/// Pull a strip point back to half-guide coordinates through the far-field
/// affine tail (valid away from the corners).
pub(crate) fn far_field_z_estimate(q: f64, xi: Complex64) -> Complex64 {
    Complex64::from_polar(1.0, -PI * q / 2.0) * (xi - far_field_offset(q))
}

/// Asymptotic Jacobian in one of the three regimes of validity.
///
/// Patches: near-inner `|xi| <= 0.1 d`; near-outer on the u-axis segment
/// with `|width - u| <= 0.1 d`; far for points whose half-guide image lies
/// at `Im z >= 3`, where the formula `1 + 4q cos x e^{-y}` applies in the
/// half-guide coordinates `x + i y` recovered through the affine tail.
pub fn jacobian_asymptotic(q: f64, xi: Complex64, regime: Regime) -> Result<f64> {
    let strip = StripGeometry::new(q)?;
    match regime {
        Regime::NearInner => {
            if xi.norm() > 0.1 * strip.d {
                return Err(Error::Domain(format!(
                    "|xi| = {:.3e} outside the near-inner patch 0.1 d = {:.3e}",
                    xi.norm(),
                    0.1 * strip.d
                )));
            }
            Ok(inner_prefactor(q) * xi.norm().powf(-2.0 * q / (q + 1.0)))
        }
        Regime::NearOuter => {
            let dist = (strip.width - xi.re).abs();
            if xi.im.abs() > 1e-9 || dist > 0.1 * strip.d {
                return Err(Error::Domain(
                    "near-outer form is declared on the u-axis segment only".into(),
                ));
            }
            Ok(outer_prefactor(q) * dist.powf(2.0 * q / (1.0 - q)))
        }
        Regime::Far => {
            let z = far_field_z_estimate(q, xi);
            if z.im.abs() < 3.0 {
                return Err(Error::Domain(format!(
                    "point maps to Im z = {:.3} inside the corner region; far form needs |Im z| >= 3",
                    z.im
                )));
            }
            Ok(1.0 + 4.0 * q * z.re.cos() * (-z.im.abs()).exp())
        }
    }
}

/// Contour-line grid: `nu` interior iso-u lines and `2 nv + 1` iso-v levels
/// spanning both half-guides (the lower half by reflection across the bend
/// bisector). Errors carry the offending grid index.
pub fn export_contours(q: f64, nu: usize, nv: usize, v_max: f64) -> Result<MapGrid> {
    if nu < 2 || nv < 2 {
        return Err(Error::Domain("contour grid needs nu, nv >= 2".into()));
    }
    if !(v_max > 0.0) {
        return Err(Error::Domain("v_max must be positive".into()));
    }
    let strip = StripGeometry::new(q)?;
    let mut samples = Vec::with_capacity(nu * (2 * nv + 1));
    let mut seed_row = Complex64::new(0.0, 0.0);
    for i in 0..nu {
        let u = strip.width * (i + 1) as f64 / (nu + 1) as f64;
        let mut upper = Vec::with_capacity(nv + 1);
        let mut seed = if i == 0 { inner_corner_seed(q, Complex64::new(u, 0.0)) } else { seed_row };
        for j in 0..=nv {
            let v = v_max * j as f64 / nv as f64;
            let xi = Complex64::new(u, v);
            let z = inverse_map(q, xi, seed).map_err(|e| {
                Error::NonConvergence(format!("contour inversion failed at grid (i={i}, j={j}): {e}"))
            })?;
            if j == 0 {
                seed_row = z;
            }
            seed = z;
            let jac = jacobian_exact(q, z)?;
            upper.push(MapSample { z, xi, jacobian: jac });
        }
        // Lower half-guide by reflection across the bisector.
        for s in upper.iter().rev().skip(1) {
            samples.push(MapSample { z: s.z.conj(), xi: s.xi.conj(), jacobian: s.jacobian });
        }
        samples.extend(upper);
    }
    Ok(MapGrid { q, samples })
}
