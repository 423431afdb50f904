//! Bend parameterization and unit conventions.
//!
//! All three descriptions of the bend sharpness live here and are kept
//! consistent: the complementary angle fraction `q` in (0,1), the internal
//! angle fraction `alpha = (1-q)/2`, and the arm slope `a = tan(pi q / 2)`
//! of the oblique picture. `q -> 0` is the straight guide, `q = 1/2` the
//! L-shape with 45-degree arms.
//!
//! Canonical units put the corner distance at `l = pi`, so the oblique
//! threshold `(pi/l)^2` is exactly 1 and energies can be read in the same
//! scale the bound-state formulas use. Results for other `l` follow from
//! the `l^-2` scaling of the energy.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Geometry of the sharply bent guide.
///
/// Immutable value type; cheap to copy and safe to share across threads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// Complementary angle fraction, `q = 1 - 2 alpha`, in (0, 1).
    pub q: f64,
    /// Internal-angle fraction of the map, in (0, 1/2).
    pub alpha: f64,
    /// Arm slope in the oblique picture, `a = tan(pi q / 2)`.
    pub slope: f64,
    /// Distance between the inner and outer corner.
    pub corner_distance: f64,
}

impl Geometry {
    /// Build a geometry from the complementary angle fraction `q` and the
    /// corner distance `l`.
    pub fn from_q(q: f64, l: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("q must lie in (0,1), got {q}")));
        }
        if !(l > 0.0) {
            return Err(Error::Domain(format!("corner distance must be positive, got {l}")));
        }
        Ok(Geometry {
            q,
            alpha: (1.0 - q) / 2.0,
            slope: (PI * q / 2.0).tan(),
            corner_distance: l,
        })
    }

    /// Build a geometry from the oblique arm slope `a`, inverting the
    /// `a = tan(pi q / 2)` convention.
    pub fn from_slope(a: f64, l: f64) -> Result<Self> {
        if !(a >= 0.0) {
            return Err(Error::Domain(format!("slope must be non-negative, got {a}")));
        }
        if !(l > 0.0) {
            return Err(Error::Domain(format!("corner distance must be positive, got {l}")));
        }
        let q = 2.0 / PI * a.atan();
        Ok(Geometry {
            q,
            alpha: (1.0 - q) / 2.0,
            slope: a,
            corner_distance: l,
        })
    }

    /// Continuum edge of the oblique picture, `(pi/l)^2`. Bound states lie
    /// strictly below it.
    pub fn threshold_energy(&self) -> f64 {
        let k = PI / self.corner_distance;
        k * k
    }

    /// Perpendicular arm width, `l cos(pi q / 2)`.
    pub fn arm_width(&self) -> f64 {
        self.corner_distance * (PI * self.q / 2.0).cos()
    }

    /// Continuum edge of the straight arm, `(pi / arm_width)^2`. This is the
    /// energy below which a state decays along the arms.
    pub fn arm_threshold(&self) -> f64 {
        let k = PI / self.arm_width();
        k * k
    }
}
