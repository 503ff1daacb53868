//! Large-data velocity profile `u_{L,M}`.
//!
//! The profile is odd, piecewise trigonometric/constant, supported on
//! `[-M, M]`, with plateaus at `∓L` and cosine ramps of unit width:
//!
//! ```text
//!  0                                  on (-inf, -M]
//!  (L/2) cos(pi (x+M)) - L/2          on (-M, -M+1]      (ramp 0 -> -L)
//! -L                                  on (-M+1, -1]
//!  L sin(pi x / 2)                    on (-1, 1]         (ramp -L -> L)
//!  L                                  on (1, M-1]
//! -(L/2) cos(pi (x+M)) + L/2          on (M-1, M]        (ramp L -> 0)
//!  0                                  on (M, inf)
//! ```
//!
//! With `M` an even integer every piece meets its neighbors with matching
//! value and zero slope, so the profile is C¹. The exact squared L² norm is
//! `2 L^2 M - (9/4) L^2`.
//!
//! [`ProfileVariant::Printed`] keeps an alternative middle piece
//! `L cos(pi (x+M))` and right ramp `(L/2) cos(pi (x+M)) + L/2`, which is
//! discontinuous at `x = 1`, `x = M-1` and `x = M`; it exists for audit
//! purposes only.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Construction parameters of the velocity profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSpec {
    /// Plateau amplitude `L > 0`.
    pub l_amp: f64,
    /// Half-width `M`: even integer, `M >= 4` and `M >= r_support`.
    pub m_halfwidth: u64,
    /// Support radius of the non-velocity data `(rho0 - rho_bar, S0)`.
    pub r_support: f64,
}

/// Which set of profile pieces to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileVariant {
    /// C¹ odd profile (default).
    Corrected,
    /// Literal discontinuous variant kept for audit.
    Printed,
}

impl ProfileSpec {
    /// Validated constructor.
    pub fn new(l_amp: f64, m_halfwidth: u64, r_support: f64) -> Result<Self> {
        if !(l_amp > 0.0) || !l_amp.is_finite() {
            return Err(Error::domain(format!("L must be positive, got {l_amp}")));
        }
        if m_halfwidth % 2 != 0 {
            return Err(Error::domain(format!("M must be even, got {m_halfwidth}")));
        }
        if m_halfwidth < 4 {
            return Err(Error::domain(format!(
                "M must be at least 4, got {m_halfwidth}"
            )));
        }
        if !(r_support >= 0.0) || !r_support.is_finite() {
            return Err(Error::domain(format!(
                "support radius must be non-negative, got {r_support}"
            )));
        }
        if (m_halfwidth as f64) < r_support {
            return Err(Error::domain(format!(
                "M = {m_halfwidth} must not be smaller than the data support radius {r_support}"
            )));
        }
        Ok(ProfileSpec {
            l_amp,
            m_halfwidth,
            r_support,
        })
    }

    /// `M` as a float.
    pub fn m(&self) -> f64 {
        self.m_halfwidth as f64
    }

    /// Piece boundaries in ascending order: `-M, -M+1, -1, 1, M-1, M`.
    pub fn breakpoints(&self) -> [f64; 6] {
        let m = self.m();
        [-m, -m + 1.0, -1.0, 1.0, m - 1.0, m]
    }
}

/// Evaluate the velocity profile at `x`.
///
/// Ramp pieces are evaluated in the local coordinate relative to the nearest
/// outer breakpoint (`x + M` on the left, `x - M` on the right; the two
/// phases agree for even `M`), which makes the values at every breakpoint
/// exact in floating point and the profile exactly odd.
pub fn velocity_profile(spec: &ProfileSpec, variant: ProfileVariant, x: f64) -> f64 {
    let l = spec.l_amp;
    let m = spec.m();
    if x <= -m || x > m {
        return 0.0;
    }
    if x <= -m + 1.0 {
        // Left ramp, local coordinate xi = x + M in (0, 1].
        let xi = x + m;
        return 0.5 * l * ((PI * xi).cos() - 1.0);
    }
    if x <= -1.0 {
        return -l;
    }
    if x <= 1.0 {
        return match variant {
            Corrected => l * (0.5 * PI * x).sin(),
            // cos(pi(x+M)) = cos(pi x) for even M.
            Printed => l * (PI * x).cos(),
        };
    }
    if x <= m - 1.0 {
        return l;
    }
    // Right ramp, local coordinate xi = x - M in (-1, 0];
    // cos(pi(x+M)) = cos(pi xi) for even M.
    let xi = x - m;
    match variant {
        Corrected => 0.5 * l * (1.0 - (PI * xi).cos()),
        Printed => 0.5 * l * ((PI * xi).cos() + 1.0),
    }
}

use ProfileVariant::{Corrected, Printed};

/// Exact squared L² norm of the corrected profile: `2 L^2 M - (9/4) L^2`.
///
/// (Piecewise: the middle ramp contributes `L^2`, the two plateaus
/// `2 L^2 (M-2)`, the two outer ramps `3 L^2 / 4`.)
pub fn profile_norm_sq(spec: &ProfileSpec) -> f64 {
    spec.l_amp * spec.l_amp * (2.0 * spec.m() - 2.25)
}

// ============================================================================
// Tests
// ============================================================================
