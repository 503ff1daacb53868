//! State algebra for 1D compressible Euler flow with a relaxed stress field.
//!
//! Conserved variables are `(rho, rho*u, rho*S)`; the homogeneous flux is
//! `(rho u, rho u^2 + p(rho) - S, rho u S)` with pressure `p(rho) = rho^gamma`,
//! and the stress balance carries the stiff source `(u_x - S)/tau`.
//! The admissible state space is `rho > 0`, `u` and `S` arbitrary finite.

use crate::error::{Error, Result};

/// Fixed physical parameters of the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Adiabatic exponent of the pressure law, `gamma > 1`.
    pub gamma: f64,
    /// Relaxation time of the stress field, `tau > 0`.
    pub tau: f64,
    /// Background (far-field) density, `rho_bar > 0`.
    pub rho_bar: f64,
}

impl ModelParams {
    /// Validated constructor.
    pub fn new(gamma: f64, tau: f64, rho_bar: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::domain(format!("gamma must exceed 1, got {gamma}")));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::domain(format!("tau must be positive, got {tau}")));
        }
        if !(rho_bar > 0.0) || !rho_bar.is_finite() {
            return Err(Error::domain(format!(
                "rho_bar must be positive, got {rho_bar}"
            )));
        }
        Ok(ModelParams {
            gamma,
            tau,
            rho_bar,
        })
    }

    /// Characteristic speed of the linearization at the background state:
    /// `sigma = sqrt(p'(rho_bar) + 1/(tau rho_bar^2))`.
    pub fn sigma(&self) -> f64 {
        (dpressure(self.rho_bar, self.gamma).unwrap() + 1.0 / (self.tau * self.rho_bar.powi(2)))
            .sqrt()
    }
}

/// Primitive state `(rho, u, S)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointState {
    pub rho: f64,
    pub u: f64,
    pub s: f64,
}

/// Conserved cell triple `(rho, rho*u, rho*S)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsTriple {
    pub rho: f64,
    pub mom: f64,
    pub rw: f64,
}

/// Flux triple aligned with [`ConsTriple`] components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxTriple {
    pub f_rho: f64,
    pub f_mom: f64,
    pub f_rw: f64,
}

impl ConsTriple {
    /// The constant equilibrium triple `(rho_bar, 0, 0)`.
    pub fn equilibrium(rho_bar: f64) -> Self {
        ConsTriple {
            rho: rho_bar,
            mom: 0.0,
            rw: 0.0,
        }
    }

    /// Velocity `u = mom / rho`.
    pub fn u(&self) -> f64 {
        self.mom / self.rho
    }

    /// Stress `S = rw / rho`.
    pub fn s(&self) -> f64 {
        self.rw / self.rho
    }

    /// All three components finite?
    pub fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.mom.is_finite() && self.rw.is_finite()
    }
}

impl std::ops::Add for ConsTriple {
    type Output = ConsTriple;
    fn add(self, o: ConsTriple) -> ConsTriple {
        ConsTriple {
            rho: self.rho + o.rho,
            mom: self.mom + o.mom,
            rw: self.rw + o.rw,
        }
    }
}

impl std::ops::Sub for ConsTriple {
    type Output = ConsTriple;
    fn sub(self, o: ConsTriple) -> ConsTriple {
        ConsTriple {
            rho: self.rho - o.rho,
            mom: self.mom - o.mom,
            rw: self.rw - o.rw,
        }
    }
}

impl std::ops::Mul<f64> for ConsTriple {
    type Output = ConsTriple;
    fn mul(self, k: f64) -> ConsTriple {
        ConsTriple {
            rho: self.rho * k,
            mom: self.mom * k,
            rw: self.rw * k,
        }
    }
}

/// Pressure law `p(rho) = rho^gamma`.
///
/// # Errors
/// `rho <= 0` (or non-finite input) is a domain error.
pub fn pressure(rho: f64, gamma: f64) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::domain(format!(
            "pressure requires rho > 0, got {rho}"
        )));
    }
    Ok(rho.powf(gamma))
}

/// Pressure derivative `p'(rho) = gamma * rho^(gamma-1)`.
pub fn dpressure(rho: f64, gamma: f64) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::domain(format!(
            "dpressure requires rho > 0, got {rho}"
        )));
    }
    Ok(gamma * rho.powf(gamma - 1.0))
}

/// Primitive -> conserved map `(rho, u, S) -> (rho, rho u, rho S)`.
pub fn to_conservative(p: PointState) -> ConsTriple {
    ConsTriple {
        rho: p.rho,
        mom: p.rho * p.u,
        rw: p.rho * p.s,
    }
}

/// Conserved -> primitive map; errors on `rho <= 0`.
pub fn to_primitive(c: ConsTriple) -> Result<PointState> {
    if !(c.rho > 0.0) || !c.rho.is_finite() {
        return Err(Error::domain(format!(
            "to_primitive requires rho > 0, got {}",
            c.rho
        )));
    }
    Ok(PointState {
        rho: c.rho,
        u: c.mom / c.rho,
        s: c.rw / c.rho,
    })
}

/// Homogeneous flux `f(U) = (rho u, rho u^2 + p(rho) - S, rho u S)`.
///
/// The stress enters the momentum flux with a minus sign: the system is a
/// divergence-form balance law and total momentum telescopes exactly.
pub fn physical_flux(c: ConsTriple, params: &ModelParams) -> Result<FluxTriple> {
    let p = to_primitive(c)?;
    let pr = pressure(p.rho, params.gamma)?;
    Ok(FluxTriple {
        f_rho: c.mom,
        f_mom: c.mom * p.u + pr - p.s,
        f_rw: c.mom * p.s,
    })
}

/// Sound-like speed `a(rho) = sqrt(p'(rho) + 1/(tau rho^2))`.
///
/// Strictly positive on the admissible set (the stress contribution
/// `1/(tau rho^2)` never vanishes).
pub fn wave_speed(rho: f64, params: &ModelParams) -> Result<f64> {
    let dp = dpressure(rho, params.gamma)?;
    Ok((dp + 1.0 / (params.tau * rho * rho)).sqrt())
}

/// Characteristic speeds of the quasilinear system, sorted ascending:
/// `(u - a, u, u + a)` with `a = sqrt(p'(rho) + 1/(tau rho^2))`.
///
/// This closed form is exact for every admissible state: the characteristic
/// polynomial of `A0^{-1} A1` factors as
/// `(u - λ) * ((u - λ)^2 - p'(rho) - 1/(tau rho^2))`.
pub fn char_speeds(p: PointState, params: &ModelParams) -> Result<[f64; 3]> {
    let a = wave_speed(p.rho, params)?;
    Ok([p.u - a, p.u, p.u + a])
}

/// Scaling matrix `A0`, transport matrix `A1` and dissipation shape `B` of
/// the quasilinear form `A0 w_t + A1 w_x + B w/tau = 0` in the primitive
/// variables `w = (rho, u, S)`:
///
/// ```text
/// A0 = diag(1, rho, tau*rho)
/// A1 = [[   u,   rho,        0],
///       [p'(.), rho*u,      -1],
///       [   0,    -1, tau*rho*u]]
/// B  = diag(0, 0, 1)
/// ```
///
/// Rows are the primitive equations scaled by `A0`'s diagonal, so
/// `A0^{-1} A1` is the primitive transport matrix and its spectrum is
/// exactly [`char_speeds`] at every admissible state (the middle entry of
/// row 2 carries the factor `rho`; dropping it is only correct at
/// `rho = 1`).
pub fn quasilinear_matrices(
    p: PointState,
    params: &ModelParams,
) -> Result<([[f64; 3]; 3], [[f64; 3]; 3], [[f64; 3]; 3])> {
    let dp = dpressure(p.rho, params.gamma)?;
    let a0 = [
        [1.0, 0.0, 0.0],
        [0.0, p.rho, 0.0],
        [0.0, 0.0, params.tau * p.rho],
    ];
    let a1 = [
        [p.u, p.rho, 0.0],
        [dp, p.rho * p.u, -1.0],
        [0.0, -1.0, params.tau * p.rho * p.u],
    ];
    let b = [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
    Ok((a0, a1, b))
}

/// Entropy density
/// `eta = (p(rho) - p(rho_bar) - p'(rho_bar)(rho - rho_bar))/(gamma-1)
///        + tau rho S^2/2 + rho u^2/2`.
///
/// Convex in the conserved variables and zero exactly at the equilibrium
/// `(rho_bar, 0, 0)`.
pub fn entropy_density(p: PointState, params: &ModelParams) -> Result<f64> {
    let pr = pressure(p.rho, params.gamma)?;
    let p_bar = pressure(params.rho_bar, params.gamma)?;
    let dp_bar = dpressure(params.rho_bar, params.gamma)?;
    let pot = (pr - p_bar - dp_bar * (p.rho - params.rho_bar)) / (params.gamma - 1.0);
    Ok(pot + 0.5 * params.tau * p.rho * p.s * p.s + 0.5 * p.rho * p.u * p.u)
}

/// Entropy flux paired with [`entropy_density`]:
///
/// `q = gamma/(gamma-1) u p(rho) - p'(rho_bar)/(gamma-1) rho u
///      + rho u^3/2 + tau rho u S^2/2 - u S`.
///
/// The affine term `-p'(rho_bar)/(gamma-1) rho u` compensates the affine part
/// of the entropy density, so that smooth solutions satisfy the exact balance
/// `d_t(eta) + d_x(q) + S^2 = 0`. `q` vanishes wherever `u = 0`.
pub fn entropy_flux(p: PointState, params: &ModelParams) -> Result<f64> {
    let pr = pressure(p.rho, params.gamma)?;
    let dp_bar = dpressure(params.rho_bar, params.gamma)?;
    let g = params.gamma / (params.gamma - 1.0);
    Ok(g * p.u * pr - dp_bar / (params.gamma - 1.0) * p.rho * p.u
        + 0.5 * p.rho * p.u.powi(3)
        + 0.5 * params.tau * p.rho * p.u * p.s * p.s
        - p.u * p.s)
}

/// Source of the `rho*S` balance law: `(u_x - S)/tau`.
///
/// Monotone non-increasing in `S` (damping), linear in `u_x`.
pub fn relaxation_rhs(p: PointState, u_x: f64, params: &ModelParams) -> f64 {
    (u_x - p.s) / params.tau
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P2: ModelParams = ModelParams {
        gamma: 2.0,
        tau: 1.0,
        rho_bar: 1.0,
    };

    fn st(rho: f64, u: f64, s: f64) -> PointState {
        PointState { rho, u, s }
    }

    #[test]
    fn pressure_known_values() {
        assert!((pressure(1.0, 1.4).unwrap() - 1.0).abs() < 1e-15);
        assert!((pressure(2.0, 2.0).unwrap() - 4.0).abs() < 1e-14);
        assert!((pressure(0.5, 2.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn pressure_rejects_nonpositive_density() {
        assert!(pressure(0.0, 2.0).is_err());
        assert!(pressure(-1.0, 2.0).is_err());
        assert!(dpressure(0.0, 2.0).is_err());
        assert!(to_primitive(ConsTriple {
            rho: 0.0,
            mom: 1.0,
            rw: 0.0
        })
        .is_err());
    }

    #[test]
    fn pressure_strictly_convex() {
        // p'' = gamma (gamma-1) rho^(gamma-2) > 0: second differences positive.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let rho: f64 = rng.gen_range(0.1..10.0);
            let gamma: f64 = rng.gen_range(1.05..3.0);
            let h = 1e-4 * rho;
            let d2 = pressure(rho + h, gamma).unwrap() - 2.0 * pressure(rho, gamma).unwrap()
                + pressure(rho - h, gamma).unwrap();
            assert!(
                d2 > 0.0,
                "second difference not positive at rho={rho}, gamma={gamma}: {d2}"
            );
        }
    }

    #[test]
    fn conversion_round_trip_within_rounding() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10_000 {
            let p = st(
                rng.gen_range(1e-3..1e3),
                rng.gen_range(-100.0..100.0),
                rng.gen_range(-50.0..50.0),
            );
            let q = to_primitive(to_conservative(p)).unwrap();
            // (rho*u)/rho re-rounds once; allow 2 ulp per component.
            assert!((q.rho - p.rho).abs() <= 2.0 * f64::EPSILON * p.rho.abs());
            assert!((q.u - p.u).abs() <= 2.0 * f64::EPSILON * p.u.abs().max(1e-300));
            assert!((q.s - p.s).abs() <= 2.0 * f64::EPSILON * p.s.abs().max(1e-300));
        }
    }

    #[test]
    fn flux_known_values() {
        // (rho,u,S) = (1,0,0), gamma=2: f = (0, 1, 0).
        let f = physical_flux(to_conservative(st(1.0, 0.0, 0.0)), &P2).unwrap();
        assert!((f.f_rho - 0.0).abs() < 1e-15);
        assert!((f.f_mom - 1.0).abs() < 1e-15);
        assert!((f.f_rw - 0.0).abs() < 1e-15);

        // (2,1,0.5): f = (2, 2*1 + 4 - 0.5, 2*0.5) = (2, 5.5, 1).
        let f = physical_flux(to_conservative(st(2.0, 1.0, 0.5)), &P2).unwrap();
        assert!((f.f_rho - 2.0).abs() < 1e-14);
        assert!((f.f_mom - 5.5).abs() < 1e-14);
        assert!((f.f_rw - 1.0).abs() < 1e-14);
    }

    #[test]
    fn flux_mass_component_is_momentum() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let c = to_conservative(st(
                rng.gen_range(0.1..10.0),
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-5.0..5.0),
            ));
            let f = physical_flux(c, &P2).unwrap();
            assert_eq!(f.f_rho, c.mom);
        }
    }

    #[test]
    fn char_speeds_rest_state() {
        // At (1,0,0) with gamma=2, tau=1: a = sqrt(2 + 1) = sqrt(3).
        let s3 = 3.0_f64.sqrt();
        let l = char_speeds(st(1.0, 0.0, 0.0), &P2).unwrap();
        assert!((l[0] + s3).abs() < 1e-12);
        assert!(l[1].abs() < 1e-12);
        assert!((l[2] - s3).abs() < 1e-12);
    }

    #[test]
    fn char_speeds_galilean_shift() {
        // Shifting u rigidly shifts all speeds: (1,5,0) -> (5-√3, 5, 5+√3).
        let s3 = 3.0_f64.sqrt();
        let l = char_speeds(st(1.0, 5.0, 0.0), &P2).unwrap();
        assert!((l[0] - (5.0 - s3)).abs() < 1e-12);
        assert!((l[1] - 5.0).abs() < 1e-12);
        assert!((l[2] - (5.0 + s3)).abs() < 1e-12);
    }

    #[test]
    fn char_speeds_off_equilibrium_state() {
        // (2,1,0), gamma=2, tau=1: a = sqrt(4 + 0.25) = sqrt(4.25).
        let a = 4.25_f64.sqrt();
        let l = char_speeds(st(2.0, 1.0, 0.0), &P2).unwrap();
        assert!((l[0] - (1.0 - a)).abs() < 1e-12);
        assert!((l[1] - 1.0).abs() < 1e-12);
        assert!((l[2] - (1.0 + a)).abs() < 1e-12);
    }

    #[test]
    fn char_speeds_symmetric_about_middle() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..1000 {
            let p = st(
                rng.gen_range(0.1..10.0),
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-5.0..5.0),
            );
            let l = char_speeds(p, &P2).unwrap();
            assert!(l[0] < l[1] && l[1] < l[2], "speeds not sorted: {l:?}");
            let a = wave_speed(p.rho, &P2).unwrap();
            assert!(((l[2] - l[0]) - 2.0 * a).abs() <= 1e-12 * a.max(1.0));
        }
    }

    /// Oracle check: closed-form speeds against a numeric eigensolve of
    /// `A0^{-1} A1` over randomized states and parameters.
    #[test]
    fn char_speeds_match_numeric_eigensolve() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for k in 0..1000 {
            let params = ModelParams::new(
                rng.gen_range(1.05..3.0),
                rng.gen_range(0.05..5.0),
                rng.gen_range(0.2..3.0),
            )
            .unwrap();
            let p = st(
                rng.gen_range(0.1..10.0),
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-5.0..5.0),
            );
            let (a0, a1, _) = quasilinear_matrices(p, &params).unwrap();
            let m = Matrix3::from_fn(|i, j| a1[i][j] / a0[i][i]); // A0 is diagonal
            let mut ev = m
                .eigenvalues()
                .unwrap_or_else(|| panic!("complex eigenvalues at trial {k} ({p:?})"))
                .as_slice()
                .to_vec();
            ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let closed = char_speeds(p, &params).unwrap();
            for (c, n) in closed.iter().zip(ev.iter()) {
                let tol = 1e-8 * c.abs().max(1.0);
                assert!(
                    (c - n).abs() <= tol,
                    "trial {k}: closed {c} vs numeric {n} (state {p:?})"
                );
            }
        }
    }

    #[test]
    fn quasilinear_matrices_at_equilibrium() {
        let (a0, a1, b) = quasilinear_matrices(st(1.0, 0.0, 0.0), &P2).unwrap();
        assert_eq!(a0, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert_eq!(a1, [[0.0, 1.0, 0.0], [2.0, 0.0, -1.0], [0.0, -1.0, 0.0]]);
        assert_eq!(b, [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
    }

    #[test]
    fn symmetrizer_positive_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..1000 {
            let p = st(
                rng.gen_range(0.1..10.0),
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-5.0..5.0),
            );
            let (a0, _, _) = quasilinear_matrices(p, &P2).unwrap();
            // A0 diagonal: positive-definite iff all diagonal entries positive.
            assert!(a0[0][0] > 0.0 && a0[1][1] > 0.0 && a0[2][2] > 0.0);
        }
    }

    #[test]
    fn entropy_density_known_values() {
        assert_eq!(entropy_density(st(1.0, 0.0, 0.0), &P2).unwrap(), 0.0);
        // (2,1,1): (4-1-2)/1 + 1*2*1/2 + 2*1/2 = 3.
        assert!((entropy_density(st(2.0, 1.0, 1.0), &P2).unwrap() - 3.0).abs() < 1e-14);
        // (1.1,0,0): (1.21 - 1 - 0.2)/1 = 0.01.
        assert!((entropy_density(st(1.1, 0.0, 0.0), &P2).unwrap() - 0.01).abs() < 1e-12);
    }

    #[test]
    fn entropy_density_positive_off_equilibrium() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10_000 {
            let p = st(
                rng.gen_range(0.05..8.0),
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-5.0..5.0),
            );
            let eta = entropy_density(p, &P2).unwrap();
            let dist = (p.rho - 1.0).abs().max(p.u.abs()).max(p.s.abs());
            if dist > 1e-6 {
                assert!(eta > 0.0, "eta = {eta} not positive at {p:?}");
            } else {
                assert!(eta.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn entropy_flux_vanishes_at_zero_velocity() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..1000 {
            let p = st(rng.gen_range(0.1..10.0), 0.0, rng.gen_range(-5.0..5.0));
            assert_eq!(entropy_flux(p, &P2).unwrap(), 0.0);
        }
    }

    #[test]
    fn entropy_flux_known_values() {
        // gamma=2, tau=1, rho_bar=1. q = 2 u p - 2 rho u + rho u^3/2 + rho u S^2/2 - uS.
        // (1,1,0): 2 - 2 + 0.5 = 0.5.
        assert!((entropy_flux(st(1.0, 1.0, 0.0), &P2).unwrap() - 0.5).abs() < 1e-14);
        // (1,1,1): 2 - 2 + 0.5 + 0.5 - 1 = 0.
        assert!((entropy_flux(st(1.0, 1.0, 1.0), &P2).unwrap()).abs() < 1e-14);
    }

    /// The pair (eta, q) is compatible with the balance law: along *any* C¹
    /// fields, `eta_t + q_x + S^2 = w1*r1 + u*r2 + S*r3` where `r1, r2, r3`
    /// are the equation residuals and `w1 = (p'(rho)-p'(rho_bar))/(gamma-1)
    /// + u^2/2 + tau S^2/2`. Both sides are evaluated with 4th-order central
    /// differences of manufactured Gaussian fields; their gap must converge
    /// to zero at 2nd order or better as the sampling step is halved.
    #[test]
    fn entropy_pair_compatible_with_balance_law() {
        let params = ModelParams::new(1.6, 0.8, 1.2).unwrap();
        let rho = |t: f64, x: f64| 1.2 + 0.3 * (-(x - 0.2 * t).powi(2)).exp();
        let u = |t: f64, x: f64| 0.4 * (-(x + 0.1 - 0.15 * t).powi(2)).exp();
        let s = |t: f64, x: f64| 0.25 * (-(x - 0.05 * t).powi(2)).exp() * (1.0 + 0.5 * t);

        // 4th-order central difference of g at 0 with step h.
        let d4 = |g: &dyn Fn(f64) -> f64, h: f64| {
            (-g(2.0 * h) + 8.0 * g(h) - 8.0 * g(-h) + g(-2.0 * h)) / (12.0 * h)
        };

        let gap = |h: f64| -> f64 {
            let mut worst = 0.0_f64;
            for &(t0, x0) in &[(0.3, 0.1), (0.5, -0.4), (0.2, 0.7), (0.7, 0.25)] {
                let eta_of = |t: f64, x: f64| {
                    entropy_density(st(rho(t, x), u(t, x), s(t, x)), &params).unwrap()
                };
                let q_of = |t: f64, x: f64| {
                    entropy_flux(st(rho(t, x), u(t, x), s(t, x)), &params).unwrap()
                };

                let eta_t = d4(&|d| eta_of(t0 + d, x0), h);
                let q_x = d4(&|d| q_of(t0, x0 + d), h);
                let lhs = eta_t + q_x + s(t0, x0).powi(2);

                let rho0 = rho(t0, x0);
                let u0 = u(t0, x0);
                let s0 = s(t0, x0);
                let rho_t = d4(&|d| rho(t0 + d, x0), h);
                let rho_x = d4(&|d| rho(t0, x0 + d), h);
                let u_t = d4(&|d| u(t0 + d, x0), h);
                let u_x = d4(&|d| u(t0, x0 + d), h);
                let s_t = d4(&|d| s(t0 + d, x0), h);
                let s_x = d4(&|d| s(t0, x0 + d), h);
                let p_x = dpressure(rho0, params.gamma).unwrap() * rho_x;

                let r1 = rho_t + rho_x * u0 + rho0 * u_x;
                let r2 = rho0 * (u_t + u0 * u_x) + p_x - s_x;
                let r3 = params.tau * rho0 * (s_t + u0 * s_x) - u_x + s0;
                let w1 = (dpressure(rho0, params.gamma).unwrap()
                    - dpressure(params.rho_bar, params.gamma).unwrap())
                    / (params.gamma - 1.0)
                    + 0.5 * u0 * u0
                    + 0.5 * params.tau * s0 * s0;
                let rhs = w1 * r1 + u0 * r2 + s0 * r3;
                worst = worst.max((lhs - rhs).abs());
            }
            worst
        };

        let g1 = gap(1e-2);
        let g2 = gap(5e-3);
        assert!(
            g2 <= g1 / 4.0 + 1e-12,
            "compatibility gap does not shrink at 2nd order: {g1} -> {g2}"
        );
        assert!(g2 < 1e-8, "compatibility gap too large: {g2}");
    }

    #[test]
    fn relaxation_rhs_damps_stress() {
        let params = ModelParams::new(2.0, 0.5, 1.0).unwrap();
        // (u_x - S)/tau with u_x = 3, S = 1, tau = 0.5: (3-1)/0.5 = 4.
        assert!((relaxation_rhs(st(1.0, 0.0, 1.0), 3.0, &params) - 4.0).abs() < 1e-15);
        // Monotone decreasing in S.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..1000 {
            let ux = rng.gen_range(-10.0..10.0);
            let s1 = rng.gen_range(-5.0..5.0);
            let s2 = s1 + rng.gen_range(0.01..1.0);
            let r1 = relaxation_rhs(st(1.0, 0.0, s1), ux, &params);
            let r2 = relaxation_rhs(st(1.0, 0.0, s2), ux, &params);
            assert!(r2 < r1);
        }
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.9, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(2.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(2.0, 1.0, -1.0).is_err());
        let p = ModelParams::new(2.0, 1.0, 1.0).unwrap();
        assert!((p.sigma() - 3.0_f64.sqrt()).abs() < 1e-15);
    }
}
