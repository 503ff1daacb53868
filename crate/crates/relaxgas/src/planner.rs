//! Construction of certified blow-up initial data.
//!
//! Given the model parameters (with unit background density) and a
//! description of the near-field data `(rho0 - 1, S0)`, the planner chooses
//! the plateau amplitude `L` and half-width `M` of the velocity profile so
//! that every hypothesis of the finite-time breakdown criterion holds with a
//! quantified margin, and reports the resulting constants:
//!
//! * `sigma_tilde` — propagation speed bound used for the support cone,
//! * `H0` — relative entropy of the non-velocity data,
//! * `F0` — initial weighted momentum `∫ x rho0 u0 dx`,
//! * `c1..c5` — coefficients of the Riccati comparison argument,
//! * `t_star` — the certified breakdown deadline.
//!
//! All integrals are evaluated with a compensated midpoint rule and accepted
//! only if a half-step Richardson check agrees to `1e-8` relative.

use crate::error::{Error, Result};
use crate::model::{dpressure, pressure, ModelParams};
use crate::profile::{profile_norm_sq, velocity_profile, ProfileSpec, ProfileVariant};

/// Pointwise initial-data component.
pub type ProfileFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// C¹ cosine-squared bump: `amp * cos^2(pi (x - center) / (2 width))` on
/// `|x - center| <= width`, zero outside. Vanishes to first order at the
/// edges, so bumpy data stays C¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl Bump {
    pub fn eval(&self, x: f64) -> f64 {
        let r = x - self.center;
        if r.abs() >= self.width {
            return 0.0;
        }
        let c = (std::f64::consts::FRAC_PI_2 * r / self.width).cos();
        self.amplitude * c * c
    }

    /// Exact integral over the support: `amplitude * width`.
    pub fn integral(&self) -> f64 {
        self.amplitude * self.width
    }
}

/// Near-field data description, independent of the velocity profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataSpec {
    /// Optional density perturbation on top of the background.
    pub rho_bump: Option<Bump>,
    /// Optional initial stress deviation.
    pub s_bump: Option<Bump>,
    /// Declared support radius of `(rho0 - rho_bar, S0)`.
    pub r_support: f64,
}

impl DataSpec {
    /// The reference data of the breakdown construction: `rho0 == rho_bar`,
    /// `S0 == 0`, declared support radius 1.
    pub fn reference() -> Self {
        DataSpec {
            rho_bump: None,
            s_bump: None,
            r_support: 1.0,
        }
    }

    fn validate(&self, rho_bar: f64) -> Result<()> {
        if !(self.r_support >= 0.0) || !self.r_support.is_finite() {
            return Err(Error::config(format!(
                "support radius must be non-negative, got {}",
                self.r_support
            )));
        }
        for (name, bump) in [("rho", &self.rho_bump), ("S", &self.s_bump)] {
            if let Some(b) = bump {
                if !(b.width > 0.0) || !b.amplitude.is_finite() || !b.center.is_finite() {
                    return Err(Error::config(format!("malformed {name} bump: {b:?}")));
                }
                if b.center.abs() + b.width > self.r_support + 1e-12 {
                    return Err(Error::config(format!(
                        "{name} bump [{:.3}, {:.3}] exceeds declared support radius {}",
                        b.center - b.width,
                        b.center + b.width,
                        self.r_support
                    )));
                }
            }
        }
        if self.rho_min(rho_bar) <= 0.0 {
            return Err(Error::config(
                "density bump makes the initial density non-positive".to_string(),
            ));
        }
        Ok(())
    }

    pub fn rho_min(&self, rho_bar: f64) -> f64 {
        rho_bar + self.rho_bump.map_or(0.0, |b| b.amplitude.min(0.0))
    }

    pub fn rho_max(&self, rho_bar: f64) -> f64 {
        rho_bar + self.rho_bump.map_or(0.0, |b| b.amplitude.max(0.0))
    }
}

/// Complete initial state `(rho0, u0, S0)` as evaluable fields.
pub struct InitialData {
    rho0: ProfileFn,
    u0: ProfileFn,
    s0: ProfileFn,
    pub rho_bar: f64,
    /// Radius beyond which the data is exactly the constant equilibrium.
    pub support_radius: f64,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl InitialData {
    /// Constant equilibrium state.
    pub fn equilibrium(rho_bar: f64) -> Self {
        InitialData {
            rho0: Box::new(move |_| rho_bar),
            u0: Box::new(|_| 0.0),
            s0: Box::new(|_| 0.0),
            rho_bar,
            support_radius: 0.0,
            rho_min: rho_bar,
            rho_max: rho_bar,
        }
    }

    /// Data assembled from a near-field description and a velocity profile.
    pub fn planned(
        ds: &DataSpec,
        spec: &ProfileSpec,
        variant: ProfileVariant,
        rho_bar: f64,
    ) -> Result<Self> {
        ds.validate(rho_bar)?;
        let rb = ds.rho_bump;
        let sb = ds.s_bump;
        let spec = *spec;
        Ok(InitialData {
            rho0: Box::new(move |x| rho_bar + rb.map_or(0.0, |b| b.eval(x))),
            u0: Box::new(move |x| velocity_profile(&spec, variant, x)),
            s0: Box::new(move |x| sb.map_or(0.0, |b| b.eval(x))),
            rho_bar,
            support_radius: spec.m().max(ds.r_support),
            rho_min: ds.rho_min(rho_bar),
            rho_max: ds.rho_max(rho_bar),
        })
    }

    /// Same near-field data with no velocity component (used while the
    /// profile is still undetermined).
    fn without_velocity(ds: &DataSpec, rho_bar: f64) -> Result<Self> {
        ds.validate(rho_bar)?;
        let rb = ds.rho_bump;
        let sb = ds.s_bump;
        Ok(InitialData {
            rho0: Box::new(move |x| rho_bar + rb.map_or(0.0, |b| b.eval(x))),
            u0: Box::new(|_| 0.0),
            s0: Box::new(move |x| sb.map_or(0.0, |b| b.eval(x))),
            rho_bar,
            support_radius: ds.r_support,
            rho_min: ds.rho_min(rho_bar),
            rho_max: ds.rho_max(rho_bar),
        })
    }

    /// Arbitrary fields (manufactured solutions, tests). The caller vouches
    /// for the stated support radius and density bounds.
    pub fn custom(
        rho0: ProfileFn,
        u0: ProfileFn,
        s0: ProfileFn,
        rho_bar: f64,
        support_radius: f64,
        rho_min: f64,
        rho_max: f64,
    ) -> Result<Self> {
        if !(rho_min > 0.0) || rho_max < rho_min {
            return Err(Error::config(format!(
                "invalid density bounds [{rho_min}, {rho_max}]"
            )));
        }
        Ok(InitialData {
            rho0,
            u0,
            s0,
            rho_bar,
            support_radius,
            rho_min,
            rho_max,
        })
    }

    pub fn rho0(&self, x: f64) -> f64 {
        (self.rho0)(x)
    }

    pub fn u0(&self, x: f64) -> f64 {
        (self.u0)(x)
    }

    pub fn s0(&self, x: f64) -> f64 {
        (self.s0)(x)
    }
}

/// Propagation speed bound for densities in `[rho_min, rho_max]`, floored at
/// the threshold speed `1/sqrt(8 rho_max)` required by the moment argument.
pub fn sigma_tilde(params: &ModelParams, rho_min: f64, rho_max: f64) -> f64 {
    let char_sq =
        params.gamma * rho_max.powf(params.gamma - 1.0) + 1.0 / (params.tau * rho_min * rho_min);
    char_sq.max(1.0 / (8.0 * rho_max)).sqrt()
}

// ----------------------------------------------------------------------------
// Quadrature
// ----------------------------------------------------------------------------

/// Compensated (Kahan) midpoint rule with `n` cells on `[a, b]`.
fn midpoint(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut sum = 0.0;
    let mut carry = 0.0;
    for i in 0..n {
        let x = a + (i as f64 + 0.5) * h;
        let term = f(x) - carry;
        let next = sum + term;
        carry = (next - sum) - term;
        sum = next;
    }
    sum * h
}

/// Midpoint quadrature accepted only if doubling the resolution moves the
/// result by less than `1e-8` relative. Returns the finer value.
fn integrate_checked(f: &dyn Fn(f64) -> f64, a: f64, b: f64, cells_per_unit: u32) -> Result<f64> {
    if cells_per_unit < 64 {
        return Err(Error::config(format!(
            "quadrature resolution too low: {cells_per_unit} cells per unit (need >= 64)"
        )));
    }
    if !(b > a) {
        return Ok(0.0);
    }
    let n = (((b - a) * cells_per_unit as f64).ceil() as usize).max(4);
    let coarse = midpoint(f, a, b, n);
    let fine = midpoint(f, a, b, 2 * n);
    let tol = 1e-8 * fine.abs().max(1.0);
    if (coarse - fine).abs() > tol {
        return Err(Error::Diagnostics(format!(
            "quadrature did not converge: {coarse:.12e} vs {fine:.12e} at {n} cells"
        )));
    }
    Ok(fine)
}

/// Relative entropy of the non-velocity data:
/// `∫ [p(rho0) - p(rho_bar) - p'(rho_bar)(rho0 - rho_bar)] / (gamma - 1)
///    + tau rho0 S0^2 / 2 dx`.
///
/// Nonnegative by convexity of the pressure; values in `(-1e-12, 0)` from
/// rounding are reported as zero, anything lower is an error.
pub fn compute_h0(data: &InitialData, params: &ModelParams, cells_per_unit: u32) -> Result<f64> {
    let r = data.support_radius;
    if r == 0.0 {
        return Ok(0.0);
    }
    let p_bar = pressure(data.rho_bar, params.gamma)?;
    let dp_bar = dpressure(data.rho_bar, params.gamma)?;
    let g = |x: f64| {
        let rho = data.rho0(x);
        let s = data.s0(x);
        (rho.powf(params.gamma) - p_bar - dp_bar * (rho - data.rho_bar)) / (params.gamma - 1.0)
            + 0.5 * params.tau * rho * s * s
    };
    let h0 = integrate_checked(&g, -r, r, cells_per_unit)?;
    if h0 < -1e-12 {
        return Err(Error::Diagnostics(format!(
            "relative entropy of the data came out negative: {h0:.3e}"
        )));
    }
    Ok(h0.max(0.0))
}

/// Initial weighted momentum `F(0) = ∫ x rho0(x) u0(x) dx`.
pub fn initial_moment(data: &InitialData, cells_per_unit: u32) -> Result<f64> {
    let r = data.support_radius;
    if r == 0.0 {
        return Ok(0.0);
    }
    let g = |x: f64| x * data.rho0(x) * data.u0(x);
    integrate_checked(&g, -r, r, cells_per_unit)
}

/// Net initial mass deviation `∫ (rho0 - rho_bar) dx`.
pub fn mass_excess(data: &InitialData, cells_per_unit: u32) -> Result<f64> {
    let r = data.support_radius;
    if r == 0.0 {
        return Ok(0.0);
    }
    let g = |x: f64| data.rho0(x) - data.rho_bar;
    integrate_checked(&g, -r, r, cells_per_unit)
}

// ----------------------------------------------------------------------------
// Plan
// ----------------------------------------------------------------------------

/// Search limits and margins for the plan construction.
#[derive(Debug, Clone, Copy)]
pub struct PlanPolicy {
    /// Upper bound for the half-width search.
    pub max_m: u64,
    /// Relative margin enforced on the strict inequalities.
    pub rel_margin: f64,
    /// Quadrature resolution (cells per unit length).
    pub cells_per_unit: u32,
}

impl Default for PlanPolicy {
    fn default() -> Self {
        PlanPolicy {
            max_m: 2_000_000,
            rel_margin: 1e-9,
            cells_per_unit: 256,
        }
    }
}

/// Direction of a recorded inequality `lhs (sense) rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `lhs < rhs`, enforced with the policy's relative margin.
    StrictLess,
    /// `lhs <= rhs` up to rounding slack.
    AtMost,
    /// `lhs >= rhs` up to rounding slack.
    AtLeast,
}

impl Sense {
    pub fn as_str(&self) -> &'static str {
        match self {
            Sense::StrictLess => "<",
            Sense::AtMost => "<=",
            Sense::AtLeast => ">=",
        }
    }

    pub fn parse(s: &str) -> Result<Sense> {
        match s {
            "<" => Ok(Sense::StrictLess),
            "<=" => Ok(Sense::AtMost),
            ">=" => Ok(Sense::AtLeast),
            other => Err(Error::Parse(format!("unknown inequality sense {other:?}"))),
        }
    }
}

/// One verified hypothesis of the breakdown criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub sense: Sense,
    /// Signed relative margin; positive means satisfied with room.
    pub margin: f64,
    pub pass: bool,
}

impl PlanCheck {
    fn new(name: &str, lhs: f64, rhs: f64, sense: Sense, rel_margin: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs()).max(1e-300);
        let (margin, pass) = match sense {
            Sense::StrictLess => (
                (rhs - lhs) / scale,
                lhs < rhs && rhs - lhs >= rel_margin * scale,
            ),
            Sense::AtMost => ((rhs - lhs) / scale, lhs <= rhs + 1e-12 * scale),
            Sense::AtLeast => ((lhs - rhs) / scale, lhs >= rhs - 1e-12 * scale),
        };
        PlanCheck {
            name: name.to_string(),
            lhs,
            rhs,
            sense,
            margin,
            pass,
        }
    }
}

/// The certified construction: chosen profile, derived constants, and the
/// full list of verified hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupPlan {
    pub gamma: f64,
    pub tau: f64,
    pub rho_bar: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub r_support: f64,
    pub sigma_tilde: f64,
    pub l_amp: f64,
    pub m_halfwidth: u64,
    pub h0: f64,
    pub norm_sq: f64,
    pub f0: f64,
    pub f0_threshold: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub t_star: f64,
    pub checks: Vec<PlanCheck>,
    pub admissible: bool,
}

impl BlowupPlan {
    /// Profile parameters selected by the plan.
    pub fn profile_spec(&self) -> Result<ProfileSpec> {
        ProfileSpec::new(self.l_amp, self.m_halfwidth, self.r_support)
    }

    /// Constants consumed by the moment-envelope diagnostics.
    pub fn envelope_params(&self) -> crate::diagnostics::EnvelopeParams {
        crate::diagnostics::EnvelopeParams {
            c1: self.c1,
            c2: self.c2,
            c3: self.c3,
            c4: self.c4,
            c5: self.c5,
            f0: self.f0,
            norm_sq: self.norm_sq,
            m_halfwidth: self.m_halfwidth as f64,
        }
    }
}

/// Breakdown deadline from the Riccati comparison:
/// `t* = (sqrt( (c3/4c2) / (c3/8c2 - 1/F0) ) - 1) / c2`.
pub fn blowup_deadline(c2: f64, c3: f64, f0: f64) -> Result<f64> {
    let den = c3 / (8.0 * c2) - 1.0 / f0;
    if !(den > 0.0) {
        return Err(Error::Infeasible {
            constraint: "critical_moment",
            detail: format!(
                "initial moment {f0:.6e} does not exceed the critical value {:.6e}",
                8.0 * c2 / c3
            ),
        });
    }
    Ok(((c3 / (4.0 * c2) / den).sqrt() - 1.0) / c2)
}

/// Assemble the plan for given profile parameters (no search). Errors with
/// [`Error::Infeasible`] if any hypothesis fails.
pub fn plan_at(
    params: &ModelParams,
    ds: &DataSpec,
    policy: &PlanPolicy,
    l_amp: f64,
    m_halfwidth: u64,
) -> Result<BlowupPlan> {
    if (params.rho_bar - 1.0).abs() > 1e-14 {
        return Err(Error::config(format!(
            "plan construction requires unit background density, got {}",
            params.rho_bar
        )));
    }
    ds.validate(params.rho_bar)?;
    let rho_min = ds.rho_min(params.rho_bar);
    let rho_max = ds.rho_max(params.rho_bar);
    let st = sigma_tilde(params, rho_min, rho_max);

    let bare = InitialData::without_velocity(ds, params.rho_bar)?;
    let h0 = compute_h0(&bare, params, policy.cells_per_unit)?;
    let excess = mass_excess(&bare, policy.cells_per_unit)?;

    let spec = ProfileSpec::new(l_amp, m_halfwidth, ds.r_support)?;
    let m = spec.m();
    let norm_sq = profile_norm_sq(&spec);
    let data = InitialData::planned(ds, &spec, ProfileVariant::Corrected, params.rho_bar)?;
    let f0 = initial_moment(&data, policy.cells_per_unit)?;

    let large_rhs = (8.0 * rho_max).sqrt().max(16.0 * st * rho_max);
    let f0_threshold = (16.0 * st * m * m * rho_max).max(m * m * (8.0 * rho_max).sqrt());

    let c2 = st / m;
    let c3 = 1.0 / (2.0 * rho_max * m * m * m);
    let c1 = 2.0 * c2 / c3;
    let c4 = h0 / (2.0 * c1 * c1);
    let c5 = rho_max / (4.0 * c1 * c1);

    let chain_mid = c3 * c3 / (8.0 * c2 * c2) * (h0 + rho_max * l_amp * l_amp * m);

    let mm = policy.rel_margin;
    let checks = vec![
        PlanCheck::new("initial_mass", excess, 0.0, Sense::AtLeast, mm),
        PlanCheck::new(
            "large_data",
            large_rhs,
            0.5 * l_amp * rho_min,
            Sense::StrictLess,
            mm,
        ),
        PlanCheck::new(
            "support_bound",
            h0 + rho_max * l_amp * l_amp * m,
            2.0 * st * m * m * rho_max,
            Sense::AtMost,
            mm,
        ),
        PlanCheck::new("moment_threshold", f0_threshold, f0, Sense::StrictLess, mm),
        PlanCheck::new(
            "chain_lower",
            c4 + c5 * norm_sq,
            chain_mid,
            Sense::AtMost,
            mm,
        ),
        PlanCheck::new("chain_upper", chain_mid, c3 / (8.0 * c2), Sense::AtMost, mm),
        PlanCheck::new("moment_anchor", f0, 2.0 * c1, Sense::AtLeast, mm),
        PlanCheck::new(
            "moment_sq_anchor",
            f0 * f0,
            4.0 * m / c3,
            Sense::AtLeast,
            mm,
        ),
        PlanCheck::new("critical_moment", 8.0 * c2 / c3, f0, Sense::StrictLess, mm),
        PlanCheck::new(
            "deadline_defined",
            1.0 / f0,
            c3 / (8.0 * c2),
            Sense::StrictLess,
            mm,
        ),
    ];

    if let Some(bad) = checks.iter().find(|c| !c.pass) {
        return Err(Error::Infeasible {
            constraint: "plan_check",
            detail: format!(
                "{} requires {:.9e} {} {:.9e} (margin {:.3e})",
                bad.name,
                bad.lhs,
                bad.sense.as_str(),
                bad.rhs,
                bad.margin
            ),
        });
    }

    let t_star = blowup_deadline(c2, c3, f0)?;

    Ok(BlowupPlan {
        gamma: params.gamma,
        tau: params.tau,
        rho_bar: params.rho_bar,
        rho_min,
        rho_max,
        r_support: ds.r_support,
        sigma_tilde: st,
        l_amp,
        m_halfwidth,
        h0,
        norm_sq,
        f0,
        f0_threshold,
        c1,
        c2,
        c3,
        c4,
        c5,
        t_star,
        checks,
        admissible: true,
    })
}

/// Choose the smallest admissible `(L, M)` for the given data, then assemble
/// the plan.
pub fn plan(params: &ModelParams, ds: &DataSpec, policy: &PlanPolicy) -> Result<BlowupPlan> {
    if (params.rho_bar - 1.0).abs() > 1e-14 {
        return Err(Error::config(format!(
            "plan construction requires unit background density, got {}",
            params.rho_bar
        )));
    }
    ds.validate(params.rho_bar)?;
    let rho_min = ds.rho_min(params.rho_bar);
    let rho_max = ds.rho_max(params.rho_bar);
    let st = sigma_tilde(params, rho_min, rho_max);

    // Amplitude: smallest even integer L with (L/2) rho_min strictly above
    // the large-data threshold.
    let large_rhs = (8.0 * rho_max).sqrt().max(16.0 * st * rho_max);
    let half = (large_rhs * (1.0 + policy.rel_margin) / rho_min).floor() as u64 + 1;
    let l_amp = (2 * half) as f64;

    // Half-width: smallest even integer M >= max(4, r_support) satisfying
    // the support bound H0 + rho_max L^2 M <= 2 sigma_tilde M^2 rho_max.
    let bare = InitialData::without_velocity(ds, params.rho_bar)?;
    let h0 = compute_h0(&bare, params, policy.cells_per_unit)?;
    let mut m = (ds.r_support.ceil() as u64).max(4);
    if m % 2 == 1 {
        m += 1;
    }
    loop {
        let mf = m as f64;
        let lhs = h0 + rho_max * l_amp * l_amp * mf;
        let rhs = 2.0 * st * mf * mf * rho_max;
        if lhs <= rhs * (1.0 - policy.rel_margin) {
            break;
        }
        m += 2;
        if m > policy.max_m {
            return Err(Error::Infeasible {
                constraint: "support_bound",
                detail: format!(
                    "no admissible half-width below {} (H0 = {h0:.6e}, L = {l_amp})",
                    policy.max_m
                ),
            });
        }
    }

    plan_at(params, ds, policy, l_amp, m)
}

// ============================================================================
// Tests
// ============================================================================
