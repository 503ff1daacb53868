//! Run diagnostics: the averaged functionals of the breakdown argument and
//! the numerical checks of every relation the theory asserts about them.
//!
//! All spatial functionals use the midpoint rule on cell averages — the same
//! quadrature order as the finite-volume discretization — with compensated
//! sequential summation so records are deterministic and accurate to a few
//! ulps. Cumulative dissipation is accumulated with the trapezoid rule in
//! record order.

use crate::error::{Error, Result};
use crate::exec;
use crate::model::{entropy_density, pressure, ModelParams, PointState};
use crate::solver::Field;

/// One row of the diagnostic series.
///
/// CSV column order is fixed:
/// `t, mass_dev, total_mom, F, E, D, D_cum, support_radius, max_grad, min_rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagRecord {
    pub t: f64,
    /// `m(t) = ∫ (rho - rho_bar) dx`.
    pub mass_dev: f64,
    /// `∫ rho u dx`.
    pub total_mom: f64,
    /// Weighted momentum `F(t) = ∫ x rho u dx`.
    pub f_moment: f64,
    /// Total entropy `E(t) = ∫ eta dx`.
    pub entropy: f64,
    /// Instantaneous dissipation `D(t) = ∫ S^2 dx`.
    pub dissipation: f64,
    /// `∫_0^t D ds`, trapezoid-accumulated in record order.
    pub d_cum: f64,
    /// Largest `|x_i|` whose cell deviates from equilibrium beyond
    /// `eps_support` in the ∞-norm of `(rho - rho_bar, u, S)`; 0 if none.
    pub support_radius: f64,
    /// `max_i |u_{i+1} - u_i| / dx`.
    pub max_grad: f64,
    pub min_rho: f64,
}

/// Measure a field snapshot with an externally supplied cumulative
/// dissipation (use [`Recorder`] to accumulate it).
pub fn measure(
    field: &Field,
    params: &ModelParams,
    eps_support: f64,
    d_cum: f64,
) -> Result<DiagRecord> {
    let n = field.grid.n_cells;
    let dx = field.grid.dx;
    for (i, c) in field.cells.iter().enumerate() {
        if !c.is_finite() || !(c.rho > 0.0) {
            return Err(Error::Diagnostics(format!(
                "cell at x = {} is not an admissible state (rho = {})",
                field.grid.center(i),
                c.rho
            )));
        }
    }
    let prim: Vec<PointState> = field
        .cells
        .iter()
        .map(|c| PointState {
            rho: c.rho,
            u: c.mom / c.rho,
            s: c.rw / c.rho,
        })
        .collect();

    let rho_bar = params.rho_bar;
    let mass_dev = exec::kahan_sum(prim.iter().map(|p| p.rho - rho_bar)) * dx;
    let total_mom = exec::kahan_sum(field.cells.iter().map(|c| c.mom)) * dx;
    let f_moment = exec::kahan_sum(
        field
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| field.grid.center(i) * c.mom),
    ) * dx;
    let mut entropy = 0.0;
    let mut carry = 0.0;
    for p in &prim {
        let term = entropy_density(*p, params)? - carry;
        let next = entropy + term;
        carry = (next - entropy) - term;
        entropy = next;
    }
    let entropy = entropy * dx;
    let dissipation = exec::kahan_sum(prim.iter().map(|p| p.s * p.s)) * dx;

    let mut support_radius = 0.0_f64;
    let mut min_rho = f64::INFINITY;
    for (i, p) in prim.iter().enumerate() {
        let dev = (p.rho - rho_bar).abs().max(p.u.abs()).max(p.s.abs());
        if dev > eps_support {
            support_radius = support_radius.max(field.grid.center(i).abs());
        }
        min_rho = min_rho.min(p.rho);
    }
    let mut max_grad = 0.0_f64;
    for i in 0..n.saturating_sub(1) {
        max_grad = max_grad.max((prim[i + 1].u - prim[i].u).abs());
    }
    max_grad /= dx;

    Ok(DiagRecord {
        t: field.time,
        mass_dev,
        total_mom,
        f_moment,
        entropy,
        dissipation,
        d_cum,
        support_radius,
        max_grad,
        min_rho,
    })
}

/// Stateful series builder: measures snapshots and accumulates `D_cum` with
/// the trapezoid rule in record order.
pub struct Recorder {
    params: ModelParams,
    eps_support: f64,
    d_cum: f64,
    prev: Option<(f64, f64)>,
    pub records: Vec<DiagRecord>,
}

impl Recorder {
    pub fn new(params: ModelParams, eps_support: f64) -> Self {
        Recorder {
            params,
            eps_support,
            d_cum: 0.0,
            prev: None,
            records: Vec::new(),
        }
    }

    pub fn record(&mut self, field: &Field) -> Result<DiagRecord> {
        if let Some((t0, _)) = self.prev {
            if field.time < t0 {
                return Err(Error::Diagnostics(format!(
                    "records must advance in time: {t0} then {}",
                    field.time
                )));
            }
        }
        let mut rec = measure(field, &self.params, self.eps_support, self.d_cum)?;
        if let Some((t0, d0)) = self.prev {
            self.d_cum += 0.5 * (d0 + rec.dissipation) * (rec.t - t0);
            rec.d_cum = self.d_cum;
        }
        self.prev = Some((rec.t, rec.dissipation));
        self.records.push(rec);
        Ok(rec)
    }
}

/// Uniform result of one verification check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    /// False when the check does not apply to this run (reported, not failed).
    pub applicable: bool,
    pub passed: bool,
    /// Smallest signed margin observed (positive = satisfied with room).
    pub worst_margin: f64,
    pub detail: String,
}

impl CheckReport {
    /// Passing report with the given worst margin.
    pub fn pass(name: &str, margin: f64, detail: String) -> Self {
        CheckReport {
            name: name.to_string(),
            applicable: true,
            passed: true,
            worst_margin: margin,
            detail,
        }
    }

    /// Failing report with the given worst margin.
    pub fn fail(name: &str, margin: f64, detail: String) -> Self {
        CheckReport {
            name: name.to_string(),
            applicable: true,
            passed: false,
            worst_margin: margin,
            detail,
        }
    }

    /// Report for a check that does not apply to the run at hand.
    pub fn not_applicable(name: &str, detail: String) -> Self {
        CheckReport {
            name: name.to_string(),
            applicable: false,
            passed: true,
            worst_margin: f64::INFINITY,
            detail,
        }
    }
}

/// A record counts as smooth when its max gradient is below half the
/// blow-up detector threshold.
pub fn is_smooth(rec: &DiagRecord, max_grad_limit: f64) -> bool {
    rec.max_grad < 0.5 * max_grad_limit
}

/// Per-interval residuals of the integrated entropy balance:
/// `[E(t_{k+1}) - E(t_k)]/dt + (D(t_{k+1}) + D(t_k))/2`.
///
/// Near zero while the solution is smooth; nonpositive (up to rounding) for
/// the dissipative scheme in general.
pub fn entropy_balance_residual(records: &[DiagRecord]) -> Result<Vec<f64>> {
    if records.len() < 2 {
        return Err(Error::Diagnostics(
            "entropy balance needs at least two records".to_string(),
        ));
    }
    let mut out = Vec::with_capacity(records.len() - 1);
    for w in records.windows(2) {
        let dt = w[1].t - w[0].t;
        if !(dt > 0.0) {
            return Err(Error::Diagnostics(format!(
                "records must be strictly increasing in time ({} then {})",
                w[0].t, w[1].t
            )));
        }
        out.push((w[1].entropy - w[0].entropy) / dt + 0.5 * (w[1].dissipation + w[0].dissipation));
    }
    Ok(out)
}

/// `E(t) + D_cum(t) <= E(0) + 1e-8 max(1, E(0))` at every record.
pub fn entropy_budget_check(records: &[DiagRecord]) -> CheckReport {
    let name = "entropy_budget";
    if records.is_empty() {
        return CheckReport::not_applicable(name, "no records".to_string());
    }
    let e0 = records[0].entropy;
    let slack = 1e-8 * e0.abs().max(1.0);
    let bound = e0 + slack;
    let mut worst = f64::INFINITY;
    let mut worst_t = records[0].t;
    for r in records {
        let margin = (bound - (r.entropy + r.d_cum)) / e0.abs().max(1.0);
        if margin < worst {
            worst = margin;
            worst_t = r.t;
        }
    }
    let detail = format!("E + D_cum vs E(0) = {e0:.6e}; tightest at t = {worst_t:.6e}");
    if worst >= 0.0 {
        CheckReport::pass(name, worst, detail)
    } else {
        CheckReport::fail(name, worst, detail)
    }
}

/// Mass deviation and total momentum constant across records to `1e-10`
/// relative to the supplied mass scale (typically `rho_bar * domain length`).
pub fn conservation_check(records: &[DiagRecord], mass_scale: f64) -> CheckReport {
    let name = "conservation";
    if records.is_empty() {
        return CheckReport::not_applicable(name, "no records".to_string());
    }
    let scale = mass_scale.abs().max(1.0);
    let tol = 1e-10;
    let m0 = records[0].mass_dev;
    let p0 = records[0].total_mom;
    let mut worst = f64::INFINITY;
    let mut what = String::new();
    for r in records {
        let dm = (r.mass_dev - m0).abs() / scale;
        let dp = (r.total_mom - p0).abs() / scale;
        let margin = tol - dm.max(dp);
        if margin < worst {
            worst = margin;
            what = format!(
                "at t = {:.6e}: |Δm| = {dm:.3e}, |ΔP| = {dp:.3e} (relative, tol {tol:.0e})",
                r.t
            );
        }
    }
    if worst >= 0.0 {
        CheckReport::pass(name, worst / tol, what)
    } else {
        CheckReport::fail(name, worst / tol, what)
    }
}

/// Dissipation bound `D(t) <= H0 + (rho_max / 2) * norm_sq` at every record.
pub fn s2_bound_check(records: &[DiagRecord], h0: f64, rho_max: f64, norm_sq: f64) -> CheckReport {
    let name = "s2_bound";
    let bound = h0 + 0.5 * rho_max * norm_sq;
    let mut worst = f64::INFINITY;
    let mut worst_t = f64::NAN;
    for r in records {
        let margin = (bound - r.dissipation) / bound.abs().max(1.0);
        if margin < worst {
            worst = margin;
            worst_t = r.t;
        }
    }
    let detail = format!("D vs bound {bound:.6e}; tightest at t = {worst_t:.6e}");
    if records.is_empty() {
        CheckReport::not_applicable(name, "no records".to_string())
    } else if worst >= 0.0 {
        CheckReport::pass(name, worst, detail)
    } else {
        CheckReport::fail(name, worst, detail)
    }
}

/// Support cone: `support_radius(t) <= max(R, M) + sigma_tilde t + 10 dx`.
pub fn cone_check(
    records: &[DiagRecord],
    r_data: f64,
    m_halfwidth: f64,
    sigma_tilde: f64,
    dx: f64,
) -> CheckReport {
    let name = "propagation_cone";
    if records.is_empty() {
        return CheckReport::not_applicable(name, "no records".to_string());
    }
    let base = r_data.max(m_halfwidth);
    let mut worst = f64::INFINITY;
    let mut worst_t = f64::NAN;
    let mut max_overshoot = f64::NEG_INFINITY;
    for r in records {
        let allowed = base + sigma_tilde * r.t + 10.0 * dx;
        let margin = (allowed - r.support_radius) / allowed;
        max_overshoot = max_overshoot.max(r.support_radius - (base + sigma_tilde * r.t));
        if margin < worst {
            worst = margin;
            worst_t = r.t;
        }
    }
    let detail = format!(
        "max overshoot past the exact cone: {max_overshoot:.6e} (allowance 10 dx = {:.6e}); tightest at t = {worst_t:.6e}",
        10.0 * dx
    );
    if worst >= 0.0 {
        CheckReport::pass(name, worst, detail)
    } else {
        CheckReport::fail(name, worst, detail)
    }
}

/// Largest overshoot of the numerical support past the exact cone
/// `max(R, M) + sigma_tilde t` over all records (refinement studies).
pub fn cone_overshoot(
    records: &[DiagRecord],
    r_data: f64,
    m_halfwidth: f64,
    sigma_tilde: f64,
) -> f64 {
    let base = r_data.max(m_halfwidth);
    records
        .iter()
        .map(|r| r.support_radius - (base + sigma_tilde * r.t))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The two spatial integrals entering the `F'` identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FMomentRhs {
    /// `∫ rho u^2 + (p(rho) - p(rho_bar)) - S dx`.
    pub total: f64,
    /// `∫ rho u^2 dx` alone (for the weakened inequality).
    pub kinetic: f64,
}

/// Evaluate the `F'` identity right-hand side on a snapshot.
pub fn f_identity_rhs(field: &Field, params: &ModelParams) -> Result<FMomentRhs> {
    let dx = field.grid.dx;
    let p_bar = pressure(params.rho_bar, params.gamma)?;
    let mut total = 0.0;
    let mut tc = 0.0;
    let mut kinetic = 0.0;
    let mut kc = 0.0;
    for (i, c) in field.cells.iter().enumerate() {
        if !c.is_finite() || !(c.rho > 0.0) {
            return Err(Error::Diagnostics(format!(
                "cell at x = {} is not an admissible state (rho = {})",
                field.grid.center(i),
                c.rho
            )));
        }
        let u = c.mom / c.rho;
        let s = c.rw / c.rho;
        let k = c.rho * u * u;
        let v = k + (c.rho.powf(params.gamma) - p_bar) - s;

        let term = v - tc;
        let next = total + term;
        tc = (next - total) - term;
        total = next;

        let term = k - kc;
        let next = kinetic + term;
        kc = (next - kinetic) - term;
        kinetic = next;
    }
    Ok(FMomentRhs {
        total: total * dx,
        kinetic: kinetic * dx,
    })
}

/// `F'` identity check on a record series with per-record right-hand sides
/// sampled from the same snapshots:
///
/// * central-difference `dF/dt` matches `rhs.total` within 5% relative on
///   smooth intervals, and
/// * the weakened inequality `F' >= ∫ rho u^2 - D/2 - (M + sigma_tilde t)`
///   holds at every smooth record.
pub fn f_identity_check(
    records: &[DiagRecord],
    rhs: &[FMomentRhs],
    m_halfwidth: f64,
    sigma_tilde: f64,
    max_grad_limit: f64,
) -> Result<CheckReport> {
    let name = "f_identity";
    if records.len() != rhs.len() {
        return Err(Error::Diagnostics(format!(
            "rhs samples ({}) do not match records ({})",
            rhs.len(),
            records.len()
        )));
    }
    if records.len() < 3 {
        return Ok(CheckReport::not_applicable(
            name,
            "needs at least three records".to_string(),
        ));
    }
    let mut worst = f64::INFINITY;
    let mut detail = String::from("no smooth interior records");
    let mut checked = 0usize;
    for k in 1..records.len() - 1 {
        if !(is_smooth(&records[k - 1], max_grad_limit)
            && is_smooth(&records[k], max_grad_limit)
            && is_smooth(&records[k + 1], max_grad_limit))
        {
            continue;
        }
        let dt = records[k + 1].t - records[k - 1].t;
        if !(dt > 0.0) {
            return Err(Error::Diagnostics(
                "records not increasing in time".to_string(),
            ));
        }
        let dfdt = (records[k + 1].f_moment - records[k - 1].f_moment) / dt;
        let scale = rhs[k]
            .total
            .abs()
            .max(1e-8 * records[k].f_moment.abs().max(1.0));
        let rel = (dfdt - rhs[k].total).abs() / scale;
        let ident_margin = (0.05 - rel) / 0.05;

        let weak_rhs = rhs[k].kinetic
            - 0.5 * records[k].dissipation
            - (m_halfwidth + sigma_tilde * records[k].t);
        let weak_scale = weak_rhs.abs().max(dfdt.abs()).max(1.0);
        let weak_margin = (dfdt - weak_rhs) / weak_scale + 1e-9;

        let margin = ident_margin.min(weak_margin);
        checked += 1;
        if margin < worst {
            worst = margin;
            detail = format!(
                "t = {:.6e}: dF/dt = {dfdt:.6e}, rhs = {:.6e} (rel err {rel:.3e}), weakened floor {weak_rhs:.6e}",
                records[k].t, rhs[k].total
            );
        }
    }
    if checked == 0 {
        return Ok(CheckReport::not_applicable(
            name,
            "no smooth interior records".to_string(),
        ));
    }
    Ok(if worst >= 0.0 {
        CheckReport::pass(name, worst, detail)
    } else {
        CheckReport::fail(name, worst, detail)
    })
}

/// Constants of the moment envelope (from the plan).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// May be zero (data with vanishing relative entropy).
    pub c4: f64,
    pub c5: f64,
    pub f0: f64,
    pub norm_sq: f64,
    pub m_halfwidth: f64,
}

impl EnvelopeParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            self.c1,
            self.c2,
            self.c3,
            self.c5,
            self.f0,
            self.norm_sq,
            self.m_halfwidth,
        ];
        if pos.iter().any(|v| !(*v > 0.0) || !v.is_finite()) || !(self.c4 >= 0.0) {
            return Err(Error::config(format!(
                "invalid envelope constants {self:?}"
            )));
        }
        Ok(())
    }
}

/// Lower envelope for `F(t)`, or notice that it has escaped to infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvelopeValue {
    Bounded(f64),
    /// The comparison bracket is nonpositive: every smooth continuation
    /// must have blown up by this time.
    Escaped,
}

/// `F(t) >= [F0^{-1} + c3/(4 c2 (1+c2 t)^2) - c3/(4 c2) + c4 + c5 norm_sq]^{-1}`
/// while the bracket is positive.
pub fn riccati_envelope(t: f64, env: &EnvelopeParams) -> EnvelopeValue {
    let damp = 1.0 + env.c2 * t;
    let bracket = 1.0 / env.f0 + env.c3 / (4.0 * env.c2 * damp * damp) - env.c3 / (4.0 * env.c2)
        + env.c4
        + env.c5 * env.norm_sq;
    if bracket <= 0.0 {
        EnvelopeValue::Escaped
    } else {
        EnvelopeValue::Bounded(1.0 / bracket)
    }
}

/// One-sided envelope comparison `F(t) >= envelope(t) - 1% F(t)` at smooth
/// records.
pub fn envelope_check(
    records: &[DiagRecord],
    env: &EnvelopeParams,
    max_grad_limit: f64,
) -> CheckReport {
    let name = "riccati_envelope";
    let mut worst = f64::INFINITY;
    let mut detail = String::from("no smooth records");
    let mut checked = 0usize;
    for r in records {
        if !is_smooth(r, max_grad_limit) {
            continue;
        }
        checked += 1;
        let margin = match riccati_envelope(r.t, env) {
            EnvelopeValue::Bounded(e) => (r.f_moment * 1.01 - e) / e.abs().max(1.0),
            EnvelopeValue::Escaped => -1.0,
        };
        if margin < worst {
            worst = margin;
            detail = format!(
                "t = {:.6e}: F = {:.6e} vs envelope {}",
                r.t,
                r.f_moment,
                match riccati_envelope(r.t, env) {
                    EnvelopeValue::Bounded(e) => format!("{e:.6e}"),
                    EnvelopeValue::Escaped => "escaped".to_string(),
                }
            );
        }
    }
    if checked == 0 {
        CheckReport::not_applicable(name, detail)
    } else if worst >= 0.0 {
        CheckReport::pass(name, worst, detail)
    } else {
        CheckReport::fail(name, worst, detail)
    }
}

/// The two a-priori inequalities at every smooth record:
/// `F(t) >= c1` and `M (1 + c2 t) <= c3 F(t)^2 / (2 (1 + c2 t)^3)`.
///
/// Runs whose initial moment does not clear the `2 c1` anchor are reported
/// as "not a certified breakdown run" rather than failed.
pub fn apriori_check(
    records: &[DiagRecord],
    env: &EnvelopeParams,
    max_grad_limit: f64,
) -> CheckReport {
    let name = "apriori";
    if env.f0 < 2.0 * env.c1 {
        return CheckReport::not_applicable(
            name,
            format!(
                "not a certified breakdown run: F(0) = {:.6e} below the anchor 2 c1 = {:.6e}",
                env.f0,
                2.0 * env.c1
            ),
        );
    }
    let mut worst = f64::INFINITY;
    let mut detail = String::from("no smooth records");
    let mut checked = 0usize;
    for r in records {
        if !is_smooth(r, max_grad_limit) {
            continue;
        }
        checked += 1;
        let m1 = (r.f_moment - env.c1) / env.c1 + 1e-12;
        let damp = 1.0 + env.c2 * r.t;
        let lhs = env.m_halfwidth * damp;
        let rhs = env.c3 * r.f_moment * r.f_moment / (2.0 * damp.powi(3));
        let m2 = (rhs - lhs) / rhs.abs().max(lhs.abs()).max(1.0) + 1e-12;
        let margin = m1.min(m2);
        if margin < worst {
            worst = margin;
            detail = format!(
                "t = {:.6e}: F = {:.6e} vs c1 = {:.6e}; moment-square side {rhs:.6e} vs {lhs:.6e}",
                r.t, r.f_moment, env.c1
            );
        }
    }
    if checked == 0 {
        CheckReport::not_applicable(name, detail)
    } else if worst >= 0.0 {
        CheckReport::pass(name, worst, detail)
    } else {
        CheckReport::fail(name, worst, detail)
    }
}

/// Both sides of the Cauchy-Schwarz bound for the weighted momentum,
/// evaluated over the discrete proof set `B_t` (cells with centers
/// `|x_i| < bt_radius`): `(∫_B x rho u)^2 <= (∫_B x^2 rho)(∫_B rho u^2)`.
pub fn holder_sides(field: &Field, bt_radius: f64) -> Result<(f64, f64)> {
    let dx = field.grid.dx;
    let mut fb = 0.0;
    let mut fc = 0.0;
    let mut xxr = 0.0;
    let mut xc = 0.0;
    let mut kin = 0.0;
    let mut kc = 0.0;
    for (i, c) in field.cells.iter().enumerate() {
        let x = field.grid.center(i);
        if x.abs() >= bt_radius {
            continue;
        }
        if !c.is_finite() || !(c.rho > 0.0) {
            return Err(Error::Diagnostics(format!(
                "cell at x = {x} is not an admissible state (rho = {})",
                c.rho
            )));
        }
        let u = c.mom / c.rho;

        let term = x * c.mom - fc;
        let next = fb + term;
        fc = (next - fb) - term;
        fb = next;

        let term = x * x * c.rho - xc;
        let next = xxr + term;
        xc = (next - xxr) - term;
        xxr = next;

        let term = c.rho * u * u - kc;
        let next = kin + term;
        kc = (next - kin) - term;
        kin = next;
    }
    let f_b = fb * dx;
    Ok((f_b * f_b, (xxr * dx) * (kin * dx)))
}

/// Cauchy-Schwarz consistency with `1e-10` relative slack.
pub fn holder_check(field: &Field, bt_radius: f64) -> Result<CheckReport> {
    let (lhs, rhs) = holder_sides(field, bt_radius)?;
    let scale = rhs.abs().max(1.0);
    let margin = (rhs * (1.0 + 1e-10) - lhs) / scale;
    let detail = format!(
        "t = {:.6e}: F_B^2 = {lhs:.6e} vs product {rhs:.6e}",
        field.time
    );
    Ok(if margin >= 0.0 {
        CheckReport::pass("holder", margin, detail)
    } else {
        CheckReport::fail("holder", margin, detail)
    })
}

/// Midpoint value of `∫_{B_t} (p(rho) - p(rho_bar)) dx`; nonnegative up to
/// `1e-10` whenever the initial mass condition holds.
pub fn jensen_integral(field: &Field, params: &ModelParams, bt_radius: f64) -> Result<f64> {
    let dx = field.grid.dx;
    let p_bar = pressure(params.rho_bar, params.gamma)?;
    let mut sum = 0.0;
    let mut carry = 0.0;
    for (i, c) in field.cells.iter().enumerate() {
        let x = field.grid.center(i);
        if x.abs() >= bt_radius {
            continue;
        }
        if !c.is_finite() || !(c.rho > 0.0) {
            return Err(Error::Diagnostics(format!(
                "cell at x = {x} is not an admissible state (rho = {})",
                c.rho
            )));
        }
        let term = (c.rho.powf(params.gamma) - p_bar) - carry;
        let next = sum + term;
        carry = (next - sum) - term;
        sum = next;
    }
    Ok(sum * dx)
}

/// Jensen consistency check for one snapshot (applicable when the record's
/// mass deviation is nonnegative up to rounding).
pub fn jensen_check(
    field: &Field,
    params: &ModelParams,
    bt_radius: f64,
    mass_dev: f64,
) -> Result<CheckReport> {
    let name = "jensen";
    if mass_dev < -1e-10 {
        return Ok(CheckReport::not_applicable(
            name,
            format!("mass deviation {mass_dev:.3e} is negative"),
        ));
    }
    let v = jensen_integral(field, params, bt_radius)?;
    let margin = v + 1e-10;
    let detail = format!("t = {:.6e}: ∫_B (p - p̄) = {v:.6e}", field.time);
    Ok(if margin >= 0.0 {
        CheckReport::pass(name, margin, detail)
    } else {
        CheckReport::fail(name, margin, detail)
    })
}

// ============================================================================
// Tests
// ============================================================================
