//! Conservative finite-volume evolution with split relaxation.
//!
//! The homogeneous balance law is advanced with a local Lax-Friedrichs
//! interface flux (order 1) or MUSCL/minmod reconstruction with a midpoint
//! predictor (order 2); the stiff source is integrated exactly per cell with
//! the coefficients frozen over the step. Boundaries are fixed equilibrium
//! ghost cells guarded by a hard breach detector: a run whose waves touch
//! the domain edge aborts instead of silently reflecting.
//!
//! Density positivity is never enforced by clamping — a non-positive or
//! non-finite cell is reported as a detected singularity, since loss of
//! regularity is exactly what the harness is instrumented to observe.

use crate::error::{Error, Result};
use crate::exec;
use crate::model::{
    physical_flux, to_conservative, ConsTriple, FluxTriple, ModelParams, PointState,
};
use crate::planner::InitialData;

/// Uniform cell-centered grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub dx: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::config(format!("invalid domain [{x_min}, {x_max}]")));
        }
        if n_cells == 0 {
            return Err(Error::config("grid needs at least one cell".to_string()));
        }
        Ok(Grid {
            x_min,
            x_max,
            n_cells,
            dx: (x_max - x_min) / n_cells as f64,
        })
    }

    /// Symmetric grid around the origin with the exact requested spacing;
    /// the half-extent is rounded up to a whole number of cells.
    pub fn symmetric(half_extent: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() || !(half_extent > 0.0) {
            return Err(Error::config(format!(
                "invalid symmetric grid: half extent {half_extent}, dx {dx}"
            )));
        }
        let n = (2.0 * half_extent / dx - 1e-9).ceil().max(1.0) as usize;
        let half = n as f64 * dx * 0.5;
        Ok(Grid {
            x_min: -half,
            x_max: half,
            n_cells: n,
            dx,
        })
    }

    /// Symmetric grid large enough for the propagation cone of data reaching
    /// to `|x| = reach`, plus a safety margin (default `20 dx + 2`).
    pub fn cone_sized(
        reach: f64,
        sigma_tilde: f64,
        t_end: f64,
        dx: f64,
        margin: Option<f64>,
    ) -> Result<Self> {
        let margin = margin.unwrap_or(20.0 * dx + 2.0);
        if !(margin >= 0.0) {
            return Err(Error::config(format!("negative margin {margin}")));
        }
        Grid::symmetric(reach + sigma_tilde * t_end + margin, dx)
    }

    /// Center of cell `i`.
    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx
    }
}

/// One time slice of the simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub cells: Vec<ConsTriple>,
    pub time: f64,
}

impl Field {
    /// Primitive state of cell `i`; errors on non-positive density.
    pub fn primitive(&self, i: usize) -> Result<PointState> {
        crate::model::to_primitive(self.cells[i])
    }
}

/// Cell-average velocities `mom / rho` of the whole field.
pub fn velocity_field(field: &Field) -> Vec<f64> {
    let cells = &field.cells;
    exec::map_indexed(cells.len(), |i| cells[i].mom / cells[i].rho)
}

/// Spatial scheme order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeOrder {
    One,
    Two,
}

/// Source-splitting scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Splitting {
    /// Hyperbolic step then full relaxation step.
    Godunov,
    /// Half relaxation, hyperbolic, half relaxation.
    Strang,
}

/// Run controls and detector thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub params: ModelParams,
    pub cfl: f64,
    pub t_end: f64,
    pub order: SchemeOrder,
    pub splitting: Splitting,
    /// Observer cadence in steps (the initial and final states are always
    /// reported).
    pub record_every: u64,
    /// Deviation threshold defining the numerical support.
    pub eps_support: f64,
    /// Velocity-gradient detector: max |Δu|/dx beyond this is blow-up.
    pub max_grad_limit: f64,
    /// Density-floor detector: min rho below this is blow-up.
    pub min_rho_limit: f64,
    /// Optional cap on dt (time-convergence studies).
    pub dt_override: Option<f64>,
}

impl SimConfig {
    /// Config with conventional defaults; detector thresholds are permissive
    /// and should be tightened for blow-up studies.
    pub fn new(params: ModelParams, t_end: f64) -> Self {
        SimConfig {
            params,
            cfl: 0.4,
            t_end,
            order: SchemeOrder::Two,
            splitting: Splitting::Strang,
            record_every: 1,
            eps_support: 1e-6,
            max_grad_limit: 1e7,
            min_rho_limit: 1e-8,
            dt_override: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::config(format!(
                "cfl must be in (0,1), got {}",
                self.cfl
            )));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::config(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.record_every == 0 {
            return Err(Error::config("record_every must be at least 1".to_string()));
        }
        if !(self.eps_support > 0.0) {
            return Err(Error::config(format!(
                "eps_support must be positive, got {}",
                self.eps_support
            )));
        }
        if !(self.max_grad_limit > 0.0) || !(self.min_rho_limit >= 0.0) {
            return Err(Error::config(format!(
                "detector thresholds must be positive: grad {}, rho {}",
                self.max_grad_limit, self.min_rho_limit
            )));
        }
        if let Some(dt) = self.dt_override {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::config(format!(
                    "dt override must be positive, got {dt}"
                )));
            }
        }
        Ok(())
    }
}

/// Detected loss of regularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupSignal {
    pub time: f64,
    pub x: f64,
    pub kind: BlowupKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowupKind {
    NonFinite,
    NonPositiveDensity,
    DensityFloor,
    GradientLimit,
}

/// Terminal state of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    Completed,
    BlowUp(BlowupSignal),
    BoundaryBreach { time: f64, x: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub outcome: RunOutcome,
    pub steps: u64,
    pub final_time: f64,
}

/// Project initial data onto the grid: 4-point midpoint cell averages of
/// `(rho0, rho0 u0, rho0 S0)`; cells entirely outside the data support are
/// set to the exact equilibrium triple.
pub fn init_state(grid: &Grid, data: &InitialData) -> Result<Field> {
    let sup = data.support_radius;
    if sup > 0.0 {
        if grid.x_min > -sup || grid.x_max < sup {
            return Err(Error::config(format!(
                "domain [{}, {}] does not cover the data support radius {sup}",
                grid.x_min, grid.x_max
            )));
        }
        // Ramps of the velocity profile have unit length: require at least
        // 16 cells across them.
        if grid.dx > 1.0 / 16.0 + 1e-12 {
            return Err(Error::config(format!(
                "dx = {} too coarse for profiled data (need at least 16 cells per unit)",
                grid.dx
            )));
        }
    }
    let eq = ConsTriple::equilibrium(data.rho_bar);
    let dx = grid.dx;
    let cells: Vec<ConsTriple> = (0..grid.n_cells)
        .map(|i| {
            let xc = grid.center(i);
            if xc + 0.5 * dx <= -sup || xc - 0.5 * dx >= sup {
                return eq;
            }
            let mut acc = ConsTriple {
                rho: 0.0,
                mom: 0.0,
                rw: 0.0,
            };
            for k in 0..4 {
                let x = xc + dx * ((k as f64 + 0.5) / 4.0 - 0.5);
                let rho = data.rho0(x);
                let u = data.u0(x);
                let s = data.s0(x);
                acc = acc + to_conservative(PointState { rho, u, s });
            }
            acc * 0.25
        })
        .collect();
    for (i, c) in cells.iter().enumerate() {
        if !(c.rho > 0.0) || !c.is_finite() {
            return Err(Error::domain(format!(
                "initial data produces inadmissible density {} at x = {}",
                c.rho,
                grid.center(i)
            )));
        }
    }
    Ok(Field {
        grid: *grid,
        cells,
        time: 0.0,
    })
}

/// CFL time step `cfl * dx / max_i (|u_i| + a(rho_i))`.
pub fn stable_dt(field: &Field, cfg: &SimConfig) -> Result<f64> {
    let p = cfg.params;
    let cells = &field.cells;
    for (i, c) in cells.iter().enumerate() {
        if !(c.rho > 0.0) || !c.is_finite() {
            return Err(Error::domain(format!(
                "stable_dt on inadmissible cell {i}: rho = {}",
                c.rho
            )));
        }
    }
    let vmax = exec::max_indexed(cells.len(), |i| {
        let c = cells[i];
        // a(rho)^2 = p'(rho) + 1/(tau rho^2); cells are pre-validated, so
        // the closed form is evaluated directly.
        let a2 = p.gamma * c.rho.powf(p.gamma - 1.0) + 1.0 / (p.tau * c.rho * c.rho);
        (c.mom / c.rho).abs() + a2.sqrt()
    });
    if !vmax.is_finite() || !(vmax > 0.0) {
        return Err(Error::domain(format!("non-finite wave speed bound {vmax}")));
    }
    Ok(cfg.cfl * field.grid.dx / vmax)
}

/// Componentwise minmod slope.
fn minmod(a: ConsTriple, b: ConsTriple) -> ConsTriple {
    let mm = |p: f64, q: f64| {
        if p * q <= 0.0 {
            0.0
        } else if p.abs() <= q.abs() {
            p
        } else {
            q
        }
    };
    ConsTriple {
        rho: mm(a.rho, b.rho),
        mom: mm(a.mom, b.mom),
        rw: mm(a.rw, b.rw),
    }
}

/// Local Lax-Friedrichs flux between two face states.
fn llf_flux(l: ConsTriple, r: ConsTriple, params: &ModelParams) -> Result<FluxTriple> {
    let pl = crate::model::to_primitive(l)?;
    let pr = crate::model::to_primitive(r)?;
    let al = pl.u.abs() + crate::model::wave_speed(pl.rho, params)?;
    let ar = pr.u.abs() + crate::model::wave_speed(pr.rho, params)?;
    let alpha = al.max(ar);
    let fl = physical_flux(l, params)?;
    let fr = physical_flux(r, params)?;
    Ok(FluxTriple {
        f_rho: 0.5 * (fl.f_rho + fr.f_rho) - 0.5 * alpha * (r.rho - l.rho),
        f_mom: 0.5 * (fl.f_mom + fr.f_mom) - 0.5 * alpha * (r.mom - l.mom),
        f_rw: 0.5 * (fl.f_rw + fr.f_rw) - 0.5 * alpha * (r.rw - l.rw),
    })
}

/// Left/right face states of one cell from minmod reconstruction. Falls
/// back to piecewise-constant faces whenever a reconstructed state would
/// leave the admissible set — a reconstruction fallback, never a solution
/// clamp.
fn face_states(lo: ConsTriple, mid: ConsTriple, hi: ConsTriple) -> (ConsTriple, ConsTriple) {
    let slope = minmod(mid - lo, hi - mid);
    let um = mid - slope * 0.5;
    let up = mid + slope * 0.5;
    if um.rho > 0.0 && up.rho > 0.0 && um.is_finite() && up.is_finite() {
        (um, up)
    } else {
        (mid, mid)
    }
}

/// The `n + 1` interface fluxes of a cell array extended by two equilibrium
/// ghost cells on each side, at the requested spatial order.
fn interface_fluxes(
    cells: &[ConsTriple],
    eq: ConsTriple,
    order: SchemeOrder,
    params: &ModelParams,
) -> Result<Vec<FluxTriple>> {
    let n = cells.len();
    let mut ext = Vec::with_capacity(n + 4);
    ext.push(eq);
    ext.push(eq);
    ext.extend_from_slice(cells);
    ext.push(eq);
    ext.push(eq);

    match order {
        SchemeOrder::One => {
            let r: Vec<Result<FluxTriple>> =
                exec::map_indexed(n + 1, |j| llf_flux(ext[j + 1], ext[j + 2], params));
            r.into_iter().collect::<Result<_>>()
        }
        SchemeOrder::Two => {
            // Face states for extended cells 1..=n+2 (faces[k] belongs to
            // extended cell k+1).
            let faces: Vec<(ConsTriple, ConsTriple)> = exec::map_indexed(n + 2, |k| {
                let j = k + 1;
                face_states(ext[j - 1], ext[j], ext[j + 1])
            });
            let r: Vec<Result<FluxTriple>> =
                exec::map_indexed(n + 1, |j| llf_flux(faces[j].1, faces[j + 1].0, params));
            r.into_iter().collect::<Result<_>>()
        }
    }
}

/// `cells - k (F_{i+1} - F_i)` for every cell.
fn flux_difference_update(cells: &[ConsTriple], fluxes: &[FluxTriple], k: f64) -> Vec<ConsTriple> {
    exec::map_indexed(cells.len(), |i| {
        let c = cells[i];
        ConsTriple {
            rho: c.rho - k * (fluxes[i + 1].f_rho - fluxes[i].f_rho),
            mom: c.mom - k * (fluxes[i + 1].f_mom - fluxes[i].f_mom),
            rw: c.rw - k * (fluxes[i + 1].f_rw - fluxes[i].f_rw),
        }
    })
}

/// One conservative update of the homogeneous system. Mass and momentum
/// telescope exactly; only the boundary interface fluxes (equilibrium ghost
/// cells on both sides) enter the totals.
///
/// Order 1 is the classic single-stage local Lax–Friedrichs step. Order 2
/// advances the minmod-reconstructed scheme with the explicit midpoint rule:
/// a half-step predictor field supplies the fluxes for the full step, which
/// keeps the update second order in time independently of the dx/dt ratio.
/// Should the predictor field leave the admissible set (imminent vacuum or
/// overflow) the step degrades to forward Euler; the resulting state then
/// carries the defect to the blow-up scanner, which reports it as a detected
/// singularity rather than a numerical fault.
pub fn hyperbolic_step(field: &mut Field, dt: f64, cfg: &SimConfig) -> Result<()> {
    let dx = field.grid.dx;
    let params = &cfg.params;
    let eq = ConsTriple::equilibrium(params.rho_bar);
    let k = dt / dx;

    let fluxes = match cfg.order {
        SchemeOrder::One => interface_fluxes(&field.cells, eq, cfg.order, params)?,
        SchemeOrder::Two => {
            let first = interface_fluxes(&field.cells, eq, cfg.order, params)?;
            let predicted = flux_difference_update(&field.cells, &first, 0.5 * k);
            if predicted.iter().all(|c| c.rho > 0.0 && c.is_finite()) {
                interface_fluxes(&predicted, eq, cfg.order, params)?
            } else {
                first
            }
        }
    };
    field.cells = flux_difference_update(&field.cells, &fluxes, k);
    Ok(())
}

/// Exact integration of the split relaxation ODE `S_t = (u_x - S)/(tau rho)`
/// with `rho` and `u_x` frozen over the step. `u_x` is the central
/// difference of cell-average velocities (one-sided at the two edge cells,
/// which sit in equilibrium whenever the breach detector is honored).
pub fn relaxation_step(field: &mut Field, dt: f64, cfg: &SimConfig) {
    let n = field.grid.n_cells;
    if n == 0 {
        return;
    }
    let dx = field.grid.dx;
    let tau = cfg.params.tau;
    let u = velocity_field(field);
    let cells = &field.cells;
    let new_cells = exec::map_indexed(n, |i| {
        let ux = if n == 1 {
            0.0
        } else if i == 0 {
            (u[1] - u[0]) / dx
        } else if i == n - 1 {
            (u[n - 1] - u[n - 2]) / dx
        } else {
            (u[i + 1] - u[i - 1]) / (2.0 * dx)
        };
        let c = cells[i];
        let s = c.rw / c.rho;
        let decay = (-dt / (tau * c.rho)).exp();
        ConsTriple {
            rho: c.rho,
            mom: c.mom,
            rw: c.rho * (ux + (s - ux) * decay),
        }
    });
    field.cells = new_cells;
}

/// Scan for detector trips: non-finite values, non-positive density, the
/// density floor, then the velocity-gradient limit.
fn scan_trouble(field: &Field, cfg: &SimConfig) -> Option<BlowupSignal> {
    let n = field.grid.n_cells;
    for (i, c) in field.cells.iter().enumerate() {
        let kind = if !c.is_finite() {
            Some(BlowupKind::NonFinite)
        } else if !(c.rho > 0.0) {
            Some(BlowupKind::NonPositiveDensity)
        } else if c.rho < cfg.min_rho_limit {
            Some(BlowupKind::DensityFloor)
        } else {
            None
        };
        if let Some(kind) = kind {
            return Some(BlowupSignal {
                time: field.time,
                x: field.grid.center(i),
                kind,
            });
        }
    }
    if n >= 2 {
        let u = velocity_field(field);
        let mut worst = 0.0;
        let mut at = 0;
        for i in 0..n - 1 {
            let g = (u[i + 1] - u[i]).abs();
            if g > worst {
                worst = g;
                at = i;
            }
        }
        if worst / field.grid.dx > cfg.max_grad_limit {
            return Some(BlowupSignal {
                time: field.time,
                x: 0.5 * (field.grid.center(at) + field.grid.center(at + 1)),
                kind: BlowupKind::GradientLimit,
            });
        }
    }
    None
}

/// Non-equilibrium state within five cells of either boundary?
fn scan_breach(field: &Field, cfg: &SimConfig) -> Option<f64> {
    let n = field.grid.n_cells;
    let eps = cfg.eps_support;
    let rho_bar = cfg.params.rho_bar;
    let band = 5.min(n);
    let deviates = |i: usize| {
        let c = field.cells[i];
        let u = c.mom / c.rho;
        let s = c.rw / c.rho;
        (c.rho - rho_bar).abs() > eps || u.abs() > eps || s.abs() > eps
    };
    for i in (0..band).chain(n.saturating_sub(band)..n) {
        if deviates(i) {
            return Some(field.grid.center(i));
        }
    }
    None
}

/// Advance initial data to `t_end` or to the first detector trip.
///
/// The observer is invoked on the initial state, every `record_every` steps,
/// and on the terminal state. Deterministic for a fixed config: iteration
/// order is fixed and reductions are reassociation-exact.
pub fn run(
    grid: &Grid,
    data: &InitialData,
    cfg: &SimConfig,
    observer: &mut dyn FnMut(&Field),
) -> Result<RunSummary> {
    cfg.validate()?;
    if data.support_radius > 0.0 {
        let need = data.support_radius + 5.0 * grid.dx;
        if grid.x_max < need || grid.x_min > -need {
            return Err(Error::config(format!(
                "domain [{}, {}] leaves no room between the data support ({}) and the breach sentinel",
                grid.x_min, grid.x_max, data.support_radius
            )));
        }
    }
    let mut field = init_state(grid, data)?;
    observer(&field);
    if let Some(sig) = scan_trouble(&field, cfg) {
        return Ok(RunSummary {
            outcome: RunOutcome::BlowUp(sig),
            steps: 0,
            final_time: 0.0,
        });
    }

    let t_end = cfg.t_end;
    let mut steps: u64 = 0;
    let mut last_observed = 0u64;
    let mut outcome = RunOutcome::Completed;

    while field.time < t_end * (1.0 - 1e-12) {
        let mut dt = stable_dt(&field, cfg)?;
        if let Some(cap) = cfg.dt_override {
            dt = dt.min(cap);
        }
        dt = dt.min(t_end - field.time);
        match cfg.splitting {
            Splitting::Godunov => {
                hyperbolic_step(&mut field, dt, cfg)?;
                relaxation_step(&mut field, dt, cfg);
            }
            Splitting::Strang => {
                relaxation_step(&mut field, 0.5 * dt, cfg);
                hyperbolic_step(&mut field, dt, cfg)?;
                relaxation_step(&mut field, 0.5 * dt, cfg);
            }
        }
        field.time += dt;
        steps += 1;

        if let Some(sig) = scan_trouble(&field, cfg) {
            outcome = RunOutcome::BlowUp(sig);
            break;
        }
        if let Some(x) = scan_breach(&field, cfg) {
            outcome = RunOutcome::BoundaryBreach {
                time: field.time,
                x,
            };
            break;
        }
        if steps % cfg.record_every == 0 && field.time < t_end * (1.0 - 1e-12) {
            observer(&field);
            last_observed = steps;
        }
    }

    if last_observed != steps {
        observer(&field);
    }
    Ok(RunSummary {
        outcome,
        steps,
        final_time: field.time,
    })
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::{DataSpec, InitialData};
    use crate::profile::{ProfileSpec, ProfileVariant};

    const REF_RHO_BAR: f64 = 1.0;

    fn params() -> ModelParams {
        ModelParams::new(2.0, 1.0, REF_RHO_BAR).unwrap()
    }

    fn smoke_data() -> InitialData {
        let spec = ProfileSpec::new(2.0, 8, 1.0).unwrap();
        InitialData::planned(
            &DataSpec::reference(),
            &spec,
            ProfileVariant::Corrected,
            REF_RHO_BAR,
        )
        .unwrap()
    }

    fn kahan_sum(vals: impl Iterator<Item = f64>) -> f64 {
        let mut s = 0.0;
        let mut c = 0.0;
        for v in vals {
            let t = v - c;
            let next = s + t;
            c = (next - s) - t;
            s = next;
        }
        s
    }

    #[test]
    fn grid_construction() {
        let g = Grid::new(-2.0, 2.0, 8).unwrap();
        assert_eq!(g.dx, 0.5);
        assert_eq!(g.center(0), -1.75);
        assert_eq!(g.center(7), 1.75);
        assert!(Grid::new(2.0, -2.0, 8).is_err());
        assert!(Grid::new(-2.0, 2.0, 0).is_err());

        let s = Grid::symmetric(10.0, 1.0 / 32.0).unwrap();
        assert_eq!(s.n_cells, 640);
        assert_eq!(s.x_max, 10.0);
        assert_eq!(s.x_min, -10.0);

        // Cone sizing: reach + speed * horizon + default margin 20 dx + 2.
        let c = Grid::cone_sized(8.0, 3.0_f64.sqrt(), 0.2, 1.0 / 32.0, None).unwrap();
        let want = 8.0 + 3.0_f64.sqrt() * 0.2 + 20.0 / 32.0 + 2.0;
        assert!(c.x_max >= want && c.x_max < want + 1.0);
    }

    #[test]
    fn init_equilibrium_exact() {
        let g = Grid::symmetric(5.0, 0.05).unwrap();
        let f = init_state(&g, &InitialData::equilibrium(1.0)).unwrap();
        let eq = ConsTriple::equilibrium(1.0);
        assert!(f.cells.iter().all(|c| *c == eq));
        assert_eq!(f.time, 0.0);
    }

    #[test]
    fn init_rejects_coarse_or_small_grids() {
        let data = smoke_data();
        let coarse = Grid::symmetric(12.0, 0.25).unwrap();
        assert!(init_state(&coarse, &data).is_err());
        let small = Grid::symmetric(4.0, 1.0 / 32.0).unwrap();
        assert!(init_state(&small, &data).is_err());
    }

    #[test]
    fn init_discrete_invariants() {
        let g = Grid::symmetric(12.0, 1.0 / 32.0).unwrap();
        let data = smoke_data();
        let f = init_state(&g, &data).unwrap();
        // rho0 == 1 exactly: zero discrete mass deviation.
        let mass_dev = kahan_sum(f.cells.iter().map(|c| c.rho - 1.0)) * g.dx;
        assert!(mass_dev.abs() < 1e-12, "mass deviation {mass_dev}");
        // Discrete velocity norm close to the closed form 55.
        let norm = kahan_sum(f.cells.iter().map(|c| (c.mom / c.rho).powi(2))) * g.dx;
        assert!((norm - 55.0).abs() < 0.55, "norm {norm}");
        // Odd data: total momentum starts at zero.
        let mom = kahan_sum(f.cells.iter().map(|c| c.mom)) * g.dx;
        assert!(mom.abs() < 1e-12, "momentum {mom}");
        // Cells beyond the support are bitwise equilibrium.
        let eq = ConsTriple::equilibrium(1.0);
        for i in 0..f.cells.len() {
            if g.center(i).abs() > 8.0 + g.dx {
                assert_eq!(f.cells[i], eq);
            }
        }
    }

    #[test]
    fn stable_dt_known_values() {
        let g = Grid::symmetric(1.0, 0.05).unwrap();
        let cfg = SimConfig::new(params(), 1.0);
        let f = init_state(&g, &InitialData::equilibrium(1.0)).unwrap();
        let dt = stable_dt(&f, &cfg).unwrap();
        // Rest state: single speed sqrt(3).
        assert!((dt - 0.4 * 0.05 / 3.0_f64.sqrt()).abs() < 1e-15);

        // One cell at (rho, u, S) = (2, 1, 0): speed 1 + sqrt(4.25).
        let mut f2 = f.clone();
        f2.cells[3] = to_conservative(PointState {
            rho: 2.0,
            u: 1.0,
            s: 0.0,
        });
        let dt2 = stable_dt(&f2, &cfg).unwrap();
        let speed = 1.0 + 4.25_f64.sqrt();
        assert!((dt2 - 0.4 * 0.05 / speed).abs() < 1e-15);
        assert!((speed - 3.0615528128088303).abs() < 1e-12);

        // dt scales linearly in dx.
        let g2 = Grid::symmetric(1.0, 0.025).unwrap();
        let f3 = init_state(&g2, &InitialData::equilibrium(1.0)).unwrap();
        let dt3 = stable_dt(&f3, &cfg).unwrap();
        assert!((dt3 - 0.5 * dt).abs() < 1e-16);
    }

    #[test]
    fn equilibrium_run_is_bitwise_inert() {
        let g = Grid::symmetric(3.0, 0.05).unwrap();
        let mut cfg = SimConfig::new(params(), 0.3);
        cfg.order = SchemeOrder::Two;
        let mut snapshots = 0usize;
        let summary = run(&g, &InitialData::equilibrium(1.0), &cfg, &mut |f| {
            let eq = ConsTriple::equilibrium(1.0);
            assert!(f.cells.iter().all(|c| *c == eq));
            snapshots += 1;
        })
        .unwrap();
        assert_eq!(summary.outcome, RunOutcome::Completed);
        assert!(summary.steps > 0);
        assert!((summary.final_time - 0.3).abs() < 1e-12);
        assert!(snapshots >= 2);
    }

    #[test]
    fn hyperbolic_conservation_over_many_steps() {
        for order in [SchemeOrder::One, SchemeOrder::Two] {
            let g = Grid::symmetric(12.0, 1.0 / 32.0).unwrap();
            let mut cfg = SimConfig::new(params(), 1.0);
            cfg.order = order;
            let mut f = init_state(&g, &smoke_data()).unwrap();
            let mass0 = kahan_sum(f.cells.iter().map(|c| c.rho)) * g.dx;
            let mom0 = kahan_sum(f.cells.iter().map(|c| c.mom)) * g.dx;
            for _ in 0..50 {
                let dt = stable_dt(&f, &cfg).unwrap();
                hyperbolic_step(&mut f, dt, &cfg).unwrap();
            }
            let mass1 = kahan_sum(f.cells.iter().map(|c| c.rho)) * g.dx;
            let mom1 = kahan_sum(f.cells.iter().map(|c| c.mom)) * g.dx;
            assert!(
                ((mass1 - mass0) / mass0).abs() < 1e-12,
                "mass drift {order:?}: {}",
                (mass1 - mass0) / mass0
            );
            // Total momentum starts near zero; compare against the mass scale.
            assert!(
                ((mom1 - mom0) / mass0).abs() < 1e-12,
                "momentum drift {order:?}: {}",
                (mom1 - mom0) / mass0
            );
        }
    }

    #[test]
    fn relaxation_exact_exponential() {
        // Uniform (rho, u, S) = (1, 0, 1): u_x = 0, so S halves per ln(2).
        let g = Grid::symmetric(1.0, 0.05).unwrap();
        let cfg = SimConfig::new(params(), 1.0);
        let mut f = init_state(&g, &InitialData::equilibrium(1.0)).unwrap();
        for c in f.cells.iter_mut() {
            c.rw = 1.0;
        }
        relaxation_step(&mut f, std::f64::consts::LN_2, &cfg);
        for c in &f.cells {
            assert!((c.s() - 0.5).abs() < 1e-15);
        }
        relaxation_step(&mut f, std::f64::consts::LN_2, &cfg);
        assert!((f.cells[3].s() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn relaxation_fixed_point_s_equals_ux() {
        // Linear velocity u = 0.3 x with S = 0.3: central and one-sided
        // differences are exact, so the state is a fixed point.
        let g = Grid::symmetric(1.0, 0.05).unwrap();
        let cfg = SimConfig::new(params(), 1.0);
        let mut f = init_state(&g, &InitialData::equilibrium(1.0)).unwrap();
        for i in 0..f.cells.len() {
            let x = g.center(i);
            f.cells[i] = to_conservative(PointState {
                rho: 1.0,
                u: 0.3 * x,
                s: 0.3,
            });
        }
        let before = f.cells.clone();
        relaxation_step(&mut f, 0.7, &cfg);
        for (a, b) in before.iter().zip(&f.cells) {
            assert!((a.rw - b.rw).abs() < 1e-14);
        }
    }

    #[test]
    fn relaxation_freezes_as_tau_grows() {
        let g = Grid::symmetric(1.0, 0.05).unwrap();
        let mut f0 = init_state(&g, &InitialData::equilibrium(1.0)).unwrap();
        for c in f0.cells.iter_mut() {
            c.rw = 1.0;
        }
        let mut drift = Vec::new();
        for tau in [1e3, 1e6] {
            let p = ModelParams::new(2.0, tau, 1.0).unwrap();
            let cfg = SimConfig::new(p, 1.0);
            let mut f = f0.clone();
            relaxation_step(&mut f, 1.0, &cfg);
            drift.push((f.cells[5].s() - 1.0).abs());
        }
        // Change scales like dt/tau.
        assert!(drift[0] < 1.1e-3 && drift[0] > 0.9e-3);
        assert!((drift[1] / drift[0] - 1e-3).abs() < 1e-4);
    }

    #[test]
    fn run_detects_gradient_limit() {
        let g = Grid::symmetric(12.0, 1.0 / 32.0).unwrap();
        let mut cfg = SimConfig::new(params(), 0.5);
        // The smoke profile starts with max |u'| = L pi / 2 ~ 3.14, so an
        // absurdly low limit trips at once.
        cfg.max_grad_limit = 1.0;
        let summary = run(&g, &smoke_data(), &cfg, &mut |_| {}).unwrap();
        match summary.outcome {
            RunOutcome::BlowUp(sig) => {
                assert_eq!(sig.kind, BlowupKind::GradientLimit);
                assert_eq!(sig.time, 0.0);
                assert!(sig.x.abs() < 1.5, "steepest ramp is the middle one");
            }
            other => panic!("expected gradient detection, got {other:?}"),
        }
        assert_eq!(summary.steps, 0);
    }

    #[test]
    fn run_detects_density_floor_at_start() {
        let g = Grid::symmetric(12.0, 1.0 / 32.0).unwrap();
        let mut cfg = SimConfig::new(params(), 0.5);
        cfg.min_rho_limit = 2.0;
        let summary = run(&g, &smoke_data(), &cfg, &mut |_| {}).unwrap();
        match summary.outcome {
            RunOutcome::BlowUp(sig) => assert_eq!(sig.kind, BlowupKind::DensityFloor),
            other => panic!("expected density floor detection, got {other:?}"),
        }
    }

    #[test]
    fn run_aborts_on_boundary_breach() {
        // Domain barely larger than the data support: outgoing waves hit the
        // sentinel band well before t_end.
        let g = Grid::symmetric(10.0, 0.05).unwrap();
        let cfg = SimConfig::new(params(), 5.0);
        let summary = run(&g, &smoke_data(), &cfg, &mut |_| {}).unwrap();
        match summary.outcome {
            RunOutcome::BoundaryBreach { time, x } => {
                assert!(time > 0.05 && time < 5.0, "breach at t = {time}");
                assert!(x.abs() > 9.5, "breach near the edge, got x = {x}");
            }
            other => panic!("expected breach, got {other:?}"),
        }
    }

    #[test]
    fn run_rejects_domain_without_sentinel_room() {
        let g = Grid::symmetric(8.1, 0.05).unwrap();
        let cfg = SimConfig::new(params(), 0.1);
        assert!(run(&g, &smoke_data(), &cfg, &mut |_| {}).is_err());
    }

    #[test]
    fn observer_cadence_includes_endpoints() {
        let g = Grid::symmetric(3.0, 0.05).unwrap();
        let mut cfg = SimConfig::new(params(), 0.1);
        cfg.record_every = 3;
        let mut times = Vec::new();
        let summary = run(&g, &InitialData::equilibrium(1.0), &cfg, &mut |f| {
            times.push(f.time)
        })
        .unwrap();
        assert_eq!(times[0], 0.0);
        assert_eq!(*times.last().unwrap(), summary.final_time);
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        // Roughly one record every three steps.
        let expected = summary.steps / 3 + 2;
        assert!((times.len() as i64 - expected as i64).abs() <= 1);
    }

    #[test]
    fn splitting_schemes_agree_to_first_order() {
        let g = Grid::symmetric(12.0, 1.0 / 32.0).unwrap();
        let mut diffs = Vec::new();
        for splitting in [Splitting::Godunov, Splitting::Strang] {
            let mut cfg = SimConfig::new(params(), 0.05);
            cfg.splitting = splitting;
            let mut last = None;
            run(&g, &smoke_data(), &cfg, &mut |f| last = Some(f.clone())).unwrap();
            diffs.push(last.unwrap());
        }
        let max_diff = diffs[0]
            .cells
            .iter()
            .zip(&diffs[1].cells)
            .map(|(a, b)| {
                (a.rho - b.rho)
                    .abs()
                    .max((a.mom - b.mom).abs())
                    .max((a.rw - b.rw).abs())
            })
            .fold(0.0_f64, f64::max);
        assert!(max_diff > 0.0, "schemes should differ at finite dt");
        assert!(max_diff < 0.05, "but only at O(dt): {max_diff}");
    }
}
