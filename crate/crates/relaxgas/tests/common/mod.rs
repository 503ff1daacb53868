//! Shared fixtures for the integration suites.
#![allow(dead_code)]

use relaxgas::diagnostics::{f_identity_rhs, DiagRecord, FMomentRhs, Recorder};
use relaxgas::model::ModelParams;
use relaxgas::planner::{DataSpec, InitialData};
use relaxgas::profile::{ProfileSpec, ProfileVariant};
use relaxgas::solver::{run, Field, Grid, RunSummary, SimConfig};

pub const SMOKE_L: f64 = 2.0;
pub const SMOKE_M: u64 = 8;
pub const SMOKE_DX: f64 = 1.0 / 32.0;
pub const SMOKE_T_END: f64 = 0.2;

pub fn params() -> ModelParams {
    ModelParams::new(2.0, 1.0, 1.0).unwrap()
}

pub fn sigma_ref() -> f64 {
    3.0_f64.sqrt()
}

pub fn smoke_data() -> InitialData {
    let spec = ProfileSpec::new(SMOKE_L, SMOKE_M, 1.0).unwrap();
    InitialData::planned(
        &DataSpec::reference(),
        &spec,
        ProfileVariant::Corrected,
        1.0,
    )
    .unwrap()
}

/// Everything observed over one run: the diagnostic series, per-record
/// momentum-identity right-hand sides, and the last reported state.
pub struct RunTrace {
    pub records: Vec<DiagRecord>,
    pub rhs: Vec<FMomentRhs>,
    pub final_field: Field,
    pub summary: RunSummary,
}

pub fn run_traced(grid: &Grid, data: &InitialData, cfg: &SimConfig) -> RunTrace {
    let mut recorder = Recorder::new(cfg.params, cfg.eps_support);
    let mut rhs = Vec::new();
    let mut last: Option<Field> = None;
    let summary = {
        let mut observer = |f: &Field| {
            last = Some(f.clone());
            // A terminal state that has left the admissible set (NaN or
            // rho <= 0) cannot be measured; keep the series aligned.
            if recorder.record(f).is_ok() {
                rhs.push(f_identity_rhs(f, &cfg.params).unwrap());
            }
        };
        run(grid, data, cfg, &mut observer).unwrap()
    };
    RunTrace {
        records: recorder.records,
        rhs,
        final_field: last.expect("observer fires at least once"),
        summary,
    }
}

/// Standard smoke-run setup at the given resolution.
pub fn smoke_cfg(dx: f64) -> (Grid, SimConfig) {
    let grid = Grid::cone_sized(SMOKE_M as f64, sigma_ref(), SMOKE_T_END, dx, None).unwrap();
    let cfg = SimConfig::new(params(), SMOKE_T_END);
    (grid, cfg)
}
