//! Plain-CSV serialization for diagnostic series and state snapshots.
//!
//! Numbers are printed with 17 significant digits in scientific notation so
//! every `f64` round-trips exactly and identical runs produce byte-identical
//! files.

use std::io::Write;

use crate::diagnostics::DiagRecord;
use crate::error::{Error, Result};
use crate::model::PointState;
use crate::solver::Field;

pub const SERIES_HEADER: &str = "t,mass_dev,total_mom,F,E,D,D_cum,support_radius,max_grad,min_rho";
pub const SNAPSHOT_HEADER: &str = "x,rho,u,S";

/// Canonical number formatting used in every CSV cell.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_cell(cell: &str, line: usize) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("line {line}: bad number {cell:?}: {e}")))
}

pub fn write_series(w: &mut impl Write, records: &[DiagRecord]) -> Result<()> {
    writeln!(w, "{SERIES_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt(r.t),
            fmt(r.mass_dev),
            fmt(r.total_mom),
            fmt(r.f_moment),
            fmt(r.entropy),
            fmt(r.dissipation),
            fmt(r.d_cum),
            fmt(r.support_radius),
            fmt(r.max_grad),
            fmt(r.min_rho),
        )?;
    }
    Ok(())
}

pub fn series_to_string(records: &[DiagRecord]) -> String {
    let mut buf = Vec::new();
    write_series(&mut buf, records).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

pub fn parse_series(text: &str) -> Result<Vec<DiagRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == SERIES_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "series header mismatch: expected {SERIES_HEADER:?}, got {:?}",
                other.map(|(_, h)| h)
            )))
        }
    }
    let mut out = Vec::new();
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 10 {
            return Err(Error::Parse(format!(
                "line {}: expected 10 columns, got {}",
                k + 1,
                cells.len()
            )));
        }
        let v: Vec<f64> = cells
            .iter()
            .map(|c| parse_cell(c, k + 1))
            .collect::<Result<_>>()?;
        out.push(DiagRecord {
            t: v[0],
            mass_dev: v[1],
            total_mom: v[2],
            f_moment: v[3],
            entropy: v[4],
            dissipation: v[5],
            d_cum: v[6],
            support_radius: v[7],
            max_grad: v[8],
            min_rho: v[9],
        });
    }
    Ok(out)
}

/// Write a snapshot of primitive values `(x, rho, u, S)` per cell.
pub fn write_snapshot(w: &mut impl Write, field: &Field) -> Result<()> {
    writeln!(w, "{SNAPSHOT_HEADER}")?;
    for (i, c) in field.cells.iter().enumerate() {
        if !(c.rho > 0.0) || !c.is_finite() {
            return Err(Error::Diagnostics(format!(
                "cell at x = {} is not an admissible state (rho = {})",
                field.grid.center(i),
                c.rho
            )));
        }
        writeln!(
            w,
            "{},{},{},{}",
            fmt(field.grid.center(i)),
            fmt(c.rho),
            fmt(c.mom / c.rho),
            fmt(c.rw / c.rho),
        )?;
    }
    Ok(())
}

/// Parse a snapshot back into cell centers and primitive states.
pub fn parse_snapshot(text: &str) -> Result<(Vec<f64>, Vec<PointState>)> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == SNAPSHOT_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "snapshot header mismatch: expected {SNAPSHOT_HEADER:?}, got {:?}",
                other.map(|(_, h)| h)
            )))
        }
    }
    let mut xs = Vec::new();
    let mut states = Vec::new();
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 4 {
            return Err(Error::Parse(format!(
                "line {}: expected 4 columns, got {}",
                k + 1,
                cells.len()
            )));
        }
        let v: Vec<f64> = cells
            .iter()
            .map(|c| parse_cell(c, k + 1))
            .collect::<Result<_>>()?;
        xs.push(v[0]);
        states.push(PointState {
            rho: v[1],
            u: v[2],
            s: v[3],
        });
    }
    Ok((xs, states))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::InitialData;
    use crate::solver::{init_state, Grid};

    #[test]
    fn series_round_trips_bitwise() {
        let recs = vec![
            DiagRecord {
                t: 0.0,
                mass_dev: -3.1e-17,
                total_mom: 1.0 / 3.0,
                f_moment: 112.21585309343392,
                entropy: 27.5,
                dissipation: 0.0,
                d_cum: 0.0,
                support_radius: 8.0,
                max_grad: std::f64::consts::PI,
                min_rho: 1.0,
            },
            DiagRecord {
                t: 1e-3,
                mass_dev: f64::MIN_POSITIVE,
                total_mom: -0.0,
                f_moment: 1.1e300,
                entropy: 2.2250738585072014e-308,
                dissipation: 9.999999999999999e-1,
                d_cum: 0.1,
                support_radius: 8.03125,
                max_grad: 3.2,
                min_rho: 0.999999999999,
            },
        ];
        let text = series_to_string(&recs);
        let back = parse_series(&text).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in recs.iter().zip(back.iter()) {
            assert_eq!(a.t.to_bits(), b.t.to_bits());
            assert_eq!(a.mass_dev.to_bits(), b.mass_dev.to_bits());
            assert_eq!(a.f_moment.to_bits(), b.f_moment.to_bits());
            assert_eq!(a.entropy.to_bits(), b.entropy.to_bits());
            assert_eq!(a.min_rho.to_bits(), b.min_rho.to_bits());
        }
        // Re-serialization is byte-identical.
        assert_eq!(text, series_to_string(&back));
    }

    #[test]
    fn snapshot_round_trips() {
        let g = Grid::symmetric(2.0, 0.25).unwrap();
        let mut f = init_state(&g, &InitialData::equilibrium(1.0)).unwrap();
        f.cells[3].mom = 0.7;
        f.cells[5].rw = -0.2;
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f).unwrap();
        let (xs, states) = parse_snapshot(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(xs.len(), g.n_cells);
        assert_eq!(xs[0].to_bits(), g.center(0).to_bits());
        assert_eq!(states[3].u.to_bits(), (0.7_f64).to_bits());
        assert_eq!(states[5].s.to_bits(), (-0.2_f64).to_bits());
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(parse_series("wrong,header\n").is_err());
        assert!(parse_series(&format!("{SERIES_HEADER}\n1.0,2.0\n")).is_err());
        assert!(parse_series(&format!("{SERIES_HEADER}\n0,0,0,0,0,0,0,0,0,zebra\n")).is_err());
        assert!(parse_snapshot("x,rho,u\n").is_err());
        let ok = parse_snapshot("x,rho,u,S\n0.5,1.0,0.0,0.0\n").unwrap();
        assert_eq!(ok.0.len(), 1);
    }
}
