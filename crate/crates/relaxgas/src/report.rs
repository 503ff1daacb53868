//! Flat JSON report of a certified plan.
//!
//! The report is a single JSON object mapping dotted keys to scalars, plus a
//! `checks` array recording the order of the verified inequalities. Keys are
//! emitted sorted, so serialization is deterministic and diff-friendly, and
//! the mapping is lossless: `report_to_plan(plan_to_report(p)) == p`.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::planner::{BlowupPlan, PlanCheck, Sense};

fn put_f64(map: &mut Map<String, Value>, key: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::config(format!(
            "report value {key} is not finite: {v}"
        )));
    }
    map.insert(key.to_string(), json!(v));
    Ok(())
}

pub fn plan_to_report(plan: &BlowupPlan) -> Result<Value> {
    let mut map = Map::new();
    put_f64(&mut map, "gamma", plan.gamma)?;
    put_f64(&mut map, "tau", plan.tau)?;
    put_f64(&mut map, "rho_bar", plan.rho_bar)?;
    put_f64(&mut map, "rho_min", plan.rho_min)?;
    put_f64(&mut map, "rho_max", plan.rho_max)?;
    put_f64(&mut map, "r_support", plan.r_support)?;
    put_f64(&mut map, "sigma_tilde", plan.sigma_tilde)?;
    put_f64(&mut map, "l_amp", plan.l_amp)?;
    map.insert("m_halfwidth".to_string(), json!(plan.m_halfwidth));
    put_f64(&mut map, "h0", plan.h0)?;
    put_f64(&mut map, "norm_sq", plan.norm_sq)?;
    put_f64(&mut map, "f0", plan.f0)?;
    put_f64(&mut map, "f0_threshold", plan.f0_threshold)?;
    put_f64(&mut map, "c1", plan.c1)?;
    put_f64(&mut map, "c2", plan.c2)?;
    put_f64(&mut map, "c3", plan.c3)?;
    put_f64(&mut map, "c4", plan.c4)?;
    put_f64(&mut map, "c5", plan.c5)?;
    put_f64(&mut map, "t_star", plan.t_star)?;
    map.insert("admissible".to_string(), json!(plan.admissible));
    let names: Vec<Value> = plan.checks.iter().map(|c| json!(c.name)).collect();
    map.insert("checks".to_string(), Value::Array(names));
    for c in &plan.checks {
        let base = format!("check.{}", c.name);
        put_f64(&mut map, &format!("{base}.lhs"), c.lhs)?;
        put_f64(&mut map, &format!("{base}.rhs"), c.rhs)?;
        map.insert(format!("{base}.sense"), json!(c.sense.as_str()));
        put_f64(&mut map, &format!("{base}.margin"), c.margin)?;
        map.insert(format!("{base}.pass"), json!(c.pass));
    }
    Ok(Value::Object(map))
}

/// Pretty-printed report text (sorted keys, trailing newline).
pub fn report_to_string(plan: &BlowupPlan) -> Result<String> {
    let v = plan_to_report(plan)?;
    Ok(format!("{}\n", serde_json::to_string_pretty(&v)?))
}

fn get<'a>(map: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    map.get(key)
        .ok_or_else(|| Error::Parse(format!("report is missing key {key:?}")))
}

fn get_f64(map: &Map<String, Value>, key: &str) -> Result<f64> {
    get(map, key)?
        .as_f64()
        .ok_or_else(|| Error::Parse(format!("report key {key:?} is not a number")))
}

fn get_u64(map: &Map<String, Value>, key: &str) -> Result<u64> {
    get(map, key)?
        .as_u64()
        .ok_or_else(|| Error::Parse(format!("report key {key:?} is not an integer")))
}

fn get_bool(map: &Map<String, Value>, key: &str) -> Result<bool> {
    get(map, key)?
        .as_bool()
        .ok_or_else(|| Error::Parse(format!("report key {key:?} is not a boolean")))
}

fn get_str<'a>(map: &'a Map<String, Value>, key: &str) -> Result<&'a str> {
    get(map, key)?
        .as_str()
        .ok_or_else(|| Error::Parse(format!("report key {key:?} is not a string")))
}

pub fn report_to_plan(report: &Value) -> Result<BlowupPlan> {
    let map = report
        .as_object()
        .ok_or_else(|| Error::Parse("report must be a JSON object".to_string()))?;
    let names = get(map, "checks")?
        .as_array()
        .ok_or_else(|| Error::Parse("report key \"checks\" is not an array".to_string()))?;
    let mut checks = Vec::with_capacity(names.len());
    for n in names {
        let name = n
            .as_str()
            .ok_or_else(|| Error::Parse("check names must be strings".to_string()))?;
        let base = format!("check.{name}");
        checks.push(PlanCheck {
            name: name.to_string(),
            lhs: get_f64(map, &format!("{base}.lhs"))?,
            rhs: get_f64(map, &format!("{base}.rhs"))?,
            sense: Sense::parse(get_str(map, &format!("{base}.sense"))?)?,
            margin: get_f64(map, &format!("{base}.margin"))?,
            pass: get_bool(map, &format!("{base}.pass"))?,
        });
    }
    Ok(BlowupPlan {
        gamma: get_f64(map, "gamma")?,
        tau: get_f64(map, "tau")?,
        rho_bar: get_f64(map, "rho_bar")?,
        rho_min: get_f64(map, "rho_min")?,
        rho_max: get_f64(map, "rho_max")?,
        r_support: get_f64(map, "r_support")?,
        sigma_tilde: get_f64(map, "sigma_tilde")?,
        l_amp: get_f64(map, "l_amp")?,
        m_halfwidth: get_u64(map, "m_halfwidth")?,
        h0: get_f64(map, "h0")?,
        norm_sq: get_f64(map, "norm_sq")?,
        f0: get_f64(map, "f0")?,
        f0_threshold: get_f64(map, "f0_threshold")?,
        c1: get_f64(map, "c1")?,
        c2: get_f64(map, "c2")?,
        c3: get_f64(map, "c3")?,
        c4: get_f64(map, "c4")?,
        c5: get_f64(map, "c5")?,
        t_star: get_f64(map, "t_star")?,
        checks,
        admissible: get_bool(map, "admissible")?,
    })
}
