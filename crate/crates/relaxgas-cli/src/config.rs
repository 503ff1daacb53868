//! Run configuration: INI-style config files, command-line overrides, and
//! the resolved-settings echo that goes into the run manifest.
//!
//! The file format is flat `key = value` pairs under `[section]` headers;
//! `#` and `;` start comments. Sections and keys are fixed — an unknown name
//! is a configuration error, not a warning, so typos cannot silently fall
//! back to defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use relaxgas::profile::ProfileVariant;
use relaxgas::solver::{SchemeOrder, Splitting};
use relaxgas::{Error, Result};

/// How the initial data is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataMode {
    /// Constant background; nothing moves.
    Equilibrium,
    /// Velocity profile with explicit `L` and `M`.
    Explicit,
    /// `L` and `M` from the breakdown planner.
    Planned,
}

/// Fully resolved run settings (defaults, then config file, then flags).
#[derive(Debug, Clone)]
pub struct Settings {
    pub gamma: f64,
    pub tau: f64,
    pub rho_bar: f64,

    pub mode: DataMode,
    pub l_amp: f64,
    pub m_halfwidth: u64,
    pub r_support: f64,
    pub variant: ProfileVariant,
    pub max_m: u64,

    pub dx: f64,
    /// Explicit half-extent; when absent the grid is sized from the
    /// propagation cone.
    pub x_half: Option<f64>,
    /// Cone margin override in length units.
    pub margin: Option<f64>,

    pub cfl: f64,
    pub t_end: f64,
    pub order: SchemeOrder,
    pub splitting: Splitting,
    pub record_every: u64,
    /// Snapshot cadence in observations; 0 keeps only the first and last.
    pub snapshot_every: u64,

    pub eps_support: f64,
    /// Gradient detector as a fixed interfacial velocity jump; the solver
    /// limit becomes `jump_limit / dx`.
    pub jump_limit: Option<f64>,
    /// Gradient detector as an absolute max |du/dx| (overridden by
    /// `jump_limit` when both are set).
    pub max_grad_limit: Option<f64>,
    pub min_rho_limit: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            gamma: 2.0,
            tau: 1.0,
            rho_bar: 1.0,
            mode: DataMode::Explicit,
            l_amp: 2.0,
            m_halfwidth: 8,
            r_support: 1.0,
            variant: ProfileVariant::Corrected,
            max_m: 2_000_000,
            dx: 1.0 / 32.0,
            x_half: None,
            margin: None,
            cfl: 0.4,
            t_end: 0.2,
            order: SchemeOrder::Two,
            splitting: Splitting::Strang,
            record_every: 1,
            snapshot_every: 0,
            eps_support: 1e-6,
            jump_limit: None,
            max_grad_limit: None,
            min_rho_limit: 1e-8,
        }
    }
}

/// Command-line overrides shared by `plan` and `simulate`.
#[derive(clap::Args, Debug, Default, Clone)]
pub struct Overrides {
    /// Config file (INI-style sections; flags override file values)
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Adiabatic exponent (> 1)
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Stress relaxation time (> 0)
    #[arg(long)]
    pub tau: Option<f64>,
    /// Background density (> 0)
    #[arg(long = "rho-bar")]
    pub rho_bar: Option<f64>,
    /// Profile plateau amplitude (selects explicit data)
    #[arg(long = "L")]
    pub l_amp: Option<f64>,
    /// Profile half-width, even integer (selects explicit data)
    #[arg(long = "M")]
    pub m_halfwidth: Option<u64>,
    /// Support radius of the non-velocity data
    #[arg(long = "R")]
    pub r_support: Option<f64>,
    /// Cell width
    #[arg(long)]
    pub dx: Option<f64>,
    /// CFL number in (0, 1)
    #[arg(long)]
    pub cfl: Option<f64>,
    /// Simulation end time
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Spatial order: 1 or 2
    #[arg(long)]
    pub order: Option<u8>,
    /// Source splitting: godunov or strang
    #[arg(long)]
    pub splitting: Option<String>,
    /// Velocity profile variant: corrected or printed
    #[arg(long = "profile-variant")]
    pub profile_variant: Option<String>,
}

fn bad(line: usize, what: impl std::fmt::Display) -> Error {
    Error::Config(format!("config line {line}: {what}"))
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| bad(line, format!("{key} expects a number, got {v:?}")))
}

fn parse_u64(line: usize, key: &str, v: &str) -> Result<u64> {
    v.parse::<u64>().map_err(|_| {
        bad(
            line,
            format!("{key} expects a non-negative integer, got {v:?}"),
        )
    })
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(line, format!("{key} expects true or false, got {v:?}"))),
    }
}

pub fn parse_order(v: &str) -> Result<SchemeOrder> {
    match v {
        "1" => Ok(SchemeOrder::One),
        "2" => Ok(SchemeOrder::Two),
        _ => Err(Error::Config(format!("order must be 1 or 2, got {v:?}"))),
    }
}

pub fn parse_splitting(v: &str) -> Result<Splitting> {
    match v {
        "godunov" => Ok(Splitting::Godunov),
        "strang" => Ok(Splitting::Strang),
        _ => Err(Error::Config(format!(
            "splitting must be godunov or strang, got {v:?}"
        ))),
    }
}

pub fn parse_variant(v: &str) -> Result<ProfileVariant> {
    match v {
        "corrected" => Ok(ProfileVariant::Corrected),
        "printed" => Ok(ProfileVariant::Printed),
        _ => Err(Error::Config(format!(
            "profile variant must be corrected or printed, got {v:?}"
        ))),
    }
}

impl Settings {
    fn apply_kv(&mut self, line: usize, section: &str, key: &str, value: &str) -> Result<()> {
        match (section, key) {
            ("model", "gamma") => self.gamma = parse_f64(line, key, value)?,
            ("model", "tau") => self.tau = parse_f64(line, key, value)?,
            ("model", "rho_bar") => self.rho_bar = parse_f64(line, key, value)?,

            ("profile", "plan") => {
                if parse_bool(line, key, value)? {
                    self.mode = DataMode::Planned;
                }
            }
            ("profile", "equilibrium") => {
                if parse_bool(line, key, value)? {
                    self.mode = DataMode::Equilibrium;
                }
            }
            ("profile", "L") => self.l_amp = parse_f64(line, key, value)?,
            ("profile", "M") => self.m_halfwidth = parse_u64(line, key, value)?,
            ("profile", "R") => self.r_support = parse_f64(line, key, value)?,
            ("profile", "variant") => {
                self.variant = parse_variant(value).map_err(|e| bad(line, e))?
            }
            ("profile", "max_M") => self.max_m = parse_u64(line, key, value)?,

            ("grid", "dx") => self.dx = parse_f64(line, key, value)?,
            ("grid", "x_half") => self.x_half = Some(parse_f64(line, key, value)?),
            ("grid", "margin") => self.margin = Some(parse_f64(line, key, value)?),

            ("run", "cfl") => self.cfl = parse_f64(line, key, value)?,
            ("run", "t_end") => self.t_end = parse_f64(line, key, value)?,
            ("run", "order") => self.order = parse_order(value).map_err(|e| bad(line, e))?,
            ("run", "splitting") => {
                self.splitting = parse_splitting(value).map_err(|e| bad(line, e))?
            }
            ("run", "record_every") => self.record_every = parse_u64(line, key, value)?,
            ("run", "snapshot_every") => self.snapshot_every = parse_u64(line, key, value)?,

            ("diagnostics", "eps_support") => self.eps_support = parse_f64(line, key, value)?,
            ("diagnostics", "jump_limit") => self.jump_limit = Some(parse_f64(line, key, value)?),
            ("diagnostics", "max_grad_limit") => {
                self.max_grad_limit = Some(parse_f64(line, key, value)?)
            }
            ("diagnostics", "min_rho_limit") => self.min_rho_limit = parse_f64(line, key, value)?,

            _ => return Err(bad(line, format!("unknown setting [{section}] {key}"))),
        }
        Ok(())
    }

    /// Parse an INI-style config file into `self`.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = match raw.find(['#', ';']) {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let stripped = stripped.trim();
            if stripped.is_empty() {
                continue;
            }
            if let Some(name) = stripped.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| bad(line, "unterminated section header"))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = stripped
                .split_once('=')
                .ok_or_else(|| bad(line, format!("expected key = value, got {stripped:?}")))?;
            if section.is_empty() {
                return Err(bad(line, "setting appears before any [section] header"));
            }
            self.apply_kv(line, &section, key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Apply command-line overrides on top (explicit `--L`/`--M` switch a
    /// planned run back to explicit data).
    pub fn apply_overrides(&mut self, ov: &Overrides) -> Result<()> {
        if let Some(v) = ov.gamma {
            self.gamma = v;
        }
        if let Some(v) = ov.tau {
            self.tau = v;
        }
        if let Some(v) = ov.rho_bar {
            self.rho_bar = v;
        }
        if let Some(v) = ov.l_amp {
            self.l_amp = v;
            self.mode = DataMode::Explicit;
        }
        if let Some(v) = ov.m_halfwidth {
            self.m_halfwidth = v;
            self.mode = DataMode::Explicit;
        }
        if let Some(v) = ov.r_support {
            self.r_support = v;
        }
        if let Some(v) = ov.dx {
            self.dx = v;
        }
        if let Some(v) = ov.cfl {
            self.cfl = v;
        }
        if let Some(v) = ov.t_end {
            self.t_end = v;
        }
        if let Some(v) = &ov.order {
            self.order = parse_order(&v.to_string())?;
        }
        if let Some(v) = &ov.splitting {
            self.splitting = parse_splitting(v)?;
        }
        if let Some(v) = &ov.profile_variant {
            self.variant = parse_variant(v)?;
        }
        Ok(())
    }

    /// Resolve the full settings for a subcommand invocation.
    pub fn resolve(ov: &Overrides) -> Result<Settings> {
        let mut s = Settings::default();
        if let Some(path) = &ov.config {
            s.apply_file(path)?;
        }
        s.apply_overrides(ov)?;
        Ok(s)
    }

    /// Flat key/value echo of every resolved setting (manifest record).
    pub fn echo(&self) -> BTreeMap<String, serde_json::Value> {
        use serde_json::Value;
        let mut map = BTreeMap::new();
        map.insert("model.gamma".into(), Value::from(self.gamma));
        map.insert("model.tau".into(), Value::from(self.tau));
        map.insert("model.rho_bar".into(), Value::from(self.rho_bar));
        map.insert(
            "profile.mode".into(),
            Value::from(match self.mode {
                DataMode::Equilibrium => "equilibrium",
                DataMode::Explicit => "explicit",
                DataMode::Planned => "planned",
            }),
        );
        map.insert("profile.L".into(), Value::from(self.l_amp));
        map.insert("profile.M".into(), Value::from(self.m_halfwidth));
        map.insert("profile.R".into(), Value::from(self.r_support));
        map.insert(
            "profile.variant".into(),
            Value::from(match self.variant {
                ProfileVariant::Corrected => "corrected",
                ProfileVariant::Printed => "printed",
            }),
        );
        map.insert("profile.max_M".into(), Value::from(self.max_m));
        map.insert("grid.dx".into(), Value::from(self.dx));
        if let Some(h) = self.x_half {
            map.insert("grid.x_half".into(), Value::from(h));
        }
        if let Some(m) = self.margin {
            map.insert("grid.margin".into(), Value::from(m));
        }
        map.insert("run.cfl".into(), Value::from(self.cfl));
        map.insert("run.t_end".into(), Value::from(self.t_end));
        map.insert(
            "run.order".into(),
            Value::from(match self.order {
                SchemeOrder::One => 1u64,
                SchemeOrder::Two => 2u64,
            }),
        );
        map.insert(
            "run.splitting".into(),
            Value::from(match self.splitting {
                Splitting::Godunov => "godunov",
                Splitting::Strang => "strang",
            }),
        );
        map.insert("run.record_every".into(), Value::from(self.record_every));
        map.insert(
            "run.snapshot_every".into(),
            Value::from(self.snapshot_every),
        );
        map.insert(
            "diagnostics.eps_support".into(),
            Value::from(self.eps_support),
        );
        if let Some(j) = self.jump_limit {
            map.insert("diagnostics.jump_limit".into(), Value::from(j));
        }
        map.insert(
            "diagnostics.max_grad_limit".into(),
            Value::from(self.resolved_grad_limit()),
        );
        map.insert(
            "diagnostics.min_rho_limit".into(),
            Value::from(self.min_rho_limit),
        );
        map
    }

    /// The gradient-detector threshold actually handed to the solver.
    pub fn resolved_grad_limit(&self) -> f64 {
        match (self.jump_limit, self.max_grad_limit) {
            (Some(jump), _) => jump / self.dx,
            (None, Some(limit)) => limit,
            (None, None) => 1e7,
        }
    }
}

// ============================================================================
// Tests
// ============================================================================
