//! Sectioned `key = value` run configuration.
//!
//! ```text
//! # comments start with '#' or ';'
//! [run]
//! mode = space-study
//! k = 2
//! [physics]
//! alpha = 0.9
//! ```
//!
//! Section headers are optional, but a key placed under a header must
//! belong to that section.

use std::path::PathBuf;

use crate::assembly::{default_eta, PhysicalParams};
use crate::error::{Error, Result};
use crate::time_basis::MAX_ORDER;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    TimeStudy,
    SpaceStudy,
    SingleRun,
    PropertySuite,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::TimeStudy, Mode::SpaceStudy, Mode::SingleRun, Mode::PropertySuite];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::TimeStudy => "time-study",
            Mode::SpaceStudy => "space-study",
            Mode::SingleRun => "single-run",
            Mode::PropertySuite => "property-suite",
        }
    }

    pub fn is_study(&self) -> bool {
        matches!(self, Mode::TimeStudy | Mode::SpaceStudy)
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("mode must be one of time-study, space-study, single-run, property-suite (got '{s}')")))
    }
}

/// Manufactured solution used by the studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmsSelector {
    Trigonometric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub k: usize,
    pub ell: usize,
    pub levels: usize,
    pub t_final: f64,
    /// Slab count of the coarsest temporal level, and of every spatial level.
    pub slabs: usize,
    /// Cells per side of the coarsest mesh, and of the temporal study mesh.
    pub mesh: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub snapshots: bool,
    /// Physical coefficients; `eta` here is ignored in favour of
    /// [`RunConfig::eta`].
    pub params: PhysicalParams,
    /// Penalty override; `None` selects `4(ℓ+1)²`.
    pub eta: Option<f64>,
    pub mms: MmsSelector,
    pub omega: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::SpaceStudy,
            k: 1,
            ell: 0,
            levels: 4,
            t_final: 0.5,
            slabs: 8,
            mesh: 4,
            seed: 20240601,
            out: PathBuf::from("biot-out"),
            snapshots: false,
            params: PhysicalParams::default(),
            eta: None,
            mms: MmsSelector::Trigonometric,
            omega: 1.0,
        }
    }
}

impl RunConfig {
    pub fn effective_eta(&self) -> f64 {
        self.eta.unwrap_or_else(|| default_eta(self.ell))
    }

    /// Coefficients with the effective penalty filled in.
    pub fn physical_params(&self) -> PhysicalParams {
        PhysicalParams {
            eta: self.effective_eta(),
            ..self.params
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if !(1..=MAX_ORDER).contains(&self.k) {
            return cfg(format!("k must lie in [1, {MAX_ORDER}]"));
        }
        if self.ell > 1 {
            return cfg("ell must be 0 or 1".into());
        }
        if self.mode.is_study() && self.levels < 2 {
            return cfg("levels must be at least 2 for studies".into());
        }
        if self.levels > 8 {
            return cfg("levels must be at most 8".into());
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return cfg("t_final must be positive and finite".into());
        }
        if self.slabs == 0 || self.slabs > 100_000 {
            return cfg("slabs must lie in [1, 100000]".into());
        }
        if self.mesh == 0 || self.mesh > 256 {
            return cfg("mesh must lie in [1, 256]".into());
        }
        if !self.omega.is_finite() {
            return cfg("omega must be finite".into());
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return cfg("eta must be positive and finite".into());
            }
        }
        self.physical_params().validate().map_err(|e| match e {
            Error::Domain(m) => Error::Config(m),
            other => other,
        })
    }
}

const RUN_KEYS: [&str; 10] = ["mode", "k", "ell", "levels", "t_final", "slabs", "mesh", "seed", "out", "snapshots"];
const PHYSICS_KEYS: [&str; 12] = [
    "rho_s", "rho_f", "phi0", "rho_w", "alpha", "s0", "lambda", "mu", "perm_xx", "perm_xy", "perm_yy", "eta",
];
const MMS_KEYS: [&str; 2] = ["case", "omega"];

fn section_of(key: &str) -> Option<&'static str> {
    if RUN_KEYS.contains(&key) {
        Some("run")
    } else if PHYSICS_KEYS.contains(&key) {
        Some("physics")
    } else if MMS_KEYS.contains(&key) {
        Some("mms")
    } else {
        None
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| Error::Config(format!("{key} must be a number (got '{v}')")))?;
    if !x.is_finite() {
        return Err(Error::Config(format!("{key} must be finite")));
    }
    Ok(x)
}

fn parse_uint<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key} must be a non-negative integer (got '{v}')")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key} must be true or false (got '{v}')"))),
    }
}

/// Parses and validates a configuration. Missing keys keep their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut c = RunConfig::default();
    let mut section: Option<String> = None;
    let mut seen: Vec<String> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let line_err = |m: String| Error::Config(format!("line {}: {m}", lineno + 1));
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| line_err("unterminated section header".into()))?
                .trim();
            if !["run", "physics", "mms"].contains(&name) {
                return Err(line_err(format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| line_err(format!("expected 'key = value', got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let home = section_of(key).ok_or_else(|| Error::Config(format!("unknown key '{key}'")))?;
        if let Some(s) = &section {
            if s != home {
                return Err(Error::Config(format!("key '{key}' belongs to section [{home}], not [{s}]")));
            }
        }
        if seen.iter().any(|k| k == key) {
            return Err(Error::Config(format!("duplicate key '{key}'")));
        }
        seen.push(key.to_string());
        match key {
            "mode" => c.mode = value.parse()?,
            "k" => c.k = parse_uint(key, value)?,
            "ell" => c.ell = parse_uint(key, value)?,
            "levels" => c.levels = parse_uint(key, value)?,
            "t_final" => c.t_final = parse_f64(key, value)?,
            "slabs" => c.slabs = parse_uint(key, value)?,
            "mesh" => c.mesh = parse_uint(key, value)?,
            "seed" => c.seed = parse_uint(key, value)?,
            "out" => {
                if value.is_empty() {
                    return Err(Error::Config("out must not be empty".into()));
                }
                c.out = PathBuf::from(value)
            }
            "snapshots" => c.snapshots = parse_bool(key, value)?,
            "rho_s" => c.params.rho_s = parse_f64(key, value)?,
            "rho_f" => c.params.rho_f = parse_f64(key, value)?,
            "phi0" => c.params.phi0 = parse_f64(key, value)?,
            "rho_w" => c.params.rho_w = parse_f64(key, value)?,
            "alpha" => c.params.alpha = parse_f64(key, value)?,
            "s0" => c.params.s0 = parse_f64(key, value)?,
            "lambda" => c.params.lambda = parse_f64(key, value)?,
            "mu" => c.params.mu = parse_f64(key, value)?,
            "perm_xx" => c.params.permeability[0][0] = parse_f64(key, value)?,
            "perm_xy" => {
                let v = parse_f64(key, value)?;
                c.params.permeability[0][1] = v;
                c.params.permeability[1][0] = v;
            }
            "perm_yy" => c.params.permeability[1][1] = parse_f64(key, value)?,
            "eta" => c.eta = if value == "auto" { None } else { Some(parse_f64(key, value)?) },
            "case" => {
                c.mms = match value {
                    "trigonometric" => MmsSelector::Trigonometric,
                    _ => return Err(Error::Config(format!("case must be trigonometric (got '{value}')"))),
                }
            }
            "omega" => c.omega = parse_f64(key, value)?,
            _ => unreachable!("key table and match arms agree"),
        }
    }
    c.params.eta = PhysicalParams::default().eta;
    c.validate()?;
    Ok(c)
}

/// Renders every key explicitly; `parse_config(&render_config(c)) == c`
/// for any valid `c` whose output path is valid UTF-8.
pub fn render_config(c: &RunConfig) -> String {
    let p = &c.params;
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        s.push_str(k);
        s.push_str(" = ");
        s.push_str(&v);
        s.push('\n');
    };
    kv("[run]\nmode", c.mode.as_str().into());
    kv("k", c.k.to_string());
    kv("ell", c.ell.to_string());
    kv("levels", c.levels.to_string());
    kv("t_final", format!("{:?}", c.t_final));
    kv("slabs", c.slabs.to_string());
    kv("mesh", c.mesh.to_string());
    kv("seed", c.seed.to_string());
    kv("out", c.out.display().to_string());
    kv("snapshots", c.snapshots.to_string());
    kv("\n[physics]\nrho_s", format!("{:?}", p.rho_s));
    kv("rho_f", format!("{:?}", p.rho_f));
    kv("phi0", format!("{:?}", p.phi0));
    kv("rho_w", format!("{:?}", p.rho_w));
    kv("alpha", format!("{:?}", p.alpha));
    kv("s0", format!("{:?}", p.s0));
    kv("lambda", format!("{:?}", p.lambda));
    kv("mu", format!("{:?}", p.mu));
    kv("perm_xx", format!("{:?}", p.permeability[0][0]));
    kv("perm_xy", format!("{:?}", p.permeability[0][1]));
    kv("perm_yy", format!("{:?}", p.permeability[1][1]));
    kv("eta", c.eta.map_or_else(|| "auto".to_string(), |e| format!("{e:?}")));
    kv("\n[mms]\ncase", "trigonometric".into());
    kv("omega", format!("{:?}", c.omega));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!((c.k, c.ell, c.t_final, c.effective_eta()), (1, 0, 0.5, 4.0));
    }

    #[test]
    fn alpha_out_of_range() {
        let e = parse_config("alpha = 1.5").unwrap_err().to_string();
        assert!(e.contains("alpha must lie in [phi0, 1]"), "{e}");
    }

    #[test]
    fn unknown_key_named() {
        let e = parse_config("[run]\nfoo = 1").unwrap_err().to_string();
        assert!(e.contains("'foo'"), "{e}");
    }

    #[test]
    fn wrong_section_rejected() {
        assert!(parse_config("[mms]\nalpha = 0.9").is_err());
        assert!(parse_config("[physics]\nalpha = 0.9").is_ok());
    }

    #[test]
    fn duplicate_rejected() {
        assert!(parse_config("k = 1\nk = 2").is_err());
    }

    #[test]
    fn eta_default_follows_ell() {
        let c = parse_config("ell = 1").unwrap();
        assert_eq!(c.effective_eta(), 16.0);
        let c = parse_config("ell = 1\neta = 3.5").unwrap();
        assert_eq!(c.physical_params().eta, 3.5);
    }

    #[test]
    fn round_trip() {
        let mut c = RunConfig {
            mode: Mode::TimeStudy,
            k: 3,
            ell: 1,
            t_final: 0.1 + 0.2,
            eta: Some(7.25),
            omega: 2.0 / 3.0,
            ..Default::default()
        };
        c.params.permeability = [[2.0, 0.1], [0.1, 1.0 / 3.0]];
        let text = render_config(&c);
        assert_eq!(parse_config(&text).unwrap(), c);
    }

    #[test]
    fn studies_need_two_levels() {
        assert!(parse_config("levels = 1").is_err());
        assert!(parse_config("mode = single-run\nlevels = 1").is_ok());
    }
}
