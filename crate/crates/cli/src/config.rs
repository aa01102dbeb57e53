//! Run configuration: defaults, a flat `key = value` file (or the config
//! echo of an earlier `report.json`), then command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hypershoot::{ExponentPair, IntegratorControls, SeedRegion, SpaceDim};
use serde::{Serialize, Serializer};

/// A configuration problem, always tied to the key that caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { key: key.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Evenly spaced axis `lo:hi:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Grid {
    /// Grid values; geometric spacing when `log` is set.
    pub fn values(&self, log: bool) -> Vec<f64> {
        let m = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let s = i as f64 / m;
                if log {
                    (self.lo.ln() + (self.hi.ln() - self.lo.ln()) * s).exp()
                } else {
                    self.lo + (self.hi - self.lo) * s
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts.as_slice() else {
            return Err(format!("expected lo:hi:count, got {s:?}"));
        };
        let lo: f64 = lo.trim().parse().map_err(|e| format!("lower end {lo:?}: {e}"))?;
        let hi: f64 = hi.trim().parse().map_err(|e| format!("upper end {hi:?}: {e}"))?;
        let count: usize = count.trim().parse().map_err(|e| format!("count {count:?}: {e}"))?;
        Ok(Grid { lo, hi, count })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.count)
    }
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Every setting of a run. Field names in the serialized form are the
/// config keys, which are also the long flag names.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub n: u32,
    pub p: f64,
    pub q: f64,
    #[serde(rename = "rel-tol")]
    pub rel_tol: f64,
    #[serde(rename = "abs-tol")]
    pub abs_tol: f64,
    pub t0: f64,
    #[serde(rename = "T-max")]
    pub t_max: f64,
    #[serde(rename = "blowup-threshold")]
    pub blowup_threshold: f64,
    #[serde(rename = "decay-margin")]
    pub decay_margin: f64,
    #[serde(rename = "seed-lo")]
    pub seed_lo: f64,
    #[serde(rename = "seed-hi")]
    pub seed_hi: f64,
    #[serde(rename = "seed-points")]
    pub seed_points: usize,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    #[serde(rename = "out-dir")]
    pub out_dir: PathBuf,
    #[serde(rename = "override-regime")]
    pub override_regime: bool,
    #[serde(rename = "grid-p")]
    pub grid_p: Grid,
    #[serde(rename = "grid-q")]
    pub grid_q: Grid,
    #[serde(rename = "grid-a")]
    pub grid_a: Grid,
    #[serde(rename = "grid-b")]
    pub grid_b: Grid,
    /// Geometric spacing of the `(a, b)` grid.
    #[serde(rename = "log-grid")]
    pub log_grid: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ctl = IntegratorControls::<f64>::default();
        let seed = SeedRegion::<f64>::default();
        RunConfig {
            n: 3,
            p: 3.0,
            q: 3.0,
            rel_tol: ctl.rel_tol,
            abs_tol: ctl.abs_tol,
            t0: ctl.t0,
            t_max: ctl.t_max,
            blowup_threshold: ctl.blowup_threshold,
            decay_margin: ctl.decay_margin,
            seed_lo: seed.lo,
            seed_hi: seed.hi,
            seed_points: seed.points,
            jobs: 0,
            out_dir: PathBuf::from("hypershoot-out"),
            override_regime: false,
            grid_p: Grid { lo: 1.5, hi: 6.0, count: 10 },
            grid_q: Grid { lo: 1.5, hi: 6.0, count: 10 },
            grid_a: Grid { lo: 0.5, hi: 20.0, count: 12 },
            grid_b: Grid { lo: 0.5, hi: 20.0, count: 12 },
            log_grid: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.trim().parse().map_err(|e| ConfigError::new(key, format!("cannot parse {value:?}: {e}")))
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "N" => self.n = parse(key, value)?,
            "p" => self.p = parse(key, value)?,
            "q" => self.q = parse(key, value)?,
            "rel-tol" => self.rel_tol = parse(key, value)?,
            "abs-tol" => self.abs_tol = parse(key, value)?,
            "t0" => self.t0 = parse(key, value)?,
            "T-max" => self.t_max = parse(key, value)?,
            "blowup-threshold" => self.blowup_threshold = parse(key, value)?,
            "decay-margin" => self.decay_margin = parse(key, value)?,
            "seed-lo" => self.seed_lo = parse(key, value)?,
            "seed-hi" => self.seed_hi = parse(key, value)?,
            "seed-points" => self.seed_points = parse(key, value)?,
            "jobs" => self.jobs = parse(key, value)?,
            "out-dir" => self.out_dir = PathBuf::from(value.trim()),
            "override-regime" => self.override_regime = parse(key, value)?,
            "grid-p" => self.grid_p = parse(key, value)?,
            "grid-q" => self.grid_q = parse(key, value)?,
            "grid-a" => self.grid_a = parse(key, value)?,
            "grid-b" => self.grid_b = parse(key, value)?,
            "log-grid" => self.log_grid = parse(key, value)?,
            _ => return Err(ConfigError::new(key, "unknown key")),
        }
        Ok(())
    }

    /// Applies a config file: either `key = value` lines (`#` starts a
    /// comment) or a JSON object whose `config` member (or the object
    /// itself) maps keys to values.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        for (key, value) in parse_pairs(&text).map_err(|m| ConfigError::new("config", m))? {
            self.set(&key, &value)?;
        }
        Ok(())
    }

    pub fn controls(&self) -> IntegratorControls<f64> {
        IntegratorControls {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            t_max: self.t_max,
            blowup_threshold: self.blowup_threshold,
            t0: self.t0,
            decay_margin: self.decay_margin,
        }
    }

    pub fn seed(&self) -> SeedRegion<f64> {
        SeedRegion { lo: self.seed_lo, hi: self.seed_hi, points: self.seed_points, ..SeedRegion::default() }
    }

    pub fn dim(&self) -> Result<SpaceDim, ConfigError> {
        SpaceDim::new(self.n).map_err(|e| ConfigError::new("N", e.to_string()))
    }

    pub fn pair(&self) -> Result<ExponentPair<f64>, ConfigError> {
        for (key, x) in [("p", self.p), ("q", self.q)] {
            if !(x.is_finite() && x > 1.0) {
                return Err(ConfigError::new(key, format!("exponent {x} must be finite and > 1")));
            }
        }
        ExponentPair::new(self.p, self.q).map_err(|e| ConfigError::new("p", e.to_string()))
    }

    /// Checks the integrator controls and the seed region.
    pub fn validate_run(&self) -> Result<(), ConfigError> {
        self.controls().validate().map_err(|e| {
            let text = e.to_string();
            let field = text.split(": ").nth(1).unwrap_or("");
            let key = match field {
                "rel_tol" => "rel-tol",
                "abs_tol" => "abs-tol",
                "t0" => "t0",
                "t_max" => "T-max",
                "blowup_threshold" => "blowup-threshold",
                "decay_margin" => "decay-margin",
                _ => "config",
            };
            ConfigError::new(key, text)
        })?;
        if !(self.seed_lo > 0.0 && self.seed_lo.is_finite()) {
            return Err(ConfigError::new("seed-lo", "must be positive and finite"));
        }
        if !(self.seed_hi > self.seed_lo && self.seed_hi.is_finite()) {
            return Err(ConfigError::new("seed-hi", "must be finite and exceed seed-lo"));
        }
        if self.seed_points < 2 {
            return Err(ConfigError::new("seed-points", "must be at least 2"));
        }
        Ok(())
    }

    /// Checks one sweep axis.
    pub fn validate_grid(key: &str, g: &Grid, log: bool) -> Result<(), ConfigError> {
        if g.count < 2 {
            return Err(ConfigError::new(key, format!("needs at least 2 points per axis, got {}", g.count)));
        }
        if !(g.lo.is_finite() && g.hi.is_finite() && g.lo < g.hi) {
            return Err(ConfigError::new(key, format!("needs finite ends with lo < hi, got {g}")));
        }
        if log && !(g.lo > 0.0) {
            return Err(ConfigError::new(key, "geometric spacing needs a positive lower end"));
        }
        Ok(())
    }
}

/// Splits a config file into `(key, value)` pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, String> {
    if text.trim_start().starts_with('{') {
        let json: serde_json::Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
        let obj = json.get("config").unwrap_or(&json);
        let obj = obj.as_object().ok_or("JSON config must be an object")?;
        return Ok(obj
            .iter()
            .filter(|(_, v)| !v.is_null())
            .map(|(k, v)| {
                let value = match v {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                (k.clone(), value)
            })
            .collect());
    }
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {}: expected key = value, got {raw:?}", i + 1));
        };
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// All config keys, in echo order.
    const KEYS: [&str; 21] = [
        "N",
        "p",
        "q",
        "rel-tol",
        "abs-tol",
        "t0",
        "T-max",
        "blowup-threshold",
        "decay-margin",
        "seed-lo",
        "seed-hi",
        "seed-points",
        "jobs",
        "out-dir",
        "override-regime",
        "grid-p",
        "grid-q",
        "grid-a",
        "grid-b",
        "log-grid",
        "config",
    ];

    #[test]
    fn grid_parsing() {
        let g: Grid = "1.5:6:10".parse().unwrap();
        assert_eq!(g, Grid { lo: 1.5, hi: 6.0, count: 10 });
        assert_eq!(g.to_string().parse::<Grid>().unwrap(), g);
        assert!("1:2".parse::<Grid>().is_err());
        assert!("1:x:3".parse::<Grid>().is_err());
        let v = Grid { lo: 1.0, hi: 100.0, count: 3 }.values(true);
        assert!((v[1] - 10.0).abs() < 1e-12);
        assert_eq!(Grid { lo: 0.0, hi: 1.0, count: 3 }.values(false), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn key_value_files() {
        let pairs = parse_pairs("# comment\nN = 4\n\np=2.5 # trailing\n").unwrap();
        assert_eq!(pairs, vec![("N".into(), "4".into()), ("p".into(), "2.5".into())]);
        assert!(parse_pairs("N 4").is_err());
    }

    #[test]
    fn json_echo_round_trips() {
        let mut cfg = RunConfig { p: 2.0, q: 4.0, rel_tol: 1.0 / 3.0 * 1e-10, ..RunConfig::default() };
        cfg.grid_a = Grid { lo: 0.1, hi: 7.0, count: 5 };
        let echo = serde_json::json!({ "schema_version": 1, "config": cfg });
        let mut back = RunConfig::default();
        for (k, v) in parse_pairs(&echo.to_string()).unwrap() {
            back.set(&k, &v).unwrap();
        }
        assert_eq!(back, cfg);
    }

    #[test]
    fn every_key_is_settable() {
        let cfg = RunConfig::default();
        let json = serde_json::to_value(&cfg).unwrap();
        let obj = json.as_object().unwrap();
        assert_eq!(obj.len() + 1, KEYS.len());
        for key in obj.keys() {
            assert!(KEYS.contains(&key.as_str()), "{key}");
        }
    }

    #[test]
    fn errors_name_the_key() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.set("rel-tol", "abc").unwrap_err().key, "rel-tol");
        assert_eq!(cfg.set("bogus", "1").unwrap_err().key, "bogus");
        cfg.t0 = 0.5;
        assert_eq!(cfg.validate_run().unwrap_err().key, "t0");
        let cfg = RunConfig { t_max: 0.0, ..RunConfig::default() };
        assert_eq!(cfg.validate_run().unwrap_err().key, "T-max");
        let cfg = RunConfig { seed_points: 1, ..RunConfig::default() };
        assert_eq!(cfg.validate_run().unwrap_err().key, "seed-points");
        let cfg = RunConfig { q: 1.0, ..RunConfig::default() };
        assert_eq!(cfg.pair().unwrap_err().key, "q");
        let g = Grid { lo: 5.0, hi: 5.0, count: 1 };
        assert_eq!(RunConfig::validate_grid("grid-p", &g, false).unwrap_err().key, "grid-p");
    }
}
