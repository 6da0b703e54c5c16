//! INI run configuration.
//!
//! `[section]` headers, `key = value` lines, `#` or `;` comments. Every key
//! must appear in [`SCHEMA`]; anything else is rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use fklab_core::chain_opt::SolverOptions;
use fklab_core::environments::{AlphaValue, EnvKind, EnvPoint};
use fklab_core::lagrangians::{BumpSpec, LagrangianSpec, Potential, Spring};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key [{section}] {key}")]
    UnknownKey { section: String, key: String },
    #[error("[{section}] {key}: {msg}")]
    Value { section: String, key: String, msg: String },
    #[error("{0}")]
    Invalid(String),
}

type Result<T> = std::result::Result<T, ConfigError>;

/// Accepted `(section, key)` pairs.
pub const SCHEMA: &[(&str, &[&str])] = &[
    ("environment", &["variant", "alpha", "offset", "phase", "phase1", "phase2", "seed"]),
    ("lagrangian", &["spring", "lambda", "k", "k1", "k2", "a0", "a1"]),
    (
        "grid",
        &["h", "jump_cap", "max_sweeps", "tol", "n_list", "x_max", "mane_h", "n_max", "n_outer", "window", "samples"],
    ),
    ("lp", &["n", "t_max", "threshold"]),
    ("tower", &["window", "levels"]),
    ("report", &["lo", "hi", "radius", "interval", "pairs"]),
    ("output", &["directory", "formats"]),
];

/// Raw `section → key → value` map, after schema validation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Ini {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Ini {
    pub fn parse(text: &str) -> Result<Self> {
        let mut ini = Ini::default();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::Syntax { line, msg: format!("malformed section header {s:?}") })?
                    .trim()
                    .to_ascii_lowercase();
                if !SCHEMA.iter().any(|(sec, _)| *sec == name) {
                    return Err(ConfigError::Syntax { line, msg: format!("unknown section [{name}]") });
                }
                ini.sections.entry(name.clone()).or_default();
                current = Some(name);
                continue;
            }
            let (key, value) =
                s.split_once('=').ok_or_else(|| ConfigError::Syntax { line, msg: format!("expected key = value, got {s:?}") })?;
            let key = key.trim().to_ascii_lowercase();
            let section = current.clone().ok_or_else(|| ConfigError::Syntax { line, msg: "key before any section".into() })?;
            let allowed = SCHEMA.iter().find(|(sec, _)| *sec == section).map(|(_, k)| *k).unwrap_or_default();
            if !allowed.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey { section, key });
            }
            let slot = ini.sections.get_mut(&section).expect("section registered");
            if slot.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(ConfigError::Syntax { line, msg: format!("duplicate key [{section}] {key}") });
            }
        }
        Ok(ini)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(section, key)
            .map(|v| {
                v.parse::<T>().map_err(|e| ConfigError::Value {
                    section: section.into(),
                    key: key.into(),
                    msg: format!("cannot parse {v:?}: {e}"),
                })
            })
            .transpose()
    }

    fn real(&self, section: &str, key: &str, default: Option<f64>, range: (f64, f64)) -> Result<f64> {
        let v = match self.parsed::<f64>(section, key)?.or(default) {
            Some(v) => v,
            None => return Err(value_err(section, key, "required")),
        };
        if !(v.is_finite() && v >= range.0 && v <= range.1) {
            return Err(value_err(section, key, &format!("{v} outside [{}, {}]", range.0, range.1)));
        }
        Ok(v)
    }

    fn int(&self, section: &str, key: &str, default: usize, range: (usize, usize)) -> Result<usize> {
        let v = self.parsed::<usize>(section, key)?.unwrap_or(default);
        if v < range.0 || v > range.1 {
            return Err(value_err(section, key, &format!("{v} outside [{}, {}]", range.0, range.1)));
        }
        Ok(v)
    }

    /// `section.key=value` lines in sorted order.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (sec, keys) in &self.sections {
            for (k, v) in keys {
                out.push_str(&format!("{sec}.{k}={v}\n"));
            }
        }
        out
    }
}

fn value_err(section: &str, key: &str, msg: &str) -> ConfigError {
    ConfigError::Value { section: section.into(), key: key.into(), msg: msg.into() }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSection {
    pub h: Option<f64>,
    pub jump_cap: Option<f64>,
    pub max_sweeps: usize,
    pub tol: f64,
    pub n_list: Vec<usize>,
    pub x_max: f64,
    pub mane_h: f64,
    pub n_max: usize,
    pub n_outer: usize,
    pub window: usize,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSection {
    pub n: usize,
    pub t_max: Option<f64>,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TowerSection {
    pub window: f64,
    pub levels: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportSection {
    pub lo: f64,
    pub hi: f64,
    /// Cylinder radius for sections.
    pub radius: f64,
    /// Half-width `R` of equidistribution intervals.
    pub interval: f64,
    pub pairs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub env: EnvPoint,
    pub model: LagrangianSpec,
    pub seed: u64,
    pub grid: GridSection,
    pub lp: LpSection,
    pub tower: TowerSection,
    pub report: ReportSection,
    pub directory: Option<PathBuf>,
    pub formats: Vec<Format>,
    /// Canonical key listing, the input of [`RunConfig::hash`].
    canonical: String,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_ini(&Ini::parse(&text)?)
    }

    pub fn from_ini(ini: &Ini) -> Result<Self> {
        let variant = ini.get("environment", "variant").ok_or_else(|| value_err("environment", "variant", "required"))?;
        let kind = match variant {
            "circle" => EnvKind::Circle,
            "torus" => EnvKind::Torus,
            "quasicrystal" => EnvKind::Quasicrystal,
            other => return Err(value_err("environment", "variant", &format!("unknown variant {other:?}"))),
        };
        let only = |keys: &[&str], kinds: EnvKind, section: &str| -> Result<()> {
            for k in keys {
                if ini.get(section, k).is_some() && kind != kinds {
                    return Err(value_err(section, k, &format!("not used by the {variant} variant")));
                }
            }
            Ok(())
        };
        only(&["alpha", "offset"], EnvKind::Quasicrystal, "environment")?;
        only(&["phase"], EnvKind::Circle, "environment")?;
        only(&["phase1", "phase2"], EnvKind::Torus, "environment")?;
        only(&["k"], EnvKind::Circle, "lagrangian")?;
        only(&["k1", "k2"], EnvKind::Torus, "lagrangian")?;
        only(&["a0", "a1"], EnvKind::Quasicrystal, "lagrangian")?;

        let big = (-1e6, 1e6);
        let env = match kind {
            EnvKind::Circle => EnvPoint::circle(ini.real("environment", "phase", Some(0.0), big)?),
            EnvKind::Torus => EnvPoint::torus(
                ini.real("environment", "phase1", Some(0.0), big)?,
                ini.real("environment", "phase2", Some(0.0), big)?,
            ),
            EnvKind::Quasicrystal => {
                let alpha: AlphaValue = ini
                    .parsed("environment", "alpha")?
                    .ok_or_else(|| value_err("environment", "alpha", "required"))?;
                EnvPoint::quasicrystal(alpha, ini.real("environment", "offset", Some(0.0), big)?)
            }
        };
        let seed = ini.parsed::<u64>("environment", "seed")?.unwrap_or(0);

        let spring_kind = ini.get("lagrangian", "spring").unwrap_or("quadratic");
        let lambda = ini.real("lagrangian", "lambda", None, (-100.0, 100.0))?;
        let spring = match spring_kind {
            "quadratic" => Spring::Quadratic { lambda },
            "quartic" => Spring::Quartic { lambda },
            other => return Err(value_err("lagrangian", "spring", &format!("unknown spring {other:?}"))),
        };
        let amp = (0.0, 1e4);
        let potential = match kind {
            EnvKind::Circle => Potential::CircleCosine { k: ini.real("lagrangian", "k", Some(0.0), amp)? },
            EnvKind::Torus => Potential::TorusDoubleCosine {
                k1: ini.real("lagrangian", "k1", Some(0.0), amp)?,
                k2: ini.real("lagrangian", "k2", Some(0.0), amp)?,
            },
            EnvKind::Quasicrystal => Potential::QuasicrystalBumps(BumpSpec {
                a0: ini.real("lagrangian", "a0", Some(0.0), amp)?,
                a1: ini.real("lagrangian", "a1", Some(0.0), amp)?,
            }),
        };
        let model = LagrangianSpec::new(spring, potential).map_err(|e| ConfigError::Invalid(e.to_string()))?;

        let n_list = match ini.get("grid", "n_list") {
            None => vec![8, 16, 32, 64],
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| value_err("grid", "n_list", &e.to_string()))?,
        };
        if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 || n_list[n_list.len() - 1] > 64 {
            return Err(value_err("grid", "n_list", "must be strictly increasing values in [1, 64]"));
        }
        let opt_real = |key: &str, range: (f64, f64)| -> Result<Option<f64>> {
            match ini.get("grid", key) {
                None => Ok(None),
                Some(_) => ini.real("grid", key, None, range).map(Some),
            }
        };
        let grid = GridSection {
            h: opt_real("h", (1e-4, 1.0))?,
            jump_cap: opt_real("jump_cap", (1e-3, 200.0))?,
            max_sweeps: ini.int("grid", "max_sweeps", 500, (1, 100_000))?,
            tol: ini.real("grid", "tol", Some(1e-9), (1e-15, 1e-3))?,
            n_list,
            x_max: ini.real("grid", "x_max", Some(4.0), (1e-3, 1e3))?,
            mane_h: ini.real("grid", "mane_h", Some(0.1), (1e-4, 1.0))?,
            n_max: ini.int("grid", "n_max", 32, (1, 100_000))?,
            n_outer: ini.int("grid", "n_outer", 64, (4, 4096))?,
            window: ini.int("grid", "window", 4, (1, 1024))?,
            samples: ini.int("grid", "samples", 16, (10, 10_000))?,
        };
        if grid.n_outer < 4 * grid.window {
            return Err(ConfigError::Invalid(format!("[grid] n_outer = {} below 4·window", grid.n_outer)));
        }
        let lp = LpSection {
            n: ini.int("lp", "n", 32, (8, 512))?,
            t_max: match ini.get("lp", "t_max") {
                None => None,
                Some(_) => Some(ini.real("lp", "t_max", None, (0.0, 100.0))?),
            },
            threshold: ini.real("lp", "threshold", Some(1e-6), (1e-15, 0.999))?,
        };
        let tower = TowerSection {
            window: ini.real("tower", "window", Some(1e5), (1.0, 1e7))?,
            levels: ini.int("tower", "levels", 2, (0, 16))?,
        };
        let report = ReportSection {
            lo: ini.real("report", "lo", Some(0.0), (-1e7, 1e7))?,
            hi: ini.real("report", "hi", Some(100.0), (-1e7, 1e7))?,
            radius: ini.real("report", "radius", Some(3.0), (1e-3, 1e4))?,
            interval: ini.real("report", "interval", Some(3.0), (1e-3, 1e4))?,
            pairs: ini.int("report", "pairs", 32, (0, 100_000))?,
        };
        if !(report.lo < report.hi) {
            return Err(ConfigError::Invalid("[report] lo must be below hi".into()));
        }
        let formats = match ini.get("output", "formats") {
            None => vec![Format::Csv, Format::Json],
            Some(v) => v
                .split(',')
                .map(|s| match s.trim() {
                    "csv" => Ok(Format::Csv),
                    "json" => Ok(Format::Json),
                    o => Err(value_err("output", "formats", &format!("unknown format {o:?}"))),
                })
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(RunConfig {
            env,
            model,
            seed,
            grid,
            lp,
            tower,
            report,
            directory: ini.get("output", "directory").map(PathBuf::from),
            formats,
            canonical: ini.canonical(),
        })
    }

    /// Replaces the seed from the command line.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn writes(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// SHA-256 of the canonical key listing and the effective seed. The
    /// output directory is excluded so moving outputs keeps the hash.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for line in self.canonical.lines().filter(|l| !l.starts_with("output.directory=")) {
            h.update(line.as_bytes());
            h.update(b"\n");
        }
        h.update(format!("seed={}\n", self.seed).as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn solver_options(&self) -> SolverOptions {
        let mut o = SolverOptions::for_model(&self.model);
        if let Some(h) = self.grid.h {
            o.h = h;
        }
        if let Some(c) = self.grid.jump_cap {
            o.jump_cap = c;
        }
        o.max_sweeps = self.grid.max_sweeps;
        o.tol = self.grid.tol;
        o
    }

    pub fn lp_t_max(&self) -> f64 {
        self.lp.t_max.unwrap_or(self.model.lambda().abs() + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CIRCLE: &str = "[environment]\nvariant = circle\n\n[lagrangian]\nlambda = 0.5\nk = 1\n";

    #[test]
    fn parses_minimal_circle() {
        let c = RunConfig::from_ini(&Ini::parse(CIRCLE).unwrap()).unwrap();
        assert_eq!(c.model, LagrangianSpec::circle(0.5, 1.0));
        assert_eq!(c.grid.n_list, vec![8, 16, 32, 64]);
        assert_eq!(c.formats, vec![Format::Csv, Format::Json]);
        assert_eq!(c.lp_t_max(), 1.5);
    }

    #[test]
    fn rejects_unknown_keys_and_sections() {
        let bad = format!("{CIRCLE}colour = red\n");
        assert!(matches!(Ini::parse(&bad), Err(ConfigError::UnknownKey { .. })));
        assert!(matches!(Ini::parse("[extra]\n"), Err(ConfigError::Syntax { .. })));
        assert!(Ini::parse("lambda = 1\n").is_err());
        assert!(Ini::parse("[grid]\nh = 0.1\nh = 0.2\n").is_err());
    }

    #[test]
    fn rejects_wrong_variant_keys_and_ranges() {
        let bad = CIRCLE.replace("k = 1", "k1 = 1");
        assert!(RunConfig::from_ini(&Ini::parse(&bad).unwrap()).is_err());
        let bad = format!("{CIRCLE}[grid]\nh = 5\n");
        assert!(RunConfig::from_ini(&Ini::parse(&bad).unwrap()).is_err());
        let bad = format!("{CIRCLE}[grid]\nn_list = 8, 4\n");
        assert!(RunConfig::from_ini(&Ini::parse(&bad).unwrap()).is_err());
        let bad = CIRCLE.replace("lambda = 0.5\n", "");
        assert!(RunConfig::from_ini(&Ini::parse(&bad).unwrap()).is_err());
    }

    #[test]
    fn quasicrystal_alpha_forms() {
        let text = "[environment]\nvariant = quasicrystal\nalpha = (√5-1)/2\n[lagrangian]\nlambda = 1\na0 = 0.5\na1 = 1\n";
        let c = RunConfig::from_ini(&Ini::parse(text).unwrap()).unwrap();
        assert_eq!(c.env, EnvPoint::quasicrystal(AlphaValue::fibonacci(), 0.0));
        let bad = text.replace("(√5-1)/2", "0.618");
        assert!(RunConfig::from_ini(&Ini::parse(&bad).unwrap()).is_err());
    }

    #[test]
    fn hash_ignores_comments_order_and_directory() {
        let a = RunConfig::from_ini(&Ini::parse(CIRCLE).unwrap()).unwrap();
        let reordered = "# note\n[lagrangian]\nk = 1\nlambda = 0.5\n[environment]\nvariant = circle\n[output]\ndirectory = x\n";
        let b = RunConfig::from_ini(&Ini::parse(reordered).unwrap()).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), a.clone().with_seed(1).hash());
        assert_eq!(a.hash().len(), 64);
    }
}
