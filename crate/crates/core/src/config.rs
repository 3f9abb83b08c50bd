//! Flat key = value configuration files with [section] headers.
//!
//! Lines are `key = value`, `# comment`, or `[section]`.  Every error
//! carries the line number so malformed files are easy to fix.

use crate::boundary::FeedbackMatrix;
use crate::error::{Error, Result};
use crate::macroscopic::{MacroConfig, MacroScheme, SigmaInit};
use crate::solver::{InitialCondition, SimConfig};
use crate::stability::FieldSpec;

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    /// section -> key -> (value, line number)
    sections: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, (String, usize)>> = BTreeMap::new();
        let mut current = String::from("global");
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') || line.len() < 3 {
                    return Err(Error::Config(format!(
                        "line {}: malformed section header '{raw}'",
                        lineno + 1
                    )));
                }
                current = line[1..line.len() - 1].trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected 'key = value', got '{raw}'",
                    lineno + 1
                )));
            };
            let key = line[..eq].trim().to_string();
            let value = line[eq + 1..].trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(Error::Config(format!(
                    "line {}: empty key or value in '{raw}'",
                    lineno + 1
                )));
            }
            sections
                .entry(current.clone())
                .or_default()
                .insert(key, (value, lineno + 1));
        }
        Ok(Self { sections })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    fn raw(&self, section: &str, key: &str) -> Option<&(String, usize)> {
        self.sections.get(section).and_then(|s| s.get(key))
    }

    pub fn f64_opt(&self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.raw(section, key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<f64>().map(Some).map_err(|_| {
                Error::Config(format!("line {line}: [{section}] {key} = '{v}' is not a number"))
            }),
        }
    }

    pub fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(section, key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.raw(section, key) {
            None => Ok(default),
            Some((v, line)) => v.parse::<usize>().map_err(|_| {
                Error::Config(format!(
                    "line {line}: [{section}] {key} = '{v}' is not a nonnegative integer"
                ))
            }),
        }
    }

    pub fn str_opt(&self, section: &str, key: &str) -> Option<&str> {
        self.raw(section, key).map(|(v, _)| v.as_str())
    }

    pub fn bool_or(&self, section: &str, key: &str, default: bool) -> Result<bool> {
        match self.raw(section, key) {
            None => Ok(default),
            Some((v, line)) => match v.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                other => Err(Error::Config(format!(
                    "line {line}: [{section}] {key} = '{other}' is not a boolean"
                ))),
            },
        }
    }

    fn line_of(&self, section: &str, key: &str) -> usize {
        self.raw(section, key).map(|&(_, l)| l).unwrap_or(0)
    }
}

/// Feedback matrix from the [feedback] section: either a named profile or
/// explicit entries, with optional limit entries.
pub fn feedback_from(cfg: &ConfigFile) -> Result<FeedbackMatrix> {
    let mut k = match cfg.str_opt("feedback", "profile") {
        Some("periodic") => FeedbackMatrix::periodic(),
        Some("reflective") => FeedbackMatrix::reflective(),
        Some("symmetric") => {
            let kv = cfg.f64_opt("feedback", "k")?.ok_or_else(|| {
                Error::Config("[feedback] profile = symmetric needs k = <value>".into())
            })?;
            FeedbackMatrix::symmetric(kv)
        }
        Some(other) => {
            return Err(Error::Config(format!(
                "line {}: unknown feedback profile '{other}' (periodic, reflective, symmetric)",
                cfg.line_of("feedback", "profile")
            )))
        }
        None => {
            let k00 = cfg.f64_opt("feedback", "k00")?;
            let k01 = cfg.f64_opt("feedback", "k01")?;
            let k10 = cfg.f64_opt("feedback", "k10")?;
            let k11 = cfg.f64_opt("feedback", "k11")?;
            match (k00, k01, k10, k11) {
                (Some(a), Some(b), Some(c), Some(d)) => FeedbackMatrix::new(a, b, c, d),
                (None, None, None, None) => FeedbackMatrix::periodic(),
                _ => {
                    return Err(Error::Config(
                        "[feedback] needs all four of k00, k01, k10, k11 (or a profile)".into(),
                    ))
                }
            }
        }
    };
    if let Some(v) = cfg.f64_opt("feedback", "k00_0")? {
        k.k00_0 = v;
    }
    if let Some(v) = cfg.f64_opt("feedback", "k01_0")? {
        k.k01_0 = v;
    }
    if let Some(v) = cfg.f64_opt("feedback", "k10_0")? {
        k.k10_0 = v;
    }
    if let Some(v) = cfg.f64_opt("feedback", "k11_0")? {
        k.k11_0 = v;
    }
    if !k.is_finite() {
        return Err(Error::Config("feedback entries must be finite".into()));
    }
    Ok(k)
}

pub fn field_from(cfg: &ConfigFile) -> Result<FieldSpec> {
    match cfg.str_opt("field", "family") {
        None | Some("zero") => Ok(FieldSpec::Zero),
        Some("sine") => {
            let amplitude = cfg.f64_or("field", "amplitude", 0.0)?;
            Ok(FieldSpec::Sine { amplitude })
        }
        Some(other) => Err(Error::Config(format!(
            "line {}: unsupported field family '{other}' (zero, sine)",
            cfg.line_of("field", "family")
        ))),
    }
}

fn initial_from(cfg: &ConfigFile, nx: usize, nv: usize, base: Option<&Path>) -> Result<InitialCondition> {
    match cfg.str_opt("initial", "family") {
        None | Some("cosine-density") => Ok(InitialCondition::CosineDensity),
        Some("odd-flux") => Ok(InitialCondition::OddFlux),
        Some("custom-table") => {
            let rel = cfg.str_opt("initial", "table").ok_or_else(|| {
                Error::Config("[initial] family = custom-table needs table = <path>".into())
            })?;
            let path = match base {
                Some(dir) => dir.join(rel),
                None => rel.into(),
            };
            let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            let mut values = Vec::with_capacity(nx * nv);
            for tok in text.split_whitespace().flat_map(|t| t.split(',')) {
                if tok.is_empty() {
                    continue;
                }
                values.push(tok.parse::<f64>().map_err(|_| {
                    Error::Config(format!("custom table: '{tok}' is not a number"))
                })?);
            }
            if values.len() != nx * nv {
                return Err(Error::Config(format!(
                    "custom table holds {} values, grid expects {}",
                    values.len(),
                    nx * nv
                )));
            }
            Ok(InitialCondition::CustomTable(values))
        }
        Some(other) => Err(Error::Config(format!(
            "line {}: unknown initial family '{other}' (cosine-density, odd-flux, custom-table)",
            cfg.line_of("initial", "family")
        ))),
    }
}

/// Assemble a kinetic run configuration; `base` resolves relative table
/// paths.  Runs validate the decay hypotheses by default; the config key
/// `[run] exploratory = true` opts out, and `cli_strict` overrides it.
pub fn kinetic_config(cfg: &ConfigFile, base: Option<&Path>, cli_strict: bool) -> Result<SimConfig> {
    let nx = cfg.usize_or("grid", "nx", 64)?;
    let nv = cfg.usize_or("grid", "nv", 64)?;
    let vmax = cfg.f64_or("grid", "vmax", 8.0)?;
    let tail_tol = cfg.f64_or("grid", "tail_tol", 1e-12)?;
    let epsilon = cfg.f64_or("run", "epsilon", 1.0)?;
    let t_end = cfg.f64_or("run", "t_end", 1.0)?;
    let dt = match cfg.str_opt("run", "dt") {
        None | Some("auto") => None,
        Some(_) => Some(cfg.f64_opt("run", "dt")?.unwrap()),
    };
    let output_every = cfg.usize_or("run", "output_every", 50)?;
    let exploratory = cfg.bool_or("run", "exploratory", false)?;
    let strict = cli_strict || !exploratory;
    Ok(SimConfig {
        nx,
        nv,
        vmax,
        tail_tol,
        epsilon,
        k: feedback_from(cfg)?,
        field: field_from(cfg)?,
        c_s: cfg.f64_or("constants", "c_s", 1.0)?,
        a: cfg.f64_or("constants", "a", 0.05)?,
        t_end,
        dt,
        output_every,
        initial: initial_from(cfg, nx, nv, base)?,
        strict,
    })
}

pub fn macro_config(cfg: &ConfigFile) -> Result<MacroConfig> {
    let nx = cfg.usize_or("macro", "nx", 128)?;
    let t_end = cfg.f64_or("macro", "t_end", 0.01)?;
    let dt = match cfg.str_opt("macro", "dt") {
        None | Some("auto") => None,
        Some(_) => Some(cfg.f64_opt("macro", "dt")?.unwrap()),
    };
    let scheme = match cfg.str_opt("macro", "scheme") {
        None | Some("explicit") => MacroScheme::Explicit,
        Some("implicit") => MacroScheme::Implicit,
        Some(other) => {
            return Err(Error::Config(format!(
                "unknown macro scheme '{other}' (explicit, implicit)"
            )))
        }
    };
    let sigma0 = match cfg.str_opt("macro", "sigma0") {
        None | Some("cosine") => SigmaInit::Cosine,
        Some("sine") => SigmaInit::Sine,
        Some("zero") => SigmaInit::Zero,
        Some("constant") => SigmaInit::Constant(cfg.f64_or("macro", "constant", 1.0)?),
        Some(other) => {
            return Err(Error::Config(format!(
                "unknown macro sigma0 family '{other}' (cosine, sine, zero, constant)"
            )))
        }
    };
    Ok(MacroConfig {
        nx,
        field: field_from(cfg)?,
        k0: feedback_from(cfg)?,
        t_end,
        dt,
        scheme,
        sigma0,
        output_every: cfg.usize_or("macro", "output_every", 100)?,
    })
}

pub fn sweep_epsilons(cfg: &ConfigFile) -> Result<Vec<f64>> {
    let raw = cfg.str_opt("sweep", "epsilons").ok_or_else(|| {
        Error::Config("[sweep] needs epsilons = <comma-separated list>".into())
    })?;
    let mut out = Vec::new();
    for tok in raw.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let e: f64 = tok
            .parse()
            .map_err(|_| Error::Config(format!("[sweep] epsilons: '{tok}' is not a number")))?;
        if !(e > 0.0 && e <= 1.0) {
            return Err(Error::Config(format!(
                "[sweep] epsilons must lie in (0,1], got {e}"
            )));
        }
        out.push(e);
    }
    if out.is_empty() {
        return Err(Error::Config("[sweep] epsilons list is empty".into()));
    }
    Ok(out)
}
