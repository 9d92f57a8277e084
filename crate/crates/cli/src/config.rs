//! Run configuration: `key = value` files (with `#` comments) or a JSON
//! run manifest, merged with command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use phasefront_core::tensor_reduction::{ElasticSystem, ElasticityTensor, SymMatrix};
use phasefront_core::{ModelKind, PotentialSpec};

/// Every key the parser understands. `bc` only appears in manifests and
/// is checked against the model.
const KNOWN_KEYS: &[&str] = &[
    "n", "D", "eps0", "eps1", "t11", "alpha", "beta", "mu",
    "potential", "poly",
    "model", "L", "dx", "dt", "t_end", "snapshot_every", "delta", "seed", "perturb", "bc",
    "profile_half_width", "profile_dx", "decay_lo", "decay_hi",
    "models", "mus", "ac_L", "ac_dx", "ac_t_end", "ch_L", "ch_dx", "ch_t_end", "jobs",
];

/// Pairs of keys that may not both be given.
const CONFLICTS: &[(&str, &str)] = &[
    ("potential", "poly"),
    ("mu", "alpha"),
    ("mu", "beta"),
    ("mu", "t11"),
    ("alpha", "D"),
    ("beta", "D"),
];

/// Raised for malformed or contradictory configuration.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_lines(text)
        }
    }

    fn parse_lines(text: &str) -> Result<Self> {
        let mut raw = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected `key = value`", lineno + 1)))?;
            raw.insert(k.trim(), v.trim())
                .map_err(|e| config_err(format!("line {}: {e}", lineno + 1)))?;
        }
        raw.check()?;
        Ok(raw)
    }

    fn parse_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| config_err(format!("manifest: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| config_err("manifest must be a JSON object"))?;
        let mut raw = Self::default();
        for (k, v) in obj {
            let text = match v {
                serde_json::Value::Null => continue,
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|i| match i {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(","),
                other => other.to_string(),
            };
            raw.insert(k, &text).map_err(config_err)?;
        }
        raw.check()?;
        Ok(raw)
    }

    fn insert(&mut self, key: &str, value: &str) -> Result<(), String> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(format!("unknown key `{key}`"));
        }
        if self.entries.insert(key.to_string(), value.to_string()).is_some() {
            return Err(format!("key `{key}` given twice"));
        }
        Ok(())
    }

    /// Command-line values replace file values.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    /// Removes keys that a flag makes obsolete, so an override never
    /// trips the conflict check.
    pub fn clear(&mut self, keys: &[&str]) {
        for k in keys {
            self.entries.remove(*k);
        }
    }

    pub fn check(&self) -> Result<()> {
        for (a, b) in CONFLICTS {
            if self.has(a) && self.has(b) {
                return Err(config_err(format!("`{a}` and `{b}` are contradictory")));
            }
        }
        Ok(())
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| config_err(format!("`{key}`: `{s}` is not a number")))
            })
            .transpose()
    }

    pub fn positive(&self, key: &str) -> Result<Option<f64>> {
        match self.f64(key)? {
            Some(x) if !(x > 0.0 && x.is_finite()) => {
                Err(config_err(format!("`{key}` must be positive, got {x}")))
            }
            other => Ok(other),
        }
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|s| {
                s.parse::<u64>()
                    .map_err(|_| config_err(format!("`{key}`: `{s}` is not a non-negative integer")))
            })
            .transpose()
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key).map(|s| parse_numbers(key, s)).transpose()
    }

    pub fn model(&self) -> Result<Option<ModelKind>> {
        let Some(s) = self.get("model") else {
            return Ok(None);
        };
        let m: ModelKind = s.parse().map_err(config_err)?;
        if let Some(bc) = self.get("bc") {
            let expected = if m.is_conserved() { "no_flux" } else { "dirichlet" };
            if bc != expected {
                return Err(config_err(format!("bc `{bc}` does not match model {m}")));
            }
        }
        Ok(Some(m))
    }

    pub fn models(&self) -> Result<Option<Vec<ModelKind>>> {
        let Some(s) = self.get("models") else {
            return Ok(None);
        };
        s.split([',', ' '])
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<ModelKind>().map_err(config_err))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    pub fn potential(&self) -> Result<PotentialSpec> {
        if let Some(p) = self.get("poly") {
            return Ok(PotentialSpec::Poly(parse_numbers("poly", p)?));
        }
        match self.get("potential") {
            None => Ok(PotentialSpec::Quartic),
            Some(s) => s.parse().map_err(|e| config_err(format!("{e}"))),
        }
    }

    /// Elastic system if any of its keys is present.
    pub fn elastic(&self) -> Result<Option<ElasticSystem>> {
        if !["n", "D", "eps0", "eps1"].iter().any(|k| self.has(k)) {
            return Ok(None);
        }
        let n = self
            .u64("n")?
            .ok_or_else(|| config_err("elastic system needs `n`"))? as usize;
        if n == 0 {
            return Err(config_err("`n` must be at least 1"));
        }
        let d_text = self.get("D").ok_or_else(|| config_err("elastic system needs `D`"))?;
        let d = parse_tensor(n, d_text)?;
        let eps0 = match self.get("eps0") {
            Some(s) => parse_matrix(n, "eps0", s)?,
            None => SymMatrix::zeros(n),
        };
        let eps1 = match self.get("eps1") {
            Some(s) => parse_matrix(n, "eps1", s)?,
            None => return Err(config_err("elastic system needs `eps1`")),
        };
        let system = ElasticSystem::new(d, eps0, eps1).map_err(|e| config_err(e.to_string()))?;
        Ok(Some(system))
    }
}

fn parse_numbers(key: &str, s: &str) -> Result<Vec<f64>> {
    let out: Vec<f64> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| config_err(format!("`{key}`: `{t}` is not a number")))
        })
        .collect::<Result<_>>()?;
    if out.is_empty() {
        bail!(ConfigError(format!("`{key}` is empty")));
    }
    Ok(out)
}

/// `isotropic shear bulk` or `n⁴` entries in `(i, j, k, l)` order.
fn parse_tensor(n: usize, s: &str) -> Result<ElasticityTensor> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("isotropic") {
        let p = parse_numbers("D", rest)?;
        if p.len() != 2 {
            return Err(config_err("`D = isotropic` takes shear and bulk"));
        }
        return Ok(ElasticityTensor::isotropic(n, p[0], p[1]));
    }
    ElasticityTensor::from_dense(n, parse_numbers("D", s)?).map_err(|e| config_err(format!("`D`: {e}")))
}

/// `diag a b …` or `n²` row-major entries.
fn parse_matrix(n: usize, key: &str, s: &str) -> Result<SymMatrix> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("diag") {
        let d = parse_numbers(key, rest)?;
        if d.len() != n {
            return Err(config_err(format!("`{key}`: diag needs {n} entries")));
        }
        return Ok(SymMatrix::diag(&d));
    }
    SymMatrix::from_row_major(n, parse_numbers(key, s)?)
        .map_err(|e| config_err(format!("`{key}`: {e}")))
}

/// Helper used when a config value is required.
pub fn require<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| anyhow!(ConfigError(format!("missing `{key}`"))))
}
