//! Option resolution: command-line flags override config-file values, which
//! override model defaults.
//!
//! The config file is plain `key = value` text, one entry per line, `#` for
//! comments. Keys are the long flag names (`model`, `set`, `scheme`,
//! `alpha`, `x0`, `t0`, `T`, `h`, `output`, `seed`, ...).

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use fracstep::glkernel::FractionalOrder;
use fracstep::schemes::SchemeKind;

/// Flat key-value view of a config file.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "model",
    "set",
    "scheme",
    "alpha",
    "x0",
    "t0",
    "T",
    "h",
    "output",
    "seed",
    "gl-explicit",
    "newton-tol",
    "newton-max-iter",
    "negativity",
    "ladder",
    "h-star",
    "h-nsfd",
    "h-gl",
    "samples",
    "box-max",
];

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                anyhow!(
                    "{}:{}: expected `key = value`, got `{raw}`",
                    path.display(),
                    lineno + 1
                )
            })?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                bail!("{}:{}: unknown key `{key}`", path.display(), lineno + 1);
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// Flag value if present, else config value, else the default; `name` only
/// feeds error messages.
pub fn resolve<T, F>(
    name: &str,
    flag: Option<T>,
    cfg: Option<&str>,
    parse: F,
    default: Option<T>,
) -> Result<T>
where
    F: Fn(&str) -> Result<T>,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(s) = cfg {
        return parse(s).with_context(|| format!("config key `{name}`"));
    }
    default.ok_or_else(|| anyhow!("missing required option --{name}"))
}

/// Like [`resolve`] but the option may stay absent.
pub fn resolve_opt<T, F>(name: &str, flag: Option<T>, cfg: Option<&str>, parse: F) -> Result<Option<T>>
where
    F: Fn(&str) -> Result<T>,
{
    if let Some(v) = flag {
        return Ok(Some(v));
    }
    match cfg {
        Some(s) => Ok(Some(
            parse(s).with_context(|| format!("config key `{name}`"))?,
        )),
        None => Ok(None),
    }
}

/// Accepts plain decimals and the dyadic shorthand `2^-12`.
pub fn parse_step(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some(exp) = s.strip_prefix("2^") {
        let e: i32 = exp
            .parse()
            .map_err(|_| anyhow!("invalid dyadic exponent in `{s}`"))?;
        return Ok(2f64.powi(e));
    }
    s.parse::<f64>()
        .map_err(|_| anyhow!("invalid number `{s}`"))
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| anyhow!("invalid number `{s}`"))
}

pub fn parse_u64(s: &str) -> Result<u64> {
    s.trim()
        .parse::<u64>()
        .map_err(|_| anyhow!("invalid integer `{s}`"))
}

pub fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| anyhow!("invalid integer `{s}`"))
}

pub fn parse_bool(s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(anyhow!("invalid boolean `{other}`")),
    }
}

/// Comma-separated steps, dyadic shorthand allowed.
pub fn parse_step_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_step).collect()
}

/// Comma-separated fractional orders.
pub fn parse_alpha_list(s: &str) -> Result<Vec<FractionalOrder>> {
    s.split(',')
        .map(|part| {
            let v = parse_f64(part)?;
            FractionalOrder::new(v).map_err(|e| anyhow!("{e}"))
        })
        .collect()
}

/// Comma-separated state vector.
pub fn parse_vector(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_f64).collect()
}

/// `k1=v1,k2=v2` parameter override list.
pub fn parse_set(s: &str) -> Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("expected `name=value` in --set, got `{part}`"))?;
        map.insert(key.trim().to_string(), parse_f64(value)?);
    }
    Ok(map)
}

/// Which schemes a run covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeSelection {
    One(SchemeKind),
    Both,
}

impl SchemeSelection {
    pub fn kinds(self) -> Vec<SchemeKind> {
        match self {
            SchemeSelection::One(k) => vec![k],
            SchemeSelection::Both => vec![SchemeKind::Gl, SchemeKind::Nsfd],
        }
    }
}

pub fn parse_scheme_selection(s: &str) -> Result<SchemeSelection> {
    match s.trim().to_ascii_lowercase().as_str() {
        "gl" => Ok(SchemeSelection::One(SchemeKind::Gl)),
        "nsfd" => Ok(SchemeSelection::One(SchemeKind::Nsfd)),
        "both" => Ok(SchemeSelection::Both),
        other => Err(anyhow!("invalid scheme `{other}` (expected GL, NSFD or both)")),
    }
}

/// Default seed: `FRACSTEP_SEED` when set, else 0.
pub fn default_seed() -> Result<u64> {
    match std::env::var("FRACSTEP_SEED") {
        Ok(v) => parse_u64(&v).context("FRACSTEP_SEED"),
        Err(_) => Ok(0),
    }
}
