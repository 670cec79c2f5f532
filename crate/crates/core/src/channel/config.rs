//! Plain-text channel descriptions.
//!
//! The format is one `key = value` pair per line; `#` starts a comment.
//! Channel keys:
//!
//! ```text
//! family   = bsc | bec | ge
//! states   = 0.05, 0.4          # discrete crossover / erasure values
//! pmf      = 0.5, 0.5
//! density  = uniform | triangular:LO:MODE:HI | path/to/density.csv
//! grid_points = 2049            # for density = uniform
//! p_good, p_bad, pi_good, g, b  # family = ge
//! ```
//!
//! A density file has two columns `p,f(p)`; a non-numeric first row is
//! treated as a header.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::channel::composite::{Composite, ContinuousBscComposite, DiscreteComposite, DEFAULT_GRID_POINTS};
use crate::channel::gilbert_elliott::GilbertElliott;
use crate::error::{Error, Result};

pub const CHANNEL_KEYS: &[&str] =
    &["family", "states", "pmf", "density", "grid_points", "p_good", "p_bad", "pi_good", "g", "b"];

/// Ordered key/value pairs read from a config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    pub fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|v| parse_f64(key, &v)).transpose()
    }

    pub fn take_usize(&mut self, key: &str) -> Result<Option<usize>> {
        self.take(key)
            .map(|v| v.parse::<usize>().map_err(|_| Error::Config(format!("`{key}`: `{v}` is not a count"))))
            .transpose()
    }

    pub fn take_u64(&mut self, key: &str) -> Result<Option<u64>> {
        self.take(key)
            .map(|v| v.parse::<u64>().map_err(|_| Error::Config(format!("`{key}`: `{v}` is not an integer"))))
            .transpose()
    }

    pub fn take_list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        self.take(key).map(|v| parse_list(key, &v)).transpose()
    }

    /// Fails if any key is left over.
    pub fn finish(&self) -> Result<()> {
        match self.entries.keys().next() {
            Some(k) => Err(Error::Config(format!("unknown key `{k}`"))),
            None => Ok(()),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim().parse::<f64>().map_err(|_| Error::Config(format!("`{key}`: `{v}` is not a number")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| parse_f64(key, x)).collect()
}

/// A channel read from a config. The Gilbert-Elliott parameters are kept
/// alongside the composite so callers can use the two-state closed forms.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSpec {
    pub composite: Composite,
    pub gilbert_elliott: Option<GilbertElliott>,
}

/// Consumes the channel keys from `kv`. Relative density paths resolve
/// against `base_dir`.
pub fn channel_from_config(kv: &mut KeyValues, base_dir: &Path) -> Result<ChannelSpec> {
    let family = kv.take("family").ok_or_else(|| Error::Config("missing `family`".into()))?;
    match family.as_str() {
        "ge" => {
            let mut need = |k: &str| kv.take_f64(k)?.ok_or_else(|| Error::Config(format!("missing `{k}`")));
            let p_good = need("p_good")?;
            let p_bad = need("p_bad")?;
            let pi_good = need("pi_good")?;
            let g = kv.take_f64("g")?.unwrap_or(0.0);
            let b = kv.take_f64("b")?.unwrap_or(0.0);
            let ge = GilbertElliott::new(p_good, p_bad, g, b, pi_good)?;
            Ok(ChannelSpec { composite: ge.to_composite()?.into(), gilbert_elliott: Some(ge) })
        }
        "bsc" | "bec" => {
            if let Some(density) = kv.take("density") {
                if family == "bec" {
                    return Err(Error::Unsupported("densities are only supported for the BSC family".into()));
                }
                let points = kv.take_usize("grid_points")?.unwrap_or(DEFAULT_GRID_POINTS);
                let c = load_density(&density, points, base_dir)?;
                return Ok(ChannelSpec { composite: c.into(), gilbert_elliott: None });
            }
            let states =
                kv.take_list("states")?.ok_or_else(|| Error::Config("missing `states` or `density`".into()))?;
            let pmf = match kv.take_list("pmf")? {
                Some(p) => p,
                None if states.len() == 1 => vec![1.0],
                None => return Err(Error::Config("missing `pmf`".into())),
            };
            let c = if family == "bsc" {
                DiscreteComposite::bsc(&states, &pmf)?
            } else {
                DiscreteComposite::bec(&states, &pmf)?
            };
            Ok(ChannelSpec { composite: c.into(), gilbert_elliott: None })
        }
        other => Err(Error::Config(format!("unknown family `{other}`"))),
    }
}

fn load_density(spec: &str, points: usize, base_dir: &Path) -> Result<ContinuousBscComposite> {
    if spec == "uniform" {
        return ContinuousBscComposite::uniform_on_grid(points);
    }
    if let Some(rest) = spec.strip_prefix("triangular:") {
        let v = rest.split(':').map(|x| parse_f64("density", x)).collect::<Result<Vec<_>>>()?;
        if v.len() != 3 {
            return Err(Error::Config("triangular density needs LO:MODE:HI".into()));
        }
        return ContinuousBscComposite::triangular(v[0], v[1], v[2]);
    }
    let path = base_dir.join(spec);
    let text = fs::read_to_string(&path)?;
    let (grid, density) = parse_density_csv(&text)?;
    ContinuousBscComposite::from_grid(grid, density)
}

/// Parses two-column `p,f(p)` text.
pub fn parse_density_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut grid = Vec::new();
    let mut density = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 2 {
            return Err(Error::Config(format!("density line {}: expected two columns", lineno + 1)));
        }
        match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
            (Ok(p), Ok(f)) => {
                grid.push(p);
                density.push(f);
            }
            _ if grid.is_empty() => continue,
            _ => return Err(Error::Config(format!("density line {}: not numeric", lineno + 1))),
        }
    }
    Ok((grid, density))
}
