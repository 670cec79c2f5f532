//! Reads a config file, folds in command-line overrides and validates
//! everything before any command runs.
//!
//! Settings per command (defaults in brackets):
//!
//! ```text
//! all          seed [0]
//! capacity     grid [100] outage levels k/grid; profile_points [4097]
//! spectrum     n [1000]; trials [10000]; grid [201]; alpha_min [-0.1]; alpha_max [1]
//! broadcast    table = profile | gamma [profile]; grid [4097] profile nodes;
//!              gamma_count [40]; gamma_max [4]
//! simulate     rate; q; n [8, 16]; trials [10000]; tol [0.005];
//!              mode = outage | uncoded [outage]
//! mapdemo      num_states; n; rates = 0+1:0.25, 1:0.5; pmf (optional)
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use compcap::channel::config::{channel_from_config, ChannelSpec, KeyValues};
use compcap::mapping::{BroadcastCodeSpec, StateSet};
use compcap::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Capacity,
    Spectrum,
    Broadcast,
    Simulate,
    Mapdemo,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Capacity => "capacity",
            Command::Spectrum => "spectrum",
            Command::Broadcast => "broadcast",
            Command::Simulate => "simulate",
            Command::Mapdemo => "mapdemo",
        })
    }
}

#[derive(Debug, Default)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Table {
    Profile,
    Gamma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimMode {
    Outage,
    Uncoded,
}

#[derive(Debug)]
pub enum Params {
    Capacity { levels: usize, profile_points: usize },
    Spectrum { n: usize, trials: usize, points: usize, alpha_min: f64, alpha_max: f64 },
    Broadcast { table: Table, points: usize, gamma_count: usize, gamma_max: f64 },
    Simulate { mode: SimMode, blocklengths: Vec<usize>, rate: f64, q: f64, trials: u64, epsilon: f64 },
    Mapdemo { spec: BroadcastCodeSpec, pmf: Option<Vec<f64>> },
}

#[derive(Debug)]
pub struct RunConfig {
    pub command: Command,
    pub channel: Option<ChannelSpec>,
    pub params: Params,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    /// Settings as read plus overrides, for the comment line of every output.
    pub settings: BTreeMap<String, String>,
}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

fn positive<T: PartialOrd + Default + fmt::Display>(key: &str, v: T) -> Result<T> {
    if v > T::default() {
        Ok(v)
    } else {
        config_err(format!("`{key}` must be positive, got {v}"))
    }
}

fn count(kv: &mut KeyValues, key: &str, default: usize) -> Result<usize> {
    positive(key, kv.take_usize(key)?.unwrap_or(default))
}

fn required_count(kv: &mut KeyValues, key: &str) -> Result<usize> {
    positive(key, kv.take_usize(key)?.ok_or_else(|| Error::Config(format!("missing `{key}`")))?)
}

fn required(kv: &mut KeyValues, key: &str) -> Result<f64> {
    kv.take_f64(key)?.ok_or_else(|| Error::Config(format!("missing `{key}`")))
}

fn blocklengths(kv: &mut KeyValues) -> Result<Vec<usize>> {
    let list = kv.take_list("n")?.unwrap_or_else(|| vec![8.0, 16.0]);
    list.into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                config_err(format!("`n`: {v} is not a positive blocklength"))
            }
        })
        .collect()
}

/// `0+1:0.25, 1:0.5` lists the rate of each subset message.
fn subset_rates(text: &str) -> Result<BTreeMap<StateSet, f64>> {
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let Some((set, rate)) = item.split_once(':') else {
            return config_err(format!("`rates`: `{item}` is not SUBSET:RATE"));
        };
        let members = set
            .split('+')
            .map(|s| s.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Config(format!("`rates`: bad subset `{set}`")))?;
        let rate: f64 = rate.trim().parse().map_err(|_| Error::Config(format!("`rates`: bad rate in `{item}`")))?;
        let key = StateSet::new(&members)?;
        if out.insert(key, rate).is_some() {
            return config_err(format!("`rates`: subset {key} listed twice"));
        }
    }
    Ok(out)
}

impl RunConfig {
    pub fn load(command: Command, path: &Path, overrides: Overrides) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_text(command, &text, base, overrides)
    }

    pub fn from_text(command: Command, text: &str, base: &Path, o: Overrides) -> Result<Self> {
        let mut kv = KeyValues::parse(text)?;
        if let Some(v) = o.grid {
            kv.set("grid", v.to_string());
        }
        if let Some(v) = o.trials {
            kv.set("trials", v.to_string());
        }
        if let Some(v) = o.seed {
            kv.set("seed", v.to_string());
        }
        if let Some(v) = o.tol {
            kv.set("tol", v.to_string());
        }
        if o.plot.is_some() && o.out.is_none() {
            return config_err("--plot needs --out");
        }
        let seed = kv.take_u64("seed")?.unwrap_or(0);
        let mut settings: BTreeMap<String, String> = kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        settings.insert("seed".into(), seed.to_string());

        let channel = match command {
            Command::Mapdemo => None,
            _ => Some(channel_from_config(&mut kv, base)?),
        };
        let params = match command {
            Command::Capacity => Params::Capacity {
                levels: count(&mut kv, "grid", 100)?,
                profile_points: count(&mut kv, "profile_points", 4097)?,
            },
            Command::Spectrum => {
                let alpha_min = kv.take_f64("alpha_min")?.unwrap_or(-0.1);
                let alpha_max = kv.take_f64("alpha_max")?.unwrap_or(1.0);
                if alpha_min.is_nan() || alpha_max.is_nan() || alpha_min >= alpha_max {
                    return config_err("need alpha_min < alpha_max");
                }
                let trials = positive("trials", kv.take_u64("trials")?.unwrap_or(10_000))?;
                Params::Spectrum {
                    n: count(&mut kv, "n", 1000)?,
                    trials: trials as usize,
                    points: count(&mut kv, "grid", 201)?,
                    alpha_min,
                    alpha_max,
                }
            }
            Command::Broadcast => {
                let table = match kv.take("table").as_deref() {
                    None | Some("profile") => Table::Profile,
                    Some("gamma") => Table::Gamma,
                    Some(other) => return config_err(format!("`table`: expected profile or gamma, got `{other}`")),
                };
                Params::Broadcast {
                    table,
                    points: count(&mut kv, "grid", 4097)?,
                    gamma_count: count(&mut kv, "gamma_count", 40)?,
                    gamma_max: positive("gamma_max", kv.take_f64("gamma_max")?.unwrap_or(4.0))?,
                }
            }
            Command::Simulate => {
                let mode = match kv.take("mode").as_deref() {
                    None | Some("outage") => SimMode::Outage,
                    Some("uncoded") => SimMode::Uncoded,
                    Some(other) => return config_err(format!("`mode`: expected outage or uncoded, got `{other}`")),
                };
                let (rate, q, epsilon) = match mode {
                    SimMode::Outage => {
                        (required(&mut kv, "rate")?, required(&mut kv, "q")?, kv.take_f64("tol")?.unwrap_or(0.005))
                    }
                    SimMode::Uncoded => (0.0, 0.0, 0.0),
                };
                Params::Simulate {
                    mode,
                    blocklengths: blocklengths(&mut kv)?,
                    rate,
                    q,
                    // zero trials is passed through: the simulator reports it
                    trials: kv.take_u64("trials")?.unwrap_or(10_000),
                    epsilon,
                }
            }
            Command::Mapdemo => {
                let states = required_count(&mut kv, "num_states")?;
                let n = required_count(&mut kv, "n")?;
                let rates = subset_rates(&kv.take("rates").ok_or_else(|| Error::Config("missing `rates`".into()))?)?;
                let pmf = kv.take_list("pmf")?;
                Params::Mapdemo { spec: BroadcastCodeSpec::new(states, n, rates)?, pmf }
            }
        };
        if let Some((k, _)) = kv.iter().next() {
            return config_err(format!("`{k}` is not a {command} setting"));
        }
        Ok(Self { command, channel, params, seed, out: o.out, plot: o.plot, settings })
    }

    /// `# compcap <command>: key=value; ...` with keys sorted.
    pub fn comment(&self) -> String {
        let body: Vec<String> = self.settings.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("# compcap {}: {}", self.command, body.join("; "))
    }
}
