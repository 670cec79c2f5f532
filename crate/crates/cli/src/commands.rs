use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;

use compcap::broadcast::{expected_capacity_continuous, ge_expected_capacity, optimize_composite, parametric_sweep};
use compcap::capacity::{average_state_capacity, best_outage_rate, outage_curve};
use compcap::channel::config::ChannelSpec;
use compcap::channel::{Composite, ContinuousBscComposite, Family};
use compcap::mapping::{bc_to_expected, expected_to_bc, BroadcastCodeSpec, StateSet};
use compcap::numeric::linspace;
use compcap::sim::{simulate_outage_code, simulate_uncoded_bec, write_sweep_csv};
use compcap::spectrum::estimate_spectrum;
use compcap::{Error, Result};

use crate::run_config::{Command, Params, RunConfig, SimMode, Table};

pub fn run(config: &RunConfig) -> Result<()> {
    if config.plot.is_some() && config.command == Command::Mapdemo {
        return Err(Error::Config("mapdemo writes text, there is nothing to plot".into()));
    }
    let mut buf = Vec::new();
    writeln!(buf, "{}", config.comment())?;
    let columns = match &config.params {
        Params::Capacity { levels, profile_points } => capacity(channel(config)?, *levels, *profile_points, &mut buf)?,
        Params::Spectrum { n, trials, points, alpha_min, alpha_max } => {
            let cdf = estimate_spectrum(&channel(config)?.composite, *n, *trials, config.seed)?;
            cdf.write_csv(&linspace(*alpha_min, *alpha_max, *points), &mut buf)?;
            vec![2]
        }
        Params::Broadcast { table, points, gamma_count, gamma_max } => {
            broadcast(channel(config)?, *table, *points, *gamma_count, *gamma_max, &mut buf)?
        }
        Params::Simulate { mode, blocklengths, rate, q, trials, epsilon } => {
            let c = &channel(config)?.composite;
            match mode {
                SimMode::Outage => {
                    let results = blocklengths
                        .iter()
                        .map(|&n| simulate_outage_code(c, n, *rate, *q, *trials, *epsilon, config.seed))
                        .collect::<Result<Vec<_>>>()?;
                    write_sweep_csv(&results, &mut buf)?;
                    vec![3, 4, 5]
                }
                SimMode::Uncoded => {
                    writeln!(buf, "n,trials,expected_rate")?;
                    for &n in blocklengths {
                        let r = simulate_uncoded_bec(c, n, *trials, config.seed)?;
                        writeln!(buf, "{},{},{}", r.n, r.trials, r.expected_rate)?;
                    }
                    vec![3]
                }
            }
        }
        Params::Mapdemo { spec, pmf } => {
            buf.extend_from_slice(mapdemo(spec, pmf.as_deref())?.as_bytes());
            vec![]
        }
    };
    match &config.out {
        Some(path) => fs::write(path, &buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    if let (Some(script), Some(out)) = (&config.plot, &config.out) {
        fs::write(script, gnuplot_script(&out.display().to_string(), &columns))?;
    }
    Ok(())
}

fn channel(config: &RunConfig) -> Result<&ChannelSpec> {
    config.channel.as_ref().ok_or_else(|| Error::Config(format!("{} needs a channel", config.command)))
}

fn continuous(spec: &ChannelSpec) -> Result<&ContinuousBscComposite> {
    match &spec.composite {
        Composite::Continuous(c) => Ok(c),
        Composite::Discrete(_) => Err(Error::Unsupported("parametric layerings need a crossover density".into())),
    }
}

fn expected_capacity(spec: &ChannelSpec, points: usize) -> Result<f64> {
    if let Some(ge) = spec.gilbert_elliott {
        return Ok(ge_expected_capacity(ge.p_good(), ge.p_bad(), ge.pi_good())?.capacity);
    }
    match &spec.composite {
        Composite::Continuous(c) => Ok(expected_capacity_continuous(c, points)?.value),
        Composite::Discrete(d) if d.family() == Family::Bsc => Ok(optimize_composite(d)?.expected_rate),
        // erasure broadcast regions are time-sharing regions: one layer is optimal
        other => Ok(best_outage_rate(other)?.rate),
    }
}

fn capacity(spec: &ChannelSpec, levels: usize, points: usize, buf: &mut Vec<u8>) -> Result<Vec<usize>> {
    let q: Vec<f64> = (0..levels).map(|k| k as f64 / levels as f64).collect();
    let curve = outage_curve(&spec.composite, &q)?;
    let ce = expected_capacity(spec, points)?;
    let upper = average_state_capacity(&spec.composite);
    writeln!(buf, "q,c_q,c_o_q,c_e,upper_bound")?;
    for ((q, c), co) in q.iter().zip(&curve.capacity).zip(&curve.outage_capacity) {
        writeln!(buf, "{q},{c},{co},{ce},{upper}")?;
    }
    Ok(vec![2, 3, 4, 5])
}

fn broadcast(
    spec: &ChannelSpec,
    table: Table,
    points: usize,
    gamma_count: usize,
    gamma_max: f64,
    buf: &mut Vec<u8>,
) -> Result<Vec<usize>> {
    match table {
        Table::Gamma => {
            let gammas: Vec<f64> = (1..=gamma_count).map(|k| gamma_max * k as f64 / gamma_count as f64).collect();
            parametric_sweep(continuous(spec)?, &gammas, points)?.write_csv(buf)?;
            Ok(vec![2, 3, 4])
        }
        Table::Profile => {
            match &spec.composite {
                Composite::Continuous(c) => expected_capacity_continuous(c, points)?.rates.write_csv(buf)?,
                Composite::Discrete(d) => {
                    let layering = optimize_composite(d)?;
                    let r: Vec<f64> = std::iter::once(0.0).chain(layering.r.iter().copied()).collect();
                    writeln!(buf, "p,r,rate")?;
                    for ((p, r), rate) in layering.p.iter().zip(&r).zip(layering.decodable_rates()) {
                        writeln!(buf, "{p},{r},{rate}")?;
                    }
                }
            }
            Ok(vec![3])
        }
    }
}

fn mapdemo(spec: &BroadcastCodeSpec, pmf: Option<&[f64]>) -> Result<String> {
    let code = bc_to_expected(spec)?;
    code.index_sets.verify()?;
    let (back, derived) = expected_to_bc(&code)?;
    let bits: BTreeMap<StateSet, usize> = spec.bits().into_iter().filter(|(_, b)| *b > 0).collect();
    if back.bits() != bits || derived.subsets != code.index_sets.subsets {
        return Err(Error::Structural("round trip did not recover the subset messages".into()));
    }
    let mut out = String::new();
    let sizes: Vec<String> = spec.bits().iter().map(|(p, b)| format!("{p}={b}")).collect();
    let _ = writeln!(out, "# subset message bits: {}", sizes.join(" "));
    out.push_str(&code.index_sets.dump());
    let _ = writeln!(out, "# verified: subset blocks partition I_t and each I_s is the union of its subsets' blocks");
    let _ = writeln!(out, "# round trip: subset messages recovered from I_s");
    if let Some(pmf) = pmf {
        let _ = writeln!(
            out,
            "# expected rate: broadcast {} expected-rate code {}",
            spec.expected_rate(pmf)?,
            code.expected_rate(pmf)?
        );
    }
    Ok(out)
}

fn gnuplot_script(data: &str, columns: &[usize]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set grid");
    let plots: Vec<String> = columns
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let file = if k == 0 { format!("'{data}'") } else { "''".to_string() };
            format!("{file} using 1:{c} with lines")
        })
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    let _ = writeln!(s, "pause mouse close");
    s
}
