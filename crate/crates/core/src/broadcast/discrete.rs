//! Finite-state layering: Bergmans rates and the monotone-constrained
//! maximization of the expected rate.

use rayon::prelude::*;

use super::{scaled_slope, slope};
use crate::channel::{conv, h, DiscreteComposite, Family};
use crate::error::{domain, Error, Result};
use crate::numeric::bisect;

/// First-order stationarity required of [`optimize_discrete`].
pub const RESIDUAL_TOL: f64 = 1e-8;

const MAX_SWEEPS: usize = 200_000;

fn check_sorted(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().any(|x| !(0.0..=0.5).contains(x)) {
        return domain(format!("{name} must lie in [0, 1/2]"));
    }
    if v.windows(2).any(|w| w[1] < w[0]) {
        return domain(format!("{name} must be nondecreasing"));
    }
    Ok(())
}

/// Per-layer rates `R_i = h(r_i * p_i) - h(r_{i-1} * p_i)` for states
/// sorted from best to worst. `r` holds the free crossovers
/// `r_1..r_{N-1}`; `r_0 = 0` and `r_N = 1/2` are implied.
pub fn bergmans_rates(p: &[f64], r: &[f64]) -> Result<Vec<f64>> {
    if p.is_empty() {
        return Err(Error::Empty("no states".into()));
    }
    if r.len() + 1 != p.len() {
        return domain(format!("{} states need {} auxiliary crossovers, got {}", p.len(), p.len() - 1, r.len()));
    }
    check_sorted("states", p)?;
    check_sorted("auxiliary crossovers", r)?;
    Ok(layer_rates(p, r))
}

fn full_r(r: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(r.len() + 2);
    out.push(0.0);
    out.extend_from_slice(r);
    out.push(0.5);
    out
}

fn layer_rates(p: &[f64], r: &[f64]) -> Vec<f64> {
    let rr = full_r(r);
    (0..p.len()).map(|i| (h(conv(rr[i + 1], p[i])) - h(conv(rr[i], p[i]))).max(0.0)).collect()
}

/// Rate decodable by each state: the sum of its own layer and all layers
/// meant for noisier states.
pub fn decodable_rates(layers: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; layers.len()];
    let mut acc = 0.0;
    for i in (0..layers.len()).rev() {
        acc += layers[i];
        out[i] = acc;
    }
    out
}

/// `sum_i W_i R_i` with `W_i = P(S <= i)`: layer `i` reaches every state at
/// least as good as state `i`.
pub fn discrete_expected_rate(pmf: &[f64], p: &[f64], r: &[f64]) -> Result<f64> {
    let layers = bergmans_rates(p, r)?;
    Ok(weights(pmf).iter().zip(&layers).map(|(w, l)| w * l).sum())
}

fn weights(pmf: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut w: Vec<f64> = pmf
        .iter()
        .map(|f| {
            acc += f;
            acc
        })
        .collect();
    if let Some(last) = w.last_mut() {
        *last = 1.0;
    }
    w
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteLayering {
    /// State crossovers, best first.
    pub p: Vec<f64>,
    pub pmf: Vec<f64>,
    /// Free auxiliary crossovers `r_1..r_{N-1}`.
    pub r: Vec<f64>,
    pub layer_rates: Vec<f64>,
    pub expected_rate: f64,
    /// Projected-gradient stationarity residual at `r`.
    pub residual: f64,
    pub sweeps: usize,
}

impl DiscreteLayering {
    pub fn decodable_rates(&self) -> Vec<f64> {
        decodable_rates(&self.layer_rates)
    }
}

/// Exact maximizer over `[lo, hi]` of `w_i h(x*p_i) - w_j h(x*p_j)` with
/// `p_i <= p_j`. The derivative is positive then negative (the ratio of the
/// two slopes is monotone in `x`), so one bisection on its sign suffices.
fn coordinate_argmax(wi: f64, wj: f64, pi: f64, pj: f64, lo: f64, hi: f64) -> f64 {
    let dir = |x: f64| wi * scaled_slope(x, pi) - wj * scaled_slope(x, pj);
    if dir(hi) >= 0.0 {
        return hi;
    }
    if dir(lo) <= 0.0 {
        return lo;
    }
    bisect(dir, lo, hi, 1e-16).unwrap_or(lo)
}

fn residual(w: &[f64], p: &[f64], r: &[f64]) -> f64 {
    let rr = full_r(r);
    let mut worst: f64 = 0.0;
    for i in 1..rr.len() - 1 {
        let g = w[i - 1] * slope(rr[i], p[i - 1]) - w[i] * slope(rr[i], p[i]);
        let moved = (rr[i] + g).clamp(rr[i - 1], rr[i + 1]);
        worst = worst.max((moved - rr[i]).abs());
    }
    worst
}

fn ascend(w: &[f64], p: &[f64], mut r: Vec<f64>) -> (Vec<f64>, usize) {
    let n = r.len();
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let lo = if i == 0 { 0.0 } else { r[i - 1] };
            let hi = if i + 1 == n { 0.5 } else { r[i + 1] };
            // r[i] is r_{i+1}: it enters layer i+1 with weight w[i] and
            // layer i+2 with weight w[i+1]
            let x = coordinate_argmax(w[i], w[i + 1], p[i], p[i + 1], lo, hi);
            moved = moved.max((x - r[i]).abs());
            r[i] = x;
        }
        if moved < 1e-15 || (sweeps % 64 == 0 && residual(w, p, &r) < 1e-13) {
            break;
        }
    }
    (r, sweeps)
}

/// Maximizes the expected rate over `0 <= r_1 <= ... <= r_{N-1} <= 1/2` by
/// projected coordinate ascent from three starting points (evenly spread,
/// all near 0, all near 1/2), keeping the best.
pub fn optimize_discrete(pmf: &[f64], p: &[f64]) -> Result<DiscreteLayering> {
    if pmf.len() != p.len() {
        return domain("pmf and states differ in length");
    }
    check_sorted("states", p)?;
    if p.is_empty() {
        return Err(Error::Empty("no states".into()));
    }
    if pmf.iter().any(|&f| !(f >= 0.0)) || (pmf.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return domain("pmf must be nonnegative and sum to one");
    }
    let w = weights(pmf);
    let n = p.len() - 1;
    let starts: Vec<Vec<f64>> =
        vec![(1..=n).map(|i| 0.5 * i as f64 / (n + 1) as f64).collect(), vec![1e-9; n], vec![0.5 - 1e-9; n]];
    let runs: Vec<(Vec<f64>, usize, f64)> = starts
        .into_par_iter()
        .map(|s| {
            let (r, sweeps) = ascend(&w, p, s);
            let value = w.iter().zip(layer_rates(p, &r)).map(|(a, b)| a * b).sum();
            (r, sweeps, value)
        })
        .collect();
    let best = runs.into_iter().fold(None::<(Vec<f64>, usize, f64)>, |acc, run| match acc {
        Some(a) if a.2 >= run.2 => Some(a),
        _ => Some(run),
    });
    let (r, sweeps, expected_rate) = best.expect("three restarts");
    let layer_rates = layer_rates(p, &r);
    let residual = residual(&w, p, &r);
    Ok(DiscreteLayering { p: p.to_vec(), pmf: pmf.to_vec(), r, layer_rates, expected_rate, residual, sweeps })
}

/// [`optimize_discrete`] for a BSC composite, states sorted by crossover.
pub fn optimize_composite(c: &DiscreteComposite) -> Result<DiscreteLayering> {
    if c.family() != Family::Bsc {
        return Err(Error::Unsupported("layered optimization is implemented for BSC composites".into()));
    }
    let sorted = c.by_noise();
    let p: Vec<f64> = sorted.iter().map(|(s, _)| s.noise()).collect();
    let pmf: Vec<f64> = sorted.iter().map(|(_, w)| *w).collect();
    optimize_discrete(&pmf, &p)
}
