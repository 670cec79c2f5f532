//! Monte Carlo estimates of the normalized information density and its
//! distribution (the information spectrum).
//!
//! Inputs are uniform on `{0,1}^n`, which maximizes mutual information for
//! every BSC and BEC state. Under a uniform input the output is uniform too,
//! so the density of a block depends only on its Hamming distance (BSC) or
//! its erasure count (BEC), and those counts are binomial. Sampling the
//! count directly has the same law as sending `n` random bits through the
//! channel and is exact for large `n`.

use std::io::Write;

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::channel::{ChannelState, Composite};
use crate::error::{domain, Error, Result};
use crate::rng::{shard_rng, shards};

/// `(1/n) i(x^n; y^n | s)` for a BSC block at Hamming distance `d`.
pub fn info_density_bsc(d: usize, n: usize, p: f64) -> Result<f64> {
    if n == 0 {
        return domain("blocklength must be positive");
    }
    if d > n {
        return domain(format!("Hamming distance {d} exceeds blocklength {n}"));
    }
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("crossover {p} is not a probability"));
    }
    let frac = d as f64 / n as f64;
    let flips = if d == 0 { 0.0 } else { impossible_if_zero(p, "flip")? * frac };
    let keeps = if d == n { 0.0 } else { impossible_if_zero(1.0 - p, "clean symbol")? * (1.0 - frac) };
    Ok(1.0 + flips + keeps)
}

fn impossible_if_zero(prob: f64, what: &str) -> Result<f64> {
    if prob > 0.0 {
        Ok(prob.log2())
    } else {
        domain(format!("{what} has zero probability under this state"))
    }
}

/// `(1/n) i(x^n; y^n | s)` for a BEC block with `e` erasures: each
/// unerased symbol carries one bit.
pub fn info_density_bec(e: usize, n: usize, alpha: f64) -> Result<f64> {
    if n == 0 {
        return domain("blocklength must be positive");
    }
    if e > n {
        return domain(format!("erasure count {e} exceeds blocklength {n}"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return domain(format!("erasure probability {alpha} is not a probability"));
    }
    if (alpha == 0.0 && e > 0) || (alpha == 1.0 && e < n) {
        return domain("erasure pattern has zero probability under this state");
    }
    Ok((n - e) as f64 / n as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumSample {
    pub value: f64,
    /// State index (discrete) or density grid cell (continuous).
    pub state_id: usize,
    /// Crossover or erasure probability of the drawn state.
    pub state_noise: f64,
}

/// Draws `trials` independent blocks. The output order is fixed by the
/// shard layout, so it is identical for any thread count.
pub fn sample_spectrum(composite: &Composite, n: usize, trials: usize, seed: u64) -> Result<Vec<SpectrumSample>> {
    if n == 0 {
        return domain("blocklength must be positive");
    }
    if trials == 0 {
        return Err(Error::Empty("spectrum needs at least one trial".into()));
    }
    let chunks: Vec<Result<Vec<SpectrumSample>>> = shards(trials)
        .into_par_iter()
        .map(|(shard, count)| {
            let mut rng = shard_rng(seed, shard);
            (0..count)
                .map(|_| {
                    let drawn = composite.sample_state(&mut rng);
                    let noise = drawn.state.noise();
                    let count = Binomial::new(n as u64, noise)
                        .map_err(|e| Error::Domain(e.to_string()))?
                        .sample(&mut rng) as usize;
                    let value = match drawn.state {
                        ChannelState::Bsc(_) => info_density_bsc(count, n, noise),
                        ChannelState::Bec(_) => info_density_bec(count, n, noise),
                    }
                    .expect("counts drawn from the channel law have positive probability");
                    Ok(SpectrumSample { value, state_id: drawn.id, state_noise: noise })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(trials);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

pub fn estimate_spectrum(composite: &Composite, n: usize, trials: usize, seed: u64) -> Result<EmpiricalCdf> {
    let samples = sample_spectrum(composite, n, trials, seed)?;
    EmpiricalCdf::new(samples.into_iter().map(|s| s.value).collect(), n)
}

/// Right-continuous step cdf of a finite sample.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
    blocklength: usize,
}

/// Result of a quantile query on a step cdf.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantile {
    pub value: f64,
    /// The cdf jumps above `q` exactly at `value`: the supremum is a left
    /// limit and is not itself in `{alpha : F(alpha) <= q}`.
    pub at_atom: bool,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>, blocklength: usize) -> Result<Self> {
        if values.iter().any(|v| v.is_nan()) {
            return domain("NaN spectrum sample");
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values, blocklength })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn blocklength(&self) -> usize {
        self.blocklength
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples `<= alpha`.
    pub fn eval(&self, alpha: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.sorted.partition_point(|&v| v <= alpha) as f64 / self.sorted.len() as f64
    }

    /// `sup { alpha : F(alpha) <= q }` for `0 <= q < 1`.
    pub fn quantile(&self, q: f64) -> Result<Quantile> {
        if self.sorted.is_empty() {
            return Err(Error::Empty("empirical cdf has no samples".into()));
        }
        if !(0.0..1.0).contains(&q) {
            return domain(format!("outage level {q} outside [0, 1)"));
        }
        let m = self.sorted.len();
        let mf = m as f64;
        // k = number of samples allowed at or below the supremum: k/m <= q < (k+1)/m
        let mut k = ((q * mf).floor() as usize).min(m - 1);
        while k > 0 && k as f64 / mf > q {
            k -= 1;
        }
        while k + 1 < m && (k + 1) as f64 / mf <= q {
            k += 1;
        }
        Ok(Quantile { value: self.sorted[k], at_atom: true })
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.sorted.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (self.sorted.len() as f64 - 1.0).max(1.0)
    }

    /// Sample value at rank `ceil(level * m)` (lower empirical quantile).
    pub fn lower_quantile(&self, level: f64) -> f64 {
        let m = self.sorted.len();
        let k = ((level * m as f64).ceil() as usize).clamp(1, m);
        self.sorted[k - 1]
    }

    pub fn interquartile_range(&self) -> f64 {
        self.lower_quantile(0.75) - self.lower_quantile(0.25)
    }

    /// Writes `alpha,cdf` rows for each alpha in `alphas`.
    pub fn write_csv<W: Write>(&self, alphas: &[f64], mut w: W) -> Result<()> {
        writeln!(w, "alpha,cdf")?;
        for &a in alphas {
            writeln!(w, "{a},{}", self.eval(a))?;
        }
        Ok(())
    }
}

pub fn cdf_quantile(cdf: &EmpiricalCdf, q: f64) -> Result<Quantile> {
    cdf.quantile(q)
}

/// Writes raw samples as `state_id,state_noise,value` rows.
pub fn write_samples_csv<W: Write>(samples: &[SpectrumSample], mut w: W) -> Result<()> {
    writeln!(w, "state_id,state_noise,value")?;
    for s in samples {
        writeln!(w, "{},{},{}", s.state_id, s.state_noise, s.value)?;
    }
    Ok(())
}
