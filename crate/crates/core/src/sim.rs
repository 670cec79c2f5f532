//! Small-blocklength random-coding experiments.
//!
//! Each trial draws a channel state, a fresh i.i.d. uniform codebook of
//! `floor(2^{nR})` codewords and a message, sends the codeword and decodes
//! with a threshold on the normalized information density. No codeword
//! above the threshold is an outage; otherwise the decoder must find
//! exactly one codeword above it and that codeword must be the one sent.
//! A maximum-likelihood decoder runs on the same output for comparison.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::capacity::capacity_vs_outage;
use crate::channel::{ChannelState, Composite, Family};
use crate::error::{domain, Error, Result};
use crate::rng::{shard_rng, shards, SimRng};
use crate::spectrum::{info_density_bec, info_density_bsc};

/// Largest `nR` accepted; the codebook has at most `2^20` entries.
pub const MAX_LOG_CODEBOOK: f64 = 20.0;

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

fn tail_mask(n: usize) -> u64 {
    match n % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Codewords packed 64 bits per word.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    n: usize,
    data: Vec<u64>,
}

impl Codebook {
    pub fn random<R: Rng + ?Sized>(size: usize, n: usize, rng: &mut R) -> Self {
        let w = words(n);
        let mut data: Vec<u64> = (0..size * w).map(|_| rng.random()).collect();
        let mask = tail_mask(n);
        for k in 0..size {
            data[k * w + w - 1] &= mask;
        }
        Self { n, data }
    }

    /// Builds a codebook from rows of 0/1 symbols.
    pub fn from_bits(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.first().map(Vec::len).unwrap_or(0);
        if n == 0 {
            return domain("codebook needs nonempty codewords");
        }
        let w = words(n);
        let mut data = vec![0u64; rows.len() * w];
        for (k, row) in rows.iter().enumerate() {
            if row.len() != n {
                return domain("codewords differ in length");
            }
            for (i, &b) in row.iter().enumerate() {
                match b {
                    0 => {}
                    1 => data[k * w + i / 64] |= 1 << (i % 64),
                    _ => return domain(format!("symbol {b} is not a bit")),
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.data.len() / words(self.n)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    pub fn codeword(&self, k: usize) -> &[u64] {
        let w = words(self.n);
        &self.data[k * w..(k + 1) * w]
    }
}

/// A channel output. Erased positions are set in `erased`; their bits in
/// `bits` are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Received {
    pub bits: Vec<u64>,
    pub erased: Vec<u64>,
}

impl Received {
    /// From symbols 0, 1 and [`crate::channel::ERASURE`].
    pub fn from_symbols(y: &[u8]) -> Self {
        let w = words(y.len());
        let mut bits = vec![0u64; w];
        let mut erased = vec![0u64; w];
        for (i, &s) in y.iter().enumerate() {
            match s {
                0 => {}
                1 => bits[i / 64] |= 1 << (i % 64),
                _ => erased[i / 64] |= 1 << (i % 64),
            }
        }
        Self { bits, erased }
    }
}

fn bernoulli_mask<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Vec<u64> {
    let mut out = vec![0u64; words(n)];
    if p <= 0.0 {
        return out;
    }
    for i in 0..n {
        if rng.random_bool(p.min(1.0)) {
            out[i / 64] |= 1 << (i % 64);
        }
    }
    out
}

fn send<R: Rng + ?Sized>(x: &[u64], n: usize, state: ChannelState, rng: &mut R) -> Received {
    match state {
        ChannelState::Bsc(s) => {
            let flips = bernoulli_mask(n, s.crossover(), rng);
            Received { bits: x.iter().zip(&flips).map(|(a, b)| a ^ b).collect(), erased: vec![0; x.len()] }
        }
        ChannelState::Bec(s) => {
            let erased = bernoulli_mask(n, s.erasure(), rng);
            Received { bits: x.iter().zip(&erased).map(|(a, e)| a & !e).collect(), erased }
        }
    }
}

/// Positions where `x` disagrees with the unerased part of `y`.
fn disagreements(x: &[u64], y: &Received) -> usize {
    x.iter().zip(&y.bits).zip(&y.erased).map(|((a, b), e)| ((a ^ b) & !e).count_ones() as usize).sum()
}

fn erasures(y: &Received) -> usize {
    y.erased.iter().map(|e| e.count_ones() as usize).sum()
}

/// `(1/n) i(x; y | s)`, or `-inf` when `y` cannot come from `x`.
fn density(x: &[u64], y: &Received, n: usize, state: ChannelState) -> f64 {
    let d = disagreements(x, y);
    match state {
        ChannelState::Bsc(s) => info_density_bsc(d, n, s.crossover()).unwrap_or(f64::NEG_INFINITY),
        ChannelState::Bec(s) => {
            if d > 0 {
                f64::NEG_INFINITY
            } else {
                info_density_bec(erasures(y), n, s.erasure()).unwrap_or(f64::NEG_INFINITY)
            }
        }
    }
}

/// Index of the codeword maximizing `P(y | x, s)`, smallest on ties.
pub fn ml_decode(codebook: &Codebook, y: &Received, state: ChannelState) -> usize {
    let n = codebook.blocklength();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for k in 0..codebook.len() {
        // the density is the log-likelihood shifted by a term common to all
        // codewords
        let score = density(codebook.codeword(k), y, n, state);
        if score > best_score {
            best = k;
            best_score = score;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StateTally {
    pub trials: u64,
    pub outages: u64,
    pub errors: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub trials: u64,
    pub n: usize,
    pub rate: f64,
    pub codebook_size: usize,
    pub threshold: f64,
    pub seed: u64,
    pub outages: u64,
    /// Wrong or ambiguous decisions among trials not in outage.
    pub errors: u64,
    pub ml_errors: u64,
    pub ml_errors_without_outage: u64,
    /// Trials where the threshold decoder was right and ML was wrong.
    pub ml_dominance_violations: u64,
    pub outage_rate: f64,
    /// Zero when every trial was an outage.
    pub error_rate_given_no_outage: f64,
    pub ml_error_rate: f64,
    /// Rate delivered per trial: `log2(M) / n` when decoded correctly.
    pub expected_rate: f64,
    /// Keyed by state index (discrete) or density grid cell.
    pub per_state: BTreeMap<usize, StateTally>,
}

#[derive(Default)]
struct Counts {
    trials: u64,
    outages: u64,
    errors: u64,
    ml_errors: u64,
    ml_errors_without_outage: u64,
    violations: u64,
    per_state: BTreeMap<usize, StateTally>,
}

impl Counts {
    fn merge(&mut self, o: Counts) {
        self.trials += o.trials;
        self.outages += o.outages;
        self.errors += o.errors;
        self.ml_errors += o.ml_errors;
        self.ml_errors_without_outage += o.ml_errors_without_outage;
        self.violations += o.violations;
        for (k, t) in o.per_state {
            let e = self.per_state.entry(k).or_default();
            e.trials += t.trials;
            e.outages += t.outages;
            e.errors += t.errors;
        }
    }
}

fn one_trial(composite: &Composite, n: usize, size: usize, threshold: f64, rng: &mut SimRng, c: &mut Counts) {
    let drawn = composite.sample_state(rng);
    let book = Codebook::random(size, n, rng);
    let sent = rng.random_range(0..size);
    let y = send(book.codeword(sent), n, drawn.state, rng);

    let mut passers = 0;
    let mut passer = 0;
    for k in 0..size {
        if density(book.codeword(k), &y, n, drawn.state) > threshold {
            passers += 1;
            passer = k;
        }
    }
    let outage = passers == 0;
    let correct = passers == 1 && passer == sent;
    let ml_wrong = ml_decode(&book, &y, drawn.state) != sent;

    let tally = c.per_state.entry(drawn.id).or_default();
    tally.trials += 1;
    c.trials += 1;
    if outage {
        tally.outages += 1;
        c.outages += 1;
    } else if !correct {
        tally.errors += 1;
        c.errors += 1;
    }
    if ml_wrong {
        c.ml_errors += 1;
        if !outage {
            c.ml_errors_without_outage += 1;
        }
        if correct {
            c.violations += 1;
        }
    }
}

/// Runs `trials` independent transmissions of a rate-`rate` random code
/// with the threshold set to `C_q - epsilon`.
pub fn simulate_outage_code(
    composite: &Composite,
    n: usize,
    rate: f64,
    q: f64,
    trials: u64,
    epsilon: f64,
    seed: u64,
) -> Result<SimResult> {
    if n == 0 {
        return domain("blocklength must be positive");
    }
    if trials == 0 {
        return Err(Error::Empty("simulation needs at least one trial".into()));
    }
    if !(rate >= 0.0 && rate.is_finite()) {
        return domain(format!("rate {rate} must be finite and nonnegative"));
    }
    let log_size = n as f64 * rate;
    if log_size > MAX_LOG_CODEBOOK {
        return Err(Error::Resource(format!("nR = {log_size} exceeds {MAX_LOG_CODEBOOK}")));
    }
    let size = log_size.exp2().floor().max(1.0) as usize;
    let threshold = capacity_vs_outage(composite, q)? - epsilon;

    let parts: Vec<Counts> = shards(trials as usize)
        .into_par_iter()
        .map(|(shard, count)| {
            let mut rng = shard_rng(seed, shard);
            let mut c = Counts::default();
            for _ in 0..count {
                one_trial(composite, n, size, threshold, &mut rng, &mut c);
            }
            c
        })
        .collect();
    let mut c = Counts::default();
    for p in parts {
        c.merge(p);
    }
    let decoded = c.trials - c.outages;
    let delivered = (size as f64).log2() / n as f64;
    Ok(SimResult {
        trials: c.trials,
        n,
        rate,
        codebook_size: size,
        threshold,
        seed,
        outages: c.outages,
        errors: c.errors,
        ml_errors: c.ml_errors,
        ml_errors_without_outage: c.ml_errors_without_outage,
        ml_dominance_violations: c.violations,
        outage_rate: c.outages as f64 / c.trials as f64,
        error_rate_given_no_outage: if decoded == 0 { 0.0 } else { c.errors as f64 / decoded as f64 },
        ml_error_rate: c.ml_errors as f64 / c.trials as f64,
        expected_rate: delivered * (decoded - c.errors) as f64 / c.trials as f64,
        per_state: c.per_state,
    })
}

/// One row per blocklength: `n,trials,outage_rate,error_rate,ml_error_rate`.
pub fn write_sweep_csv<W: Write>(results: &[SimResult], mut w: W) -> Result<()> {
    writeln!(w, "n,trials,outage_rate,error_rate,ml_error_rate")?;
    for r in results {
        writeln!(w, "{},{},{},{},{}", r.n, r.trials, r.outage_rate, r.error_rate_given_no_outage, r.ml_error_rate)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct UncodedBecResult {
    pub trials: u64,
    pub n: usize,
    pub seed: u64,
    /// Mean fraction of unerased symbols over trials.
    pub expected_rate: f64,
    /// `(erasure probability, trials, mean unerased fraction)` per state.
    pub per_state: Vec<(f64, u64, f64)>,
}

/// Sends raw bits over an erasure composite; each trial delivers its
/// unerased fraction.
pub fn simulate_uncoded_bec(composite: &Composite, n: usize, trials: u64, seed: u64) -> Result<UncodedBecResult> {
    let Composite::Discrete(d) = composite else {
        return Err(Error::Unsupported("uncoded transmission needs a discrete erasure composite".into()));
    };
    if d.family() != Family::Bec {
        return Err(Error::Unsupported("uncoded transmission is defined for erasure channels".into()));
    }
    if n == 0 {
        return domain("blocklength must be positive");
    }
    if trials == 0 {
        return Err(Error::Empty("simulation needs at least one trial".into()));
    }
    let k = d.len();
    let parts: Vec<(Vec<u64>, Vec<u64>)> = shards(trials as usize)
        .into_par_iter()
        .map(|(shard, count)| {
            let mut rng = shard_rng(seed, shard);
            let mut hits = vec![0u64; k];
            let mut kept = vec![0u64; k];
            for _ in 0..count {
                let drawn = composite.sample_state(&mut rng);
                let clean = Binomial::new(n as u64, 1.0 - drawn.state.noise()).expect("probability").sample(&mut rng);
                hits[drawn.id] += 1;
                kept[drawn.id] += clean;
            }
            (hits, kept)
        })
        .collect();
    let mut hits = vec![0u64; k];
    let mut kept = vec![0u64; k];
    for (h, c) in parts {
        for i in 0..k {
            hits[i] += h[i];
            kept[i] += c[i];
        }
    }
    let total: u64 = kept.iter().sum();
    let per_state = (0..k)
        .map(|i| {
            let mean = if hits[i] == 0 { 0.0 } else { kept[i] as f64 / (hits[i] as f64 * n as f64) };
            (d.states()[i].noise(), hits[i], mean)
        })
        .collect();
    Ok(UncodedBecResult { trials, n, seed, expected_rate: total as f64 / (trials as f64 * n as f64), per_state })
}
