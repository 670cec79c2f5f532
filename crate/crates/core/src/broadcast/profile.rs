//! Continuous layerings: a nondecreasing auxiliary-crossover profile
//! `r(p)` on a grid of states and the rates it delivers.
//!
//! A profile sampled at nodes `p_0 < ... < p_J` is a finite Bergmans
//! layering: the state at `p_j` is the receiver for the layer between
//! `r_j` and `r_{j+1}`, which carries `h(r_{j+1} * p_j) - h(r_j * p_j)`
//! bits. A state between nodes decodes what the next noisier node decodes,
//! so every rate reported here is achievable and the expected rate
//! approaches the continuous value from below as the grid is refined.

use std::io::Write;

use rayon::prelude::*;

use super::euler::{find_cutoffs, solve_euler_r, CutoffPair};
use crate::channel::{conv, h, ContinuousBscComposite};
use crate::error::{domain, Result};
use crate::numeric::linspace;

pub const DEFAULT_PROFILE_POINTS: usize = 4097;

#[derive(Clone, Debug, PartialEq)]
pub struct LayerProfile {
    grid: Vec<f64>,
    r: Vec<f64>,
}

impl LayerProfile {
    pub fn new(grid: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.len() != r.len() {
            return domain("profile needs matching, nonempty grid and values");
        }
        if grid.iter().chain(&r).any(|x| !(0.0..=0.5).contains(x)) {
            return domain("profile grid and values must lie in [0, 1/2]");
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return domain("profile grid must be strictly increasing");
        }
        if r.windows(2).any(|w| w[1] < w[0]) {
            return domain("profile must be nondecreasing");
        }
        Ok(Self { grid, r })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.r
    }

    /// Rate of the layer received at each node; the last node gets none.
    pub fn layer_rates(&self) -> Vec<f64> {
        let n = self.grid.len();
        (0..n)
            .map(|j| {
                if j + 1 == n {
                    0.0
                } else {
                    let p = self.grid[j];
                    (h(conv(self.r[j + 1], p)) - h(conv(self.r[j], p))).max(0.0)
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateProfile {
    pub grid: Vec<f64>,
    pub r: Vec<f64>,
    /// Cumulative decodable rate at each node.
    pub rate: Vec<f64>,
}

impl RateProfile {
    /// Rate decodable in state `p`: that of the first node at or above
    /// `p`, zero past the last node.
    pub fn at(&self, p: f64) -> f64 {
        let k = self.grid.partition_point(|&g| g < p);
        self.rate.get(k).copied().unwrap_or(0.0)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "p,r,rate")?;
        for k in 0..self.grid.len() {
            writeln!(w, "{},{},{}", self.grid[k], self.r[k], self.rate[k])?;
        }
        Ok(())
    }
}

pub fn rate_profile(layer: &LayerProfile) -> RateProfile {
    let layers = layer.layer_rates();
    let mut rate = vec![0.0; layers.len()];
    let mut acc = 0.0;
    for j in (0..layers.len()).rev() {
        acc += layers[j];
        rate[j] = acc;
    }
    RateProfile { grid: layer.grid.clone(), r: layer.r.clone(), rate }
}

/// `E[R(p)] = sum_j F(p_j) * layer_j`: layer `j` reaches every state with
/// crossover at most `p_j`.
pub fn expected_rate(layer: &LayerProfile, c: &ContinuousBscComposite) -> f64 {
    layer.layer_rates().iter().zip(&layer.grid).map(|(l, &p)| c.cdf(p) * l).sum()
}

/// The same expectation summed state by state, `sum_j R(p_j) P(p_{j-1} < p <= p_j)`.
fn expected_rate_by_state(rates: &RateProfile, c: &ContinuousBscComposite) -> f64 {
    let mut prev = 0.0;
    let mut acc = 0.0;
    for (p, r) in rates.grid.iter().zip(&rates.rate) {
        let cdf = c.cdf(*p);
        acc += r * (cdf - prev);
        prev = cdf;
    }
    acc
}

/// A single step from 0 to 1/2: one layer at the full capacity of `p`.
fn step_profile(p: f64) -> Result<LayerProfile> {
    if p >= 0.5 {
        LayerProfile::new(vec![0.5], vec![0.5])
    } else {
        LayerProfile::new(vec![p, 0.5], vec![0.0, 0.5])
    }
}

/// Solves the Euler condition on `points` nodes spanning the cutoffs.
pub fn solve_layering(c: &ContinuousBscComposite, cutoffs: CutoffPair, points: usize) -> Result<LayerProfile> {
    if cutoffs.p_u <= cutoffs.p_l || points < 2 {
        return step_profile(cutoffs.p_l);
    }
    let grid = linspace(cutoffs.p_l, cutoffs.p_u, points);
    let last = grid.len() - 1;
    let mut r = grid
        .par_iter()
        .enumerate()
        .map(|(k, &p)| {
            if k == 0 {
                return Ok(0.0);
            }
            if k == last {
                return Ok(0.5);
            }
            let cdf = c.cdf(p);
            if cdf <= 0.0 {
                return Ok(0.0);
            }
            Ok(solve_euler_r(p, cdf, c.pdf(p))?.r())
        })
        .collect::<Result<Vec<f64>>>()?;
    // guard against a density whose Euler solution is not monotone
    for k in 1..r.len() {
        r[k] = r[k].max(r[k - 1]);
    }
    LayerProfile::new(grid, r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousExpected {
    pub value: f64,
    /// `E[R(p)]` computed state by state; equal to `value` up to rounding.
    pub by_state: f64,
    pub cutoffs: CutoffPair,
    pub layer: LayerProfile,
    pub rates: RateProfile,
}

/// Expected capacity of a BSC crossover density via the Euler layering.
pub fn expected_capacity_continuous(c: &ContinuousBscComposite, points: usize) -> Result<ContinuousExpected> {
    let cutoffs = find_cutoffs(c)?;
    let layer = solve_layering(c, cutoffs, points)?;
    let rates = rate_profile(&layer);
    let value = expected_rate(&layer, c);
    let by_state = expected_rate_by_state(&rates, c);
    Ok(ContinuousExpected { value, by_state, cutoffs, layer, rates })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParametricFamily {
    /// `r = (1/2) ((p - p_l) / (p_u - p_l))^gamma` between the optimal cutoffs.
    OptimalCutoff,
    /// `r = (1/2) (2p)^gamma` over all of `[0, 1/2]`.
    FullRange,
}

/// Builds a parametric profile. Below its range `r = 0`, above it `r = 1/2`.
pub fn parametric_profile(
    family: ParametricFamily,
    gamma: f64,
    cutoffs: CutoffPair,
    points: usize,
) -> Result<LayerProfile> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return domain(format!("gamma must be positive, got {gamma}"));
    }
    let points = points.max(2);
    match family {
        ParametricFamily::OptimalCutoff => {
            let (lo, hi) = (cutoffs.p_l, cutoffs.p_u);
            if hi <= lo {
                return step_profile(lo);
            }
            let grid = linspace(lo, hi, points);
            let r = grid.iter().map(|&p| (0.5 * ((p - lo) / (hi - lo)).powf(gamma)).clamp(0.0, 0.5)).collect();
            LayerProfile::new(grid, r)
        }
        ParametricFamily::FullRange => {
            let grid = linspace(0.0, 0.5, points);
            let r = grid.iter().map(|&p| (0.5 * (2.0 * p).powf(gamma)).clamp(0.0, 0.5)).collect();
            LayerProfile::new(grid, r)
        }
    }
}

pub fn parametric_expected_rate(
    c: &ContinuousBscComposite,
    family: ParametricFamily,
    gamma: f64,
    points: usize,
) -> Result<f64> {
    let cutoffs = find_cutoffs(c)?;
    Ok(expected_rate(&parametric_profile(family, gamma, cutoffs, points)?, c))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParametricSweep {
    pub gamma: Vec<f64>,
    pub optimal_cutoff: Vec<f64>,
    pub full_range: Vec<f64>,
    pub expected_capacity: f64,
}

impl ParametricSweep {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "gamma,optimal_cutoff,full_range,expected_capacity")?;
        for k in 0..self.gamma.len() {
            writeln!(
                w,
                "{},{},{},{}",
                self.gamma[k], self.optimal_cutoff[k], self.full_range[k], self.expected_capacity
            )?;
        }
        Ok(())
    }

    fn best(v: &[f64]) -> f64 {
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn best_optimal_cutoff(&self) -> f64 {
        Self::best(&self.optimal_cutoff)
    }

    pub fn best_full_range(&self) -> f64 {
        Self::best(&self.full_range)
    }
}

/// Expected rates of both parametric families over `gammas`, next to the
/// Euler-layering expected capacity.
pub fn parametric_sweep(c: &ContinuousBscComposite, gammas: &[f64], points: usize) -> Result<ParametricSweep> {
    let cutoffs = find_cutoffs(c)?;
    let expected_capacity = expected_capacity_continuous(c, points)?.value;
    let eval = |family| {
        gammas
            .par_iter()
            .map(|&g| Ok(expected_rate(&parametric_profile(family, g, cutoffs, points)?, c)))
            .collect::<Result<Vec<f64>>>()
    };
    Ok(ParametricSweep {
        gamma: gammas.to_vec(),
        optimal_cutoff: eval(ParametricFamily::OptimalCutoff)?,
        full_range: eval(ParametricFamily::FullRange)?,
        expected_capacity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::broadcast::optimize_composite;
    use crate::capacity::{best_outage_rate, capacity_vs_outage, expected_capacity_bounds};
    use crate::channel::Composite;

    fn uniform() -> ContinuousBscComposite {
        ContinuousBscComposite::uniform()
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(LayerProfile::new(vec![0.1, 0.2], vec![0.3, 0.2]).is_err());
        assert!(LayerProfile::new(vec![0.2, 0.1], vec![0.1, 0.2]).is_err());
        assert!(LayerProfile::new(vec![0.1, 0.6], vec![0.1, 0.2]).is_err());
        assert!(LayerProfile::new(vec![0.1], vec![]).is_err());
    }

    #[test]
    fn constant_profile_carries_nothing() {
        let l = LayerProfile::new(linspace(0.0, 0.5, 11), vec![0.2; 11]).unwrap();
        assert!(rate_profile(&l).rate.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn single_jump_is_an_outage_code() {
        let c = uniform();
        let grid = linspace(0.05, 0.45, 401);
        for m in [1, 50, 200, 399] {
            let r: Vec<f64> = (0..grid.len()).map(|k| if k < m { 0.0 } else { 0.5 }).collect();
            let l = LayerProfile::new(grid.clone(), r).unwrap();
            let rates = rate_profile(&l);
            let p_last = grid[m - 1];
            let q = 1.0 - c.cdf(p_last);
            let c_q = capacity_vs_outage(&c.clone().into(), q).unwrap();
            assert!((rates.at(p_last) - c_q).abs() < 1e-12);
            assert_eq!(rates.at(grid[m]), 0.0);
            assert!((expected_rate(&l, &c) - (1.0 - q) * c_q).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_expected_capacity() {
        let c = uniform();
        let e = expected_capacity_continuous(&c, DEFAULT_PROFILE_POINTS).unwrap();
        let b = expected_capacity_bounds(&c.clone().into()).unwrap();
        assert!(e.value > b.lower && e.value < b.upper, "{} not in ({}, {})", e.value, b.lower, b.upper);
        assert!((e.value - e.by_state).abs() < 1e-12);
        // plateau at p_l and nothing at or beyond p_u
        assert!((e.rates.at(e.cutoffs.p_l) - 0.38).abs() < 0.02, "{}", e.rates.at(e.cutoffs.p_l));
        assert_eq!(e.rates.at(e.cutoffs.p_u), 0.0);
        assert!(e.rates.rate.windows(2).all(|w| w[1] <= w[0]));
        // a finer grid moves the value by little
        let fine = expected_capacity_continuous(&c, 4 * DEFAULT_PROFILE_POINTS).unwrap();
        assert!(fine.value >= e.value - 1e-12 && fine.value - e.value < 1e-6);
    }

    #[test]
    fn point_mass_expected_capacity() {
        let c = ContinuousBscComposite::point_mass(0.2).unwrap();
        let e = expected_capacity_continuous(&c, 100).unwrap();
        assert!((e.value - (1.0 - h(0.2))).abs() < 1e-15);
    }

    #[test]
    fn dominates_outage_for_several_densities() {
        for c in [
            uniform(),
            ContinuousBscComposite::triangular(0.0, 0.1, 0.5).unwrap(),
            ContinuousBscComposite::triangular(0.05, 0.25, 0.45).unwrap(),
            ContinuousBscComposite::triangular(0.0, 0.45, 0.5).unwrap(),
        ] {
            let e = expected_capacity_continuous(&c, DEFAULT_PROFILE_POINTS).unwrap().value;
            let o = best_outage_rate(&Composite::from(c.clone())).unwrap().rate;
            assert!(e >= o - 1e-9, "{e} < {o}");
        }
    }

    #[test]
    fn matches_fine_discrete_optimum() {
        let c = uniform();
        let e = expected_capacity_continuous(&c, DEFAULT_PROFILE_POINTS).unwrap().value;
        let d = optimize_composite(&c.discretize(64).unwrap()).unwrap().expected_rate;
        assert!(d <= e + 1e-9 && (e - d) / e < 0.01, "{d} vs {e}");
    }

    /// Change of the expected rate when node `k` of the profile moves to
    /// `x`; only the layers at nodes `k - 1` and `k` depend on `r_k`.
    fn local_change(l: &LayerProfile, c: &ContinuousBscComposite, k: usize, x: f64) -> f64 {
        let (g, r) = (l.grid(), l.values());
        let below = c.cdf(g[k - 1]) * (h(conv(x, g[k - 1])) - h(conv(r[k], g[k - 1])));
        let here = c.cdf(g[k])
            * (h(conv(r[k + 1], g[k])) - h(conv(x, g[k])) - (h(conv(r[k + 1], g[k])) - h(conv(r[k], g[k]))));
        below + here
    }

    fn worst_gain(c: &ContinuousBscComposite, points: usize, delta: f64) -> f64 {
        let e = expected_capacity_continuous(c, points).unwrap();
        let r = e.layer.values();
        let mut worst = f64::NEG_INFINITY;
        for k in 1..r.len() - 1 {
            for x in [r[k] - delta, r[k] + delta] {
                if x >= r[k - 1] && x <= r[k + 1] {
                    worst = worst.max(local_change(&e.layer, c, k, x));
                }
            }
        }
        worst
    }

    #[test]
    fn euler_profile_is_stationary() {
        // What a +-1e-4 move can gain is the O(dp^2) gap between the Euler
        // condition and its sampled form: far below the quadrature error
        // of the expected rate, and shrinking with the grid.
        let c = uniform();
        let coarse = worst_gain(&c, 1025, 1e-4);
        let fine = worst_gain(&c, DEFAULT_PROFILE_POINTS, 1e-4);
        assert!(fine < 1e-12, "perturbation gained {fine}");
        assert!(fine < coarse / 10.0, "{fine} vs {coarse}");
    }

    #[test]
    fn parametric_families() {
        let c = uniform();
        let gammas: Vec<f64> = (1..=40).map(|k| k as f64 * 0.1).collect();
        let s = parametric_sweep(&c, &gammas, 2049).unwrap();
        assert!(s.best_optimal_cutoff() <= s.expected_capacity + 1e-9);
        assert!(s.best_full_range() < s.best_optimal_cutoff());
        assert!((s.expected_capacity - s.best_optimal_cutoff()) / s.expected_capacity < 0.01);
        // a tiny exponent jumps straight to 1/2: one layer at p_l
        let cut = find_cutoffs(&c).unwrap();
        let tiny = parametric_expected_rate(&c, ParametricFamily::OptimalCutoff, 1e-3, 4097).unwrap();
        let single = c.cdf(cut.p_l) * (1.0 - h(cut.p_l));
        assert!((tiny - single).abs() < 1e-3, "{tiny} vs {single}");
        assert!(parametric_expected_rate(&c, ParametricFamily::FullRange, 0.0, 10).is_err());
    }

    #[test]
    fn full_range_linear_by_quadrature() {
        // gamma = 1: r = p, so a state at p decodes int_p^{1/2} of the layer
        // density; compare against a much finer grid
        let c = uniform();
        let coarse = parametric_expected_rate(&c, ParametricFamily::FullRange, 1.0, 4097).unwrap();
        let fine = parametric_expected_rate(&c, ParametricFamily::FullRange, 1.0, 65_537).unwrap();
        assert!(fine >= coarse && fine - coarse < 1e-4);
    }
}
