use rand::Rng;

use crate::channel::state::{ChannelState, Family, STOCHASTIC_TOL};
use crate::error::{domain, Error, Result};
use crate::numeric::{bisect, cumulative_trapezoid, linspace};
use crate::rng;

/// Default number of grid points on `[0, 1/2]` for crossover densities.
pub const DEFAULT_GRID_POINTS: usize = 2049;

/// Tolerance on the total mass of a gridded density.
pub const DENSITY_MASS_TOL: f64 = 1e-9;

/// Output symbol used by the BEC for an erasure.
pub const ERASURE: u8 = 2;

/// Finitely many component channels of one family with a state pmf.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteComposite {
    states: Vec<ChannelState>,
    pmf: Vec<f64>,
}

impl DiscreteComposite {
    pub fn new(states: Vec<ChannelState>, pmf: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return domain("composite has no states");
        }
        if states.len() != pmf.len() {
            return domain(format!("{} states but {} probabilities", states.len(), pmf.len()));
        }
        let family = states[0].family();
        if let Some(s) = states.iter().find(|s| s.family() != family) {
            return Err(Error::Unsupported(format!("mixed families: {} and {s}", states[0])));
        }
        if let Some(w) = pmf.iter().find(|w| !(**w >= 0.0)) {
            return domain(format!("negative or NaN state probability {w}"));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > STOCHASTIC_TOL {
            return domain(format!("state pmf sums to {total}"));
        }
        Ok(Self { states, pmf })
    }

    pub fn bsc(crossovers: &[f64], pmf: &[f64]) -> Result<Self> {
        let states = crossovers.iter().map(|&p| ChannelState::bsc(p)).collect::<Result<_>>()?;
        Self::new(states, pmf.to_vec())
    }

    pub fn bec(erasures: &[f64], pmf: &[f64]) -> Result<Self> {
        let states = erasures.iter().map(|&a| ChannelState::bec(a)).collect::<Result<_>>()?;
        Self::new(states, pmf.to_vec())
    }

    pub fn single(state: ChannelState) -> Self {
        Self { states: vec![state], pmf: vec![1.0] }
    }

    pub fn states(&self) -> &[ChannelState] {
        &self.states
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn family(&self) -> Family {
        self.states[0].family()
    }

    /// `(state, probability)` pairs ordered from least to most noisy.
    pub fn by_noise(&self) -> Vec<(ChannelState, f64)> {
        let mut v: Vec<_> = self.states.iter().copied().zip(self.pmf.iter().copied()).collect();
        v.sort_by(|a, b| a.0.noise().total_cmp(&b.0.noise()));
        v
    }

    /// Indices of states with positive probability.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.pmf[i] > 0.0).collect()
    }

    fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, &w) in self.pmf.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                last_positive = i;
                if u < acc {
                    return i;
                }
            }
        }
        last_positive
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DensityShape {
    /// `f = 2` on `[0, 1/2]`, evaluated analytically.
    Uniform,
    /// Piecewise-linear density through the grid values.
    Grid,
    /// All mass at one crossover. Used for degenerate single-state checks.
    PointMass(f64),
}

/// A BSC whose crossover is drawn from a density on `[0, 1/2]`.
///
/// The density is stored on a grid and interpolated linearly; the cdf is the
/// exact integral of that interpolant, so at grid nodes it coincides with
/// the trapezoid rule.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousBscComposite {
    grid: Vec<f64>,
    density: Vec<f64>,
    cumulative: Vec<f64>,
    shape: DensityShape,
}

impl ContinuousBscComposite {
    pub fn uniform() -> Self {
        Self::uniform_on_grid(DEFAULT_GRID_POINTS).expect("default grid is valid")
    }

    pub fn uniform_on_grid(points: usize) -> Result<Self> {
        if points < 2 {
            return domain("density grid needs at least two points");
        }
        let grid = linspace(0.0, 0.5, points);
        let density = vec![2.0; points];
        let cumulative = grid.iter().map(|p| 2.0 * p).collect();
        Ok(Self { grid, density, cumulative, shape: DensityShape::Uniform })
    }

    pub fn point_mass(p0: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&p0) {
            return domain(format!("point mass at {p0} outside [0, 1/2]"));
        }
        Ok(Self { grid: vec![p0], density: vec![0.0], cumulative: vec![1.0], shape: DensityShape::PointMass(p0) })
    }

    /// Density given on a strictly increasing grid inside `[0, 1/2]`. Its
    /// trapezoid integral must be 1 within [`DENSITY_MASS_TOL`].
    pub fn from_grid(grid: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        let total = Self::check_grid(&grid, &density)?;
        if (total - 1.0).abs() > DENSITY_MASS_TOL {
            return domain(format!("density integrates to {total}, not 1"));
        }
        Ok(Self::build(grid, density, total))
    }

    /// Like [`from_grid`](Self::from_grid) but rescales the density to unit mass.
    pub fn from_grid_normalized(grid: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        let total = Self::check_grid(&grid, &density)?;
        Ok(Self::build(grid, density, total))
    }

    /// Triangular density on `[lo, hi]` peaking at `mode`, sampled on the
    /// default grid over `[0, 1/2]`.
    pub fn triangular(lo: f64, mode: f64, hi: f64) -> Result<Self> {
        if !(0.0 <= lo && lo < mode && mode < hi && hi <= 0.5) {
            return domain(format!("triangular({lo}, {mode}, {hi}) is not ordered inside [0, 1/2]"));
        }
        let peak = 2.0 / (hi - lo);
        let mut grid = linspace(0.0, 0.5, DEFAULT_GRID_POINTS);
        // the kinks must be grid nodes for the interpolant to be exact
        grid.extend([lo, mode, hi]);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let density = grid
            .iter()
            .map(|&p| {
                if p <= lo || p >= hi {
                    0.0
                } else if p <= mode {
                    peak * (p - lo) / (mode - lo)
                } else {
                    peak * (hi - p) / (hi - mode)
                }
            })
            .collect();
        Self::from_grid_normalized(grid, density)
    }

    fn check_grid(grid: &[f64], density: &[f64]) -> Result<f64> {
        if grid.len() < 2 || grid.len() != density.len() {
            return domain("density grid needs at least two points and one value per point");
        }
        if grid[0] < 0.0 || grid[grid.len() - 1] > 0.5 {
            return domain("density grid must lie inside [0, 1/2]");
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("density grid must be strictly increasing");
        }
        if density.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
            return domain("density values must be finite and nonnegative");
        }
        let total = *cumulative_trapezoid(grid, density).last().unwrap();
        if !(total > 0.0) {
            return domain("density has zero mass");
        }
        Ok(total)
    }

    fn build(grid: Vec<f64>, mut density: Vec<f64>, total: f64) -> Self {
        for f in &mut density {
            *f /= total;
        }
        let mut cumulative = cumulative_trapezoid(&grid, &density);
        let last = *cumulative.last().unwrap();
        for c in &mut cumulative {
            *c /= last;
        }
        Self { grid, density, cumulative, shape: DensityShape::Grid }
    }

    pub fn shape(&self) -> DensityShape {
        self.shape
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density_values(&self) -> &[f64] {
        &self.density
    }

    pub fn point_mass_at(&self) -> Option<f64> {
        match self.shape {
            DensityShape::PointMass(p) => Some(p),
            _ => None,
        }
    }

    fn cell(&self, p: f64) -> usize {
        // index k with grid[k] <= p < grid[k + 1]
        self.grid.partition_point(|&g| g <= p).saturating_sub(1).min(self.grid.len() - 2)
    }

    pub fn pdf(&self, p: f64) -> f64 {
        match self.shape {
            DensityShape::Uniform => {
                if (0.0..=0.5).contains(&p) {
                    2.0
                } else {
                    0.0
                }
            }
            DensityShape::PointMass(_) => 0.0,
            DensityShape::Grid => {
                let n = self.grid.len();
                if p < self.grid[0] || p > self.grid[n - 1] {
                    return 0.0;
                }
                let k = self.cell(p);
                let t = (p - self.grid[k]) / (self.grid[k + 1] - self.grid[k]);
                self.density[k] + t * (self.density[k + 1] - self.density[k])
            }
        }
    }

    pub fn cdf(&self, p: f64) -> f64 {
        match self.shape {
            DensityShape::Uniform => (2.0 * p).clamp(0.0, 1.0),
            DensityShape::PointMass(p0) => {
                if p >= p0 {
                    1.0
                } else {
                    0.0
                }
            }
            DensityShape::Grid => {
                let n = self.grid.len();
                if p <= self.grid[0] {
                    return 0.0;
                }
                if p >= self.grid[n - 1] {
                    return 1.0;
                }
                let k = self.cell(p);
                let dx = self.grid[k + 1] - self.grid[k];
                let t = p - self.grid[k];
                let (f0, f1) = (self.density[k], self.density[k + 1]);
                (self.cumulative[k] + f0 * t + (f1 - f0) * t * t / (2.0 * dx)).min(1.0)
            }
        }
    }

    /// `inf { p : F(p) >= level }` for `level` in `(0, 1]`.
    pub fn quantile(&self, level: f64) -> f64 {
        match self.shape {
            DensityShape::Uniform => 0.5 * level.clamp(0.0, 1.0),
            DensityShape::PointMass(p0) => p0,
            DensityShape::Grid => {
                if level <= 0.0 {
                    return self.support_inf();
                }
                let k = self.cumulative.partition_point(|&c| c < level);
                if k == 0 {
                    return self.grid[0];
                }
                if k >= self.grid.len() {
                    return self.grid[self.grid.len() - 1];
                }
                if self.cumulative[k] == level && self.cumulative[k - 1] < level {
                    return self.grid[k];
                }
                let (a, b) = (self.grid[k - 1], self.grid[k]);
                bisect(|p| self.cdf(p) - level, a, b, 1e-15).unwrap_or(b)
            }
        }
    }

    /// Smallest crossover in the closure of `{p : f(p) > 0}`.
    pub fn support_inf(&self) -> f64 {
        match self.shape {
            DensityShape::Uniform => 0.0,
            DensityShape::PointMass(p0) => p0,
            DensityShape::Grid => {
                let k = self.density.iter().position(|&f| f > 0.0).unwrap_or(0);
                self.grid[k.saturating_sub(1)]
            }
        }
    }

    /// `sup { p : f(p) > 0 }`, the worst crossover in the support.
    pub fn support_sup(&self) -> f64 {
        match self.shape {
            DensityShape::Uniform => 0.5,
            DensityShape::PointMass(p0) => p0,
            DensityShape::Grid => {
                let n = self.grid.len();
                let k = self.density.iter().rposition(|&f| f > 0.0).unwrap_or(n - 1);
                self.grid[(k + 1).min(n - 1)]
            }
        }
    }

    /// `E[g(p)]` by composite Simpson quadrature.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        match self.shape {
            DensityShape::PointMass(p0) => g(p0),
            DensityShape::Uniform => {
                let intervals = 1 << 15;
                2.0 * simpson(&g, 0.0, 0.5, intervals)
            }
            DensityShape::Grid => self
                .grid
                .windows(2)
                .map(|w| {
                    let fg = |p: f64| self.pdf(p) * g(p);
                    simpson(&fg, w[0], w[1], 8)
                })
                .sum(),
        }
    }

    /// The sub-collection of states with crossover at most `cut`,
    /// renormalized. Fails when that set carries no mass.
    pub fn truncate_above(&self, cut: f64) -> Result<Self> {
        if let DensityShape::PointMass(p0) = self.shape {
            return if cut >= p0 { Ok(self.clone()) } else { domain("truncation removes all mass") };
        }
        if self.cdf(cut) <= 0.0 {
            return domain(format!("no mass below crossover {cut}"));
        }
        let mut grid: Vec<f64> = self.grid.iter().copied().filter(|&p| p < cut).collect();
        grid.push(cut);
        if grid.len() < 2 {
            return domain(format!("truncation at {cut} leaves fewer than two grid points"));
        }
        let density = grid.iter().map(|&p| self.pdf(p)).collect();
        Self::from_grid_normalized(grid, density)
    }

    /// Quantizes the density to `n` states at the right end (worst
    /// crossover) of equal-width cells spanning the support, each carrying
    /// the mass of its cell. Every state is replaced by a noisier one, so
    /// expected rates of the result never exceed the continuous ones.
    pub fn discretize(&self, n: usize) -> Result<DiscreteComposite> {
        if n == 0 {
            return domain("need at least one state");
        }
        if let DensityShape::PointMass(p0) = self.shape {
            return Ok(DiscreteComposite::single(ChannelState::bsc(p0)?));
        }
        let lo = self.support_inf();
        let hi = self.support_sup();
        let edges = linspace(lo, hi, n + 1);
        let mut states = Vec::with_capacity(n);
        let mut pmf = Vec::with_capacity(n);
        for w in edges.windows(2) {
            states.push(ChannelState::bsc(w[1])?);
            pmf.push(self.cdf(w[1]) - self.cdf(w[0]));
        }
        let total: f64 = pmf.iter().sum();
        for w in &mut pmf {
            *w /= total;
        }
        DiscreteComposite::new(states, pmf)
    }

    /// Draws a crossover by inverting the cdf; also returns the grid cell.
    pub fn sample_crossover<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64) {
        let u: f64 = rng.random();
        let p = match self.shape {
            DensityShape::Uniform => 0.5 * u,
            _ => self.quantile(u),
        };
        let cell = if self.grid.len() > 1 { self.cell(p) } else { 0 };
        (cell, p)
    }
}

fn simpson<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = g(a) + g(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Any supported composite channel.
#[derive(Clone, Debug, PartialEq)]
pub enum Composite {
    Discrete(DiscreteComposite),
    Continuous(ContinuousBscComposite),
}

impl From<DiscreteComposite> for Composite {
    fn from(c: DiscreteComposite) -> Self {
        Composite::Discrete(c)
    }
}

impl From<ContinuousBscComposite> for Composite {
    fn from(c: ContinuousBscComposite) -> Self {
        Composite::Continuous(c)
    }
}

/// A state draw: `id` is the state index for discrete composites and the
/// density grid cell for continuous ones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampledState {
    pub id: usize,
    pub state: ChannelState,
}

impl Composite {
    pub fn family(&self) -> Family {
        match self {
            Composite::Discrete(d) => d.family(),
            Composite::Continuous(_) => Family::Bsc,
        }
    }

    pub fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> SampledState {
        match self {
            Composite::Discrete(d) => {
                let id = d.sample_index(rng);
                SampledState { id, state: d.states[id] }
            }
            Composite::Continuous(c) => {
                let (id, p) = c.sample_crossover(rng);
                SampledState { id, state: ChannelState::bsc(p.clamp(0.0, 0.5)).expect("clamped") }
            }
        }
    }
}

/// One state draw from a fresh generator seeded with `seed`.
pub fn sample_state(composite: &Composite, seed: u64) -> SampledState {
    composite.sample_state(&mut rng::seeded(seed))
}

/// Sends a block of bits through one component channel. BSC outputs are
/// bits; BEC outputs are bits or [`ERASURE`].
pub fn transmit<R: Rng + ?Sized>(state: ChannelState, x: &[u8], rng: &mut R) -> Result<Vec<u8>> {
    if x.is_empty() {
        return domain("empty input block");
    }
    if let Some(b) = x.iter().find(|&&b| b > 1) {
        return domain(format!("input symbol {b} is not a bit"));
    }
    Ok(match state {
        ChannelState::Bsc(s) => {
            let p = s.crossover();
            x.iter().map(|&b| if rng.random_bool(p) { b ^ 1 } else { b }).collect()
        }
        ChannelState::Bec(s) => {
            let a = s.erasure();
            x.iter().map(|&b| if rng.random_bool(a) { ERASURE } else { b }).collect()
        }
    })
}
