use std::fmt;

use crate::channel::entropy::h;
use crate::error::{check_probability, domain, Error, Result};

/// Tolerance on row sums of a transition matrix and on pmf totals.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// A discrete memoryless channel given by its row-stochastic transition
/// matrix (row = input symbol).
#[derive(Clone, Debug, PartialEq)]
pub struct Dmc {
    input_size: usize,
    output_size: usize,
    transition: Vec<f64>,
}

impl Dmc {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let input_size = rows.len();
        if input_size == 0 {
            return domain("transition matrix has no rows");
        }
        let output_size = rows[0].len();
        if output_size == 0 {
            return domain("transition matrix has no columns");
        }
        let mut transition = Vec::with_capacity(input_size * output_size);
        for (x, row) in rows.into_iter().enumerate() {
            if row.len() != output_size {
                return domain(format!("row {x} has {} entries, expected {output_size}", row.len()));
            }
            for &w in &row {
                check_probability("transition entry", w)?;
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > STOCHASTIC_TOL {
                return domain(format!("row {x} sums to {total}"));
            }
            transition.extend(row);
        }
        Ok(Self { input_size, output_size, transition })
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    /// `W(y | x)`.
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.transition[x * self.output_size + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.transition[x * self.output_size..(x + 1) * self.output_size]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct BscState(f64);

impl BscState {
    pub fn new(crossover: f64) -> Result<Self> {
        if (0.0..=0.5).contains(&crossover) {
            Ok(Self(crossover))
        } else {
            domain(format!("BSC crossover {crossover} outside [0, 1/2]"))
        }
    }

    pub fn crossover(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct BecState(f64);

impl BecState {
    pub fn new(erasure: f64) -> Result<Self> {
        check_probability("BEC erasure", erasure)?;
        Ok(Self(erasure))
    }

    pub fn erasure(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Bsc,
    Bec,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Bsc => f.write_str("bsc"),
            Family::Bec => f.write_str("bec"),
        }
    }
}

/// One component channel of a composite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelState {
    Bsc(BscState),
    Bec(BecState),
}

impl ChannelState {
    pub fn bsc(p: f64) -> Result<Self> {
        BscState::new(p).map(Self::Bsc)
    }

    pub fn bec(alpha: f64) -> Result<Self> {
        BecState::new(alpha).map(Self::Bec)
    }

    pub fn family(self) -> Family {
        match self {
            ChannelState::Bsc(_) => Family::Bsc,
            ChannelState::Bec(_) => Family::Bec,
        }
    }

    /// Crossover or erasure probability. Within a family larger means noisier.
    pub fn noise(self) -> f64 {
        match self {
            ChannelState::Bsc(s) => s.crossover(),
            ChannelState::Bec(s) => s.erasure(),
        }
    }

    /// Capacity in bits per use (uniform input is optimal for both families).
    pub fn capacity(self) -> f64 {
        match self {
            ChannelState::Bsc(s) => 1.0 - h(s.crossover()),
            ChannelState::Bec(s) => 1.0 - s.erasure(),
        }
    }

    pub fn to_dmc(self) -> Dmc {
        let rows = match self {
            ChannelState::Bsc(s) => {
                let p = s.crossover();
                vec![vec![1.0 - p, p], vec![p, 1.0 - p]]
            }
            // outputs 0, 1, erasure
            ChannelState::Bec(s) => {
                let a = s.erasure();
                vec![vec![1.0 - a, 0.0, a], vec![0.0, 1.0 - a, a]]
            }
        };
        Dmc::new(rows).expect("BSC/BEC rows are stochastic")
    }
}

impl fmt::Display for ChannelState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelState::Bsc(s) => write!(f, "BSC({})", s.crossover()),
            ChannelState::Bec(s) => write!(f, "BEC({})", s.erasure()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseOrder {
    FirstLessNoisy,
    Equivalent,
    SecondLessNoisy,
}

/// Stochastic degradedness within the BSC and BEC families: a BSC with a
/// larger crossover is a cascade of the smaller one with another BSC, and
/// likewise for erasures.
pub fn degraded_order(a: ChannelState, b: ChannelState) -> Result<NoiseOrder> {
    if a.family() != b.family() {
        return Err(Error::Unsupported(format!("cannot order {a} against {b}")));
    }
    let (x, y) = (a.noise(), b.noise());
    Ok(if x < y {
        NoiseOrder::FirstLessNoisy
    } else if x > y {
        NoiseOrder::SecondLessNoisy
    } else {
        NoiseOrder::Equivalent
    })
}
