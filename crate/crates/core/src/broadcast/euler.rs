//! Pointwise Euler condition for the optimal continuous layering and the
//! cutoffs of the range where it has an interior solution.

use super::atanh_ratio;
use crate::channel::{conv, ContinuousBscComposite};
use crate::error::{domain, Result};
use crate::numeric::{bisect, linspace};

const SCAN_CELLS: usize = 4096;

/// `[1/x - 1/(1-x)] / ln((1-x)/x)`, decreasing from `+inf` at `x = 0` to
/// its limit `2` at `x = 1/2`.
pub fn euler_lhs(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::INFINITY;
    }
    if (x - 0.5).abs() < 1e-6 {
        return 2.0;
    }
    // with u = 1 - 2x this is 2u / ((1 - u^2) atanh u)
    let u = 1.0 - 2.0 * x;
    2.0 / ((1.0 - u * u) * atanh_ratio(u))
}

/// `[(1 - 2p) f(p) - 2 F(p)] / F(p)`.
pub fn euler_rhs(p: f64, cdf: f64, pdf: f64) -> Result<f64> {
    if !(cdf > 0.0) {
        return domain(format!("F({p}) = {cdf}; the Euler condition needs F > 0"));
    }
    Ok(((1.0 - 2.0 * p) * pdf - 2.0 * cdf) / cdf)
}

/// Left side minus right side at auxiliary crossover `r`.
pub fn euler_residual(p: f64, r: f64, cdf: f64, pdf: f64) -> Result<f64> {
    Ok(euler_lhs(conv(p, r)) - euler_rhs(p, cdf, pdf)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EulerRoot {
    /// No root; the state lies below the lower cutoff and `r = 0`.
    Below,
    Interior(f64),
    /// No root; the state lies above the upper cutoff and `r = 1/2`.
    Above,
}

impl EulerRoot {
    pub fn r(self) -> f64 {
        match self {
            EulerRoot::Below => 0.0,
            EulerRoot::Interior(r) => r,
            EulerRoot::Above => 0.5,
        }
    }
}

/// Solves the Euler condition for `r` in `[0, 1/2]`. The left side is
/// decreasing in `r`, so a root exists iff the right side lies between its
/// values `euler_lhs(p)` at `r = 0` and `2` at `r = 1/2`.
pub fn solve_euler_r(p: f64, cdf: f64, pdf: f64) -> Result<EulerRoot> {
    if !(0.0..=0.5).contains(&p) {
        return domain(format!("crossover {p} outside [0, 1/2]"));
    }
    let rhs = euler_rhs(p, cdf, pdf)?;
    if rhs >= euler_lhs(p) {
        return Ok(EulerRoot::Below);
    }
    if rhs <= 2.0 {
        return Ok(EulerRoot::Above);
    }
    let r = bisect(|r| euler_lhs(conv(p, r)) - rhs, 0.0, 0.5, 1e-15).expect("bracketed");
    Ok(EulerRoot::Interior(r))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffPair {
    /// Best state still given `r = 0` by the optimal layering.
    pub p_l: f64,
    /// Best state already at `r = 1/2`; states beyond decode nothing.
    pub p_u: f64,
}

/// Cutoffs of the optimal layering for a crossover density.
///
/// `p_l` is where the right side of the Euler condition first drops to
/// `euler_lhs(p)`, `p_u` where it first drops to 2. Both are located by a
/// scan over the support followed by bisection.
pub fn find_cutoffs(c: &ContinuousBscComposite) -> Result<CutoffPair> {
    if let Some(p0) = c.point_mass_at() {
        return Ok(CutoffPair { p_l: p0, p_u: p0 });
    }
    // both boundaries multiplied through by F to stay finite where F = 0
    let lower = |p: f64| {
        let (cdf, pdf) = (c.cdf(p), c.pdf(p));
        let tail = if cdf > 0.0 { euler_lhs(p) * cdf } else { 0.0 };
        tail + 2.0 * cdf - (1.0 - 2.0 * p) * pdf
    };
    let upper = |p: f64| 4.0 * c.cdf(p) - (1.0 - 2.0 * p) * c.pdf(p);
    let (lo, hi) = (c.support_inf(), c.support_sup());
    let p_l = first_crossing(lower, lo, hi);
    let p_u = first_crossing(upper, lo, hi).max(p_l);
    Ok(CutoffPair { p_l, p_u })
}

/// First point of `[lo, hi]` where `g` turns positive, refined by bisection.
fn first_crossing<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64) -> f64 {
    let grid = linspace(lo, hi, SCAN_CELLS + 1);
    let mut prev = grid[0];
    if g(prev) > 0.0 {
        return prev;
    }
    for &x in &grid[1..] {
        if g(x) > 0.0 {
            let (mut a, mut b) = (prev, x);
            while b - a > 1e-15 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if g(m) > 0.0 {
                    b = m;
                } else {
                    a = m;
                }
            }
            return b;
        }
        prev = x;
    }
    hi
}
