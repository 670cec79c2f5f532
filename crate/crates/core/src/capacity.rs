//! Shannon capacity, capacity versus outage, outage capacity and the
//! bounds that sandwich the expected capacity.
//!
//! All channel families here are ordered by degradedness, so the
//! information spectrum in the large-blocklength limit puts mass `P(S = s)`
//! at the state capacity `C_s`. Capacity versus outage `q` is then the
//! capacity of the worst state that is still served when the noisiest
//! states of total mass at most `q` are declared in outage.

use std::io::Write;

use crate::channel::{h, ChannelState, Composite, ContinuousBscComposite, DensityShape, DiscreteComposite, Family};
use crate::error::{domain, Result};
use crate::numeric::grid_golden_max;
use crate::spectrum::EmpiricalCdf;

/// Slack on cumulative state masses when deciding whether an atom fits
/// inside the outage budget.
pub const MASS_TOL: f64 = 1e-12;

/// Points in the coarse scan of `(1 - q) C_q`.
pub const OUTAGE_SCAN_POINTS: usize = 1024;

fn state_capacity(family: Family, noise: f64) -> f64 {
    match family {
        Family::Bsc => 1.0 - h(noise),
        Family::Bec => 1.0 - noise,
    }
}

fn check_outage_level(q: f64) -> Result<()> {
    if (0.0..1.0).contains(&q) {
        Ok(())
    } else {
        domain(format!("outage probability {q} outside [0, 1)"))
    }
}

/// Noise level of the worst state in the support.
pub fn worst_state(composite: &Composite) -> f64 {
    match composite {
        Composite::Discrete(d) => d
            .states()
            .iter()
            .zip(d.pmf())
            .filter(|(_, &w)| w > 0.0)
            .map(|(s, _)| s.noise())
            .fold(f64::NEG_INFINITY, f64::max),
        Composite::Continuous(c) => c.support_sup(),
    }
}

/// Capacity of a composite: the capacity of its worst state with positive
/// probability. Only the support matters, not the pmf.
pub fn shannon_capacity(composite: &Composite) -> Result<f64> {
    Ok(state_capacity(composite.family(), worst_state(composite)))
}

/// `p_q = inf { p : F(p) >= 1 - q }`, the worst state served at outage `q`.
/// An atom is put in outage only if its whole mass fits inside `q`.
pub fn outage_threshold_state(composite: &Composite, q: f64) -> Result<f64> {
    check_outage_level(q)?;
    Ok(match composite {
        Composite::Discrete(d) => {
            let level = 1.0 - q - MASS_TOL;
            let mut cum = 0.0;
            let sorted = d.by_noise();
            let mut pick = sorted.last().expect("nonempty").0.noise();
            for (s, w) in sorted {
                cum += w;
                if w > 0.0 && cum >= level {
                    pick = s.noise();
                    break;
                }
            }
            pick
        }
        Composite::Continuous(c) => c.quantile(1.0 - q),
    })
}

/// `C_q` from the analytic state law.
pub fn capacity_vs_outage(composite: &Composite, q: f64) -> Result<f64> {
    let p_q = outage_threshold_state(composite, q)?;
    Ok(state_capacity(composite.family(), p_q))
}

/// `C_q` read off an estimated information spectrum.
pub fn capacity_from_spectrum(cdf: &EmpiricalCdf, q: f64) -> Result<f64> {
    Ok(cdf.quantile(q)?.value)
}

/// Mean number of transmissions until a block is not in outage.
pub fn expected_retransmissions(q: f64) -> Result<f64> {
    check_outage_level(q)?;
    Ok(1.0 / (1.0 - q))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutageCurve {
    pub q: Vec<f64>,
    /// Capacity versus outage `C_q`.
    pub capacity: Vec<f64>,
    /// Outage capacity `(1 - q) C_q`.
    pub outage_capacity: Vec<f64>,
}

impl OutageCurve {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "q,c_q,c_o_q")?;
        for k in 0..self.q.len() {
            writeln!(w, "{},{},{}", self.q[k], self.capacity[k], self.outage_capacity[k])?;
        }
        Ok(())
    }
}

pub fn outage_curve(composite: &Composite, q_grid: &[f64]) -> Result<OutageCurve> {
    let capacity = q_grid.iter().map(|&q| capacity_vs_outage(composite, q)).collect::<Result<Vec<_>>>()?;
    let outage_capacity = q_grid.iter().zip(&capacity).map(|(q, c)| (1.0 - q) * c).collect();
    Ok(OutageCurve { q: q_grid.to_vec(), capacity, outage_capacity })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BestOutage {
    pub q: f64,
    pub rate: f64,
}

/// Maximizes the outage capacity `(1 - q) C_q` over `q`.
///
/// For discrete composites `C_q` is a step function and the maximum sits at
/// one of the tail masses, which are enumerated exactly. For densities the
/// curve is continuous but not concave in general: a coarse scan brackets
/// the best point and golden section refines it.
pub fn best_outage_rate(composite: &Composite) -> Result<BestOutage> {
    match composite {
        Composite::Discrete(d) => {
            let family = d.family();
            let sorted = d.by_noise();
            let mut best = BestOutage { q: 0.0, rate: f64::NEG_INFINITY };
            let mut tail: f64 = 0.0;
            for (s, w) in sorted.iter().rev() {
                if *w > 0.0 {
                    let q = tail.clamp(0.0, 1.0);
                    let rate = (1.0 - q) * state_capacity(family, s.noise());
                    if rate > best.rate {
                        best = BestOutage { q, rate };
                    }
                }
                tail += w;
            }
            Ok(best)
        }
        Composite::Continuous(c) => {
            if let DensityShape::PointMass(p0) = c.shape() {
                return Ok(BestOutage { q: 0.0, rate: 1.0 - h(p0) });
            }
            let objective = |q: f64| (1.0 - q) * (1.0 - h(c.quantile(1.0 - q)));
            let (q, rate) = grid_golden_max(objective, 0.0, 1.0 - 1e-9, OUTAGE_SCAN_POINTS, 1e-10);
            Ok(BestOutage { q, rate })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacityBounds {
    /// `sup_q (1 - q) C_q`.
    pub lower: f64,
    /// Average state capacity.
    pub upper: f64,
    pub best_q: f64,
}

/// Lower and upper bounds on the expected capacity. The upper bound is the
/// average of the state capacities, which is the general bound evaluated
/// at the uniform input (optimal for every BSC and BEC state).
pub fn expected_capacity_bounds(composite: &Composite) -> Result<CapacityBounds> {
    let best = best_outage_rate(composite)?;
    let upper = average_state_capacity(composite);
    Ok(CapacityBounds { lower: best.rate, upper, best_q: best.q })
}

pub fn average_state_capacity(composite: &Composite) -> f64 {
    match composite {
        Composite::Discrete(d) => d.states().iter().zip(d.pmf()).map(|(s, w)| w * s.capacity()).sum(),
        Composite::Continuous(c) => c.expect(|p| 1.0 - h(p)),
    }
}

/// Capacity versus outage computed as the Shannon capacity of the
/// probability-`q` compatible subchannel: drop the noisiest states of total
/// mass at most `q` and keep the rest.
pub fn subchannel_capacity(composite: &Composite, q: f64) -> Result<f64> {
    check_outage_level(q)?;
    let sub: Composite = match composite {
        Composite::Discrete(d) => drop_worst_states(d, q)?.into(),
        Composite::Continuous(c) => {
            if c.point_mass_at().is_some() {
                c.clone().into()
            } else {
                let cut = smallest_cut_with_tail_at_most(c, q);
                c.truncate_above(cut)?.into()
            }
        }
    };
    shannon_capacity(&sub)
}

fn drop_worst_states(d: &DiscreteComposite, q: f64) -> Result<DiscreteComposite> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d.states()[b].noise().total_cmp(&d.states()[a].noise()));
    let mut removed = 0.0;
    let mut keep = vec![true; d.len()];
    for &i in &order {
        let w = d.pmf()[i];
        if removed + w <= q + MASS_TOL {
            removed += w;
            keep[i] = false;
        } else {
            break;
        }
    }
    let kept_mass: f64 = (0..d.len()).filter(|&i| keep[i]).map(|i| d.pmf()[i]).sum();
    let states: Vec<ChannelState> = (0..d.len()).filter(|&i| keep[i]).map(|i| d.states()[i]).collect();
    let pmf: Vec<f64> = (0..d.len()).filter(|&i| keep[i]).map(|i| d.pmf()[i] / kept_mass).collect();
    DiscreteComposite::new(states, pmf)
}

fn smallest_cut_with_tail_at_most(c: &ContinuousBscComposite, q: f64) -> f64 {
    let (mut lo, mut hi) = (c.support_inf(), c.support_sup());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if 1.0 - c.cdf(mid) <= q {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Dvoretzky-Kiefer-Wolfowitz half-width: `sup |F_m - F| <= eps` with
/// probability at least `1 - delta` for `m` i.i.d. samples.
pub fn dkw_epsilon(m: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * m as f64)).sqrt()
}
