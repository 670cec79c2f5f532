//! Two-state (Gilbert-Elliott) expected capacity.

use super::atanh_ratio;
use crate::channel::{conv, h};
use crate::error::{check_probability, domain, Result};
use crate::numeric::{bisect, grid_golden_max};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeRegime {
    /// `r* = 0`: a single layer decodable in both states.
    Common,
    Interior,
    /// `r* = 1/2`: everything is sent at the good-state rate.
    GoodOnly,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeExpected {
    pub capacity: f64,
    /// Auxiliary crossover of the common layer.
    pub r: f64,
    pub regime: GeRegime,
    /// Direct maximization of the same objective, kept for comparison.
    pub search_r: f64,
    pub search_capacity: f64,
}

/// `1 - h(r * p_bad) + pi_good [h(r * p_good) - h(p_good)]`: the bad state
/// decodes the common layer, the good state decodes both.
pub fn ge_objective(p_good: f64, p_bad: f64, pi_good: f64, r: f64) -> f64 {
    1.0 - h(conv(r, p_bad)) + pi_good * (h(conv(r, p_good)) - h(p_good))
}

/// `f(a, b) = ln(1/a - 1) / ln(1/b - 1)` at `a = r * p_good`,
/// `b = r * p_bad`, written in terms of `1/2 - r` so it stays finite at
/// `r = 1/2`.
fn log_odds_ratio(r: f64, p_good: f64, p_bad: f64) -> f64 {
    let (a, b) = (1.0 - 2.0 * p_good, 1.0 - 2.0 * p_bad);
    let e2 = 2.0 * (0.5 - r);
    a * atanh_ratio(e2 * a) / (b * atanh_ratio(e2 * b))
}

fn log_odds(p: f64) -> f64 {
    (1.0 / p - 1.0).ln()
}

/// Expected capacity of the two-state BSC composite with crossovers
/// `p_good < p_bad` and `P(good) = pi_good`.
///
/// Setting the derivative of [`ge_objective`] to zero gives
/// `f(r*p_good, r*p_bad) = A / k` with `A = (1 - 2 p_bad) / (1 - 2 p_good)`
/// and `k = pi_good`. The left side decreases from `f(p_good, p_bad)` at
/// `r = 0` to `1/A` at `r = 1/2`, so the optimum is `r = 0` when
/// `k <= A f(p_bad, p_good)`, `r = 1/2` when `k >= A^2`, and the unique root
/// otherwise.
pub fn ge_expected_capacity(p_good: f64, p_bad: f64, pi_good: f64) -> Result<GeExpected> {
    check_probability("pi_good", pi_good)?;
    if !(0.0 <= p_good && p_good < p_bad && p_bad <= 0.5) {
        return domain(format!("need 0 <= p_good < p_bad <= 1/2, got {p_good}, {p_bad}"));
    }
    let objective = |r: f64| ge_objective(p_good, p_bad, pi_good, r);
    let (search_r, search_capacity) = grid_golden_max(objective, 0.0, 0.5, 257, 1e-12);
    let done = |capacity, r, regime| GeExpected { capacity, r, regime, search_r, search_capacity };

    if pi_good == 0.0 {
        return Ok(done(1.0 - h(p_bad), 0.0, GeRegime::Common));
    }
    if pi_good == 1.0 {
        return Ok(done(1.0 - h(p_good), 0.5, GeRegime::GoodOnly));
    }
    let a = (1.0 - 2.0 * p_bad) / (1.0 - 2.0 * p_good);
    let k = pi_good;
    if k >= a * a {
        return Ok(done(objective(0.5), 0.5, GeRegime::GoodOnly));
    }
    // f(p_bad, p_good); zero when p_good = 0 since ln(1/p - 1) is infinite
    let f_bad_good = if p_good == 0.0 { 0.0 } else { log_odds(p_bad) / log_odds(p_good) };
    if k <= a * f_bad_good {
        return Ok(done(objective(0.0), 0.0, GeRegime::Common));
    }
    let target = a / k;
    let r = bisect(|r| log_odds_ratio(r, p_good, p_bad) - target, 0.0, 0.5, 1e-15)
        .expect("sign change guaranteed by the regime tests");
    Ok(done(objective(r), r, GeRegime::Interior))
}
