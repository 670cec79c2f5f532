//! Two-user erasure broadcast channel.

use crate::channel::h;
use crate::error::{check_probability, domain, Result};

fn check_pair(alpha1: f64, alpha2: f64) -> Result<()> {
    check_probability("alpha1", alpha1)?;
    check_probability("alpha2", alpha2)?;
    if alpha1 >= alpha2 {
        return domain(format!("need alpha1 < alpha2, got {alpha1}, {alpha2}"));
    }
    Ok(())
}

/// Boundary point `(R1, R12)` of the degraded BEC broadcast region for
/// auxiliary crossover `p_aux`: `R1` is private to the better user, `R12`
/// is common.
pub fn bec_bc_region(alpha1: f64, alpha2: f64, p_aux: f64) -> Result<(f64, f64)> {
    check_pair(alpha1, alpha2)?;
    if !(0.0..=0.5).contains(&p_aux) {
        return domain(format!("auxiliary crossover {p_aux} outside [0, 1/2]"));
    }
    let hp = h(p_aux);
    Ok(((1.0 - alpha1) * hp, (1.0 - alpha2) * (1.0 - hp)))
}

/// Best expected rate `R12 + w1 R1` of a broadcast code when the better
/// state occurs with probability `w1`. The objective is linear in
/// `h(p_aux)`, so the best point is an endpoint of the region.
pub fn bec_bc_expected_rate_weighted(alpha1: f64, alpha2: f64, w1: f64) -> Result<f64> {
    check_pair(alpha1, alpha2)?;
    check_probability("w1", w1)?;
    Ok((1.0 - alpha2).max(w1 * (1.0 - alpha1)))
}

/// [`bec_bc_expected_rate_weighted`] for equiprobable states.
pub fn bec_bc_expected_rate(alpha1: f64, alpha2: f64) -> Result<f64> {
    bec_bc_expected_rate_weighted(alpha1, alpha2, 0.5)
}

/// Sending raw bits: each state keeps its unerased fraction.
pub fn uncoded_bec_expected_rate(alpha1: f64, alpha2: f64, w1: f64) -> Result<f64> {
    check_probability("alpha1", alpha1)?;
    check_probability("alpha2", alpha2)?;
    check_probability("w1", w1)?;
    Ok(w1 * (1.0 - alpha1) + (1.0 - w1) * (1.0 - alpha2))
}
