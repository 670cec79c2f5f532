//! Expected capacity of BSC composites through broadcast layering.
//!
//! Every channel state is treated as one receiver of a degraded broadcast
//! channel. Superposition layers are parameterized by the crossovers of a
//! cascade of auxiliary BSCs, `0 = r_0 <= r_1 <= ... <= r_N = 1/2`, and a
//! state decodes every layer meant for itself or for noisier states.

mod bec;
mod discrete;
mod euler;
mod ge;
mod profile;

pub use bec::{bec_bc_expected_rate, bec_bc_expected_rate_weighted, bec_bc_region, uncoded_bec_expected_rate};
pub use discrete::{
    bergmans_rates, decodable_rates, discrete_expected_rate, optimize_composite, optimize_discrete, DiscreteLayering,
    RESIDUAL_TOL,
};
pub use euler::{euler_lhs, euler_residual, euler_rhs, find_cutoffs, solve_euler_r, CutoffPair, EulerRoot};
pub use ge::{ge_expected_capacity, ge_objective, GeExpected, GeRegime};
pub use profile::{
    expected_capacity_continuous, expected_rate, parametric_expected_rate, parametric_profile, parametric_sweep,
    rate_profile, solve_layering, ContinuousExpected, LayerProfile, ParametricFamily, ParametricSweep, RateProfile,
    DEFAULT_PROFILE_POINTS,
};

use std::f64::consts::LN_2;

/// `atanh(z) / z` for `z` in `[0, 1)`, accurate near zero. Values at or
/// above one are pulled just below it.
fn atanh_ratio(z: f64) -> f64 {
    if z < 1e-4 {
        let z2 = z * z;
        1.0 + z2 / 3.0 + z2 * z2 / 5.0
    } else {
        let z = z.min(1.0 - f64::EPSILON);
        z.atanh() / z
    }
}

/// `d/dx h(x * p)` divided by `1/2 - x`, in bits.
///
/// With `1/2 - x*p = (1/2 - x)(1 - 2p)` the derivative is
/// `(1 - 2p) * 2 atanh(2 (1/2 - x)(1 - 2p)) / ln 2`, which vanishes at
/// `x = 1/2`; dividing out the vanishing factor keeps the sign and the
/// relative size of two such slopes meaningful up to `x = 1/2`.
fn scaled_slope(x: f64, p: f64) -> f64 {
    let a = 1.0 - 2.0 * p;
    let z = 2.0 * (0.5 - x).max(0.0) * a;
    4.0 * a * a * atanh_ratio(z) / LN_2
}

/// `d/dx h(x * p)` in bits.
fn slope(x: f64, p: f64) -> f64 {
    (0.5 - x).max(0.0) * scaled_slope(x, p)
}
