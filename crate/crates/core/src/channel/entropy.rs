use crate::error::{check_probability, Result};

/// Arguments of `log` are kept inside `[CLAMP_EPS, 1 - CLAMP_EPS]` wherever a
/// derivative of the binary entropy would blow up.
pub const CLAMP_EPS: f64 = 1e-12;

/// Binary entropy in bits, `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_probability("p", p)?;
    Ok(h(p))
}

/// Unchecked binary entropy for inner loops. Arguments outside `[0, 1]`
/// are a caller bug.
#[inline]
pub fn h(p: f64) -> f64 {
    debug_assert!((-1e-15..=1.0 + 1e-15).contains(&p), "h({p})");
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// `h'(x) = log2((1 - x) / x)`, with `x` clamped away from 0 and 1.
#[inline]
pub fn h_prime(x: f64) -> f64 {
    let x = x.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS);
    ((1.0 - x) / x).log2()
}

/// Crossover of two cascaded BSCs: `a(1-b) + (1-a)b`.
pub fn star(a: f64, b: f64) -> Result<f64> {
    check_probability("a", a)?;
    check_probability("b", b)?;
    Ok(conv(a, b))
}

/// Unchecked [`star`].
#[inline]
pub fn conv(a: f64, b: f64) -> f64 {
    // 1/2 is absorbing; the polynomial form rounds away from it
    if a == 0.5 || b == 0.5 {
        return 0.5;
    }
    a + b - 2.0 * a * b
}

pub fn bsc_capacity(p: f64) -> Result<f64> {
    check_probability("crossover", p)?;
    Ok(1.0 - h(p))
}

pub fn bec_capacity(alpha: f64) -> Result<f64> {
    check_probability("erasure", alpha)?;
    Ok(1.0 - alpha)
}
