use crate::channel::composite::DiscreteComposite;
use crate::channel::entropy::h;
use crate::channel::state::ChannelState;
use crate::error::{check_probability, domain, Error, Result};

/// Two-state Markov chain of BSCs.
///
/// `g` is the probability of moving from the bad to the good state and `b`
/// from good to bad, so the stationary law is `(g, b) / (g + b)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GilbertElliott {
    p_good: f64,
    p_bad: f64,
    g: f64,
    b: f64,
    pi_good: f64,
}

impl GilbertElliott {
    pub fn new(p_good: f64, p_bad: f64, g: f64, b: f64, pi_good: f64) -> Result<Self> {
        for (name, v) in [("p_good", p_good), ("p_bad", p_bad), ("g", g), ("b", b), ("pi_good", pi_good)] {
            check_probability(name, v)?;
        }
        if !(p_good < p_bad && p_bad <= 0.5) {
            return domain(format!("need 0 <= p_good < p_bad <= 1/2, got {p_good}, {p_bad}"));
        }
        Ok(Self { p_good, p_bad, g, b, pi_good })
    }

    /// Non-ergodic variant: the state is drawn once and never changes.
    pub fn frozen(p_good: f64, p_bad: f64, pi_good: f64) -> Result<Self> {
        Self::new(p_good, p_bad, 0.0, 0.0, pi_good)
    }

    pub fn p_good(&self) -> f64 {
        self.p_good
    }

    pub fn p_bad(&self) -> f64 {
        self.p_bad
    }

    pub fn pi_good(&self) -> f64 {
        self.pi_good
    }

    pub fn pi_bad(&self) -> f64 {
        1.0 - self.pi_good
    }

    pub fn is_ergodic(&self) -> bool {
        self.g > 0.0 && self.b > 0.0
    }

    pub fn stationary(&self) -> Option<(f64, f64)> {
        let s = self.g + self.b;
        (s > 0.0).then(|| (self.g / s, self.b / s))
    }

    /// One step of the state chain applied to a distribution `(good, bad)`.
    pub fn step(&self, dist: (f64, f64)) -> (f64, f64) {
        let good = dist.0 * (1.0 - self.b) + dist.1 * self.g;
        let bad = dist.0 * self.b + dist.1 * (1.0 - self.g);
        (good, bad)
    }

    pub fn good_capacity(&self) -> f64 {
        1.0 - h(self.p_good)
    }

    pub fn bad_capacity(&self) -> f64 {
        1.0 - h(self.p_bad)
    }

    /// Capacity of the ergodic chain with receiver state knowledge: the
    /// stationary average of the two BSC capacities.
    pub fn ergodic_capacity(&self) -> Result<f64> {
        if !self.is_ergodic() {
            return Err(Error::Unsupported("chain is not ergodic".into()));
        }
        let (pg, pb) = self.stationary().expect("g + b > 0");
        Ok(pg * self.good_capacity() + pb * self.bad_capacity())
    }

    /// The frozen chain as a two-state composite.
    pub fn to_composite(&self) -> Result<DiscreteComposite> {
        if self.g != 0.0 || self.b != 0.0 {
            return Err(Error::Unsupported("only the frozen chain (g = b = 0) is a composite of BSCs".into()));
        }
        DiscreteComposite::new(
            vec![ChannelState::bsc(self.p_good)?, ChannelState::bsc(self.p_bad)?],
            vec![self.pi_good, self.pi_bad()],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_law_is_fixed() {
        for (g, b) in [(0.1, 0.3), (0.9, 0.05), (0.5, 0.5), (1.0, 1.0)] {
            let ge = GilbertElliott::new(0.01, 0.2, g, b, g / (g + b)).unwrap();
            let pi = ge.stationary().unwrap();
            let next = ge.step(pi);
            assert!((next.0 - pi.0).abs() < 1e-15 && (next.1 - pi.1).abs() < 1e-15);
            assert!((pi.0 - ge.pi_good()).abs() < 1e-15);
        }
    }

    #[test]
    fn frozen_chain_composite() {
        let ge = GilbertElliott::frozen(0.05, 0.3, 0.7).unwrap();
        assert!(!ge.is_ergodic());
        let c = ge.to_composite().unwrap();
        assert_eq!(c.pmf(), &[0.7, 1.0 - 0.7]);
        assert!(GilbertElliott::new(0.05, 0.3, 0.1, 0.1, 0.5).unwrap().to_composite().is_err());
    }

    #[test]
    fn rejects_misordered_states() {
        assert!(GilbertElliott::frozen(0.3, 0.3, 0.5).is_err());
        assert!(GilbertElliott::frozen(0.3, 0.1, 0.5).is_err());
        assert!(GilbertElliott::frozen(0.1, 0.6, 0.5).is_err());
    }

    #[test]
    fn ergodic_capacity_is_average() {
        let ge = GilbertElliott::new(0.0, 0.5, 0.2, 0.2, 0.5).unwrap();
        assert!((ge.ergodic_capacity().unwrap() - 0.5).abs() < 1e-15);
    }
}
