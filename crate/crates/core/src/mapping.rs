//! Bit-level correspondence between broadcast codes and expected-rate
//! codes.
//!
//! A broadcast code over a state set `S` carries one message per nonempty
//! subset `p` of states, at rate `R_p`, meant for every state in `p`. An
//! expected-rate code sends `nR_t` bits and lets state `s` recover the bits
//! indexed by `I_s`. Concatenating the subset messages gives the second
//! from the first; grouping bit indices by which states recover them gives
//! the first back.
//!
//! Bit indices are 0-based and blocks are half-open.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use crate::error::{check_probability, domain, Error, Result};

/// States are numbered from 0 and stored as bits of a mask.
pub const MAX_STATES: usize = 64;

/// Slack added before flooring `n R_p`, so rates such as `0.3` at `n = 20`
/// give 6 bits despite binary rounding.
pub const FLOOR_SLACK: f64 = 1e-9;

/// A nonempty subset of states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StateSet(u64);

impl StateSet {
    pub fn new(states: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &s in states {
            if s >= MAX_STATES {
                return domain(format!("state {s} beyond the {MAX_STATES}-state limit"));
            }
            mask |= 1 << s;
        }
        Self::from_mask(mask)
    }

    pub fn from_mask(mask: u64) -> Result<Self> {
        if mask == 0 {
            return domain("state subsets must be nonempty");
        }
        Ok(Self(mask))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn contains(self, s: usize) -> bool {
        s < MAX_STATES && self.0 >> s & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn members(self) -> Vec<usize> {
        (0..MAX_STATES).filter(|&s| self.contains(s)).collect()
    }

    fn max_state(self) -> usize {
        63 - self.0.leading_zeros() as usize
    }
}

/// Larger subsets first, then lexicographic by member list, so common
/// messages take the lowest bit indices.
impl Ord for StateSet {
    fn cmp(&self, other: &Self) -> Ordering {
        other.len().cmp(&self.len()).then_with(|| self.members().cmp(&other.members()))
    }
}

impl PartialOrd for StateSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<String> = self.members().iter().map(|s| s.to_string()).collect();
        write!(f, "{{{}}}", m.join(","))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BroadcastCodeSpec {
    pub num_states: usize,
    pub n: usize,
    /// Rate of the message for each subset; absent subsets carry nothing.
    pub rates: BTreeMap<StateSet, f64>,
}

impl BroadcastCodeSpec {
    pub fn new(num_states: usize, n: usize, rates: BTreeMap<StateSet, f64>) -> Result<Self> {
        if num_states == 0 || num_states > MAX_STATES {
            return domain(format!("need 1..={MAX_STATES} states, got {num_states}"));
        }
        if n == 0 {
            return domain("blocklength must be positive");
        }
        for (p, &r) in &rates {
            if p.max_state() >= num_states {
                return domain(format!("subset {p} names a state beyond {}", num_states - 1));
            }
            if !(r >= 0.0 && r.is_finite()) {
                return domain(format!("rate {r} for subset {p} must be finite and nonnegative"));
            }
        }
        Ok(Self { num_states, n, rates })
    }

    /// Message sizes `floor(n R_p)` in bits.
    pub fn bits(&self) -> BTreeMap<StateSet, usize> {
        self.rates.iter().map(|(&p, &r)| (p, (self.n as f64 * r + FLOOR_SLACK).floor() as usize)).collect()
    }

    /// Rate given up per subset by flooring `n R_p`.
    pub fn rounding_deficit(&self) -> BTreeMap<StateSet, f64> {
        let bits = self.bits();
        self.rates.iter().map(|(p, &r)| (*p, (r - bits[p] as f64 / self.n as f64).max(0.0))).collect()
    }

    /// `sum_p R_p sum_{s in p} P(s)` with the floored rates.
    pub fn expected_rate(&self, pmf: &[f64]) -> Result<f64> {
        check_pmf(pmf, self.num_states)?;
        Ok(self
            .bits()
            .iter()
            .map(|(p, &b)| b as f64 / self.n as f64 * p.members().iter().map(|&s| pmf[s]).sum::<f64>())
            .sum())
    }
}

fn check_pmf(pmf: &[f64], num_states: usize) -> Result<()> {
    if pmf.len() != num_states {
        return domain(format!("pmf has {} entries for {num_states} states", pmf.len()));
    }
    for &w in pmf {
        check_probability("pmf entry", w)?;
    }
    if (pmf.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return domain("pmf must sum to one");
    }
    Ok(())
}

/// Bit indices of an expected-rate code: all of `I_t`, the block of each
/// subset message, and what each state recovers.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSets {
    pub n: usize,
    pub total: usize,
    /// Subset blocks in canonical subset order, each sorted.
    pub subsets: Vec<(StateSet, Vec<usize>)>,
    /// `I_s`, sorted.
    pub states: Vec<Vec<usize>>,
}

impl IndexSets {
    /// Checks that the subset blocks partition `I_t` and that every `I_s`
    /// is the union of the blocks of subsets containing `s`.
    pub fn verify(&self) -> Result<()> {
        let mut owner = vec![None::<StateSet>; self.total];
        for (p, block) in &self.subsets {
            for &i in block {
                let slot =
                    owner.get_mut(i).ok_or_else(|| Error::Structural(format!("index {i} of {p} outside I_t")))?;
                if let Some(q) = slot {
                    return Err(Error::Structural(format!("index {i} in both {q} and {p}")));
                }
                *slot = Some(*p);
            }
        }
        if let Some(i) = owner.iter().position(Option::is_none) {
            return Err(Error::Structural(format!("index {i} of I_t belongs to no subset")));
        }
        for (s, set) in self.states.iter().enumerate() {
            let want: Vec<usize> = (0..self.total).filter(|&i| owner[i].is_some_and(|p| p.contains(s))).collect();
            if *set != want {
                return Err(Error::Structural(format!("I_{s} is not the union of its subset blocks")));
            }
        }
        Ok(())
    }

    /// JSON-like listing with indices grouped into half-open runs.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{{");
        let _ = writeln!(out, "  \"n\": {},", self.n);
        let _ = writeln!(out, "  \"I_t\": {},", runs(&(0..self.total).collect::<Vec<_>>()));
        let _ = writeln!(out, "  \"I_p\": {{");
        for (k, (p, block)) in self.subsets.iter().enumerate() {
            let comma = if k + 1 < self.subsets.len() { "," } else { "" };
            let _ = writeln!(out, "    \"{p}\": {}{comma}", runs(block));
        }
        let _ = writeln!(out, "  }},");
        let _ = writeln!(out, "  \"I_s\": {{");
        for (s, set) in self.states.iter().enumerate() {
            let comma = if s + 1 < self.states.len() { "," } else { "" };
            let _ = writeln!(out, "    \"{s}\": {}{comma}", runs(set));
        }
        let _ = writeln!(out, "  }}");
        let _ = writeln!(out, "}}");
        out
    }
}

fn runs(idx: &[usize]) -> String {
    let mut parts = Vec::new();
    let mut k = 0;
    while k < idx.len() {
        let start = idx[k];
        let mut end = start + 1;
        while k + 1 < idx.len() && idx[k + 1] == end {
            k += 1;
            end += 1;
        }
        parts.push(format!("[{start}, {end})"));
        k += 1;
    }
    format!("[{}]", parts.join(", "))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedRateCodeSpec {
    pub n: usize,
    pub num_states: usize,
    /// `R_t = |I_t| / n`.
    pub total_rate: f64,
    /// `R_s = |I_s| / n`.
    pub state_rates: Vec<f64>,
    pub index_sets: IndexSets,
}

impl ExpectedRateCodeSpec {
    /// An expected-rate code given only by `|I_t|` and the sets `I_s`.
    /// Subset blocks are left empty until [`expected_to_bc`] derives them.
    pub fn from_state_sets(n: usize, total: usize, mut states: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return domain("blocklength must be positive");
        }
        if states.is_empty() || states.len() > MAX_STATES {
            return domain(format!("need 1..={MAX_STATES} states"));
        }
        for set in &mut states {
            set.sort_unstable();
            set.dedup();
        }
        let state_rates = states.iter().map(|s| s.len() as f64 / n as f64).collect();
        Ok(Self {
            n,
            num_states: states.len(),
            total_rate: total as f64 / n as f64,
            state_rates,
            index_sets: IndexSets { n, total, subsets: Vec::new(), states },
        })
    }

    /// `sum_s P(s) R_s`.
    pub fn expected_rate(&self, pmf: &[f64]) -> Result<f64> {
        check_pmf(pmf, self.num_states)?;
        Ok(pmf.iter().zip(&self.state_rates).map(|(w, r)| w * r).sum())
    }
}

/// Lays the subset messages side by side in canonical subset order; state
/// `s` recovers the blocks of every subset that contains it.
pub fn bc_to_expected(spec: &BroadcastCodeSpec) -> Result<ExpectedRateCodeSpec> {
    let mut subsets = Vec::new();
    let mut next = 0;
    for (p, b) in spec.bits() {
        if b == 0 {
            continue;
        }
        subsets.push((p, (next..next + b).collect::<Vec<usize>>()));
        next += b;
    }
    let states: Vec<Vec<usize>> = (0..spec.num_states)
        .map(|s| {
            let mut set: Vec<usize> =
                subsets.iter().filter(|(p, _)| p.contains(s)).flat_map(|(_, b)| b.iter().copied()).collect();
            set.sort_unstable();
            set
        })
        .collect();
    let n = spec.n;
    let index_sets = IndexSets { n, total: next, subsets, states };
    index_sets.verify()?;
    Ok(ExpectedRateCodeSpec {
        n,
        num_states: spec.num_states,
        total_rate: next as f64 / n as f64,
        state_rates: index_sets.states.iter().map(|s| s.len() as f64 / n as f64).collect(),
        index_sets,
    })
}

/// Recovers subset messages from the state index sets: `I_p` holds the
/// indices recovered by exactly the states in `p`. Fails when some index of
/// `I_t` is recovered by no state or a state names an index outside `I_t`.
pub fn expected_to_bc(spec: &ExpectedRateCodeSpec) -> Result<(BroadcastCodeSpec, IndexSets)> {
    let sets = &spec.index_sets;
    let mut membership = vec![0u64; sets.total];
    for (s, set) in sets.states.iter().enumerate() {
        for &i in set {
            let slot =
                membership.get_mut(i).ok_or_else(|| Error::Structural(format!("I_{s} names index {i} outside I_t")))?;
            *slot |= 1 << s;
        }
    }
    let mut blocks: BTreeMap<StateSet, Vec<usize>> = BTreeMap::new();
    for (i, &m) in membership.iter().enumerate() {
        let p = StateSet::from_mask(m)
            .map_err(|_| Error::Structural(format!("index {i} of I_t is recovered by no state")))?;
        blocks.entry(p).or_default().push(i);
    }
    let derived =
        IndexSets { n: sets.n, total: sets.total, subsets: blocks.into_iter().collect(), states: sets.states.clone() };
    derived.verify()?;
    let rates = derived.subsets.iter().map(|(p, b)| (*p, b.len() as f64 / sets.n as f64)).collect();
    let bc = BroadcastCodeSpec::new(spec.num_states, sets.n, rates)?;
    // per-state accounting: |I_s| = sum over subsets containing s
    let bits = bc.bits();
    for (s, set) in sets.states.iter().enumerate() {
        let sum: usize = bits.iter().filter(|(p, _)| p.contains(s)).map(|(_, b)| b).sum();
        if sum != set.len() {
            return Err(Error::Structural(format!("rate accounting fails for state {s}")));
        }
    }
    Ok((bc, derived))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(s: &[usize]) -> StateSet {
        StateSet::new(s).unwrap()
    }

    #[test]
    fn canonical_order() {
        let mut v = [set(&[1]), set(&[0, 2]), set(&[0]), set(&[0, 1, 2]), set(&[0, 1])];
        v.sort();
        let shown: Vec<String> = v.iter().map(|p| p.to_string()).collect();
        assert_eq!(shown, ["{0,1,2}", "{0,1}", "{0,2}", "{0}", "{1}"]);
        assert!(StateSet::new(&[]).is_err());
        assert!(StateSet::new(&[64]).is_err());
    }

    #[test]
    fn two_state_example() {
        // R_{both} = 0.3, R_{second} = 0.2 at n = 20
        let rates = BTreeMap::from([(set(&[0, 1]), 0.3), (set(&[1]), 0.2)]);
        let bc = BroadcastCodeSpec::new(2, 20, rates).unwrap();
        let e = bc_to_expected(&bc).unwrap();
        assert_eq!(e.index_sets.total, 10);
        assert_eq!(e.index_sets.states[0], (0..6).collect::<Vec<_>>());
        assert_eq!(e.index_sets.states[1], (0..10).collect::<Vec<_>>());
        assert_eq!(e.state_rates, vec![0.3, 0.5]);
        assert_eq!(e.total_rate, 0.5);
        let (back, _) = expected_to_bc(&e).unwrap();
        assert_eq!(back.rates, bc.rates);
    }

    #[test]
    fn common_only_and_empty() {
        let bc = BroadcastCodeSpec::new(3, 10, BTreeMap::from([(set(&[0, 1, 2]), 0.5)])).unwrap();
        let e = bc_to_expected(&bc).unwrap();
        assert!(e.index_sets.states.iter().all(|s| s.len() == 5));
        let empty = bc_to_expected(&BroadcastCodeSpec::new(2, 10, BTreeMap::new()).unwrap()).unwrap();
        assert_eq!(empty.total_rate, 0.0);
        assert_eq!(empty.state_rates, vec![0.0, 0.0]);
    }

    #[test]
    fn rounding_is_reported() {
        let bc = BroadcastCodeSpec::new(2, 7, BTreeMap::from([(set(&[0]), 0.5), (set(&[0, 1]), 0.3)])).unwrap();
        assert_eq!(bc.bits()[&set(&[0])], 3);
        assert_eq!(bc.bits()[&set(&[0, 1])], 2);
        let d = bc.rounding_deficit();
        assert!((d[&set(&[0])] - (0.5 - 3.0 / 7.0)).abs() < 1e-15);
        assert!(d.values().all(|&x| x < 1.0 / 7.0));
    }

    #[test]
    fn nested_and_disjoint_patterns() {
        let nested = ExpectedRateCodeSpec::from_state_sets(10, 8, vec![(0..3).collect(), (0..8).collect()]).unwrap();
        let (bc, _) = expected_to_bc(&nested).unwrap();
        let keys: Vec<StateSet> = bc.rates.keys().copied().collect();
        assert_eq!(keys, vec![set(&[0, 1]), set(&[1])]);
        assert_eq!(bc.bits()[&set(&[0, 1])], 3);

        let disjoint = ExpectedRateCodeSpec::from_state_sets(10, 8, vec![(0..3).collect(), (3..8).collect()]).unwrap();
        let (bc, _) = expected_to_bc(&disjoint).unwrap();
        assert!(bc.rates.keys().all(|p| p.len() == 1));
    }

    #[test]
    fn inconsistent_sets_are_structural_errors() {
        let uncovered = ExpectedRateCodeSpec::from_state_sets(10, 5, vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert!(matches!(expected_to_bc(&uncovered), Err(Error::Structural(_))));
        let outside = ExpectedRateCodeSpec::from_state_sets(10, 2, vec![vec![0, 1], vec![1, 7]]).unwrap();
        assert!(matches!(expected_to_bc(&outside), Err(Error::Structural(_))));
    }

    #[test]
    fn verify_catches_overlap() {
        let bad = IndexSets {
            n: 4,
            total: 2,
            subsets: vec![(set(&[0]), vec![0, 1]), (set(&[1]), vec![1])],
            states: vec![vec![0, 1], vec![1]],
        };
        assert!(bad.verify().is_err());
    }

    #[test]
    fn dump_shape() {
        let bc = BroadcastCodeSpec::new(2, 20, BTreeMap::from([(set(&[0, 1]), 0.3), (set(&[1]), 0.2)])).unwrap();
        let text = bc_to_expected(&bc).unwrap().index_sets.dump();
        assert!(text.contains("\"I_t\": [[0, 10)]"));
        assert!(text.contains("\"{0,1}\": [[0, 6)]"));
        assert!(text.contains("\"0\": [[0, 6)]"));
    }

    fn spec_strategy() -> impl Strategy<Value = (BroadcastCodeSpec, Vec<f64>)> {
        (1usize..=5, 1usize..=40).prop_flat_map(|(k, n)| {
            let subsets = (1u64 << k) - 1;
            (proptest::collection::vec((1..=subsets, 0..=n), 0..8), proptest::collection::vec(0.01f64..1.0, k))
                .prop_map(move |(entries, raw)| {
                    let rates = entries
                        .into_iter()
                        .map(|(m, b)| (StateSet::from_mask(m).unwrap(), b as f64 / n as f64))
                        .collect();
                    let total: f64 = raw.iter().sum();
                    (BroadcastCodeSpec::new(k, n, rates).unwrap(), raw.iter().map(|x| x / total).collect())
                })
        })
    }

    proptest! {
        #[test]
        fn round_trip_and_accounting((bc, pmf) in spec_strategy()) {
            let e = bc_to_expected(&bc).unwrap();
            e.index_sets.verify().unwrap();
            let bits = bc.bits();
            prop_assert_eq!(e.index_sets.total, bits.values().sum::<usize>());
            for s in 0..bc.num_states {
                let want: usize = bits.iter().filter(|(p, _)| p.contains(s)).map(|(_, b)| b).sum();
                prop_assert_eq!(e.index_sets.states[s].len(), want);
            }
            let (back, derived) = expected_to_bc(&e).unwrap();
            let nonzero: BTreeMap<StateSet, usize> = bits.into_iter().filter(|(_, b)| *b > 0).collect();
            prop_assert_eq!(back.bits(), nonzero);
            prop_assert_eq!(&derived.subsets, &e.index_sets.subsets);
            let a = e.expected_rate(&pmf).unwrap();
            let b = bc.expected_rate(&pmf).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
