//! The simulated experimental oracle: the only access the tester has to the
//! gates. Each query prepares `|w⟩⟨w|`, runs the equation's word, measures
//! once in the computational basis and reports whether the outcome was `v`.
//!
//! Outcomes come from ChaCha8 (`rand_chacha` 0.9.0) seeded with
//! `seed_from_u64`. Per-equation substreams use the seed
//! `master ⊕ splitmix64(index)`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::Channel;
use crate::equations::{ExperimentalEquation, Step};
use crate::error::{Error, Result};
use crate::qstate::BitString;

/// The splitmix64 finalizer, used to derive substream seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

type CacheKey = (Vec<Step>, BitString, BitString);

pub struct Oracle {
    gates: Vec<Channel>,
    seed: u64,
    rng: ChaCha8Rng,
    query_count: u64,
    cache: HashMap<CacheKey, f64>,
}

impl Oracle {
    /// Fails unless every gate is completely positive and trace preserving.
    pub fn new(gates: Vec<Channel>, seed: u64) -> Result<Self> {
        if gates.is_empty() {
            return Err(Error::Spec("an oracle needs at least one gate".into()));
        }
        for g in &gates {
            g.ensure_cptp()?;
        }
        Ok(Self {
            gates,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            query_count: 0,
            cache: HashMap::new(),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn arity(&self) -> usize {
        self.gates.len()
    }

    /// Qubit count of each hidden gate.
    pub fn gate_qubits(&self) -> Vec<usize> {
        self.gates.iter().map(Channel::qubits).collect()
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    fn probability(&mut self, eq: &ExperimentalEquation) -> Result<f64> {
        let key = (eq.program().to_vec(), eq.input().clone(), eq.outcome().clone());
        if let Some(&p) = self.cache.get(&key) {
            return Ok(p);
        }
        let p = eq.probability_term(&self.gates)?.clamp(0.0, 1.0);
        self.cache.insert(key, p);
        Ok(p)
    }

    /// One experiment: 1 if the measured outcome equals the equation's `v`.
    pub fn query(&mut self, eq: &ExperimentalEquation) -> Result<u8> {
        let p = self.probability(eq)?;
        self.query_count += 1;
        Ok(u8::from(self.rng.random::<f64>() < p))
    }

    /// Mean of `samples` queries from the oracle's main stream.
    pub fn estimate(&mut self, eq: &ExperimentalEquation, samples: u64) -> Result<f64> {
        if samples == 0 {
            return Err(Error::Domain("estimate needs at least one sample".into()));
        }
        let p = self.probability(eq)?;
        let hits = (0..samples).filter(|_| self.rng.random::<f64>() < p).count();
        self.query_count += samples;
        Ok(hits as f64 / samples as f64)
    }

    /// Like [`Oracle::estimate`], but drawing from the substream of `index`,
    /// so the result does not depend on what was queried before.
    pub fn estimate_substream(
        &mut self,
        eq: &ExperimentalEquation,
        index: u64,
        samples: u64,
    ) -> Result<f64> {
        if samples == 0 {
            return Err(Error::Domain("estimate needs at least one sample".into()));
        }
        let p = self.probability(eq)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ splitmix64(index));
        let hits = (0..samples).filter(|_| rng.random::<f64>() < p).count();
        self.query_count += samples;
        Ok(hits as f64 / samples as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{hadamard, measurement, transpose};
    use crate::equations::Constant;

    fn eq(k: u64, b: u8) -> ExperimentalEquation {
        ExperimentalEquation::one_qubit(1, vec![Step::whole(0, k)], b, 0, Constant::ratio(1, 2)).unwrap()
    }

    #[test]
    fn rejects_non_channels() {
        assert!(matches!(
            Oracle::new(vec![transpose()], 1),
            Err(Error::NotCompletelyPositive { .. })
        ));
        let leaky = hadamard(0.0).mix(&crate::channel::Channel::zero(1).unwrap(), 0.1).unwrap();
        assert!(matches!(Oracle::new(vec![leaky], 1), Err(Error::NotTracePreserving { .. })));
    }

    #[test]
    fn determinism_and_counting() {
        let mut a = Oracle::new(vec![hadamard(0.0)], 42).unwrap();
        let mut b = Oracle::new(vec![hadamard(0.0)], 42).unwrap();
        let e = eq(1, 0);
        let sa: Vec<u8> = (0..100).map(|_| a.query(&e).unwrap()).collect();
        let sb: Vec<u8> = (0..100).map(|_| b.query(&e).unwrap()).collect();
        assert_eq!(sa, sb);
        assert_eq!(a.query_count(), 100);
        let x = a.estimate(&e, 1000).unwrap();
        assert_eq!(a.query_count(), 1100);
        let mut c = Oracle::new(vec![hadamard(0.0)], 42).unwrap();
        for _ in 0..100 {
            c.query(&e).unwrap();
        }
        assert_eq!(c.estimate(&e, 1000).unwrap(), x);
    }

    #[test]
    fn deterministic_outcomes() {
        let mut o = Oracle::new(vec![hadamard(0.7)], 3).unwrap();
        assert!((0..200).all(|_| o.query(&eq(2, 0)).unwrap() == 1));
        assert!((0..200).all(|_| o.query(&eq(2, 1)).unwrap() == 0));
        assert_eq!(o.estimate(&eq(2, 0), 77).unwrap(), 1.0);
        assert_eq!(o.estimate(&eq(2, 1), 77).unwrap(), 0.0);
    }

    #[test]
    fn fair_coin_band() {
        let mut o = Oracle::new(vec![hadamard(0.0)], 9).unwrap();
        let mean = o.estimate(&eq(1, 0), 100_000).unwrap();
        assert!((0.494..=0.506).contains(&mean), "{mean}");
        let mean = o.estimate(&eq(1, 0), 10_000).unwrap();
        assert!((mean - 0.5).abs() <= 0.02);
    }

    #[test]
    fn substreams_are_order_independent() {
        let e0 = eq(1, 0);
        let e1 = eq(1, 1);
        let mut a = Oracle::new(vec![measurement(1).unwrap().mix(&hadamard(0.0), 0.5).unwrap()], 5).unwrap();
        let mut b = Oracle::new(vec![measurement(1).unwrap().mix(&hadamard(0.0), 0.5).unwrap()], 5).unwrap();
        let a0 = a.estimate_substream(&e0, 0, 500).unwrap();
        let a1 = a.estimate_substream(&e1, 1, 500).unwrap();
        let b1 = b.estimate_substream(&e1, 1, 500).unwrap();
        let b0 = b.estimate_substream(&e0, 0, 500).unwrap();
        assert_eq!((a0, a1), (b0, b1));
        assert_eq!(a.query_count(), 1000);
    }
}
