//! The sampling self-tester. It sees the gates only through an [`Oracle`].

use num_rational::Rational64;
use serde::Serialize;

use crate::equations::EquationSet;
use crate::error::{Error, Result};
use crate::oracle::Oracle;

/// Largest total number of queries a plan may request.
pub const QUERY_LIMIT: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TesterPlan {
    pub eps: f64,
    pub d: usize,
    pub per_eq_samples: u64,
    pub total_queries: u64,
}

/// Samples per equation so that each estimate is within ε/6 with
/// probability at least `1 − 1/(3d)`: two-sided Hoeffding gives
/// `n ≥ 18·ln(6d)/ε²`.
pub fn plan_samples(d: usize, eps: f64) -> Result<TesterPlan> {
    if d == 0 {
        return Err(Error::Domain("the plan needs at least one equation".into()));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps = {eps} must lie in (0, 1]")));
    }
    let n = (18.0 * (6.0 * d as f64).ln() / (eps * eps)).ceil() as u64;
    Ok(TesterPlan {
        eps,
        d,
        per_eq_samples: n,
        total_queries: n.saturating_mul(d as u64),
    })
}

/// Smallest eps (to 1e-6) whose plan fits in `limit` queries.
fn required_eps(d: usize, limit: u64) -> f64 {
    let mut eps = (18.0 * (6.0 * d as f64).ln() * d as f64 / limit as f64).sqrt();
    eps = (eps * 1e6).ceil() / 1e6;
    while plan_samples(d, eps.min(1.0)).is_ok_and(|p| p.total_queries > limit) {
        eps += 1e-6;
    }
    eps
}

/// Denominator of the rounding grid: the smallest even `q ≥ 12/ε`.
fn grid_denominator(eps: f64) -> i64 {
    2 * (6.0 / eps).ceil() as i64
}

/// The nearest point of a grid of step at most ε/12 whose denominator is
/// even, so `½` is always represented exactly. `|r̃ − r| ≤ ε/24`.
pub fn round_constant(r: f64, eps: f64) -> Result<Rational64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("constant {r} outside [0, 1]")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps = {eps} must lie in (0, 1]")));
    }
    let q = grid_denominator(eps);
    let k = (r * q as f64).round() as i64;
    Ok(Rational64::new(k, q))
}

fn rational_value(q: &Rational64) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquationOutcome {
    pub index: usize,
    /// `p̃`, the sampled estimate of the probability term.
    pub estimate: f64,
    pub constant: f64,
    /// `r̃` as an exact fraction.
    pub rounded_constant: String,
    pub deviation: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Guarantee {
    /// Accepted radius `ε/(3k)`.
    pub delta1: f64,
    /// Rejected radius, when a robustness bound is known or supplied.
    pub delta2: Option<f64>,
    pub delta2_source: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TesterVerdict {
    pub verdict: Verdict,
    pub eps: f64,
    pub d: usize,
    pub k_max: u64,
    pub per_eq_samples: u64,
    pub queries_used: u64,
    pub per_eq: Vec<EquationOutcome>,
    pub guarantee: Guarantee,
}

/// Runs the tester: PASS iff every `|p̃ − r̃| ≤ 2ε/3`.
///
/// `delta` overrides the rejection radius; without it the explicit bound of
/// the set's family is used where one is known.
pub fn run_tester(
    oracle: &mut Oracle,
    set: &EquationSet,
    eps: f64,
    delta: Option<f64>,
) -> Result<TesterVerdict> {
    if oracle.arity() != set.arity() {
        return Err(Error::Spec(format!(
            "equation set takes {} gate(s), oracle holds {}",
            set.arity(),
            oracle.arity()
        )));
    }
    for (q, have) in set.var_qubits().iter().zip(oracle.gate_qubits()) {
        if let Some(q) = *q {
            if q != have {
                return Err(Error::Dimension {
                    expected: q,
                    found: have,
                });
            }
        }
    }
    let plan = plan_samples(set.d(), eps)?;
    if plan.total_queries > QUERY_LIMIT {
        return Err(Error::PlanOverflow {
            total: plan.total_queries,
            limit: QUERY_LIMIT,
            required_eps: required_eps(set.d(), QUERY_LIMIT),
        });
    }
    let threshold = 2.0 * eps / 3.0;
    let start = oracle.query_count();
    let mut per_eq = Vec::with_capacity(set.d());
    for (index, eq) in set.equations().iter().enumerate() {
        let estimate = oracle.estimate_substream(eq, index as u64, plan.per_eq_samples)?;
        let rounded = round_constant(eq.r(), eps)?;
        let deviation = (estimate - rational_value(&rounded)).abs();
        per_eq.push(EquationOutcome {
            index,
            estimate,
            constant: eq.r(),
            rounded_constant: rounded.to_string(),
            deviation,
            threshold,
            pass: deviation <= threshold,
        });
    }
    let verdict = if per_eq.iter().all(|e| e.pass) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let k_max = set.k_max();
    let (delta2, delta2_source) = match (delta, set.family().and_then(|f| f.explicit_delta(eps))) {
        (Some(d), _) => (Some(d), "supplied"),
        (None, Some(d)) => (Some(d), "4579*sqrt(eps)"),
        (None, None) => (None, "exists, constant unknown"),
    };
    Ok(TesterVerdict {
        verdict,
        eps,
        d: set.d(),
        k_max,
        per_eq_samples: plan.per_eq_samples,
        queries_used: oracle.query_count() - start,
        per_eq,
        guarantee: Guarantee {
            delta1: eps / (3.0 * k_max.max(1) as f64),
            delta2,
            delta2_source,
        },
    })
}

/// Any tuple within `dist` of the family `(k_max·dist)`-satisfies the set.
pub fn lemma7_bound(set: &EquationSet, dist: f64) -> f64 {
    set.k_max() as f64 * dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{hadamard, measurement};
    use crate::equations::family_equations;
    use crate::family::Family;
    use proptest::prelude::*;

    #[test]
    fn plan_examples() {
        assert_eq!(plan_samples(3, 0.1).unwrap().per_eq_samples, 5203);
        assert_eq!(plan_samples(1, 1.0).unwrap().per_eq_samples, 33);
        let p = plan_samples(3, 0.1).unwrap();
        assert_eq!(p.total_queries, 3 * 5203);
        let half = plan_samples(3, 0.05).unwrap();
        assert!(half.per_eq_samples >= 4 * p.per_eq_samples - 4);
        assert!(half.per_eq_samples <= 4 * p.per_eq_samples);
        assert!(plan_samples(3, 0.0).is_err());
        assert!(plan_samples(0, 0.1).is_err());
    }

    #[test]
    fn rounding_examples() {
        for eps in [0.01, 0.05, 0.1, 0.3, 0.7, 1.0] {
            assert_eq!(round_constant(0.5, eps).unwrap(), Rational64::new(1, 2));
        }
        let r = 0.5 + 0.5 * std::f64::consts::FRAC_PI_4.cos();
        let q = round_constant(r, 0.1).unwrap();
        assert!((rational_value(&q) - r).abs() <= 1.0 / 240.0);
        assert!(round_constant(1.2, 0.1).is_err());
    }

    #[test]
    fn overflow_reports_required_eps() {
        let set = family_equations(&Family::Hadamard).unwrap();
        let mut o = Oracle::new(vec![hadamard(0.0)], 1).unwrap();
        match run_tester(&mut o, &set, 1e-4, None) {
            Err(Error::PlanOverflow { required_eps, total, .. }) => {
                assert!(total > QUERY_LIMIT);
                let p = plan_samples(3, required_eps).unwrap();
                assert!(p.total_queries <= QUERY_LIMIT);
            }
            other => panic!("expected overflow, got {other:?}"),
        }
        assert_eq!(o.query_count(), 0);
    }

    #[test]
    fn verdicts_and_accounting() {
        let set = family_equations(&Family::Hadamard).unwrap();
        let mut o = Oracle::new(vec![hadamard(1.1)], 7).unwrap();
        let v = run_tester(&mut o, &set, 0.1, None).unwrap();
        assert_eq!(v.verdict, Verdict::Pass);
        assert_eq!(v.queries_used, 3 * v.per_eq_samples);
        assert!((v.guarantee.delta1 - 0.1 / 6.0).abs() < 1e-15);
        assert!((v.guarantee.delta2.unwrap() - 4579.0 * 0.1f64.sqrt()).abs() < 1e-9);

        let mut o = Oracle::new(vec![measurement(1).unwrap()], 7).unwrap();
        let v = run_tester(&mut o, &set, 0.1, Some(0.5)).unwrap();
        assert_eq!(v.verdict, Verdict::Fail);
        assert_eq!(v.guarantee.delta2, Some(0.5));

        let cnot_set = family_equations(&Family::HadamardCnot).unwrap();
        let mut o = Oracle::new(vec![hadamard(0.0)], 7).unwrap();
        assert!(run_tester(&mut o, &cnot_set, 0.1, None).is_err());
    }

    #[test]
    fn verdict_is_reproducible() {
        let set = family_equations(&Family::Hadamard).unwrap();
        let g = measurement(1).unwrap().mix(&hadamard(0.0), 0.9).unwrap();
        let run = || {
            let mut o = Oracle::new(vec![g.clone()], 99).unwrap();
            run_tester(&mut o, &set, 0.2, None).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn lemma7_examples() {
        let set = family_equations(&Family::Hadamard).unwrap();
        assert!((lemma7_bound(&set, 0.01) - 0.02).abs() < 1e-15);
        assert_eq!(lemma7_bound(&set, 0.0), 0.0);
    }

    proptest! {
        #[test]
        fn rounding_is_close(r in 0.0f64..=1.0, eps in 1e-3f64..=1.0) {
            let q = round_constant(r, eps).unwrap();
            prop_assert!((rational_value(&q) - r).abs() <= eps / 24.0 + 1e-15);
            prop_assert!(*q.denom() > 0);
        }

        #[test]
        fn halving_eps_quadruples(d in 1usize..50, eps in 0.01f64..=1.0) {
            let a = plan_samples(d, eps).unwrap().per_eq_samples;
            let b = plan_samples(d, eps / 2.0).unwrap().per_eq_samples;
            prop_assert!(b >= 4 * a - 4 && b <= 4 * a);
        }
    }
}
