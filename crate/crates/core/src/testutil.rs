use num_bigint::BigUint;

use crate::arith::Rational;
use crate::chain::{integerize, parse_chain, IntegerChain, Slot};
use crate::engine::RunStats;

pub fn paper_chain_text() -> &'static str {
    crate::fixtures::DRIFT_WALK
}

pub fn paper_chain() -> IntegerChain {
    integerize(&parse_chain(paper_chain_text()).unwrap()).unwrap()
}

pub fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

pub fn qs(v: &[&str]) -> Vec<Rational> {
    v.iter().map(|s| q(s)).collect()
}

pub fn big(v: &[u64]) -> Vec<BigUint> {
    v.iter().map(|&x| BigUint::from(x)).collect()
}

/// Chips into each state equal chips out over a completed cycle.
#[allow(clippy::needless_range_loop)]
pub fn assert_flow_balance(chain: &IntegerChain, stats: &RunStats) {
    let u = chain.transient_position(stats.start).unwrap();
    let w: Vec<Rational> = stats.w.iter().cloned().map(Rational::from).collect();
    let inflow = |target: Slot| -> Rational {
        (0..chain.transient_count())
            .map(|k| &w[k] * &chain.probability(k, target))
            .sum()
    };
    for i in 0..chain.transient_count() {
        let mut expected = inflow(Slot::Transient(i));
        if i == u {
            expected = expected + Rational::from(stats.v_total.clone());
        }
        assert_eq!(w[i], expected, "flow balance at transient position {i}");
    }
    for a in 0..chain.absorbing_count() {
        assert_eq!(Rational::from(stats.v[a].clone()), inflow(Slot::Absorbing(a)));
    }
}
