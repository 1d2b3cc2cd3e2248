//! Random absorbing chains and sub-critical loadings for sweeps.

use rand_chacha::rand_core::RngCore;

use crate::arith::Rational;
use crate::chain::{validate_absorbing, ChainSpec, IntegerChain};
use crate::engine::{transient_pos, ChipConfig, EngineError};
use crate::rng::{uniform_below, uniform_inclusive};

/// Size limits for generated chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusParams {
    pub max_transient: usize,
    pub max_absorbing: usize,
    /// Every row uses a common denominator drawn from `1..=max_denominator`.
    pub max_denominator: u64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            max_transient: 6,
            max_absorbing: 3,
            max_denominator: 8,
        }
    }
}

/// Draws chains until one passes absorbing validation.
///
/// Labels are shuffled so transient and absorbing states interleave. Each
/// row picks a denominator `d` and scatters `d` units over a random subset
/// of targets.
pub fn random_chain<R: RngCore>(rng: &mut R, params: &CorpusParams) -> ChainSpec {
    assert!(params.max_transient >= 1 && params.max_absorbing >= 1 && params.max_denominator >= 1);
    loop {
        let t = uniform_inclusive(rng, 1, params.max_transient as u64) as usize;
        let a = uniform_inclusive(rng, 1, params.max_absorbing as u64) as usize;
        let s = t + a;
        let mut labels: Vec<usize> = (0..s).collect();
        for i in (1..s).rev() {
            let j = uniform_below(rng, i as u64 + 1) as usize;
            labels.swap(i, j);
        }
        let (transient, absorbing) = labels.split_at(t);

        let rows: Vec<(usize, Vec<(usize, Rational)>)> = transient
            .iter()
            .map(|&from| {
                let d = uniform_inclusive(rng, 1, params.max_denominator);
                let fanout = uniform_inclusive(rng, 1, (s as u64).min(d)) as usize;
                let mut targets: Vec<usize> = (0..s).collect();
                for i in 0..fanout {
                    let j = i + uniform_below(rng, (s - i) as u64) as usize;
                    targets.swap(i, j);
                }
                targets.truncate(fanout);
                // one unit each, the rest scattered
                let mut units = vec![1u64; fanout];
                for _ in 0..d - fanout as u64 {
                    units[uniform_below(rng, fanout as u64) as usize] += 1;
                }
                let entries = targets
                    .into_iter()
                    .zip(units)
                    .map(|(to, k)| (to, Rational::new(k, d).expect("d >= 1")))
                    .collect();
                (from, entries)
            })
            .collect();

        let spec = ChainSpec::new(s, absorbing.iter().copied(), rows, None)
            .expect("generated rows are stochastic");
        if validate_absorbing(&spec).is_ok() {
            return spec;
        }
    }
}

/// Uniform loading with `0 <= c_i <= critical_i` on every transient state.
pub fn random_subcritical<R: RngCore>(
    rng: &mut R,
    chain: &IntegerChain,
    start: usize,
) -> Result<ChipConfig, EngineError> {
    let u = transient_pos(chain, start)?;
    let loading = (0..chain.transient_count())
        .map(|p| {
            let cap = if p == u { chain.quota(p) } else { chain.quota(p) - 1 };
            uniform_inclusive(rng, 0, cap)
        })
        .collect();
    ChipConfig::from_transient(chain, loading)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::integerize;
    use crate::rng::small_rng;

    #[test]
    fn generated_chains_respect_limits() {
        let mut rng = small_rng(11);
        let params = CorpusParams::default();
        for _ in 0..200 {
            let spec = random_chain(&mut rng, &params);
            let t = spec.transient_states().len();
            let a = spec.absorbing_states().len();
            assert!((1..=6).contains(&t) && (1..=3).contains(&a));
            for s in spec.transient_states() {
                for p in spec.row(s).unwrap().values() {
                    assert!(p.denom() <= &8.into());
                }
            }
            let chain = integerize(&spec).unwrap();
            assert!(chain.quotas().iter().all(|&r| r <= 8));
        }
    }

    #[test]
    fn subcritical_loadings_stay_below_critical() {
        let mut rng = small_rng(5);
        let spec = random_chain(&mut rng, &CorpusParams::default());
        let chain = integerize(&spec).unwrap();
        let u = chain.transient_labels()[0];
        for _ in 0..50 {
            let c = random_subcritical(&mut rng, &chain, u).unwrap();
            for (p, &x) in c.transient().iter().enumerate() {
                let cap = if p == 0 { chain.quota(p) } else { chain.quota(p) - 1 };
                assert!(x <= cap);
            }
        }
    }
}
