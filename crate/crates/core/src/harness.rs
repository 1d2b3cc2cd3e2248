//! Experiments around the recurrence of the critical loading.
//!
//! A checkpoint is the transient loading seen right after the start state
//! has been refilled to `r_u`, with every other transient state quiescent.
//! From any loading at or below critical, the sequence of checkpoints is
//! eventually periodic; [`run_until_repeat`] finds the first repeat. Method
//! A replays one such cycle on "green" chips while inert "red" chips pad
//! the loading up to critical; method B runs the ordinary rules from the
//! critical loading for the same number of additions. Both must fire every
//! state the same number of times and end at the critical loading.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::arith::Rational;
use crate::chain::IntegerChain;
use crate::engine::{
    critical_loading, run_engel_observed, stats_to_row, transient_pos, ChipConfig, EngineError,
    FiringSchedule, LowestFirst, Machine, RunStats, SeededRandom,
};

/// First checkpoint seen twice and the run statistics of one cycle from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recurrence {
    pub checkpoint: ChipConfig,
    pub cycle: RunStats,
    /// Distinct checkpoints observed before the first repeat.
    pub distinct_checkpoints: usize,
}

/// Whether `loading` has `r_u` chips on `u` and every other transient state
/// below its quota.
pub fn is_checkpoint(chain: &IntegerChain, start: usize, loading: &[u64]) -> Result<bool, EngineError> {
    let u = transient_pos(chain, start)?;
    Ok(loading.len() == chain.transient_count()
        && loading
            .iter()
            .enumerate()
            .all(|(p, &c)| if p == u { c == chain.quota(p) } else { c < chain.quota(p) }))
}

fn check_subcritical(chain: &IntegerChain, start: usize, loading: &ChipConfig) -> Result<(), EngineError> {
    let critical = critical_loading(chain, start)?;
    if let Some(p) = (0..chain.transient_count()).find(|&p| loading.transient()[p] > critical.transient()[p]) {
        return Err(EngineError::AboveCritical {
            label: chain.transient_labels()[p],
        });
    }
    Ok(())
}

pub fn run_until_repeat(
    chain: &IntegerChain,
    start: usize,
    initial: &ChipConfig,
    budget: u64,
) -> Result<Recurrence, EngineError> {
    let u = transient_pos(chain, start)?;
    check_subcritical(chain, start, initial)?;

    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    if is_checkpoint(chain, start, initial.transient())? {
        seen.insert(initial.transient().to_vec(), 0);
    }
    let mut machine = Machine::new(chain, initial.transient().to_vec(), budget);
    let repeated = loop {
        machine.quiesce(&mut LowestFirst, &mut ())?;
        machine.refill(u, &mut ())?;
        let next = seen.len();
        if seen.insert(machine.counts.clone(), next).is_some() {
            break machine.counts.clone();
        }
    };
    let checkpoint = ChipConfig::from_transient(chain, repeated)?;
    let cycle = cycle_from(chain, start, &checkpoint, budget, &mut LowestFirst)?;
    Ok(Recurrence {
        checkpoint,
        cycle,
        distinct_checkpoints: seen.len(),
    })
}

/// Runs from checkpoint `loading` until the same checkpoint recurs.
pub fn cycle_from<S: FiringSchedule + ?Sized>(
    chain: &IntegerChain,
    start: usize,
    loading: &ChipConfig,
    budget: u64,
    schedule: &mut S,
) -> Result<RunStats, EngineError> {
    let u = transient_pos(chain, start)?;
    if !is_checkpoint(chain, start, loading.transient())? {
        return Err(EngineError::NotCheckpoint { start });
    }
    let mut machine = Machine::new(chain, loading.transient().to_vec(), budget);
    machine.cycle_to(u, loading.transient(), schedule, &mut ())?;
    Ok(machine.stats(start))
}

/// `N` and `B` rows from one cycle through a recurrent checkpoint.
pub fn stats_from_any_recurrent(
    chain: &IntegerChain,
    start: usize,
    recurrent: &ChipConfig,
    budget: u64,
) -> Result<(Vec<Rational>, Vec<Rational>), EngineError> {
    let stats = cycle_from(chain, start, recurrent, budget, &mut LowestFirst)?;
    stats_to_row(&stats)
}

/// How many times each kind of move was made, ignoring order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MoveMultiset {
    /// Firings per transient position.
    pub fires: Vec<BigUint>,
    pub adds: BigUint,
}

impl MoveMultiset {
    fn from_stats(stats: &RunStats) -> Self {
        MoveMultiset {
            fires: stats.firings.clone(),
            adds: stats.m.clone(),
        }
    }
}

/// Method A: a recurrent green loading padded with red chips to critical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodA {
    pub green: ChipConfig,
    pub red: Vec<u64>,
    pub final_config: ChipConfig,
    pub moves: MoveMultiset,
    pub m: BigUint,
}

/// Method A seeded by the recurrent checkpoint reached from an empty loading.
pub fn method_a_run(chain: &IntegerChain, start: usize, budget: u64) -> Result<MethodA, EngineError> {
    method_a_run_from(chain, start, &ChipConfig::empty(chain), budget)
}

pub fn method_a_run_from(
    chain: &IntegerChain,
    start: usize,
    initial: &ChipConfig,
    budget: u64,
) -> Result<MethodA, EngineError> {
    let u = transient_pos(chain, start)?;
    let green = run_until_repeat(chain, start, initial, budget)?.checkpoint;
    let critical = critical_loading(chain, start)?;
    let red: Vec<u64> = critical
        .transient()
        .iter()
        .zip(green.transient())
        .map(|(&c, &g)| c.checked_sub(g).expect("checkpoints lie below the critical loading"))
        .collect();

    // Replay on green chips only; the red vector is never read by the rules.
    let mut machine = Machine::new(chain, green.transient().to_vec(), budget);
    machine.cycle_to(u, green.transient(), &mut LowestFirst, &mut ())?;
    let stats = machine.stats(start);
    let replayed = machine.config(&ChipConfig::empty(chain));
    let combined: Vec<u64> = replayed.transient().iter().zip(&red).map(|(g, r)| g + r).collect();
    let final_config = ChipConfig::new(chain, combined, replayed.absorbing().to_vec())?;

    Ok(MethodA {
        green,
        red,
        final_config,
        moves: MoveMultiset::from_stats(&stats),
        m: stats.m,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodB {
    pub final_config: ChipConfig,
    pub moves: MoveMultiset,
}

/// Method B: ordinary rules from the critical loading, firing everything
/// possible before each addition, stopping right after the `m`-th addition.
pub fn method_b_run(chain: &IntegerChain, start: usize, m: &BigUint, budget: u64) -> Result<MethodB, EngineError> {
    let u = transient_pos(chain, start)?;
    // more additions than the budget allows cannot complete anyway
    let m = m.to_u64().unwrap_or(u64::MAX);
    let critical = critical_loading(chain, start)?;
    let mut machine = Machine::new(chain, critical.transient().to_vec(), budget);
    while machine.adds() < m {
        machine.quiesce(&mut LowestFirst, &mut ())?;
        machine.add(u, &mut ())?;
    }
    let stats = machine.stats(start);
    Ok(MethodB {
        final_config: machine.config(&critical),
        moves: MoveMultiset::from_stats(&stats),
    })
}

/// Abacus cycle from the critical loading with a seeded random choice among
/// fireable states.
pub fn randomized_schedule_run(
    chain: &IntegerChain,
    start: usize,
    seed: u64,
    budget: u64,
) -> Result<RunStats, EngineError> {
    let (stats, _) = run_engel_observed(chain, start, budget, &mut SeededRandom::new(seed), &mut ())?;
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{integerize, parse_chain};
    use crate::engine::{run_engel, DEFAULT_BUDGET};
    use crate::fixtures::ONE_STEP;
    use crate::testutil::{big, paper_chain, qs};

    #[test]
    fn critical_loading_is_its_own_repeat() {
        let chain = paper_chain();
        let critical = critical_loading(&chain, 1).unwrap();
        let rec = run_until_repeat(&chain, 1, &critical, DEFAULT_BUDGET).unwrap();
        assert_eq!(rec.checkpoint.transient(), &[3, 2]);
        assert_eq!(rec.cycle.w, big(&[9, 6]));
        assert_eq!(rec.cycle.v, big(&[3, 4]));
    }

    #[test]
    fn empty_start_reaches_a_recurrent_checkpoint() {
        let chain = paper_chain();
        let rec = run_until_repeat(&chain, 1, &ChipConfig::empty(&chain), DEFAULT_BUDGET).unwrap();
        // one further cycle from the checkpoint returns to it
        let again = run_until_repeat(&chain, 1, &rec.checkpoint, DEFAULT_BUDGET).unwrap();
        assert_eq!(again.checkpoint, rec.checkpoint);
        let (n, b) = stats_from_any_recurrent(&chain, 1, &rec.checkpoint, DEFAULT_BUDGET).unwrap();
        assert_eq!(n, qs(&["9/7", "6/7"]));
        assert_eq!(b, qs(&["3/7", "4/7"]));
        assert!(rec.distinct_checkpoints <= 3);
    }

    #[test]
    fn single_transient_recurrence() {
        let chain = integerize(&parse_chain("states: 2\nabsorbing: 1\nrow 0: 0:1/3 1:2/3").unwrap()).unwrap();
        for c in 0..=3 {
            let init = ChipConfig::from_transient(&chain, vec![c]).unwrap();
            let rec = run_until_repeat(&chain, 0, &init, 1000).unwrap();
            assert_eq!(rec.checkpoint.transient(), &[3]);
        }
    }

    #[test]
    fn recurrent_critical_matches_engel() {
        let chain = paper_chain();
        let critical = critical_loading(&chain, 2).unwrap();
        let rows = stats_from_any_recurrent(&chain, 2, &critical, DEFAULT_BUDGET).unwrap();
        let run = run_engel(&chain, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(rows, stats_to_row(&run.stats).unwrap());
    }

    #[test]
    fn rejects_bad_loadings() {
        let chain = paper_chain();
        let above = ChipConfig::from_transient(&chain, vec![3, 3]).unwrap();
        assert_eq!(
            run_until_repeat(&chain, 1, &above, 100),
            Err(EngineError::AboveCritical { label: 2 })
        );
        let not_cp = ChipConfig::from_transient(&chain, vec![1, 1]).unwrap();
        assert_eq!(
            stats_from_any_recurrent(&chain, 1, &not_cp, 100),
            Err(EngineError::NotCheckpoint { start: 1 })
        );
        assert!(matches!(
            run_until_repeat(&chain, 1, &ChipConfig::empty(&chain), 3),
            Err(EngineError::BudgetExhausted { budget: 3 })
        ));
    }

    #[test]
    fn methods_a_and_b_on_worked_example() {
        let chain = paper_chain();
        let a = method_a_run(&chain, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(a.final_config.transient(), &[3, 2]);
        assert_eq!(a.m, BigUint::from(7u32));
        let b = method_b_run(&chain, 1, &a.m, DEFAULT_BUDGET).unwrap();
        assert_eq!(b.final_config.transient(), &[3, 2]);
        assert_eq!(b.moves, MoveMultiset { fires: big(&[3, 2]), adds: BigUint::from(7u32) });
        assert_eq!(a.moves, b.moves);
        assert_eq!(a.final_config, b.final_config);
    }

    #[test]
    fn methods_on_single_state() {
        let chain = integerize(&parse_chain(ONE_STEP).unwrap()).unwrap();
        let a = method_a_run(&chain, 0, 100).unwrap();
        assert_eq!(a.final_config.transient(), &[1]);
        assert_eq!(a.moves, MoveMultiset { fires: big(&[1]), adds: BigUint::from(1u32) });
        let b = method_b_run(&chain, 0, &BigUint::from(1u32), 100).unwrap();
        assert_eq!(b.moves, a.moves);
    }

    #[test]
    fn random_schedules_on_worked_example() {
        let chain = paper_chain();
        let reference = run_engel(&chain, 1, DEFAULT_BUDGET).unwrap().stats;
        for seed in 0..20 {
            let stats = randomized_schedule_run(&chain, 1, seed, DEFAULT_BUDGET).unwrap();
            assert_eq!(stats.w, big(&[9, 6]));
            assert_eq!(stats.v, big(&[3, 4]));
            assert_eq!(stats.m, BigUint::from(7u32));
            assert_eq!(stats, reference);
        }
    }
}
