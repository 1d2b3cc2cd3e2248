//! Seeded Monte Carlo estimate of one row of `N` and `B`.
//!
//! Trials are split into batches of [`BATCH_SIZE`]; batch `k` draws from
//! stream `k` of the ChaCha20 generator seeded with the user seed (see
//! [`crate::rng`]). Each step from transient state `i` draws
//! `x = uniform_below(r_i)` and moves to the first target whose cumulative
//! chip count `r_i1 + ... + r_ij` exceeds `x`, targets in ascending label
//! order. Batch totals are integers and are summed in batch order, so the
//! estimate does not depend on how batches are scheduled across threads.

use rayon::prelude::*;
use thiserror::Error;

use crate::chain::{integerize, ChainError, ChainSpec, IntegerChain, Slot};
use crate::rng::{batch_rng, uniform_below};

pub const BATCH_SIZE: u64 = 4096;
pub const DEFAULT_STEP_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("state {label} is not transient")]
    NotTransient { label: usize },
    #[error("trial count must be positive")]
    NoTrials,
    #[error("{count} trajectories exceeded the {cap}-step cap")]
    StepCap { count: u64, cap: u64 },
}

/// Tallies of `trials` trajectories from one start state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationEstimate {
    pub start: usize,
    pub trials: u64,
    pub seed: u64,
    pub transient: Vec<usize>,
    pub absorbing: Vec<usize>,
    /// Total visits per transient state, the start counted at time zero.
    pub visit_totals: Vec<u64>,
    /// Sum of squared per-trial visit counts, for standard errors.
    pub visit_squares: Vec<u128>,
    pub absorption_counts: Vec<u64>,
}

impl SimulationEstimate {
    pub fn mean_visits(&self) -> Vec<f64> {
        self.visit_totals.iter().map(|&v| v as f64 / self.trials as f64).collect()
    }

    pub fn absorption_frequencies(&self) -> Vec<f64> {
        self.absorption_counts.iter().map(|&c| c as f64 / self.trials as f64).collect()
    }

    /// Standard error of each mean visit count.
    pub fn visit_std_errors(&self) -> Vec<f64> {
        let t = self.trials as f64;
        self.visit_totals
            .iter()
            .zip(&self.visit_squares)
            .map(|(&s, &sq)| {
                if self.trials < 2 {
                    return f64::NAN;
                }
                let mean = s as f64 / t;
                let var = (sq as f64 - t * mean * mean) / (t - 1.0);
                (var.max(0.0) / t).sqrt()
            })
            .collect()
    }

    /// Binomial standard error of each absorption frequency.
    pub fn absorption_std_errors(&self) -> Vec<f64> {
        let t = self.trials as f64;
        self.absorption_frequencies()
            .iter()
            .map(|p| (p * (1.0 - p) / t).sqrt())
            .collect()
    }
}

#[derive(Default)]
struct Tally {
    visits: Vec<u64>,
    squares: Vec<u128>,
    absorbed: Vec<u64>,
    capped: u64,
}

impl Tally {
    fn new(t: usize, a: usize) -> Self {
        Tally {
            visits: vec![0; t],
            squares: vec![0; t],
            absorbed: vec![0; a],
            capped: 0,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (x, y) in self.visits.iter_mut().zip(other.visits) {
            *x += y;
        }
        for (x, y) in self.squares.iter_mut().zip(other.squares) {
            *x += y;
        }
        for (x, y) in self.absorbed.iter_mut().zip(other.absorbed) {
            *x += y;
        }
        self.capped += other.capped;
        self
    }
}

pub fn monte_carlo_estimate(
    spec: &ChainSpec,
    start: usize,
    trials: u64,
    seed: u64,
) -> Result<SimulationEstimate, SimulationError> {
    monte_carlo_estimate_with(spec, start, trials, seed, DEFAULT_STEP_CAP)
}

pub fn monte_carlo_estimate_with(
    spec: &ChainSpec,
    start: usize,
    trials: u64,
    seed: u64,
    step_cap: u64,
) -> Result<SimulationEstimate, SimulationError> {
    let chain = integerize(spec)?;
    let u = chain
        .transient_position(start)
        .ok_or(SimulationError::NotTransient { label: start })?;
    if trials == 0 {
        return Err(SimulationError::NoTrials);
    }
    let batches = trials.div_ceil(BATCH_SIZE);
    let tallies: Vec<Tally> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let n = BATCH_SIZE.min(trials - b * BATCH_SIZE);
            run_batch(&chain, u, n, seed, b, step_cap)
        })
        .collect();
    let total = tallies
        .into_iter()
        .fold(Tally::new(chain.transient_count(), chain.absorbing_count()), Tally::merge);
    if total.capped > 0 {
        return Err(SimulationError::StepCap {
            count: total.capped,
            cap: step_cap,
        });
    }
    Ok(SimulationEstimate {
        start,
        trials,
        seed,
        transient: chain.transient_labels().to_vec(),
        absorbing: chain.absorbing_labels().to_vec(),
        visit_totals: total.visits,
        visit_squares: total.squares,
        absorption_counts: total.absorbed,
    })
}

fn run_batch(chain: &IntegerChain, u: usize, trials: u64, seed: u64, batch: u64, step_cap: u64) -> Tally {
    let mut rng = batch_rng(seed, batch);
    let mut tally = Tally::new(chain.transient_count(), chain.absorbing_count());
    let mut visits = vec![0u64; chain.transient_count()];
    for _ in 0..trials {
        visits.iter_mut().for_each(|v| *v = 0);
        let mut state = u;
        let mut steps = 0u64;
        let absorbed = loop {
            visits[state] += 1;
            if steps == step_cap {
                break None;
            }
            steps += 1;
            let mut x = uniform_below(&mut rng, chain.quota(state));
            let edge = chain
                .edges(state)
                .iter()
                .find(|e| {
                    if x < e.chips {
                        true
                    } else {
                        x -= e.chips;
                        false
                    }
                })
                .expect("row chips sum to the quota");
            match edge.target {
                Slot::Transient(t) => state = t,
                Slot::Absorbing(a) => break Some(a),
            }
        };
        match absorbed {
            Some(a) => {
                tally.absorbed[a] += 1;
                for (i, &v) in visits.iter().enumerate() {
                    tally.visits[i] += v;
                    tally.squares[i] += u128::from(v) * u128::from(v);
                }
            }
            None => tally.capped += 1,
        }
    }
    tally
}
