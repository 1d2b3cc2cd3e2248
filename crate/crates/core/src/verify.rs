//! Per-chain verification report covering every recurrence and equivalence
//! property, for the `verify` command and corpus sweeps.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::Rational;
use crate::chain::{canonical_form, integerize, ChainError, ChainSpec, IntegerChain, Slot};
use crate::corpus::random_subcritical;
use crate::engine::{critical_loading, run_engel, solve_all, stats_to_row, EngineError, RunStats};
use crate::harness::{
    method_a_run_from, method_b_run, randomized_schedule_run, run_until_repeat, stats_from_any_recurrent,
};
use crate::matrix::RationalMatrix;
use crate::oracle::{absorption_matrix, fundamental_matrix};
use crate::rng::small_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Random firing schedules per start state.
    pub seeds: u64,
    /// Random sub-critical starting loadings per start state.
    pub starts: usize,
    pub budget: u64,
    /// Base seed for loadings; schedule seeds are `0..seeds`.
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seeds: 10,
            starts: 3,
            budget: crate::engine::DEFAULT_BUDGET,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StartReport {
    pub start: usize,
    /// Moves in one cycle from the critical loading.
    pub cycle_moves: u64,
    pub m: String,
    /// Distinct checkpoints before the first repeat, per sub-critical start.
    pub checkpoint_counts: Vec<usize>,
    pub checkpoint_bound: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub name: String,
    pub transient: Vec<usize>,
    pub absorbing: Vec<usize>,
    pub passed: bool,
    pub properties: Vec<PropertyResult>,
    pub starts: Vec<StartReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

struct Checks {
    names: Vec<&'static str>,
    failures: Vec<Vec<String>>,
}

impl Checks {
    fn new(names: &[&'static str]) -> Self {
        Checks {
            names: names.to_vec(),
            failures: vec![Vec::new(); names.len()],
        }
    }

    fn check(&mut self, name: &'static str, ok: bool, detail: impl FnOnce() -> String) {
        let i = self.names.iter().position(|n| *n == name).expect("registered property");
        if !ok {
            self.failures[i].push(detail());
        }
    }

    fn finish(self) -> Vec<PropertyResult> {
        self.names
            .into_iter()
            .zip(self.failures)
            .map(|(name, failures)| PropertyResult {
                name,
                passed: failures.is_empty(),
                failures,
            })
            .collect()
    }
}

pub const PROPERTIES: &[&str] = &[
    "oracle_exactness",
    "oracle_equivalence",
    "recurrence",
    "cycle_identity",
    "flow_balance",
    "checkpoint_bound",
    "start_independence",
    "method_equivalence",
    "abelian_invariance",
];

/// Runs every property on one chain. Budget exhaustion is returned as an
/// error rather than a failed property.
pub fn verify_chain(name: &str, spec: &ChainSpec, opts: &VerifyOptions) -> Result<ChainReport, VerifyError> {
    let chain = integerize(spec)?;
    let mut checks = Checks::new(PROPERTIES);

    let cf = canonical_form(spec);
    let oracle = fundamental_matrix(&cf.q).and_then(|n| {
        let b = absorption_matrix(&n, &cf.r)?;
        Ok((n, b))
    });
    match &oracle {
        Ok((n, b)) => {
            let i_minus_q = RationalMatrix::identity(cf.q.rows()).sub(&cf.q).expect("square");
            let exact = i_minus_q.mul(n).ok() == Some(RationalMatrix::identity(n.rows()));
            checks.check("oracle_exactness", exact, || "(I-Q)N != I".into());
            let sums_ok = b.row_sums().iter().all(Rational::is_one);
            checks.check("oracle_exactness", sums_ok, || "B row does not sum to 1".into());
        }
        Err(e) => checks.check("oracle_exactness", false, || format!("oracle failed: {e}")),
    }

    let abacus = solve_all(&chain, opts.budget)?;
    if let Ok((n, b)) = &oracle {
        for (i, &u) in chain.transient_labels().iter().enumerate() {
            let same = abacus.n.row(i) == n.row(i) && abacus.b.row(i) == b.row(i);
            checks.check("oracle_equivalence", same, || format!("u={u}: abacus and matrix rows differ"));
        }
    }

    let mut starts = Vec::new();
    for &u in chain.transient_labels() {
        let run = run_engel(&chain, u, opts.budget)?;
        let critical = critical_loading(&chain, u)?;
        let rows = stats_to_row(&run.stats)?;

        checks.check("recurrence", run.final_config.transient() == critical.transient(), || {
            format!("u={u}: run ended away from the critical loading")
        });
        let rec = run_until_repeat(&chain, u, &critical, opts.budget)?;
        checks.check("recurrence", rec.checkpoint == critical, || {
            format!("u={u}: first repeated checkpoint is {:?}", rec.checkpoint.transient())
        });

        checks.check("cycle_identity", run.stats.m == run.stats.v_total, || {
            format!("u={u}: m={} but v={}", run.stats.m, run.stats.v_total)
        });
        checks.check("flow_balance", flow_balanced(&chain, &run.stats), || {
            format!("u={u}: chips in != chips out")
        });

        let bound = checkpoint_bound(&chain, u);
        let mut counts = vec![rec.distinct_checkpoints];
        let mut rng = small_rng(opts.seed ^ (u as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        for k in 0..opts.starts {
            let initial = random_subcritical(&mut rng, &chain, u)?;
            let found = run_until_repeat(&chain, u, &initial, opts.budget)?;
            counts.push(found.distinct_checkpoints);
            let from_any = stats_from_any_recurrent(&chain, u, &found.checkpoint, opts.budget)?;
            checks.check("start_independence", from_any == rows, || {
                format!("u={u}, start #{k} {:?}: rows differ", initial.transient())
            });
            let a = method_a_run_from(&chain, u, &initial, opts.budget)?;
            let b = method_b_run(&chain, u, &a.m, opts.budget)?;
            checks.check("method_equivalence", a.final_config == b.final_config && a.moves == b.moves, || {
                format!("u={u}, start #{k} {:?}: methods A and B differ", initial.transient())
            });
            checks.check("method_equivalence", a.final_config.transient() == critical.transient(), || {
                format!("u={u}, start #{k}: method A did not end at the critical loading")
            });
        }
        for &c in &counts {
            checks.check("checkpoint_bound", BigUint::from(c) <= bound, || {
                format!("u={u}: {c} checkpoints exceed bound {bound}")
            });
        }

        for seed in 0..opts.seeds {
            let stats = randomized_schedule_run(&chain, u, seed, opts.budget)?;
            checks.check("abelian_invariance", stats == run.stats, || {
                format!("u={u}, seed={seed}: random schedule changed the run statistics")
            });
        }

        starts.push(StartReport {
            start: u,
            cycle_moves: run.stats.moves,
            m: run.stats.m.to_string(),
            checkpoint_counts: counts,
            checkpoint_bound: bound.to_string(),
        });
    }

    let properties = checks.finish();
    Ok(ChainReport {
        name: name.to_string(),
        transient: chain.transient_labels().to_vec(),
        absorbing: chain.absorbing_labels().to_vec(),
        passed: properties.iter().all(|p| p.passed),
        properties,
        starts,
    })
}

/// Verifies many chains in parallel; results keep the input order.
pub fn verify_many(chains: &[(String, ChainSpec)], opts: &VerifyOptions) -> Vec<Result<ChainReport, VerifyError>> {
    chains
        .par_iter()
        .map(|(name, spec)| verify_chain(name, spec, opts))
        .collect()
}

/// Product of `r_i` over transient `i != u`: the number of possible checkpoints.
pub fn checkpoint_bound(chain: &IntegerChain, start: usize) -> BigUint {
    let u = chain.transient_position(start);
    (0..chain.transient_count())
        .filter(|&p| Some(p) != u)
        .map(|p| BigUint::from(chain.quota(p)))
        .product()
}

/// `w_i = [i = u] v + sum_k w_k p_ki` for transient `i` and
/// `v_j = sum_k w_k p_kj` for absorbing `j`, exactly.
pub fn flow_balanced(chain: &IntegerChain, stats: &RunStats) -> bool {
    let Some(u) = chain.transient_position(stats.start) else {
        return false;
    };
    let w: Vec<Rational> = stats.w.iter().cloned().map(Rational::from).collect();
    let inflow = |target: Slot| -> Rational {
        (0..chain.transient_count())
            .map(|k| &w[k] * &chain.probability(k, target))
            .sum()
    };
    let transient_ok = (0..chain.transient_count()).all(|i| {
        let mut expected = inflow(Slot::Transient(i));
        if i == u {
            expected = expected + Rational::from(stats.v_total.clone());
        }
        w[i] == expected
    });
    transient_ok
        && (0..chain.absorbing_count()).all(|a| Rational::from(stats.v[a].clone()) == inflow(Slot::Absorbing(a)))
}
