//! Engel's chip-firing abacus.
//!
//! A run starts from the critical loading for a start state `u`: `r_u`
//! chips on `u` and `r_i - 1` on every other transient state. Fireable
//! states are fired (type-1 moves) until none is left, then chips are added
//! to `u` one at a time (type-2 moves) until it holds `r_u` again. The run
//! stops at the first such checkpoint whose transient loading is the
//! critical loading. Chips moved out of each transient state and into each
//! absorbing state, divided by the total absorbed, give row `u` of `N` and
//! `B`.

use num_bigint::BigUint;
use num_traits::Zero;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::Rational;
use crate::chain::{IntegerChain, Slot};
use crate::matrix::RationalMatrix;
use crate::rng::{small_rng, uniform_below};

pub const DEFAULT_BUDGET: u64 = 10_000_000;
pub const DEFAULT_TRACE_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("state {label} is not transient")]
    NotTransient { label: usize },
    #[error("state {label} holds {have} chips but needs {need} to fire")]
    IllegalFire { label: usize, have: u64, need: u64 },
    #[error("cannot add a chip while state {fireable} can fire")]
    IllegalAdd { fireable: usize },
    #[error("step budget of {budget} moves exhausted")]
    BudgetExhausted { budget: u64 },
    #[error("cycle absorbed no chips")]
    NoAbsorption,
    #[error("loading exceeds the critical loading at state {label}")]
    AboveCritical { label: usize },
    #[error("configuration is not a checkpoint for start state {start}")]
    NotCheckpoint { start: usize },
    #[error("configuration has {found} {kind} states, chain has {expected}")]
    Shape {
        kind: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("start state {start}: {source}")]
    Run {
        start: usize,
        #[source]
        source: Box<EngineError>,
    },
}

impl EngineError {
    /// Strips [`EngineError::Run`] annotations.
    pub fn root(&self) -> &EngineError {
        match self {
            EngineError::Run { source, .. } => source.root(),
            e => e,
        }
    }
}

/// A type-1 move (fire the transient state at a position) or a type-2 move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Fire(usize),
    AddChip,
}

/// Chip counts per state. Transient counts are bounded by the total quota
/// and kept in machine words; absorbing counts grow without bound.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChipConfig {
    transient: Vec<u64>,
    absorbing: Vec<BigUint>,
}

impl ChipConfig {
    pub fn new(
        chain: &IntegerChain,
        transient: Vec<u64>,
        absorbing: Vec<BigUint>,
    ) -> Result<Self, EngineError> {
        check_len("transient", chain.transient_count(), transient.len())?;
        check_len("absorbing", chain.absorbing_count(), absorbing.len())?;
        Ok(ChipConfig {
            transient,
            absorbing,
        })
    }

    /// Loading of the transient states with empty absorbing states.
    pub fn from_transient(chain: &IntegerChain, transient: Vec<u64>) -> Result<Self, EngineError> {
        Self::new(chain, transient, vec![BigUint::zero(); chain.absorbing_count()])
    }

    pub fn empty(chain: &IntegerChain) -> Self {
        ChipConfig {
            transient: vec![0; chain.transient_count()],
            absorbing: vec![BigUint::zero(); chain.absorbing_count()],
        }
    }

    pub fn transient(&self) -> &[u64] {
        &self.transient
    }

    pub fn absorbing(&self) -> &[BigUint] {
        &self.absorbing
    }

    pub fn get(&self, slot: Slot) -> BigUint {
        match slot {
            Slot::Transient(p) => BigUint::from(self.transient[p]),
            Slot::Absorbing(p) => self.absorbing[p].clone(),
        }
    }

    pub fn total(&self) -> BigUint {
        self.transient.iter().map(|&c| BigUint::from(c)).sum::<BigUint>()
            + self.absorbing.iter().sum::<BigUint>()
    }

    /// Counts indexed by state label.
    pub fn by_label(&self, chain: &IntegerChain) -> Vec<BigUint> {
        (0..chain.state_count())
            .map(|l| self.get(chain.slot(l).expect("label in range")))
            .collect()
    }

    /// First transient position able to fire, if any.
    pub fn first_fireable(&self, chain: &IntegerChain) -> Option<usize> {
        (0..self.transient.len()).find(|&p| self.transient[p] >= chain.quota(p))
    }

    pub fn is_quiescent(&self, chain: &IntegerChain) -> bool {
        self.first_fireable(chain).is_none()
    }

    /// Type-1 move at transient state `label`.
    pub fn fire(&self, chain: &IntegerChain, label: usize) -> Result<ChipConfig, EngineError> {
        let pos = transient_pos(chain, label)?;
        let need = chain.quota(pos);
        if self.transient[pos] < need {
            return Err(EngineError::IllegalFire {
                label,
                have: self.transient[pos],
                need,
            });
        }
        let mut next = self.clone();
        next.transient[pos] -= need;
        for e in chain.edges(pos) {
            match e.target {
                Slot::Transient(t) => next.transient[t] += e.chips,
                Slot::Absorbing(a) => next.absorbing[a] += e.chips,
            }
        }
        Ok(next)
    }

    /// Type-2 move: one chip onto `start`, legal only when nothing can fire.
    pub fn add_chip(&self, chain: &IntegerChain, start: usize) -> Result<ChipConfig, EngineError> {
        let pos = transient_pos(chain, start)?;
        if let Some(p) = self.first_fireable(chain) {
            return Err(EngineError::IllegalAdd {
                fireable: chain.transient_labels()[p],
            });
        }
        let mut next = self.clone();
        next.transient[pos] += 1;
        Ok(next)
    }
}

fn check_len(kind: &'static str, expected: usize, found: usize) -> Result<(), EngineError> {
    if expected == found {
        Ok(())
    } else {
        Err(EngineError::Shape {
            kind,
            expected,
            found,
        })
    }
}

pub(crate) fn transient_pos(chain: &IntegerChain, label: usize) -> Result<usize, EngineError> {
    chain
        .transient_position(label)
        .ok_or(EngineError::NotTransient { label })
}

/// `r_u` on the start state, `r_i - 1` elsewhere, nothing on absorbing states.
pub fn critical_loading(chain: &IntegerChain, start: usize) -> Result<ChipConfig, EngineError> {
    let u = transient_pos(chain, start)?;
    let transient = (0..chain.transient_count())
        .map(|p| if p == u { chain.quota(p) } else { chain.quota(p) - 1 })
        .collect();
    Ok(ChipConfig {
        transient,
        absorbing: vec![BigUint::zero(); chain.absorbing_count()],
    })
}

/// Chooses which fireable state fires next.
pub trait FiringSchedule {
    /// A position `p` with `counts[p] >= quotas[p]`, or `None` when quiescent.
    fn next(&mut self, counts: &[u64], quotas: &[u64]) -> Option<usize>;
}

/// Fires the lowest-index fireable state first.
#[derive(Debug, Clone, Copy, Default)]
pub struct LowestFirst;

impl FiringSchedule for LowestFirst {
    fn next(&mut self, counts: &[u64], quotas: &[u64]) -> Option<usize> {
        counts.iter().zip(quotas).position(|(c, q)| c >= q)
    }
}

/// Fires a uniformly random fireable state.
#[derive(Debug, Clone)]
pub struct SeededRandom {
    rng: ChaCha8Rng,
    scratch: Vec<usize>,
}

impl SeededRandom {
    pub fn new(seed: u64) -> Self {
        SeededRandom {
            rng: small_rng(seed),
            scratch: Vec::new(),
        }
    }
}

impl FiringSchedule for SeededRandom {
    fn next(&mut self, counts: &[u64], quotas: &[u64]) -> Option<usize> {
        self.scratch.clear();
        self.scratch
            .extend((0..counts.len()).filter(|&p| counts[p] >= quotas[p]));
        match self.scratch.len() {
            0 => None,
            1 => Some(self.scratch[0]),
            n => Some(self.scratch[uniform_below(&mut self.rng, n as u64) as usize]),
        }
    }
}

/// Receives moves as they are executed.
pub trait MoveObserver {
    fn observe(&mut self, mv: Move);
}

impl MoveObserver for () {
    fn observe(&mut self, _: Move) {}
}

impl MoveObserver for Vec<Move> {
    fn observe(&mut self, mv: Move) {
        self.push(mv);
    }
}

/// Ordered move list of a run, stored up to a cap. Past the cap only the
/// count grows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    start: ChipConfig,
    refill: usize,
    moves: Vec<Move>,
    total: u64,
    cap: usize,
}

impl Trace {
    /// `refill` is the transient position that receives type-2 moves.
    pub fn new(start: ChipConfig, refill: usize, cap: usize) -> Self {
        Trace {
            start,
            refill,
            moves: Vec::new(),
            total: 0,
            cap,
        }
    }

    pub fn start(&self) -> &ChipConfig {
        &self.start
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    /// Number of moves executed, stored or not.
    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn is_truncated(&self) -> bool {
        self.total > self.moves.len() as u64
    }

    /// Table rendering: a header of state labels, one row per configuration
    /// with the move applied to it, and a final row with no move.
    pub fn render(&self, chain: &IntegerChain) -> String {
        let labels: Vec<String> = (0..chain.state_count()).map(|l| l.to_string()).collect();
        let mut rows: Vec<(String, Vec<String>, String)> = Vec::new();
        let mut config = self.start.clone();
        let fmt_config = |c: &ChipConfig| -> Vec<String> {
            c.by_label(chain).iter().map(ToString::to_string).collect()
        };
        for (k, mv) in self.moves.iter().enumerate() {
            let name = if k == 0 { "Start" } else { "" };
            let label = match *mv {
                Move::Fire(p) => format!("1_{}", chain.transient_labels()[p]),
                Move::AddChip => "2".to_string(),
            };
            rows.push((name.to_string(), fmt_config(&config), label));
            config = apply(chain, &config, *mv, self.refill);
        }
        let last = if self.is_truncated() { "..." } else if self.moves.is_empty() { "Start" } else { "Final" };
        rows.push((last.to_string(), fmt_config(&config), String::new()));

        let mut widths: Vec<usize> = labels.iter().map(String::len).collect();
        let mut name_w = "State".len();
        for (name, cells, _) in &rows {
            name_w = name_w.max(name.len());
            for (w, c) in widths.iter_mut().zip(cells) {
                *w = (*w).max(c.len());
            }
        }
        let line = |name: &str, cells: &[String], mv: &str| -> String {
            let mut s = format!("{name:<name_w$}");
            for (w, c) in widths.iter().zip(cells) {
                s.push_str(&format!("  {c:>w$}"));
            }
            if !mv.is_empty() {
                s.push_str(&format!("  {mv}"));
            }
            s.push('\n');
            s
        };
        let mut out = line("State", &labels, "Move");
        for (name, cells, mv) in &rows {
            out.push_str(&line(name, cells, mv));
        }
        if self.is_truncated() {
            out.push_str(&format!(
                "({} further moves not stored)\n",
                self.total - self.moves.len() as u64
            ));
        }
        out
    }
}

fn apply(chain: &IntegerChain, config: &ChipConfig, mv: Move, refill: usize) -> ChipConfig {
    let mut next = config.clone();
    match mv {
        Move::Fire(p) => {
            next.transient[p] -= chain.quota(p);
            for e in chain.edges(p) {
                match e.target {
                    Slot::Transient(t) => next.transient[t] += e.chips,
                    Slot::Absorbing(a) => next.absorbing[a] += e.chips,
                }
            }
        }
        Move::AddChip => next.transient[refill] += 1,
    }
    next
}

impl MoveObserver for Trace {
    fn observe(&mut self, mv: Move) {
        self.total += 1;
        if self.moves.len() < self.cap {
            self.moves.push(mv);
        }
    }
}

/// Counters accumulated over a run. `w[j]` counts chips moved out of
/// transient state `j`, `v[k]` chips moved into absorbing state `k`, and
/// `m` the type-2 moves. Vectors are indexed by position in the chain's
/// transient or absorbing labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RunStats {
    pub start: usize,
    pub firings: Vec<BigUint>,
    pub w: Vec<BigUint>,
    pub v: Vec<BigUint>,
    pub v_total: BigUint,
    pub m: BigUint,
    pub moves: u64,
}

/// Row `u` of `N` and `B`: `w_uj / v_u` and `v_uk / v_u`.
pub fn stats_to_row(stats: &RunStats) -> Result<(Vec<Rational>, Vec<Rational>), EngineError> {
    if stats.v_total.is_zero() {
        return Err(EngineError::NoAbsorption);
    }
    let total = Rational::from(stats.v_total.clone());
    let ratio = |x: &BigUint| {
        Rational::from(x.clone())
            .checked_div(&total)
            .expect("total is nonzero")
    };
    Ok((stats.w.iter().map(ratio).collect(), stats.v.iter().map(ratio).collect()))
}

/// Mutable run state with fast counters; converted to [`RunStats`] at the end.
pub(crate) struct Machine<'a> {
    chain: &'a IntegerChain,
    pub(crate) counts: Vec<u64>,
    absorbed: Vec<u128>,
    firings: Vec<u64>,
    adds: u64,
    moves: u64,
    budget: u64,
}

impl<'a> Machine<'a> {
    pub(crate) fn new(chain: &'a IntegerChain, counts: Vec<u64>, budget: u64) -> Self {
        Machine {
            chain,
            counts,
            absorbed: vec![0; chain.absorbing_count()],
            firings: vec![0; chain.transient_count()],
            adds: 0,
            moves: 0,
            budget,
        }
    }

    fn tick(&mut self) -> Result<(), EngineError> {
        if self.moves >= self.budget {
            return Err(EngineError::BudgetExhausted {
                budget: self.budget,
            });
        }
        self.moves += 1;
        Ok(())
    }

    fn fire(&mut self, p: usize) {
        let chain = self.chain;
        self.counts[p] -= chain.quota(p);
        for e in chain.edges(p) {
            match e.target {
                Slot::Transient(t) => self.counts[t] += e.chips,
                Slot::Absorbing(a) => self.absorbed[a] += u128::from(e.chips),
            }
        }
        self.firings[p] += 1;
    }

    /// Fires until nothing can fire.
    pub(crate) fn quiesce<S, O>(&mut self, schedule: &mut S, observer: &mut O) -> Result<(), EngineError>
    where
        S: FiringSchedule + ?Sized,
        O: MoveObserver + ?Sized,
    {
        while let Some(p) = schedule.next(&self.counts, self.chain.quotas()) {
            debug_assert!(self.counts[p] >= self.chain.quota(p));
            self.tick()?;
            self.fire(p);
            observer.observe(Move::Fire(p));
        }
        Ok(())
    }

    /// Type-2 moves on `u` until it holds `r_u`. Caller guarantees quiescence.
    pub(crate) fn refill<O>(&mut self, u: usize, observer: &mut O) -> Result<(), EngineError>
    where
        O: MoveObserver + ?Sized,
    {
        while self.counts[u] < self.chain.quota(u) {
            self.add(u, observer)?;
        }
        Ok(())
    }

    pub(crate) fn add<O>(&mut self, u: usize, observer: &mut O) -> Result<(), EngineError>
    where
        O: MoveObserver + ?Sized,
    {
        self.tick()?;
        self.counts[u] += 1;
        self.adds += 1;
        observer.observe(Move::AddChip);
        Ok(())
    }

    pub(crate) fn adds(&self) -> u64 {
        self.adds
    }

    /// Quiesce and refill repeatedly until the checkpoint equals `target`.
    pub(crate) fn cycle_to<S, O>(
        &mut self,
        u: usize,
        target: &[u64],
        schedule: &mut S,
        observer: &mut O,
    ) -> Result<(), EngineError>
    where
        S: FiringSchedule + ?Sized,
        O: MoveObserver + ?Sized,
    {
        loop {
            self.quiesce(schedule, observer)?;
            self.refill(u, observer)?;
            if self.counts == target {
                return Ok(());
            }
        }
    }

    pub(crate) fn stats(&self, start: usize) -> RunStats {
        let chain = self.chain;
        let firings: Vec<BigUint> = self.firings.iter().map(|&f| BigUint::from(f)).collect();
        let w = firings
            .iter()
            .enumerate()
            .map(|(p, f)| f * chain.quota(p))
            .collect();
        let v: Vec<BigUint> = self.absorbed.iter().map(|&a| BigUint::from(a)).collect();
        RunStats {
            start,
            firings,
            w,
            v_total: v.iter().sum(),
            v,
            m: BigUint::from(self.adds),
            moves: self.moves,
        }
    }

    /// Current configuration on top of `base`'s absorbing counts.
    pub(crate) fn config(&self, base: &ChipConfig) -> ChipConfig {
        ChipConfig {
            transient: self.counts.clone(),
            absorbing: base
                .absorbing
                .iter()
                .zip(&self.absorbed)
                .map(|(b, &a)| b + BigUint::from(a))
                .collect(),
        }
    }
}

/// Fires under `schedule` until no state can fire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quiescence {
    pub config: ChipConfig,
    /// Firings per transient position.
    pub firings: Vec<u64>,
    pub moves: Vec<Move>,
}

pub fn quiesce<S: FiringSchedule + ?Sized>(
    config: &ChipConfig,
    chain: &IntegerChain,
    schedule: &mut S,
    budget: u64,
) -> Result<Quiescence, EngineError> {
    check_len("transient", chain.transient_count(), config.transient.len())?;
    check_len("absorbing", chain.absorbing_count(), config.absorbing.len())?;
    let mut machine = Machine::new(chain, config.transient.clone(), budget);
    let mut moves = Vec::new();
    machine.quiesce(schedule, &mut moves)?;
    Ok(Quiescence {
        config: machine.config(config),
        firings: machine.firings.clone(),
        moves,
    })
}

/// Outcome of one abacus cycle from the critical loading.
#[derive(Debug, Clone)]
pub struct EngelRun {
    pub stats: RunStats,
    pub trace: Trace,
    pub final_config: ChipConfig,
}

pub fn run_engel(chain: &IntegerChain, start: usize, budget: u64) -> Result<EngelRun, EngineError> {
    run_engel_with(chain, start, budget, &mut LowestFirst, DEFAULT_TRACE_CAP)
}

/// [`run_engel`] with an explicit schedule and trace cap.
pub fn run_engel_with<S: FiringSchedule + ?Sized>(
    chain: &IntegerChain,
    start: usize,
    budget: u64,
    schedule: &mut S,
    trace_cap: usize,
) -> Result<EngelRun, EngineError> {
    let mut trace = Trace::new(critical_loading(chain, start)?, transient_pos(chain, start)?, trace_cap);
    let (stats, final_config) = run_engel_observed(chain, start, budget, schedule, &mut trace)?;
    Ok(EngelRun {
        stats,
        trace,
        final_config,
    })
}

/// Runs the abacus cycle and streams every move to `observer`.
pub fn run_engel_observed<S, O>(
    chain: &IntegerChain,
    start: usize,
    budget: u64,
    schedule: &mut S,
    observer: &mut O,
) -> Result<(RunStats, ChipConfig), EngineError>
where
    S: FiringSchedule + ?Sized,
    O: MoveObserver + ?Sized,
{
    let critical = critical_loading(chain, start)?;
    let u = transient_pos(chain, start)?;
    let mut machine = Machine::new(chain, critical.transient.clone(), budget);
    machine.cycle_to(u, &critical.transient, schedule, observer)?;
    Ok((machine.stats(start), machine.config(&critical)))
}

/// `N` (transient by transient) and `B` (transient by absorbing) with rows
/// and columns in ascending label order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultMatrices {
    pub n: RationalMatrix,
    pub b: RationalMatrix,
    pub transient: Vec<usize>,
    pub absorbing: Vec<usize>,
}

/// Abacus answer for a single start state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowSolution {
    pub stats: RunStats,
    pub n_row: Vec<Rational>,
    pub b_row: Vec<Rational>,
}

/// Runs the abacus for each listed start state, in parallel.
pub fn solve_rows(chain: &IntegerChain, starts: &[usize], budget: u64) -> Result<Vec<RowSolution>, EngineError> {
    starts
        .par_iter()
        .map(|&start| {
            let annotate = |e: EngineError| EngineError::Run {
                start,
                source: Box::new(e),
            };
            let (stats, _) = run_engel_observed(chain, start, budget, &mut LowestFirst, &mut ())
                .map_err(annotate)?;
            let (n_row, b_row) = stats_to_row(&stats).map_err(annotate)?;
            Ok(RowSolution { stats, n_row, b_row })
        })
        .collect()
}

/// Full `N` and `B` from one abacus run per transient state.
pub fn solve_all(chain: &IntegerChain, budget: u64) -> Result<ResultMatrices, EngineError> {
    let rows = solve_rows(chain, chain.transient_labels(), budget)?;
    let n = rows.iter().map(|r| r.n_row.clone()).collect();
    let b = rows.iter().map(|r| r.b_row.clone()).collect();
    Ok(ResultMatrices {
        n: RationalMatrix::from_rows(n).expect("rows have one entry per transient state"),
        b: RationalMatrix::from_rows(b).expect("rows have one entry per absorbing state"),
        transient: chain.transient_labels().to_vec(),
        absorbing: chain.absorbing_labels().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{integerize, parse_chain};
    use crate::testutil::{big, paper_chain, qs};

    fn config(chain: &IntegerChain, by_label: &[u64]) -> ChipConfig {
        let t = chain.transient_labels().iter().map(|&l| by_label[l]).collect();
        let a = chain
            .absorbing_labels()
            .iter()
            .map(|&l| BigUint::from(by_label[l]))
            .collect();
        ChipConfig::new(chain, t, a).unwrap()
    }

    fn labels(chain: &IntegerChain, c: &ChipConfig) -> Vec<u64> {
        c.by_label(chain).iter().map(|x| u64::try_from(x).unwrap()).collect()
    }

    #[test]
    fn critical_loadings() {
        let chain = paper_chain();
        assert_eq!(critical_loading(&chain, 1).unwrap().transient(), &[3, 2]);
        assert_eq!(critical_loading(&chain, 2).unwrap().transient(), &[2, 3]);
        assert_eq!(critical_loading(&chain, 0), Err(EngineError::NotTransient { label: 0 }));
        let single = integerize(&parse_chain("states: 2\nabsorbing: 1\nrow 0: 0:3/4 1:1/4").unwrap()).unwrap();
        assert_eq!(critical_loading(&single, 0).unwrap().transient(), &[4]);
    }

    #[test]
    fn single_moves_match_table() {
        let chain = paper_chain();
        let c = config(&chain, &[0, 3, 2, 0]);
        let c = c.fire(&chain, 1).unwrap();
        assert_eq!(labels(&chain, &c), vec![1, 0, 4, 0]);
        let c = c.fire(&chain, 2).unwrap();
        assert_eq!(labels(&chain, &c), vec![1, 1, 1, 2]);
        let c = c.add_chip(&chain, 1).unwrap();
        assert_eq!(labels(&chain, &c), vec![1, 2, 1, 2]);
        let c = c.add_chip(&chain, 1).unwrap();
        assert_eq!(labels(&chain, &c), vec![1, 3, 1, 2]);
        let c = config(&chain, &[2, 2, 0, 4]).add_chip(&chain, 1).unwrap();
        assert_eq!(labels(&chain, &c), vec![2, 3, 0, 4]);
    }

    #[test]
    fn illegal_moves() {
        let chain = paper_chain();
        let c = config(&chain, &[0, 2, 2, 0]);
        assert_eq!(
            c.fire(&chain, 1),
            Err(EngineError::IllegalFire { label: 1, have: 2, need: 3 })
        );
        assert_eq!(c.fire(&chain, 3), Err(EngineError::NotTransient { label: 3 }));
        let c = config(&chain, &[0, 1, 3, 0]);
        assert_eq!(c.add_chip(&chain, 1), Err(EngineError::IllegalAdd { fireable: 2 }));
    }

    #[test]
    fn self_loop_firing() {
        // r = 2, r_00 = 1, r_01 = 1
        let chain = integerize(&parse_chain("states: 2\nabsorbing: 1\nrow 0: 0:1/2 1:1/2").unwrap()).unwrap();
        let c = config(&chain, &[2, 0]).fire(&chain, 0).unwrap();
        assert_eq!(labels(&chain, &c), vec![1, 1]);
    }

    #[test]
    fn quiesce_examples() {
        let chain = paper_chain();
        let out = quiesce(&config(&chain, &[0, 3, 2, 0]), &chain, &mut LowestFirst, 100).unwrap();
        assert_eq!(labels(&chain, &out.config), vec![1, 1, 1, 2]);
        assert_eq!(out.firings, vec![1, 1]);
        assert_eq!(out.moves, vec![Move::Fire(0), Move::Fire(1)]);

        let out = quiesce(&config(&chain, &[1, 3, 1, 2]), &chain, &mut LowestFirst, 100).unwrap();
        assert_eq!(labels(&chain, &out.config), vec![2, 1, 0, 4]);
        assert_eq!(out.firings, vec![1, 1]);

        let still = config(&chain, &[5, 2, 2, 9]);
        let out = quiesce(&still, &chain, &mut LowestFirst, 100).unwrap();
        assert_eq!(out.config, still);
        assert_eq!(out.firings, vec![0, 0]);
        assert!(out.moves.is_empty());
    }

    #[test]
    fn quiesce_budget_guard() {
        let chain = paper_chain();
        let err = quiesce(&config(&chain, &[0, 3, 2, 0]), &chain, &mut LowestFirst, 1).unwrap_err();
        assert_eq!(err, EngineError::BudgetExhausted { budget: 1 });
    }

    #[test]
    fn worked_example_run() {
        let chain = paper_chain();
        let run = run_engel(&chain, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(run.stats.w, big(&[9, 6]));
        assert_eq!(run.stats.v, big(&[3, 4]));
        assert_eq!(run.stats.v_total, BigUint::from(7u32));
        assert_eq!(run.stats.m, BigUint::from(7u32));
        assert_eq!(run.stats.moves, 12);
        assert_eq!(run.final_config.transient(), &[3, 2]);
        assert_eq!(labels(&chain, &run.final_config), vec![3, 3, 2, 4]);
        assert_eq!(run.trace.len(), 12);
        use Move::*;
        assert_eq!(
            run.trace.moves(),
            &[Fire(0), Fire(1), AddChip, AddChip, Fire(0), Fire(1), AddChip, AddChip, Fire(0), AddChip, AddChip, AddChip]
        );
    }

    #[test]
    fn worked_example_other_start() {
        let chain = paper_chain();
        let run = run_engel(&chain, 2, DEFAULT_BUDGET).unwrap();
        let (n, b) = stats_to_row(&run.stats).unwrap();
        assert_eq!(n, qs(&["3/7", "9/7"]));
        assert_eq!(b, qs(&["1/7", "6/7"]));
        assert_eq!(run.final_config.transient(), &[2, 3]);
    }

    #[test]
    fn single_transient_run() {
        let chain = integerize(&parse_chain("states: 2\nabsorbing: 1\nrow 0: 1:1/1").unwrap()).unwrap();
        let run = run_engel(&chain, 0, 100).unwrap();
        assert_eq!(run.stats.w, big(&[1]));
        assert_eq!(run.stats.v, big(&[1]));
        assert_eq!(run.stats.m, BigUint::from(1u32));
        assert_eq!(run.trace.moves(), &[Move::Fire(0), Move::AddChip]);
    }

    #[test]
    fn row_extraction() {
        let stats = RunStats {
            start: 1,
            firings: big(&[3, 2]),
            w: big(&[9, 6]),
            v: big(&[3, 4]),
            v_total: BigUint::from(7u32),
            m: BigUint::from(7u32),
            moves: 12,
        };
        let (n, b) = stats_to_row(&stats).unwrap();
        assert_eq!(n, qs(&["9/7", "6/7"]));
        assert_eq!(b, qs(&["3/7", "4/7"]));
        assert_eq!(b.iter().sum::<Rational>(), Rational::one());

        let one = RunStats { w: big(&[1]), v: big(&[1]), v_total: BigUint::from(1u32), ..stats.clone() };
        assert_eq!(stats_to_row(&one).unwrap(), (qs(&["1"]), qs(&["1"])));

        let none = RunStats { v_total: BigUint::zero(), ..stats };
        assert_eq!(stats_to_row(&none), Err(EngineError::NoAbsorption));
    }

    #[test]
    fn solve_all_examples() {
        let m = solve_all(&paper_chain(), DEFAULT_BUDGET).unwrap();
        assert_eq!(m.n, RationalMatrix::from_strs(&[&["9/7", "6/7"], &["3/7", "9/7"]]));
        assert_eq!(m.b, RationalMatrix::from_strs(&[&["3/7", "4/7"], &["1/7", "6/7"]]));

        let single = integerize(&parse_chain("states: 2\nabsorbing: 1\nrow 0: 1:1/1").unwrap()).unwrap();
        let m = solve_all(&single, 100).unwrap();
        assert_eq!(m.n, RationalMatrix::from_strs(&[&["1"]]));
        assert_eq!(m.b, RationalMatrix::from_strs(&[&["1"]]));

        let sym = integerize(&parse_chain(crate::fixtures::SYMMETRIC_WALK).unwrap()).unwrap();
        let m = solve_all(&sym, DEFAULT_BUDGET).unwrap();
        assert_eq!(m.n, RationalMatrix::from_strs(&[&["4/3", "2/3"], &["2/3", "4/3"]]));
        assert_eq!(m.b, RationalMatrix::from_strs(&[&["2/3", "1/3"], &["1/3", "2/3"]]));
    }

    #[test]
    fn solve_all_annotates_failing_start() {
        let err = solve_all(&paper_chain(), 5).unwrap_err();
        assert!(matches!(err, EngineError::Run { start: 1, .. }), "{err:?}");
        assert_eq!(err.root(), &EngineError::BudgetExhausted { budget: 5 });
    }

    #[test]
    fn trace_rendering_is_table_shaped() {
        let chain = paper_chain();
        let run = run_engel(&chain, 1, DEFAULT_BUDGET).unwrap();
        let text = run.trace.render(&chain);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 14);
        assert_eq!(lines[0], "State  0  1  2  3  Move");
        assert_eq!(lines[1], "Start  0  3  2  0  1_1");
        assert_eq!(lines[2], "       1  0  4  0  1_2");
        assert_eq!(lines[13], "Final  3  3  2  4");
    }

    #[test]
    fn truncated_trace_keeps_count() {
        let chain = paper_chain();
        let run = run_engel_with(&chain, 1, DEFAULT_BUDGET, &mut LowestFirst, 4).unwrap();
        assert_eq!(run.trace.moves().len(), 4);
        assert_eq!(run.trace.len(), 12);
        assert!(run.trace.is_truncated());
        assert!(run.trace.render(&chain).ends_with("(8 further moves not stored)\n"));
    }

    #[test]
    fn flow_balance_on_worked_example() {
        let chain = paper_chain();
        for &u in chain.transient_labels() {
            let stats = run_engel(&chain, u, DEFAULT_BUDGET).unwrap().stats;
            crate::testutil::assert_flow_balance(&chain, &stats);
        }
    }
}
