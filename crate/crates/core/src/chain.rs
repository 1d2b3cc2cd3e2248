//! Absorbing Markov chains: the text format, validation, the integer chip
//! form used by the abacus, and the `Q`/`R` canonical blocks.
//!
//! Chain files are line oriented; `#` starts a comment:
//!
//! ```text
//! states: 4
//! absorbing: 0 3
//! start: 1
//! row 1: 0:1/3 2:2/3
//! row 2: 1:1/3 3:2/3
//! ```
//!
//! `states: s` declares the labels `0..s`. Every label not listed as
//! absorbing is transient and needs exactly one `row` line.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::arith::{lcm_all, Rational};
use crate::matrix::RationalMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}unknown state {label}", at(.line))]
    UnknownState { line: Option<usize>, label: usize },
    #[error("{}duplicate row for state {state}", at(.line))]
    DuplicateRow { line: Option<usize>, state: usize },
    #[error("{}state {state} is absorbing and cannot have outgoing transitions", at(.line))]
    RowForAbsorbing { line: Option<usize>, state: usize },
    #[error("{}row {state} lists target {target} more than once", at(.line))]
    DuplicateTarget {
        line: Option<usize>,
        state: usize,
        target: usize,
    },
    #[error("{}row {state} has negative probability {value} to {target}", at(.line))]
    NegativeProbability {
        line: Option<usize>,
        state: usize,
        target: usize,
        value: Rational,
    },
    #[error("row {state} sums to {sum}, not 1")]
    RowSum { state: usize, sum: Rational },
    #[error("transient state {state} has no row")]
    MissingRow { state: usize },
    #[error("chain has no transient state")]
    NoTransient,
    #[error("chain has no absorbing state")]
    NoAbsorbing,
    #[error("start state {state} is not transient")]
    StartNotTransient { state: usize },
    #[error("missing `states:` declaration")]
    MissingStates,
    #[error("no absorbing state is reachable from transient states {states:?}")]
    NonAbsorbing { states: Vec<usize> },
    #[error("chip quota of state {state} does not fit in 64 bits")]
    QuotaOverflow { state: usize },
}

fn at(line: &Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

/// A finite chain with its transient/absorbing partition and exact rows.
///
/// Zero-probability entries are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainSpec {
    state_count: usize,
    absorbing: BTreeSet<usize>,
    rows: BTreeMap<usize, BTreeMap<usize, Rational>>,
    start: Option<usize>,
}

impl ChainSpec {
    /// Builds a chain and checks its structural invariants. Absorption
    /// reachability is checked separately by [`validate_absorbing`].
    pub fn new<A, R, E>(
        state_count: usize,
        absorbing: A,
        rows: R,
        start: Option<usize>,
    ) -> Result<Self, ChainError>
    where
        A: IntoIterator<Item = usize>,
        R: IntoIterator<Item = (usize, E)>,
        E: IntoIterator<Item = (usize, Rational)>,
    {
        let known = |label: usize| {
            if label < state_count {
                Ok(label)
            } else {
                Err(ChainError::UnknownState { line: None, label })
            }
        };
        let absorbing = absorbing
            .into_iter()
            .map(known)
            .collect::<Result<BTreeSet<_>, _>>()?;

        let mut table = BTreeMap::new();
        for (state, entries) in rows {
            known(state)?;
            if absorbing.contains(&state) {
                return Err(ChainError::RowForAbsorbing { line: None, state });
            }
            let mut row = BTreeMap::new();
            let mut seen = BTreeSet::new();
            for (target, p) in entries {
                known(target)?;
                if !seen.insert(target) {
                    return Err(ChainError::DuplicateTarget {
                        line: None,
                        state,
                        target,
                    });
                }
                if p.is_negative() {
                    return Err(ChainError::NegativeProbability {
                        line: None,
                        state,
                        target,
                        value: p,
                    });
                }
                if !p.is_zero() {
                    row.insert(target, p);
                }
            }
            if table.insert(state, row).is_some() {
                return Err(ChainError::DuplicateRow { line: None, state });
            }
        }
        Self::assemble(state_count, absorbing, table, start)
    }

    fn assemble(
        state_count: usize,
        absorbing: BTreeSet<usize>,
        rows: BTreeMap<usize, BTreeMap<usize, Rational>>,
        start: Option<usize>,
    ) -> Result<Self, ChainError> {
        if absorbing.is_empty() {
            return Err(ChainError::NoAbsorbing);
        }
        if absorbing.len() == state_count {
            return Err(ChainError::NoTransient);
        }
        for state in (0..state_count).filter(|s| !absorbing.contains(s)) {
            let row = rows.get(&state).ok_or(ChainError::MissingRow { state })?;
            let sum: Rational = row.values().sum();
            if !sum.is_one() {
                return Err(ChainError::RowSum { state, sum });
            }
        }
        if let Some(s) = start {
            if s >= state_count || absorbing.contains(&s) {
                return Err(ChainError::StartNotTransient { state: s });
            }
        }
        Ok(ChainSpec {
            state_count,
            absorbing,
            rows,
            start,
        })
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn start(&self) -> Option<usize> {
        self.start
    }

    pub fn is_absorbing(&self, label: usize) -> bool {
        self.absorbing.contains(&label)
    }

    pub fn is_transient(&self, label: usize) -> bool {
        label < self.state_count && !self.is_absorbing(label)
    }

    /// Transient labels in ascending order.
    pub fn transient_states(&self) -> Vec<usize> {
        self.rows.keys().copied().collect()
    }

    /// Absorbing labels in ascending order.
    pub fn absorbing_states(&self) -> Vec<usize> {
        self.absorbing.iter().copied().collect()
    }

    /// Nonzero transitions out of a transient state, by ascending target.
    pub fn row(&self, state: usize) -> Option<&BTreeMap<usize, Rational>> {
        self.rows.get(&state)
    }

    /// `p_ij`, including the implicit self-loop of absorbing states.
    pub fn probability(&self, from: usize, to: usize) -> Rational {
        if self.is_absorbing(from) {
            return if from == to {
                Rational::one()
            } else {
                Rational::zero()
            };
        }
        self.rows
            .get(&from)
            .and_then(|r| r.get(&to))
            .cloned()
            .unwrap_or_default()
    }
}

/// Writes the chain back out in the file grammar.
impl fmt::Display for ChainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states: {}", self.state_count)?;
        let abs: Vec<String> = self.absorbing.iter().map(ToString::to_string).collect();
        writeln!(f, "absorbing: {}", abs.join(" "))?;
        if let Some(s) = self.start {
            writeln!(f, "start: {s}")?;
        }
        for (state, row) in &self.rows {
            write!(f, "row {state}:")?;
            for (target, p) in row {
                write!(f, " {target}:{}/{}", p.numer(), p.denom())?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Whitespace-separated tokens with their 1-based character columns.
fn tokens(text: &str, base_col: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (ci, (bi, ch)) in text.char_indices().enumerate() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some((ci, bi)),
            (true, Some((c0, b0))) => {
                out.push((base_col + c0, &text[b0..bi]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some((c0, b0)) = start {
        out.push((base_col + c0, &text[b0..]));
    }
    out
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ChainError {
    ChainError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn parse_label(line: usize, column: usize, tok: &str) -> Result<usize, ChainError> {
    if tok.is_empty() || !tok.bytes().all(|b| b.is_ascii_digit()) {
        return Err(syntax(line, column, format!("expected a state label, found {tok:?}")));
    }
    tok.parse()
        .map_err(|_| syntax(line, column, format!("state label {tok} is too large")))
}

/// A parsed row's line and its `(column, target, line, probability)` entries.
type ParsedRow = (usize, Vec<(usize, usize, usize, Rational)>);

/// Parses chain-file text. Structural errors carry line numbers; the
/// absorbing-reachability check is left to [`validate_absorbing`].
pub fn parse_chain(text: &str) -> Result<ChainSpec, ChainError> {
    let mut state_count: Option<usize> = None;
    let mut absorbing: Option<(usize, BTreeSet<usize>)> = None;
    let mut start: Option<usize> = None;
    let mut rows: BTreeMap<usize, ParsedRow> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(colon) = content.find(':') else {
            let col = content.chars().take_while(|c| c.is_whitespace()).count() + 1;
            return Err(syntax(line, col, "expected `<keyword>: ...`"));
        };
        let head = &content[..colon];
        let body = &content[colon + 1..];
        let body_col = content[..colon + 1].chars().count() + 1;
        let head_toks = tokens(head, 1);
        let body_toks = tokens(body, body_col);
        let head_col = head_toks.first().map_or(1, |t| t.0);

        let keyword = head_toks.first().map(|t| t.1).unwrap_or("");
        if keyword != "states" && state_count.is_none() {
            return Err(syntax(line, head_col, "`states:` must come first"));
        }
        let check_label = |col: usize, tok: &str| -> Result<usize, ChainError> {
            let label = parse_label(line, col, tok)?;
            if label >= state_count.unwrap_or(0) {
                return Err(ChainError::UnknownState {
                    line: Some(line),
                    label,
                });
            }
            Ok(label)
        };

        match (keyword, head_toks.len()) {
            ("states", 1) => {
                if state_count.is_some() {
                    return Err(syntax(line, head_col, "duplicate `states:`"));
                }
                let [(col, tok)] = body_toks[..] else {
                    return Err(syntax(line, body_col, "`states:` takes one count"));
                };
                state_count = Some(parse_label(line, col, tok)?);
            }
            ("absorbing", 1) => {
                if absorbing.is_some() {
                    return Err(syntax(line, head_col, "duplicate `absorbing:`"));
                }
                let mut set = BTreeSet::new();
                for &(col, tok) in &body_toks {
                    set.insert(check_label(col, tok)?);
                }
                absorbing = Some((line, set));
            }
            ("start", 1) => {
                if start.is_some() {
                    return Err(syntax(line, head_col, "duplicate `start:`"));
                }
                let [(col, tok)] = body_toks[..] else {
                    return Err(syntax(line, body_col, "`start:` takes one label"));
                };
                start = Some(check_label(col, tok)?);
            }
            ("row", 2) => {
                let (col, tok) = head_toks[1];
                let state = check_label(col, tok)?;
                let mut entries = Vec::new();
                for &(col, tok) in &body_toks {
                    let Some((target, frac)) = tok.split_once(':') else {
                        return Err(syntax(line, col, format!("expected `<label>:<p>/<q>`, found {tok:?}")));
                    };
                    let target = check_label(col, target)?;
                    let frac_col = col + tok.find(':').map_or(0, |i| tok[..i].chars().count() + 1);
                    let p: Rational = frac
                        .parse()
                        .map_err(|e| syntax(line, frac_col, format!("bad probability: {e}")))?;
                    entries.push((col, target, line, p));
                }
                if rows.insert(state, (line, entries)).is_some() {
                    return Err(ChainError::DuplicateRow {
                        line: Some(line),
                        state,
                    });
                }
            }
            _ => {
                return Err(syntax(line, head_col, format!("unknown directive {:?}", head.trim())));
            }
        }
    }

    let state_count = state_count.ok_or(ChainError::MissingStates)?;
    let absorbing = absorbing.map(|a| a.1).unwrap_or_default();

    let mut table = BTreeMap::new();
    for (state, (line, entries)) in rows {
        if absorbing.contains(&state) {
            return Err(ChainError::RowForAbsorbing {
                line: Some(line),
                state,
            });
        }
        let mut row = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (_, target, line, p) in entries {
            if !seen.insert(target) {
                return Err(ChainError::DuplicateTarget {
                    line: Some(line),
                    state,
                    target,
                });
            }
            if p.is_negative() {
                return Err(ChainError::NegativeProbability {
                    line: Some(line),
                    state,
                    target,
                    value: p,
                });
            }
            if !p.is_zero() {
                row.insert(target, p);
            }
        }
        table.insert(state, row);
    }
    ChainSpec::assemble(state_count, absorbing, table, start)
}

/// Checks that every transient state reaches an absorbing state along
/// positive-probability edges. The error lists the offending states.
pub fn validate_absorbing(spec: &ChainSpec) -> Result<(), ChainError> {
    // reverse edges
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); spec.state_count];
    for (&from, row) in &spec.rows {
        for &to in row.keys() {
            preds[to].push(from);
        }
    }
    let mut reached = vec![false; spec.state_count];
    let mut queue: VecDeque<usize> = spec.absorbing.iter().copied().collect();
    for &a in &spec.absorbing {
        reached[a] = true;
    }
    while let Some(s) = queue.pop_front() {
        for &p in &preds[s] {
            if !reached[p] {
                reached[p] = true;
                queue.push_back(p);
            }
        }
    }
    let stuck: Vec<usize> = spec.rows.keys().copied().filter(|&s| !reached[s]).collect();
    if stuck.is_empty() {
        Ok(())
    } else {
        Err(ChainError::NonAbsorbing { states: stuck })
    }
}

/// Position of a label inside the transient or absorbing block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Transient(usize),
    Absorbing(usize),
}

/// `r_ij` chips sent to `target` each time the source fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub target: Slot,
    pub chips: u64,
}

/// The chain rewritten as chip quotas: transient state `i` fires with
/// `r_i` chips and sends `r_ij` of them to `j`, so that `p_ij = r_ij / r_i`.
///
/// Transient states are addressed by their position in ascending label
/// order, likewise absorbing states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerChain {
    transient: Vec<usize>,
    absorbing: Vec<usize>,
    slots: Vec<Slot>,
    quotas: Vec<u64>,
    edges: Vec<Vec<Edge>>,
}

impl IntegerChain {
    pub fn state_count(&self) -> usize {
        self.slots.len()
    }

    pub fn transient_count(&self) -> usize {
        self.transient.len()
    }

    pub fn absorbing_count(&self) -> usize {
        self.absorbing.len()
    }

    pub fn transient_labels(&self) -> &[usize] {
        &self.transient
    }

    pub fn absorbing_labels(&self) -> &[usize] {
        &self.absorbing
    }

    pub fn slot(&self, label: usize) -> Option<Slot> {
        self.slots.get(label).copied()
    }

    pub fn transient_position(&self, label: usize) -> Option<usize> {
        match self.slot(label)? {
            Slot::Transient(p) => Some(p),
            Slot::Absorbing(_) => None,
        }
    }

    pub fn label(&self, slot: Slot) -> usize {
        match slot {
            Slot::Transient(p) => self.transient[p],
            Slot::Absorbing(p) => self.absorbing[p],
        }
    }

    /// `r_i` for the transient state at `pos`.
    pub fn quota(&self, pos: usize) -> u64 {
        self.quotas[pos]
    }

    pub fn quotas(&self) -> &[u64] {
        &self.quotas
    }

    pub fn edges(&self, pos: usize) -> &[Edge] {
        &self.edges[pos]
    }

    /// `r_ii`, zero when the state has no self-loop.
    pub fn self_loop(&self, pos: usize) -> u64 {
        self.edges[pos]
            .iter()
            .find(|e| e.target == Slot::Transient(pos))
            .map_or(0, |e| e.chips)
    }

    /// `r_ij / r_i` recovered from the chip form.
    pub fn probability(&self, pos: usize, target: Slot) -> Rational {
        self.edges[pos]
            .iter()
            .find(|e| e.target == target)
            .map_or_else(Rational::zero, |e| {
                Rational::new(e.chips, self.quotas[pos]).expect("quota is positive")
            })
    }
}

/// Converts a validated chain to chip form with `r_i` the lcm of the row's
/// denominators.
pub fn integerize(spec: &ChainSpec) -> Result<IntegerChain, ChainError> {
    validate_absorbing(spec)?;
    let transient = spec.transient_states();
    let absorbing = spec.absorbing_states();
    let mut slots = vec![Slot::Absorbing(0); spec.state_count];
    for (p, &l) in transient.iter().enumerate() {
        slots[l] = Slot::Transient(p);
    }
    for (p, &l) in absorbing.iter().enumerate() {
        slots[l] = Slot::Absorbing(p);
    }

    let mut quotas = Vec::with_capacity(transient.len());
    let mut edges = Vec::with_capacity(transient.len());
    let mut total: u64 = 0;
    for &state in &transient {
        let row = &spec.rows[&state];
        let quota = lcm_all(row.values().map(Rational::denom)).expect("row sums to one so is non-empty");
        let overflow = || ChainError::QuotaOverflow { state };
        let r = quota.to_u64().ok_or_else(overflow)?;
        total = total.checked_add(r).ok_or_else(overflow)?;
        let row_edges = row
            .iter()
            .map(|(&target, p)| {
                let chips: BigInt = p.numer() * (&quota / p.denom());
                Edge {
                    target: slots[target],
                    chips: chips.to_u64().expect("r_ij <= r_i"),
                }
            })
            .collect();
        quotas.push(r);
        edges.push(row_edges);
    }
    // Transient totals stay below sum(r_i) + 1; absorbing counts are unbounded
    // and kept separately by the engine.
    total.checked_add(1).ok_or(ChainError::QuotaOverflow {
        state: *transient.last().expect("non-empty"),
    })?;

    Ok(IntegerChain {
        transient,
        absorbing,
        slots,
        quotas,
        edges,
    })
}

/// `Q` (transient to transient) and `R` (transient to absorbing) blocks with
/// rows and columns in ascending label order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub q: RationalMatrix,
    pub r: RationalMatrix,
    pub transient: Vec<usize>,
    pub absorbing: Vec<usize>,
}

pub fn canonical_form(spec: &ChainSpec) -> CanonicalForm {
    let transient = spec.transient_states();
    let absorbing = spec.absorbing_states();
    let mut q = RationalMatrix::zeros(transient.len(), transient.len());
    let mut r = RationalMatrix::zeros(transient.len(), absorbing.len());
    for (i, &from) in transient.iter().enumerate() {
        for (j, &to) in transient.iter().enumerate() {
            q[(i, j)] = spec.probability(from, to);
        }
        for (j, &to) in absorbing.iter().enumerate() {
            r[(i, j)] = spec.probability(from, to);
        }
    }
    CanonicalForm {
        q,
        r,
        transient,
        absorbing,
    }
}
