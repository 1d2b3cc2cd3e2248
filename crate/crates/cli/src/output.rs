//! Output documents and their text rendering.
//!
//! Exact values are always fraction strings (`"9/7"`, `"1"`). Fields ending
//! in `_approx` hold 15-significant-digit decimal renderings for display
//! only.

use std::fmt::Write as _;

use abacus_core::chain::{canonical_form, ChainSpec, IntegerChain};
use abacus_core::engine::{ResultMatrices, RowSolution};
use abacus_core::matrix::MatrixError;
use abacus_core::oracle::{absorption_matrix, fundamental_matrix};
use abacus_core::simulate::{SimulationEstimate, BATCH_SIZE};
use abacus_core::verify::ChainReport;
use abacus_core::{Rational, RationalMatrix};
use serde::Serialize;

use crate::Method;

const APPROX_DIGITS: usize = 15;

fn exact(v: &[Rational]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn approx(v: &[Rational]) -> Vec<String> {
    v.iter().map(|x| x.to_decimal(APPROX_DIGITS)).collect()
}

#[derive(Debug, Serialize)]
pub struct ChainSummary {
    pub states: usize,
    pub transient: Vec<usize>,
    pub absorbing: Vec<usize>,
}

impl ChainSummary {
    fn of(chain: &IntegerChain) -> Self {
        ChainSummary {
            states: chain.state_count(),
            transient: chain.transient_labels().to_vec(),
            absorbing: chain.absorbing_labels().to_vec(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunDocument {
    pub moves: u64,
    pub firings: Vec<String>,
    pub w: Vec<String>,
    pub v: Vec<String>,
    pub m: String,
    pub v_total: String,
}

#[derive(Debug, Serialize)]
pub struct RowDocument {
    pub start: usize,
    #[serde(rename = "N")]
    pub n: Vec<String>,
    #[serde(rename = "B")]
    pub b: Vec<String>,
    #[serde(rename = "N_approx")]
    pub n_approx: Vec<String>,
    #[serde(rename = "B_approx")]
    pub b_approx: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunDocument>,
}

#[derive(Debug, Serialize)]
pub struct Mismatch {
    pub start: usize,
    pub abacus_n: Vec<String>,
    pub abacus_b: Vec<String>,
    pub matrix_n: Vec<String>,
    pub matrix_b: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct SolveDocument {
    pub chain: ChainSummary,
    pub method: &'static str,
    /// Whether both methods produced identical rows; absent for one method.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agree: Option<bool>,
    pub rows: Vec<RowDocument>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mismatches: Vec<Mismatch>,
}

impl SolveDocument {
    pub fn new(
        chain: &IntegerChain,
        method: Method,
        starts: &[usize],
        abacus: Option<&[RowSolution]>,
        matrix: Option<&ResultMatrices>,
    ) -> Self {
        let matrix_row = |u: usize| -> (Vec<Rational>, Vec<Rational>) {
            let m = matrix.expect("matrix result present");
            let i = m.transient.iter().position(|&t| t == u).expect("start is transient");
            (m.n.row(i).to_vec(), m.b.row(i).to_vec())
        };
        let mut rows = Vec::new();
        let mut mismatches = Vec::new();
        for (k, &u) in starts.iter().enumerate() {
            let (n, b, run) = match abacus {
                Some(sol) => {
                    let s = &sol[k];
                    let run = RunDocument {
                        moves: s.stats.moves,
                        firings: s.stats.firings.iter().map(ToString::to_string).collect(),
                        w: s.stats.w.iter().map(ToString::to_string).collect(),
                        v: s.stats.v.iter().map(ToString::to_string).collect(),
                        m: s.stats.m.to_string(),
                        v_total: s.stats.v_total.to_string(),
                    };
                    if matrix.is_some() {
                        let (mn, mb) = matrix_row(u);
                        if mn != s.n_row || mb != s.b_row {
                            mismatches.push(Mismatch {
                                start: u,
                                abacus_n: exact(&s.n_row),
                                abacus_b: exact(&s.b_row),
                                matrix_n: exact(&mn),
                                matrix_b: exact(&mb),
                            });
                        }
                    }
                    (s.n_row.clone(), s.b_row.clone(), Some(run))
                }
                None => {
                    let (n, b) = matrix_row(u);
                    (n, b, None)
                }
            };
            rows.push(RowDocument {
                start: u,
                n: exact(&n),
                b: exact(&b),
                n_approx: approx(&n),
                b_approx: approx(&b),
                run,
            });
        }
        SolveDocument {
            chain: ChainSummary::of(chain),
            method: match method {
                Method::Abacus => "abacus",
                Method::Matrix => "matrix",
                Method::Both => "both",
            },
            agree: (method == Method::Both).then_some(mismatches.is_empty()),
            rows,
            mismatches,
        }
    }
}

fn labels(v: &[usize]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Right-aligned grid with row and column headers.
fn table(corner: &str, cols: &[String], rows: &[(String, Vec<String>)]) -> String {
    let mut widths: Vec<usize> = cols.iter().map(String::len).collect();
    let mut head = corner.len();
    for (name, cells) in rows {
        head = head.max(name.len());
        for (w, c) in widths.iter_mut().zip(cells) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |name: &str, cells: &[String]| {
        let mut s = format!("{name:<head$}");
        for (w, c) in widths.iter().zip(cells) {
            let _ = write!(s, "  {c:>w$}");
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(corner, cols);
    for (name, cells) in rows {
        line(name, cells);
    }
    out
}

fn str_labels(v: &[usize]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

pub fn solve_text(doc: &SolveDocument, decimals: bool) -> String {
    let mut out = String::new();
    let c = &doc.chain;
    let _ = writeln!(
        out,
        "chain: {} states; transient {}; absorbing {}",
        c.states,
        labels(&c.transient),
        labels(&c.absorbing)
    );
    let verdict = match doc.agree {
        Some(true) => " (abacus and matrix results agree)",
        Some(false) => " (MISMATCH between abacus and matrix results)",
        None => "",
    };
    let _ = writeln!(out, "method: {}{verdict}", doc.method);

    let grid = |pick: &dyn Fn(&RowDocument) -> &Vec<String>| -> Vec<(String, Vec<String>)> {
        doc.rows.iter().map(|r| (r.start.to_string(), pick(r).clone())).collect()
    };
    out.push_str("\nN (expected visits)\n");
    out.push_str(&table("", &str_labels(&c.transient), &grid(&|r| &r.n)));
    out.push_str("\nB (absorption probabilities)\n");
    out.push_str(&table("", &str_labels(&c.absorbing), &grid(&|r| &r.b)));
    if decimals {
        out.push_str("\nN, approximate\n");
        out.push_str(&table("", &str_labels(&c.transient), &grid(&|r| &r.n_approx)));
        out.push_str("\nB, approximate\n");
        out.push_str(&table("", &str_labels(&c.absorbing), &grid(&|r| &r.b_approx)));
    }
    if doc.rows.iter().any(|r| r.run.is_some()) {
        out.push_str("\nabacus runs\n");
        let cols: Vec<String> = ["moves", "m", "v_total", "firings"].map(String::from).to_vec();
        let rows: Vec<(String, Vec<String>)> = doc
            .rows
            .iter()
            .filter_map(|r| {
                let run = r.run.as_ref()?;
                let firings = c
                    .transient
                    .iter()
                    .zip(&run.firings)
                    .map(|(l, f)| format!("{l}:{f}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                Some((r.start.to_string(), vec![run.moves.to_string(), run.m.clone(), run.v_total.clone(), firings]))
            })
            .collect();
        out.push_str(&table("start", &cols, &rows));
    }
    for m in &doc.mismatches {
        let _ = writeln!(
            out,
            "\nmismatch at start {}: abacus N {:?} B {:?}, matrix N {:?} B {:?}",
            m.start, m.abacus_n, m.abacus_b, m.matrix_n, m.matrix_b
        );
    }
    out
}

#[derive(Debug, Serialize)]
pub struct OracleDocument {
    pub transient: Vec<usize>,
    pub absorbing: Vec<usize>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<String>>,
    #[serde(rename = "R")]
    pub r: Vec<Vec<String>>,
    #[serde(rename = "N")]
    pub n: Vec<Vec<String>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<String>>,
}

fn strings(m: &RationalMatrix) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| exact(r)).collect()
}

pub fn oracle_document(spec: &ChainSpec) -> Result<OracleDocument, MatrixError> {
    let cf = canonical_form(spec);
    let n = fundamental_matrix(&cf.q)?;
    let b = absorption_matrix(&n, &cf.r)?;
    Ok(OracleDocument {
        transient: cf.transient.clone(),
        absorbing: cf.absorbing.clone(),
        q: strings(&cf.q),
        r: strings(&cf.r),
        n: strings(&n),
        b: strings(&b),
    })
}

pub fn oracle_text(doc: &OracleDocument) -> String {
    let t = str_labels(&doc.transient);
    let a = str_labels(&doc.absorbing);
    let rows = |m: &Vec<Vec<String>>| -> Vec<(String, Vec<String>)> { t.iter().cloned().zip(m.iter().cloned()).collect() };
    let mut out = String::new();
    for (title, cols, m) in [
        ("Q (transient to transient)", &t, &doc.q),
        ("R (transient to absorbing)", &a, &doc.r),
        ("N = (I - Q)^-1", &t, &doc.n),
        ("B = N R", &a, &doc.b),
    ] {
        if !out.is_empty() {
            out.push('\n');
        }
        let _ = writeln!(out, "{title}");
        out.push_str(&table("", cols, &rows(m)));
    }
    out
}

#[derive(Debug, Serialize)]
pub struct EstimateLine {
    pub state: usize,
    pub estimate: String,
    pub std_error: String,
    pub exact: String,
    pub exact_approx: String,
}

#[derive(Debug, Serialize)]
pub struct SimulationDocument {
    pub start: usize,
    pub trials: u64,
    pub seed: u64,
    pub generator: String,
    pub visits: Vec<EstimateLine>,
    pub absorption: Vec<EstimateLine>,
}

pub fn simulation_document(est: &SimulationEstimate, exact: &ResultMatrices) -> SimulationDocument {
    let row = exact.transient.iter().position(|&t| t == est.start).expect("start is transient");
    let lines = |labels: &[usize], values: Vec<f64>, errors: Vec<f64>, truth: &[Rational]| -> Vec<EstimateLine> {
        labels
            .iter()
            .zip(values)
            .zip(errors)
            .zip(truth)
            .map(|(((&state, v), e), x)| EstimateLine {
                state,
                estimate: format!("{v:.6}"),
                std_error: format!("{e:.6}"),
                exact: x.to_string(),
                exact_approx: x.to_decimal(APPROX_DIGITS),
            })
            .collect()
    };
    SimulationDocument {
        start: est.start,
        trials: est.trials,
        seed: est.seed,
        generator: format!("ChaCha20, seed_from_u64(seed), stream = batch index, {BATCH_SIZE} trials per batch"),
        visits: lines(&est.transient, est.mean_visits(), est.visit_std_errors(), exact.n.row(row)),
        absorption: lines(&est.absorbing, est.absorption_frequencies(), est.absorption_std_errors(), exact.b.row(row)),
    }
}

pub fn simulation_text(doc: &SimulationDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "start {}; trials {}; seed {}", doc.start, doc.trials, doc.seed);
    let _ = writeln!(out, "generator: {}", doc.generator);
    let cols: Vec<String> = ["estimate", "std.err", "exact", "exact (approx)"].map(String::from).to_vec();
    let rows = |lines: &[EstimateLine]| -> Vec<(String, Vec<String>)> {
        lines
            .iter()
            .map(|l| {
                (
                    l.state.to_string(),
                    vec![l.estimate.clone(), l.std_error.clone(), l.exact.clone(), l.exact_approx.clone()],
                )
            })
            .collect()
    };
    out.push_str("\nmean visits\n");
    out.push_str(&table("state", &cols, &rows(&doc.visits)));
    out.push_str("\nabsorption frequency\n");
    out.push_str(&table("state", &cols, &rows(&doc.absorption)));
    out
}

#[derive(Debug, Serialize)]
pub struct VerifyDocument {
    pub passed: bool,
    pub chains: Vec<ChainReport>,
}

impl VerifyDocument {
    pub fn new(chains: Vec<ChainReport>) -> Self {
        VerifyDocument {
            passed: chains.iter().all(|c| c.passed),
            chains,
        }
    }
}

pub fn verify_text(doc: &VerifyDocument) -> String {
    let mut out = String::new();
    for c in &doc.chains {
        let _ = writeln!(
            out,
            "{}: {} (transient {}; absorbing {})",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            labels(&c.transient),
            labels(&c.absorbing)
        );
        for p in &c.properties {
            let _ = writeln!(out, "  {:<20} {}", p.name, if p.passed { "pass" } else { "FAIL" });
            for f in &p.failures {
                let _ = writeln!(out, "    {}: {f}", c.name);
            }
        }
        for s in &c.starts {
            let counts: Vec<String> = s.checkpoint_counts.iter().map(ToString::to_string).collect();
            let _ = writeln!(
                out,
                "  start {}: cycle {} moves, m = {}, checkpoints before repeat [{}] (bound {})",
                s.start,
                s.cycle_moves,
                s.m,
                counts.join(", "),
                s.checkpoint_bound
            );
        }
    }
    let passed = doc.chains.iter().filter(|c| c.passed).count();
    let _ = writeln!(out, "summary: {passed}/{} chains passed", doc.chains.len());
    out
}
