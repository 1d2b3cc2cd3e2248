//! Small reference chains.

/// Random walk on `0..=3` with drift: from 1 step down w.p. 1/3, from 2 step
/// up w.p. 2/3; the ends absorb.
pub const DRIFT_WALK: &str = "\
# random walk with drift, ends absorbing
states: 4
absorbing: 0 3
start: 1
row 1: 0:1/3 2:2/3
row 2: 1:1/3 3:2/3
";

/// Symmetric walk on `0..=3`, ends absorbing.
pub const SYMMETRIC_WALK: &str = "\
states: 4
absorbing: 0 3
row 1: 0:1/2 2:1/2
row 2: 1:1/2 3:1/2
";

/// One transient state that absorbs in a single step.
pub const ONE_STEP: &str = "\
states: 2
absorbing: 1
row 0: 1:1/1
";
