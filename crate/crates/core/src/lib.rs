//! Exact weighted model counting for pseudo-Boolean (PB) formulas.
//!
//! A PB constraint is an integer linear inequality or equality over Boolean
//! literals, `a_1 l_1 + ... + a_n l_n ▷ b` with `▷ ∈ {<, <=, =, >=, >}`.
//! This crate counts the weighted models of a conjunction of such
//! constraints without translating to CNF first: every constraint becomes an
//! algebraic decision diagram (ADD), and the count is obtained by a
//! variable-elimination loop that multiplies diagrams cluster by cluster and
//! sums variables out as early as possible.
//!
//! Module map:
//!
//! * [`formula`] — literals, constraints, formulas, weights, normalization
//!   and unit propagation.
//! * [`opb`] — OPB text format parsing/serialization plus a sidecar weights
//!   format.
//! * [`dd`] — the ADD kernel: canonical node store, product, projection.
//! * [`construct`] — constraint-to-ADD construction with interval
//!   memoization.
//! * [`heuristics`] — primal graph, variable orders (MCS, lexicographic
//!   BFS), constraint clustering.
//! * [`solver`] — a small complete PB satisfiability procedure.
//! * [`preprocess`] — backbone propagation and entailed-constraint deletion.
//! * [`engine`] — the counting loop tying everything together.
//! * [`cnf`] — counting-safe export to weighted DIMACS CNF.
//! * [`oracle`] — brute-force reference implementations used by tests.

pub mod cnf;
pub mod construct;
pub mod dd;
pub mod engine;
pub mod formula;
pub mod heuristics;
pub mod opb;
pub mod oracle;
pub mod preprocess;
pub mod solver;
