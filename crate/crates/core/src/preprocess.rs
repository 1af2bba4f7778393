//! Formula preprocessing: backbone identification with unit propagation,
//! and deletion of constraints entailed by the rest of the formula.
//!
//! Backbone literals are found by repeated satisfiability calls: starting
//! from one witness, each candidate literal `l` is tested by solving with
//! `~l` assumed; unsatisfiability proves `l` holds in every model, so it is
//! propagated and recorded as a fixed fact, while a satisfying witness
//! shrinks the candidate set to the literals both witnesses agree on.
//!
//! Constraint deletion rebuilds each small constraint as a diagram and
//! walks the paths to its 0 terminal depth-first, unit-propagating the edge
//! literals through the remaining constraints. If every such path ends in a
//! contradiction, the rest of the formula entails the constraint and it is
//! dropped. Paths longer than the literal cap are never attempted because
//! wide constraints can blow up the diagram.

use std::collections::BTreeSet;

use crate::construct::constraint_add;
use crate::dd::{Add, DdManager, DiagramVarOrder};
use crate::formula::{unit_propagate, Literal, PBFormula};
use crate::solver::{PbSolver, SolveResult};

/// Which preprocessing passes run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreprocessMode {
    None,
    BackboneOnly,
    Full,
}

#[derive(Clone, Copy, Debug)]
pub struct PreprocessConfig {
    pub mode: PreprocessMode,
    /// Constraints with more literals than this are never candidates for
    /// deletion.
    pub delete_literal_cap: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig { mode: PreprocessMode::Full, delete_literal_cap: 20 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct PreprocessReport {
    pub backbone: Vec<Literal>,
    pub deleted_constraints: usize,
}

#[derive(Clone, Debug)]
pub struct PreprocessOutcome {
    pub formula: PBFormula,
    pub report: PreprocessReport,
    /// Set when the initial satisfiability check failed; the count is zero.
    pub unsat: bool,
}

/// Runs the configured passes, backbone first: it shrinks constraints and so
/// exposes more deletions under the literal cap.
pub fn preprocess(
    f: &PBFormula,
    config: &PreprocessConfig,
    solver: &mut dyn PbSolver,
) -> PreprocessOutcome {
    let mut report = PreprocessReport::default();
    let mut formula = f.clone();
    if matches!(config.mode, PreprocessMode::BackboneOnly | PreprocessMode::Full) {
        let (next, backbone, unsat) = add_backbone(&formula, solver);
        if unsat {
            return PreprocessOutcome { formula: next, report, unsat: true };
        }
        formula = next;
        report.backbone = backbone;
    }
    if matches!(config.mode, PreprocessMode::Full) {
        let (next, deleted) = delete_constraints(&formula, config.delete_literal_cap);
        formula = next;
        report.deleted_constraints = deleted;
    }
    PreprocessOutcome { formula, report, unsat: false }
}

/// Finds all backbone literals, propagates them, and records each as a
/// fixed `l = 1` fact on the returned formula. The `bool` is true when the
/// formula is unsatisfiable.
pub fn add_backbone(
    f: &PBFormula,
    solver: &mut dyn PbSolver,
) -> (PBFormula, Vec<Literal>, bool) {
    let mut formula = f.clone();
    let witness = match solver.solve(&formula) {
        SolveResult::Sat(tau) => tau,
        SolveResult::Unsat => return (formula, Vec::new(), true),
    };
    let constrained = formula.constraint_vars();
    let mut candidates: BTreeSet<Literal> = witness
        .literals()
        .filter(|l| constrained.contains(&l.var))
        .collect();
    let mut backbone = Vec::new();

    while let Some(&l) = candidates.iter().next() {
        // A variable that dropped out of every constraint can no longer be
        // entailed either way.
        if !formula.constraint_vars().contains(&l.var) {
            candidates.remove(&l);
            continue;
        }
        match solver.solve_assuming(&formula, &[l.negated()]) {
            SolveResult::Unsat => {
                formula = unit_propagate(&formula, l)
                    .expect("propagating an entailed literal cannot conflict");
                formula.push_fixed(l);
                backbone.push(l);
                candidates.remove(&l);
            }
            SolveResult::Sat(other) => {
                candidates.retain(|cand| other.literal_true(*cand));
            }
        }
    }
    (formula, backbone, false)
}

/// Removes constraints entailed by the rest of the formula; returns the
/// surviving formula and the number of deletions.
pub fn delete_constraints(f: &PBFormula, literal_cap: usize) -> (PBFormula, usize) {
    let mut formula = f.clone();
    let mut mgr: DdManager<f64> = DdManager::new(DiagramVarOrder::index_order(f.num_vars));
    let mut deleted = 0;
    let mut idx = 0;
    while idx < formula.constraints.len() {
        if formula.constraints[idx].literal_count() > literal_cap {
            idx += 1;
            continue;
        }
        let mut gamma = formula.constraints[idx].clone();
        gamma.sort_terms_by_rank(|v| mgr.order().rank(v));
        let rest = PBFormula {
            constraints: formula
                .constraints
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != idx)
                .map(|(_, c)| c.clone())
                .collect(),
            num_vars: formula.num_vars,
            fixed: formula.fixed.clone(),
        };
        let diagram = constraint_add(&mut mgr, &gamma);
        if all_zero_paths_conflict(&mgr, diagram, &rest) {
            formula = rest;
            deleted += 1;
        } else {
            idx += 1;
        }
    }
    (formula, deleted)
}

/// Depth-first search over the diagram. Every edge literal is propagated
/// into the current formula state; a contradiction prunes the whole
/// subtree, while reaching the 0 terminal with a consistent state exhibits
/// a falsifying extension, so the constraint is not entailed.
fn all_zero_paths_conflict(mgr: &DdManager<f64>, node: Add, state: &PBFormula) -> bool {
    if let Some(v) = mgr.terminal_value(node) {
        return *v != 0.0;
    }
    let (var, hi, lo) = mgr.as_internal(node).expect("non-terminal");
    for (child, lit) in [(lo, Literal::neg(var)), (hi, Literal::pos(var))] {
        match unit_propagate(state, lit) {
            Err(_) => {} // conflict: every extension of this prefix is fine
            Ok(next) => {
                if !all_zero_paths_conflict(mgr, child, &next) {
                    return false;
                }
            }
        }
    }
    true
}
