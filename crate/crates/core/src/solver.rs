//! A small complete satisfiability procedure for relaxed normalized PB
//! formulas, used by the backbone preprocessor. DPLL with slack-based
//! propagation and chronological backtracking; no learning, which is fine
//! at preprocessing scale. The trait keeps the preprocessor independent of
//! the concrete solver.

use num::bigint::BigInt;
use num::Zero;

use crate::formula::{Assignment, Literal, PBConstraint, PBFormula, RelOp, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Assignment),
    Unsat,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }
}

pub trait PbSolver {
    fn solve(&mut self, f: &PBFormula) -> SolveResult;

    fn solve_assuming(&mut self, f: &PBFormula, assumptions: &[Literal]) -> SolveResult;
}

/// Chronological-backtracking DPLL. Decisions take the smallest unassigned
/// constraint variable, positive phase first; variables outside every
/// constraint default to false in the witness.
#[derive(Default)]
pub struct DpllSolver;

impl PbSolver for DpllSolver {
    fn solve(&mut self, f: &PBFormula) -> SolveResult {
        self.solve_assuming(f, &[])
    }

    fn solve_assuming(&mut self, f: &PBFormula, assumptions: &[Literal]) -> SolveResult {
        Search::new(f, assumptions).run()
    }
}

#[derive(Clone, Copy)]
enum TrailEntry {
    /// Decision; `flipped` marks that the second phase is in play.
    Decision { var: Var, flipped: bool },
    Implied(Var),
}

struct Search<'a> {
    constraints: &'a [PBConstraint],
    num_vars: u32,
    assign: Vec<Option<bool>>,
    trail: Vec<TrailEntry>,
    decision_vars: Vec<Var>,
    conflicting_assumptions: bool,
}

impl<'a> Search<'a> {
    fn new(f: &'a PBFormula, assumptions: &[Literal]) -> Self {
        let mut decision_vars: Vec<Var> = f.constraint_vars().into_iter().collect();
        decision_vars.sort();
        let mut s = Search {
            constraints: &f.constraints,
            num_vars: f.num_vars,
            assign: vec![None; f.num_vars as usize],
            trail: Vec::new(),
            decision_vars,
            conflicting_assumptions: false,
        };
        // Fixed facts of the formula behave exactly like assumptions.
        for l in f.fixed.iter().chain(assumptions.iter()) {
            match s.assign[l.var.index()] {
                None => s.assign[l.var.index()] = Some(l.positive),
                Some(v) if v == l.positive => {}
                Some(_) => s.conflicting_assumptions = true,
            }
        }
        s
    }

    fn value(&self, l: Literal) -> Option<bool> {
        self.assign[l.var.index()].map(|v| v == l.positive)
    }

    /// Propagates every constraint to fixpoint. Returns false on conflict.
    fn propagate(&mut self) -> bool {
        loop {
            let mut changed = false;
            for c in self.constraints {
                let mut sum_true = BigInt::zero();
                let mut sum_unassigned = BigInt::zero();
                for (a, l) in &c.terms {
                    match self.value(*l) {
                        Some(true) => sum_true += a,
                        Some(false) => {}
                        None => sum_unassigned += a,
                    }
                }
                let reachable = &sum_true + &sum_unassigned;
                match c.op {
                    RelOp::Ge => {
                        if sum_true >= c.degree {
                            continue;
                        }
                        if reachable < c.degree {
                            return false;
                        }
                        // Literals whose coefficient exceeds the slack are
                        // forced true.
                        let slack = &reachable - &c.degree;
                        for (a, l) in &c.terms {
                            if self.value(*l).is_none() && *a > slack {
                                self.imply(*l);
                                changed = true;
                            }
                        }
                    }
                    RelOp::Eq => {
                        if sum_true > c.degree || reachable < c.degree {
                            return false;
                        }
                        for (a, l) in &c.terms {
                            if self.value(*l).is_some() {
                                continue;
                            }
                            if &sum_true + a > c.degree {
                                self.imply(l.negated());
                                changed = true;
                            } else if &reachable - a < c.degree {
                                self.imply(*l);
                                changed = true;
                            }
                        }
                    }
                    _ => panic!("solver requires relaxed normalized constraints"),
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn imply(&mut self, l: Literal) {
        debug_assert!(self.assign[l.var.index()].is_none());
        self.assign[l.var.index()] = Some(l.positive);
        self.trail.push(TrailEntry::Implied(l.var));
    }

    fn next_decision(&self) -> Option<Var> {
        self.decision_vars
            .iter()
            .copied()
            .find(|v| self.assign[v.index()].is_none())
    }

    /// Undoes trail entries until a decision can be flipped; false when the
    /// search space is exhausted.
    fn backtrack(&mut self) -> bool {
        while let Some(entry) = self.trail.pop() {
            match entry {
                TrailEntry::Implied(v) => self.assign[v.index()] = None,
                TrailEntry::Decision { var, flipped } => {
                    if flipped {
                        self.assign[var.index()] = None;
                    } else {
                        self.assign[var.index()] = Some(false);
                        self.trail.push(TrailEntry::Decision { var, flipped: true });
                        return true;
                    }
                }
            }
        }
        false
    }

    fn run(mut self) -> SolveResult {
        if self.conflicting_assumptions {
            return SolveResult::Unsat;
        }
        loop {
            if self.propagate() {
                match self.next_decision() {
                    Some(var) => {
                        self.assign[var.index()] = Some(true);
                        self.trail.push(TrailEntry::Decision { var, flipped: false });
                    }
                    None => {
                        let values = (0..self.num_vars)
                            .map(|i| self.assign[i as usize].unwrap_or(false))
                            .collect();
                        let witness = Assignment::new(values);
                        debug_assert!(self
                            .constraints
                            .iter()
                            .all(|c| c.evaluate(&witness)));
                        return SolveResult::Sat(witness);
                    }
                }
            } else if !self.backtrack() {
                return SolveResult::Unsat;
            }
        }
    }
}
