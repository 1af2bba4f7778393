//! Counting-safe export of a PB formula to weighted DIMACS CNF.
//!
//! Each constraint is rebuilt as its 0/1 decision diagram and translated
//! clause-wise: one auxiliary variable per internal node, defined as the
//! full equivalence `aux <-> (var ? hi : lo)`, with the root asserted.
//! Because every auxiliary is functionally determined by the original
//! variables, each model of the source formula extends to exactly one model
//! of the CNF; with auxiliary literals weighted 1 for both polarities the
//! weighted counts coincide.
//!
//! Nodes with constant children collapse to shorter clause forms instead of
//! the six three-literal clauses of the general equivalence.

use std::collections::HashMap;
use std::fmt::Write as _;

use num::rational::BigRational;

use crate::construct::constraint_add;
use crate::dd::{Add, DdManager, DiagramVarOrder};
use crate::formula::{Normalized, PBFormula, Var, WeightFunction};
use crate::opb::format_weight;

/// A CNF with per-literal weights over the original variables. Auxiliary
/// variables `num_original_vars+1..=num_vars` are weighted 1 implicitly.
#[derive(Clone, Debug)]
pub struct CnfInstance {
    pub num_original_vars: u32,
    pub num_vars: u32,
    pub clauses: Vec<Vec<i32>>,
    /// `(var, positive weight, negative weight)` per original variable.
    pub weights: Vec<(u32, BigRational, BigRational)>,
}

/// Child of a diagram node as seen by the encoder.
enum ChildRef {
    True,
    False,
    Aux(i32),
}

/// Encodes a formula (normalized on the fly) into a counting-safe CNF.
pub fn encode_counting_safe(f: &PBFormula, w: &WeightFunction) -> CnfInstance {
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut next_aux = f.num_vars as i32;
    let mut mgr: DdManager<f64> = DdManager::new(DiagramVarOrder::index_order(f.num_vars));

    for l in &f.fixed {
        let v = l.var.0 as i32;
        clauses.push(vec![if l.positive { v } else { -v }]);
    }

    for raw in &f.constraints {
        let c = match crate::formula::normalize(raw) {
            Normalized::Constraint(mut c) => {
                c.sort_terms_by_rank(|v| mgr.order().rank(v));
                c
            }
            Normalized::AlwaysTrue => continue,
            Normalized::AlwaysFalse => {
                clauses.push(Vec::new());
                continue;
            }
        };
        let root = constraint_add(&mut mgr, &c);
        encode_diagram(&mgr, root, &mut next_aux, &mut clauses);
    }

    let weights = (1..=f.num_vars)
        .map(|v| (v, w.pos_weight(Var(v)).clone(), w.neg_weight(Var(v)).clone()))
        .collect();
    CnfInstance {
        num_original_vars: f.num_vars,
        num_vars: next_aux as u32,
        clauses,
        weights,
    }
}

/// Tseitin translation of one diagram; fresh auxiliaries per constraint so
/// the node-to-variable mapping stays injective within it.
fn encode_diagram(
    mgr: &DdManager<f64>,
    root: Add,
    next_aux: &mut i32,
    clauses: &mut Vec<Vec<i32>>,
) {
    if let Some(v) = mgr.terminal_value(root) {
        if *v == 0.0 {
            clauses.push(Vec::new());
        }
        return;
    }
    let mut aux_of: HashMap<Add, i32> = HashMap::new();
    let root_aux = assign_aux(mgr, root, next_aux, &mut aux_of, clauses);
    clauses.push(vec![root_aux]);
}

fn assign_aux(
    mgr: &DdManager<f64>,
    node: Add,
    next_aux: &mut i32,
    aux_of: &mut HashMap<Add, i32>,
    clauses: &mut Vec<Vec<i32>>,
) -> i32 {
    if let Some(&t) = aux_of.get(&node) {
        return t;
    }
    let (var, hi, lo) = mgr.as_internal(node).expect("internal node");
    let hi_ref = child_ref(mgr, hi, next_aux, aux_of, clauses);
    let lo_ref = child_ref(mgr, lo, next_aux, aux_of, clauses);
    *next_aux += 1;
    let t = *next_aux;
    aux_of.insert(node, t);
    let x = var.0 as i32;
    match (hi_ref, lo_ref) {
        (ChildRef::Aux(h), ChildRef::Aux(l)) => {
            // t <-> (x ? h : l); the last two clauses are the standard
            // propagation-strengthening resolvents.
            clauses.push(vec![-t, -x, h]);
            clauses.push(vec![-t, x, l]);
            clauses.push(vec![t, -x, -h]);
            clauses.push(vec![t, x, -l]);
            clauses.push(vec![-t, h, l]);
            clauses.push(vec![t, -h, -l]);
        }
        (ChildRef::True, ChildRef::Aux(l)) => {
            // t <-> (x | l)
            clauses.push(vec![-t, x, l]);
            clauses.push(vec![t, -x]);
            clauses.push(vec![t, -l]);
        }
        (ChildRef::False, ChildRef::Aux(l)) => {
            // t <-> (!x & l)
            clauses.push(vec![-t, -x]);
            clauses.push(vec![-t, l]);
            clauses.push(vec![t, x, -l]);
        }
        (ChildRef::Aux(h), ChildRef::True) => {
            // t <-> (!x | h)
            clauses.push(vec![-t, -x, h]);
            clauses.push(vec![t, x]);
            clauses.push(vec![t, -h]);
        }
        (ChildRef::Aux(h), ChildRef::False) => {
            // t <-> (x & h)
            clauses.push(vec![-t, x]);
            clauses.push(vec![-t, h]);
            clauses.push(vec![t, -x, -h]);
        }
        (ChildRef::True, ChildRef::False) => {
            // t <-> x
            clauses.push(vec![-t, x]);
            clauses.push(vec![t, -x]);
        }
        (ChildRef::False, ChildRef::True) => {
            // t <-> !x
            clauses.push(vec![-t, -x]);
            clauses.push(vec![t, x]);
        }
        (ChildRef::True, ChildRef::True) | (ChildRef::False, ChildRef::False) => {
            unreachable!("reduced diagrams have no node with equal children")
        }
    }
    t
}

fn child_ref(
    mgr: &DdManager<f64>,
    child: Add,
    next_aux: &mut i32,
    aux_of: &mut HashMap<Add, i32>,
    clauses: &mut Vec<Vec<i32>>,
) -> ChildRef {
    match mgr.terminal_value(child) {
        Some(v) if *v == 0.0 => ChildRef::False,
        Some(_) => ChildRef::True,
        None => ChildRef::Aux(assign_aux(mgr, child, next_aux, aux_of, clauses)),
    }
}

/// Weighted DIMACS text: `p cnf` header, `c p weight <lit> <w> 0` lines for
/// every literal (auxiliaries explicitly at 1), then 0-terminated clauses.
pub fn emit_weighted_dimacs(c: &CnfInstance) -> String {
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", c.num_vars, c.clauses.len()).unwrap();
    for (v, pos, neg) in &c.weights {
        writeln!(out, "c p weight {} {} 0", v, format_weight(pos)).unwrap();
        writeln!(out, "c p weight -{} {} 0", v, format_weight(neg)).unwrap();
    }
    for v in c.num_original_vars + 1..=c.num_vars {
        writeln!(out, "c p weight {} 1 0", v).unwrap();
        writeln!(out, "c p weight -{} 1 0", v).unwrap();
    }
    for clause in &c.clauses {
        for lit in clause {
            write!(out, "{} ", lit).unwrap();
        }
        out.push_str("0\n");
    }
    out
}
