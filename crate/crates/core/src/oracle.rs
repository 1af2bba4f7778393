//! Brute-force reference implementations used by tests and the acceptance
//! suite. Everything here is deliberately simple: exhaustive enumeration
//! over all assignments with exact rational accumulation, sharing nothing
//! with the diagram engine beyond the formula types.

use std::collections::BTreeSet;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::formula::{Assignment, Literal, PBFormula, RelOp, Var, WeightFunction};

/// Enumeration cap; `2^max_vars` assignments are touched.
#[derive(Clone, Copy, Debug)]
pub struct OracleBudget {
    pub max_vars: u32,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_vars: 20 }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance has {num_vars} variables, oracle budget is {max_vars}")]
    BudgetExceeded { num_vars: u32, max_vars: u32 },
    #[error("coefficient or degree does not fit the oracle's integer range")]
    CoefficientOverflow,
}

/// A constraint flattened to machine integers for the enumeration loop.
/// Fixed literals become unit `>= 1` rows.
struct FlatConstraint {
    terms: Vec<(i64, u32, bool)>, // coefficient, 0-based var index, polarity
    op: RelOp,
    degree: i128,
}

impl FlatConstraint {
    fn satisfied(&self, lhs: i128) -> bool {
        match self.op {
            RelOp::Lt => lhs < self.degree,
            RelOp::Le => lhs <= self.degree,
            RelOp::Eq => lhs == self.degree,
            RelOp::Ge => lhs >= self.degree,
            RelOp::Gt => lhs > self.degree,
        }
    }
}

fn flatten(f: &PBFormula, budget: OracleBudget) -> Result<Vec<FlatConstraint>, OracleError> {
    if f.num_vars > budget.max_vars {
        return Err(OracleError::BudgetExceeded {
            num_vars: f.num_vars,
            max_vars: budget.max_vars,
        });
    }
    let coeff = |a: &BigInt| a.to_i64().ok_or(OracleError::CoefficientOverflow);
    let mut flat = Vec::with_capacity(f.constraints.len() + f.fixed.len());
    for c in &f.constraints {
        let mut terms = Vec::with_capacity(c.terms.len());
        for (a, l) in &c.terms {
            terms.push((coeff(a)?, l.var.0 - 1, l.positive));
        }
        let degree = c
            .degree
            .to_i128()
            .ok_or(OracleError::CoefficientOverflow)?;
        flat.push(FlatConstraint { terms, op: c.op, degree });
    }
    for l in &f.fixed {
        flat.push(FlatConstraint {
            terms: vec![(1, l.var.0 - 1, l.positive)],
            op: RelOp::Ge,
            degree: 1,
        });
    }
    Ok(flat)
}

/// Sums assignment weights over every model by walking the full binary
/// tree of assignments, keeping a running weight product and running
/// left-hand sums per constraint.
pub fn brute_force_count(
    f: &PBFormula,
    w: &WeightFunction,
    budget: OracleBudget,
) -> Result<BigRational, OracleError> {
    let flat = flatten(f, budget)?;
    let n = f.num_vars;
    let mut sums = vec![0i128; flat.len()];
    let mut total = BigRational::zero();

    fn recurse(
        var: u32,
        n: u32,
        flat: &[FlatConstraint],
        w: &WeightFunction,
        sums: &mut Vec<i128>,
        weight: BigRational,
        total: &mut BigRational,
    ) {
        if var > n {
            if flat.iter().zip(sums.iter()).all(|(c, &lhs)| c.satisfied(lhs)) {
                *total += weight;
            }
            return;
        }
        for value in [false, true] {
            for (ci, c) in flat.iter().enumerate() {
                for &(a, v, pos) in &c.terms {
                    if v == var - 1 && pos == value {
                        sums[ci] += a as i128;
                    }
                }
            }
            let lw = if value {
                w.pos_weight(Var(var))
            } else {
                w.neg_weight(Var(var))
            };
            recurse(var + 1, n, flat, w, sums, &weight * lw, total);
            for (ci, c) in flat.iter().enumerate() {
                for &(a, v, pos) in &c.terms {
                    if v == var - 1 && pos == value {
                        sums[ci] -= a as i128;
                    }
                }
            }
        }
    }

    recurse(1, n, &flat, w, &mut sums, BigRational::one(), &mut total);
    Ok(total)
}

/// Literals true in every model; empty when the formula has none.
pub fn brute_force_backbone(
    f: &PBFormula,
    budget: OracleBudget,
) -> Result<BTreeSet<Literal>, OracleError> {
    let flat = flatten(f, budget)?;
    let n = f.num_vars;
    let mut backbone: Option<BTreeSet<Literal>> = None;
    for bits in 0..1u64 << n {
        let tau = Assignment::from_bits(n, bits);
        let lhs = |c: &FlatConstraint| -> i128 {
            c.terms
                .iter()
                .filter(|&&(_, v, pos)| tau.value(Var(v + 1)) == pos)
                .map(|&(a, _, _)| a as i128)
                .sum()
        };
        if !flat.iter().all(|c| c.satisfied(lhs(c))) {
            continue;
        }
        let lits: BTreeSet<Literal> = tau.literals().collect();
        backbone = Some(match backbone {
            None => lits,
            Some(prev) => prev.intersection(&lits).copied().collect(),
        });
    }
    Ok(backbone.unwrap_or_default())
}

/// True iff every model of `f` satisfies `gamma`.
pub fn brute_force_entails(
    f: &PBFormula,
    gamma: &crate::formula::PBConstraint,
    budget: OracleBudget,
) -> Result<bool, OracleError> {
    if f.num_vars > budget.max_vars {
        return Err(OracleError::BudgetExceeded {
            num_vars: f.num_vars,
            max_vars: budget.max_vars,
        });
    }
    for bits in 0..1u64 << f.num_vars {
        let tau = Assignment::from_bits(f.num_vars, bits);
        if f.satisfied_by(&tau) && !gamma.evaluate(&tau) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact weighted model count of a clause list by Shannon expansion with
/// unit propagation. Used as the CNF-side reference when checking the
/// counting-safe encoder; validated against plain `2^n` enumeration in this
/// module's tests. `weight(lit)` maps a DIMACS-style signed literal to its
/// weight; variables are `1..=num_vars` and unconstrained variables
/// contribute `weight(v) + weight(-v)`.
pub fn cnf_weighted_count(
    clauses: &[Vec<i32>],
    num_vars: u32,
    weight: &dyn Fn(i32) -> BigRational,
) -> BigRational {
    let live: Vec<Vec<i32>> = clauses.to_vec();
    let unassigned: BTreeSet<u32> = (1..=num_vars).collect();
    count_rec(&live, &unassigned, weight)
}

fn count_rec(
    clauses: &[Vec<i32>],
    unassigned: &BTreeSet<u32>,
    weight: &dyn Fn(i32) -> BigRational,
) -> BigRational {
    if clauses.iter().any(|c| c.is_empty()) {
        return BigRational::zero();
    }
    if clauses.is_empty() {
        let mut w = BigRational::one();
        for &v in unassigned {
            w *= weight(v as i32) + weight(-(v as i32));
        }
        return w;
    }
    // Prefer a unit literal: the opposite branch is falsified outright.
    let branch_lit = clauses
        .iter()
        .find(|c| c.len() == 1)
        .map(|c| c[0])
        .unwrap_or_else(|| {
            let mut lits: Vec<i32> = clauses[0].clone();
            lits.sort_by_key(|l| l.unsigned_abs());
            lits[0]
        });
    let is_unit = clauses.iter().any(|c| c.len() == 1 && c[0] == branch_lit);

    let condition = |lit: i32| -> Vec<Vec<i32>> {
        clauses
            .iter()
            .filter(|c| !c.contains(&lit))
            .map(|c| c.iter().copied().filter(|&l| l != -lit).collect())
            .collect()
    };
    let mut rest = unassigned.clone();
    rest.remove(&branch_lit.unsigned_abs());

    let mut total = weight(branch_lit) * count_rec(&condition(branch_lit), &rest, weight);
    if !is_unit {
        total += weight(-branch_lit) * count_rec(&condition(-branch_lit), &rest, weight);
    }
    total
}

/// Float view of an exact count, for comparisons against the f64 engine.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite rational")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::PBConstraint;

    fn x(i: u32) -> Literal {
        Literal::pos(Var(i))
    }

    fn nx(i: u32) -> Literal {
        Literal::neg(Var(i))
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn empty_formula_counts_all_assignments() {
        let f = PBFormula::new(2);
        let w = WeightFunction::unweighted(2);
        let c = brute_force_count(&f, &w, OracleBudget::default()).unwrap();
        assert_eq!(c, BigRational::from_integer(4.into()));
    }

    #[test]
    fn weighted_clause_count() {
        let f = PBFormula::with_constraints(
            2,
            vec![PBConstraint::from_i64(&[(1, x(1)), (1, x(2))], RelOp::Ge, 1)],
        );
        let mut w = WeightFunction::unweighted(2);
        w.set(Var(1), ratio(3, 10), ratio(7, 10));
        w.set(Var(2), ratio(6, 10), ratio(4, 10));
        let c = brute_force_count(&f, &w, OracleBudget::default()).unwrap();
        assert_eq!(c, ratio(72, 100));
    }

    #[test]
    fn tight_constraint_has_single_model() {
        let f = PBFormula::with_constraints(
            2,
            vec![PBConstraint::from_i64(&[(2, x(1)), (3, x(2))], RelOp::Ge, 4)],
        );
        let w = WeightFunction::unweighted(2);
        let c = brute_force_count(&f, &w, OracleBudget::default()).unwrap();
        assert_eq!(c, BigRational::one());
    }

    #[test]
    fn backbone_of_forced_variable() {
        let f = PBFormula::with_constraints(
            2,
            vec![PBConstraint::from_i64(&[(3, x(1)), (4, x(2))], RelOp::Ge, 4)],
        );
        let bb = brute_force_backbone(&f, OracleBudget::default()).unwrap();
        assert_eq!(bb, BTreeSet::from([x(2)]));
    }

    #[test]
    fn backbone_empty_for_free_choice_and_unsat() {
        let f = PBFormula::with_constraints(
            2,
            vec![PBConstraint::from_i64(&[(1, x(1)), (1, x(2))], RelOp::Ge, 1)],
        );
        assert!(brute_force_backbone(&f, OracleBudget::default())
            .unwrap()
            .is_empty());
        let unsat = PBFormula::with_constraints(
            1,
            vec![
                PBConstraint::from_i64(&[(1, x(1))], RelOp::Ge, 1),
                PBConstraint::from_i64(&[(1, nx(1))], RelOp::Ge, 1),
            ],
        );
        assert!(brute_force_backbone(&unsat, OracleBudget::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn entailment_examples() {
        // gamma2 and gamma3 entail gamma1.
        let gamma1 = PBConstraint::from_i64(&[(3, x(1)), (4, x(2))], RelOp::Ge, 4);
        let f = PBFormula::with_constraints(
            4,
            vec![
                PBConstraint::from_i64(&[(3, x(1)), (1, x(3)), (1, x(4))], RelOp::Ge, 4),
                PBConstraint::from_i64(&[(3, x(2)), (1, x(3)), (1, x(4))], RelOp::Ge, 4),
            ],
        );
        assert!(brute_force_entails(&f, &gamma1, OracleBudget::default()).unwrap());

        let empty = PBFormula::new(1);
        let unit = PBConstraint::from_i64(&[(1, x(1))], RelOp::Ge, 1);
        assert!(!brute_force_entails(&empty, &unit, OracleBudget::default()).unwrap());

        let g = PBFormula::with_constraints(2, vec![unit.clone()]);
        let wider = PBConstraint::from_i64(&[(1, x(1)), (1, x(2))], RelOp::Ge, 1);
        assert!(brute_force_entails(&g, &wider, OracleBudget::default()).unwrap());
    }

    #[test]
    fn budget_is_enforced() {
        let f = PBFormula::new(25);
        let w = WeightFunction::unweighted(25);
        assert!(matches!(
            brute_force_count(&f, &w, OracleBudget::default()),
            Err(OracleError::BudgetExceeded { .. })
        ));
    }

    /// Plain 2^n enumeration of a clause list; validates the Shannon
    /// counter on sizes where full enumeration is feasible.
    fn cnf_count_by_enumeration(
        clauses: &[Vec<i32>],
        num_vars: u32,
        weight: &dyn Fn(i32) -> BigRational,
    ) -> BigRational {
        let mut total = BigRational::zero();
        for bits in 0..1u64 << num_vars {
            let sat = clauses.iter().all(|c| {
                c.iter().any(|&l| {
                    let v = l.unsigned_abs() - 1;
                    (bits >> v & 1 == 1) == (l > 0)
                })
            });
            if sat {
                let mut w = BigRational::one();
                for v in 1..=num_vars as i32 {
                    w *= if bits >> (v - 1) & 1 == 1 { weight(v) } else { weight(-v) };
                }
                total += w;
            }
        }
        total
    }

    #[test]
    fn shannon_counter_matches_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let n: u32 = rng.gen_range(1..=8);
            let m = rng.gen_range(0..=10);
            let clauses: Vec<Vec<i32>> = (0..m)
                .map(|_| {
                    let len = rng.gen_range(1..=3);
                    (0..len)
                        .map(|_| {
                            let v = rng.gen_range(1..=n) as i32;
                            if rng.gen() {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            let weight = |l: i32| -> BigRational {
                let v = l.unsigned_abs() as i64;
                if l > 0 {
                    ratio(v, 2 * v + 1)
                } else {
                    ratio(v + 1, 2 * v + 1)
                }
            };
            let fast = cnf_weighted_count(&clauses, n, &weight);
            let slow = cnf_count_by_enumeration(&clauses, n, &weight);
            assert_eq!(fast, slow, "clauses {:?}", clauses);
        }
    }
}
