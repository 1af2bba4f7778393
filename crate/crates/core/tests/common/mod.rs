//! Shared helpers for the integration tests: seeded random instances in the
//! shapes the acceptance suite needs.

use num::rational::BigRational;
use rand::Rng;

use pbcount::formula::{Literal, PBConstraint, PBFormula, RelOp, Var, WeightFunction};

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub const ALL_OPS: [RelOp; 5] = [RelOp::Lt, RelOp::Le, RelOp::Eq, RelOp::Ge, RelOp::Gt];

/// Complementary weights in (0, 1) with a power-of-two denominator, so the
/// float mode sees them exactly.
pub fn random_weights(rng: &mut impl Rng, num_vars: u32) -> WeightFunction {
    let mut w = WeightFunction::unweighted(num_vars);
    for v in 1..=num_vars {
        let k: i64 = rng.gen_range(1..=63);
        w.set(Var(v), ratio(k, 64), ratio(64 - k, 64));
    }
    w
}

/// A random constraint over distinct variables drawn from `1..=num_vars`
/// with positive coefficients, random literal polarities, and any operator.
pub fn random_constraint(rng: &mut impl Rng, num_vars: u32, max_coeff: i64) -> PBConstraint {
    loop {
        let mut terms: Vec<(i64, Literal)> = Vec::new();
        for v in 1..=num_vars {
            if rng.gen_bool(0.5) {
                terms.push((
                    rng.gen_range(1..=max_coeff),
                    Literal { var: Var(v), positive: rng.gen() },
                ));
            }
        }
        if terms.is_empty() {
            continue;
        }
        let sum: i64 = terms.iter().map(|(a, _)| a).sum();
        let op = ALL_OPS[rng.gen_range(0..ALL_OPS.len())];
        // Mid-range degrees keep most constraints neither trivial nor
        // nearly unsatisfiable; the wide draw still covers both extremes.
        let degree = if rng.gen_bool(0.75) {
            rng.gen_range(1..=(sum / 2).max(1))
        } else {
            rng.gen_range(-2..=sum + 2)
        };
        return PBConstraint::from_i64(&terms, op, degree);
    }
}

/// Instance shape used throughout the acceptance suite: 4-12 variables,
/// 1-8 constraints, coefficients 1-10, mixed operators, random
/// complementary weights.
pub fn random_instance(rng: &mut impl Rng) -> (PBFormula, WeightFunction) {
    let num_vars: u32 = rng.gen_range(4..=12);
    let num_constraints = rng.gen_range(1..=8);
    let constraints = (0..num_constraints)
        .map(|_| random_constraint(rng, num_vars, 10))
        .collect();
    let weights = random_weights(rng, num_vars);
    (PBFormula::with_constraints(num_vars, constraints), weights)
}

/// Smaller shape for the CNF export checks, keeping auxiliary counts low.
pub fn small_instance(rng: &mut impl Rng) -> (PBFormula, WeightFunction) {
    let num_vars: u32 = rng.gen_range(4..=8);
    let num_constraints = rng.gen_range(1..=3);
    let constraints = (0..num_constraints)
        .map(|_| random_constraint(rng, num_vars, 5))
        .collect();
    let weights = random_weights(rng, num_vars);
    (PBFormula::with_constraints(num_vars, constraints), weights)
}

/// A raw constraint with signed coefficients in `[-max_coeff, max_coeff]`,
/// duplicate variables allowed; exercises every normalization rule.
pub fn random_raw_constraint(rng: &mut impl Rng, max_vars: u32, max_coeff: i64) -> PBConstraint {
    let num_vars = rng.gen_range(1..=max_vars);
    let num_terms = rng.gen_range(1..=num_vars + 2);
    let terms: Vec<(i64, Literal)> = (0..num_terms)
        .map(|_| {
            let v = rng.gen_range(1..=num_vars);
            let coeff = rng.gen_range(-max_coeff..=max_coeff);
            (coeff, Literal { var: Var(v), positive: rng.gen() })
        })
        .collect();
    let op = ALL_OPS[rng.gen_range(0..ALL_OPS.len())];
    let degree = rng.gen_range(-2 * max_coeff..=2 * max_coeff);
    PBConstraint::from_i64(&terms, op, degree)
}
