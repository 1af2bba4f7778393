//! Domain types for pseudo-Boolean formulas: literals, constraints, weight
//! functions, assignments, plus relaxed normalization, constraint evaluation
//! and unit propagation.
//!
//! A constraint `sum a_i l_i ▷ b` is *relaxed normalized* when every
//! coefficient is a positive integer, the operator is `>=` or `=`, and each
//! variable occurs in at most one term. All diagram construction and
//! preprocessing code assumes this form; [`normalize`] produces it from an
//! arbitrary parsed constraint.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// A Boolean variable, identified by its positive 1-based index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    /// Index into a dense per-variable table.
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A variable or its negation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub var: Var,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: Var) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: Var) -> Self {
        Literal { var, positive: false }
    }

    /// Negation; an involution.
    pub fn negated(self) -> Self {
        Literal { var: self.var, positive: !self.positive }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.var)
        } else {
            write!(f, "~{}", self.var)
        }
    }
}

/// Relational operator of a PB constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl fmt::Display for RelOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Eq => "=",
            RelOp::Ge => ">=",
            RelOp::Gt => ">",
        };
        f.write_str(s)
    }
}

/// A single pseudo-Boolean constraint `sum a_i l_i ▷ b`.
///
/// Coefficients and the degree are arbitrary-precision integers, so
/// adversarial OPB inputs cannot overflow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PBConstraint {
    /// Coefficient/literal terms, in the order relevant to the caller.
    pub terms: Vec<(BigInt, Literal)>,
    pub op: RelOp,
    /// The right-hand side, usually called the degree.
    pub degree: BigInt,
}

impl PBConstraint {
    pub fn new(terms: Vec<(BigInt, Literal)>, op: RelOp, degree: BigInt) -> Self {
        PBConstraint { terms, op, degree }
    }

    /// Convenience constructor from small integers, mainly for tests.
    pub fn from_i64(terms: &[(i64, Literal)], op: RelOp, degree: i64) -> Self {
        PBConstraint {
            terms: terms
                .iter()
                .map(|(a, l)| (BigInt::from(*a), *l))
                .collect(),
            op,
            degree: BigInt::from(degree),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.terms.iter().map(|(_, l)| l.var)
    }

    pub fn var_set(&self) -> BTreeSet<Var> {
        self.vars().collect()
    }

    /// Number of literals; the deletion preprocessor caps on this.
    pub fn literal_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient_sum(&self) -> BigInt {
        self.terms.iter().map(|(a, _)| a).sum()
    }

    /// True when coefficients are positive, the operator is `>=` or `=`,
    /// and no variable occurs twice.
    pub fn is_relaxed_normalized(&self) -> bool {
        if !matches!(self.op, RelOp::Ge | RelOp::Eq) {
            return false;
        }
        if self.terms.iter().any(|(a, _)| !a.is_positive()) {
            return false;
        }
        let vars: BTreeSet<Var> = self.var_set();
        vars.len() == self.terms.len()
    }

    /// Evaluates the constraint under a total assignment of its variables.
    /// Handles every operator, normalized or not.
    pub fn evaluate(&self, tau: &Assignment) -> bool {
        let mut lhs = BigInt::zero();
        for (a, l) in &self.terms {
            if tau.literal_true(*l) {
                lhs += a;
            }
        }
        match self.op {
            RelOp::Lt => lhs < self.degree,
            RelOp::Le => lhs <= self.degree,
            RelOp::Eq => lhs == self.degree,
            RelOp::Ge => lhs >= self.degree,
            RelOp::Gt => lhs > self.degree,
        }
    }

    /// Sorts terms so that variable ranks increase; required before diagram
    /// construction.
    pub fn sort_terms_by_rank(&mut self, rank: impl Fn(Var) -> u32) {
        self.terms.sort_by_key(|(_, l)| rank(l.var));
    }
}

impl fmt::Display for PBConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, l) in &self.terms {
            write!(f, "{} {} ", a, l)?;
        }
        write!(f, "{} {}", self.op, self.degree)
    }
}

/// Outcome of relaxed normalization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Normalized {
    /// Equivalent constraint with positive coefficients and `>=` or `=`.
    Constraint(PBConstraint),
    /// Satisfied by every assignment; dropped before counting.
    AlwaysTrue,
    /// Satisfied by no assignment; the whole count collapses to zero.
    AlwaysFalse,
}

/// Rewrites a constraint into relaxed normalized form.
///
/// Duplicate occurrences of a variable are merged via `~l = 1 - l`, strict
/// operators become `>=` by shifting the degree, negative coefficients flip
/// the literal, and zero coefficients are dropped. A `>=` constraint whose
/// degree ends up non-positive holds vacuously (the left side is a sum of
/// non-negative terms), so it normalizes to [`Normalized::AlwaysTrue`];
/// degrees above the coefficient sum are unsatisfiable.
pub fn normalize(c: &PBConstraint) -> Normalized {
    // Net coefficient per variable on the positive literal. A term `a ~x`
    // contributes `-a` to the net and `a` to the constant moved across.
    let mut net: BTreeMap<Var, BigInt> = BTreeMap::new();
    let mut moved = BigInt::zero();
    for (a, l) in &c.terms {
        let entry = net.entry(l.var).or_insert_with(BigInt::zero);
        if l.positive {
            *entry += a;
        } else {
            *entry -= a;
            moved += a;
        }
    }
    let mut degree = &c.degree - moved;

    match c.op {
        RelOp::Ge | RelOp::Eq => {}
        RelOp::Gt => degree += 1,
        RelOp::Le => {
            for v in net.values_mut() {
                *v = -std::mem::take(v);
            }
            degree = -degree;
        }
        RelOp::Lt => {
            for v in net.values_mut() {
                *v = -std::mem::take(v);
            }
            degree = -degree + 1;
        }
    }
    let op = if c.op == RelOp::Eq { RelOp::Eq } else { RelOp::Ge };

    let mut terms: Vec<(BigInt, Literal)> = Vec::with_capacity(net.len());
    let mut sum = BigInt::zero();
    for (var, a) in net {
        if a.is_zero() {
            continue;
        }
        if a.is_positive() {
            sum += &a;
            terms.push((a, Literal::pos(var)));
        } else {
            // a l = -a ~l + a; the constant crosses to the degree side.
            degree -= &a;
            let flipped = -a;
            sum += &flipped;
            terms.push((flipped, Literal::neg(var)));
        }
    }

    match op {
        RelOp::Ge => {
            if degree <= BigInt::zero() {
                Normalized::AlwaysTrue
            } else if degree > sum {
                Normalized::AlwaysFalse
            } else {
                Normalized::Constraint(PBConstraint { terms, op, degree })
            }
        }
        RelOp::Eq => {
            if degree.is_negative() || degree > sum {
                Normalized::AlwaysFalse
            } else if terms.is_empty() {
                // degree must be zero here.
                Normalized::AlwaysTrue
            } else {
                Normalized::Constraint(PBConstraint { terms, op, degree })
            }
        }
        _ => unreachable!(),
    }
}

/// A conjunction of PB constraints over variables `x1..=x{num_vars}`.
///
/// `fixed` records literals forced by preprocessing; they are part of the
/// formula's semantics (every model must satisfy them) even though their
/// variables no longer occur in `constraints`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PBFormula {
    pub constraints: Vec<PBConstraint>,
    pub num_vars: u32,
    pub fixed: Vec<Literal>,
}

impl PBFormula {
    pub fn new(num_vars: u32) -> Self {
        PBFormula { constraints: Vec::new(), num_vars, fixed: Vec::new() }
    }

    pub fn with_constraints(num_vars: u32, constraints: Vec<PBConstraint>) -> Self {
        PBFormula { constraints, num_vars, fixed: Vec::new() }
    }

    /// Variables that occur in some constraint (fixed literals excluded).
    pub fn constraint_vars(&self) -> BTreeSet<Var> {
        self.constraints.iter().flat_map(|c| c.vars()).collect()
    }

    /// Records a literal forced by preprocessing. Panics on a conflicting
    /// fact; callers only fix entailed literals.
    pub fn push_fixed(&mut self, l: Literal) {
        assert!(
            !self.fixed.contains(&l.negated()),
            "conflicting fixed literals for {}",
            l.var
        );
        if !self.fixed.contains(&l) {
            self.fixed.push(l);
        }
    }

    /// True when `tau` satisfies every constraint and every fixed literal.
    pub fn satisfied_by(&self, tau: &Assignment) -> bool {
        self.fixed.iter().all(|l| tau.literal_true(*l))
            && self.constraints.iter().all(|c| c.evaluate(tau))
    }

    /// Normalizes every constraint, dropping tautologies. Returns `None`
    /// when some constraint is unsatisfiable on its own.
    pub fn normalized(&self) -> Option<PBFormula> {
        let mut constraints = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            match normalize(c) {
                Normalized::Constraint(n) => constraints.push(n),
                Normalized::AlwaysTrue => {}
                Normalized::AlwaysFalse => return None,
            }
        }
        Some(PBFormula { constraints, num_vars: self.num_vars, fixed: self.fixed.clone() })
    }
}

/// Returned by [`unit_propagate`] when fixing the literal falsifies the
/// formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Contradiction;

impl fmt::Display for Contradiction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unit propagation reached a contradiction")
    }
}

impl std::error::Error for Contradiction {}

/// What propagating one literal does to a single constraint.
pub enum Propagated {
    /// Constraint survives, possibly shrunk.
    Keep(PBConstraint),
    /// Constraint became satisfied and can be dropped.
    Satisfied,
}

/// Propagates `l = 1` through one relaxed normalized constraint: a term on
/// `l` is removed and its coefficient subtracted from the degree, a term on
/// `~l` is removed with the degree unchanged.
pub fn propagate_constraint(
    c: &PBConstraint,
    l: Literal,
) -> Result<Propagated, Contradiction> {
    debug_assert!(c.is_relaxed_normalized());
    let mut terms = Vec::with_capacity(c.terms.len());
    let mut degree = c.degree.clone();
    let mut sum = BigInt::zero();
    for (a, t) in &c.terms {
        if t.var == l.var {
            if *t == l {
                degree -= a;
            }
        } else {
            sum += a;
            terms.push((a.clone(), *t));
        }
    }
    match c.op {
        RelOp::Ge => {
            if degree <= BigInt::zero() {
                Ok(Propagated::Satisfied)
            } else if sum < degree {
                Err(Contradiction)
            } else {
                Ok(Propagated::Keep(PBConstraint { terms, op: RelOp::Ge, degree }))
            }
        }
        RelOp::Eq => {
            if degree.is_negative() || degree > sum {
                Err(Contradiction)
            } else if degree.is_zero() && terms.is_empty() {
                Ok(Propagated::Satisfied)
            } else {
                Ok(Propagated::Keep(PBConstraint { terms, op: RelOp::Eq, degree }))
            }
        }
        _ => panic!("propagation requires a relaxed normalized constraint"),
    }
}

/// Propagates `l = 1` through every constraint of a relaxed normalized
/// formula. The fact itself is not recorded; callers interested in it (the
/// backbone preprocessor) push it into `fixed` separately.
pub fn unit_propagate(f: &PBFormula, l: Literal) -> Result<PBFormula, Contradiction> {
    let mut constraints = Vec::with_capacity(f.constraints.len());
    for c in &f.constraints {
        match propagate_constraint(c, l)? {
            Propagated::Keep(c) => constraints.push(c),
            Propagated::Satisfied => {}
        }
    }
    Ok(PBFormula { constraints, num_vars: f.num_vars, fixed: f.fixed.clone() })
}

/// A total assignment over `x1..=x{num_vars}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    pub fn all_false(num_vars: u32) -> Self {
        Assignment { values: vec![false; num_vars as usize] }
    }

    /// Decodes bit `i` of `bits` as the value of `x{i+1}`; handy for
    /// exhaustive enumeration.
    pub fn from_bits(num_vars: u32, bits: u64) -> Self {
        Assignment {
            values: (0..num_vars).map(|i| bits >> i & 1 == 1).collect(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn value(&self, v: Var) -> bool {
        self.values[v.index()]
    }

    pub fn set(&mut self, v: Var, value: bool) {
        self.values[v.index()] = value;
    }

    pub fn literal_true(&self, l: Literal) -> bool {
        self.value(l.var) == l.positive
    }

    /// Literals made true by this assignment, in variable order.
    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.values.iter().enumerate().map(|(i, &b)| Literal {
            var: Var(i as u32 + 1),
            positive: b,
        })
    }
}

/// Per-literal weights. Weights are kept as exact rationals; the counting
/// engine converts them into its configured arithmetic on use. Defaults to
/// 1 for both polarities (unweighted counting). Negative weights are legal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightFunction {
    pos: Vec<BigRational>,
    neg: Vec<BigRational>,
}

impl WeightFunction {
    pub fn unweighted(num_vars: u32) -> Self {
        WeightFunction {
            pos: vec![BigRational::one(); num_vars as usize],
            neg: vec![BigRational::one(); num_vars as usize],
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.pos.len() as u32
    }

    pub fn set(&mut self, v: Var, pos: BigRational, neg: BigRational) {
        self.pos[v.index()] = pos;
        self.neg[v.index()] = neg;
    }

    pub fn pos_weight(&self, v: Var) -> &BigRational {
        &self.pos[v.index()]
    }

    pub fn neg_weight(&self, v: Var) -> &BigRational {
        &self.neg[v.index()]
    }

    pub fn literal_weight(&self, l: Literal) -> &BigRational {
        if l.positive {
            self.pos_weight(l.var)
        } else {
            self.neg_weight(l.var)
        }
    }

    /// Weight of a total assignment: the product of its literal weights.
    pub fn assignment_weight(&self, tau: &Assignment) -> BigRational {
        let mut w = BigRational::one();
        for l in tau.literals() {
            w *= self.literal_weight(l);
        }
        w
    }

    /// True when some variable carries a weight other than 1.
    pub fn is_weighted(&self) -> bool {
        self.pos.iter().chain(self.neg.iter()).any(|w| !w.is_one())
    }
}
