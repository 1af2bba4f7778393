//! Builds the 0/1 ADD of a relaxed normalized PB constraint.
//!
//! Equality constraints recurse on the residual degree with a plain
//! `(position, residual)` memo. Inequalities additionally memoize the
//! *interval* of residual degrees that share one diagram: the recursion
//! returns `([alpha, beta], A)` meaning every residual in `[alpha, beta]`
//! yields the diagram `A` for the current term suffix, so later residuals
//! falling into a stored interval are answered without recursing.
//!
//! Base cases for `>=`: a non-positive residual is satisfied by every
//! assignment of the suffix (coefficients are positive), giving the 1
//! terminal on `(-inf, 0]`; a residual above the suffix's coefficient sum
//! `S` is unreachable, giving the 0 terminal on `[S+1, +inf)`.
//!
//! Memo tables are per top-level call and dropped afterwards; residual
//! degrees are meaningless across constraints.

use std::collections::HashMap;

use num::bigint::BigInt;
use num::{One, Zero};

use crate::dd::{Add, DdManager, Numeric};
use crate::formula::{PBConstraint, RelOp};

/// Endpoint of a residual-degree interval.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Bound {
    NegInf,
    At(BigInt),
    PosInf,
}

/// Closed interval of residual degrees, possibly unbounded on either side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Bound,
    pub hi: Bound,
}

impl Interval {
    pub fn new(lo: Bound, hi: Bound) -> Self {
        let iv = Interval { lo, hi };
        debug_assert!(iv.lo <= iv.hi, "empty interval {:?}", iv);
        iv
    }

    pub fn contains(&self, k: &BigInt) -> bool {
        let k = Bound::At(k.clone());
        self.lo <= k && k <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(
            self.lo.clone().max(other.lo.clone()),
            self.hi.clone().min(other.hi.clone()),
        )
    }

    /// Translates both endpoints by `d`; infinities absorb the shift.
    pub fn shift(&self, d: &BigInt) -> Interval {
        let move_bound = |b: &Bound| match b {
            Bound::At(v) => Bound::At(v + d),
            other => other.clone(),
        };
        Interval { lo: move_bound(&self.lo), hi: move_bound(&self.hi) }
    }
}

/// Per-position interval memo: disjoint intervals sorted by lower endpoint,
/// looked up by binary search.
#[derive(Default)]
struct IntervalMap {
    entries: Vec<(Interval, Add)>,
}

impl IntervalMap {
    fn lookup(&self, k: &BigInt) -> Option<(Interval, Add)> {
        let key = Bound::At(k.clone());
        let idx = self.entries.partition_point(|(iv, _)| iv.lo <= key);
        if idx == 0 {
            return None;
        }
        let (iv, a) = &self.entries[idx - 1];
        if key <= iv.hi {
            Some((iv.clone(), *a))
        } else {
            None
        }
    }

    fn insert(&mut self, iv: Interval, a: Add) {
        let idx = self.entries.partition_point(|(e, _)| e.lo <= iv.lo);
        debug_assert!(
            idx == 0 || self.entries[idx - 1].0.hi < iv.lo,
            "overlapping memo intervals"
        );
        debug_assert!(
            idx == self.entries.len() || iv.hi < self.entries[idx].0.lo,
            "overlapping memo intervals"
        );
        self.entries.insert(idx, (iv, a));
    }
}

/// ADD of the suffix sub-constraint `sum_{i >= suffix_start} a_i l_i = k`.
/// `suffix_start == terms.len()` denotes the empty suffix, which is
/// satisfied exactly when `k == 0`.
pub fn construct_eq_suffix<V: Numeric>(
    mgr: &mut DdManager<V>,
    c: &PBConstraint,
    suffix_start: usize,
    k: BigInt,
) -> Add {
    debug_assert_eq!(c.op, RelOp::Eq);
    debug_assert!(terms_sorted(mgr, c));
    let mut memo = HashMap::new();
    eq_rec(mgr, c, suffix_start, k, &mut memo)
}

fn eq_rec<V: Numeric>(
    mgr: &mut DdManager<V>,
    c: &PBConstraint,
    j: usize,
    k: BigInt,
    memo: &mut HashMap<(usize, BigInt), Add>,
) -> Add {
    if k < BigInt::zero() {
        return mgr.zero();
    }
    if j == c.terms.len() {
        return if k.is_zero() { mgr.one() } else { mgr.zero() };
    }
    if let Some(&a) = memo.get(&(j, k.clone())) {
        return a;
    }
    let (coeff, lit) = &c.terms[j];
    let on_false = eq_rec(mgr, c, j + 1, k.clone(), memo);
    let on_true = eq_rec(mgr, c, j + 1, &k - coeff, memo);
    let a = if lit.positive {
        mgr.ite(lit.var, on_true, on_false)
    } else {
        mgr.ite(lit.var, on_false, on_true)
    };
    memo.insert((j, k), a);
    a
}

/// ADD of the suffix sub-constraint `sum_{i >= suffix_start} a_i l_i >= k`,
/// together with the interval of residuals sharing that diagram.
pub fn construct_geq_suffix<V: Numeric>(
    mgr: &mut DdManager<V>,
    c: &PBConstraint,
    suffix_start: usize,
    k: BigInt,
) -> (Interval, Add) {
    debug_assert_eq!(c.op, RelOp::Ge);
    debug_assert!(terms_sorted(mgr, c));
    let suffix_sums = suffix_sums(c);
    let mut memo: Vec<IntervalMap> = (0..=c.terms.len()).map(|_| IntervalMap::default()).collect();
    geq_rec(mgr, c, &suffix_sums, suffix_start, k, &mut memo)
}

/// `sums[j]` is the coefficient sum of terms `j..`.
fn suffix_sums(c: &PBConstraint) -> Vec<BigInt> {
    let mut sums = vec![BigInt::zero(); c.terms.len() + 1];
    for j in (0..c.terms.len()).rev() {
        sums[j] = &sums[j + 1] + &c.terms[j].0;
    }
    sums
}

fn geq_rec<V: Numeric>(
    mgr: &mut DdManager<V>,
    c: &PBConstraint,
    suffix_sums: &[BigInt],
    j: usize,
    k: BigInt,
    memo: &mut Vec<IntervalMap>,
) -> (Interval, Add) {
    // Non-positive residual: the suffix sum is always >= 0.
    if k <= BigInt::zero() {
        return (Interval::new(Bound::NegInf, Bound::At(BigInt::zero())), mgr.one());
    }
    // Residual beyond the suffix's maximum: unreachable.
    if k > suffix_sums[j] {
        let lo = Bound::At(&suffix_sums[j] + BigInt::one());
        return (Interval::new(lo, Bound::PosInf), mgr.zero());
    }
    if let Some(hit) = memo[j].lookup(&k) {
        return hit;
    }
    let (coeff, lit) = c.terms[j].clone();
    let (iv_false, on_false) = geq_rec(mgr, c, suffix_sums, j + 1, k.clone(), memo);
    let (iv_true, on_true) = geq_rec(mgr, c, suffix_sums, j + 1, &k - &coeff, memo);
    let a = if lit.positive {
        mgr.ite(lit.var, on_true, on_false)
    } else {
        mgr.ite(lit.var, on_false, on_true)
    };
    let iv = iv_false.intersect(&iv_true.shift(&coeff));
    debug_assert!(iv.contains(&k));
    memo[j].insert(iv.clone(), a);
    (iv, a)
}

/// ADD of a whole relaxed normalized constraint; the interval of a `>=`
/// constraint is discarded, only the diagram feeds the counting loop.
pub fn constraint_add<V: Numeric>(mgr: &mut DdManager<V>, c: &PBConstraint) -> Add {
    assert!(c.is_relaxed_normalized(), "constraint must be relaxed normalized: {}", c);
    match c.op {
        RelOp::Eq => construct_eq_suffix(mgr, c, 0, c.degree.clone()),
        RelOp::Ge => construct_geq_suffix(mgr, c, 0, c.degree.clone()).1,
        _ => unreachable!(),
    }
}

fn terms_sorted<V: Numeric>(mgr: &DdManager<V>, c: &PBConstraint) -> bool {
    c.terms
        .windows(2)
        .all(|w| mgr.order().rank(w[0].1.var) < mgr.order().rank(w[1].1.var))
}
