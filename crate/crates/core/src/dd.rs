//! The ADD kernel: ordered, reduced, structurally shared decision diagrams
//! with numeric terminals.
//!
//! All nodes of one counting run live in a single [`DdManager`]. Canonicity
//! is maintained through a unique table keyed by `(var, hi, lo)` for
//! internal nodes and by the terminal value for leaves, so semantically
//! equal functions built by any operation sequence share one handle and
//! handle equality decides function equality. Apply-style operations
//! (product, sum, projection) memoize results in per-operation caches.
//!
//! Terminals carry either `f64` or exact [`BigRational`] values depending on
//! the run's arithmetic mode; see [`Numeric`]. Float terminals are compared
//! bit-for-bit in the unique table — merging nearly-equal values would break
//! canonicity.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::Hash;

use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};

use crate::formula::{Assignment, Literal, Var};

/// Terminal arithmetic for one counting run. Implemented by `f64` (fast)
/// and [`BigRational`] (exact, the reference mode for tests).
pub trait Numeric: Clone + PartialEq + fmt::Debug + fmt::Display + 'static {
    /// Hashable identity used by the unique table. For floats this is the
    /// raw bit pattern.
    type Key: Eq + Hash + Clone;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn unique_key(&self) -> Self::Key;
}

impl Numeric for f64 {
    type Key = u64;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn is_one(&self) -> bool {
        *self == 1.0
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().expect("weight converts to f64")
    }
    fn unique_key(&self) -> u64 {
        self.to_bits()
    }
}

impl Numeric for BigRational {
    type Key = BigRational;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn unique_key(&self) -> BigRational {
        self.clone()
    }
}

/// Total order on diagram variables; node levels follow it strictly.
#[derive(Clone, Debug)]
pub struct DiagramVarOrder {
    rank_of: Vec<u32>,
}

impl DiagramVarOrder {
    /// Order given as a visit sequence: `seq[0]` is closest to the root.
    pub fn from_sequence(seq: &[Var]) -> Self {
        let n = seq.len();
        let mut rank_of = vec![u32::MAX; n];
        for (pos, v) in seq.iter().enumerate() {
            rank_of[v.index()] = pos as u32;
        }
        assert!(
            rank_of.iter().all(|&r| r != u32::MAX),
            "order sequence must mention every variable exactly once"
        );
        DiagramVarOrder { rank_of }
    }

    /// Plain index order `x1, x2, ...`.
    pub fn index_order(num_vars: u32) -> Self {
        DiagramVarOrder { rank_of: (0..num_vars).collect() }
    }

    pub fn num_vars(&self) -> u32 {
        self.rank_of.len() as u32
    }

    pub fn rank(&self, v: Var) -> u32 {
        self.rank_of[v.index()]
    }

    pub fn vars_by_rank(&self) -> Vec<Var> {
        let mut vars: Vec<Var> = (1..=self.num_vars()).map(Var).collect();
        vars.sort_by_key(|&v| self.rank(v));
        vars
    }
}

/// Handle to a node in a [`DdManager`]. Handle equality is function
/// equality within one manager.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Add(u32);

#[derive(Clone, Debug)]
enum Node<V> {
    Terminal(V),
    Internal { var: Var, hi: Add, lo: Add },
}

/// Node store plus operation caches for one counting run.
pub struct DdManager<V: Numeric> {
    order: DiagramVarOrder,
    nodes: Vec<Node<V>>,
    unique_internal: HashMap<(Var, Add, Add), Add>,
    unique_terminal: HashMap<V::Key, Add>,
    product_cache: HashMap<(Add, Add), Add>,
    sum_cache: HashMap<(Add, Add), Add>,
    project_cache: HashMap<(Add, Var), Add>,
}

impl<V: Numeric> DdManager<V> {
    pub fn new(order: DiagramVarOrder) -> Self {
        DdManager {
            order,
            nodes: Vec::new(),
            unique_internal: HashMap::new(),
            unique_terminal: HashMap::new(),
            product_cache: HashMap::new(),
            sum_cache: HashMap::new(),
            project_cache: HashMap::new(),
        }
    }

    pub fn order(&self) -> &DiagramVarOrder {
        &self.order
    }

    /// Total nodes ever created, terminals included.
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Level of a node for ordering checks; terminals sit below everything.
    fn level(&self, a: Add) -> u32 {
        match &self.nodes[a.0 as usize] {
            Node::Terminal(_) => u32::MAX,
            Node::Internal { var, .. } => self.order.rank(*var),
        }
    }

    pub fn is_terminal(&self, a: Add) -> bool {
        matches!(self.nodes[a.0 as usize], Node::Terminal(_))
    }

    pub fn terminal_value(&self, a: Add) -> Option<&V> {
        match &self.nodes[a.0 as usize] {
            Node::Terminal(v) => Some(v),
            Node::Internal { .. } => None,
        }
    }

    /// `(var, hi, lo)` of an internal node.
    pub fn as_internal(&self, a: Add) -> Option<(Var, Add, Add)> {
        match &self.nodes[a.0 as usize] {
            Node::Terminal(_) => None,
            Node::Internal { var, hi, lo } => Some((*var, *hi, *lo)),
        }
    }

    /// Canonical terminal for a value; repeated calls return one handle.
    /// Zero is normalized first so `-0.0` and `0.0` share a terminal.
    pub fn terminal(&mut self, v: V) -> Add {
        let v = if v.is_zero() { V::zero() } else { v };
        if let Some(&a) = self.unique_terminal.get(&v.unique_key()) {
            return a;
        }
        let a = Add(self.nodes.len() as u32);
        self.unique_terminal.insert(v.unique_key(), a);
        self.nodes.push(Node::Terminal(v));
        a
    }

    pub fn zero(&mut self) -> Add {
        self.terminal(V::zero())
    }

    pub fn one(&mut self) -> Add {
        self.terminal(V::one())
    }

    /// Canonical internal node `x ? hi : lo`. Reduces `x ? a : a` to `a`.
    /// `x` must come strictly before both children in the diagram order.
    pub fn ite(&mut self, x: Var, hi: Add, lo: Add) -> Add {
        if hi == lo {
            return hi;
        }
        let rank = self.order.rank(x);
        assert!(
            rank < self.level(hi) && rank < self.level(lo),
            "ite: {} violates the diagram variable order",
            x
        );
        if let Some(&a) = self.unique_internal.get(&(x, hi, lo)) {
            return a;
        }
        let a = Add(self.nodes.len() as u32);
        self.unique_internal.insert((x, hi, lo), a);
        self.nodes.push(Node::Internal { var: x, hi, lo });
        a
    }

    /// Diagram of a single weighted variable: `pos` on the 1-edge, `neg` on
    /// the 0-edge.
    pub fn weight_diagram(&mut self, x: Var, pos: &V, neg: &V) -> Add {
        let hi = self.terminal(pos.clone());
        let lo = self.terminal(neg.clone());
        self.ite(x, hi, lo)
    }

    /// Cofactors of `a` with respect to `x`, where `x` is at or above the
    /// node's level.
    fn cofactors(&self, a: Add, x: Var) -> (Add, Add) {
        match &self.nodes[a.0 as usize] {
            Node::Internal { var, hi, lo } if *var == x => (*hi, *lo),
            _ => (a, a),
        }
    }

    /// Pointwise product. `product(f, g)(tau) = f(tau) * g(tau)`.
    pub fn product(&mut self, f: Add, g: Add) -> Add {
        if let (Node::Terminal(a), Node::Terminal(b)) =
            (&self.nodes[f.0 as usize], &self.nodes[g.0 as usize])
        {
            let v = a.mul(b);
            return self.terminal(v);
        }
        // Multiplicative identity and annihilator.
        if let Some(v) = self.terminal_value(f) {
            if v.is_one() {
                return g;
            }
            if v.is_zero() {
                return f;
            }
        }
        if let Some(v) = self.terminal_value(g) {
            if v.is_one() {
                return f;
            }
            if v.is_zero() {
                return g;
            }
        }
        let key = if f <= g { (f, g) } else { (g, f) };
        if let Some(&r) = self.product_cache.get(&key) {
            return r;
        }
        let top = self.top_var(f, g);
        let (fh, fl) = self.cofactors(f, top);
        let (gh, gl) = self.cofactors(g, top);
        let hi = self.product(fh, gh);
        let lo = self.product(fl, gl);
        let r = self.ite(top, hi, lo);
        self.product_cache.insert(key, r);
        r
    }

    /// Pointwise sum.
    pub fn sum(&mut self, f: Add, g: Add) -> Add {
        if let (Node::Terminal(a), Node::Terminal(b)) =
            (&self.nodes[f.0 as usize], &self.nodes[g.0 as usize])
        {
            let v = a.add(b);
            return self.terminal(v);
        }
        if self.terminal_value(f).is_some_and(|v| v.is_zero()) {
            return g;
        }
        if self.terminal_value(g).is_some_and(|v| v.is_zero()) {
            return f;
        }
        let key = if f <= g { (f, g) } else { (g, f) };
        if let Some(&r) = self.sum_cache.get(&key) {
            return r;
        }
        let top = self.top_var(f, g);
        let (fh, fl) = self.cofactors(f, top);
        let (gh, gl) = self.cofactors(g, top);
        let hi = self.sum(fh, gh);
        let lo = self.sum(fl, gl);
        let r = self.ite(top, hi, lo);
        self.sum_cache.insert(key, r);
        r
    }

    fn top_var(&self, f: Add, g: Add) -> Var {
        let lf = self.level(f);
        let lg = self.level(g);
        let a = if lf <= lg { f } else { g };
        match &self.nodes[a.0 as usize] {
            Node::Internal { var, .. } => *var,
            Node::Terminal(_) => unreachable!("product/sum of two terminals handled earlier"),
        }
    }

    /// Unweighted projection: `(sum_x f)(tau) = f(tau ∪ x) + f(tau ∪ ~x)`.
    /// When `x` does not occur in `f` this doubles every terminal.
    pub fn project(&mut self, f: Add, x: Var) -> Add {
        let key = (f, x);
        if let Some(&r) = self.project_cache.get(&key) {
            return r;
        }
        let r = match self.as_internal(f) {
            None => self.sum(f, f),
            Some((var, hi, lo)) => {
                if var == x {
                    self.sum(hi, lo)
                } else if self.order.rank(var) > self.order.rank(x) {
                    // x cannot occur below var in an ordered diagram.
                    self.sum(f, f)
                } else {
                    let h = self.project(hi, x);
                    let l = self.project(lo, x);
                    self.ite(var, h, l)
                }
            }
        };
        self.project_cache.insert(key, r);
        r
    }

    /// Weighted projection `sum_x (f * W_x)` where `W_x` is the one-variable
    /// diagram carrying the literal weights of `x`. If `x` does not occur in
    /// `f` the result is `f` scaled by `pos + neg`.
    pub fn project_weighted(&mut self, f: Add, x: Var, pos: &V, neg: &V) -> Add {
        let w = self.weight_diagram(x, pos, neg);
        let fw = self.product(f, w);
        self.project(fw, x)
    }

    /// Terminal value reached by following `tau` from the root.
    pub fn evaluate<'a>(&'a self, f: Add, tau: &Assignment) -> &'a V {
        let mut cur = f;
        loop {
            match &self.nodes[cur.0 as usize] {
                Node::Terminal(v) => return v,
                Node::Internal { var, hi, lo } => {
                    cur = if tau.value(*var) { *hi } else { *lo };
                }
            }
        }
    }

    /// Variables occurring on some path from `f`.
    pub fn support(&self, f: Add) -> BTreeSet<Var> {
        let mut seen = BTreeSet::new();
        let mut vars = BTreeSet::new();
        let mut stack = vec![f];
        while let Some(a) = stack.pop() {
            if !seen.insert(a) {
                continue;
            }
            if let Node::Internal { var, hi, lo } = &self.nodes[a.0 as usize] {
                vars.insert(*var);
                stack.push(*hi);
                stack.push(*lo);
            }
        }
        vars
    }

    /// Distinct reachable nodes, terminals included.
    pub fn node_count(&self, f: Add) -> usize {
        let mut seen = BTreeSet::new();
        let mut stack = vec![f];
        while let Some(a) = stack.pop() {
            if !seen.insert(a) {
                continue;
            }
            if let Node::Internal { hi, lo, .. } = &self.nodes[a.0 as usize] {
                stack.push(*hi);
                stack.push(*lo);
            }
        }
        seen.len()
    }

    /// Depth-first iterator over root-to-zero-terminal paths, 0-edge first.
    /// Each yielded path is the literal sequence along its edges.
    pub fn zero_paths<'a>(&'a self, f: Add) -> ZeroPaths<'a, V> {
        ZeroPaths {
            mgr: self,
            stack: vec![Work::Enter(f, None)],
            path: Vec::new(),
        }
    }

    /// GraphViz dump for debugging. 1-edges solid, 0-edges dashed.
    pub fn to_dot(&self, f: Add) -> String {
        use std::fmt::Write;
        let mut out = String::from("digraph add {\n");
        let mut seen = BTreeSet::new();
        let mut stack = vec![f];
        while let Some(a) = stack.pop() {
            if !seen.insert(a) {
                continue;
            }
            match &self.nodes[a.0 as usize] {
                Node::Terminal(v) => {
                    writeln!(out, "  n{} [shape=box, label=\"{}\"];", a.0, v).unwrap();
                }
                Node::Internal { var, hi, lo } => {
                    writeln!(out, "  n{} [shape=circle, label=\"{}\"];", a.0, var).unwrap();
                    writeln!(out, "  n{} -> n{};", a.0, hi.0).unwrap();
                    writeln!(out, "  n{} -> n{} [style=dashed];", a.0, lo.0).unwrap();
                    stack.push(*hi);
                    stack.push(*lo);
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

enum Work {
    Enter(Add, Option<Literal>),
    Leave,
}

/// See [`DdManager::zero_paths`].
pub struct ZeroPaths<'a, V: Numeric> {
    mgr: &'a DdManager<V>,
    stack: Vec<Work>,
    path: Vec<Literal>,
}

impl<V: Numeric> Iterator for ZeroPaths<'_, V> {
    type Item = Vec<Literal>;

    fn next(&mut self) -> Option<Vec<Literal>> {
        while let Some(work) = self.stack.pop() {
            match work {
                Work::Leave => {
                    self.path.pop();
                }
                Work::Enter(a, lit) => {
                    if let Some(l) = lit {
                        self.path.push(l);
                        self.stack.push(Work::Leave);
                    }
                    match &self.mgr.nodes[a.0 as usize] {
                        Node::Terminal(v) => {
                            if v.is_zero() {
                                return Some(self.path.clone());
                            }
                        }
                        Node::Internal { var, hi, lo } => {
                            // hi pushed first so lo is explored first.
                            self.stack.push(Work::Enter(*hi, Some(Literal::pos(*var))));
                            self.stack.push(Work::Enter(*lo, Some(Literal::neg(*var))));
                        }
                    }
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mgr(n: u32) -> DdManager<f64> {
        DdManager::new(DiagramVarOrder::index_order(n))
    }

    fn rational_mgr(n: u32) -> DdManager<BigRational> {
        DdManager::new(DiagramVarOrder::index_order(n))
    }

    fn geq_2x1_3x2_4(m: &mut DdManager<f64>) -> Add {
        // 2 x1 + 3 x2 >= 4 over x1 < x2: true only at x1 = x2 = 1.
        let one = m.one();
        let zero = m.zero();
        let x2 = m.ite(Var(2), one, zero);
        m.ite(Var(1), x2, zero)
    }

    #[test]
    fn terminals_are_canonical() {
        let mut m = mgr(1);
        assert_eq!(m.terminal(1.0), m.terminal(1.0));
        assert_ne!(m.terminal(0.0), m.terminal(1.0));
        let t = m.terminal(0.3);
        assert_eq!(*m.evaluate(t, &Assignment::all_false(1)), 0.3);
    }

    #[test]
    fn ite_reduces_equal_children() {
        let mut m = mgr(2);
        let one = m.one();
        assert_eq!(m.ite(Var(1), one, one), one);
        let zero = m.zero();
        let node = m.ite(Var(1), one, zero);
        let tau = Assignment::new(vec![true, false]);
        assert_eq!(*m.evaluate(node, &tau), 1.0);
    }

    #[test]
    #[should_panic(expected = "diagram variable order")]
    fn ite_rejects_order_violations() {
        let mut m = mgr(2);
        let one = m.one();
        let zero = m.zero();
        let x1 = m.ite(Var(1), one, zero);
        let _ = m.ite(Var(2), x1, zero);
    }

    #[test]
    fn product_identities() {
        let mut m = mgr(2);
        let f = geq_2x1_3x2_4(&mut m);
        let one = m.one();
        let zero = m.zero();
        assert_eq!(m.product(f, one), f);
        assert_eq!(m.product(f, zero), zero);
    }

    #[test]
    fn product_of_complementary_units_is_zero() {
        let mut m = mgr(1);
        let one = m.one();
        let zero = m.zero();
        let x1 = m.ite(Var(1), one, zero);
        let not_x1 = m.ite(Var(1), zero, one);
        let p = m.product(x1, not_x1);
        assert_eq!(p, zero);
    }

    #[test]
    fn product_commutes_and_associates() {
        let mut m = mgr(3);
        let one = m.one();
        let zero = m.zero();
        let a = m.ite(Var(1), one, zero);
        let x3 = m.ite(Var(3), one, zero);
        let b = m.ite(Var(2), x3, zero);
        let c = m.weight_diagram(Var(2), &0.25, &0.75);
        assert_eq!(m.product(a, b), m.product(b, a));
        let ab = m.product(a, b);
        let bc = m.product(b, c);
        assert_eq!(m.product(ab, c), m.product(a, bc));
    }

    #[test]
    fn weighted_projection_of_unit_constraint() {
        let mut m = rational_mgr(1);
        let one = m.one();
        let zero = m.zero();
        let f = m.ite(Var(1), one, zero);
        let pos = BigRational::new(3.into(), 10.into());
        let neg = BigRational::new(7.into(), 10.into());
        let r = m.project_weighted(f, Var(1), &pos, &neg);
        assert_eq!(r, m.terminal(pos));
    }

    #[test]
    fn weighted_projection_of_constant_scales() {
        let mut m = mgr(1);
        let one = m.one();
        let r = m.project_weighted(one, Var(1), &0.3, &0.7);
        assert_eq!(r, m.terminal(1.0));
    }

    #[test]
    fn projection_commutes() {
        let mut m = mgr(2);
        let f = geq_2x1_3x2_4(&mut m);
        let xy = {
            let t = m.project_weighted(f, Var(1), &0.3, &0.7);
            m.project_weighted(t, Var(2), &0.6, &0.4)
        };
        let yx = {
            let t = m.project_weighted(f, Var(2), &0.6, &0.4);
            m.project_weighted(t, Var(1), &0.3, &0.7)
        };
        assert_eq!(xy, yx);
    }

    #[test]
    fn early_projection_is_structural() {
        // sum_x (f * g) = (sum_x f) * g when x is not in g.
        let mut m = mgr(3);
        let one = m.one();
        let zero = m.zero();
        let x2 = m.ite(Var(2), one, zero);
        let f = m.ite(Var(1), x2, zero);
        let g = m.ite(Var(3), zero, one);
        let fg = m.product(f, g);
        let left = m.project_weighted(fg, Var(1), &0.3, &0.7);
        let pf = m.project_weighted(f, Var(1), &0.3, &0.7);
        let right = m.product(pf, g);
        assert_eq!(left, right);
    }

    #[test]
    fn evaluate_follows_paths() {
        let mut m = mgr(2);
        let f = geq_2x1_3x2_4(&mut m);
        assert_eq!(*m.evaluate(f, &Assignment::new(vec![true, true])), 1.0);
        assert_eq!(*m.evaluate(f, &Assignment::new(vec![false, true])), 0.0);
    }

    #[test]
    fn zero_paths_enumerates_failing_branches() {
        let mut m = mgr(2);
        let f = geq_2x1_3x2_4(&mut m);
        let paths: Vec<Vec<Literal>> = m.zero_paths(f).collect();
        assert_eq!(
            paths,
            vec![
                vec![Literal::neg(Var(1))],
                vec![Literal::pos(Var(1)), Literal::neg(Var(2))],
            ]
        );
        let one = m.one();
        assert_eq!(m.zero_paths(one).count(), 0);
        let zero = m.zero();
        let empty: Vec<Vec<Literal>> = m.zero_paths(zero).collect();
        assert_eq!(empty, vec![Vec::new()]);
    }

    #[test]
    fn node_count_includes_terminals() {
        let mut m = mgr(2);
        let one = m.one();
        assert_eq!(m.node_count(one), 1);
        let zero = m.zero();
        let unit = m.ite(Var(1), one, zero);
        assert_eq!(m.node_count(unit), 3);
        let f = geq_2x1_3x2_4(&mut m);
        assert_eq!(m.node_count(f), 4);
    }

    #[test]
    fn dot_dump_mentions_every_node() {
        let mut m = mgr(2);
        let f = geq_2x1_3x2_4(&mut m);
        let dot = m.to_dot(f);
        assert!(dot.contains("x1"));
        assert!(dot.contains("x2"));
        assert!(dot.contains("style=dashed"));
    }
}
