//! Variable-order and clustering heuristics.
//!
//! The diagram variable order comes from maximum-cardinality search (MCS)
//! over the primal graph; the cluster variable order from a lexicographic
//! BFS (LexP). Constraints are placed in the cluster of their minimum-rank
//! variable, and post-projection results move forward to the earliest
//! cluster that will project one of their remaining variables. All tie
//! breaking is by smallest variable index so runs are deterministic.

use std::collections::BTreeSet;

use crate::dd::DiagramVarOrder;
use crate::formula::{PBConstraint, PBFormula, Var};

/// Undirected co-occurrence graph: an edge joins two variables appearing in
/// a common constraint. Declared-but-unused variables are isolated vertices.
#[derive(Clone, Debug)]
pub struct PrimalGraph {
    adj: Vec<BTreeSet<u32>>,
    num_vars: u32,
}

impl PrimalGraph {
    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn neighbors(&self, v: Var) -> impl Iterator<Item = Var> + '_ {
        self.adj[v.index()].iter().map(|&i| Var(i))
    }

    pub fn has_edge(&self, a: Var, b: Var) -> bool {
        self.adj[a.index()].contains(&b.0)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|s| s.len()).sum::<usize>() / 2
    }
}

pub fn build_primal_graph(f: &PBFormula) -> PrimalGraph {
    let mut adj = vec![BTreeSet::new(); f.num_vars as usize];
    for c in &f.constraints {
        let vars: Vec<Var> = c.vars().collect();
        for (i, &a) in vars.iter().enumerate() {
            for &b in &vars[i + 1..] {
                if a != b {
                    adj[a.index()].insert(b.0);
                    adj[b.index()].insert(a.0);
                }
            }
        }
    }
    PrimalGraph { adj, num_vars: f.num_vars }
}

/// Maximum-cardinality search: repeatedly visit the unvisited vertex with
/// the most visited neighbors, smallest index on ties. The visit sequence
/// becomes the diagram variable order.
pub fn mcs_order(g: &PrimalGraph) -> DiagramVarOrder {
    let n = g.num_vars as usize;
    let mut visited = vec![false; n];
    let mut weight = vec![0u32; n];
    let mut seq = Vec::with_capacity(n);
    for _ in 0..n {
        let pick = (0..n)
            .filter(|&i| !visited[i])
            .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
            .expect("an unvisited vertex remains");
        visited[pick] = true;
        seq.push(Var(pick as u32 + 1));
        for nb in &g.adj[pick] {
            let idx = (nb - 1) as usize;
            if !visited[idx] {
                weight[idx] += 1;
            }
        }
    }
    DiagramVarOrder::from_sequence(&seq)
}

/// Injection from variables to positive ranks used to partition constraints
/// into clusters.
#[derive(Clone, Debug)]
pub struct ClusterVarOrder {
    rank_of: Vec<u32>,
}

impl ClusterVarOrder {
    /// Ranks `1..=n` assigned in visit order.
    pub fn from_sequence(seq: &[Var]) -> Self {
        let n = seq.len();
        let mut rank_of = vec![0u32; n];
        for (pos, v) in seq.iter().enumerate() {
            rank_of[v.index()] = pos as u32 + 1;
        }
        assert!(rank_of.iter().all(|&r| r != 0));
        ClusterVarOrder { rank_of }
    }

    pub fn index_order(num_vars: u32) -> Self {
        ClusterVarOrder { rank_of: (1..=num_vars).collect() }
    }

    pub fn rank(&self, v: Var) -> u32 {
        self.rank_of[v.index()]
    }
}

/// Lexicographic BFS: each unvisited vertex carries the list of its visited
/// neighbors' visit stamps; the vertex with the lexicographically largest
/// label is visited next, smallest index on ties. Earlier stamps dominate,
/// so stamps are stored as `n - step`.
pub fn lexp_order(g: &PrimalGraph) -> ClusterVarOrder {
    let n = g.num_vars as usize;
    let mut visited = vec![false; n];
    let mut labels: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut seq = Vec::with_capacity(n);
    for step in 0..n {
        let pick = (0..n)
            .filter(|&i| !visited[i])
            .max_by(|&a, &b| labels[a].cmp(&labels[b]).then(b.cmp(&a)))
            .expect("an unvisited vertex remains");
        visited[pick] = true;
        seq.push(Var(pick as u32 + 1));
        let stamp = (n - step) as u32;
        for nb in &g.adj[pick] {
            let idx = (nb - 1) as usize;
            if !visited[idx] {
                labels[idx].push(stamp);
            }
        }
    }
    ClusterVarOrder::from_sequence(&seq)
}

/// Cluster index of a constraint: the minimum rank over its variables.
pub fn constraint_rank(c: &PBConstraint, rho: &ClusterVarOrder) -> u32 {
    c.vars()
        .map(|v| rho.rank(v))
        .min()
        .expect("constraint has at least one term")
}

/// Destination cluster for a post-projection result: the earliest later
/// cluster that projects one of its variables. Constants move to the next
/// cluster; `m` is the fallback when nothing intersects.
pub fn choose_cluster(
    support: &BTreeSet<Var>,
    current: usize,
    project_sets: &[BTreeSet<Var>],
) -> usize {
    let m = project_sets.len();
    debug_assert!(current < m);
    if support.is_empty() {
        return current + 1;
    }
    for j in current + 1..=m {
        if !project_sets[j - 1].is_disjoint(support) {
            return j;
        }
    }
    m
}
