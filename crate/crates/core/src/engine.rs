//! The counting loop: normalize, preprocess, build one diagram per
//! constraint, then eliminate variables cluster by cluster.
//!
//! Constraints are partitioned into clusters by the rank of their
//! minimum-rank variable under the cluster order. Cluster `i` owns the
//! projection set `X_i`: the variables of its constraints that appear in no
//! later cluster, so they can be summed out as soon as cluster `i`'s product
//! is formed. The projected result then joins the earliest later cluster
//! that will project one of its remaining variables. After the last
//! cluster, the surviving diagram is a single terminal; it is scaled by the
//! weights of backbone-fixed literals and by `pos + neg` for every variable
//! that ended up in no constraint.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::construct::constraint_add;
use crate::dd::{Add, DdManager, DiagramVarOrder, Numeric};
use crate::formula::{PBFormula, Var, WeightFunction};
use crate::heuristics::{
    build_primal_graph, choose_cluster, constraint_rank, lexp_order, mcs_order,
    ClusterVarOrder,
};
use crate::preprocess::{preprocess, PreprocessConfig, PreprocessReport};
use crate::solver::DpllSolver;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagramHeuristic {
    /// Maximum-cardinality search over the primal graph (default).
    Mcs,
    /// Plain variable-index order.
    Index,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterHeuristic {
    /// Lexicographic BFS over the primal graph (default).
    LexP,
    /// Plain variable-index order.
    Index,
}

#[derive(Clone, Debug)]
pub struct CountConfig {
    pub preprocess: PreprocessConfig,
    pub diagram_order: DiagramHeuristic,
    pub cluster_order: ClusterHeuristic,
    /// Cooperative deadline; the cluster loop checks it between operations.
    pub deadline: Option<Instant>,
    /// Cooperative cap on diagram nodes, standing in for a memory limit.
    pub max_nodes: Option<usize>,
}

impl Default for CountConfig {
    fn default() -> Self {
        CountConfig {
            preprocess: PreprocessConfig::default(),
            diagram_order: DiagramHeuristic::Mcs,
            cluster_order: ClusterHeuristic::LexP,
            deadline: None,
            max_nodes: None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CountStats {
    pub nodes_created: usize,
    pub products: usize,
    pub projections: usize,
    pub peak_live_diagrams: usize,
    pub preprocess: PreprocessReport,
    pub preprocess_time: Duration,
    pub build_time: Duration,
    pub count_time: Duration,
}

#[derive(Clone, Debug)]
pub struct CountResult<V> {
    pub value: V,
    pub stats: CountStats,
}

#[derive(Debug, Error)]
pub enum EngineError {
    /// Cooperative timeout; carries whatever statistics accumulated so the
    /// caller can still flush them.
    #[error("timeout reached while counting")]
    Timeout { stats: Box<CountStats> },
    /// The diagram node cap was exceeded.
    #[error("node limit exceeded while counting")]
    NodeLimit { stats: Box<CountStats> },
}

/// Internal resource markers; mapped to [`EngineError`] at the top level
/// where the stats are available.
enum ResourceExceeded {
    Deadline,
    Nodes,
}

fn check_limits<V: Numeric>(
    config: &CountConfig,
    mgr: Option<&DdManager<V>>,
) -> Result<(), ResourceExceeded> {
    if let Some(d) = config.deadline {
        if Instant::now() >= d {
            return Err(ResourceExceeded::Deadline);
        }
    }
    if let (Some(cap), Some(mgr)) = (config.max_nodes, mgr) {
        if mgr.num_nodes() > cap {
            return Err(ResourceExceeded::Nodes);
        }
    }
    Ok(())
}

/// Weighted model count of `f` under `w`. The arithmetic mode is the type
/// parameter: `f64` for speed, `BigRational` for exactness.
pub fn count<V: Numeric>(
    f: &PBFormula,
    w: &WeightFunction,
    config: &CountConfig,
) -> Result<CountResult<V>, EngineError> {
    let mut stats = CountStats::default();
    match count_impl(f, w, config, &mut stats) {
        Ok(value) => Ok(CountResult { value, stats }),
        Err(ResourceExceeded::Deadline) => {
            Err(EngineError::Timeout { stats: Box::new(stats) })
        }
        Err(ResourceExceeded::Nodes) => {
            Err(EngineError::NodeLimit { stats: Box::new(stats) })
        }
    }
}

fn count_impl<V: Numeric>(
    f: &PBFormula,
    w: &WeightFunction,
    config: &CountConfig,
    stats: &mut CountStats,
) -> Result<V, ResourceExceeded> {
    assert!(w.num_vars() >= f.num_vars, "weight function must cover all variables");

    let t0 = Instant::now();
    let normalized = match f.normalized() {
        Some(g) => g,
        None => return Ok(V::zero()),
    };
    let outcome = preprocess(&normalized, &config.preprocess, &mut DpllSolver);
    stats.preprocess = outcome.report.clone();
    stats.preprocess_time = t0.elapsed();
    if outcome.unsat {
        return Ok(V::zero());
    }
    let mut formula = outcome.formula;
    check_limits::<V>(config, None)?;

    // Scalar contribution of variables outside every constraint: fixed
    // literals carry their own weight, free variables sum both phases.
    let constrained = formula.constraint_vars();
    debug_assert!(
        formula.fixed.iter().all(|l| !constrained.contains(&l.var)),
        "fixed literals must be propagated out of the constraints"
    );
    let mut scalar = V::one();
    for v in (1..=f.num_vars).map(Var) {
        if constrained.contains(&v) {
            continue;
        }
        let factor = match formula.fixed.iter().find(|l| l.var == v) {
            Some(l) => V::from_rational(w.literal_weight(*l)),
            None => {
                let pos = V::from_rational(w.pos_weight(v));
                let neg = V::from_rational(w.neg_weight(v));
                pos.add(&neg)
            }
        };
        scalar = scalar.mul(&factor);
    }

    if formula.constraints.is_empty() {
        return Ok(scalar);
    }

    let t1 = Instant::now();
    let graph = build_primal_graph(&formula);
    let order = match config.diagram_order {
        DiagramHeuristic::Mcs => mcs_order(&graph),
        DiagramHeuristic::Index => DiagramVarOrder::index_order(f.num_vars),
    };
    let rho = match config.cluster_order {
        ClusterHeuristic::LexP => lexp_order(&graph),
        ClusterHeuristic::Index => ClusterVarOrder::index_order(f.num_vars),
    };
    for c in &mut formula.constraints {
        c.sort_terms_by_rank(|v| order.rank(v));
    }

    let m = constrained.iter().map(|&v| rho.rank(v)).max().unwrap() as usize;
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (idx, c) in formula.constraints.iter().enumerate() {
        let rank = constraint_rank(c, &rho) as usize;
        buckets[rank - 1].push(idx);
    }

    // kappa[i]: diagrams pending in cluster i+1; project_sets[i]: variables
    // summed out right after that cluster's product.
    let mut mgr: DdManager<V> = DdManager::new(order);
    let mut kappa: Vec<Vec<Add>> = vec![Vec::new(); m];
    let mut project_sets: Vec<BTreeSet<Var>> = vec![BTreeSet::new(); m];
    let mut placed: BTreeSet<Var> = BTreeSet::new();
    for i in (0..m).rev() {
        let mut vars = BTreeSet::new();
        for &idx in &buckets[i] {
            vars.extend(formula.constraints[idx].vars());
        }
        project_sets[i] = vars.difference(&placed).copied().collect();
        placed.extend(vars);
        for &idx in &buckets[i] {
            check_limits(config, Some(&mgr))?;
            kappa[i].push(constraint_add(&mut mgr, &formula.constraints[idx]));
        }
    }
    stats.build_time = t1.elapsed();
    stats.peak_live_diagrams = kappa.iter().map(Vec::len).sum();

    let t2 = Instant::now();
    let mut final_value: Option<V> = None;
    for i in 0..m {
        if kappa[i].is_empty() {
            continue;
        }
        check_limits(config, Some(&mgr))?;
        let diagrams = std::mem::take(&mut kappa[i]);
        let mut product = multiply_smallest_first(&mut mgr, diagrams, stats);
        let mut to_project: Vec<Var> = project_sets[i].iter().copied().collect();
        to_project.sort_by_key(|&v| mgr.order().rank(v));
        for v in to_project {
            check_limits(config, Some(&mgr))?;
            #[cfg(debug_assertions)]
            assert_projection_safe(&mgr, &kappa, v);
            let pos = V::from_rational(w.pos_weight(v));
            let neg = V::from_rational(w.neg_weight(v));
            product = mgr.project_weighted(product, v, &pos, &neg);
            stats.projections += 1;
        }
        if i + 1 < m {
            let support = mgr.support(product);
            let j = choose_cluster(&support, i + 1, &project_sets);
            kappa[j - 1].push(product);
            let live: usize = kappa.iter().map(Vec::len).sum();
            stats.peak_live_diagrams = stats.peak_live_diagrams.max(live);
        } else {
            final_value = Some(
                mgr.terminal_value(product)
                    .expect("all variables projected before the last cluster ends")
                    .clone(),
            );
        }
    }
    stats.count_time = t2.elapsed();
    stats.nodes_created = mgr.num_nodes();

    let diagram_value = final_value.expect("last cluster produced a value");
    Ok(diagram_value.mul(&scalar))
}

/// Multiplies a cluster's diagrams smallest-first to keep intermediate
/// results small.
fn multiply_smallest_first<V: Numeric>(
    mgr: &mut DdManager<V>,
    diagrams: Vec<Add>,
    stats: &mut CountStats,
) -> Add {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let mut heap: BinaryHeap<(Reverse<(usize, usize)>, Add)> = diagrams
        .into_iter()
        .enumerate()
        .map(|(seq, a)| (Reverse((mgr.node_count(a), seq)), a))
        .collect();
    let mut seq = heap.len();
    while heap.len() > 1 {
        let (_, a) = heap.pop().unwrap();
        let (_, b) = heap.pop().unwrap();
        let p = mgr.product(a, b);
        stats.products += 1;
        heap.push((Reverse((mgr.node_count(p), seq)), p));
        seq += 1;
    }
    heap.pop().expect("cluster is nonempty").1
}

/// A variable about to be projected must occur in no diagram still waiting
/// in another cluster; early projection would otherwise be unsound.
#[cfg(debug_assertions)]
fn assert_projection_safe<V: Numeric>(mgr: &DdManager<V>, kappa: &[Vec<Add>], v: Var) {
    for (ci, cluster) in kappa.iter().enumerate() {
        for &a in cluster {
            debug_assert!(
                !mgr.support(a).contains(&v),
                "projected variable {} still live in cluster {}",
                v,
                ci + 1
            );
        }
    }
}
