//! Acceptance suite: every release gate runs here, one pass/fail line per
//! criterion. Run with `cargo test --test acceptance -- --nocapture` to see
//! the lines; any failure fails the corresponding test.

mod common;

use std::collections::BTreeSet;
use std::process::Command;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_instance, random_raw_constraint, ratio, small_instance};
use pbcount::cnf::encode_counting_safe;
use pbcount::construct::{constraint_add, construct_geq_suffix, Bound, Interval};
use pbcount::dd::{DdManager, DiagramVarOrder};
use pbcount::engine::{count, ClusterHeuristic, CountConfig, DiagramHeuristic};
use pbcount::formula::{
    normalize, Assignment, Literal, Normalized, PBConstraint, PBFormula, RelOp, Var,
    WeightFunction,
};
use pbcount::oracle::{
    brute_force_backbone, brute_force_count, cnf_weighted_count, to_f64, OracleBudget,
};
use pbcount::preprocess::{
    add_backbone, delete_constraints, PreprocessConfig, PreprocessMode,
};
use pbcount::solver::DpllSolver;

const SUITE_SEED: u64 = 20240601;
const SUITE_SIZE: usize = 500;

fn suite() -> Vec<(PBFormula, WeightFunction)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    (0..SUITE_SIZE).map(|_| random_instance(&mut rng)).collect()
}

fn config_with(pre: PreprocessMode, diag: DiagramHeuristic, cluster: ClusterHeuristic) -> CountConfig {
    CountConfig {
        preprocess: PreprocessConfig { mode: pre, delete_literal_cap: 20 },
        diagram_order: diag,
        cluster_order: cluster,
        ..CountConfig::default()
    }
}

#[test]
fn engine_count_matches_brute_force_oracle() {
    let budget = OracleBudget::default();
    let config = CountConfig::default();
    for (i, (formula, weights)) in suite().iter().enumerate() {
        let expected = brute_force_count(formula, weights, budget).unwrap();
        let exact = count::<BigRational>(formula, weights, &config).unwrap().value;
        assert_eq!(exact, expected, "instance {}", i);
        let float = count::<f64>(formula, weights, &config).unwrap().value;
        let reference = to_f64(&expected);
        if reference == 0.0 {
            assert_eq!(float, 0.0, "instance {}", i);
        } else {
            let rel = ((float - reference) / reference).abs();
            assert!(rel <= 1e-9, "instance {}: relative error {}", i, rel);
        }
    }
    println!(
        "acceptance: oracle equivalence on {} random instances (exact rational, 1e-9 float) PASS",
        SUITE_SIZE
    );
}

#[test]
fn degree_sweep_produces_five_canonical_diagrams() {
    let mut mgr: DdManager<f64> = DdManager::new(DiagramVarOrder::index_order(2));
    let x = |i: u32| Literal::pos(Var(i));
    let at = |v: i64| Bound::At(BigInt::from(v));
    let mut distinct = Vec::new();
    for b in -2..=7i64 {
        let c = PBConstraint::from_i64(&[(2, x(1)), (3, x(2))], RelOp::Ge, b);
        let (interval, diagram) = construct_geq_suffix(&mut mgr, &c, 0, BigInt::from(b));
        assert!(interval.contains(&BigInt::from(b)));
        if !distinct.iter().any(|(d, _)| *d == diagram) {
            distinct.push((diagram, interval));
        }
    }
    assert_eq!(distinct.len(), 5, "expected five canonical diagrams");
    let intervals: Vec<Interval> = distinct.into_iter().map(|(_, iv)| iv).collect();
    assert_eq!(intervals[0], Interval::new(Bound::NegInf, at(0)));
    assert_eq!(intervals[1], Interval::new(at(1), at(2)));
    assert_eq!(intervals[2], Interval::new(at(3), at(3)));
    assert_eq!(intervals[3], Interval::new(at(4), at(5)));
    assert_eq!(intervals[4], Interval::new(at(6), Bound::PosInf));
    println!("acceptance: degree sweep partitions into five canonical diagrams PASS");
}

#[test]
fn entailed_constraint_is_deleted_without_changing_the_count() {
    let x = |i: u32| Literal::pos(Var(i));
    let formula = PBFormula::with_constraints(
        4,
        vec![
            PBConstraint::from_i64(&[(3, x(1)), (4, x(2))], RelOp::Ge, 4),
            PBConstraint::from_i64(&[(3, x(1)), (1, x(3)), (1, x(4))], RelOp::Ge, 4),
            PBConstraint::from_i64(&[(3, x(2)), (1, x(3)), (1, x(4))], RelOp::Ge, 4),
        ],
    );
    let (reduced, deleted) = delete_constraints(&formula, 20);
    assert_eq!(deleted, 1);
    assert_eq!(reduced.constraints.len(), 2);
    assert!(reduced.constraints.iter().all(|c| c.terms.len() == 3));

    let budget = OracleBudget::default();
    let weights = WeightFunction::unweighted(4);
    let before = brute_force_count(&formula, &weights, budget).unwrap();
    let after = brute_force_count(&reduced, &weights, budget).unwrap();
    assert_eq!(before, after);
    println!("acceptance: entailed constraint deleted, count preserved PASS");
}

#[test]
fn preprocessing_configurations_agree_and_backbone_is_exact() {
    let budget = OracleBudget::default();
    for (i, (formula, weights)) in suite().iter().enumerate() {
        let mut values = Vec::new();
        for pre in [PreprocessMode::None, PreprocessMode::BackboneOnly, PreprocessMode::Full] {
            let config = config_with(pre, DiagramHeuristic::Mcs, ClusterHeuristic::LexP);
            values.push(count::<BigRational>(formula, weights, &config).unwrap().value);
        }
        assert_eq!(values[0], values[1], "instance {}", i);
        assert_eq!(values[1], values[2], "instance {}", i);

        // The backbone found by solving matches the one found by
        // enumeration on the normalized formula.
        if let Some(normalized) = formula.normalized() {
            let expected = brute_force_backbone(&normalized, budget).unwrap();
            let (_, backbone, unsat) = add_backbone(&normalized, &mut DpllSolver);
            let got: BTreeSet<Literal> = backbone.into_iter().collect();
            if unsat {
                assert!(expected.is_empty(), "instance {}", i);
            } else {
                assert_eq!(got, expected, "instance {}", i);
            }
        }
    }
    println!(
        "acceptance: preprocessing invariance and exact backbones on {} instances PASS",
        SUITE_SIZE
    );
}

#[test]
fn heuristic_combinations_return_equal_counts() {
    for (i, (formula, weights)) in suite().iter().enumerate() {
        let mut exact = Vec::new();
        let mut float = Vec::new();
        for diag in [DiagramHeuristic::Mcs, DiagramHeuristic::Index] {
            for cluster in [ClusterHeuristic::LexP, ClusterHeuristic::Index] {
                let config = config_with(PreprocessMode::Full, diag, cluster);
                exact.push(count::<BigRational>(formula, weights, &config).unwrap().value);
                float.push(count::<f64>(formula, weights, &config).unwrap().value);
            }
        }
        for v in &exact[1..] {
            assert_eq!(*v, exact[0], "instance {}", i);
        }
        for v in &float[1..] {
            if float[0] == 0.0 {
                assert_eq!(*v, 0.0, "instance {}", i);
            } else {
                assert!(((v - float[0]) / float[0]).abs() <= 1e-9, "instance {}", i);
            }
        }
    }
    println!(
        "acceptance: heuristic invariance across 4 order combinations on {} instances PASS",
        SUITE_SIZE
    );
}

#[test]
fn early_projection_commutes_with_product_structurally() {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 0x5eed);
    let checks = 1000;
    for round in 0..checks {
        let num_vars: u32 = rng.gen_range(3..=7);
        let mut mgr: DdManager<f64> = DdManager::new(DiagramVarOrder::index_order(num_vars));
        let x = Var(rng.gen_range(1..=num_vars));

        // f may mention x; g must not.
        let f_raw = common::random_constraint(&mut rng, num_vars, 6);
        let mut g_raw;
        loop {
            g_raw = common::random_constraint(&mut rng, num_vars, 6);
            if !g_raw.vars().any(|v| v == x) {
                break;
            }
        }
        let to_add = |mgr: &mut DdManager<f64>, raw: &PBConstraint| match normalize(raw) {
            Normalized::Constraint(mut c) => {
                c.sort_terms_by_rank(|v| mgr.order().rank(v));
                constraint_add(mgr, &c)
            }
            Normalized::AlwaysTrue => mgr.one(),
            Normalized::AlwaysFalse => mgr.zero(),
        };
        let mut f = to_add(&mut mgr, &f_raw);
        let g = to_add(&mut mgr, &g_raw);
        // Sometimes pre-project another variable so f carries real-valued
        // terminals, not just 0/1.
        if rng.gen_bool(0.3) {
            let other = Var(rng.gen_range(1..=num_vars));
            if other != x && !mgr.support(g).contains(&other) {
                f = mgr.project_weighted(f, other, &0.25, &0.5);
            }
        }
        let pos = rng.gen_range(1..=63) as f64 / 64.0;
        let neg = 1.0 - pos;

        let fg = mgr.product(f, g);
        let left = mgr.project_weighted(fg, x, &pos, &neg);
        let pf = mgr.project_weighted(f, x, &pos, &neg);
        let right = mgr.product(pf, g);
        assert_eq!(left, right, "round {}", round);
    }
    println!(
        "acceptance: early projection matched product-then-project on {} random checks PASS",
        checks
    );
}

#[test]
fn cnf_export_preserves_weighted_counts_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 0xc4f);
    let budget = OracleBudget::default();
    let instances = 100;
    for i in 0..instances {
        let (formula, weights) = small_instance(&mut rng);
        let expected = brute_force_count(&formula, &weights, budget).unwrap();
        let cnf = encode_counting_safe(&formula, &weights);
        let weight = |lit: i32| -> BigRational {
            let v = lit.unsigned_abs();
            if v <= cnf.num_original_vars {
                if lit > 0 {
                    weights.pos_weight(Var(v)).clone()
                } else {
                    weights.neg_weight(Var(v)).clone()
                }
            } else {
                ratio(1, 1)
            }
        };
        let cnf_count = cnf_weighted_count(&cnf.clauses, cnf.num_vars, &weight);
        assert_eq!(cnf_count, expected, "instance {}", i);
    }
    println!(
        "acceptance: counting-safe CNF export exact on {} random instances PASS",
        instances
    );
}

#[test]
fn normalization_preserves_satisfying_assignments() {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 0x501);
    let checks = 1000;
    for round in 0..checks {
        let raw = random_raw_constraint(&mut rng, 12, 10);
        let n = raw.vars().map(|v| v.0).max().unwrap();
        let normalized = normalize(&raw);
        if let Normalized::Constraint(c) = &normalized {
            assert!(c.is_relaxed_normalized(), "round {}", round);
        }
        for bits in 0..1u64 << n {
            let tau = Assignment::from_bits(n, bits);
            let expect = raw.evaluate(&tau);
            let got = match &normalized {
                Normalized::Constraint(c) => c.evaluate(&tau),
                Normalized::AlwaysTrue => true,
                Normalized::AlwaysFalse => false,
            };
            assert_eq!(expect, got, "round {} assignment {:?}", round, tau);
        }
    }
    println!(
        "acceptance: normalization preserved satisfying sets on {} raw constraints PASS",
        checks
    );
}

#[test]
fn cli_runs_are_byte_identical() {
    let exe = env!("CARGO_BIN_EXE_pbcount");
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/entailed.opb");
    for args in [
        vec![fixture.to_string()],
        vec![fixture.to_string(), "-v".into(), "--mode".into(), "rational".into()],
        vec![fixture.to_string(), "--pre".into(), "none".into()],
    ] {
        let run = |args: &[String]| {
            let out = Command::new(exe).args(args).output().expect("binary runs");
            assert!(out.status.success(), "args {:?}: {:?}", args, out);
            out.stdout
        };
        let first = run(&args);
        let second = run(&args);
        assert_eq!(first, second, "args {:?}", args);
        assert!(!first.is_empty());
    }
    println!("acceptance: CLI output byte-identical across repeated runs PASS");
}

#[test]
fn weighted_example_counts_are_reproduced() {
    // Two hand-checked counts: a weighted clause and an empty formula with
    // free variables.
    let x = |i: u32| Literal::pos(Var(i));
    let f = PBFormula::with_constraints(
        2,
        vec![PBConstraint::from_i64(&[(1, x(1)), (1, x(2))], RelOp::Ge, 1)],
    );
    let mut w = WeightFunction::unweighted(2);
    w.set(Var(1), ratio(3, 10), ratio(7, 10));
    w.set(Var(2), ratio(6, 10), ratio(4, 10));
    let r = count::<BigRational>(&f, &w, &CountConfig::default()).unwrap();
    assert_eq!(r.value, ratio(72, 100));

    let empty = PBFormula::new(3);
    let unweighted = WeightFunction::unweighted(3);
    let r = count::<BigRational>(&empty, &unweighted, &CountConfig::default()).unwrap();
    assert_eq!(r.value, BigRational::from_integer(8.into()));
    assert!(!r.value.is_zero());
    println!("acceptance: hand-checked weighted counts reproduced PASS");
}
