//! Command-line front end: parse an OPB instance (and optional weights),
//! count its weighted models, optionally export a counting-safe CNF or
//! cross-check against the brute-force oracle.
//!
//! Exit codes: 0 success, 1 I/O or usage failure, 2 parse error, 3 timeout,
//! 4 resource limit (node cap or oracle budget), 5 oracle mismatch.

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, ValueEnum};
use num::rational::BigRational;
use num::ToPrimitive;

use pbcount::cnf::{emit_weighted_dimacs, encode_counting_safe};
use pbcount::engine::{
    count, ClusterHeuristic, CountConfig, CountResult, CountStats, DiagramHeuristic,
    EngineError,
};
use pbcount::formula::Var;
use pbcount::opb::{parse_opb, parse_weight_directives};
use pbcount::oracle::{brute_force_count, OracleBudget, OracleError};
use pbcount::preprocess::{PreprocessConfig, PreprocessMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PreArg {
    None,
    Backbone,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DiagramOrderArg {
    Mcs,
    Index,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ClusterOrderArg {
    Lexp,
    Index,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Float64,
    Rational,
}

/// Weighted model counter for pseudo-Boolean formulas.
#[derive(Parser, Debug)]
#[command(name = "pbcount", version, about)]
struct Cli {
    /// OPB input file, or '-' for stdin.
    input: String,

    /// Sidecar weights file ('w <var> <pos> <neg>' lines).
    #[arg(long)]
    weights: Option<PathBuf>,

    /// Preprocessing passes to run.
    #[arg(long, value_enum, default_value_t = PreArg::Full)]
    pre: PreArg,

    /// Diagram variable order heuristic.
    #[arg(long, value_enum, default_value_t = DiagramOrderArg::Mcs)]
    diagram_order: DiagramOrderArg,

    /// Cluster variable order heuristic.
    #[arg(long, value_enum, default_value_t = ClusterOrderArg::Lexp)]
    cluster_order: ClusterOrderArg,

    /// Terminal arithmetic.
    #[arg(long, value_enum, default_value_t = ModeArg::Float64)]
    mode: ModeArg,

    /// Skip deletion preprocessing for constraints with more literals.
    #[arg(long, default_value_t = 20)]
    delete_cap: usize,

    /// Cooperative timeout in seconds.
    #[arg(long)]
    timeout: Option<u64>,

    /// Abort once the diagram store holds more nodes than this.
    #[arg(long)]
    max_nodes: Option<usize>,

    /// Print preprocessing details as comment lines.
    #[arg(short, long)]
    verbose: bool,

    /// Print counting statistics as comment lines (includes timings).
    #[arg(long)]
    stats: bool,

    /// Also write the counting-safe weighted DIMACS encoding here.
    #[arg(long)]
    emit_cnf: Option<PathBuf>,

    /// Cross-check the result against brute-force enumeration (small
    /// instances only).
    #[arg(long)]
    oracle: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, String> {
    let text = if cli.input == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| format!("reading stdin: {}", e))?;
        buf
    } else {
        fs::read_to_string(&cli.input)
            .map_err(|e| format!("reading {}: {}", cli.input, e))?
    };

    let mut instance = match parse_opb(&text) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("parse error: {}", e);
            return Ok(ExitCode::from(2));
        }
    };
    for warning in &instance.warnings {
        eprintln!("warning: {}", warning);
    }
    if let Some(path) = &cli.weights {
        let wtext = fs::read_to_string(path)
            .map_err(|e| format!("reading {}: {}", path.display(), e))?;
        match parse_weight_directives(&wtext, instance.formula.num_vars) {
            Ok(directives) => {
                for (v, pos, neg) in directives {
                    instance.weights.set(Var(v), pos, neg);
                }
            }
            Err(e) => {
                eprintln!("parse error: {}", e);
                return Ok(ExitCode::from(2));
            }
        }
    }

    if let Some(path) = &cli.emit_cnf {
        let cnf = encode_counting_safe(&instance.formula, &instance.weights);
        fs::write(path, emit_weighted_dimacs(&cnf))
            .map_err(|e| format!("writing {}: {}", path.display(), e))?;
    }

    let config = CountConfig {
        preprocess: PreprocessConfig {
            mode: match cli.pre {
                PreArg::None => PreprocessMode::None,
                PreArg::Backbone => PreprocessMode::BackboneOnly,
                PreArg::Full => PreprocessMode::Full,
            },
            delete_literal_cap: cli.delete_cap,
        },
        diagram_order: match cli.diagram_order {
            DiagramOrderArg::Mcs => DiagramHeuristic::Mcs,
            DiagramOrderArg::Index => DiagramHeuristic::Index,
        },
        cluster_order: match cli.cluster_order {
            ClusterOrderArg::Lexp => ClusterHeuristic::LexP,
            ClusterOrderArg::Index => ClusterHeuristic::Index,
        },
        deadline: cli.timeout.map(|s| Instant::now() + Duration::from_secs(s)),
        max_nodes: cli.max_nodes,
    };

    let outcome = match cli.mode {
        ModeArg::Float64 => {
            match count::<f64>(&instance.formula, &instance.weights, &config) {
                Ok(CountResult { value, stats }) => {
                    report(cli, &stats);
                    let oracle_code = oracle_check(cli, &instance, |exact| {
                        let e = exact.to_f64().unwrap_or(f64::NAN);
                        if e == 0.0 {
                            value == 0.0
                        } else {
                            ((value - e) / e).abs() <= 1e-9
                        }
                    })?;
                    if let Some(code) = oracle_code {
                        return Ok(code);
                    }
                    println!("s wmc {}", format_float(value));
                    None
                }
                Err(e) => Some(e),
            }
        }
        ModeArg::Rational => {
            match count::<BigRational>(&instance.formula, &instance.weights, &config) {
                Ok(CountResult { value, stats }) => {
                    report(cli, &stats);
                    let oracle_code = oracle_check(cli, &instance, |exact| *exact == value)?;
                    if let Some(code) = oracle_code {
                        return Ok(code);
                    }
                    let approx = value.to_f64().unwrap_or(f64::NAN);
                    println!("c approx {}", format_float(approx));
                    println!("s wmc {}", value);
                    None
                }
                Err(e) => Some(e),
            }
        }
    };

    match outcome {
        None => Ok(ExitCode::SUCCESS),
        Some(EngineError::Timeout { stats }) => {
            report(cli, &stats);
            eprintln!("timeout after {}s", cli.timeout.unwrap_or(0));
            Ok(ExitCode::from(3))
        }
        Some(EngineError::NodeLimit { stats }) => {
            report(cli, &stats);
            eprintln!("node limit {} exceeded", cli.max_nodes.unwrap_or(0));
            Ok(ExitCode::from(4))
        }
    }
}

/// Runs the oracle cross-check when requested. `Ok(Some(code))` aborts with
/// that exit code.
fn oracle_check(
    cli: &Cli,
    instance: &pbcount::opb::ParsedInstance,
    matches: impl Fn(&BigRational) -> bool,
) -> Result<Option<ExitCode>, String> {
    if !cli.oracle {
        return Ok(None);
    }
    match brute_force_count(&instance.formula, &instance.weights, OracleBudget::default()) {
        Ok(exact) => {
            if matches(&exact) {
                println!("c oracle agrees ({})", exact);
                Ok(None)
            } else {
                eprintln!("oracle mismatch: expected {}", exact);
                Ok(Some(ExitCode::from(5)))
            }
        }
        Err(e @ OracleError::BudgetExceeded { .. }) => {
            eprintln!("oracle: {}", e);
            Ok(Some(ExitCode::from(4)))
        }
        Err(e) => Err(format!("oracle: {}", e)),
    }
}

fn report(cli: &Cli, stats: &CountStats) {
    if cli.verbose {
        println!("c backbone literals {}", stats.preprocess.backbone.len());
        println!("c deleted constraints {}", stats.preprocess.deleted_constraints);
    }
    if cli.stats {
        println!("c stat nodes_created {}", stats.nodes_created);
        println!("c stat products {}", stats.products);
        println!("c stat projections {}", stats.projections);
        println!("c stat peak_live_diagrams {}", stats.peak_live_diagrams);
        println!("c stat preprocess_ms {}", stats.preprocess_time.as_millis());
        println!("c stat build_ms {}", stats.build_time.as_millis());
        println!("c stat count_ms {}", stats.count_time.as_millis());
    }
}

/// Integers print bare; everything else uses scientific notation with 12
/// significant digits.
fn format_float(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{:.11e}", v)
    }
}
