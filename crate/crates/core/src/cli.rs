//! The compile pipeline behind the `dqcc` binary: parse, quotient,
//! relations, quickest flow, expansion, verification, report.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::circuit::{parse_circuit, CircuitError, Commodity, LogicalCircuit};
use crate::expand::{emit_schedule, ExpandError, ExpandOptions, PhysicalSchedule};
use crate::flow::{
    brute_force_oracle, check_solution, e_depth, FlowError, OracleLimits, Solution, Solver,
    Violation,
};
use crate::network::{parse_network, NetworkError, NetworkGraph, QuotientGraph};
use crate::relations::{build_relations, RelationTable};
use crate::rewrite::{parse_extended, ExtendedParseError};
use crate::simulate::{equivalent, CheckMode, EquivalenceReport, RunOptions, SimError};

pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write `{path}`: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("circuit: {0}")]
    Circuit(#[from] CircuitError),
    #[error("network: {0}")]
    Network(#[from] NetworkError),
    #[error("physical circuit: {0}")]
    Physical(#[from] ExtendedParseError),
    #[error("solver: {0}")]
    Flow(#[from] FlowError),
    #[error("expansion: {0}")]
    Expand(#[from] ExpandError),
    #[error("checker found {} violation(s), first: {}", .0.len(), .0[0])]
    Checker(Vec<Violation>),
    #[error("simulation: {0}")]
    Simulation(#[from] SimError),
    #[error("verification failed (max-dev={0:.3e})")]
    Verification(f64),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. }
            | CliError::Write { .. }
            | CliError::Circuit(_)
            | CliError::Network(_)
            | CliError::Physical(_) => 2,
            CliError::Flow(_) | CliError::Expand(_) | CliError::Checker(_) => 3,
            CliError::Simulation(_) | CliError::Verification(_) => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompilerConfig {
    pub circuit: PathBuf,
    pub network: PathBuf,
    /// Coherence budget in layers.
    pub coherence: u32,
    pub enable_qp: bool,
    pub emit_physical: bool,
    pub verify: bool,
    pub out: Option<PathBuf>,
    pub dump_relations: bool,
    pub seed: u64,
}

impl Default for CompilerConfig {
    fn default() -> Self {
        CompilerConfig {
            circuit: PathBuf::new(),
            network: PathBuf::new(),
            coherence: 0,
            enable_qp: true,
            emit_physical: false,
            verify: false,
            out: None,
            dump_relations: false,
            seed: 7,
        }
    }
}

/// Everything the pipeline produced.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub circuit: LogicalCircuit,
    pub network: NetworkGraph,
    pub quotient: QuotientGraph,
    pub commodities: Vec<Commodity>,
    pub relations: RelationTable,
    pub solution: Solution,
    pub solver_calls: usize,
    pub solver_nodes: u64,
    pub violations: Vec<Violation>,
    pub schedule: PhysicalSchedule,
    pub verification: Option<EquivalenceReport>,
    pub elapsed: Duration,
}

impl Compiled {
    pub fn e_depth(&self) -> usize {
        e_depth(&self.solution)
    }

    /// Deterministic `key=value` report, optional relation lines, then the
    /// solution dump.
    pub fn report(&self, cfg: &CompilerConfig) -> String {
        let mut s = String::new();
        let kv = [
            ("k", self.commodities.len().to_string()),
            ("qubits", self.circuit.qubits.len().to_string()),
            ("layers", self.circuit.depth().to_string()),
            ("coherence", cfg.coherence.to_string()),
            ("quasi_parallel", (cfg.enable_qp as u8).to_string()),
            ("solver_calls", self.solver_calls.to_string()),
            ("solver_nodes", self.solver_nodes.to_string()),
            ("e_depth", self.e_depth().to_string()),
            ("total_flow", self.solution.total_flow.to_string()),
            ("e_gates", self.schedule.e_count().to_string()),
            (
                "max_lifetime_extension",
                self.schedule.max_lifetime_extension().to_string(),
            ),
            ("checker_violations", self.violations.len().to_string()),
        ];
        for (k, v) in kv {
            let _ = writeln!(s, "{k}={v}");
        }
        if let Some(v) = &self.verification {
            let _ = writeln!(s, "verify={}", if v.equivalent { "pass" } else { "fail" });
            let mode = match v.mode {
                CheckMode::Process => "process",
                CheckMode::Sampled => "sampled",
            };
            let _ = writeln!(s, "verify_mode={mode}");
            let _ = writeln!(s, "verify_max_dev={:.3e}", v.max_dev);
        }
        if cfg.dump_relations {
            for l in self.relations.dump_lines() {
                let _ = writeln!(s, "{l}");
            }
        }
        s.push_str(&self.solution.dump(&self.quotient, &self.commodities));
        s
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs the pipeline on in-memory sources.
pub fn compile_sources(
    circuit_src: &str,
    network_src: &str,
    cfg: &CompilerConfig,
) -> Result<Compiled, CliError> {
    let start = Instant::now();
    let circuit = parse_circuit(circuit_src)?.layerize();
    let network = parse_network(network_src)?;
    let quotient = network.quotient();
    let commodities = circuit.extract_commodities(&network.placement())?;
    let relations = build_relations(&commodities, &circuit, cfg.coherence, cfg.enable_qp);
    let mut solver = Solver::new(&quotient, &commodities, &relations);
    let solution = solver.quickest()?;
    let (solver_calls, solver_nodes) = (solver.calls, solver.nodes);
    let violations = check_solution(&quotient, &commodities, &relations, &solution);
    if !violations.is_empty() {
        return Err(CliError::Checker(violations));
    }
    let schedule = emit_schedule(
        &solution,
        &circuit,
        &commodities,
        &relations,
        &network,
        ExpandOptions::default(),
    )?;
    let verification = if cfg.verify {
        let opts = RunOptions {
            seed: cfg.seed,
            ..RunOptions::default()
        };
        Some(equivalent(&schedule.circuit, &circuit, VERIFY_TOL, opts)?)
    } else {
        None
    };
    Ok(Compiled {
        circuit,
        network,
        quotient,
        commodities,
        relations,
        solution,
        solver_calls,
        solver_nodes,
        violations,
        schedule,
        verification,
        elapsed: start.elapsed(),
    })
}

/// Reads the inputs named in `cfg` and compiles them.
pub fn compile(cfg: &CompilerConfig) -> Result<Compiled, CliError> {
    compile_sources(&read(&cfg.circuit)?, &read(&cfg.network)?, cfg)
}

/// Compiles and produces the standard output text, writing `--out` when
/// given. A failed verification still returns the text alongside the error.
pub fn run_compile(cfg: &CompilerConfig) -> (String, Result<Compiled, CliError>) {
    let compiled = match compile(cfg) {
        Ok(c) => c,
        Err(e) => return (String::new(), Err(e)),
    };
    let mut text = compiled.report(cfg);
    let physical = compiled.schedule.render();
    match &cfg.out {
        Some(path) => {
            let body = if cfg.emit_physical {
                physical
            } else {
                compiled.solution.dump(&compiled.quotient, &compiled.commodities)
            };
            if let Err(source) = fs::write(path, body) {
                return (
                    text,
                    Err(CliError::Write {
                        path: path.clone(),
                        source,
                    }),
                );
            }
        }
        None if cfg.emit_physical => text.push_str(&physical),
        None => {}
    }
    if let Some(v) = &compiled.verification {
        if !v.equivalent {
            let dev = v.max_dev;
            return (text, Err(CliError::Verification(dev)));
        }
    }
    (text, Ok(compiled))
}

/// Re-checks a previously emitted physical circuit against its logical
/// circuit; returns the `check` line and the report.
pub fn verify_files(
    circuit: &Path,
    physical: &Path,
    seed: u64,
) -> Result<(String, EquivalenceReport), CliError> {
    let logical = parse_circuit(&read(circuit)?)?;
    let phys = parse_extended(&read(physical)?)?;
    let opts = RunOptions {
        seed,
        ..RunOptions::default()
    };
    let r = equivalent(&phys, &logical, VERIFY_TOL, opts)?;
    let line = format!(
        "check equivalence: {} (max-dev={:.3e})",
        if r.equivalent { "PASS" } else { "FAIL" },
        r.max_dev
    );
    Ok((line, r))
}

/// Brute-force cross-check on the instance described by `cfg`.
pub fn oracle(cfg: &CompilerConfig, limits: OracleLimits) -> Result<String, CliError> {
    let circuit = parse_circuit(&read(&cfg.circuit)?)?.layerize();
    let network = parse_network(&read(&cfg.network)?)?;
    let quotient = network.quotient();
    let commodities = circuit.extract_commodities(&network.placement())?;
    let relations = build_relations(&commodities, &circuit, cfg.coherence, cfg.enable_qp);
    let s = brute_force_oracle(&quotient, &commodities, &relations, limits)?;
    Ok(s.dump(&quotient, &commodities))
}
