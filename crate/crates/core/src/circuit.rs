//! Logical circuits over `{H, T, CX}`: parsing, ASAP layering and
//! extraction of remote CX occurrences (commodities).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::network::ProcId;

/// Index of a qubit inside its circuit's qubit table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Qubit(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    H(Qubit),
    T(Qubit),
    /// `Cx(control, target)`
    Cx(Qubit, Qubit),
}

impl Gate {
    pub fn qubits(&self) -> impl Iterator<Item = Qubit> {
        let (a, b) = match *self {
            Gate::H(q) | Gate::T(q) => (q, None),
            Gate::Cx(c, t) => (c, Some(t)),
        };
        std::iter::once(a).chain(b)
    }

    pub fn touches(&self, q: Qubit) -> bool {
        self.qubits().any(|x| x == q)
    }

    pub fn is_cx(&self) -> bool {
        matches!(self, Gate::Cx(..))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("line {line}: missing `qubits` header before first gate")]
    MissingHeader { line: usize },
    /// A second `qubits` line, or a name listed twice.
    #[error("line {line}: qubit `{name}` declared twice")]
    DuplicateQubit { line: usize, name: String },
    #[error("line {line}: unknown gate `{name}`")]
    UnknownGate { line: usize, name: String },
    #[error("line {line}: undeclared qubit `{name}`")]
    UndeclaredQubit { line: usize, name: String },
    #[error("line {line}: `{gate}` expects {expected} operand(s)")]
    Arity {
        line: usize,
        gate: String,
        expected: usize,
    },
    #[error("line {line}: cx with equal operands")]
    EqualOperands { line: usize },
    #[error("qubit `{0}` is not placed on any processor")]
    UnplacedQubit(String),
}

pub type CircuitResult<T> = Result<T, CircuitError>;

/// A set of gates acting on pairwise disjoint qubits.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Layer {
    pub gates: Vec<Gate>,
}

impl Layer {
    pub fn touches(&self, q: Qubit) -> bool {
        self.gates.iter().any(|g| g.touches(q))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LogicalCircuit {
    pub qubits: Vec<String>,
    pub layers: Vec<Layer>,
}

/// Position of a gate: layer index and slot inside the layer (both 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GateRef {
    pub layer: usize,
    pub slot: usize,
}

/// One remote CX occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commodity {
    /// 1-based enumeration index.
    pub index: usize,
    pub control_proc: ProcId,
    pub target_proc: ProcId,
    pub control: Qubit,
    pub target: Qubit,
    pub at: GateRef,
}

impl Commodity {
    pub fn layer(&self) -> usize {
        self.at.layer
    }

    pub fn touches(&self, q: Qubit) -> bool {
        self.control == q || self.target == q
    }
}

impl LogicalCircuit {
    pub fn new(qubits: Vec<String>) -> Self {
        LogicalCircuit {
            qubits,
            layers: Vec::new(),
        }
    }

    /// Appends `g` as its own singleton layer.
    pub fn push(&mut self, g: Gate) {
        self.layers.push(Layer { gates: vec![g] });
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn qubit(&self, name: &str) -> Option<Qubit> {
        self.qubits.iter().position(|n| n == name).map(Qubit)
    }

    pub fn name(&self, q: Qubit) -> &str {
        &self.qubits[q.0]
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(|l| l.gates.len()).sum()
    }

    /// Gates in layer order, slots in source order.
    pub fn gates(&self) -> impl Iterator<Item = (GateRef, Gate)> + '_ {
        self.layers.iter().enumerate().flat_map(|(li, l)| {
            l.gates
                .iter()
                .enumerate()
                .map(move |(si, g)| (GateRef { layer: li, slot: si }, *g))
        })
    }

    pub fn gate(&self, at: GateRef) -> Gate {
        self.layers[at.layer].gates[at.slot]
    }

    /// Greedy ASAP layering: each gate goes one layer after the last layer
    /// touching any of its qubits.
    pub fn layerize(&self) -> LogicalCircuit {
        let mut last: Vec<usize> = vec![0; self.qubits.len()];
        let mut layers: Vec<Layer> = Vec::new();
        for (_, g) in self.gates() {
            let l = g.qubits().map(|q| last[q.0]).max().unwrap_or(0);
            if layers.len() <= l {
                layers.resize_with(l + 1, Layer::default);
            }
            layers[l].gates.push(g);
            for q in g.qubits() {
                last[q.0] = l + 1;
            }
        }
        LogicalCircuit {
            qubits: self.qubits.clone(),
            layers,
        }
    }

    /// Every gate operand is declared and no layer reuses a qubit.
    pub fn is_well_layered(&self) -> bool {
        self.layers.iter().all(|l| {
            let mut seen = vec![false; self.qubits.len()];
            l.gates.iter().all(|g| {
                g.qubits().all(|q| {
                    q.0 < seen.len() && !std::mem::replace(&mut seen[q.0], true)
                })
            })
        })
    }

    /// One commodity per CX whose operands sit on different processors, in
    /// layer order then source order.
    pub fn extract_commodities(
        &self,
        placement: &HashMap<String, ProcId>,
    ) -> CircuitResult<Vec<Commodity>> {
        let procs = self
            .qubits
            .iter()
            .map(|n| {
                placement
                    .get(n)
                    .copied()
                    .ok_or_else(|| CircuitError::UnplacedQubit(n.clone()))
            })
            .collect::<CircuitResult<Vec<_>>>()?;
        let mut out = Vec::new();
        for (at, g) in self.gates() {
            if let Gate::Cx(c, t) = g {
                if procs[c.0] != procs[t.0] {
                    out.push(Commodity {
                        index: out.len() + 1,
                        control_proc: procs[c.0],
                        target_proc: procs[t.0],
                        control: c,
                        target: t,
                        at,
                    });
                }
            }
        }
        Ok(out)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("qubits {}\n", self.qubits.join(" "));
        for (_, g) in self.gates() {
            s.push_str(&self.gate_line(g));
            s.push('\n');
        }
        s
    }

    pub fn gate_line(&self, g: Gate) -> String {
        match g {
            Gate::H(q) => format!("h {}", self.name(q)),
            Gate::T(q) => format!("t {}", self.name(q)),
            Gate::Cx(c, t) => format!("cx {} {}", self.name(c), self.name(t)),
        }
    }
}

/// Parses the line-oriented circuit format. Gates are stored as singleton
/// layers; call [`LogicalCircuit::layerize`] to compress them.
pub fn parse_circuit(text: &str) -> CircuitResult<LogicalCircuit> {
    let mut circuit: Option<LogicalCircuit> = None;
    let mut index: HashMap<String, Qubit> = HashMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut words = body.split_whitespace();
        let head = words.next().unwrap_or_default().to_ascii_lowercase();
        let args: Vec<&str> = words.collect();
        if head == "qubits" {
            if circuit.is_some() {
                return Err(CircuitError::DuplicateQubit {
                    line,
                    name: "qubits".into(),
                });
            }
            for a in &args {
                if index.insert(a.to_string(), Qubit(index.len())).is_some() {
                    return Err(CircuitError::DuplicateQubit {
                        line,
                        name: a.to_string(),
                    });
                }
            }
            circuit = Some(LogicalCircuit::new(
                args.iter().map(|s| s.to_string()).collect(),
            ));
            continue;
        }
        let c = circuit
            .as_mut()
            .ok_or(CircuitError::MissingHeader { line })?;
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| CircuitError::UndeclaredQubit {
                    line,
                    name: name.to_string(),
                })
        };
        let expected = match head.as_str() {
            "h" | "t" => 1,
            "cx" => 2,
            _ => {
                return Err(CircuitError::UnknownGate {
                    line,
                    name: head.clone(),
                })
            }
        };
        if args.len() != expected {
            return Err(CircuitError::Arity {
                line,
                gate: head.clone(),
                expected,
            });
        }
        let g = match head.as_str() {
            "h" => Gate::H(lookup(args[0])?),
            "t" => Gate::T(lookup(args[0])?),
            _ => {
                let (ctl, tgt) = (lookup(args[0])?, lookup(args[1])?);
                if ctl == tgt {
                    return Err(CircuitError::EqualOperands { line });
                }
                Gate::Cx(ctl, tgt)
            }
        };
        c.push(g);
    }
    Ok(circuit.unwrap_or_default())
}

impl FromStr for LogicalCircuit {
    type Err = CircuitError;

    fn from_str(s: &str) -> CircuitResult<Self> {
        parse_circuit(s)
    }
}

impl fmt::Display for LogicalCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
