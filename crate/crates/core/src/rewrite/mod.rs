//! Extended gates (entanglement, measurement, classically controlled
//! Paulis), the transformation rules, the Pauli-frame engine and the
//! quasi-parallelism predicate.

mod engine;
mod predicate;
mod rules;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::circuit::{Gate, LogicalCircuit, Qubit};

pub use engine::{emit_step, BitAllocator, Frame, RemoteOp, StepEmission, StepItem, StepTrace};
pub use predicate::{Case, MergePlan, PairContext, Predicate, Verdict};
pub use rules::{
    forward_measurement_bit, forward_measurement_bits, push_backward, push_forward, BackwardPush,
    ForwardPush, PauliKind, PauliTerm, Rule, RuleFailure, RuleStats,
};

/// Measurement outcome identifier, rendered `b<step>_<seq>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bit {
    pub step: u32,
    pub seq: u32,
}

impl Bit {
    pub fn new(step: u32, seq: u32) -> Self {
        Bit { step, seq }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}_{}", self.step, self.seq)
    }
}

impl FromStr for Bit {
    type Err = String;

    /// Accepts `b<step>_<seq>` and the short form `b<seq>` (step 0).
    fn from_str(s: &str) -> Result<Self, String> {
        let rest = s.strip_prefix('b').ok_or_else(|| format!("bad bit `{s}`"))?;
        let parse = |x: &str| x.parse::<u32>().map_err(|_| format!("bad bit `{s}`"));
        match rest.split_once('_') {
            Some((a, b)) => Ok(Bit::new(parse(a)?, parse(b)?)),
            None => Ok(Bit::new(0, parse(rest)?)),
        }
    }
}

/// XOR of measurement bits; the empty set is the constant 0.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitExpr(BTreeSet<Bit>);

impl BitExpr {
    pub fn zero() -> Self {
        BitExpr(BTreeSet::new())
    }

    pub fn bit(b: Bit) -> Self {
        BitExpr(BTreeSet::from([b]))
    }

    pub fn of(bits: impl IntoIterator<Item = Bit>) -> Self {
        let mut e = BitExpr::zero();
        for b in bits {
            e.toggle(b);
        }
        e
    }

    pub fn toggle(&mut self, b: Bit) {
        if !self.0.remove(&b) {
            self.0.insert(b);
        }
    }

    pub fn xor_assign(&mut self, other: &BitExpr) {
        for &b in &other.0 {
            self.toggle(b);
        }
    }

    pub fn xor(&self, other: &BitExpr) -> BitExpr {
        let mut e = self.clone();
        e.xor_assign(other);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, b: Bit) -> bool {
        self.0.contains(&b)
    }

    pub fn bits(&self) -> impl Iterator<Item = Bit> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parity under an assignment; `None` when some bit is unassigned.
    pub fn eval(&self, value: impl Fn(Bit) -> Option<bool>) -> Option<bool> {
        let mut acc = false;
        for &b in &self.0 {
            acc ^= value(b)?;
        }
        Some(acc)
    }
}

impl fmt::Display for BitExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.0.iter().map(|b| b.to_string()).collect();
        f.write_str(&parts.join("^"))
    }
}

impl FromStr for BitExpr {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "0" {
            return Ok(BitExpr::zero());
        }
        let mut e = BitExpr::zero();
        for part in s.split('^') {
            e.toggle(part.parse()?);
        }
        Ok(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtendedGate {
    H(Qubit),
    T(Qubit),
    Cx(Qubit, Qubit),
    /// Creates a |Φ+> pair on two communication qubits.
    E(Qubit, Qubit),
    /// Measures a communication qubit into a bit; the qubit is consumed.
    M(Qubit, Bit),
    X(Qubit, BitExpr),
    Z(Qubit, BitExpr),
}

impl ExtendedGate {
    pub fn qubits(&self) -> impl Iterator<Item = Qubit> {
        use ExtendedGate::*;
        let (a, b) = match *self {
            H(q) | T(q) | M(q, _) | X(q, _) | Z(q, _) => (q, None),
            Cx(c, t) | E(c, t) => (c, Some(t)),
        };
        std::iter::once(a).chain(b)
    }

    pub fn touches(&self, q: Qubit) -> bool {
        self.qubits().any(|x| x == q)
    }

    pub fn shares_qubit(&self, other: &ExtendedGate) -> bool {
        self.qubits().any(|q| other.touches(q))
    }

    /// Bits read by a classically controlled Pauli.
    pub fn reads(&self) -> Option<&BitExpr> {
        match self {
            ExtendedGate::X(_, e) | ExtendedGate::Z(_, e) => Some(e),
            _ => None,
        }
    }

    pub fn writes(&self) -> Option<Bit> {
        match self {
            ExtendedGate::M(_, b) => Some(*b),
            _ => None,
        }
    }
}

impl From<Gate> for ExtendedGate {
    fn from(g: Gate) -> Self {
        match g {
            Gate::H(q) => ExtendedGate::H(q),
            Gate::T(q) => ExtendedGate::T(q),
            Gate::Cx(c, t) => ExtendedGate::Cx(c, t),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LifetimeError {
    #[error("qubit `{0}` has no E in the fragment")]
    MissingE(String),
    #[error("qubit `{0}` has no measurement in the fragment")]
    MissingM(String),
    #[error("qubit `{0}` is created or measured more than once")]
    Repeated(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtendedParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: undeclared qubit `{name}`")]
    UndeclaredQubit { line: usize, name: String },
}

/// A physical circuit over computation and communication qubits, kept as a
/// gate sequence; layers are derived on demand.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtendedCircuit {
    pub qubits: Vec<String>,
    pub comm: Vec<bool>,
    pub gates: Vec<ExtendedGate>,
}

impl ExtendedCircuit {
    pub fn new() -> Self {
        Self::default()
    }

    /// Qubit table of `logical`, no gates.
    pub fn over(logical: &LogicalCircuit) -> Self {
        ExtendedCircuit {
            qubits: logical.qubits.clone(),
            comm: vec![false; logical.qubits.len()],
            gates: Vec::new(),
        }
    }

    pub fn from_logical(logical: &LogicalCircuit) -> Self {
        let mut c = Self::over(logical);
        c.gates = logical.gates().map(|(_, g)| g.into()).collect();
        c
    }

    pub fn add_qubit(&mut self, name: &str, comm: bool) -> Qubit {
        if let Some(q) = self.qubit(name) {
            return q;
        }
        self.qubits.push(name.to_string());
        self.comm.push(comm);
        Qubit(self.qubits.len() - 1)
    }

    pub fn qubit(&self, name: &str) -> Option<Qubit> {
        self.qubits.iter().position(|n| n == name).map(Qubit)
    }

    pub fn name(&self, q: Qubit) -> &str {
        &self.qubits[q.0]
    }

    pub fn is_comm(&self, q: Qubit) -> bool {
        self.comm[q.0]
    }

    pub fn computation_qubits(&self) -> Vec<Qubit> {
        (0..self.qubits.len())
            .filter(|&i| !self.comm[i])
            .map(Qubit)
            .collect()
    }

    pub fn push(&mut self, g: ExtendedGate) {
        self.gates.push(g);
    }

    pub fn measurement_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, ExtendedGate::M(..)))
            .count()
    }

    /// ASAP layer (1-based) of every gate. A Pauli waits for the
    /// measurements of the bits it reads.
    pub fn layer_indices(&self) -> Vec<usize> {
        let mut last = vec![0usize; self.qubits.len()];
        let mut measured: HashMap<Bit, usize> = HashMap::new();
        let mut out = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let mut l = g.qubits().map(|q| last[q.0]).max().unwrap_or(0);
            if let Some(e) = g.reads() {
                for b in e.bits() {
                    l = l.max(measured.get(&b).copied().unwrap_or(0));
                }
            }
            let l = l + 1;
            for q in g.qubits() {
                last[q.0] = l;
            }
            if let Some(b) = g.writes() {
                measured.insert(b, l);
            }
            out.push(l);
        }
        out
    }

    pub fn depth(&self) -> usize {
        self.layer_indices().into_iter().max().unwrap_or(0)
    }

    /// Gates grouped by ASAP layer.
    pub fn layers(&self) -> Vec<Vec<ExtendedGate>> {
        let idx = self.layer_indices();
        let mut out: Vec<Vec<ExtendedGate>> = vec![Vec::new(); self.depth()];
        for (g, l) in self.gates.iter().zip(idx) {
            out[l - 1].push(g.clone());
        }
        out
    }

    /// Layers strictly between the E creating `c` and the measurement of `c`.
    pub fn lifetime(&self, c: Qubit) -> Result<usize, LifetimeError> {
        let idx = self.layer_indices();
        let name = || self.name(c).to_string();
        let mut e_at = None;
        let mut m_at = None;
        for (g, &l) in self.gates.iter().zip(&idx) {
            match g {
                ExtendedGate::E(a, b) if *a == c || *b == c => {
                    if e_at.replace(l).is_some() {
                        return Err(LifetimeError::Repeated(name()));
                    }
                }
                ExtendedGate::M(q, _) if *q == c
                    && m_at.replace(l).is_some() => {
                        return Err(LifetimeError::Repeated(name()));
                    }
                _ => {}
            }
        }
        let e = e_at.ok_or_else(|| LifetimeError::MissingE(name()))?;
        let m = m_at.ok_or_else(|| LifetimeError::MissingM(name()))?;
        Ok(m.saturating_sub(e + 1))
    }

    /// Communication qubits with both an E and an M in the circuit.
    pub fn entangled_qubits(&self) -> Vec<Qubit> {
        let mut out: Vec<Qubit> = self
            .gates
            .iter()
            .filter_map(|g| match g {
                ExtendedGate::E(a, b) => Some([*a, *b]),
                _ => None,
            })
            .flatten()
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn gate_line(&self, g: &ExtendedGate) -> String {
        let n = |q: &Qubit| self.name(*q);
        match g {
            ExtendedGate::H(q) => format!("h {}", n(q)),
            ExtendedGate::T(q) => format!("t {}", n(q)),
            ExtendedGate::Cx(c, t) => format!("cx {} {}", n(c), n(t)),
            ExtendedGate::E(a, b) => format!("e {} {}", n(a), n(b)),
            ExtendedGate::M(c, b) => format!("m {} -> {}", n(c), b),
            ExtendedGate::X(q, e) => format!("xc {} {}", n(q), e),
            ExtendedGate::Z(q, e) => format!("zc {} {}", n(q), e),
        }
    }

    pub fn header(&self) -> String {
        let pick = |comm: bool| {
            self.qubits
                .iter()
                .zip(&self.comm)
                .filter(|(_, &c)| c == comm)
                .map(|(n, _)| n.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut s = format!("qubits {}\n", pick(false));
        if self.comm.iter().any(|&c| c) {
            s.push_str(&format!("comm {}\n", pick(true)));
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = self.header();
        for g in &self.gates {
            s.push_str(&self.gate_line(g));
            s.push('\n');
        }
        s
    }
}

/// Parses the physical circuit format. Step markers are accepted and
/// ignored.
pub fn parse_extended(text: &str) -> Result<ExtendedCircuit, ExtendedParseError> {
    let mut c = ExtendedCircuit::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() || body.starts_with("---") {
            continue;
        }
        let w: Vec<&str> = body.split_whitespace().collect();
        let syntax = |msg: &str| ExtendedParseError::Syntax {
            line,
            msg: msg.to_string(),
        };
        let q = |c: &ExtendedCircuit, name: &str| {
            c.qubit(name).ok_or_else(|| ExtendedParseError::UndeclaredQubit {
                line,
                name: name.to_string(),
            })
        };
        let arity = |k: usize| {
            if w.len() == k + 1 {
                Ok(())
            } else {
                Err(syntax(&format!("`{}` expects {k} operand(s)", w[0])))
            }
        };
        let g = match w[0] {
            "qubits" | "comm" => {
                for name in &w[1..] {
                    if c.qubit(name).is_some() {
                        return Err(syntax(&format!("qubit `{name}` declared twice")));
                    }
                    c.add_qubit(name, w[0] == "comm");
                }
                continue;
            }
            "h" => {
                arity(1)?;
                ExtendedGate::H(q(&c, w[1])?)
            }
            "t" => {
                arity(1)?;
                ExtendedGate::T(q(&c, w[1])?)
            }
            "cx" | "e" => {
                arity(2)?;
                let (a, b) = (q(&c, w[1])?, q(&c, w[2])?);
                if a == b {
                    return Err(syntax("equal operands"));
                }
                if w[0] == "cx" {
                    ExtendedGate::Cx(a, b)
                } else {
                    ExtendedGate::E(a, b)
                }
            }
            "m" => {
                if w.len() != 4 || w[2] != "->" {
                    return Err(syntax("expected `m <c> -> <bit>`"));
                }
                ExtendedGate::M(q(&c, w[1])?, w[3].parse().map_err(|e: String| syntax(&e))?)
            }
            "xc" | "zc" => {
                arity(2)?;
                let e: BitExpr = w[2].parse().map_err(|e: String| syntax(&e))?;
                let t = q(&c, w[1])?;
                if w[0] == "xc" {
                    ExtendedGate::X(t, e)
                } else {
                    ExtendedGate::Z(t, e)
                }
            }
            other => return Err(syntax(&format!("unknown gate `{other}`"))),
        };
        c.push(g);
    }
    Ok(c)
}
