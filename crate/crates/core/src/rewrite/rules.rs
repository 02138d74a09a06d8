use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::{Bit, BitExpr, ExtendedCircuit, ExtendedGate};
use crate::circuit::Qubit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    /// `CX (X^b ⊗ I) ≡ (X^b ⊗ X^b) CX`
    CxXControl,
    /// `CX (I ⊗ Z^b) ≡ (Z^b ⊗ Z^b) CX`
    CxZTarget,
    /// `CX (I ⊗ X^b) ≡ (I ⊗ X^b) CX`
    CxXTarget,
    /// `CX (Z^b ⊗ I) ≡ (Z^b ⊗ I) CX`
    CxZControl,
    /// `T Z^b ≡ Z^b T`
    TZ,
    /// `H X^b ≡ Z^b H`
    HX,
    /// `H Z^b ≡ X^b H`
    HZ,
    /// `CX (T ⊗ I) ≡ (T ⊗ I) CX`
    TControl,
    /// Two CX sharing only their target commute.
    SharedTarget,
    /// Two CX sharing only their control commute.
    SharedControl,
    /// `CX_{u,v} (H ⊗ H) ≡ (H ⊗ H) CX_{v,u}`
    HHReverse,
    /// `H(x) CX(y→x) H(y) ≡ H(y) CX(x→y) H(x)`
    HSandwich,
    /// `X^e` right before `M → b̄` folds into every later use of `b̄`.
    MeasurementForward,
    /// `Z^e` right before a computational-basis measurement only changes the
    /// branch phase and is dropped.
    ZMeasureAbsorb,
}

impl Rule {
    /// The thirteen catalogue rules (the absorption rule is auxiliary).
    pub const CATALOGUE: [Rule; 13] = [
        Rule::CxXControl,
        Rule::CxZTarget,
        Rule::CxXTarget,
        Rule::CxZControl,
        Rule::TZ,
        Rule::HX,
        Rule::HZ,
        Rule::TControl,
        Rule::SharedTarget,
        Rule::SharedControl,
        Rule::HHReverse,
        Rule::HSandwich,
        Rule::MeasurementForward,
    ];
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleStats {
    pub counts: BTreeMap<Rule, usize>,
}

impl RuleStats {
    pub fn record(&mut self, r: Rule) {
        *self.counts.entry(r).or_default() += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn merge(&mut self, other: &RuleStats) {
        for (&r, &n) in &other.counts {
            *self.counts.entry(r).or_default() += n;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no rule moves {what} past `{gate:?}`")]
pub struct RuleFailure {
    pub what: String,
    pub gate: ExtendedGate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliKind {
    X,
    Z,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliTerm {
    pub kind: PauliKind,
    pub qubit: Qubit,
    pub expr: BitExpr,
}

impl PauliTerm {
    pub fn x(qubit: Qubit, expr: BitExpr) -> Self {
        PauliTerm {
            kind: PauliKind::X,
            qubit,
            expr,
        }
    }

    pub fn z(qubit: Qubit, expr: BitExpr) -> Self {
        PauliTerm {
            kind: PauliKind::Z,
            qubit,
            expr,
        }
    }

    pub fn gate(&self) -> ExtendedGate {
        match self.kind {
            PauliKind::X => ExtendedGate::X(self.qubit, self.expr.clone()),
            PauliKind::Z => ExtendedGate::Z(self.qubit, self.expr.clone()),
        }
    }

    fn moved(&self, kind: PauliKind, qubit: Qubit) -> Self {
        PauliTerm {
            kind,
            qubit,
            expr: self.expr.clone(),
        }
    }
}

/// Result of moving a Pauli term from before a gate to after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForwardPush {
    pub terms: Vec<PauliTerm>,
    /// `None` when the gate does not touch the term's qubit.
    pub rule: Option<Rule>,
}

/// Moves `pauli`, sitting right before `gate`, to right after it.
pub fn push_forward(pauli: &PauliTerm, gate: &ExtendedGate) -> Result<ForwardPush, RuleFailure> {
    use PauliKind::*;
    let q = pauli.qubit;
    if !gate.touches(q) {
        return Ok(ForwardPush {
            terms: vec![pauli.clone()],
            rule: None,
        });
    }
    let done = |terms: Vec<PauliTerm>, rule| Ok(ForwardPush { terms, rule: Some(rule) });
    let fail = || {
        Err(RuleFailure {
            what: format!("{:?}", pauli.kind),
            gate: gate.clone(),
        })
    };
    match (gate, pauli.kind) {
        (ExtendedGate::H(_), X) => done(vec![pauli.moved(Z, q)], Rule::HX),
        (ExtendedGate::H(_), Z) => done(vec![pauli.moved(X, q)], Rule::HZ),
        (ExtendedGate::T(_), Z) => done(vec![pauli.clone()], Rule::TZ),
        (&ExtendedGate::Cx(c, t), X) if q == c => {
            done(vec![pauli.moved(X, c), pauli.moved(X, t)], Rule::CxXControl)
        }
        (&ExtendedGate::Cx(c, _), Z) if q == c => done(vec![pauli.clone()], Rule::CxZControl),
        (&ExtendedGate::Cx(_, _), X) => done(vec![pauli.clone()], Rule::CxXTarget),
        (&ExtendedGate::Cx(c, t), Z) => {
            done(vec![pauli.moved(Z, c), pauli.moved(Z, t)], Rule::CxZTarget)
        }
        // Classically controlled Paulis commute with each other up to a
        // branch phase.
        (ExtendedGate::X(..) | ExtendedGate::Z(..), _) => Ok(ForwardPush {
            terms: vec![pauli.clone()],
            rule: None,
        }),
        _ => fail(),
    }
}

/// Result of moving a pre-processing block before a gate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackwardPush {
    /// The block, possibly with its CX reversed and its H moved.
    pub block: Vec<ExtendedGate>,
    /// Gates that now follow the block.
    pub after: Vec<ExtendedGate>,
    pub rule: Option<Rule>,
}

fn block_cx(block: &[ExtendedGate]) -> Option<(usize, Qubit, Qubit)> {
    let mut found = None;
    for (i, g) in block.iter().enumerate() {
        if let ExtendedGate::Cx(c, t) = g {
            if found.is_some() {
                return None;
            }
            found = Some((i, *c, *t));
        }
    }
    found
}

/// Moves a pre-processing block (one CX, optionally with H gates on its
/// communication side) from right after `gate` to right before it.
pub fn push_backward(gate: &ExtendedGate, block: &[ExtendedGate]) -> Result<BackwardPush, RuleFailure> {
    let fail = || RuleFailure {
        what: "pre-processing CX".into(),
        gate: gate.clone(),
    };
    let block_qubits: Vec<Qubit> = block.iter().flat_map(|g| g.qubits()).collect();
    if !gate.qubits().any(|q| block_qubits.contains(&q)) {
        return Ok(BackwardPush {
            block: block.to_vec(),
            after: vec![gate.clone()],
            rule: None,
        });
    }
    let (cx_at, c, t) = block_cx(block).ok_or_else(fail)?;
    let h_on = |q: Qubit| block.contains(&ExtendedGate::H(q));
    let keep = |rule| {
        Ok(BackwardPush {
            block: block.to_vec(),
            after: vec![gate.clone()],
            rule: Some(rule),
        })
    };
    match *gate {
        ExtendedGate::T(q) if q == c && !h_on(c) => keep(Rule::TControl),
        ExtendedGate::Cx(gc, gt) if gt == t && gc != c && !h_on(t) && !block_qubits.contains(&gc) => {
            keep(Rule::SharedTarget)
        }
        ExtendedGate::Cx(gc, gt) if gc == c && gt != t && !h_on(c) && !block_qubits.contains(&gt) => {
            keep(Rule::SharedControl)
        }
        ExtendedGate::H(x) => {
            // [H(x), CX(y→x), H(y)] ≡ [H(y), CX(x→y), H(x)]
            if block.len() == 2 && x == t && cx_at == 0 && block[1] == ExtendedGate::H(c) {
                return Ok(BackwardPush {
                    block: vec![ExtendedGate::H(c), ExtendedGate::Cx(t, c)],
                    after: vec![ExtendedGate::H(t)],
                    rule: Some(Rule::HSandwich),
                });
            }
            // [H(x), H(y), CX(x→y)] ≡ [CX(y→x), H(x), H(y)]
            if block.len() == 2 && x == c && cx_at == 1 && block[0] == ExtendedGate::H(t) {
                return Ok(BackwardPush {
                    block: vec![ExtendedGate::Cx(t, c), ExtendedGate::H(t)],
                    after: vec![ExtendedGate::H(c)],
                    rule: Some(Rule::HHReverse),
                });
            }
            Err(fail())
        }
        _ => Err(fail()),
    }
}

/// Deletes `X^e` on a qubit right before its measurement into `measured`
/// and XORs `e` into every dependent exponent that reads `measured`.
/// Returns the number of rewritten dependents.
pub fn forward_measurement_bit(e: &BitExpr, measured: Bit, dependents: &mut [ExtendedGate]) -> usize {
    if e.is_zero() {
        return 0;
    }
    let mut n = 0;
    for g in dependents {
        if let ExtendedGate::X(_, x) | ExtendedGate::Z(_, x) = g {
            if x.contains(measured) {
                x.xor_assign(e);
                n += 1;
            }
        }
    }
    n
}

/// Applies [`forward_measurement_bit`] wherever a classically controlled X
/// is the last gate on a qubit before its measurement.
pub fn forward_measurement_bits(circuit: &ExtendedCircuit) -> ExtendedCircuit {
    let mut gates = circuit.gates.clone();
    let mut i = 0;
    while i < gates.len() {
        if let ExtendedGate::X(q, e) = gates[i].clone() {
            let next = (i + 1..gates.len()).find(|&j| gates[j].touches(q));
            if let Some(j) = next {
                if let ExtendedGate::M(_, b) = gates[j] {
                    forward_measurement_bit(&e, b, &mut gates[j + 1..]);
                    gates.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    ExtendedCircuit {
        gates,
        ..circuit.clone()
    }
}
