//! Emission of one entanglement round. Corrections are carried forward as a
//! Pauli frame and pre-processing CX blocks are hoisted backward, so that
//! telegates sharing a round overlap instead of running back to back.

use std::collections::BTreeMap;

use super::rules::{push_backward, push_forward, PauliKind, PauliTerm, Rule, RuleStats};
use super::{Bit, BitExpr, ExtendedGate};
use crate::circuit::Qubit;

/// Hands out `b<step>_<seq>` identifiers.
#[derive(Debug, Clone)]
pub struct BitAllocator {
    pub step: u32,
    next: u32,
}

impl BitAllocator {
    pub fn new(step: u32) -> Self {
        BitAllocator { step, next: 1 }
    }

    pub fn next_bit(&mut self) -> Bit {
        let b = Bit::new(self.step, self.next);
        self.next += 1;
        b
    }
}

/// A telegate with its communication qubits already bound.
///
/// `cw` sits next to the control, `cr` next to the target. `setup` holds
/// the E gates (and swap stages for multi-hop paths); the swap corrections
/// arrive as `cw_z` on `cw` and `cr_x` on `cr`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemoteOp {
    pub id: usize,
    pub control: Qubit,
    pub target: Qubit,
    pub cw: Qubit,
    pub cr: Qubit,
    pub bw: Bit,
    pub br: Bit,
    pub setup: Vec<ExtendedGate>,
    pub cw_z: BitExpr,
    pub cr_x: BitExpr,
}

impl RemoteOp {
    /// Single-hop telegate: one E between `cw` and `cr`.
    pub fn direct(id: usize, control: Qubit, target: Qubit, cw: Qubit, cr: Qubit, bw: Bit, br: Bit) -> Self {
        RemoteOp {
            id,
            control,
            target,
            cw,
            cr,
            bw,
            br,
            setup: vec![ExtendedGate::E(cw, cr)],
            cw_z: BitExpr::zero(),
            cr_x: BitExpr::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepItem {
    Local(ExtendedGate),
    Remote(RemoteOp),
}

/// Pending corrections: per qubit, the X and Z exponents.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Frame {
    terms: BTreeMap<Qubit, (BitExpr, BitExpr)>,
}

impl Frame {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&mut self, t: &PauliTerm) {
        let e = self.terms.entry(t.qubit).or_default();
        match t.kind {
            PauliKind::X => e.0.xor_assign(&t.expr),
            PauliKind::Z => e.1.xor_assign(&t.expr),
        }
        if e.0.is_zero() && e.1.is_zero() {
            self.terms.remove(&t.qubit);
        }
    }

    pub fn get(&self, q: Qubit) -> (BitExpr, BitExpr) {
        self.terms.get(&q).cloned().unwrap_or_default()
    }

    fn take(&mut self, q: Qubit) -> Vec<PauliTerm> {
        let Some((x, z)) = self.terms.remove(&q) else {
            return Vec::new();
        };
        let mut v = Vec::new();
        if !x.is_zero() {
            v.push(PauliTerm::x(q, x));
        }
        if !z.is_zero() {
            v.push(PauliTerm::z(q, z));
        }
        v
    }

    /// Emits every pending correction, Z before X on each qubit.
    pub fn flush_all(&mut self) -> Vec<ExtendedGate> {
        let mut out = Vec::new();
        for (q, (x, z)) in std::mem::take(&mut self.terms) {
            if !z.is_zero() {
                out.push(ExtendedGate::Z(q, z));
            }
            if !x.is_zero() {
                out.push(ExtendedGate::X(q, x));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepTrace {
    /// Output index of the control-side and target-side CX of each remote,
    /// in item order.
    pub pieces: Vec<[usize; 2]>,
    /// Corrections that had to be applied physically: output index and
    /// exponent.
    pub flushes: Vec<(usize, BitExpr)>,
    /// Effective exponents of `bw`/`br` after measurement forwarding.
    pub outcomes: Vec<(BitExpr, BitExpr)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepEmission {
    pub gates: Vec<ExtendedGate>,
    pub trace: StepTrace,
    pub stats: RuleStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Local(usize),
    Piece(usize, usize),
    Measure(usize),
    Post(usize),
}

struct Emitter<'a> {
    frame: &'a mut Frame,
    out: Vec<ExtendedGate>,
    trace: StepTrace,
    stats: RuleStats,
}

impl Emitter<'_> {
    fn apply(&mut self, g: &ExtendedGate) {
        let pending: Vec<PauliTerm> = g.qubits().flat_map(|q| self.frame.take(q)).collect();
        let mut moved = Vec::new();
        for t in pending {
            match push_forward(&t, g) {
                Ok(p) => {
                    if let Some(r) = p.rule {
                        self.stats.record(r);
                    }
                    moved.extend(p.terms);
                }
                Err(_) => {
                    self.out.push(t.gate());
                    self.trace.flushes.push((self.out.len() - 1, t.expr));
                }
            }
        }
        for t in &moved {
            self.frame.add(t);
        }
        self.out.push(g.clone());
    }
}

/// Emits one round: all setup gates first, then the items in order with
/// pre-processing hoisted and corrections deferred into `frame`.
pub fn emit_step(items: &[StepItem], frame: &mut Frame) -> StepEmission {
    let remotes: Vec<&RemoteOp> = items
        .iter()
        .filter_map(|it| match it {
            StepItem::Remote(r) => Some(r),
            StepItem::Local(_) => None,
        })
        .collect();
    let locals: Vec<&ExtendedGate> = items
        .iter()
        .filter_map(|it| match it {
            StepItem::Local(g) => Some(g),
            StepItem::Remote(_) => None,
        })
        .collect();
    let mut local_gates: Vec<ExtendedGate> = locals.into_iter().cloned().collect();

    let mut em = Emitter {
        frame,
        out: Vec::new(),
        trace: StepTrace::default(),
        stats: RuleStats::default(),
    };
    for r in &remotes {
        em.out.extend(r.setup.iter().cloned());
    }
    for r in &remotes {
        em.frame.add(&PauliTerm::z(r.cw, r.cw_z.clone()));
        em.frame.add(&PauliTerm::x(r.cr, r.cr_x.clone()));
    }

    let mut blocks: Vec<[Vec<ExtendedGate>; 2]> = remotes
        .iter()
        .map(|r| {
            [
                vec![ExtendedGate::Cx(r.control, r.cw)],
                vec![ExtendedGate::Cx(r.cr, r.target), ExtendedGate::H(r.cr)],
            ]
        })
        .collect();
    let mut ops = Vec::new();
    let (mut li, mut ri) = (0, 0);
    for it in items {
        match it {
            StepItem::Local(_) => {
                ops.push(Op::Local(li));
                li += 1;
            }
            StepItem::Remote(_) => {
                ops.extend([Op::Piece(ri, 0), Op::Piece(ri, 1), Op::Measure(ri), Op::Post(ri)]);
                ri += 1;
            }
        }
    }

    let op_qubits = |op: Op, blocks: &[[Vec<ExtendedGate>; 2]], locals: &[ExtendedGate]| -> Vec<Qubit> {
        match op {
            Op::Local(i) => locals[i].qubits().collect(),
            Op::Piece(k, s) => blocks[k][s].iter().flat_map(|g| g.qubits()).collect(),
            Op::Measure(k) => vec![remotes[k].cw, remotes[k].cr],
            Op::Post(k) => vec![remotes[k].control, remotes[k].target],
        }
    };

    let mut conj: Vec<Vec<ExtendedGate>> = vec![Vec::new(); remotes.len()];
    for k in 0..remotes.len() {
        for side in 0..2 {
            let mut p = ops
                .iter()
                .position(|&o| o == Op::Piece(k, side))
                .expect("piece present");
            while p > 0 {
                match ops[p - 1] {
                    Op::Local(li) => match push_backward(&local_gates[li], &blocks[k][side]) {
                        Ok(bp) => {
                            if let Some(r) = bp.rule {
                                em.stats.record(r);
                            }
                            debug_assert_eq!(bp.after.len(), 1);
                            local_gates[li] = bp.after[0].clone();
                            blocks[k][side] = bp.block;
                        }
                        Err(_) => break,
                    },
                    Op::Piece(r, _) | Op::Measure(r) | Op::Post(r) if r == k => break,
                    // another remote's corrections are conjugated by the
                    // block when they are emitted
                    Op::Post(r) => conj[r].extend(blocks[k][side].iter().cloned()),
                    other => {
                        let mine = op_qubits(Op::Piece(k, side), &blocks, &local_gates);
                        if op_qubits(other, &blocks, &local_gates)
                            .iter()
                            .any(|q| mine.contains(q))
                        {
                            break;
                        }
                    }
                }
                ops.swap(p - 1, p);
                p -= 1;
            }
        }
    }

    em.trace.pieces = vec![[0, 0]; remotes.len()];
    em.trace.outcomes = vec![Default::default(); remotes.len()];
    for op in ops {
        match op {
            Op::Local(i) => em.apply(&local_gates[i]),
            Op::Piece(k, side) => {
                for g in blocks[k][side].clone() {
                    em.apply(&g);
                    if matches!(g, ExtendedGate::Cx(..)) {
                        em.trace.pieces[k][side] = em.out.len() - 1;
                    }
                }
            }
            Op::Measure(k) => {
                let r = remotes[k];
                let mut eff = Vec::new();
                for (c, bit) in [(r.cw, r.bw), (r.cr, r.br)] {
                    let (x, z) = em.frame.get(c);
                    em.frame.add(&PauliTerm::x(c, x.clone()));
                    em.frame.add(&PauliTerm::z(c, z.clone()));
                    if !z.is_zero() {
                        em.stats.record(Rule::ZMeasureAbsorb);
                    }
                    if !x.is_zero() {
                        em.stats.record(Rule::MeasurementForward);
                    }
                    eff.push(BitExpr::bit(bit).xor(&x));
                    em.out.push(ExtendedGate::M(c, bit));
                }
                em.trace.outcomes[k] = (eff[0].clone(), eff[1].clone());
            }
            Op::Post(k) => {
                let r = remotes[k];
                let (w, rr) = em.trace.outcomes[k].clone();
                let mut terms = vec![PauliTerm::z(r.control, rr), PauliTerm::x(r.target, w)];
                for g in &conj[k] {
                    let mut next = Vec::new();
                    for t in &terms {
                        let p = push_forward(t, g).expect("blocks hold only CX and H");
                        if let Some(rule) = p.rule {
                            em.stats.record(rule);
                        }
                        next.extend(p.terms);
                    }
                    terms = next;
                }
                for t in &terms {
                    em.frame.add(t);
                }
            }
        }
    }
    StepEmission {
        gates: em.out,
        trace: em.trace,
        stats: em.stats,
    }
}

/// Indices of gates in `gates[..at]` that can influence `gates[at]`
/// through shared qubits.
pub(crate) fn causal_past(gates: &[ExtendedGate], at: usize) -> Vec<bool> {
    let mut wires: Vec<Qubit> = gates[at].qubits().collect();
    let mut past = vec![false; gates.len()];
    for i in (0..at).rev() {
        if gates[i].qubits().any(|q| wires.contains(&q)) {
            past[i] = true;
            for q in gates[i].qubits() {
                if !wires.contains(&q) {
                    wires.push(q);
                }
            }
        }
    }
    past
}
