//! The quasi-parallelism predicate over pairs of remote CX occurrences.
//!
//! The cost of a pair is the largest lifetime extension, in layers, that
//! merging the two telegates into one round imposes on their communication
//! qubits. `A(i, j, B)` holds iff that cost is at most `B`.

use std::collections::HashMap;

use super::engine::{causal_past, emit_step, Frame, RemoteOp, StepEmission, StepItem};
use super::rules::RuleStats;
use super::{Bit, ExtendedCircuit};
use crate::circuit::{Commodity, Gate, GateRef, LogicalCircuit, Qubit};

/// A circuit with its commodities, plus synthetic communication qubits
/// `c<i>w`/`c<i>r` for every commodity.
#[derive(Debug, Clone)]
pub struct PairContext<'a> {
    pub circuit: &'a LogicalCircuit,
    pub commodities: &'a [Commodity],
    flat: Vec<(GateRef, Gate)>,
    remote_at: HashMap<GateRef, usize>,
    table: ExtendedCircuit,
    comm: Vec<[Qubit; 2]>,
    standalone: [usize; 2],
}

impl<'a> PairContext<'a> {
    pub fn new(circuit: &'a LogicalCircuit, commodities: &'a [Commodity]) -> Self {
        let flat: Vec<(GateRef, Gate)> = circuit.gates().collect();
        let remote_at: HashMap<GateRef, usize> =
            commodities.iter().enumerate().map(|(s, c)| (c.at, s)).collect();
        let mut table = ExtendedCircuit::over(circuit);
        let comm = commodities
            .iter()
            .map(|c| {
                [
                    table.add_qubit(&format!("c{}w", c.index), true),
                    table.add_qubit(&format!("c{}r", c.index), true),
                ]
            })
            .collect();
        PairContext {
            circuit,
            commodities,
            flat,
            remote_at,
            table,
            comm,
            standalone: standalone_lifetimes(),
        }
    }

    fn layer(&self, s: usize) -> usize {
        self.commodities[s].layer()
    }

    fn op(&self, s: usize) -> RemoteOp {
        let c = &self.commodities[s];
        let n = c.index as u32;
        RemoteOp::direct(
            c.index,
            c.control,
            c.target,
            self.comm[s][0],
            self.comm[s][1],
            Bit::new(0, 2 * n - 1),
            Bit::new(0, 2 * n),
        )
    }

    /// Flat positions of the gates in layers strictly between `i` and `j`.
    fn between(&self, i: usize, j: usize) -> impl Iterator<Item = usize> + '_ {
        let (li, lj) = (self.layer(i), self.layer(j));
        (0..self.flat.len()).filter(move |&p| {
            let l = self.flat[p].0.layer;
            l > li && l < lj
        })
    }

    /// Qubits reachable from `i`'s operands through the gates between,
    /// and the remote operations met on the way.
    fn forward_cone(&self, i: usize, j: usize) -> (Vec<bool>, Vec<usize>) {
        let mut cone = vec![false; self.circuit.qubits.len()];
        cone[self.commodities[i].control.0] = true;
        cone[self.commodities[i].target.0] = true;
        let mut hit = Vec::new();
        for p in self.between(i, j) {
            let (at, g) = self.flat[p];
            if g.qubits().any(|q| cone[q.0]) {
                for q in g.qubits() {
                    cone[q.0] = true;
                }
                if let Some(&r) = self.remote_at.get(&at) {
                    hit.push(r);
                }
            }
        }
        (cone, hit)
    }

    fn backward_remotes(&self, i: usize, j: usize) -> Vec<usize> {
        let mut cone = vec![false; self.circuit.qubits.len()];
        cone[self.commodities[j].control.0] = true;
        cone[self.commodities[j].target.0] = true;
        let mut hit = Vec::new();
        let ps: Vec<usize> = self.between(i, j).collect();
        for p in ps.into_iter().rev() {
            let (at, g) = self.flat[p];
            if g.qubits().any(|q| cone[q.0]) {
                for q in g.qubits() {
                    cone[q.0] = true;
                }
                if let Some(&r) = self.remote_at.get(&at) {
                    hit.push(r);
                }
            }
        }
        hit
    }

    /// Round containing `i`, every gate between, and `j`.
    fn mini_step(&self, i: usize, j: usize) -> (StepEmission, ExtendedCircuit) {
        let mut items = vec![StepItem::Remote(self.op(i))];
        for p in self.between(i, j) {
            let (at, g) = self.flat[p];
            match self.remote_at.get(&at) {
                Some(&r) => items.push(StepItem::Remote(self.op(r))),
                None => items.push(StepItem::Local(g.into())),
            }
        }
        items.push(StepItem::Remote(self.op(j)));
        let mut frame = Frame::default();
        let em = emit_step(&items, &mut frame);
        let mut fragment = self.table.clone();
        fragment.gates = em.gates.clone();
        fragment.gates.extend(frame.flush_all());
        (em, fragment)
    }

    fn remotes_between(&self, i: usize, j: usize) -> Vec<usize> {
        self.between(i, j)
            .filter_map(|p| self.remote_at.get(&self.flat[p].0).copied())
            .collect()
    }

    /// Whether a correction on `i`'s bits sits in the causal past of the
    /// round's last remote item.
    fn blocked(&self, em: &StepEmission, fragment: &ExtendedCircuit, i: usize) -> bool {
        let op = self.op(i);
        let pieces = *em.trace.pieces.last().expect("j is a remote item");
        pieces.iter().any(|&at| {
            let past = causal_past(&fragment.gates, at);
            em.trace
                .flushes
                .iter()
                .any(|(f, e)| past[*f] && (e.contains(op.bw) || e.contains(op.br)))
        })
    }

    fn extension(&self, fragment: &ExtendedCircuit, slots: &[usize]) -> u32 {
        slots
            .iter()
            .flat_map(|&s| [(self.comm[s][0], self.standalone[0]), (self.comm[s][1], self.standalone[1])])
            .map(|(c, base)| {
                let l = fragment.lifetime(c).expect("one E and one M per comm qubit");
                l.saturating_sub(base) as u32
            })
            .max()
            .unwrap_or(0)
    }
}

/// Lifetimes of the control-side and target-side halves of a lone telegate.
fn standalone_lifetimes() -> [usize; 2] {
    let mut c = ExtendedCircuit::new();
    let (u, v) = (c.add_qubit("u", false), c.add_qubit("v", false));
    let (w, r) = (c.add_qubit("w", true), c.add_qubit("r", true));
    let op = RemoteOp::direct(1, u, v, w, r, Bit::new(0, 1), Bit::new(0, 2));
    c.gates = emit_step(&[StepItem::Remote(op)], &mut Frame::default()).gates;
    [c.lifetime(w).unwrap(), c.lifetime(r).unwrap()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    SameLayer,
    Independent,
    Contiguous,
    /// Split at the commodity with this index.
    Recursive { pivot: usize },
    /// Some correction on `i`'s bits must be applied physically before
    /// `j` can start.
    Blocked,
}

/// The rewritten round for a pair, with its lifetime cost.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MergePlan {
    pub fragment: ExtendedCircuit,
    pub cost: u32,
    pub rules: RuleStats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub cost: Option<u32>,
    pub case: Case,
    pub plan: Option<MergePlan>,
}

#[derive(Debug, Clone)]
struct Entry {
    cost: Option<u32>,
    case: Case,
    plan: Option<MergePlan>,
}

/// Memoizing evaluator. `calls` counts every cost query including the
/// recursive ones; `stats` counts rule applications of fresh evaluations.
#[derive(Debug)]
pub struct Predicate<'c, 'a> {
    ctx: &'c PairContext<'a>,
    pub calls: usize,
    pub stats: RuleStats,
    cache: HashMap<(usize, usize), Entry>,
}

impl<'c, 'a> Predicate<'c, 'a> {
    pub fn new(ctx: &'c PairContext<'a>) -> Self {
        Predicate {
            ctx,
            calls: 0,
            stats: RuleStats::default(),
            cache: HashMap::new(),
        }
    }

    fn slot(&self, index: usize) -> usize {
        let s = index - 1;
        assert_eq!(self.ctx.commodities[s].index, index, "commodities must be enumerated 1..k");
        s
    }

    /// Decides `A(i, j, budget)` for commodity indices `i`, `j`.
    pub fn evaluate(&mut self, i: usize, j: usize, budget: u32) -> Verdict {
        let (si, sj) = (self.slot(i), self.slot(j));
        self.cost_of(si, sj);
        let e = self.cache[&(si, sj)].clone();
        let holds = e.cost.is_some_and(|c| c <= budget);
        Verdict {
            holds,
            cost: e.cost,
            case: e.case,
            plan: if holds { e.plan } else { None },
        }
    }

    /// Smallest budget for which the pair holds, `None` if no budget does.
    pub fn min_cost(&mut self, i: usize, j: usize) -> Option<u32> {
        let (si, sj) = (self.slot(i), self.slot(j));
        self.cost_of(si, sj)
    }

    pub fn plan(&self, i: usize, j: usize) -> Option<&MergePlan> {
        self.cache.get(&(i - 1, j - 1)).and_then(|e| e.plan.as_ref())
    }

    fn cost_of(&mut self, i: usize, j: usize) -> Option<u32> {
        self.calls += 1;
        if let Some(e) = self.cache.get(&(i, j)) {
            return e.cost;
        }
        let ctx = self.ctx;
        assert!(ctx.layer(i) <= ctx.layer(j), "pair out of layer order");
        let entry = if ctx.layer(i) == ctx.layer(j) {
            Entry {
                cost: Some(0),
                case: Case::SameLayer,
                plan: Some(MergePlan::default()),
            }
        } else {
            let (cone, fwd) = ctx.forward_cone(i, j);
            let cj = &ctx.commodities[j];
            if !cone[cj.control.0] && !cone[cj.target.0] {
                Entry {
                    cost: Some(0),
                    case: Case::Independent,
                    plan: Some(MergePlan::default()),
                }
            } else {
                let bwd = ctx.backward_remotes(i, j);
                let mut relevant: Vec<usize> = fwd.into_iter().filter(|r| bwd.contains(r)).collect();
                relevant.sort();
                if relevant.is_empty() {
                    self.contiguous(i, j)
                } else {
                    let k = relevant[(relevant.len() - 1) / 2];
                    let left = self.cost_of(i, k);
                    let right = self.cost_of(k, j);
                    let pivot = ctx.commodities[k].index;
                    match left.zip(right) {
                        None => Entry {
                            cost: None,
                            case: Case::Recursive { pivot },
                            plan: None,
                        },
                        Some((a, b)) => {
                            // the halves can hide a correction that only
                            // blocks once both are in one round
                            let (em, fragment) = ctx.mini_step(i, j);
                            if ctx.blocked(&em, &fragment, i) {
                                Entry {
                                    cost: None,
                                    case: Case::Blocked,
                                    plan: None,
                                }
                            } else {
                                let mut slots = vec![i, j];
                                slots.extend(ctx.remotes_between(i, j));
                                let cost = (a + b).max(ctx.extension(&fragment, &slots));
                                Entry {
                                    cost: Some(cost),
                                    case: Case::Recursive { pivot },
                                    plan: Some(MergePlan {
                                        fragment,
                                        cost,
                                        rules: em.stats,
                                    }),
                                }
                            }
                        }
                    }
                }
            }
        };
        let cost = entry.cost;
        self.cache.insert((i, j), entry);
        cost
    }

    fn contiguous(&mut self, i: usize, j: usize) -> Entry {
        let ctx = self.ctx;
        let (em, fragment) = ctx.mini_step(i, j);
        self.stats.merge(&em.stats);
        if ctx.blocked(&em, &fragment, i) {
            return Entry {
                cost: None,
                case: Case::Blocked,
                plan: None,
            };
        }
        let cost = ctx.extension(&fragment, &[i, j]);
        Entry {
            cost: Some(cost),
            case: Case::Contiguous,
            plan: Some(MergePlan {
                fragment,
                cost,
                rules: em.stats,
            }),
        }
    }
}
