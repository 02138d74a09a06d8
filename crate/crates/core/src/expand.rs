//! Physical circuit emission: entanglement paths with swaps, telegates,
//! and the step-by-step schedule realizing a flow solution.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::circuit::{Commodity, Gate, LogicalCircuit, Qubit};
use crate::flow::Solution;
use crate::network::{NetworkGraph, NodeId, QuotientGraph};
use crate::relations::RelationTable;
use crate::rewrite::{
    emit_step, BitAllocator, BitExpr, ExtendedCircuit, ExtendedGate, Frame, RemoteOp, StepItem,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpandError {
    #[error("step {step}: no free link for commodity {commodity} on hop {hop}")]
    Binding {
        step: usize,
        commodity: usize,
        hop: usize,
    },
    #[error("step {step}: commodities {i} and {j} share a step without quasi-parallelism")]
    NotQuasiParallel { step: usize, i: usize, j: usize },
    #[error("commodity {0} has no route")]
    MissingRoute(usize),
    #[error("qubit `{0}` is not a computation qubit of the network")]
    UnknownQubit(String),
    #[error("no local route between `{0}` and `{1}`")]
    NoLocalRoute(String, String),
}

/// Entanglement between the endpoints of a multi-hop path, with the Pauli
/// corrections the swaps leave on them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathFragment {
    /// E gates then swap stages.
    pub setup: Vec<ExtendedGate>,
    pub near: Qubit,
    pub far: Qubit,
    /// Z exponent owed by `near`, X exponent owed by `far`.
    pub z_near: BitExpr,
    pub x_far: BitExpr,
}

impl PathFragment {
    /// Setup followed by the endpoint corrections.
    pub fn gates(&self) -> Vec<ExtendedGate> {
        let mut g = self.setup.clone();
        if !self.z_near.is_zero() {
            g.push(ExtendedGate::Z(self.near, self.z_near.clone()));
        }
        if !self.x_far.is_zero() {
            g.push(ExtendedGate::X(self.far, self.x_far.clone()));
        }
        g
    }
}

/// Chains `hops` (one `(near, far)` link per hop) into one pair between the
/// first near qubit and the last far qubit.
pub fn entanglement_path_fragment(hops: &[(Qubit, Qubit)], alloc: &mut BitAllocator) -> PathFragment {
    assert!(!hops.is_empty(), "path needs at least one hop");
    let mut setup: Vec<ExtendedGate> = hops.iter().map(|&(a, b)| ExtendedGate::E(a, b)).collect();
    let mut z_near = BitExpr::zero();
    let mut x_far = BitExpr::zero();
    for w in hops.windows(2) {
        let (held, next) = (w[0].1, w[1].0);
        let (s, t) = (alloc.next_bit(), alloc.next_bit());
        setup.extend([
            ExtendedGate::Cx(held, next),
            ExtendedGate::H(held),
            ExtendedGate::M(held, s),
            ExtendedGate::M(next, t),
        ]);
        z_near.toggle(s);
        x_far.toggle(t);
    }
    PathFragment {
        setup,
        near: hops[0].0,
        far: hops[hops.len() - 1].1,
        z_near,
        x_far,
    }
}

/// Fresh circuit with `m` hops over qubits `a1 b1 .. am bm`.
pub fn path_circuit(m: usize) -> (ExtendedCircuit, PathFragment) {
    let mut c = ExtendedCircuit::new();
    let hops: Vec<(Qubit, Qubit)> = (1..=m)
        .map(|j| (c.add_qubit(&format!("a{j}"), true), c.add_qubit(&format!("b{j}"), true)))
        .collect();
    let f = entanglement_path_fragment(&hops, &mut BitAllocator::new(1));
    c.gates = f.gates();
    (c, f)
}

/// Counts the E, CX, H, M and correction stages used by a path fragment.
pub fn stage_depth(c: &ExtendedCircuit) -> usize {
    c.depth()
}

/// A telegate over an entanglement path, bits drawn from `alloc`.
pub fn remote_op(
    id: usize,
    control: Qubit,
    target: Qubit,
    hops: &[(Qubit, Qubit)],
    alloc: &mut BitAllocator,
) -> RemoteOp {
    let path = entanglement_path_fragment(hops, alloc);
    RemoteOp {
        id,
        control,
        target,
        cw: path.near,
        cr: path.far,
        bw: alloc.next_bit(),
        br: alloc.next_bit(),
        setup: path.setup,
        cw_z: path.z_near,
        cr_x: path.x_far,
    }
}

/// The complete protocol for one remote CX, corrections included.
pub fn emit_telegate(op: &RemoteOp) -> Vec<ExtendedGate> {
    let mut frame = Frame::default();
    let mut g = emit_step(&[StepItem::Remote(op.clone())], &mut frame).gates;
    g.extend(frame.flush_all());
    g
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepBlock {
    pub tau: usize,
    pub start: usize,
    pub end: usize,
    /// Largest lifetime growth of a communication qubit in this step
    /// compared with running each telegate alone.
    pub lifetime_extension: u32,
    pub links_used: Vec<(usize, u32)>,
}

/// The emitted circuit split into a prefix (before any entanglement) and
/// one block per time step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhysicalSchedule {
    pub circuit: ExtendedCircuit,
    pub prefix_end: usize,
    pub steps: Vec<StepBlock>,
}

impl PhysicalSchedule {
    pub fn max_lifetime_extension(&self) -> u32 {
        self.steps.iter().map(|s| s.lifetime_extension).max().unwrap_or(0)
    }

    pub fn e_count(&self) -> usize {
        self.circuit
            .gates
            .iter()
            .filter(|g| matches!(g, ExtendedGate::E(..)))
            .count()
    }

    pub fn render(&self) -> String {
        let c = &self.circuit;
        let mut s = c.header();
        for g in &c.gates[..self.prefix_end] {
            let _ = writeln!(s, "{}", c.gate_line(g));
        }
        for b in &self.steps {
            let _ = writeln!(s, "--- step {} ---", b.tau);
            for g in &c.gates[b.start..b.end] {
                let _ = writeln!(s, "{}", c.gate_line(g));
            }
        }
        s
    }

    pub fn to_extended(&self) -> ExtendedCircuit {
        self.circuit.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpandOptions {
    /// Insert swap chains for CX between uncoupled qubits of one processor.
    pub local_routing: bool,
}

impl Default for ExpandOptions {
    fn default() -> Self {
        ExpandOptions { local_routing: true }
    }
}

struct Ctx<'a> {
    net: &'a NetworkGraph,
    q: &'a QuotientGraph,
    out: ExtendedCircuit,
    node_of: HashMap<usize, NodeId>,
}

impl Ctx<'_> {
    fn comm(&mut self, n: NodeId) -> Qubit {
        let q = self.out.add_qubit(self.net.name(n), self.net.is_comm(n));
        self.node_of.insert(q.0, n);
        q
    }

    /// Binds one free link per hop of `walk`; `busy` tracks used nodes.
    fn bind(
        &mut self,
        walk: &[usize],
        from: crate::network::ProcId,
        busy: &mut Vec<NodeId>,
        used: &mut HashMap<usize, u32>,
    ) -> Result<Vec<(Qubit, Qubit)>, usize> {
        let mut at = from;
        let mut hops = Vec::new();
        for (h, &e) in walk.iter().enumerate() {
            let edge = &self.q.edges[e];
            let pick = edge.links.iter().find_map(|&li| {
                let (x, y) = self.net.links[li];
                let (near, far) = if self.net.proc_of(x) == at { (x, y) } else { (y, x) };
                (!busy.contains(&near) && !busy.contains(&far)).then_some((near, far))
            });
            let (near, far) = pick.ok_or(h + 1)?;
            busy.extend([near, far]);
            *used.entry(e).or_default() += 1;
            hops.push((self.comm(near), self.comm(far)));
            at = edge.other(at);
        }
        Ok(hops)
    }
}

/// Emits the physical circuit for `sol`.
///
/// Every gate runs in the step of its latest remote ancestor; corrections
/// stay in a Pauli frame until they block a gate or the step ends.
pub fn emit_schedule(
    sol: &Solution,
    circuit: &LogicalCircuit,
    commodities: &[Commodity],
    relations: &RelationTable,
    net: &NetworkGraph,
    opts: ExpandOptions,
) -> Result<PhysicalSchedule, ExpandError> {
    let q = net.quotient();
    let mut cx = Ctx {
        net,
        q: &q,
        out: ExtendedCircuit::over(circuit),
        node_of: HashMap::new(),
    };
    for (i, name) in circuit.qubits.iter().enumerate() {
        let n = net
            .node(name)
            .filter(|&n| !net.is_comm(n))
            .ok_or_else(|| ExpandError::UnknownQubit(name.clone()))?;
        cx.node_of.insert(i, n);
    }

    let remote: HashMap<_, usize> = commodities.iter().map(|c| (c.at, c.index)).collect();
    let mut tau_of = HashMap::new();
    for c in commodities {
        let r = sol.route(c.index).ok_or(ExpandError::MissingRoute(c.index))?;
        tau_of.insert(c.index, r.tau);
    }
    let mut wire = vec![0usize; circuit.qubits.len()];
    let mut placed: Vec<(usize, usize, Gate)> = Vec::new();
    for (at, g) in circuit.gates() {
        let mut st = g.qubits().map(|x| wire[x.0]).max().unwrap_or(0);
        let idx = remote.get(&at).copied().unwrap_or(0);
        if idx > 0 {
            st = st.max(tau_of[&idx]);
        }
        for x in g.qubits() {
            wire[x.0] = st;
        }
        placed.push((st, idx, g));
    }

    let horizon = sol.routes.iter().map(|r| r.tau).max().unwrap_or(0);
    for tau in 1..=horizon {
        let members = sol.at_step(tau);
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                if relations.precedes(i, j) && !relations.quasi_parallel(i, j) {
                    return Err(ExpandError::NotQuasiParallel { step: tau, i, j });
                }
            }
        }
    }

    for (_, _, g) in placed.iter().filter(|p| p.0 == 0) {
        cx.out.push((*g).into());
    }
    let prefix_end = cx.out.gates.len();
    let mut frame = Frame::default();
    let mut steps = Vec::new();
    for tau in 1..=horizon {
        let mut alloc = BitAllocator::new(tau as u32);
        let mut busy = Vec::new();
        let mut used = HashMap::new();
        let mut items = Vec::new();
        let mut solo = Vec::new();
        for &(st, idx, g) in &placed {
            if st != tau {
                continue;
            }
            if idx == 0 {
                items.push(StepItem::Local(g.into()));
                continue;
            }
            let c = &commodities[idx - 1];
            let route = sol.route(idx).expect("checked above");
            let hops = cx
                .bind(&route.path, c.control_proc, &mut busy, &mut used)
                .map_err(|hop| ExpandError::Binding {
                    step: tau,
                    commodity: idx,
                    hop,
                })?;
            let op = remote_op(idx, c.control, c.target, &hops, &mut alloc);
            solo.push(op.clone());
            items.push(StepItem::Remote(op));
        }
        let start = cx.out.gates.len();
        let em = emit_step(&items, &mut frame);
        cx.out.gates.extend(em.gates.iter().cloned());
        // flushed here rather than carried, so a carried X cannot stall a
        // later step's pre-processing
        cx.out.gates.extend(frame.flush_all());
        let mut step_c = cx.out.clone();
        step_c.gates = cx.out.gates[start..].to_vec();
        let mut ext = 0;
        for op in &solo {
            let mut alone = cx.out.clone();
            alone.gates = emit_step(&[StepItem::Remote(op.clone())], &mut Frame::default()).gates;
            for c in alone.entangled_qubits() {
                let base = alone.lifetime(c).unwrap_or(0);
                let now = step_c.lifetime(c).unwrap_or(base);
                ext = ext.max(now.saturating_sub(base) as u32);
            }
        }
        let mut links_used: Vec<(usize, u32)> = used.into_iter().collect();
        links_used.sort();
        steps.push(StepBlock {
            tau,
            start,
            end: cx.out.gates.len(),
            lifetime_extension: ext,
            links_used,
        });
    }
    if horizon == 0 {
        cx.out.gates.extend(frame.flush_all());
    }

    let mut sched = PhysicalSchedule {
        circuit: cx.out,
        prefix_end,
        steps,
    };
    if opts.local_routing {
        route_locally(&mut sched, net, &cx.node_of)?;
    }
    Ok(sched)
}

/// Replaces every CX between uncoupled qubits of one processor with a swap
/// chain there and back.
fn route_locally(
    sched: &mut PhysicalSchedule,
    net: &NetworkGraph,
    node_of: &HashMap<usize, NodeId>,
) -> Result<(), ExpandError> {
    let old = std::mem::take(&mut sched.circuit.gates);
    let mut remap = vec![0usize; old.len() + 1];
    let mut out = Vec::with_capacity(old.len());
    for (i, g) in old.iter().enumerate() {
        remap[i] = out.len();
        let ExtendedGate::Cx(a, b) = *g else {
            out.push(g.clone());
            continue;
        };
        let (na, nb) = (node_of[&a.0], node_of[&b.0]);
        if net.proc_of(na) != net.proc_of(nb) || net.locally_coupled(na, nb) {
            out.push(g.clone());
            continue;
        }
        let path = net
            .local_route(na, nb, &[])
            .ok_or_else(|| ExpandError::NoLocalRoute(net.name(na).into(), net.name(nb).into()))?;
        let qs: Vec<Qubit> = path
            .iter()
            .map(|&n| sched.circuit.add_qubit(net.name(n), net.is_comm(n)))
            .collect();
        let n = qs.len();
        let mut swaps = Vec::new();
        for w in qs[..n - 1].windows(2) {
            let (x, y) = (w[0], w[1]);
            swaps.extend([ExtendedGate::Cx(x, y), ExtendedGate::Cx(y, x), ExtendedGate::Cx(x, y)]);
        }
        out.extend(swaps.iter().cloned());
        out.push(ExtendedGate::Cx(qs[n - 2], b));
        out.extend(swaps.chunks(3).rev().flat_map(|c| c.iter().cloned()));
    }
    remap[old.len()] = out.len();
    sched.prefix_end = remap[sched.prefix_end];
    for s in &mut sched.steps {
        s.start = remap[s.start];
        s.end = remap[s.end];
    }
    sched.circuit.gates = out;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::Bit;

    #[test]
    fn single_hop_is_bare_e() {
        let (c, f) = path_circuit(1);
        assert_eq!(c.gates.len(), 1);
        assert_eq!(stage_depth(&c), 1);
        assert!(f.z_near.is_zero() && f.x_far.is_zero());
    }

    #[test]
    fn two_hop_swap() {
        let (c, f) = path_circuit(2);
        assert_eq!(stage_depth(&c), 5);
        assert_eq!(c.measurement_count(), 2);
        assert_eq!(f.z_near, BitExpr::bit(Bit::new(1, 1)));
        assert_eq!(f.x_far, BitExpr::bit(Bit::new(1, 2)));
    }

    #[test]
    fn depth_stays_five() {
        for m in 2..=8 {
            let (c, f) = path_circuit(m);
            assert_eq!(stage_depth(&c), 5, "m = {m}");
            assert_eq!(c.measurement_count(), 2 * (m - 1));
            assert_eq!(f.z_near.len(), m - 1);
        }
    }

    #[test]
    fn telegate_corrections() {
        let mut c = ExtendedCircuit::new();
        let (u, v) = (c.add_qubit("qu", false), c.add_qubit("qv", false));
        let (w, r) = (c.add_qubit("cw", true), c.add_qubit("cr", true));
        let op = remote_op(1, u, v, &[(w, r)], &mut BitAllocator::new(1));
        let g = emit_telegate(&op);
        let n = g.len();
        assert_eq!(g[n - 2], ExtendedGate::Z(u, BitExpr::bit(Bit::new(1, 2))));
        assert_eq!(g[n - 1], ExtendedGate::X(v, BitExpr::bit(Bit::new(1, 1))));
    }
}
