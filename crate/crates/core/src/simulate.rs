//! Branching statevector simulation of extended circuits and equivalence
//! checks against logical circuits.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::LogicalCircuit;
use crate::rewrite::{Bit, ExtendedCircuit, ExtendedGate};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("{needed} live qubits exceed the budget of {limit}")]
    QubitBudget { needed: usize, limit: usize },
    #[error("gate on measured qubit `{0}`")]
    ConsumedQubit(String),
    #[error("gate on communication qubit `{0}` before any E")]
    UncreatedQubit(String),
    #[error("E on live qubit `{0}`")]
    Recreated(String),
    #[error("correction reads unmeasured bit {0}")]
    UnknownBit(Bit),
}

/// Dense state over a set of labelled qubits; label `labels[p]` is bit `p`
/// of the amplitude index.
#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    pub labels: Vec<usize>,
    pub amps: Vec<Complex64>,
}

impl Default for Register {
    fn default() -> Self {
        Register {
            labels: Vec::new(),
            amps: vec![Complex64::new(1.0, 0.0)],
        }
    }
}

impl Register {
    /// Computational basis state; `bits[p]` is the value of `labels[p]`.
    pub fn basis(labels: Vec<usize>, bits: &[bool]) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << labels.len()];
        let idx = bits.iter().enumerate().fold(0, |a, (p, &b)| a | ((b as usize) << p));
        amps[idx] = Complex64::new(1.0, 0.0);
        Register { labels, amps }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn pos(&self, label: usize) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn add(&mut self, label: usize) {
        self.labels.push(label);
        let n = self.amps.len();
        self.amps.resize(2 * n, Complex64::new(0.0, 0.0));
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn one(&mut self, label: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1 << self.pos(label).expect("live qubit");
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    pub fn h(&mut self, l: usize) {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        self.one(l, [[s, s], [s, -s]]);
    }

    pub fn t(&mut self, l: usize) {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        self.one(l, [[o, z], [z, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]]);
    }

    pub fn x(&mut self, l: usize) {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        self.one(l, [[z, o], [o, z]]);
    }

    pub fn z(&mut self, l: usize) {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        self.one(l, [[o, z], [z, -o]]);
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        let cb = 1 << self.pos(c).expect("live control");
        let tb = 1 << self.pos(t).expect("live target");
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    /// Projects `label` onto `value` and removes it; returns the
    /// unnormalized remainder.
    pub fn project(&self, label: usize, value: bool) -> Register {
        let p = self.pos(label).expect("live qubit");
        let low = (1 << p) - 1;
        let amps = (0..self.amps.len() / 2)
            .map(|i| {
                let full = (i & low) | ((i & !low) << 1) | ((value as usize) << p);
                self.amps[full]
            })
            .collect();
        let mut labels = self.labels.clone();
        labels.remove(p);
        Register { labels, amps }
    }

    fn scale(&mut self, f: f64) {
        for a in &mut self.amps {
            *a *= f;
        }
    }

    /// Amplitudes reordered to `order`, which must be a permutation of the
    /// labels.
    pub fn amplitudes_in(&self, order: &[usize]) -> Option<Vec<Complex64>> {
        if order.len() != self.labels.len() {
            return None;
        }
        let map: Vec<usize> = order
            .iter()
            .map(|l| self.pos(*l))
            .collect::<Option<Vec<_>>>()?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, o) in out.iter_mut().enumerate() {
            let mut j = 0;
            for (p, &src) in map.iter().enumerate() {
                if i >> p & 1 == 1 {
                    j |= 1 << src;
                }
            }
            *o = self.amps[j];
        }
        Some(out)
    }
}

/// One measurement history and the state it leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBranch {
    pub reg: Register,
    pub bits: BTreeMap<Bit, bool>,
    pub prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub max_qubits: usize,
    /// Above this many measurements, trajectories are sampled.
    pub exhaustive_limit: usize,
    pub samples: usize,
    pub seed: u64,
    pub prune: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_qubits: 14,
            exhaustive_limit: 14,
            samples: 32,
            seed: 7,
            prune: 1e-14,
        }
    }
}

#[derive(Debug, Clone)]
struct Sim {
    reg: Register,
    bits: BTreeMap<Bit, bool>,
    prob: f64,
    pending: HashMap<usize, usize>,
    consumed: HashSet<usize>,
}

struct Runner<'a> {
    c: &'a ExtendedCircuit,
    opts: RunOptions,
    rng: Option<ChaCha8Rng>,
}

impl Runner<'_> {
    fn name(&self, l: usize) -> String {
        self.c.qubits.get(l).cloned().unwrap_or_else(|| format!("#{l}"))
    }

    fn ensure(&self, s: &mut Sim, l: usize) -> Result<(), SimError> {
        if s.reg.pos(l).is_some() {
            return Ok(());
        }
        if let Some(p) = s.pending.remove(&l) {
            s.pending.remove(&p);
            s.reg.add(l);
            s.reg.add(p);
            s.reg.h(l);
            s.reg.cx(l, p);
        } else if s.consumed.contains(&l) {
            return Err(SimError::ConsumedQubit(self.name(l)));
        } else if l < self.c.comm.len() && self.c.comm[l] {
            return Err(SimError::UncreatedQubit(self.name(l)));
        } else {
            s.reg.add(l);
        }
        if s.reg.len() > self.opts.max_qubits {
            return Err(SimError::QubitBudget {
                needed: s.reg.len(),
                limit: self.opts.max_qubits,
            });
        }
        Ok(())
    }

    fn go(&mut self, mut s: Sim, from: usize, visit: &mut dyn FnMut(StateBranch)) -> Result<(), SimError> {
        let gates = &self.c.gates;
        for pc in from..gates.len() {
            match &gates[pc] {
                ExtendedGate::H(q) => {
                    self.ensure(&mut s, q.0)?;
                    s.reg.h(q.0)
                }
                ExtendedGate::T(q) => {
                    self.ensure(&mut s, q.0)?;
                    s.reg.t(q.0)
                }
                ExtendedGate::Cx(a, b) => {
                    self.ensure(&mut s, a.0)?;
                    self.ensure(&mut s, b.0)?;
                    s.reg.cx(a.0, b.0)
                }
                ExtendedGate::X(q, e) | ExtendedGate::Z(q, e) => {
                    if let Some(b) = e.bits().find(|b| !s.bits.contains_key(b)) {
                        return Err(SimError::UnknownBit(b));
                    }
                    let v = e.eval(|b| s.bits.get(&b).copied()).expect("all bits known");
                    self.ensure(&mut s, q.0)?;
                    if v {
                        if matches!(gates[pc], ExtendedGate::X(..)) {
                            s.reg.x(q.0)
                        } else {
                            s.reg.z(q.0)
                        }
                    }
                }
                ExtendedGate::E(a, b) => {
                    for l in [a.0, b.0] {
                        if s.reg.pos(l).is_some() || s.pending.contains_key(&l) {
                            return Err(SimError::Recreated(self.name(l)));
                        }
                        s.consumed.remove(&l);
                    }
                    s.pending.insert(a.0, b.0);
                    s.pending.insert(b.0, a.0);
                }
                ExtendedGate::M(q, bit) => {
                    self.ensure(&mut s, q.0)?;
                    let outcomes: Vec<(bool, Register, f64)> = [false, true]
                        .into_iter()
                        .map(|v| {
                            let r = s.reg.project(q.0, v);
                            let p = r.norm_sqr();
                            (v, r, p)
                        })
                        .filter(|o| o.2 > self.opts.prune)
                        .collect();
                    let chosen: Vec<(bool, Register, f64)> = match &mut self.rng {
                        Some(rng) => {
                            let total: f64 = outcomes.iter().map(|o| o.2).sum();
                            let x = rng.gen::<f64>() * total;
                            let pick = if outcomes.len() == 2 && x >= outcomes[0].2 { 1 } else { 0 };
                            let (v, mut r, p) = outcomes.into_iter().nth(pick).expect("an outcome");
                            r.scale(1.0 / p.sqrt());
                            vec![(v, r, 1.0)]
                        }
                        None => outcomes
                            .into_iter()
                            .map(|(v, mut r, p)| {
                                r.scale(1.0 / p.sqrt());
                                (v, r, p)
                            })
                            .collect(),
                    };
                    for (v, r, p) in chosen {
                        let mut next = Sim {
                            reg: r,
                            bits: s.bits.clone(),
                            prob: s.prob * p,
                            pending: s.pending.clone(),
                            consumed: s.consumed.clone(),
                        };
                        next.bits.insert(*bit, v);
                        next.consumed.insert(q.0);
                        self.go(next, pc + 1, visit)?;
                    }
                    return Ok(());
                }
            }
        }
        let left: Vec<usize> = s.pending.keys().copied().collect();
        for l in left {
            if s.pending.contains_key(&l) {
                self.ensure(&mut s, l)?;
            }
        }
        visit(StateBranch {
            reg: s.reg,
            bits: s.bits,
            prob: s.prob,
        });
        Ok(())
    }
}

/// Runs `c` on `input`, calling `visit` per branch. Exhaustive unless the
/// circuit measures more than `opts.exhaustive_limit` times; then
/// `opts.samples` seeded trajectories with probability 1 each.
pub fn run_with(
    c: &ExtendedCircuit,
    input: &Register,
    opts: RunOptions,
    visit: &mut dyn FnMut(StateBranch),
) -> Result<bool, SimError> {
    if input.len() > opts.max_qubits {
        return Err(SimError::QubitBudget {
            needed: input.len(),
            limit: opts.max_qubits,
        });
    }
    let sampled = c.measurement_count() > opts.exhaustive_limit;
    let start = Sim {
        reg: input.clone(),
        bits: BTreeMap::new(),
        prob: 1.0,
        pending: HashMap::new(),
        consumed: HashSet::new(),
    };
    if sampled {
        let mut r = Runner {
            c,
            opts,
            rng: Some(ChaCha8Rng::seed_from_u64(opts.seed)),
        };
        for _ in 0..opts.samples {
            r.go(start.clone(), 0, visit)?;
        }
    } else {
        Runner { c, opts, rng: None }.go(start, 0, visit)?;
    }
    Ok(!sampled)
}

pub fn run(c: &ExtendedCircuit, input: &Register) -> Result<Vec<StateBranch>, SimError> {
    let mut out = Vec::new();
    run_with(c, input, RunOptions::default(), &mut |b| out.push(b))?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    /// Reference register entangled with the inputs.
    Process,
    /// Basis states plus seeded random states.
    Sampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub max_dev: f64,
    pub mode: CheckMode,
    /// False when measurement trajectories were sampled.
    pub exhaustive: bool,
    pub branches: usize,
    pub seed: u64,
}

fn overlap_dev(a: &[Complex64], b: &[Complex64]) -> f64 {
    let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    (1.0 - ip.norm() / (na * nb)).max(0.0)
}

/// Deviation of one branch from `expected` (over `order`). Extra
/// computation qubits must have returned to |0>; live communication qubits
/// count as a mismatch.
fn branch_dev(c: &ExtendedCircuit, b: &StateBranch, order: &[usize], expected: &[Complex64]) -> f64 {
    let mut reg = b.reg.clone();
    for l in b.reg.labels.clone() {
        if order.contains(&l) {
            continue;
        }
        if l < c.comm.len() && c.comm[l] {
            return 1.0;
        }
        reg = reg.project(l, false);
    }
    match reg.amplitudes_in(order) {
        Some(a) => overlap_dev(expected, &a),
        None => 1.0,
    }
}

fn random_state(labels: &[usize], rng: &mut ChaCha8Rng) -> Register {
    let mut r = Register::basis(labels.to_vec(), &vec![false; labels.len()]);
    for a in &mut r.amps {
        *a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let n = r.norm_sqr().sqrt();
    r.scale(1.0 / n);
    r
}

/// Checks that `physical` acts on its computation qubits like `logical`.
/// The first `logical.qubits.len()` qubits of `physical` must be the
/// logical qubits in order.
pub fn equivalent(
    physical: &ExtendedCircuit,
    logical: &LogicalCircuit,
    tol: f64,
    opts: RunOptions,
) -> Result<EquivalenceReport, SimError> {
    let n = logical.qubits.len();
    assert!(
        physical.qubits.len() >= n && physical.qubits[..n] == logical.qubits[..],
        "physical qubit table must start with the logical qubits"
    );
    let mut reference = ExtendedCircuit::from_logical(logical);
    reference.qubits = physical.qubits.clone();
    reference.comm = physical.comm.clone();
    let off = physical.qubits.len();
    let mut input = Register::default();
    for i in 0..n {
        input.add(i);
        input.add(off + i);
        input.h(off + i);
        input.cx(off + i, i);
    }
    match compare(physical, &reference, &input, opts) {
        Ok((dev, branches, exhaustive)) => Ok(EquivalenceReport {
            equivalent: dev <= tol,
            max_dev: dev,
            mode: CheckMode::Process,
            exhaustive,
            branches,
            seed: opts.seed,
        }),
        Err(SimError::QubitBudget { .. }) => {
            let labels: Vec<usize> = (0..n).collect();
            let mut inputs: Vec<Register> = (0..1usize << n)
                .map(|m| {
                    let bits: Vec<bool> = (0..n).map(|p| m >> p & 1 == 1).collect();
                    Register::basis(labels.clone(), &bits)
                })
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            inputs.extend((0..8).map(|_| random_state(&labels, &mut rng)));
            let mut worst = 0.0f64;
            let mut branches = 0;
            let mut exhaustive = true;
            for inp in &inputs {
                let (d, b, e) = compare(physical, &reference, inp, opts)?;
                worst = worst.max(d);
                branches += b;
                exhaustive &= e;
            }
            Ok(EquivalenceReport {
                equivalent: worst <= tol,
                max_dev: worst,
                mode: CheckMode::Sampled,
                exhaustive,
                branches,
                seed: opts.seed,
            })
        }
        Err(e) => Err(e),
    }
}

/// Runs a measurement-free `reference` once and every branch of `c`.
fn compare(
    c: &ExtendedCircuit,
    reference: &ExtendedCircuit,
    input: &Register,
    opts: RunOptions,
) -> Result<(f64, usize, bool), SimError> {
    let mut expected = None;
    run_with(reference, input, opts, &mut |b| expected = Some(b))?;
    let expected = expected.expect("one branch");
    let order = expected.reg.labels.clone();
    let want = expected.reg.amps;
    let mut worst = 0.0f64;
    let mut count = 0;
    let exhaustive = run_with(c, input, opts, &mut |b| {
        worst = worst.max(branch_dev(c, &b, &order, &want));
        count += 1;
    })?;
    Ok((worst, count, exhaustive))
}

/// Equivalence of two extended circuits over the same qubit table. Branches
/// are paired when they agree on every bit both circuits measure.
pub fn equivalent_circuits(
    a: &ExtendedCircuit,
    b: &ExtendedCircuit,
    tol: f64,
    opts: RunOptions,
) -> Result<EquivalenceReport, SimError> {
    assert_eq!(a.qubits, b.qubits, "circuits must share a qubit table");
    let comp = a.computation_qubits();
    let off = a.qubits.len();
    let mut input = Register::default();
    for (i, q) in comp.iter().enumerate() {
        input.add(q.0);
        input.add(off + i);
        input.h(off + i);
        input.cx(off + i, q.0);
    }
    let mut left = Vec::new();
    let ea = run_with(a, &input, opts, &mut |x| left.push(x))?;
    let mut right = Vec::new();
    let eb = run_with(b, &input, opts, &mut |x| right.push(x))?;
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for x in &left {
        for y in &right {
            let agree = x
                .bits
                .iter()
                .all(|(k, v)| y.bits.get(k).is_none_or(|w| w == v));
            if !agree {
                continue;
            }
            pairs += 1;
            let mut order = y.reg.labels.clone();
            order.sort();
            let mut xo = x.reg.labels.clone();
            xo.sort();
            let d = if order != xo {
                1.0
            } else {
                overlap_dev(
                    &y.reg.amplitudes_in(&order).expect("same labels"),
                    &x.reg.amplitudes_in(&order).expect("same labels"),
                )
            };
            worst = worst.max(d);
        }
    }
    if pairs == 0 {
        worst = 1.0;
    }
    Ok(EquivalenceReport {
        equivalent: worst <= tol,
        max_dev: worst,
        mode: CheckMode::Process,
        exhaustive: ea && eb,
        branches: pairs,
        seed: opts.seed,
    })
}

/// Averaged output state over all branches, measurement records
/// discarded. `None` when branches leave different qubits alive.
fn mixed_state(branches: &[StateBranch]) -> Option<(Vec<usize>, Vec<Complex64>)> {
    let mut order = branches.first()?.reg.labels.clone();
    order.sort();
    let dim = 1usize << order.len();
    let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
    for b in branches {
        let a = b.reg.amplitudes_in(&order)?;
        for (i, x) in a.iter().enumerate() {
            for (j, y) in a.iter().enumerate() {
                rho[i * dim + j] += b.prob * x * y.conj();
            }
        }
    }
    Some((order, rho))
}

/// Equivalence of two extended circuits as channels: the averaged output
/// states must agree, whatever the measured bits read. Needed when a rewrite
/// changes the value a measurement records. Deviation is the Frobenius
/// distance of the two states.
pub fn equivalent_channels(
    a: &ExtendedCircuit,
    b: &ExtendedCircuit,
    tol: f64,
    opts: RunOptions,
) -> Result<EquivalenceReport, SimError> {
    assert_eq!(a.qubits, b.qubits, "circuits must share a qubit table");
    let comp = a.computation_qubits();
    let off = a.qubits.len();
    let mut input = Register::default();
    for (i, q) in comp.iter().enumerate() {
        input.add(q.0);
        input.add(off + i);
        input.h(off + i);
        input.cx(off + i, q.0);
    }
    let exhaustive = RunOptions {
        exhaustive_limit: usize::MAX,
        ..opts
    };
    let mut left = Vec::new();
    run_with(a, &input, exhaustive, &mut |x| left.push(x))?;
    let mut right = Vec::new();
    run_with(b, &input, exhaustive, &mut |x| right.push(x))?;
    let dev = match (mixed_state(&left), mixed_state(&right)) {
        (Some((la, ra)), Some((lb, rb))) if la == lb => ra
            .iter()
            .zip(&rb)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt(),
        _ => 1.0,
    };
    Ok(EquivalenceReport {
        equivalent: dev <= tol,
        max_dev: dev,
        mode: CheckMode::Process,
        exhaustive: true,
        branches: left.len() + right.len(),
        seed: opts.seed,
    })
}
