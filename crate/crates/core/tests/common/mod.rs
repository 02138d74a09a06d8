#![allow(dead_code)]

use std::collections::HashMap;

use dqcc::circuit::{Commodity, GateRef, LogicalCircuit, Qubit};
use dqcc::network::{ProcId, QuotientGraph};
use dqcc::relations::RelationTable;
use dqcc::rewrite::{parse_extended, ExtendedCircuit, ExtendedGate, Rule};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const TOL: f64 = 1e-9;

pub fn phys(src: &str) -> ExtendedCircuit {
    parse_extended(src).unwrap_or_else(|e| panic!("fixture does not parse: {e}\n{src}"))
}

pub fn logical(src: &str) -> LogicalCircuit {
    dqcc::circuit::parse_circuit(src).unwrap().layerize()
}

// ---------------------------------------------------------------- figures

pub const FIG4: &str = "\
qubits u v
comm w r
e w r
cx u w
cx r v
h r
m w -> b1
m r -> b2
zc u b2
xc v b1
";

pub const FIG5_SWAP: &str = "\
qubits
comm cu cv cw cr
e cu cv
e cw cr
cx cv cw
h cv
m cv -> b1
m cw -> b2
zc cu b1
xc cr b2
";

pub const FIG5_LINK: &str = "\
qubits
comm cu cv cw cr
e cu cr
";

const FIG6_BODY: &str = "\
qubits u1 u2
comm v1 v2 v3 v4
e v1 v2
e v3 v4
cx u1 v1
cx v2 v3
cx v4 u2
h v2
h v4
m v1 -> b1
m v2 -> b2
m v3 -> b3
m v4 -> b4
";

/// Corrections grouped by hop instead of by side.
pub fn fig6_misgrouped() -> String {
    format!("{FIG6_BODY}zc u1 b3^b4\nxc u2 b1^b2\n")
}

pub fn fig6() -> String {
    format!("{FIG6_BODY}zc u1 b2^b4\nxc u2 b1^b3\n")
}

pub const CONFLICT: &str = "qubits q1 q2 q3\ncx q1 q2\ncx q2 q3\n";

pub const FIG7_LEFT: &str = "\
qubits q1 q2 q3
comm w1 r1 w2 r2
e w1 r1
cx q1 w1
cx r1 q2
h r1
m w1 -> b1
m r1 -> b2
zc q1 b2
xc q2 b1
e w2 r2
cx q2 w2
cx r2 q3
h r2
m w2 -> b3
m r2 -> b4
zc q2 b4
xc q3 b3
";

pub const FIG7_RIGHT: &str = "\
qubits q1 q2 q3
comm w1 r1 w2 r2
e w1 r1
e w2 r2
cx q1 w1
cx r1 q2
cx r2 q3
cx q2 w2
h r1
h r2
m w1 -> b1
m r1 -> b2
m w2 -> b3
m r2 -> b4
zc q1 b2
zc q2 b4
xc q2 b1
xc q3 b1^b3
";

pub const PREDICATE: &str = "qubits q1 q2 q3 q4\ncx q1 q2\nh q2\ncx q2 q3\nh q3\ncx q4 q3\n";

const FIG13_BODY: &str = "\
qubits q1 q2 q3 q4
comm c1 c2 c3 c4 c5 c6
e c1 c2
e c3 c4
e c5 c6
cx q1 c1
cx c2 q2
cx c4 q3
h c5
cx q4 c6
h c2
h q2
cx q3 c5
h c4
cx q2 c3
h q3
m c1 -> b1
m c2 -> b2
m c3 -> b3
m c4 -> b4
m c5 -> b5
m c6 -> b6
zc q1 b2
zc q2 b1^b4
xc q3 b6
zc q3 b3
";

pub fn fig13_missing_bit() -> String {
    format!("{FIG13_BODY}zc q4 b5\n")
}

pub fn fig13() -> String {
    format!("{FIG13_BODY}zc q4 b3^b5\n")
}

pub const FIG10_NAIVE: &str = "\
qubits
comm w1 w2 w3 w4 w5 w6
e w1 w2
e w3 w4
cx w2 w3
h w2
m w2 -> b1
m w3 -> b2
zc w1 b1
xc w4 b2
e w5 w6
cx w4 w5
h w4
m w4 -> b3
m w5 -> b4
zc w1 b3
xc w6 b4
";

pub const FIG10_LINK: &str = "\
qubits
comm w1 w2 w3 w4 w5 w6
e w1 w6
";

const FIG11_PREFIX: &str = "\
qubits
comm w1 w2 w3 w4 w5 w6
e w1 w2
e w3 w4
e w5 w6
cx w2 w3
h w2
m w2 -> b1
m w3 -> b2
";

pub fn fig11_left() -> String {
    format!(
        "{FIG11_PREFIX}zc w1 b1\nxc w4 b2\ncx w4 w5\nh w4\nm w4 -> b3\nm w5 -> b4\nzc w1 b3\nxc w6 b4\n"
    )
}

pub fn fig11_right() -> String {
    format!("{FIG11_PREFIX}cx w4 w5\nh w4\nm w4 -> b3\nm w5 -> b4\nzc w1 b1^b3\nxc w6 b2^b4\n")
}

fn comm_line(m: usize) -> String {
    let names: Vec<String> = (1..=m).flat_map(|j| [format!("a{j}"), format!("b{j}")]).collect();
    format!("comm {}\n", names.join(" "))
}

fn xor(bits: impl Iterator<Item = usize>) -> String {
    let v: Vec<String> = bits.map(|b| format!("b{b}")).collect();
    v.join("^")
}

/// Swap stages for hops 1..m-1 with corrections still owed, then one more
/// swap applied naively.
pub fn fig12_left(m: usize) -> String {
    assert!(m >= 3);
    let mut s = format!("qubits\n{}", comm_line(m));
    for j in 1..=m {
        s += &format!("e a{j} b{j}\n");
    }
    for j in 1..m - 1 {
        s += &format!("cx b{j} a{}\nh b{j}\nm b{j} -> b{}\nm a{} -> b{}\n", j + 1, 2 * j - 1, j + 1, 2 * j);
    }
    let last = m - 1;
    s += &format!("zc a1 {}\n", xor((1..last).map(|j| 2 * j - 1)));
    s += &format!("xc b{last} {}\n", xor((1..last).map(|j| 2 * j)));
    s += &format!(
        "cx b{last} a{m}\nh b{last}\nm b{last} -> b{}\nm a{m} -> b{}\n",
        2 * last - 1,
        2 * last
    );
    s += &format!("zc a1 b{}\nxc b{m} b{}\n", 2 * last - 1, 2 * last);
    s
}

pub fn fig12_right(m: usize) -> String {
    let mut s = format!("qubits\n{}", comm_line(m));
    for j in 1..=m {
        s += &format!("e a{j} b{j}\n");
    }
    for j in 1..m {
        s += &format!("cx b{j} a{}\nh b{j}\nm b{j} -> b{}\nm a{} -> b{}\n", j + 1, 2 * j - 1, j + 1, 2 * j);
    }
    s += &format!("zc a1 {}\n", xor((1..m).map(|j| 2 * j - 1)));
    s += &format!("xc b{m} {}\n", xor((1..m).map(|j| 2 * j)));
    s
}

fn path_setup(m: usize) -> String {
    let mut s = format!("qubits u v\n{}", comm_line(m));
    for j in 1..=m {
        s += &format!("e a{j} b{j}\n");
    }
    for j in 1..m {
        s += &format!("cx b{j} a{}\nh b{j}\nm b{j} -> b{}\nm a{} -> b{}\n", j + 1, 2 * j - 1, j + 1, 2 * j);
    }
    s
}

/// Path corrections applied to the endpoints, then a telegate on them.
pub fn fig14_left(m: usize) -> String {
    let (w, r) = (2 * m + 1, 2 * m + 2);
    let mut s = path_setup(m);
    if m > 1 {
        s += &format!("zc a1 {}\nxc b{m} {}\n", xor((1..m).map(|j| 2 * j - 1)), xor((1..m).map(|j| 2 * j)));
    }
    s += &format!("cx u a1\ncx b{m} v\nh b{m}\nm a1 -> b{w}\nm b{m} -> b{r}\nzc u b{r}\nxc v b{w}\n");
    s
}

pub fn fig14_right(m: usize) -> String {
    let (w, r) = (2 * m + 1, 2 * m + 2);
    let mut s = path_setup(m);
    s += &format!("cx u a1\ncx b{m} v\nh b{m}\nm a1 -> b{w}\nm b{m} -> b{r}\n");
    s += &format!(
        "zc u {}\nxc v {}\n",
        xor((1..m).map(|j| 2 * j - 1).chain([r])),
        xor((1..m).map(|j| 2 * j).chain([w]))
    );
    s
}

// ------------------------------------------------------------------ rules

/// A rule instance: both sides as full physical circuits plus the length
/// of the common prefix.
pub struct RuleCase {
    pub rule: Rule,
    pub name: &'static str,
    pub lhs: String,
    pub rhs: String,
    pub prefix: usize,
}

/// A uniformly random bit `b1` and a second one `b3` for the controlled
/// Paulis.
const BITS: &str = "comm k1 k2 k3 k4\ne k1 k2\nm k1 -> b1\nm k2 -> b2\ne k3 k4\nh k3\nm k3 -> b3\nm k4 -> b4\n";

fn forward(rule: Rule, body_l: &str, body_r: &str) -> RuleCase {
    let head = format!("qubits q r\n{BITS}h q\nh r\ncx q r\n");
    RuleCase {
        rule,
        name: "forward",
        lhs: format!("{head}{body_l}"),
        rhs: format!("{head}{body_r}"),
        prefix: 10,
    }
}

fn backward(rule: Rule, body_l: &str, body_r: &str) -> RuleCase {
    RuleCase {
        rule,
        name: "backward",
        lhs: format!("qubits q c x\n{body_l}"),
        rhs: format!("qubits q c x\n{body_r}"),
        prefix: 1,
    }
}

pub fn rule_cases() -> Vec<RuleCase> {
    use Rule::*;
    let mf_head = format!("qubits q\n{BITS}comm c d\nh q\ne c d\ncx q c\n");
    vec![
        forward(CxXControl, "xc q b1\ncx q r\n", "cx q r\nxc q b1\nxc r b1\n"),
        forward(CxZTarget, "zc r b1\ncx q r\n", "cx q r\nzc q b1\nzc r b1\n"),
        forward(CxXTarget, "xc r b1\ncx q r\n", "cx q r\nxc r b1\n"),
        forward(CxZControl, "zc q b1\ncx q r\n", "cx q r\nzc q b1\n"),
        forward(TZ, "zc q b1\nt q\n", "t q\nzc q b1\n"),
        forward(HX, "xc q b1\nh q\n", "h q\nzc q b1\n"),
        forward(HZ, "zc q b1\nh q\n", "h q\nxc q b1\n"),
        backward(TControl, "h q\nt q\ncx q c\n", "h q\ncx q c\nt q\n"),
        backward(SharedTarget, "h x\ncx x q\ncx c q\nh c\n", "h x\ncx c q\nh c\ncx x q\n"),
        backward(SharedControl, "h q\ncx q x\ncx q c\n", "h q\ncx q c\ncx q x\n"),
        backward(HHReverse, "t q\nh q\nh c\ncx q c\n", "t q\ncx c q\nh c\nh q\n"),
        backward(HSandwich, "t q\nh q\ncx c q\nh c\n", "t q\nh c\ncx q c\nh q\n"),
        RuleCase {
            rule: MeasurementForward,
            name: "measurement",
            lhs: format!("{mf_head}xc c b3\nm c -> b5\nxc d b5\nzc q b5\n"),
            rhs: format!("{mf_head}m c -> b5\nxc d b3^b5\nzc q b3^b5\n"),
            prefix: 0,
        },
        RuleCase {
            rule: ZMeasureAbsorb,
            name: "absorb",
            lhs: format!("{mf_head}zc c b3\nm c -> b5\nxc d b5\nzc q b5\n"),
            rhs: format!("{mf_head}m c -> b5\nxc d b5\nzc q b5\n"),
            prefix: 0,
        },
    ]
}

// -------------------------------------------------------- random instances

pub fn commodity(index: usize, c: usize, t: usize, layer: usize) -> Commodity {
    Commodity {
        index,
        control_proc: ProcId(c),
        target_proc: ProcId(t),
        control: Qubit(2 * index),
        target: Qubit(2 * index + 1),
        at: GateRef { layer, slot: index },
    }
}

pub struct FlowInstance {
    pub q: QuotientGraph,
    pub commodities: Vec<Commodity>,
    pub relations: RelationTable,
}

/// Connected quotient graph on `n` processors: a random spanning tree plus
/// extra edges, capacities in 1..=2.
pub fn random_quotient(rng: &mut ChaCha8Rng, n: usize) -> QuotientGraph {
    let mut caps: HashMap<(usize, usize), u32> = HashMap::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        caps.insert((u, v), rng.gen_range(1..=2));
    }
    for a in 0..n {
        for b in a + 1..n {
            if !caps.contains_key(&(a, b)) && rng.gen_bool(0.3) {
                caps.insert((a, b), rng.gen_range(1..=2));
            }
        }
    }
    let mut list: Vec<(usize, usize, u32)> = caps.into_iter().map(|((a, b), c)| (a, b, c)).collect();
    list.sort();
    QuotientGraph::from_capacities((1..=n).map(|i| format!("P{i}")).collect(), &list)
}

/// Random commodities in non-decreasing layers, precedence from layers and
/// quasi-parallelism drawn per ordered pair.
pub fn random_flow_instance(rng: &mut ChaCha8Rng, max_k: usize, max_procs: usize) -> FlowInstance {
    let n = rng.gen_range(2..=max_procs);
    let q = random_quotient(rng, n);
    let k = rng.gen_range(1..=max_k);
    let mut layer = 0;
    let commodities: Vec<Commodity> = (1..=k)
        .map(|i| {
            if i > 1 && rng.gen_bool(0.6) {
                layer += 1;
            }
            let c = rng.gen_range(0..n);
            let mut t = rng.gen_range(0..n - 1);
            if t >= c {
                t += 1;
            }
            commodity(i, c, t, layer)
        })
        .collect();
    let p_qp = rng.gen_range(0.0..1.0);
    let relations = RelationTable::from_fn(k, |i, j| {
        let p = commodities[i - 1].layer() < commodities[j - 1].layer();
        (p, !p || rng.gen_bool(p_qp))
    });
    FlowInstance {
        q,
        commodities,
        relations,
    }
}

/// Line network source for `procs` processors with `qubits` computation
/// qubits spread round-robin and `links` parallel links per edge.
pub fn line_network(procs: usize, qubits: usize, links: usize) -> String {
    let mut s = String::new();
    let mut local = String::new();
    let mut comm_of: Vec<Vec<String>> = vec![Vec::new(); procs];
    for p in 0..procs {
        let comps: Vec<String> = (0..qubits).filter(|i| i % procs == p).map(|i| format!("q{}", i + 1)).collect();
        let sides = usize::from(p > 0) + usize::from(p + 1 < procs);
        let comms: Vec<String> = (0..sides * links).map(|i| format!("c{}_{}", p + 1, i + 1)).collect();
        s += &format!("processor P{} {{", p + 1);
        if !comps.is_empty() {
            s += &format!(" comp {}", comps.join(" "));
        }
        s += &format!(" comm {} }}\n", comms.join(" "));
        for w in comps.windows(2) {
            local += &format!("local {} {}\n", w[0], w[1]);
        }
        if let Some(first) = comps.first() {
            for c in &comms {
                local += &format!("local {first} {c}\n");
            }
        } else {
            for w in comms.windows(2) {
                local += &format!("local {} {}\n", w[0], w[1]);
            }
        }
        comm_of[p] = comms;
    }
    s += &local;
    for p in 0..procs.saturating_sub(1) {
        let right = &comm_of[p][comm_of[p].len() - links..];
        let left = &comm_of[p + 1][..links];
        for (a, b) in right.iter().zip(left) {
            s += &format!("elink {a} {b}\n");
        }
    }
    s
}

/// Random H/T/CX circuit over `n` qubits.
pub fn random_circuit(rng: &mut ChaCha8Rng, n: usize, gates: usize) -> String {
    let mut s = format!(
        "qubits {}\n",
        (1..=n).map(|i| format!("q{i}")).collect::<Vec<_>>().join(" ")
    );
    for _ in 0..gates {
        let a = rng.gen_range(1..=n);
        match rng.gen_range(0..5) {
            0 => s += &format!("h q{a}\n"),
            1 => s += &format!("t q{a}\n"),
            _ => {
                let mut b = rng.gen_range(1..n);
                if b >= a {
                    b += 1;
                }
                s += &format!("cx q{a} q{b}\n");
            }
        }
    }
    s
}

pub fn is_cx(g: &ExtendedGate) -> bool {
    matches!(g, ExtendedGate::Cx(..))
}
