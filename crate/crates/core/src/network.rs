//! Distributed architectures: processors, computation and communication
//! qubits, local couplings and entanglement links; the quotient graph and
//! its time expansion.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::circuit::Commodity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProcId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Computation,
    Communication,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
    pub proc: ProcId,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("line {line}: unknown node `{name}`")]
    UnknownNode { line: usize, name: String },
    /// Entanglement links may only join communication qubits.
    #[error("entanglement link touches computation qubit `{0}`")]
    LinkOnComputationQubit(String),
    #[error("entanglement link `{0}`-`{1}` stays inside one processor")]
    LinkWithinProcessor(String, String),
    #[error("local coupling `{0}`-`{1}` crosses processors")]
    LocalAcrossProcessors(String, String),
    #[error("processor `{0}` has no qubits")]
    EmptyProcessor(String),
    #[error("architecture is disconnected (`{0}` unreachable)")]
    Disconnected(String),
    #[error("time horizon must be at least 1")]
    ZeroHorizon,
}

pub type NetworkResult<T> = Result<T, NetworkError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkGraph {
    pub processors: Vec<String>,
    pub nodes: Vec<Node>,
    pub local: Vec<(NodeId, NodeId)>,
    /// Entanglement links in declaration order.
    pub links: Vec<(NodeId, NodeId)>,
    index: HashMap<String, NodeId>,
}

impl NetworkGraph {
    pub fn node(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, n: NodeId) -> &str {
        &self.nodes[n.0].name
    }

    pub fn proc_of(&self, n: NodeId) -> ProcId {
        self.nodes[n.0].proc
    }

    pub fn proc_name(&self, p: ProcId) -> &str {
        &self.processors[p.0]
    }

    pub fn is_comm(&self, n: NodeId) -> bool {
        self.nodes[n.0].kind == NodeKind::Communication
    }

    /// Processor of every computation qubit, keyed by name.
    pub fn placement(&self) -> HashMap<String, ProcId> {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Computation)
            .map(|n| (n.name.clone(), n.proc))
            .collect()
    }

    pub fn locally_coupled(&self, a: NodeId, b: NodeId) -> bool {
        self.local
            .iter()
            .any(|&(x, y)| (x, y) == (a, b) || (y, x) == (a, b))
    }

    /// Shortest local route from `from` to `to` whose interior avoids
    /// communication qubits and every node in `avoid`.
    pub fn local_route(&self, from: NodeId, to: NodeId, avoid: &[NodeId]) -> Option<Vec<NodeId>> {
        let mut prev: Vec<Option<NodeId>> = vec![None; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([from]);
        seen[from.0] = true;
        while let Some(u) = queue.pop_front() {
            if u == to {
                let mut path = vec![to];
                let mut cur = to;
                while let Some(p) = prev[cur.0] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            if u != from && (self.is_comm(u) || avoid.contains(&u)) {
                continue;
            }
            let mut next: Vec<NodeId> = self
                .local
                .iter()
                .filter_map(|&(x, y)| {
                    if x == u {
                        Some(y)
                    } else if y == u {
                        Some(x)
                    } else {
                        None
                    }
                })
                .collect();
            next.sort();
            for v in next {
                if !seen[v.0] {
                    seen[v.0] = true;
                    prev[v.0] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Compresses the links between each processor pair into one edge.
    pub fn quotient(&self) -> QuotientGraph {
        let mut classes: BTreeMap<(ProcId, ProcId), Vec<usize>> = BTreeMap::new();
        for (li, &(a, b)) in self.links.iter().enumerate() {
            let (pa, pb) = (self.proc_of(a), self.proc_of(b));
            let key = if pa < pb { (pa, pb) } else { (pb, pa) };
            classes.entry(key).or_default().push(li);
        }
        QuotientGraph {
            names: self.processors.clone(),
            edges: classes
                .into_iter()
                .map(|((a, b), links)| QuotientEdge {
                    a,
                    b,
                    capacity: links.len() as u32,
                    links,
                })
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (pi, p) in self.processors.iter().enumerate() {
            let of = |kind| {
                self.nodes
                    .iter()
                    .filter(|n| n.proc == ProcId(pi) && n.kind == kind)
                    .map(|n| n.name.as_str())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            s.push_str(&format!(
                "processor {p} {{ comp {}  comm {} }}\n",
                of(NodeKind::Computation),
                of(NodeKind::Communication)
            ));
        }
        for &(a, b) in &self.local {
            s.push_str(&format!("local {} {}\n", self.name(a), self.name(b)));
        }
        for &(a, b) in &self.links {
            s.push_str(&format!("elink {} {}\n", self.name(a), self.name(b)));
        }
        s
    }
}

struct Tokens {
    toks: Vec<(usize, String)>,
    pos: usize,
}

impl Tokens {
    fn new(text: &str) -> Self {
        let mut toks = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let body = raw.split('#').next().unwrap_or("");
            let spaced = body.replace('{', " { ").replace('}', " } ");
            for w in spaced.split_whitespace() {
                toks.push((n + 1, w.to_string()));
            }
        }
        Tokens { toks, pos: 0 }
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(0, |t| t.0)
    }

    fn next(&mut self) -> Option<(usize, String)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn word(&mut self, what: &str) -> NetworkResult<(usize, String)> {
        match self.next() {
            Some((l, w)) if w != "{" && w != "}" => Ok((l, w)),
            _ => Err(NetworkError::Syntax {
                line: self.line(),
                msg: format!("expected {what}"),
            }),
        }
    }
}

/// Parses the network format and validates every structural invariant.
pub fn parse_network(text: &str) -> NetworkResult<NetworkGraph> {
    let mut net = NetworkGraph {
        processors: Vec::new(),
        nodes: Vec::new(),
        local: Vec::new(),
        links: Vec::new(),
        index: HashMap::new(),
    };
    let mut pending_local = Vec::new();
    let mut pending_links = Vec::new();
    let mut toks = Tokens::new(text);
    let mut proc_names: HashMap<String, ProcId> = HashMap::new();
    while let Some((line, kw)) = toks.next() {
        match kw.as_str() {
            "processor" => {
                let (_, name) = toks.word("processor name")?;
                if proc_names.contains_key(&name) || net.index.contains_key(&name) {
                    return Err(NetworkError::DuplicateName(name));
                }
                let p = ProcId(net.processors.len());
                proc_names.insert(name.clone(), p);
                net.processors.push(name.clone());
                if toks.next().map(|t| t.1).as_deref() != Some("{") {
                    return Err(NetworkError::Syntax {
                        line,
                        msg: "expected `{` after processor name".into(),
                    });
                }
                let mut kind = None;
                let mut count = 0;
                loop {
                    let (l, w) = toks.next().ok_or(NetworkError::Syntax {
                        line,
                        msg: "unterminated processor block".into(),
                    })?;
                    match w.as_str() {
                        "}" => break,
                        "comp" => kind = Some(NodeKind::Computation),
                        "comm" => kind = Some(NodeKind::Communication),
                        "{" => {
                            return Err(NetworkError::Syntax {
                                line: l,
                                msg: "nested `{`".into(),
                            })
                        }
                        _ => {
                            let kind = kind.ok_or(NetworkError::Syntax {
                                line: l,
                                msg: format!("`{w}` listed before `comp`/`comm`"),
                            })?;
                            if net.index.contains_key(&w) || proc_names.contains_key(&w) {
                                return Err(NetworkError::DuplicateName(w));
                            }
                            net.index.insert(w.clone(), NodeId(net.nodes.len()));
                            net.nodes.push(Node {
                                name: w,
                                kind,
                                proc: p,
                            });
                            count += 1;
                        }
                    }
                }
                if count == 0 {
                    return Err(NetworkError::EmptyProcessor(name));
                }
            }
            "local" | "elink" => {
                let a = toks.word("node name")?;
                let b = toks.word("node name")?;
                if kw == "local" {
                    pending_local.push((line, a.1, b.1));
                } else {
                    pending_links.push((line, a.1, b.1));
                }
            }
            other => {
                return Err(NetworkError::Syntax {
                    line,
                    msg: format!("unexpected `{other}`"),
                })
            }
        }
    }
    let resolve = |net: &NetworkGraph, line: usize, name: &str| {
        net.node(name).ok_or_else(|| NetworkError::UnknownNode {
            line,
            name: name.to_string(),
        })
    };
    for (line, a, b) in pending_local {
        let (x, y) = (resolve(&net, line, &a)?, resolve(&net, line, &b)?);
        if x == y {
            return Err(NetworkError::Syntax {
                line,
                msg: "self coupling".into(),
            });
        }
        if net.proc_of(x) != net.proc_of(y) {
            return Err(NetworkError::LocalAcrossProcessors(a, b));
        }
        net.local.push((x, y));
    }
    for (line, a, b) in pending_links {
        let (x, y) = (resolve(&net, line, &a)?, resolve(&net, line, &b)?);
        for (n, name) in [(x, &a), (y, &b)] {
            if !net.is_comm(n) {
                return Err(NetworkError::LinkOnComputationQubit(name.clone()));
            }
        }
        if net.proc_of(x) == net.proc_of(y) {
            return Err(NetworkError::LinkWithinProcessor(a, b));
        }
        net.links.push((x, y));
    }
    check_connected(&net)?;
    Ok(net)
}

fn check_connected(net: &NetworkGraph) -> NetworkResult<()> {
    if net.nodes.is_empty() {
        return Ok(());
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); net.nodes.len()];
    for &(a, b) in net.local.iter().chain(&net.links) {
        adj[a.0].push(b.0);
        adj[b.0].push(a.0);
    }
    let mut seen = vec![false; net.nodes.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !std::mem::replace(&mut seen[v], true) {
                stack.push(v);
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(i) => Err(NetworkError::Disconnected(net.nodes[i].name.clone())),
        None => Ok(()),
    }
}

impl FromStr for NetworkGraph {
    type Err = NetworkError;

    fn from_str(s: &str) -> NetworkResult<Self> {
        parse_network(s)
    }
}

/// An undirected quotient edge; `a < b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientEdge {
    pub a: ProcId,
    pub b: ProcId,
    pub capacity: u32,
    /// Indices into [`NetworkGraph::links`].
    pub links: Vec<usize>,
}

impl QuotientEdge {
    pub fn other(&self, p: ProcId) -> ProcId {
        if p == self.a {
            self.b
        } else {
            self.a
        }
    }

    pub fn joins(&self, p: ProcId) -> bool {
        self.a == p || self.b == p
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientGraph {
    pub names: Vec<String>,
    pub edges: Vec<QuotientEdge>,
}

impl QuotientGraph {
    /// Builds a quotient graph directly from capacities; links are left empty.
    pub fn from_capacities(names: Vec<String>, caps: &[(usize, usize, u32)]) -> Self {
        let mut edges: Vec<QuotientEdge> = caps
            .iter()
            .filter(|c| c.2 > 0)
            .map(|&(a, b, c)| QuotientEdge {
                a: ProcId(a.min(b)),
                b: ProcId(a.max(b)),
                capacity: c,
                links: Vec::new(),
            })
            .collect();
        edges.sort_by_key(|e| (e.a, e.b));
        QuotientGraph { names, edges }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn edge_between(&self, x: ProcId, y: ProcId) -> Option<usize> {
        self.edges
            .iter()
            .position(|e| (e.a, e.b) == (x, y) || (e.a, e.b) == (y, x))
    }

    pub fn total_capacity(&self) -> u32 {
        self.edges.iter().map(|e| e.capacity).sum()
    }

    /// Hop distances from `from` (u32::MAX when unreachable).
    pub fn distances(&self, from: ProcId) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.len()];
        dist[from.0] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            for e in self.edges.iter().filter(|e| e.joins(u)) {
                let v = e.other(u);
                if dist[v.0] == u32::MAX {
                    dist[v.0] = dist[u.0] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// All simple paths from `from` to `to` as edge-id sequences, shortest
    /// first, ties in lexicographic edge order.
    pub fn simple_paths(&self, from: ProcId, to: ProcId) -> Vec<Vec<usize>> {
        fn walk(
            q: &QuotientGraph,
            at: ProcId,
            to: ProcId,
            visited: &mut Vec<bool>,
            path: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if at == to {
                out.push(path.clone());
                return;
            }
            for (ei, e) in q.edges.iter().enumerate() {
                if !e.joins(at) {
                    continue;
                }
                let next = e.other(at);
                if visited[next.0] {
                    continue;
                }
                visited[next.0] = true;
                path.push(ei);
                walk(q, next, to, visited, path, out);
                path.pop();
                visited[next.0] = false;
            }
        }
        let mut out = Vec::new();
        if from == to {
            return vec![Vec::new()];
        }
        let mut visited = vec![false; self.len()];
        visited[from.0] = true;
        walk(self, from, to, &mut visited, &mut Vec::new(), &mut out);
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    /// Processor sequence visited by an edge path starting at `from`.
    pub fn walk(&self, from: ProcId, path: &[usize]) -> Vec<ProcId> {
        let mut seq = vec![from];
        let mut at = from;
        for &e in path {
            at = self.edges[e].other(at);
            seq.push(at);
        }
        seq
    }
}

impl fmt::Display for QuotientGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.edges {
            writeln!(
                f,
                "{}-{} c={}",
                self.names[e.a.0], self.names[e.b.0], e.capacity
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TeNode {
    /// Processor `proc` inside copy `tau` (1-based).
    Copy { tau: usize, proc: ProcId },
    Source(usize),
    Sink(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TeEdge {
    pub from: TeNode,
    pub to: TeNode,
    pub capacity: u32,
}

/// `d` copies of the quotient graph plus per-commodity source and sink
/// nodes; commodity `i` only connects to copies `1..=min(i, d)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeExpandedGraph {
    pub d: usize,
    pub copy_edges: Vec<TeEdge>,
    pub connectors: Vec<(usize, TeEdge)>,
}

impl TimeExpandedGraph {
    pub fn connectors_of(&self, commodity: usize) -> usize {
        self.connectors.iter().filter(|c| c.0 == commodity).count()
    }

    pub fn copies_reached(&self, commodity: usize) -> Vec<usize> {
        let mut taus: Vec<usize> = self
            .connectors
            .iter()
            .filter(|c| c.0 == commodity)
            .filter_map(|c| match c.1.to {
                TeNode::Copy { tau, .. } => Some(tau),
                _ => None,
            })
            .collect();
        taus.sort();
        taus
    }
}

pub fn time_expand(
    q: &QuotientGraph,
    commodities: &[Commodity],
    d: usize,
) -> NetworkResult<TimeExpandedGraph> {
    if d < 1 {
        return Err(NetworkError::ZeroHorizon);
    }
    let mut copy_edges = Vec::new();
    for tau in 1..=d {
        for e in &q.edges {
            copy_edges.push(TeEdge {
                from: TeNode::Copy { tau, proc: e.a },
                to: TeNode::Copy { tau, proc: e.b },
                capacity: e.capacity,
            });
        }
    }
    let mut connectors = Vec::new();
    for c in commodities {
        for tau in 1..=c.index.min(d) {
            connectors.push((
                c.index,
                TeEdge {
                    from: TeNode::Source(c.index),
                    to: TeNode::Copy {
                        tau,
                        proc: c.control_proc,
                    },
                    capacity: 1,
                },
            ));
            connectors.push((
                c.index,
                TeEdge {
                    from: TeNode::Copy {
                        tau,
                        proc: c.target_proc,
                    },
                    to: TeNode::Sink(c.index),
                    capacity: 1,
                },
            ));
        }
    }
    Ok(TimeExpandedGraph {
        d,
        copy_edges,
        connectors,
    })
}
