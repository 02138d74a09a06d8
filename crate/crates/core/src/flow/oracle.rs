//! Exhaustive reference solver for small instances: every completion-step
//! vector, every combination of simple paths.

use std::collections::HashMap;

use super::{FlowError, Route, Solution};
use crate::circuit::Commodity;
use crate::network::{ProcId, QuotientGraph};
use crate::relations::RelationTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_k: usize,
    pub max_d: usize,
    pub max_procs: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_k: 4,
            max_d: 4,
            max_procs: 4,
        }
    }
}

/// Simple paths by processor-level depth-first search, edge ids in
/// traversal order from `from`.
fn all_paths(q: &QuotientGraph, from: ProcId, to: ProcId) -> Vec<Vec<usize>> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); q.names.len()];
    for (ei, e) in q.edges.iter().enumerate() {
        adj[e.a.0].push((e.b.0, ei));
        adj[e.b.0].push((e.a.0, ei));
    }
    let mut out = Vec::new();
    let mut stack = vec![(from.0, vec![from.0], Vec::new())];
    while let Some((at, seen, path)) = stack.pop() {
        if at == to.0 {
            out.push(path);
            continue;
        }
        for &(v, ei) in &adj[at] {
            if !seen.contains(&v) {
                let mut s = seen.clone();
                s.push(v);
                let mut p = path.clone();
                p.push(ei);
                stack.push((v, s, p));
            }
        }
    }
    out
}

fn respects_precedence(taus: &[usize], cs: &[Commodity], rel: &RelationTable) -> bool {
    for (a, ca) in cs.iter().enumerate() {
        for (b, cb) in cs.iter().enumerate() {
            if rel.precedes(ca.index, cb.index) {
                let ok = if rel.quasi_parallel(ca.index, cb.index) {
                    taus[a] <= taus[b]
                } else {
                    taus[a] < taus[b]
                };
                if !ok {
                    return false;
                }
            }
        }
    }
    true
}

/// Cheapest routing of one step, trying the full product of path choices.
fn best_step(q: &QuotientGraph, options: &[&Vec<Vec<usize>>]) -> Option<(u32, Vec<usize>)> {
    let n = options.len();
    let mut pick = vec![0usize; n];
    let mut best: Option<(u32, Vec<usize>)> = None;
    if options.iter().any(|o| o.is_empty()) {
        return None;
    }
    loop {
        let mut load = vec![0u32; q.edges.len()];
        let mut cost = 0;
        for (i, &p) in pick.iter().enumerate() {
            for &e in &options[i][p] {
                load[e] += 1;
            }
            cost += options[i][p].len() as u32;
        }
        let fits = load.iter().zip(&q.edges).all(|(l, e)| *l <= e.capacity);
        if fits && best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, pick.clone()));
        }
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < options[i].len() {
                break;
            }
            pick[i] = 0;
        }
    }
}

/// Minimum-flow solution at exactly horizon `d`, `None` when infeasible.
pub fn oracle_at(
    q: &QuotientGraph,
    cs: &[Commodity],
    rel: &RelationTable,
    d: usize,
    limits: OracleLimits,
) -> Result<Option<Solution>, FlowError> {
    let k = cs.len();
    if k > limits.max_k || q.names.len() > limits.max_procs || d > limits.max_d {
        return Err(FlowError::InstanceTooLarge {
            k,
            procs: q.names.len(),
        });
    }
    if d == 0 {
        return Err(FlowError::ZeroHorizon);
    }
    let paths: Vec<Vec<Vec<usize>>> = cs
        .iter()
        .map(|c| all_paths(q, c.control_proc, c.target_proc))
        .collect();
    let mut memo: HashMap<Vec<usize>, Option<(u32, Vec<usize>)>> = HashMap::new();
    let mut taus = vec![1usize; k];
    let mut best: Option<(u32, Vec<usize>)> = None;
    loop {
        if respects_precedence(&taus, cs, rel) {
            let mut total = Some(0u32);
            for tau in 1..=d {
                let members: Vec<usize> = (0..k).filter(|&s| taus[s] == tau).collect();
                if members.is_empty() {
                    continue;
                }
                let r = memo
                    .entry(members.clone())
                    .or_insert_with(|| {
                        let opts: Vec<&Vec<Vec<usize>>> = members.iter().map(|&s| &paths[s]).collect();
                        best_step(q, &opts)
                    })
                    .clone();
                total = total.zip(r).map(|(t, (c, _))| t + c);
            }
            if let Some(t) = total {
                if best.as_ref().is_none_or(|(b, _)| t < *b) {
                    best = Some((t, taus.clone()));
                }
            }
        }
        let mut i = k;
        loop {
            if i == 0 {
                let Some((total, taus)) = best else {
                    return Ok(None);
                };
                let mut routes = Vec::new();
                for tau in 1..=d {
                    let members: Vec<usize> = (0..k).filter(|&s| taus[s] == tau).collect();
                    if members.is_empty() {
                        continue;
                    }
                    let (_, picks) = memo[&members].clone().expect("feasible step");
                    for (s, p) in members.into_iter().zip(picks) {
                        routes.push(Route {
                            commodity: cs[s].index,
                            tau,
                            path: paths[s][p].clone(),
                        });
                    }
                }
                routes.sort_by_key(|r| r.commodity);
                return Ok(Some(Solution {
                    horizon: d,
                    total_flow: total,
                    routes,
                }));
            }
            i -= 1;
            taus[i] += 1;
            if taus[i] <= d {
                break;
            }
            taus[i] = 1;
        }
    }
}

/// Smallest feasible horizon and its minimum total flow.
pub fn brute_force_oracle(
    q: &QuotientGraph,
    cs: &[Commodity],
    rel: &RelationTable,
    limits: OracleLimits,
) -> Result<Solution, FlowError> {
    if cs.is_empty() {
        return Ok(Solution::default());
    }
    for d in 1..=cs.len().min(limits.max_d) {
        if let Some(s) = oracle_at(q, cs, rel, d, limits)? {
            return Ok(s);
        }
    }
    if cs.len() > limits.max_d {
        Err(FlowError::InstanceTooLarge {
            k: cs.len(),
            procs: q.names.len(),
        })
    } else {
        Err(FlowError::NoSolution { k: cs.len() })
    }
}
