//! Standalone validation of a solution against the flow constraints,
//! working on per-arc binary flows rebuilt from the routes.

use std::fmt;

use super::Solution;
use crate::circuit::Commodity;
use crate::network::QuotientGraph;
use crate::relations::RelationTable;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// `a`..`e`, or `route` for malformed routes.
    pub constraint: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {}", self.constraint, self.detail)
    }
}

/// Re-validates `sol`; an empty result means every constraint holds.
pub fn check_solution(
    q: &QuotientGraph,
    cs: &[Commodity],
    rel: &RelationTable,
    sol: &Solution,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut bad = |c: &'static str, detail: String| out.push(Violation { constraint: c, detail });
    let k = cs.len();
    let d = sol.horizon;
    let arcs = 2 * q.edges.len();
    let n = q.names.len();
    // f[arc][i][tau]; arc 2e goes a->b, 2e+1 goes b->a.
    let mut f = vec![vec![vec![0u32; d + 1]; k]; arcs];
    for r in &sol.routes {
        if r.commodity == 0 || r.commodity > k {
            bad("route", format!("unknown commodity {}", r.commodity));
            continue;
        }
        if r.tau == 0 || r.tau > d {
            bad("route", format!("commodity {} at step {} outside [1, {d}]", r.commodity, r.tau));
            continue;
        }
        let c = &cs[r.commodity - 1];
        let mut at = c.control_proc;
        for &e in &r.path {
            let Some(edge) = q.edges.get(e) else {
                bad("route", format!("commodity {}: no edge {e}", r.commodity));
                break;
            };
            if !edge.joins(at) {
                bad("route", format!("commodity {}: edge {e} does not continue the walk", r.commodity));
                break;
            }
            let next = edge.other(at);
            // Flow runs from the target side towards the control side.
            let arc = if next == edge.a { 2 * e } else { 2 * e + 1 };
            f[arc][r.commodity - 1][r.tau] += 1;
            at = next;
        }
    }
    let head = |arc: usize| {
        let e = &q.edges[arc / 2];
        if arc.is_multiple_of(2) { e.b } else { e.a }
    };
    let tail = |arc: usize| {
        let e = &q.edges[arc / 2];
        if arc.is_multiple_of(2) { e.a } else { e.b }
    };
    let net_in = |i: usize, tau: usize, v: usize| -> i64 {
        (0..arcs)
            .map(|a| {
                let x = f[a][i][tau] as i64;
                (if head(a).0 == v { x } else { 0 }) - (if tail(a).0 == v { x } else { 0 })
            })
            .sum()
    };
    let mut completion = vec![vec![0i64; d + 1]; k];
    for (i, c) in cs.iter().enumerate() {
        let (pc, pt) = (c.control_proc.0, c.target_proc.0);
        let mut total_c = 0;
        let mut total_t = 0;
        let mut active = 0;
        for tau in 1..=d {
            for v in 0..n {
                if v != pc && v != pt && net_in(i, tau, v) != 0 {
                    bad("a", format!("commodity {} step {tau}: imbalance at {}", c.index, q.names[v]));
                }
            }
            let x = net_in(i, tau, pc);
            completion[i][tau] = x;
            total_c += x;
            total_t += net_in(i, tau, pt);
            if (0..arcs).any(|a| f[a][i][tau] > 0) {
                active += 1;
            }
            // (e): the support must be one path from P^T to P^C.
            let used: usize = (0..arcs).filter(|&a| f[a][i][tau] > 0).count();
            if used > 0 {
                let mut at = pt;
                let mut walked = 0;
                let mut seen = vec![false; n];
                seen[at] = true;
                while at != pc {
                    let Some(a) = (0..arcs).find(|&a| f[a][i][tau] > 0 && tail(a).0 == at) else {
                        break;
                    };
                    at = head(a).0;
                    walked += 1;
                    if seen[at] {
                        break;
                    }
                    seen[at] = true;
                }
                if at != pc || walked != used || (0..arcs).any(|a| f[a][i][tau] > 1) {
                    bad("e", format!("commodity {} step {tau}: flow is not a simple path", c.index));
                }
            }
        }
        let is_local = pc == pt;
        if !is_local && (total_c != 1 || total_t != -1) {
            bad("b", format!("commodity {}: net demand {total_c}/{total_t}", c.index));
        }
        if active > 1 {
            bad("b", format!("commodity {}: flow spread over {active} steps", c.index));
        }
    }
    for tau in 1..=d {
        for (e, edge) in q.edges.iter().enumerate() {
            let load: u32 = (0..k).map(|i| f[2 * e][i][tau] + f[2 * e + 1][i][tau]).sum();
            if load > edge.capacity {
                bad("c", format!("step {tau}: edge {e} carries {load} > {}", edge.capacity));
            }
        }
    }
    for (ji, cj) in cs.iter().enumerate() {
        for (ii, ci) in cs.iter().enumerate() {
            if !rel.precedes(cj.index, ci.index) {
                continue;
            }
            let qp = rel.quasi_parallel(cj.index, ci.index);
            for tau in 1..=d {
                let before: i64 = if qp {
                    completion[ji][1..=tau].iter().sum()
                } else {
                    completion[ji][1..tau].iter().sum()
                };
                if completion[ii][tau] > before {
                    bad("d", format!("commodity {} completes at {tau} before {} allows", ci.index, cj.index));
                }
            }
        }
    }
    let flow: u32 = f.iter().flatten().flatten().sum();
    if flow != sol.total_flow {
        bad("route", format!("total_flow {} but arcs carry {flow}", sol.total_flow));
    }
    if sol.routes.len() != k {
        bad("b", format!("{} routes for {k} commodities", sol.routes.len()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::{quickest, Route};
    use super::*;

    #[test]
    fn solver_output_is_clean() {
        let cs = commodities(&[(0, 2, 0), (0, 2, 0), (2, 1, 1)]);
        let r = relations(&cs, |_, _| false);
        let s = quickest(&fig5(), &cs, &r).unwrap();
        assert_eq!(check_solution(&fig5(), &cs, &r, &s), vec![]);
    }

    #[test]
    fn detects_each_kind() {
        let cs = commodities(&[(0, 2, 0), (0, 2, 1)]);
        let r = relations(&cs, |_, _| false);
        let q = fig5();
        let s = Solution {
            horizon: 1,
            total_flow: 4,
            routes: vec![
                Route { commodity: 1, tau: 1, path: vec![0, 1] },
                Route { commodity: 2, tau: 1, path: vec![0, 1] },
            ],
        };
        let kinds: Vec<&str> = check_solution(&q, &cs, &r, &s).iter().map(|v| v.constraint).collect();
        assert!(kinds.contains(&"c"));
        assert!(kinds.contains(&"d"));
        let s = Solution {
            horizon: 1,
            total_flow: 1,
            routes: vec![
                Route { commodity: 1, tau: 1, path: vec![0] },
                Route { commodity: 2, tau: 1, path: vec![] },
            ],
        };
        let kinds: Vec<&str> = check_solution(&q, &cs, &r, &s).iter().map(|v| v.constraint).collect();
        assert!(kinds.contains(&"a"));
        assert!(kinds.contains(&"b"));
    }
}
