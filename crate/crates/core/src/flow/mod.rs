//! Fixed-horizon integer multi-commodity flow and its quickest-flow driver.
//!
//! The search first fixes a completion step per commodity, then routes each
//! step's commodities along simple paths under the edge capacities.
//! Branch and bound on total flow, with shortest-path distances as the
//! admissible remainder.

mod check;
mod oracle;

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::circuit::Commodity;
use crate::network::{ProcId, QuotientGraph};
use crate::relations::RelationTable;

pub use check::{check_solution, Violation};
pub use oracle::{brute_force_oracle, oracle_at, OracleLimits};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error("no feasible schedule within horizon {horizon}")]
    Infeasible { horizon: usize },
    #[error("no feasible schedule even at horizon k = {k}")]
    NoSolution { k: usize },
    #[error("instance too large for the oracle: k = {k}, processors = {procs}")]
    InstanceTooLarge { k: usize, procs: usize },
    #[error("horizon must be at least 1")]
    ZeroHorizon,
}

/// Completion step and quotient path of one commodity. `path` lists edge
/// ids walking from the control processor to the target processor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub commodity: usize,
    pub tau: usize,
    pub path: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Solution {
    pub horizon: usize,
    pub total_flow: u32,
    pub routes: Vec<Route>,
}

impl Solution {
    pub fn route(&self, commodity: usize) -> Option<&Route> {
        self.routes.iter().find(|r| r.commodity == commodity)
    }

    /// Commodity indices completing at `tau`, ascending.
    pub fn at_step(&self, tau: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .routes
            .iter()
            .filter(|r| r.tau == tau)
            .map(|r| r.commodity)
            .collect();
        v.sort();
        v
    }

    /// One line per commodity then the summary line.
    pub fn dump(&self, q: &QuotientGraph, commodities: &[Commodity]) -> String {
        let mut s = String::new();
        for r in &self.routes {
            let c = &commodities[r.commodity - 1];
            let walk = q.walk(c.control_proc, &r.path);
            let hops: Vec<String> = walk
                .windows(2)
                .map(|w| format!("{}-{}", q.names[w[0].0], q.names[w[1].0]))
                .collect();
            let _ = writeln!(s, "{} tau={} path={}", r.commodity, r.tau, hops.join(","));
        }
        let _ = writeln!(s, "e_depth={} total_flow={}", e_depth(self), self.total_flow);
        s
    }
}

/// Largest completion step, 0 when there are no commodities.
pub fn e_depth(s: &Solution) -> usize {
    s.routes.iter().map(|r| r.tau).max().unwrap_or(0)
}

type StepKey = Vec<(ProcId, ProcId)>;

/// Exact solver with call and node counters.
#[derive(Debug)]
pub struct Solver<'a> {
    q: &'a QuotientGraph,
    commodities: &'a [Commodity],
    relations: &'a RelationTable,
    pub calls: usize,
    pub nodes: u64,
    dist: Vec<u32>,
    paths: HashMap<(ProcId, ProcId), Vec<Vec<usize>>>,
    step_memo: HashMap<StepKey, Option<(u32, Vec<Vec<usize>>)>>,
}

struct Search {
    d: usize,
    tau: Vec<usize>,
    steps: Vec<Vec<usize>>,
    step_cost: Vec<u32>,
    best: Option<(u32, Vec<usize>)>,
    floor: u32,
}

impl<'a> Solver<'a> {
    pub fn new(q: &'a QuotientGraph, commodities: &'a [Commodity], relations: &'a RelationTable) -> Self {
        assert_eq!(relations.k(), commodities.len(), "relation table size");
        let mut paths = HashMap::new();
        let mut dist = Vec::with_capacity(commodities.len());
        for c in commodities {
            let key = norm(c.control_proc, c.target_proc);
            let p = paths
                .entry(key)
                .or_insert_with(|| q.simple_paths(key.0, key.1));
            dist.push(p.first().map_or(u32::MAX, |p| p.len() as u32));
        }
        Solver {
            q,
            commodities,
            relations,
            calls: 0,
            nodes: 0,
            dist,
            paths,
            step_memo: HashMap::new(),
        }
    }

    /// Latest useful completion step for slot `s`: after dropping idle
    /// steps, every earlier step holds some commodity that is not a
    /// successor of `s`. Under layer precedence this is the last index of
    /// `s`'s layer.
    fn step_cap(&self, s: usize) -> usize {
        let i = self.commodities[s].index;
        let succ = self
            .commodities
            .iter()
            .filter(|c| self.relations.precedes(i, c.index))
            .count();
        self.commodities.len() - succ
    }

    /// Minimum total flow at horizon `d`.
    pub fn solve(&mut self, d: usize) -> Result<Solution, FlowError> {
        if d == 0 {
            return Err(FlowError::ZeroHorizon);
        }
        self.calls += 1;
        let k = self.commodities.len();
        if self.dist.contains(&u32::MAX) {
            return Err(FlowError::Infeasible { horizon: d });
        }
        let mut st = Search {
            d,
            tau: vec![0; k],
            steps: vec![Vec::new(); d + 1],
            step_cost: vec![0; d + 1],
            best: None,
            floor: self.dist.iter().sum(),
        };
        let rest: u32 = st.floor;
        self.dfs(0, rest, &mut st);
        let (total, taus) = st.best.ok_or(FlowError::Infeasible { horizon: d })?;
        let mut routes: Vec<Route> = Vec::with_capacity(k);
        for tau in 1..=d {
            let members: Vec<usize> = (0..k).filter(|&s| taus[s] == tau).collect();
            if members.is_empty() {
                continue;
            }
            let (_, assigned) = self.route_step(&members).expect("feasible step");
            for (s, path) in members.into_iter().zip(assigned) {
                routes.push(Route {
                    commodity: self.commodities[s].index,
                    tau,
                    path,
                });
            }
        }
        routes.sort_by_key(|r| r.commodity);
        let sol = Solution {
            horizon: d,
            total_flow: total,
            routes,
        };
        debug_assert!(sol.total_flow >= st.floor);
        Ok(sol)
    }

    fn dfs(&mut self, s: usize, rest: u32, st: &mut Search) {
        self.nodes += 1;
        let k = self.commodities.len();
        let committed: u32 = st.step_cost.iter().sum();
        if let Some((b, _)) = &st.best {
            if committed + rest >= *b || *b == st.floor {
                return;
            }
        }
        if s == k {
            st.best = Some((committed, st.tau.clone()));
            return;
        }
        let idx = self.commodities[s].index;
        let hi = self.step_cap(s).min(st.d);
        let mut lo = 1;
        for p in 0..s {
            let pi = self.commodities[p].index;
            if self.relations.precedes(pi, idx) {
                let need = if self.relations.quasi_parallel(pi, idx) {
                    st.tau[p]
                } else {
                    st.tau[p] + 1
                };
                lo = lo.max(need);
            }
        }
        for tau in lo..=hi {
            st.steps[tau].push(s);
            let members = st.steps[tau].clone();
            if let Some((cost, _)) = self.route_step(&members) {
                let old = std::mem::replace(&mut st.step_cost[tau], cost);
                st.tau[s] = tau;
                self.dfs(s + 1, rest - self.dist[s], st);
                st.tau[s] = 0;
                st.step_cost[tau] = old;
            }
            st.steps[tau].pop();
        }
    }

    /// Cheapest simultaneous routing of the given commodity slots; paths are
    /// returned in the order of `members`.
    fn route_step(&mut self, members: &[usize]) -> Option<(u32, Vec<Vec<usize>>)> {
        let mut order: Vec<usize> = (0..members.len()).collect();
        let pair = |s: usize| norm(self.commodities[s].control_proc, self.commodities[s].target_proc);
        order.sort_by_key(|&o| (pair(members[o]), members[o]));
        let key: StepKey = order.iter().map(|&o| pair(members[o])).collect();
        if !self.step_memo.contains_key(&key) {
            let v = self.route_key(&key);
            self.step_memo.insert(key.clone(), v);
        }
        let (cost, paths) = self.step_memo[&key].clone()?;
        let mut out = vec![Vec::new(); members.len()];
        for (o, p) in order.into_iter().zip(paths) {
            let c = &self.commodities[members[o]];
            out[o] = if c.control_proc <= c.target_proc {
                p
            } else {
                p.into_iter().rev().collect()
            };
        }
        Some((cost, out))
    }

    fn route_key(&self, key: &StepKey) -> Option<(u32, Vec<Vec<usize>>)> {
        let cands: Vec<&Vec<Vec<usize>>> = key.iter().map(|p| &self.paths[p]).collect();
        let lb: Vec<u32> = cands.iter().map(|c| c[0].len() as u32).collect();
        let mut suffix = vec![0u32; key.len() + 1];
        for i in (0..key.len()).rev() {
            suffix[i] = suffix[i + 1] + lb[i];
        }
        let mut load = vec![0u32; self.q.edges.len()];
        let mut pick = vec![0usize; key.len()];
        let mut best: Option<(u32, Vec<usize>)> = None;
        #[allow(clippy::too_many_arguments)]
        fn go(
            i: usize,
            cost: u32,
            q: &QuotientGraph,
            cands: &[&Vec<Vec<usize>>],
            suffix: &[u32],
            load: &mut [u32],
            pick: &mut [usize],
            best: &mut Option<(u32, Vec<usize>)>,
        ) {
            if let Some((b, _)) = best {
                if cost + suffix[i] >= *b {
                    return;
                }
            }
            if i == cands.len() {
                *best = Some((cost, pick.to_vec()));
                return;
            }
            for (pi, p) in cands[i].iter().enumerate() {
                if p.iter().any(|&e| load[e] >= q.edges[e].capacity) {
                    continue;
                }
                for &e in p {
                    load[e] += 1;
                }
                pick[i] = pi;
                go(i + 1, cost + p.len() as u32, q, cands, suffix, load, pick, best);
                for &e in p {
                    load[e] -= 1;
                }
            }
        }
        go(0, 0, self.q, &cands, &suffix, &mut load, &mut pick, &mut best);
        best.map(|(c, picks)| {
            (
                c,
                picks
                    .into_iter()
                    .zip(&cands)
                    .map(|(p, cs)| cs[p].clone())
                    .collect(),
            )
        })
    }

    /// Binary search over the horizon, `L = 1`, `R = k`.
    pub fn quickest(&mut self) -> Result<Solution, FlowError> {
        let k = self.commodities.len();
        if k == 0 {
            return Ok(Solution::default());
        }
        let (mut lo, mut hi) = (1usize, k);
        let mut found = None;
        while lo <= hi {
            let mid = (lo + hi) / 2;
            match self.solve(mid) {
                Ok(s) => {
                    found = Some(s);
                    hi = mid - 1;
                }
                Err(FlowError::Infeasible { .. }) => lo = mid + 1,
                Err(e) => return Err(e),
            }
        }
        found.ok_or(FlowError::NoSolution { k })
    }
}

fn norm(a: ProcId, b: ProcId) -> (ProcId, ProcId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn solve_fixed_horizon(
    q: &QuotientGraph,
    commodities: &[Commodity],
    relations: &RelationTable,
    d: usize,
) -> Result<Solution, FlowError> {
    Solver::new(q, commodities, relations).solve(d)
}

pub fn quickest(
    q: &QuotientGraph,
    commodities: &[Commodity],
    relations: &RelationTable,
) -> Result<Solution, FlowError> {
    Solver::new(q, commodities, relations).quickest()
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn two_procs_single_layer() {
        let cs = commodities(&[(0, 1, 0); 3]);
        let r = relations(&cs, |_, _| false);
        let s = solve_fixed_horizon(&two_procs(3), &cs, &r, 1).unwrap();
        assert_eq!(s.total_flow, 3);
        assert!(solve_fixed_horizon(&two_procs(1), &cs, &r, 2).is_err());
        assert_eq!(solve_fixed_horizon(&two_procs(1), &cs, &r, 3).unwrap().total_flow, 3);
    }

    #[test]
    fn serial_chain_needs_k() {
        let cs = commodities(&[(0, 1, 0), (1, 0, 1), (0, 1, 2), (1, 0, 3)]);
        let r = relations(&cs, |_, _| false);
        let q = two_procs(4);
        assert!(solve_fixed_horizon(&q, &cs, &r, 3).is_err());
        let mut sv = Solver::new(&q, &cs, &r);
        let s = sv.quickest().unwrap();
        assert_eq!(e_depth(&s), 4);
        assert!(sv.calls <= 3);
        let r = relations(&cs, |_, _| true);
        assert_eq!(e_depth(&quickest(&q, &cs, &r).unwrap()), 1);
    }

    #[test]
    fn fig5_bottleneck() {
        let cs = commodities(&[(0, 2, 0), (0, 2, 0)]);
        let r = relations(&cs, |_, _| false);
        let q = fig5();
        assert_eq!(
            solve_fixed_horizon(&q, &cs, &r, 1),
            Err(FlowError::Infeasible { horizon: 1 })
        );
        let s = solve_fixed_horizon(&q, &cs, &r, 2).unwrap();
        assert_eq!(s.total_flow, 4);
        assert_eq!(s.routes.iter().map(|r| r.tau).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(
            s.dump(&q, &cs),
            "1 tau=1 path=P1-P2,P2-P3\n2 tau=2 path=P1-P2,P2-P3\ne_depth=2 total_flow=4\n"
        );
    }

    #[test]
    fn pruning_by_layer_end_not_index() {
        // Commodities 1 and 2 share a layer and the P2-P3 bottleneck, 3 is
        // independent of 1 but strictly after 2. The optimum puts 1 at step
        // 2, beyond min{1, d}.
        let cs = commodities(&[(0, 2, 0), (0, 2, 0), (0, 1, 1)]);
        let r = RelationTable::from_fn(3, |i, j| match (i, j) {
            (1, 2) => (false, true),
            (1, 3) => (true, true),
            (2, 3) => (true, false),
            _ => unreachable!(),
        });
        let s = quickest(&fig5(), &cs, &r).unwrap();
        assert_eq!(e_depth(&s), 2);
        let taus: Vec<usize> = s.routes.iter().map(|r| r.tau).collect();
        assert_eq!(taus, vec![2, 1, 2]);
    }

    #[test]
    fn path_orientation_walks_from_control() {
        let cs = commodities(&[(2, 0, 0)]);
        let r = relations(&cs, |_, _| false);
        let q = fig5();
        let s = quickest(&q, &cs, &r).unwrap();
        assert_eq!(q.walk(ProcId(2), &s.routes[0].path), vec![ProcId(2), ProcId(1), ProcId(0)]);
    }

    #[test]
    fn empty_instance() {
        let s = quickest(&two_procs(1), &[], &RelationTable::new(0)).unwrap();
        assert_eq!(e_depth(&s), 0);
        assert_eq!(s.total_flow, 0);
    }
}
