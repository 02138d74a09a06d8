//! Precedence and quasi-parallelism between commodities.

use std::collections::HashMap;

use crate::circuit::{Commodity, LogicalCircuit};
use crate::rewrite::{MergePlan, PairContext, Predicate, RuleStats};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairRelation {
    pub precedes: bool,
    pub quasi_parallel: bool,
    /// Smallest budget admitting the merge, when the predicate was run.
    pub cost: Option<u32>,
}

/// Relations for every pair `i < j` of commodity indices (1-based).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationTable {
    k: usize,
    pairs: Vec<PairRelation>,
    plans: HashMap<(usize, usize), MergePlan>,
    pub budget: u32,
    pub enable_qp: bool,
    pub predicate_calls: usize,
    pub rule_stats: RuleStats,
}

impl RelationTable {
    /// `k` commodities, no relations.
    pub fn new(k: usize) -> Self {
        RelationTable {
            k,
            pairs: vec![PairRelation::default(); k * k.saturating_sub(1) / 2],
            ..Default::default()
        }
    }

    /// Fills every pair `i < j` from `f(i, j) -> (precedes, quasi_parallel)`.
    pub fn from_fn(k: usize, mut f: impl FnMut(usize, usize) -> (bool, bool)) -> Self {
        let mut t = Self::new(k);
        for i in 1..=k {
            for j in i + 1..=k {
                let (p, qp) = f(i, j);
                t.set(i, j, p, qp);
            }
        }
        t
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn at(&self, i: usize, j: usize) -> usize {
        assert!(1 <= i && i < j && j <= self.k, "pair ({i}, {j}) out of range");
        let i0 = i - 1;
        i0 * self.k - i0 * (i0 + 1) / 2 + (j - i - 1)
    }

    pub fn set(&mut self, i: usize, j: usize, precedes: bool, quasi_parallel: bool) {
        let at = self.at(i, j);
        self.pairs[at].precedes = precedes;
        self.pairs[at].quasi_parallel = quasi_parallel;
    }

    pub fn pair(&self, i: usize, j: usize) -> PairRelation {
        self.pairs[self.at(i, j)]
    }

    /// `i ≺ j`.
    pub fn precedes(&self, i: usize, j: usize) -> bool {
        i < j && self.pair(i, j).precedes
    }

    /// `i ∥ j`, symmetric.
    pub fn quasi_parallel(&self, i: usize, j: usize) -> bool {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.pair(i, j).quasi_parallel,
            std::cmp::Ordering::Greater => self.pair(j, i).quasi_parallel,
            std::cmp::Ordering::Equal => true,
        }
    }

    pub fn plan(&self, i: usize, j: usize) -> Option<&MergePlan> {
        self.plans.get(&(i.min(j), i.max(j)))
    }

    pub fn dump_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 1..=self.k {
            for j in i + 1..=self.k {
                let p = self.pair(i, j);
                out.push(format!(
                    "{i} {j} prec={} qp={}",
                    p.precedes as u8, p.quasi_parallel as u8
                ));
            }
        }
        out
    }
}

/// Precedence from layer order; quasi-parallelism from the predicate
/// under `budget` when `enable_qp`, otherwise same layer only.
pub fn build_relations(
    commodities: &[Commodity],
    circuit: &LogicalCircuit,
    budget: u32,
    enable_qp: bool,
) -> RelationTable {
    let k = commodities.len();
    let mut t = RelationTable::new(k);
    t.budget = budget;
    t.enable_qp = enable_qp;
    let ctx = PairContext::new(circuit, commodities);
    let mut pred = Predicate::new(&ctx);
    for a in 0..k {
        for b in a + 1..k {
            let (ci, cj) = (&commodities[a], &commodities[b]);
            let precedes = ci.layer() < cj.layer();
            let at = t.at(ci.index, cj.index);
            t.pairs[at].precedes = precedes;
            if !precedes {
                t.pairs[at].quasi_parallel = true;
                t.pairs[at].cost = Some(0);
                continue;
            }
            if enable_qp {
                let v = pred.evaluate(ci.index, cj.index, budget);
                t.pairs[at].quasi_parallel = v.holds;
                t.pairs[at].cost = v.cost;
                if let Some(plan) = v.plan {
                    t.plans.insert((ci.index, cj.index), plan);
                }
            }
        }
    }
    t.predicate_calls = pred.calls;
    t.rule_stats = pred.stats;
    t
}
