//! Evaluates the merge predicate on a conflict pair and a cascade, then shows
//! how the coherence budget changes the relation table.

use dqcc::circuit::parse_circuit;
use dqcc::network::parse_network;
use dqcc::relations::build_relations;
use dqcc::rewrite::{PairContext, Predicate};

fn main() {
    let net = parse_network(include_str!("data/line3.net")).unwrap();
    let c = parse_circuit(include_str!("data/cascade.qc")).unwrap().layerize();
    let ks = c.extract_commodities(&net.placement()).unwrap();

    let ctx = PairContext::new(&c, &ks);
    let mut p = Predicate::new(&ctx);
    for (i, j) in [(1, 2), (2, 3), (1, 3)] {
        let v = p.evaluate(i, j, 1);
        println!("A({i},{j},1) = {} cost={:?} case={:?}", v.holds, v.cost, v.case);
    }
    println!("predicate calls: {}", p.calls);

    for budget in [0, 1, 2] {
        let t = build_relations(&ks, &c, budget, true);
        println!("budget {budget}:");
        for l in t.dump_lines() {
            println!("  {l}");
        }
    }
}
