//! Binary search for the smallest horizon, cross-checked against the
//! exhaustive oracle and the constraint checker.

use dqcc::circuit::parse_circuit;
use dqcc::flow::{brute_force_oracle, check_solution, OracleLimits, Solver};
use dqcc::network::parse_network;
use dqcc::relations::build_relations;

fn main() {
    let net = parse_network(include_str!("data/toy.net")).unwrap();
    let q = net.quotient();
    let c = parse_circuit(include_str!("data/toy.qc")).unwrap().layerize();
    let ks = c.extract_commodities(&net.placement()).unwrap();

    for qp in [false, true] {
        let rel = build_relations(&ks, &c, 0, qp);
        let mut s = Solver::new(&q, &ks, &rel);
        let sol = s.quickest().expect("connected network");
        println!("quasi-parallel={qp}: {} solver calls, {} nodes", s.calls, s.nodes);
        print!("{}", sol.dump(&q, &ks));
        println!("checker violations: {}", check_solution(&q, &ks, &rel, &sol).len());
        let o = brute_force_oracle(&q, &ks, &rel, OracleLimits::default()).unwrap();
        println!("oracle: d={} flow={}", o.horizon, o.total_flow);
    }
}
