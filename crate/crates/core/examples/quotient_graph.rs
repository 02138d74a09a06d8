//! Builds the quotient graph of the three-processor toy architecture and its
//! time-expanded copy.

use dqcc::circuit::parse_circuit;
use dqcc::network::{parse_network, time_expand};

fn main() {
    let net = parse_network(include_str!("data/toy.net")).expect("network parses");
    let q = net.quotient();
    println!("{} processors, total capacity {}", q.len(), q.total_capacity());
    for e in &q.edges {
        println!("  {} -- {}  c={}", q.names[e.a.0], q.names[e.b.0], e.capacity);
    }
    for (p, name) in q.names.iter().enumerate() {
        println!("  hops from {name}: {:?}", q.distances(dqcc::network::ProcId(p)));
    }

    let c = parse_circuit(include_str!("data/toy.qc")).unwrap().layerize();
    let ks = c.extract_commodities(&net.placement()).unwrap();
    let d = 3;
    let te = time_expand(&q, &ks, d).unwrap();
    println!("horizon {d}: {} copy edges", te.copy_edges.len());
    for k in &ks {
        println!("  commodity {} has {} connectors", k.index, te.connectors_of(k.index));
    }
}
