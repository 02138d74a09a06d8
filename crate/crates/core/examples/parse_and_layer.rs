//! Parses a logical circuit, compresses it into ASAP layers and lists the
//! remote CX gates for a placement.

use dqcc::circuit::parse_circuit;
use dqcc::network::parse_network;

fn main() {
    let raw = parse_circuit(include_str!("data/fig3.qc")).expect("circuit parses");
    let c = raw.layerize();
    println!("{} gates, {} raw layers, {} ASAP layers", c.gate_count(), raw.depth(), c.depth());
    for (n, layer) in c.layers.iter().enumerate() {
        let gates: Vec<String> = layer.gates.iter().map(|&g| c.gate_line(g)).collect();
        println!("  L{}: {}", n + 1, gates.join("; "));
    }

    let net = parse_network(include_str!("data/line4.net")).expect("network parses");
    let remote = c.extract_commodities(&net.placement()).expect("every qubit placed");
    for k in &remote {
        println!(
            "remote #{}: cx {} {} in L{} ({} -> {})",
            k.index,
            c.name(k.control),
            c.name(k.target),
            k.layer() + 1,
            net.proc_name(k.control_proc),
            net.proc_name(k.target_proc),
        );
    }
}
