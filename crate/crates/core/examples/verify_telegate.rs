//! Emits one telegate and a two-hop telegate and checks both against a
//! plain CX by simulation.

use dqcc::circuit::{parse_circuit, Qubit};
use dqcc::expand::{emit_telegate, remote_op};
use dqcc::rewrite::{BitAllocator, ExtendedCircuit};
use dqcc::simulate::{equivalent, RunOptions};

fn main() {
    let logical = parse_circuit("qubits u v\ncx u v\n").unwrap();
    for hops in [1usize, 2, 3] {
        let mut c = ExtendedCircuit::over(&logical);
        let pairs: Vec<(Qubit, Qubit)> = (1..=hops)
            .map(|h| (c.add_qubit(&format!("a{h}"), true), c.add_qubit(&format!("b{h}"), true)))
            .collect();
        let op = remote_op(1, Qubit(0), Qubit(1), &pairs, &mut BitAllocator::new(1));
        c.gates = emit_telegate(&op);
        if hops == 1 {
            print!("{}", c.to_text());
        }
        let r = equivalent(&c, &logical, 1e-9, RunOptions::default()).unwrap();
        println!(
            "{hops} hop(s): {} gates, equivalent={} max-dev={:.1e} over {} branches",
            c.gates.len(),
            r.equivalent,
            r.max_dev,
            r.branches
        );
    }
}
