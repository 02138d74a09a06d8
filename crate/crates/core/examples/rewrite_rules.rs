//! Pushes Pauli corrections through gates with the rule catalogue and checks
//! one rewrite by simulation.

use dqcc::circuit::Qubit;
use dqcc::rewrite::{
    parse_extended, push_backward, push_forward, Bit, BitExpr, ExtendedGate, PauliTerm,
};
use dqcc::simulate::{equivalent_circuits, RunOptions};

fn main() {
    let (c, t) = (Qubit(0), Qubit(1));
    let b = BitExpr::bit(Bit::new(0, 1));
    for p in [PauliTerm::x(c, b.clone()), PauliTerm::z(t, b.clone())] {
        let r = push_forward(&p, &ExtendedGate::Cx(c, t)).unwrap();
        println!("{:?} on q{} through CX -> {:?} via {:?}", p.kind, p.qubit.0, r.terms.len(), r.rule);
    }
    match push_forward(&PauliTerm::x(c, b), &ExtendedGate::T(c)) {
        Ok(_) => println!("X through T moved"),
        Err(e) => println!("blocked: {e}"),
    }
    let back = push_backward(&ExtendedGate::T(c), &[ExtendedGate::Cx(c, t)]).unwrap();
    println!("pre-processing hoisted over T via {:?}", back.rule);

    let prefix = "qubits q r\ncomm k1 k2\ne k1 k2\nm k1 -> b1\nm k2 -> b2\nh q\n";
    let lhs = parse_extended(&format!("{prefix}xc q b1\ncx q r\n")).unwrap();
    let rhs = parse_extended(&format!("{prefix}cx q r\nxc q b1\nxc r b1\n")).unwrap();
    let rep = equivalent_circuits(&lhs, &rhs, 1e-9, RunOptions::default()).unwrap();
    println!("X on control through CX: equivalent={} dev={:.1e}", rep.equivalent, rep.max_dev);
}
