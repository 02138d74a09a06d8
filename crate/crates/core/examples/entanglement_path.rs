//! Chains m links into one pair and shows the stage depth stays at five.

use dqcc::expand::{path_circuit, stage_depth};
use dqcc::rewrite::ExtendedGate;
use dqcc::simulate::run;
use dqcc::simulate::Register;

fn main() {
    for m in 1..=6 {
        let (c, f) = path_circuit(m);
        println!(
            "m={m}: {} gates, depth {}, Z^{} on {}, X^{} on {}",
            c.gates.len(),
            stage_depth(&c),
            f.z_near,
            c.name(f.near),
            f.x_far,
            c.name(f.far),
        );
    }

    let (c, f) = path_circuit(3);
    print!("{}", c.to_text());
    let branches = run(&c, &Register::default()).unwrap();
    let bell = {
        let mut r = Register::default();
        r.add(f.near.0);
        r.add(f.far.0);
        r.h(f.near.0);
        r.cx(f.near.0, f.far.0);
        r
    };
    let order = [f.near.0, f.far.0];
    let want = bell.amplitudes_in(&order).unwrap();
    let worst = branches
        .iter()
        .map(|b| {
            let got = b.reg.amplitudes_in(&order).unwrap();
            let ip: num_complex::Complex64 = want.iter().zip(&got).map(|(x, y)| x.conj() * y).sum();
            1.0 - ip.norm() / b.reg.norm_sqr().sqrt()
        })
        .fold(0.0f64, f64::max);
    let es = c.gates.iter().filter(|g| matches!(g, ExtendedGate::E(..))).count();
    println!("{} branches from {es} links, worst Bell deviation {worst:.1e}", branches.len());
}
