//! Full pipeline on the cascade circuit: with and without quasi-parallelism,
//! emitting and verifying the physical schedule.

use dqcc::cli::{compile_sources, CompilerConfig};

fn main() {
    let circuit = include_str!("data/predicate.qc");
    let network = include_str!("data/line4.net");
    for (enable_qp, coherence) in [(false, 0), (true, 0), (true, 3)] {
        let cfg = CompilerConfig {
            coherence,
            enable_qp,
            verify: true,
            ..CompilerConfig::default()
        };
        let out = compile_sources(circuit, network, &cfg).expect("compiles");
        let v = out.verification.as_ref().unwrap();
        println!(
            "qp={enable_qp} coherence={coherence}: e_depth={} flow={} verify={} ({:?}, dev {:.1e}) in {:?}",
            out.e_depth(),
            out.solution.total_flow,
            v.equivalent,
            v.mode,
            v.max_dev,
            out.elapsed
        );
        if enable_qp && coherence == 3 {
            print!("{}", out.schedule.render());
        }
    }
}
