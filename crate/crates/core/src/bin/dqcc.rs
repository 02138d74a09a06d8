use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dqcc::cli::{oracle, run_compile, verify_files, CompilerConfig};
use dqcc::flow::OracleLimits;

#[derive(Parser)]
#[command(name = "dqcc", version, about = "Telegate scheduler for distributed quantum circuits")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile a circuit for a network and report the schedule.
    Compile(Common),
    /// Re-check an emitted physical circuit against its logical circuit.
    Verify {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        physical: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Solve the instance by exhaustive enumeration.
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    network: PathBuf,
    /// Coherence budget in circuit layers.
    #[arg(long, default_value_t = 0)]
    coherence: u32,
    #[arg(long)]
    no_quasi_parallel: bool,
    #[arg(long)]
    emit_physical: bool,
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dump_relations: bool,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

impl From<Common> for CompilerConfig {
    fn from(c: Common) -> Self {
        CompilerConfig {
            circuit: c.circuit,
            network: c.network,
            coherence: c.coherence,
            enable_qp: !c.no_quasi_parallel,
            emit_physical: c.emit_physical,
            verify: c.verify,
            out: c.out,
            dump_relations: c.dump_relations,
            seed: c.seed,
        }
    }
}

fn fail(code: i32, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("dqcc: {msg}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Compile(c) => {
            let cfg = CompilerConfig::from(c);
            let (text, res) = run_compile(&cfg);
            print!("{text}");
            match res {
                Ok(done) => {
                    eprintln!("wall_time_ms={:.3}", done.elapsed.as_secs_f64() * 1e3);
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e.exit_code(), e),
            }
        }
        Cmd::Verify {
            circuit,
            physical,
            seed,
        } => match verify_files(&circuit, &physical, seed) {
            Ok((line, r)) => {
                println!("{line}");
                if r.equivalent {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(4)
                }
            }
            Err(e) => fail(e.exit_code(), e),
        },
        Cmd::Oracle(c) => match oracle(&c.into(), OracleLimits::default()) {
            Ok(dump) => {
                print!("{dump}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e.exit_code(), e),
        },
    }
}
