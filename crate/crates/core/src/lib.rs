//! Compiler for distributed quantum architectures.
//!
//! Remote CX gates (telegates) are scheduled onto entanglement links so that
//! the number of entanglement rounds, the E-depth, is minimal. Telegates in
//! logical conflict may share a round when a Pauli-frame rewrite makes their
//! processing contiguous within the coherence budget.
//!
//! Pipeline: [`circuit`] and [`network`] parse the inputs, [`relations`]
//! builds precedence and quasi-parallelism via [`rewrite`], [`flow`] finds
//! the quickest schedule, [`expand`] emits the physical circuit and
//! [`simulate`] checks it. [`cli`] wires the stages together.
//!
//! The `examples/` directory has one runnable program per stage:
//!
//! ```text
//! cargo run --example parse_and_layer
//! cargo run --example quotient_graph
//! cargo run --example rewrite_rules
//! cargo run --example quasi_parallel
//! cargo run --example quickest_flow
//! cargo run --example entanglement_path
//! cargo run --example verify_telegate
//! cargo run --example compile_pipeline
//! ```

pub mod circuit;
pub mod cli;
pub mod expand;
pub mod flow;
pub mod network;
pub mod relations;
pub mod rewrite;
pub mod simulate;
