//! Runs the command-line pipeline from code: load a CSV, solve, verify.
//!
//! ```text
//! cargo run --example cli_pipeline
//! ```

use std::path::Path;

use qubo_ml::cli::{cmd_verify, RunArgs, RunConfig, RunReport};
use qubo_ml::Model;

pub fn run_example() -> RunReport {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/kmeans_toy.csv");
    let args = RunArgs {
        model: Some(Model::Kmeans),
        data: Some(data),
        k: Some(2),
        ..RunArgs::default()
    };
    let config = RunConfig::resolve(&args, true).unwrap();
    let report = cmd_verify(&config).unwrap();
    let v = report.verification.as_ref().unwrap();
    println!("M = {} ({} = {})", report.qubo.m, report.variable_count.formula, report.variable_count.expected);
    println!("gap to oracle {:?}, pass {:?}", v.gap, v.pass);
    report
}

#[allow(dead_code)]
fn main() {
    run_example();
}
