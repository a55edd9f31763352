//! Splits six points into three equal clusters with the k-means QUBO and
//! checks the result against exhaustive enumeration.
//!
//! ```text
//! cargo run --release --example balanced_kmeans
//! ```

use nalgebra::DMatrix;
use qubo_ml::kmeans::{decode_kmeans, formulate_kmeans, KmeansDecoding, KmeansProblem};
use qubo_ml::oracles::oracle_balanced_partitions;
use qubo_ml::solve_exact;

pub fn run_example() -> (KmeansDecoding, f64) {
    let x = DMatrix::from_row_slice(6, 2, &[0.0, 0.0, 0.2, 0.1, 5.0, 5.0, 5.1, 4.8, -4.0, 6.0, -4.2, 6.1]);
    let problem = KmeansProblem::with_suggested_penalties(x, 3).unwrap();
    let qubo = formulate_kmeans(&problem).unwrap();
    let report = solve_exact(&qubo).unwrap();
    let decoded = decode_kmeans(&problem, &report.best).unwrap();
    let oracle = oracle_balanced_partitions(&problem).unwrap();

    println!("alpha = beta = {}", problem.alpha());
    println!("{} variables; {} optima (cluster relabelings)", qubo.m(), report.all_optima.as_ref().unwrap().len());
    println!("labels {:?}, column sums {:?}", decoded.labels, decoded.column_sums);
    println!("cost {} vs enumeration {:?}", decoded.cost, oracle.objective);
    println!(
        "energy + restored constant = {}",
        report.energy + problem.restored_constant()
    );
    let best = oracle.objective.unwrap();
    (decoded, best)
}

#[allow(dead_code)]
fn main() {
    run_example();
}
