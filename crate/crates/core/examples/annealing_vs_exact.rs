//! Runs simulated annealing and exhaustive search on the same QUBO.
//!
//! ```text
//! cargo run --release --example annealing_vs_exact
//! ```

use nalgebra::DMatrix;
use qubo_ml::kmeans::{formulate_kmeans, KmeansProblem};
use qubo_ml::{solve_anneal, solve_exact, AnnealConfig};

pub fn run_example() -> (f64, f64) {
    let x = DMatrix::from_row_slice(8, 1, &[0.0, 0.3, 0.5, 0.9, 4.0, 4.2, 4.7, 5.0]);
    let problem = KmeansProblem::with_suggested_penalties(x, 2).unwrap();
    let qubo = formulate_kmeans(&problem).unwrap();

    let exact = solve_exact(&qubo).unwrap();
    let config = AnnealConfig {
        restarts: 20,
        seed: 7,
        ..AnnealConfig::default()
    };
    let annealed = solve_anneal(&qubo, &config).unwrap();

    println!("exact:  energy {} after {} states in {:.3}s", exact.energy, exact.stats.evaluated, exact.wall_time_s);
    println!("anneal: energy {} after {} flips in {:.3}s", annealed.energy, annealed.stats.evaluated, annealed.wall_time_s);
    let hits = annealed
        .stats
        .restart_energies
        .as_ref()
        .unwrap()
        .iter()
        .filter(|&&e| (e - exact.energy).abs() <= 1e-9 * (1.0 + exact.energy.abs()))
        .count();
    println!("{hits} of {} restarts reached the ground state", config.restarts);
    (exact.energy, annealed.energy)
}

#[allow(dead_code)]
fn main() {
    run_example();
}
