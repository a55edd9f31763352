//! Checks variable counts and measures how QUBO construction time grows.
//!
//! ```text
//! cargo run --release --example complexity_audit
//! ```

use qubo_ml::audit::{
    audit_construction_scaling, audit_variable_counts, default_count_sweep, default_scaling_sweeps,
    estimates_json, write_records_csv, ExponentEstimate,
};

pub fn run_example() -> Vec<ExponentEstimate> {
    let records = audit_variable_counts(&default_count_sweep()).expect("variable counts match");
    println!("{} instances, all variable counts match their formulas", records.len());
    let mut csv = Vec::new();
    write_records_csv(&records[..3], &mut csv).unwrap();
    print!("{}", String::from_utf8(csv).unwrap());

    let estimates: Vec<ExponentEstimate> = default_scaling_sweeps()
        .iter()
        .map(|sweep| audit_construction_scaling(sweep).expect("sweep is well formed"))
        .collect();
    for e in &estimates {
        println!(
            "{:<10} {:<9} fitted {:.2} (bound {:.1}) densify {:.2} {}",
            e.model.name(),
            format!("{:?}", e.axis),
            e.fitted_exponent,
            e.bound,
            e.densify_exponent,
            if e.within_bound { "ok" } else { "ABOVE BOUND" }
        );
    }
    estimates_json(&estimates).unwrap();
    estimates
}

#[allow(dead_code)]
fn main() {
    run_example();
}
