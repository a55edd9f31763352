use std::path::{Path, PathBuf};

use qubo_ml::cli::{cmd_formulate, cmd_solve, cmd_verify, RunArgs, RunConfig};
use qubo_ml::solver::Backend;
use qubo_ml::Model;
use serde_json::Value;

fn manifest(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn validator(name: &str) -> jsonschema::Validator {
    let text = std::fs::read_to_string(manifest(&format!("schemas/{name}"))).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(v: &jsonschema::Validator, doc: &Value) {
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{errors:#?}\n{doc:#}");
}

fn config(model: Model, data: &str, precision: Option<&str>, solver: Backend) -> RunConfig {
    let args = RunArgs {
        model: Some(model),
        data: Some(manifest(&format!("data/{data}"))),
        precision: precision.map(str::to_owned),
        k: (model == Model::Kmeans).then_some(2),
        solver: Some(solver),
        restarts: Some(5),
        ..RunArgs::default()
    };
    RunConfig::resolve(&args, false).unwrap()
}

fn configs() -> Vec<RunConfig> {
    let mut out = Vec::new();
    for solver in [Backend::Exact, Backend::Anneal] {
        out.push(config(Model::Regression, "regression_toy.csv", Some("0.5,1"), solver));
        out.push(config(Model::Svm, "svm_toy.csv", Some("0.5,1"), solver));
        out.push(config(Model::Kmeans, "kmeans_toy.csv", None, solver));
    }
    out
}

#[test]
fn reports_match_schema() {
    let schema = validator("report.schema.json");
    for cfg in configs() {
        let solved = serde_json::to_value(cmd_solve(&cfg).unwrap()).unwrap();
        assert_valid(&schema, &solved);
        let verified = serde_json::to_value(cmd_verify(&cfg).unwrap()).unwrap();
        assert_valid(&schema, &verified);
    }
}

#[test]
fn qubo_and_legend_match_schema() {
    let qubo_schema = validator("qubo.schema.json");
    let legend_schema = validator("legend.schema.json");
    for cfg in configs() {
        let (qubo, legend) = cmd_formulate(&cfg).unwrap();
        let doc: Value = serde_json::from_str(&qubo.to_json().unwrap()).unwrap();
        assert_valid(&qubo_schema, &doc);
        assert_valid(&legend_schema, &serde_json::to_value(&legend).unwrap());

        let mut seen = vec![0usize; qubo.m()];
        for entry in &legend.variables {
            seen[entry.index] += 1;
        }
        assert!(seen.iter().all(|&c| c == 1), "every index appears exactly once");
        assert_eq!(legend.m, qubo.m());
    }
}

#[test]
fn schema_rejects_malformed_documents() {
    let schema = validator("qubo.schema.json");
    let bad = serde_json::json!({ "m": 1, "a": [[1.0]], "b": [0.0], "a_hex": [["1.0"]] });
    assert!(!schema.is_valid(&bad));
    let extra = serde_json::json!({ "m": 1, "a": [[1.0]], "b": [0.0], "c": 1 });
    assert!(!schema.is_valid(&extra));
}
