//! Command-line front end: `formulate`, `solve` and `verify`.
//!
//! Settings come from an optional flat TOML file (`--config`) and from flags;
//! flags win. Relative `data` and `out` paths in the file are resolved
//! against the file's directory.

mod ingest;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::kmeans::{self, KmeansProblem};
use crate::oracles::{self, OracleParameters};
use crate::regression::{self, RegressionProblem};
use crate::solver::{solve_exact_with, Backend};
use crate::svm::{self, SvmProblem};
use crate::{
    solve_anneal, AnnealConfig, Error, ExactConfig, Model, PrecisionVector, QuboInstance, Result,
    SolverReport,
};

pub use ingest::{kmeans_data, read_table, regression_data, svm_data, Table};
pub use report::{
    Legend, LegendEntry, QuboStats, RunReport, Solution, VariableCountCheck, Verification,
    REPORT_VERSION,
};

#[derive(Debug, Parser)]
#[command(name = "qubo-ml", version, about = "Train regression, SVM and k-means models as QUBO problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Formulate,
    Solve,
    Verify,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the QUBO and its variable legend.
    Formulate(RunArgs),
    /// Formulate, minimize and decode.
    Solve(RunArgs),
    /// Solve, then compare against the classical oracle.
    Verify(RunArgs),
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Formulate(_) => CommandKind::Formulate,
            Command::Solve(_) => CommandKind::Solve,
            Command::Verify(_) => CommandKind::Verify,
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Formulate(a) | Command::Solve(a) | Command::Verify(a) => a,
        }
    }
}

#[derive(Clone, Debug, Default, Args)]
pub struct RunArgs {
    /// Flat TOML file with the same keys as the flags (`t_hi`, `t_lo`, ...).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Comma-separated signed powers of two, e.g. "-1,0.5,1".
    #[arg(long, allow_hyphen_values = true)]
    pub precision: Option<String>,
    /// Number of clusters.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_enum)]
    pub solver: Option<Backend>,
    #[arg(long)]
    pub sweeps: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub t_hi: Option<f64>,
    #[arg(long)]
    pub t_lo: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum PrecisionSetting {
    List(String),
    Entries(Vec<String>),
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<Model>,
    data: Option<PathBuf>,
    precision: Option<PrecisionSetting>,
    k: Option<usize>,
    alpha: Option<f64>,
    beta: Option<f64>,
    solver: Option<Backend>,
    sweeps: Option<usize>,
    restarts: Option<usize>,
    t_hi: Option<f64>,
    t_lo: Option<f64>,
    temperatures: Option<Vec<f64>>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

/// Fully resolved settings for one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: Model,
    pub data: PathBuf,
    pub precision: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub solver: Backend,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anneal: Option<AnnealConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub verify: bool,
}

fn relative_to(base: &Path, path: PathBuf) -> PathBuf {
    if path.is_relative() {
        base.join(path)
    } else {
        path
    }
}

impl RunConfig {
    /// Merges `args` over the config file it names, if any.
    pub fn resolve(args: &RunArgs, verify: bool) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                let mut file: FileConfig = toml::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                let base = path.parent().unwrap_or(Path::new(""));
                file.data = file.data.map(|p| relative_to(base, p));
                file.out = file.out.map(|p| relative_to(base, p));
                file
            }
            None => FileConfig::default(),
        };

        let model = args
            .model
            .or(file.model)
            .ok_or_else(|| Error::Config("--model is required".into()))?;
        let data = args
            .data
            .clone()
            .or(file.data)
            .ok_or_else(|| Error::Config("--data is required".into()))?;
        let precision = match (&args.precision, file.precision) {
            (Some(list), _) => split_list(list),
            (None, Some(PrecisionSetting::List(list))) => split_list(&list),
            (None, Some(PrecisionSetting::Entries(entries))) => entries,
            (None, None) => PrecisionVector::default().to_strings(),
        };
        let solver = args.solver.or(file.solver).unwrap_or(Backend::Exact);

        let anneal = (solver == Backend::Anneal).then(|| {
            let mut cfg = AnnealConfig::default();
            if let Some(v) = args.sweeps.or(file.sweeps) {
                cfg.sweeps = v;
            }
            if let Some(v) = args.restarts.or(file.restarts) {
                cfg.restarts = v;
            }
            cfg.t_hi = args.t_hi.or(file.t_hi);
            if let Some(v) = args.t_lo.or(file.t_lo) {
                cfg.t_lo = v;
            }
            if args.t_hi.is_none() && args.t_lo.is_none() && args.sweeps.is_none() {
                cfg.temperatures = file.temperatures.clone();
            }
            if let Some(v) = args.seed.or(file.seed) {
                cfg.seed = v;
            }
            cfg
        });

        let config = RunConfig {
            model,
            data,
            precision,
            k: args.k.or(file.k),
            alpha: args.alpha.or(file.alpha),
            beta: args.beta.or(file.beta),
            solver,
            anneal,
            out: args.out.clone().or(file.out),
            verify,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        match self.model {
            Model::Regression => {
                self.precision_vector()?;
            }
            Model::Svm => {
                if self.precision_vector()?.positive_count() == 0 {
                    return Err(Error::NoPositivePrecision);
                }
            }
            Model::Kmeans => {
                if self.k.is_none() {
                    return Err(Error::Config("--k is required for kmeans".into()));
                }
            }
        }
        Ok(())
    }

    pub fn precision_vector(&self) -> Result<PrecisionVector> {
        PrecisionVector::parse_entries(&self.precision)
    }
}

fn split_list(list: &str) -> Vec<String> {
    list.split(',').map(|s| s.trim().to_owned()).filter(|s| !s.is_empty()).collect()
}

/// A loaded problem ready to formulate.
pub enum Problem {
    Regression(RegressionProblem, PrecisionVector),
    Svm(SvmProblem, PrecisionVector),
    Kmeans(KmeansProblem),
}

fn data_error(path: &Path, err: Error) -> Error {
    Error::Ingestion {
        path: path.display().to_string(),
        row: 0,
        message: err.to_string(),
    }
}

/// Reads the data and builds the model's problem, collecting notices.
pub fn load_problem(config: &RunConfig, warnings: &mut Vec<String>) -> Result<Problem> {
    let path = &config.data;
    Ok(match config.model {
        Model::Regression => {
            let (x, y) = regression_data(path)?;
            let prob = RegressionProblem::new(x, y).map_err(|e| data_error(path, e))?;
            Problem::Regression(prob, config.precision_vector()?)
        }
        Model::Svm => {
            let (x, y, notice) = svm_data(path)?;
            warnings.extend(notice);
            let prob = SvmProblem::new(x, y).map_err(|e| data_error(path, e))?;
            Problem::Svm(prob, config.precision_vector()?)
        }
        Model::Kmeans => {
            let x = kmeans_data(path)?;
            let k = config.k.expect("validated");
            let n = x.nrows();
            if k < 2 || k > n {
                return Err(Error::Config(format!("--k must be between 2 and N = {n}, got {k}")));
            }
            let prob = KmeansProblem::new(x, k, 0.0, 0.0).map_err(|e| data_error(path, e))?;
            let (alpha, beta) = kmeans::suggest_penalties(&prob);
            KmeansProblem::new(
                prob.x().clone(),
                k,
                config.alpha.unwrap_or(alpha),
                config.beta.unwrap_or(beta),
            )
            .map(Problem::Kmeans)
            .map_err(|e| Error::Config(e.to_string()))?
        }
    })
}

impl Problem {
    pub fn formulate(&self) -> Result<QuboInstance> {
        match self {
            Problem::Regression(prob, p) => regression::formulate_regression(prob, p),
            Problem::Svm(prob, p) => svm::formulate_svm(prob, p),
            Problem::Kmeans(prob) => kmeans::formulate_kmeans(prob),
        }
    }

    pub fn variable_check(&self, actual: usize) -> VariableCountCheck {
        let (formula, expected) = match self {
            Problem::Regression(prob, p) => ("K(d+1)", regression::variable_count(prob.d(), p.len())),
            Problem::Svm(prob, p) => (
                "K(d+1)+N(K-K_plus+1)",
                svm::variable_count(prob.n(), prob.d(), p.len(), p.positive_count()),
            ),
            Problem::Kmeans(prob) => ("Nk", kmeans::variable_count(prob.n(), prob.k())),
        };
        VariableCountCheck {
            formula: formula.into(),
            expected,
            actual,
            matches: expected == actual,
        }
    }

    /// One label per variable, in index order.
    pub fn legend(&self) -> Legend {
        let mut labels = Vec::new();
        let precision_labels = |labels: &mut Vec<String>, name: &str, entries: &[f64]| {
            for p in entries {
                labels.push(format!("{name}@p={p}"));
            }
        };
        let model = match self {
            Problem::Regression(prob, p) => {
                for j in 0..=prob.d() {
                    precision_labels(&mut labels, &format!("w[{j}]"), p.entries());
                }
                Model::Regression
            }
            Problem::Svm(prob, p) => {
                for j in 0..prob.d() {
                    precision_labels(&mut labels, &format!("w[{j}]"), p.entries());
                }
                precision_labels(&mut labels, "b", p.entries());
                for i in 0..prob.n() {
                    precision_labels(&mut labels, &format!("lambda[{i}]"), p.positive());
                }
                Model::Svm
            }
            Problem::Kmeans(prob) => {
                for c in 0..prob.k() {
                    for i in 0..prob.n() {
                        labels.push(format!("x[{i}]->c[{c}]"));
                    }
                }
                Model::Kmeans
            }
        };
        Legend {
            model,
            m: labels.len(),
            variables: labels
                .into_iter()
                .enumerate()
                .map(|(index, label)| LegendEntry { index, label })
                .collect(),
        }
    }

    pub fn decode(&self, qubo: &QuboInstance, report: &SolverReport) -> Result<Solution> {
        let bits = &report.best;
        Ok(match self {
            Problem::Regression(prob, p) => {
                let sol = regression::decode_regression(prob, p, qubo, bits)?;
                Solution::Regression {
                    weights: sol.w.iter().copied().collect(),
                    sse: sol.sse,
                    qubo_energy: sol.qubo_energy,
                    energy_plus_y_norm: sol.qubo_energy + prob.y_norm_sq(),
                }
            }
            Problem::Svm(prob, p) => {
                let pm = svm::precision_matrix(prob, p)?;
                let sol = svm::decode_svm(prob, &pm, bits)?;
                let check = svm::validate_classifier(&sol, prob);
                Solution::Svm {
                    w: sol.w,
                    b: sol.b,
                    lambda: sol.lambda,
                    margins: sol.margins,
                    dual_objective: sol.dual_objective,
                    separates: check.separates,
                    margin_violations: check.violations,
                }
            }
            Problem::Kmeans(prob) => {
                let dec = kmeans::decode_kmeans(prob, bits)?;
                Solution::Kmeans {
                    labels: dec.labels,
                    row_sums: dec.row_sums,
                    column_sums: dec.column_sums,
                    row_violations: dec.row_violations,
                    column_deviations: dec.column_deviations,
                    feasible: dec.feasible,
                    cost: dec.cost,
                    alpha: prob.alpha(),
                    beta: prob.beta(),
                    restored_constant: prob.restored_constant(),
                }
            }
        })
    }

    fn verify(&self, solution: &Solution) -> Verification {
        match (self, solution) {
            (Problem::Regression(prob, p), Solution::Regression { sse, .. }) => {
                let oracle = oracles::oracle_regression(prob);
                let target = oracle.objective.expect("regression oracle always has an objective");
                let gap = sse - target;
                let mut v = Verification::verified(
                    "decoded sse within 1e-8 (relative) of the least-squares sse",
                    gap.abs() <= 1e-8 * (1.0 + target.abs()),
                    Some(*sse),
                    Some(target),
                    oracle,
                );
                if let OracleParameters::Weights { w } = &v.oracle.as_ref().expect("set").parameters {
                    let w = nalgebra::DVector::from_row_slice(w);
                    v.unrepresentable_components = Some(regression::unrepresentable_components(&w, p));
                }
                v
            }
            (Problem::Svm(prob, p), Solution::Svm { w, separates, .. }) => {
                match oracles::oracle_svm_margins(prob, p) {
                    Ok(oracle) => {
                        let norm: f64 = w.iter().map(|v| v * v).sum();
                        let target = oracle.objective;
                        let mut v = Verification::verified(
                            "decoded classifier separates the training data",
                            *separates,
                            Some(norm),
                            target,
                            oracle,
                        );
                        v.separates = Some(*separates);
                        v
                    }
                    Err(e) => Verification::unverified(e.to_string()),
                }
            }
            (Problem::Kmeans(prob), Solution::Kmeans { cost, feasible, .. }) => {
                match oracles::oracle_balanced_partitions(prob) {
                    Ok(oracle) => {
                        let target = oracle.objective.expect("partition oracle always has an objective");
                        Verification::verified(
                            "decoded assignment is feasible and its cost is within 1e-9 (relative) of the balanced-partition minimum",
                            *feasible && (cost - target).abs() <= 1e-9 * (1.0 + target.abs()),
                            Some(*cost),
                            Some(target),
                            oracle,
                        )
                    }
                    Err(e) => Verification::unverified(e.to_string()),
                }
            }
            _ => unreachable!("solution decoded from the same problem"),
        }
    }
}

/// The QUBO and its legend.
pub fn cmd_formulate(config: &RunConfig) -> Result<(QuboInstance, Legend)> {
    let mut warnings = Vec::new();
    let problem = load_problem(config, &mut warnings)?;
    let qubo = problem.formulate()?;
    check_count(&problem, &qubo)?;
    Ok((qubo, problem.legend()))
}

fn check_count(problem: &Problem, qubo: &QuboInstance) -> Result<VariableCountCheck> {
    let check = problem.variable_check(qubo.m());
    if !check.matches {
        let model = problem.legend().model.name();
        return Err(Error::VariableCount {
            model,
            expected: check.expected,
            actual: check.actual,
        });
    }
    Ok(check)
}

fn run_pipeline(config: &RunConfig, command: CommandKind) -> Result<RunReport> {
    let mut warnings = Vec::new();
    let problem = load_problem(config, &mut warnings)?;
    let start = Instant::now();
    let qubo = problem.formulate()?;
    let construction_wall_time_s = start.elapsed().as_secs_f64();
    let variable_count = check_count(&problem, &qubo)?;

    let solver = match config.solver {
        Backend::Exact => solve_exact_with(&qubo, &ExactConfig::default())?,
        Backend::Anneal => solve_anneal(&qubo, config.anneal.as_ref().expect("resolved with the backend"))?,
    };
    let solution = problem.decode(&qubo, &solver)?;
    let verification = config.verify.then(|| problem.verify(&solution));
    if let Problem::Regression(prob, p) = &problem {
        let w = regression::solve_regression_analytic(prob);
        let outside = regression::unrepresentable_components(&w, p);
        if !outside.is_empty() {
            warnings.push(format!(
                "least-squares weights {outside:?} lie outside the representable range [{}, {}]",
                p.min_representable(),
                p.max_representable()
            ));
        }
    }
    Ok(RunReport {
        version: REPORT_VERSION,
        command,
        config: config.clone(),
        qubo: QuboStats {
            m: qubo.m(),
            nonzeros: qubo.nonzeros(),
            construction_wall_time_s,
        },
        variable_count,
        solver,
        solution,
        verification,
        warnings,
    })
}

pub fn cmd_solve(config: &RunConfig) -> Result<RunReport> {
    run_pipeline(config, CommandKind::Solve)
}

pub fn cmd_verify(config: &RunConfig) -> Result<RunReport> {
    let mut config = config.clone();
    config.verify = true;
    run_pipeline(&config, CommandKind::Verify)
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INGESTION: i32 = 3;
pub const EXIT_SOLVER_REFUSED: i32 = 4;
pub const EXIT_VERIFY_FAILED: i32 = 5;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidPrecision { .. }
        | Error::NoPositivePrecision
        | Error::InvalidProblem(_) => EXIT_CONFIG,
        Error::Ingestion { .. } => EXIT_INGESTION,
        Error::TooManyVariables { .. } => EXIT_SOLVER_REFUSED,
        _ => EXIT_FAILURE,
    }
}

/// `q.json` -> `q.legend.json`.
pub fn legend_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "qubo".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.legend.json"))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    let kind = cli.command.kind();
    let config = RunConfig::resolve(cli.command.args(), kind == CommandKind::Verify)?;
    match kind {
        CommandKind::Formulate => {
            let out = config
                .out
                .as_deref()
                .ok_or_else(|| Error::Config("formulate needs --out".into()))?;
            let (qubo, legend) = cmd_formulate(&config)?;
            fs::write(out, qubo.to_json()? + "\n")?;
            fs::write(legend_path(out), serde_json::to_string_pretty(&legend)? + "\n")?;
            log::info!("wrote {} variables to {}", qubo.m(), out.display());
            Ok(EXIT_OK)
        }
        CommandKind::Solve | CommandKind::Verify => {
            let report = run_pipeline(&config, kind)?;
            write_output(config.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
            let failed = report
                .verification
                .as_ref()
                .is_some_and(|v| v.pass == Some(false));
            Ok(if failed { EXIT_VERIFY_FAILED } else { EXIT_OK })
        }
    }
}
