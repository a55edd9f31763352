//! Classical reference solutions computed without the QUBO matrices.

use std::time::Instant;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::kmeans::KmeansProblem;
use crate::regression::{solve_regression_analytic, RegressionProblem};
use crate::svm::SvmProblem;
use crate::{BitVector, Error, PrecisionVector, Result};

/// Largest `N` accepted by [`oracle_balanced_partitions`].
pub const PARTITION_ORACLE_MAX_POINTS: usize = 12;

/// Largest `(w, b)` grid accepted by [`oracle_svm_margins`].
pub const SVM_GRID_MAX_POINTS: usize = 1_000_000;

/// Margins at least `1 - MARGIN_SLACK` count as satisfied.
pub const MARGIN_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleParameters {
    Weights {
        w: Vec<f64>,
    },
    Partition {
        labels: Vec<usize>,
        /// Same partition scored with the `1 / (2 |cluster|)` weights.
        weighted_objective: f64,
    },
    Classifier {
        w: Vec<f64>,
        b: f64,
        grid_points: usize,
    },
    Infeasible {
        grid_points: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub method: String,
    /// `None` when no feasible point exists.
    pub objective: Option<f64>,
    pub parameters: OracleParameters,
    pub feasible: bool,
    pub wall_time_s: f64,
}

/// Sum of squared residuals `||X_aug w - Y||^2`, accumulated row by row.
pub fn regression_sse(prob: &RegressionProblem, w: &[f64]) -> f64 {
    let x = prob.x_raw();
    let d = prob.d();
    (0..prob.n())
        .map(|i| {
            let fit: f64 = (0..d).map(|j| x[(i, j)] * w[j]).sum::<f64>() + w[d];
            (fit - prob.y()[i]).powi(2)
        })
        .sum()
}

/// The analytic least-squares solution behind the common report format.
pub fn oracle_regression(prob: &RegressionProblem) -> OracleReport {
    let start = Instant::now();
    let w: Vec<f64> = solve_regression_analytic(prob).iter().copied().collect();
    let objective = regression_sse(prob, &w);
    OracleReport {
        method: "normal_equations".into(),
        objective: Some(objective),
        parameters: OracleParameters::Weights { w },
        feasible: true,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

fn squared_distance(x: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    x.row(i)
        .iter()
        .zip(x.row(j).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// `sum_c sum_{x, y in c} ||x - y||^2` over ordered pairs.
pub fn partition_cost(x: &DMatrix<f64>, labels: &[usize]) -> f64 {
    let mut cost = 0.0;
    for i in 0..labels.len() {
        for j in 0..labels.len() {
            if labels[i] == labels[j] {
                cost += squared_distance(x, i, j);
            }
        }
    }
    cost
}

/// `sum_c 1 / (2 |c|) sum_{x, y in c} ||x - y||^2`, the classical objective.
pub fn weighted_partition_cost(x: &DMatrix<f64>, labels: &[usize], k: usize) -> f64 {
    (0..k)
        .map(|c| {
            let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
            if members.is_empty() {
                return 0.0;
            }
            let mut s = 0.0;
            for &i in &members {
                for &j in &members {
                    s += squared_distance(x, i, j);
                }
            }
            s / (2.0 * members.len() as f64)
        })
        .sum()
}

struct PartitionSearch<'a> {
    dist: &'a DMatrix<f64>,
    n: usize,
    k: usize,
    lo: usize,
    hi: usize,
    labels: Vec<usize>,
    sizes: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
}

impl PartitionSearch<'_> {
    /// Labels are assigned in restricted-growth order, so each partition is
    /// visited once and the first minimum found is lexicographically smallest.
    fn visit(&mut self, point: usize, opened: usize, cost: f64) {
        if point == self.n {
            if opened == self.k
                && self.sizes.iter().all(|&s| s >= self.lo)
                && self.best.as_ref().is_none_or(|(b, _)| cost < *b)
            {
                self.best = Some((cost, self.labels.clone()));
            }
            return;
        }
        let remaining = self.n - point;
        let deficit: usize = self.sizes[..opened]
            .iter()
            .map(|&s| self.lo.saturating_sub(s))
            .sum::<usize>()
            + (self.k - opened) * self.lo;
        if deficit > remaining {
            return;
        }
        let limit = (opened + 1).min(self.k);
        for c in 0..limit {
            if self.sizes[c] == self.hi {
                continue;
            }
            let added: f64 = (0..point)
                .filter(|&j| self.labels[j] == c)
                .map(|j| 2.0 * self.dist[(point, j)])
                .sum();
            self.labels[point] = c;
            self.sizes[c] += 1;
            self.visit(point + 1, opened.max(c + 1), cost + added);
            self.sizes[c] -= 1;
        }
    }
}

/// Exhaustive minimum of the within-cluster cost over partitions whose
/// cluster sizes are `floor(N/k)` or `ceil(N/k)`.
pub fn oracle_balanced_partitions(prob: &KmeansProblem) -> Result<OracleReport> {
    let (n, k) = (prob.n(), prob.k());
    if n > PARTITION_ORACLE_MAX_POINTS {
        return Err(Error::OracleRefused(format!(
            "partition enumeration is limited to N <= {PARTITION_ORACLE_MAX_POINTS}, got N = {n}"
        )));
    }
    let start = Instant::now();
    let x = prob.x();
    let dist = DMatrix::from_fn(n, n, |i, j| squared_distance(x, i, j));
    let mut search = PartitionSearch {
        dist: &dist,
        n,
        k,
        lo: n / k,
        hi: n.div_ceil(k),
        labels: vec![0; n],
        sizes: vec![0; k],
        best: None,
    };
    search.visit(0, 0, 0.0);
    let (_, labels) = search
        .best
        .ok_or_else(|| Error::InvalidProblem("no balanced partition exists".into()))?;
    Ok(OracleReport {
        method: "balanced_partition_enumeration".into(),
        objective: Some(partition_cost(x, &labels)),
        parameters: OracleParameters::Partition {
            weighted_objective: weighted_partition_cost(x, &labels, k),
            labels,
        },
        feasible: true,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// `y_i (w^T x_i + b)` for every point.
pub fn svm_margins(prob: &SvmProblem, w: &[f64], b: f64) -> Vec<f64> {
    let x = prob.x();
    (0..prob.n())
        .map(|i| {
            let score: f64 = w.iter().enumerate().map(|(j, wj)| wj * x[(i, j)]).sum::<f64>() + b;
            prob.y()[i] * score
        })
        .collect()
}

/// Searches every representable `(w, b)` for the smallest `||w||^2` with all
/// margins at least 1. Ties go to the lexicographically smallest `(w, b)`.
pub fn oracle_svm_margins(prob: &SvmProblem, p: &PrecisionVector) -> Result<OracleReport> {
    let values = p.representable_values();
    let dims = prob.d() + 1;
    let grid_points = (0..dims).try_fold(1usize, |acc, _| {
        acc.checked_mul(values.len()).filter(|&g| g <= SVM_GRID_MAX_POINTS)
    });
    let Some(grid_points) = grid_points else {
        return Err(Error::OracleRefused(format!(
            "representable grid of {} values in {dims} dimensions exceeds {SVM_GRID_MAX_POINTS} points",
            values.len()
        )));
    };
    let start = Instant::now();
    let mut idx = vec![0usize; dims];
    let mut theta = vec![0.0; dims];
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..grid_points {
        for (t, &i) in theta.iter_mut().zip(&idx) {
            *t = values[i];
        }
        let (w, b) = theta.split_at(dims - 1);
        let norm: f64 = w.iter().map(|v| v * v).sum();
        if best.as_ref().is_none_or(|(bn, _)| norm < *bn)
            && svm_margins(prob, w, b[0]).iter().all(|&m| m >= 1.0 - MARGIN_SLACK)
        {
            best = Some((norm, theta.clone()));
        }
        // Odometer with the last coordinate varying fastest.
        for slot in idx.iter_mut().rev() {
            *slot += 1;
            if *slot < values.len() {
                break;
            }
            *slot = 0;
        }
    }
    let wall_time_s = start.elapsed().as_secs_f64();
    let method = "representable_grid_search".to_string();
    Ok(match best {
        Some((_, theta)) => {
            let (w, b) = theta.split_at(dims - 1);
            OracleReport {
                method,
                objective: Some(w.iter().map(|v| v * v).sum()),
                parameters: OracleParameters::Classifier {
                    w: w.to_vec(),
                    b: b[0],
                    grid_points,
                },
                feasible: true,
                wall_time_s,
            }
        }
        None => OracleReport {
            method,
            objective: None,
            parameters: OracleParameters::Infeasible { grid_points },
            feasible: false,
            wall_time_s,
        },
    })
}

/// The dual energy as an explicit sum over weight, bias and multiplier bits.
///
/// Bits are laid out as `w_hat_jk` at `j K + k`, `b_hat_k` at `d K + k`, and
/// `lambda_hat_il` at `(d + 1) K + i K_pos + l` over the positive entries.
#[allow(clippy::needless_range_loop)]
pub fn svm_expansion_energy(prob: &SvmProblem, p: &PrecisionVector, bits: &BitVector) -> Result<f64> {
    let (n, d) = (prob.n(), prob.d());
    let entries = p.entries();
    let positive = p.positive();
    let (kk, kp) = (entries.len(), positive.len());
    let expected = kk * (d + 1) + n * kp;
    if bits.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: bits.len(),
        });
    }
    let z = |i: usize| f64::from(bits.as_slice()[i]);
    let w_hat = |j: usize, k: usize| z(j * kk + k);
    let b_hat = |k: usize| z(d * kk + k);
    let l_hat = |i: usize, l: usize| z((d + 1) * kk + i * kp + l);
    let (x, y) = (prob.x(), prob.y());

    let mut energy = 0.0;
    for j in 0..d {
        for k in 0..kk {
            for l in 0..kk {
                energy -= entries[k] * entries[l] * w_hat(j, k) * w_hat(j, l);
            }
        }
    }
    for i in 0..n {
        for j in 0..d {
            for k in 0..kk {
                for l in 0..kp {
                    energy += x[(i, j)] * y[i] * entries[k] * positive[l] * w_hat(j, k) * l_hat(i, l);
                }
            }
        }
    }
    for i in 0..n {
        for k in 0..kk {
            for l in 0..kp {
                energy += y[i] * entries[k] * positive[l] * b_hat(k) * l_hat(i, l);
            }
        }
    }
    for i in 0..n {
        for l in 0..kp {
            energy -= positive[l] * l_hat(i, l);
        }
    }
    Ok(energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svm::formulate_svm;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn regression(x: &[f64], d: usize, y: &[f64]) -> RegressionProblem {
        RegressionProblem::new(DMatrix::from_row_slice(y.len(), d, x), DVector::from_row_slice(y)).unwrap()
    }

    fn kmeans(x: &[f64], d: usize, k: usize) -> KmeansProblem {
        KmeansProblem::new(DMatrix::from_row_slice(x.len() / d, d, x), k, 1.0, 1.0).unwrap()
    }

    fn svm_problem(rows: &[&[f64]], labels: &[f64]) -> Result<SvmProblem> {
        let d = rows.first().map_or(0, |r| r.len());
        let x = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
        SvmProblem::new(x, DVector::from_row_slice(labels))
    }

    fn objective(r: &OracleReport) -> f64 {
        r.objective.unwrap()
    }

    #[test]
    fn regression_pass_through() {
        let r = oracle_regression(&regression(&[0.0, 1.0, 2.0], 1, &[1.0, 3.0, 5.0]));
        let OracleParameters::Weights { w } = &r.parameters else { panic!() };
        assert!((w[0] - 2.0).abs() < 1e-10 && (w[1] - 1.0).abs() < 1e-10);
        assert!(objective(&r) < 1e-18);

        let r = oracle_regression(&regression(&[1.0, 1.0], 1, &[1.0, 3.0]));
        let OracleParameters::Weights { w } = &r.parameters else { panic!() };
        assert!((w[0] + w[1] - 2.0).abs() < 1e-10);
        assert!((objective(&r) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn regression_objective_self_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let x = DMatrix::from_fn(10, 2, |_, _| rng.random_range(-3.0..3.0));
            let y = DVector::from_fn(10, |_, _| rng.random_range(-3.0..3.0));
            let prob = RegressionProblem::new(x, y).unwrap();
            let r = oracle_regression(&prob);
            let OracleParameters::Weights { w } = &r.parameters else { panic!() };
            let w = DVector::from_row_slice(w);
            let direct = (prob.x_aug() * &w - prob.y()).norm_squared();
            assert!((objective(&r) - direct).abs() <= 1e-10 * (1.0 + direct));
        }
    }

    #[test]
    fn partitions_small_examples() {
        let r = oracle_balanced_partitions(&kmeans(&[0.0, 5.0], 1, 2)).unwrap();
        assert_eq!(objective(&r), 0.0);

        let r = oracle_balanced_partitions(&kmeans(&[0.0, 0.1, 10.0, 10.1], 1, 2)).unwrap();
        assert!((objective(&r) - 0.04).abs() < 1e-12);
        let OracleParameters::Partition { labels, weighted_objective } = &r.parameters else { panic!() };
        assert_eq!(labels, &vec![0, 0, 1, 1]);
        assert!((weighted_objective - 0.01).abs() < 1e-12);
    }

    #[test]
    fn partitions_match_labeled_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for (n, k) in [(6, 3), (7, 2), (6, 2)] {
            let x = DMatrix::from_fn(n, 2, |_, _| rng.random_range(-4.0..4.0));
            let prob = KmeansProblem::new(x.clone(), k, 1.0, 1.0).unwrap();
            let (lo, hi) = (n / k, n.div_ceil(k));
            let mut best = f64::INFINITY;
            for code in 0..k.pow(n as u32) {
                let labels: Vec<usize> = (0..n).map(|i| code / k.pow(i as u32) % k).collect();
                let balanced = (0..k).all(|c| {
                    let s = labels.iter().filter(|&&l| l == c).count();
                    s == lo || s == hi
                });
                if balanced {
                    best = best.min(partition_cost(&x, &labels));
                }
            }
            let r = oracle_balanced_partitions(&prob).unwrap();
            assert!((objective(&r) - best).abs() <= 1e-9 * (1.0 + best));
        }
    }

    #[test]
    fn partitions_beat_random_feasible_assignments() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = DMatrix::from_fn(6, 2, |_, _| rng.random_range(-4.0..4.0));
        let prob = KmeansProblem::new(x.clone(), 3, 1.0, 1.0).unwrap();
        let best = objective(&oracle_balanced_partitions(&prob).unwrap());
        for _ in 0..1000 {
            let mut labels = vec![0, 0, 1, 1, 2, 2];
            for i in (1..6).rev() {
                labels.swap(i, rng.random_range(0..=i));
            }
            assert!(best <= partition_cost(&x, &labels) + 1e-12);
        }
    }

    #[test]
    fn partitions_uneven_sizes() {
        let r = oracle_balanced_partitions(&kmeans(&[0.0, 1.0, 2.0, 10.0, 11.0], 1, 2)).unwrap();
        let OracleParameters::Partition { labels, .. } = &r.parameters else { panic!() };
        assert_eq!(labels, &vec![0, 0, 0, 1, 1]);
        // {0,1,2}: 2(1 + 4 + 1) = 12; {10,11}: 2.
        assert!((objective(&r) - 14.0).abs() < 1e-12);
    }

    #[test]
    fn partitions_refuse_large_inputs() {
        let x: Vec<f64> = (0..13).map(f64::from).collect();
        assert!(matches!(
            oracle_balanced_partitions(&kmeans(&x, 1, 2)),
            Err(Error::OracleRefused(_))
        ));
    }

    #[test]
    fn svm_grid_examples() {
        let p = PrecisionVector::new(vec![0.5, 1.0]).unwrap();
        let prob = svm_problem(&[&[1.0], &[-1.0]], &[1.0, -1.0]).unwrap();
        let r = oracle_svm_margins(&prob, &p).unwrap();
        assert!(r.feasible);
        assert_eq!(objective(&r), 1.0);
        assert_eq!(
            r.parameters,
            OracleParameters::Classifier { w: vec![1.0], b: 0.0, grid_points: 16 }
        );

        let inseparable = svm_problem(&[&[1.0], &[1.0]], &[1.0, -1.0]).unwrap();
        let r = oracle_svm_margins(&inseparable, &p).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.objective, None);
    }

    #[test]
    fn svm_grid_scaling_inputs() {
        let p = PrecisionVector::new(vec![0.25, 0.5, 1.0]).unwrap();
        let base = svm_problem(&[&[1.0], &[-1.0]], &[1.0, -1.0]).unwrap();
        let doubled = svm_problem(&[&[2.0], &[-2.0]], &[1.0, -1.0]).unwrap();
        let a = objective(&oracle_svm_margins(&base, &p).unwrap());
        let b = objective(&oracle_svm_margins(&doubled, &p).unwrap());
        assert_eq!((a, b), (1.0, 0.25));
    }

    #[test]
    fn svm_grid_refuses_large_grids() {
        let p = PrecisionVector::default();
        let rows: Vec<Vec<f64>> = (0..2).map(|i| vec![i as f64; 6]).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let prob = svm_problem(&refs, &[1.0, -1.0]).unwrap();
        assert!(matches!(oracle_svm_margins(&prob, &p), Err(Error::OracleRefused(_))));
    }

    #[test]
    fn expansion_matches_matrix_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = PrecisionVector::new(vec![-1.0, 0.5, 2.0]).unwrap();
        let x = DMatrix::from_fn(3, 2, |_, _| rng.random_range(-2.0..2.0));
        let prob = SvmProblem::new(x, DVector::from_row_slice(&[1.0, -1.0, 1.0])).unwrap();
        let q = formulate_svm(&prob, &p).unwrap();
        for _ in 0..200 {
            let bits: BitVector = (0..q.m()).map(|_| rng.random_bool(0.5)).collect();
            let a = q.evaluate(&bits).unwrap();
            let b = svm_expansion_energy(&prob, &p, &bits).unwrap();
            assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }
    }
}
