//! Equal-size k-means clustering as a QUBO.
//!
//! Assignment bits `w_hat_ij = 1` iff point `i` is in cluster `j`, column
//! stacked (`w_hat_11 .. w_hat_N1, w_hat_12, ..`). Cluster sizes near `N/k`
//! and exactly one cluster per point are enforced with quadratic penalties:
//!
//! ```text
//! A = I_k (x) (D + alpha F) + Q^T (I_N (x) beta G) Q,   b = 0
//! F = J_N - (2N/k) I_N,   G = J_k - 2 I_k
//! ```
//!
//! where `J` is the all-ones matrix and `Q` reorders column-stacked bits into
//! row-stacked order. The dropped constants total `alpha k (N/k)^2 + beta N`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::terms::QuboTerms;
use crate::{BitVector, Error, QuboInstance, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct KmeansProblem {
    x: DMatrix<f64>,
    k: usize,
    alpha: f64,
    beta: f64,
}

impl KmeansProblem {
    pub fn new(x: DMatrix<f64>, k: usize, alpha: f64, beta: f64) -> Result<Self> {
        let n = x.nrows();
        if x.ncols() == 0 {
            return Err(Error::InvalidProblem("k-means data needs at least one feature".into()));
        }
        if k < 2 || k > n {
            return Err(Error::InvalidProblem(format!(
                "cluster count k={k} must satisfy 2 <= k <= N={n}"
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("k-means data"));
        }
        if !(alpha >= 0.0 && alpha.is_finite() && beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "penalties must be finite and nonnegative, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self { x, k, alpha, beta })
    }

    /// Uses [`suggest_penalties`] for both weights.
    pub fn with_suggested_penalties(x: DMatrix<f64>, k: usize) -> Result<Self> {
        let mut prob = Self::new(x, k, 0.0, 0.0)?;
        let (alpha, beta) = suggest_penalties(&prob);
        prob.alpha = alpha;
        prob.beta = beta;
        Ok(prob)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    /// `N / k` as a real number.
    pub fn target_size(&self) -> f64 {
        self.n() as f64 / self.k as f64
    }

    /// `alpha k (N/k)^2 + beta N`, the constants dropped from the penalties.
    pub fn restored_constant(&self) -> f64 {
        let s = self.target_size();
        self.alpha * self.k as f64 * s * s + self.beta * self.n() as f64
    }
}

/// Squared Euclidean distances `d_ij = ||x_i - x_j||^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix(DMatrix<f64>);

impl DistanceMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().fold(0.0f64, |acc, v| acc.max(*v))
    }
}

pub fn build_distance_matrix(prob: &KmeansProblem) -> DistanceMatrix {
    let n = prob.n();
    let x = prob.x();
    let mut dist = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = 0.0;
            for m in 0..prob.d() {
                let diff = x[(i, m)] - x[(j, m)];
                acc += diff * diff;
            }
            dist[(i, j)] = acc;
            dist[(j, i)] = acc;
        }
    }
    DistanceMatrix(dist)
}

/// The `Nk x Nk` permutation taking column-stacked bits to row-stacked bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    n: usize,
    k: usize,
    /// Row `i` has its single one in column `source[i]`.
    source: Vec<usize>,
}

/// Row `i` (0-based) selects column `n * (i mod k) + i / k`.
pub fn build_permutation(n: usize, k: usize) -> Permutation {
    let source = (0..n * k).map(|i| n * (i % k) + i / k).collect();
    Permutation { n, k, source }
}

impl Permutation {
    pub fn size(&self) -> usize {
        self.n * self.k
    }

    /// Column index of the one in each row.
    pub fn source(&self) -> &[usize] {
        &self.source
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let size = self.size();
        let mut q = DMatrix::zeros(size, size);
        for (row, &col) in self.source.iter().enumerate() {
            q[(row, col)] = 1.0;
        }
        q
    }

    /// `Q * bits`.
    pub fn apply(&self, bits: &[u8]) -> Vec<u8> {
        self.source.iter().map(|&c| bits[c]).collect()
    }
}

/// `N k`.
pub fn variable_count(n: usize, k: usize) -> usize {
    n * k
}

/// Column-stacked index of point `i` in cluster `c`.
#[inline]
fn var(n: usize, i: usize, c: usize) -> usize {
    c * n + i
}

/// Raw coefficients of `I_k (x) (D + alpha F)` and `Q^T (I_N (x) beta G) Q`.
pub fn kmeans_terms(prob: &KmeansProblem) -> QuboTerms {
    let (n, k) = (prob.n(), prob.k());
    let dist = build_distance_matrix(prob);
    let d = dist.matrix();
    let (alpha, beta) = (prob.alpha, prob.beta);
    let f_diag = 1.0 - 2.0 * prob.target_size();
    let mut terms = QuboTerms::with_capacity(n * k, k * n * n + n * k * k);

    let mut block = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let f = if i == j { f_diag } else { 1.0 };
            block[(i, j)] = d[(i, j)] + alpha * f;
        }
    }
    for c in 0..k {
        for i in 0..n {
            for j in 0..n {
                terms.add_quadratic(var(n, i, c), var(n, j, c), block[(i, j)]);
            }
        }
    }
    // Q maps (point i, cluster c) in row-stacked order back to var(n, i, c).
    for i in 0..n {
        for a in 0..k {
            for b in 0..k {
                let g = if a == b { -1.0 } else { 1.0 };
                terms.add_quadratic(var(n, i, a), var(n, i, b), beta * g);
            }
        }
    }
    terms
}

pub fn formulate_kmeans(prob: &KmeansProblem) -> Result<QuboInstance> {
    kmeans_terms(prob).into_instance()
}

/// `alpha = beta = N * max(D) + 1`.
pub fn suggest_penalties(prob: &KmeansProblem) -> (f64, f64) {
    let penalty = prob.n() as f64 * build_distance_matrix(prob).max() + 1.0;
    (penalty, penalty)
}

/// The binary `N x k` matrix `W_hat`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AssignmentMatrix {
    n: usize,
    k: usize,
    /// Row-major `W_hat`.
    rows: Vec<u8>,
}

impl AssignmentMatrix {
    /// From the column-stacked QUBO variables.
    pub fn from_column_stacked(bits: &[u8], n: usize, k: usize) -> Result<Self> {
        if bits.len() != n * k {
            return Err(Error::DimensionMismatch {
                expected: n * k,
                actual: bits.len(),
            });
        }
        let mut rows = vec![0; n * k];
        for c in 0..k {
            for i in 0..n {
                rows[i * k + c] = bits[var(n, i, c)];
            }
        }
        Ok(Self { n, k, rows })
    }

    /// One cluster label per point.
    pub fn from_labels(labels: &[usize], k: usize) -> Self {
        let n = labels.len();
        let mut rows = vec![0; n * k];
        for (i, &c) in labels.iter().enumerate() {
            rows[i * k + c] = 1;
        }
        Self { n, k, rows }
    }

    pub fn get(&self, point: usize, cluster: usize) -> bool {
        self.rows[point * self.k + cluster] == 1
    }

    /// `w_hat`: columns of `W_hat` stacked.
    pub fn column_stacked(&self) -> Vec<u8> {
        let mut out = vec![0; self.n * self.k];
        for i in 0..self.n {
            for c in 0..self.k {
                out[var(self.n, i, c)] = self.rows[i * self.k + c];
            }
        }
        out
    }

    /// `v_hat`: rows of `W_hat` stacked.
    pub fn row_stacked(&self) -> Vec<u8> {
        self.rows.clone()
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.rows
            .chunks(self.k)
            .map(|r| r.iter().map(|&b| b as usize).sum())
            .collect()
    }

    pub fn column_sums(&self) -> Vec<usize> {
        (0..self.k)
            .map(|c| (0..self.n).filter(|&i| self.get(i, c)).count())
            .collect()
    }

    /// Cluster of each point, when every row has exactly one bit set.
    pub fn labels(&self) -> Option<Vec<usize>> {
        self.rows
            .chunks(self.k)
            .map(|r| {
                let mut set = r.iter().enumerate().filter(|(_, &b)| b == 1);
                match (set.next(), set.next()) {
                    (Some((c, _)), None) => Some(c),
                    _ => None,
                }
            })
            .collect()
    }

    /// The same assignment with cluster `c` renamed `perm[c]`.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        let mut rows = vec![0; self.n * self.k];
        for i in 0..self.n {
            for c in 0..self.k {
                rows[i * self.k + perm[c]] = self.rows[i * self.k + c];
            }
        }
        Self {
            n: self.n,
            k: self.k,
            rows,
        }
    }
}

/// `sum_j w'_j^T D w'_j`: each unordered within-cluster pair counted twice.
pub fn within_cluster_cost(dist: &DistanceMatrix, assignment: &AssignmentMatrix) -> f64 {
    let d = dist.matrix();
    let mut cost = 0.0;
    for c in 0..assignment.k {
        let members: Vec<usize> = (0..assignment.n).filter(|&i| assignment.get(i, c)).collect();
        for &i in &members {
            for &j in &members {
                cost += d[(i, j)];
            }
        }
    }
    cost
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KmeansDecoding {
    pub assignment: AssignmentMatrix,
    pub labels: Option<Vec<usize>>,
    pub row_sums: Vec<usize>,
    pub column_sums: Vec<usize>,
    /// Points not assigned to exactly one cluster.
    pub row_violations: usize,
    /// `column_sum - N/k` per cluster.
    pub column_deviations: Vec<f64>,
    /// Rows sum to 1 and every column sum is `floor(N/k)` or `ceil(N/k)`.
    pub feasible: bool,
    pub cost: f64,
}

pub fn decode_kmeans(prob: &KmeansProblem, bits: &BitVector) -> Result<KmeansDecoding> {
    let (n, k) = (prob.n(), prob.k());
    let assignment = AssignmentMatrix::from_column_stacked(bits.as_slice(), n, k)?;
    let row_sums = assignment.row_sums();
    let column_sums = assignment.column_sums();
    let row_violations = row_sums.iter().filter(|&&s| s != 1).count();
    let target = prob.target_size();
    let (lo, hi) = (n / k, n.div_ceil(k));
    let feasible = row_violations == 0 && column_sums.iter().all(|&s| s == lo || s == hi);
    let cost = within_cluster_cost(&build_distance_matrix(prob), &assignment);
    Ok(KmeansDecoding {
        labels: assignment.labels(),
        column_deviations: column_sums.iter().map(|&s| s as f64 - target).collect(),
        assignment,
        row_sums,
        column_sums,
        row_violations,
        feasible,
        cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::symmetrize;
    use crate::solve_exact;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn points(x: &[f64], d: usize) -> DMatrix<f64> {
        DMatrix::from_row_slice(x.len() / d, d, x)
    }

    /// Objective plus penalties computed directly from the assignment.
    fn penalty_form(prob: &KmeansProblem, bits: &[u8]) -> f64 {
        let a = AssignmentMatrix::from_column_stacked(bits, prob.n(), prob.k()).unwrap();
        let dist = build_distance_matrix(prob);
        let s = prob.target_size();
        let columns: f64 = a.column_sums().iter().map(|&c| (c as f64 - s).powi(2)).sum();
        let rows: f64 = a.row_sums().iter().map(|&r| (r as f64 - 1.0).powi(2)).sum();
        within_cluster_cost(&dist, &a) + prob.alpha() * columns + prob.beta() * rows
    }

    #[test]
    fn validation() {
        let x = points(&[0.0, 1.0, 2.0], 1);
        assert!(KmeansProblem::new(x.clone(), 1, 1.0, 1.0).is_err());
        assert!(KmeansProblem::new(x.clone(), 4, 1.0, 1.0).is_err());
        assert!(KmeansProblem::new(x.clone(), 2, -1.0, 1.0).is_err());
        assert!(KmeansProblem::new(x, 3, 0.0, 0.0).is_ok());
    }

    #[test]
    fn distance_matrix_examples() {
        let prob = KmeansProblem::new(points(&[0.0, 3.0], 1), 2, 0.0, 0.0).unwrap();
        assert_eq!(build_distance_matrix(&prob).matrix(), &DMatrix::from_row_slice(2, 2, &[0.0, 9.0, 9.0, 0.0]));

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = DMatrix::from_fn(5, 3, |_, _| rng.random_range(-5.0..5.0));
        let prob = KmeansProblem::new(x.clone(), 2, 0.0, 0.0).unwrap();
        let d = build_distance_matrix(&prob);
        for i in 0..5 {
            assert_eq!(d.matrix()[(i, i)], 0.0);
            for j in 0..5 {
                let direct: f64 = (0..3).map(|m| (x[(i, m)] - x[(j, m)]).powi(2)).sum();
                assert!((d.matrix()[(i, j)] - direct).abs() < 1e-12);
                assert_eq!(d.matrix()[(i, j)], d.matrix()[(j, i)]);
            }
        }
    }

    #[test]
    fn permutation_two_by_two() {
        let q = build_permutation(2, 2);
        assert_eq!(q.source(), &[0, 2, 1, 3]);
        // w_hat = [w11, w21, w12, w22] -> v_hat = [w11, w12, w21, w22].
        assert_eq!(q.apply(&[1, 2, 3, 4].map(|v| v as u8)), vec![1, 3, 2, 4]);
        let dense = q.to_dense();
        assert_eq!(&dense * dense.transpose(), DMatrix::identity(4, 4));
    }

    #[test]
    fn permutation_reshapes_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let q = build_permutation(3, 2);
        for _ in 0..20 {
            let labels: Vec<usize> = (0..3).map(|_| rng.random_range(0..2)).collect();
            let a = AssignmentMatrix::from_labels(&labels, 2);
            let v = q.apply(&a.column_stacked());
            for (i, chunk) in v.chunks(2).enumerate() {
                assert_eq!(chunk, &[u8::from(a.get(i, 0)), u8::from(a.get(i, 1))]);
            }
            assert_eq!(v, a.row_stacked());
        }
    }

    #[test]
    fn structured_assembly_matches_kronecker_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = DMatrix::from_fn(5, 2, |_, _| rng.random_range(-2.0..2.0));
        let prob = KmeansProblem::new(x, 3, 2.5, 1.5).unwrap();
        let (n, k) = (5, 3);
        let d = build_distance_matrix(&prob).matrix().clone();
        let f = DMatrix::from_element(n, n, 1.0) - DMatrix::identity(n, n) * (2.0 * n as f64 / k as f64);
        let g = DMatrix::from_element(k, k, 1.0) - DMatrix::identity(k, k) * 2.0;
        let q = build_permutation(n, k).to_dense();
        let a = DMatrix::<f64>::identity(k, k).kronecker(&(d + f * 2.5))
            + q.transpose() * DMatrix::<f64>::identity(n, n).kronecker(&(g * 1.5)) * q;
        let qubo = formulate_kmeans(&prob).unwrap();
        assert!((qubo.a() - symmetrize(&a).unwrap()).abs().max() < 1e-12);
        assert!(qubo.b().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn penalty_form_identity_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = DMatrix::from_fn(3, 2, |_, _| rng.random_range(-2.0..2.0));
        let prob = KmeansProblem::new(x, 2, 3.0, 4.0).unwrap();
        let q = formulate_kmeans(&prob).unwrap();
        assert_eq!(q.m(), 6);
        for mask in 0..64 {
            let bits = BitVector::from_mask(mask, 6);
            let lhs = q.evaluate(&bits).unwrap() + prob.restored_constant();
            let rhs = penalty_form(&prob, bits.as_slice());
            assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }
        assert_eq!(q.evaluate(&BitVector::zeros(6)).unwrap(), 0.0);
    }

    #[test]
    fn decode_examples() {
        let prob = KmeansProblem::with_suggested_penalties(points(&[0.0, 1.0], 1), 2).unwrap();
        let feasible = decode_kmeans(&prob, &BitVector::new(vec![1, 0, 0, 1]).unwrap()).unwrap();
        assert!(feasible.feasible);
        assert_eq!(feasible.cost, 0.0);
        assert_eq!(feasible.labels, Some(vec![0, 1]));

        let all = decode_kmeans(&prob, &BitVector::ones(4)).unwrap();
        assert_eq!(all.row_sums, vec![2, 2]);
        assert_eq!(all.column_sums, vec![2, 2]);
        assert_eq!(all.row_violations, 2);
        assert!(!all.feasible);
        assert_eq!(all.labels, None);
    }

    #[test]
    fn two_pairs_toy() {
        let prob = KmeansProblem::with_suggested_penalties(points(&[0.0, 0.1, 10.0, 10.1], 1), 2).unwrap();
        let q = formulate_kmeans(&prob).unwrap();
        assert_eq!(q.m(), 8);
        let r = solve_exact(&q).unwrap();
        let dec = decode_kmeans(&prob, &r.best).unwrap();
        assert!(dec.feasible);
        let labels = dec.labels.unwrap();
        assert_eq!(labels[0], labels[1]);
        assert_eq!(labels[2], labels[3]);
        assert_ne!(labels[0], labels[2]);
        // 2 * (0.1^2 + 0.1^2), with 0.1 and 10.1 - 10 in floating point.
        assert!((dec.cost - 0.04).abs() < 1e-12);
        assert_eq!(r.all_optima.unwrap().len(), 2);
    }

    #[test]
    fn suggested_penalties_formula() {
        let prob = KmeansProblem::with_suggested_penalties(points(&[1.0, 1.0, 1.0], 1), 2).unwrap();
        assert_eq!((prob.alpha(), prob.beta()), (1.0, 1.0));
        let prob = KmeansProblem::with_suggested_penalties(points(&[0.0, 3.0], 1), 2).unwrap();
        assert_eq!((prob.alpha(), prob.beta()), (19.0, 19.0));
    }

    #[test]
    fn suggested_penalties_dominate_infeasible_patterns() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..5 {
            let x = DMatrix::from_fn(4, 2, |_, _| rng.random_range(-3.0..3.0));
            let prob = KmeansProblem::with_suggested_penalties(x, 2).unwrap();
            let q = formulate_kmeans(&prob).unwrap();
            let mut best_feasible = f64::INFINITY;
            let mut min_infeasible = f64::INFINITY;
            for mask in 0..256 {
                let bits = BitVector::from_mask(mask, 8);
                let e = q.evaluate(&bits).unwrap();
                if decode_kmeans(&prob, &bits).unwrap().feasible {
                    best_feasible = best_feasible.min(e);
                } else {
                    min_infeasible = min_infeasible.min(e);
                }
            }
            assert!(min_infeasible > best_feasible);
        }
    }

    #[test]
    fn uneven_split_accepts_floor_and_ceil() {
        let prob = KmeansProblem::new(points(&[0.0, 1.0, 2.0, 3.0, 4.0], 1), 2, 1.0, 1.0).unwrap();
        let a = AssignmentMatrix::from_labels(&[0, 0, 0, 1, 1], 2);
        let bits = BitVector::new(a.column_stacked()).unwrap();
        let dec = decode_kmeans(&prob, &bits).unwrap();
        assert!(dec.feasible);
        assert_eq!(dec.column_deviations, vec![0.5, -0.5]);
        let a = AssignmentMatrix::from_labels(&[0, 0, 0, 0, 1], 2);
        assert!(!decode_kmeans(&prob, &BitVector::new(a.column_stacked()).unwrap()).unwrap().feasible);
    }

    #[test]
    fn relabeling_preserves_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = DMatrix::from_fn(4, 2, |_, _| rng.random_range(-3.0..3.0));
        let prob = KmeansProblem::new(x, 3, 2.0, 5.0).unwrap();
        let q = formulate_kmeans(&prob).unwrap();
        let a = AssignmentMatrix::from_labels(&[0, 2, 1, 1], 3);
        let base = q.evaluate(&BitVector::new(a.column_stacked()).unwrap()).unwrap();
        for perm in [[1, 2, 0], [2, 1, 0], [0, 2, 1]] {
            let r = a.relabeled(&perm);
            let e = q.evaluate(&BitVector::new(r.column_stacked()).unwrap()).unwrap();
            assert!((e - base).abs() <= 1e-12 * (1.0 + base.abs()));
        }
    }
}
