use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qubo_ml::kmeans::{formulate_kmeans, AssignmentMatrix, KmeansProblem};
use qubo_ml::oracles::{partition_cost, svm_expansion_energy};
use qubo_ml::regression::{decode_regression, formulate_regression, RegressionProblem};
use qubo_ml::svm::{decode_svm, formulate_svm, precision_matrix, SvmProblem};
use qubo_ml::{solve_exact, BitVector, PrecisionVector, QuboInstance};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-4.0f64..4.0, rows * cols).prop_map(move |v| DMatrix::from_row_slice(rows, cols, &v))
}

fn bits(len: usize) -> impl Strategy<Value = BitVector> {
    prop::collection::vec(any::<bool>(), len).prop_map(|v| v.into_iter().collect())
}

fn precision() -> impl Strategy<Value = PrecisionVector> {
    prop::sample::subsequence(vec![-2.0, -1.0, -0.5, 0.25, 0.5, 1.0, 2.0], 1..=4)
        .prop_map(|v| PrecisionVector::new(v).unwrap())
}

fn with_positive() -> impl Strategy<Value = PrecisionVector> {
    precision().prop_filter("needs a positive entry", |p| p.positive_count() > 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_is_quadratic_form(a in matrix(5, 5), b in prop::collection::vec(-3.0f64..3.0, 5), z in bits(5)) {
        let q = QuboInstance::new(a.clone(), DVector::from_vec(b.clone())).unwrap();
        let mut direct = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                direct += a[(i, j)] * f64::from(z.as_slice()[i] * z.as_slice()[j]);
            }
            direct += b[i] * f64::from(z.as_slice()[i]);
        }
        prop_assert!((q.evaluate(&z).unwrap() - direct).abs() <= 1e-10 * (1.0 + direct.abs()));
        let t = QuboInstance::new(a.transpose(), DVector::from_vec(b)).unwrap();
        prop_assert_eq!(t.a(), q.a());
    }

    #[test]
    fn regression_energy_plus_norm_is_sse(x in matrix(4, 2), y in prop::collection::vec(-3.0f64..3.0, 4), p in precision(), seed in any::<u64>()) {
        let prob = RegressionProblem::new(x, DVector::from_vec(y)).unwrap();
        let q = formulate_regression(&prob, &p).unwrap();
        let z = BitVector::from_mask(seed & ((1 << q.m()) - 1), q.m());
        let sol = decode_regression(&prob, &p, &q, &z).unwrap();
        let residual = (prob.x_aug() * &sol.w - prob.y()).norm_squared();
        let lhs = sol.qubo_energy + prob.y_norm_sq();
        prop_assert!((lhs - residual).abs() <= 1e-8 * (1.0 + prob.y_norm_sq()));
    }

    #[test]
    fn svm_energy_is_dual_objective(x in matrix(3, 2), p in with_positive(), seed in any::<u64>()) {
        let prob = SvmProblem::new(x, DVector::from_row_slice(&[1.0, -1.0, 1.0])).unwrap();
        let q = formulate_svm(&prob, &p).unwrap();
        let z = BitVector::from_mask(seed & ((1u64 << q.m()) - 1), q.m());
        let pm = precision_matrix(&prob, &p).unwrap();
        let sol = decode_svm(&prob, &pm, &z).unwrap();
        let e = q.evaluate(&z).unwrap();
        prop_assert!((e - sol.dual_objective).abs() <= 1e-9 * (1.0 + e.abs()));
        prop_assert!(sol.lambda.iter().all(|&l| l >= 0.0));
        let expanded = svm_expansion_energy(&prob, &p, &z).unwrap();
        prop_assert!((e - expanded).abs() <= 1e-9 * (1.0 + e.abs()));
    }

    #[test]
    fn kmeans_feasible_energy_is_cost(x in matrix(4, 2), labels in prop::sample::select(vec![
        vec![0, 0, 1, 1], vec![0, 1, 0, 1], vec![0, 1, 1, 0], vec![1, 1, 0, 0],
    ])) {
        let prob = KmeansProblem::with_suggested_penalties(x.clone(), 2).unwrap();
        let q = formulate_kmeans(&prob).unwrap();
        let z = BitVector::new(AssignmentMatrix::from_labels(&labels, 2).column_stacked()).unwrap();
        let e = q.evaluate(&z).unwrap() + prob.restored_constant();
        let cost = partition_cost(&x, &labels);
        prop_assert!((e - cost).abs() <= 1e-9 * (1.0 + prob.restored_constant()));
    }

    #[test]
    fn exact_minimum_is_a_lower_bound(a in matrix(8, 8), b in prop::collection::vec(-3.0f64..3.0, 8), z in bits(8)) {
        let q = QuboInstance::new(a, DVector::from_vec(b)).unwrap();
        let r = solve_exact(&q).unwrap();
        prop_assert!(r.energy <= q.evaluate(&z).unwrap() + 1e-12);
        prop_assert_eq!(&r.best, &r.all_optima.as_ref().unwrap()[0]);
    }

    #[test]
    fn decode_of_encode_is_representable(p in precision(), w in prop::collection::vec(-4.0f64..4.0, 3)) {
        let pm = qubo_ml::encoding::build_regression_precision_matrix(&p, 2);
        let z = pm.encode_nearest(&DVector::from_vec(w.clone())).unwrap();
        let back = pm.decode(&z).unwrap();
        let values = p.representable_values();
        for (i, v) in back.iter().enumerate() {
            prop_assert!(p.represents(*v));
            let best = values.iter().map(|r| (r - w[i]).abs()).fold(f64::INFINITY, f64::min);
            prop_assert!(((v - w[i]).abs() - best).abs() < 1e-12);
        }
    }
}
