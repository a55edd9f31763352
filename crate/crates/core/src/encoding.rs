//! Fixed-precision binary encoding of real parameters.
//!
//! A [`PrecisionVector`] `P = [p_1, ..., p_K]` of sorted signed powers of two
//! represents a real value as `sum_k p_k * bit_k`. Stacking one such block per
//! parameter gives the [`PrecisionMatrix`] that maps a binary vector to the
//! parameter vector, `w = P_mat * w_hat`.

use nalgebra::{DMatrix, DVector};

use crate::{BitVector, Error, Result};

/// Sorted, duplicate-free list of signed integral powers of two.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionVector {
    entries: Vec<f64>,
}

impl Default for PrecisionVector {
    /// `[-2, -1, -1/2, 1/2, 1, 2]`.
    fn default() -> Self {
        Self {
            entries: vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0],
        }
    }
}

impl PrecisionVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidPrecision {
                entry: String::new(),
                reason: "precision vector must not be empty".into(),
            });
        }
        for &e in &entries {
            if !is_signed_power_of_two(e) {
                return Err(Error::InvalidPrecision {
                    entry: e.to_string(),
                    reason: "magnitude is not an integral power of two".into(),
                });
            }
        }
        if let Some(w) = entries.windows(2).find(|w| w[0] >= w[1]) {
            let reason = if w[0] == w[1] {
                "duplicate entry"
            } else {
                "entries must be sorted ascending"
            };
            return Err(Error::InvalidPrecision {
                entry: w[1].to_string(),
                reason: reason.into(),
            });
        }
        Ok(Self { entries })
    }

    /// Parses entries such as `"-2"`, `"-0.5"`, `"1/4"` or `"2^-3"` exactly.
    pub fn parse_entries<S: AsRef<str>>(entries: &[S]) -> Result<Self> {
        let values = entries
            .iter()
            .map(|s| parse_entry(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    /// Comma-separated form of [`PrecisionVector::parse_entries`].
    pub fn parse_list(list: &str) -> Result<Self> {
        let parts: Vec<&str> = list.split(',').map(str::trim).collect();
        Self::parse_entries(&parts)
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `K`, the total number of entries (both signs counted).
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// 1-based index of the smallest positive entry, if any.
    pub fn k_plus(&self) -> Option<usize> {
        self.first_positive().map(|i| i + 1)
    }

    fn first_positive(&self) -> Option<usize> {
        self.entries.iter().position(|&e| e > 0.0)
    }

    /// The positive entries, `P_+`.
    pub fn positive(&self) -> &[f64] {
        match self.first_positive() {
            Some(i) => &self.entries[i..],
            None => &[],
        }
    }

    /// `K - K_+ + 1`, or zero when there is no positive entry.
    pub fn positive_count(&self) -> usize {
        self.positive().len()
    }

    /// Every value `sum_k s_k p_k` for `s` in `{0,1}^K`, sorted and deduplicated.
    pub fn representable_values(&self) -> Vec<f64> {
        let sums = subset_sums(&self.entries);
        let mut values = sums;
        values.sort_by(f64::total_cmp);
        values.dedup();
        values
    }

    pub fn min_representable(&self) -> f64 {
        self.entries.iter().filter(|&&e| e < 0.0).fold(0.0, |a, e| a + e)
    }

    pub fn max_representable(&self) -> f64 {
        self.entries.iter().filter(|&&e| e > 0.0).fold(0.0, |a, e| a + e)
    }

    /// True when `value` is one of [`PrecisionVector::representable_values`].
    pub fn represents(&self, value: f64) -> bool {
        self.representable_values().contains(&value)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.to_string()).collect()
    }
}

fn subset_sums(entries: &[f64]) -> Vec<f64> {
    let k = entries.len();
    (0..1u64 << k)
        .map(|mask| {
            (0..k)
                .filter(|i| mask >> i & 1 == 1)
                .fold(0.0, |acc, i| acc + entries[i])
        })
        .collect()
}

fn is_signed_power_of_two(v: f64) -> bool {
    if !v.is_normal() {
        return false;
    }
    v.abs().to_bits() & ((1u64 << 52) - 1) == 0
}

fn invalid(entry: &str, reason: &str) -> Error {
    Error::InvalidPrecision {
        entry: entry.to_string(),
        reason: reason.to_string(),
    }
}

/// Parses one precision entry as `sign * 2^n` without going through float
/// rounding: `"0.5000000000000001"` is rejected rather than read as `0.5`.
pub fn parse_entry(text: &str) -> Result<f64> {
    let trimmed = text.trim();
    let (negative, body) = match trimmed.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, trimmed.strip_prefix('+').unwrap_or(trimmed)),
    };
    let exponent = if let Some((num, den)) = body.split_once('/') {
        let num = unsigned_exponent(num.trim()).ok_or_else(|| invalid(text, "numerator is not a power of two"))?;
        let den = unsigned_exponent(den.trim()).ok_or_else(|| invalid(text, "denominator is not a power of two"))?;
        num - den
    } else if let Some((base, exp)) = body.split_once('^') {
        if base.trim() != "2" {
            return Err(invalid(text, "only base 2 is accepted in power notation"));
        }
        exp.trim()
            .parse::<i32>()
            .map_err(|_| invalid(text, "exponent is not an integer"))?
    } else {
        unsigned_exponent(body).ok_or_else(|| invalid(text, "magnitude is not an integral power of two"))?
    };
    if !(-1022..=1023).contains(&exponent) {
        return Err(invalid(text, "exponent out of range"));
    }
    let magnitude = 2f64.powi(exponent);
    Ok(if negative { -magnitude } else { magnitude })
}

/// For a plain unsigned decimal string equal to `2^n`, returns `n`.
fn unsigned_exponent(decimal: &str) -> Option<i32> {
    let (int_part, frac_part) = decimal.split_once('.').unwrap_or((decimal, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let frac_part = frac_part.trim_end_matches('0');
    let int_part = int_part.trim_start_matches('0');
    let digits = format!("{int_part}{frac_part}");
    let digits = digits.trim_start_matches('0');
    if digits.is_empty() {
        return None;
    }
    // numerator / 10^f with numerator = 2^a * odd; a power of two iff odd == 5^f.
    let numerator: u128 = digits.parse().ok()?;
    let f = frac_part.len() as u32;
    let a = numerator.trailing_zeros();
    let odd = numerator >> a;
    if odd != 5u128.checked_pow(f)? {
        return None;
    }
    Some(a as i32 - f as i32)
}

/// Which parameter layout a [`PrecisionMatrix`] realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// `I_{params} (x) P^T`.
    Kronecker { params: usize },
    /// `diag(I_{d+1} (x) P^T, I_N (x) P_+^T)`, the SVM `(w, b, lambda)` stack.
    Svm { features: usize, points: usize },
}

/// Block-structured precision matrix. The dense form is built on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionMatrix {
    precision: PrecisionVector,
    layout: Layout,
}

/// `I_{d+1} (x) P^T`, of shape `(d+1) x K(d+1)`.
pub fn build_regression_precision_matrix(p: &PrecisionVector, d: usize) -> PrecisionMatrix {
    PrecisionMatrix {
        precision: p.clone(),
        layout: Layout::Kronecker { params: d + 1 },
    }
}

/// The SVM precision matrix of shape `(n+d+1) x (K(d+1) + n(K-K_+ +1))`.
pub fn build_svm_precision_matrix(
    p: &PrecisionVector,
    d: usize,
    n: usize,
) -> Result<PrecisionMatrix> {
    if p.positive_count() == 0 {
        return Err(Error::NoPositivePrecision);
    }
    Ok(PrecisionMatrix {
        precision: p.clone(),
        layout: Layout::Svm {
            features: d,
            points: n,
        },
    })
}

impl PrecisionMatrix {
    pub fn precision(&self) -> &PrecisionVector {
        &self.precision
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Number of real parameters.
    pub fn rows(&self) -> usize {
        match self.layout {
            Layout::Kronecker { params } => params,
            Layout::Svm { features, points } => features + 1 + points,
        }
    }

    /// Number of binary variables.
    pub fn cols(&self) -> usize {
        let k = self.precision.len();
        match self.layout {
            Layout::Kronecker { params } => k * params,
            Layout::Svm { features, points } => {
                k * (features + 1) + points * self.precision.positive_count()
            }
        }
    }

    /// First column and coefficients of parameter `row`'s block.
    pub fn block(&self, row: usize) -> (usize, &[f64]) {
        let full = self.precision.entries();
        let k = full.len();
        match self.layout {
            Layout::Kronecker { .. } => (row * k, full),
            Layout::Svm { features, .. } => {
                if row <= features {
                    (row * k, full)
                } else {
                    let plus = self.precision.positive();
                    let lambda = row - features - 1;
                    (k * (features + 1) + lambda * plus.len(), plus)
                }
            }
        }
    }

    /// Dense realization via explicit Kronecker products.
    pub fn dense(&self) -> DMatrix<f64> {
        let p_row = DMatrix::from_row_slice(1, self.precision.len(), self.precision.entries());
        match self.layout {
            Layout::Kronecker { params } => DMatrix::<f64>::identity(params, params).kronecker(&p_row),
            Layout::Svm { features, points } => {
                let plus = self.precision.positive();
                let top = DMatrix::<f64>::identity(features + 1, features + 1).kronecker(&p_row);
                let bottom = DMatrix::<f64>::identity(points, points)
                    .kronecker(&DMatrix::from_row_slice(1, plus.len(), plus));
                let mut out = DMatrix::zeros(self.rows(), self.cols());
                out.view_mut((0, 0), top.shape()).copy_from(&top);
                out.view_mut(top.shape(), bottom.shape()).copy_from(&bottom);
                out
            }
        }
    }

    /// `P_mat * bits`.
    pub fn decode(&self, bits: &BitVector) -> Result<DVector<f64>> {
        if bits.len() != self.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                actual: bits.len(),
            });
        }
        let z = bits.as_slice();
        Ok(DVector::from_fn(self.rows(), |row, _| {
            let (start, coeffs) = self.block(row);
            coeffs
                .iter()
                .enumerate()
                .filter(|(k, _)| z[start + k] == 1)
                .fold(0.0, |acc, (_, p)| acc + p)
        }))
    }

    /// Per component, the bit pattern whose decoded value is closest to the
    /// target; ties go to the lexicographically smallest pattern.
    pub fn encode_nearest(&self, w: &DVector<f64>) -> Result<BitVector> {
        if w.len() != self.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.rows(),
                actual: w.len(),
            });
        }
        let mut bits = BitVector::zeros(self.cols());
        for row in 0..self.rows() {
            let (start, coeffs) = self.block(row);
            let pattern = nearest_pattern(coeffs, w[row]);
            for (k, &b) in pattern.iter().enumerate() {
                bits.set(start + k, b);
            }
        }
        Ok(bits)
    }
}

fn nearest_pattern(coeffs: &[f64], target: f64) -> Vec<bool> {
    let k = coeffs.len();
    let mut best: Option<(f64, u64)> = None;
    // Counting from 0 with coefficient 0 as the most significant bit visits
    // patterns in lexicographic order.
    for code in 0..1u64 << k {
        let sum: f64 = (0..k)
            .filter(|&j| code >> (k - 1 - j) & 1 == 1)
            .map(|j| coeffs[j])
            .sum();
        let dist = (sum - target).abs();
        if best.is_none_or(|(d, _)| dist < d) {
            best = Some((dist, code));
        }
    }
    let code = best.map_or(0, |(_, c)| c);
    (0..k).map(|j| code >> (k - 1 - j) & 1 == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pv(list: &str) -> PrecisionVector {
        PrecisionVector::parse_list(list).unwrap()
    }

    #[test]
    fn representable_values_examples() {
        assert_eq!(
            pv("-1,-0.5,0.5,1").representable_values(),
            vec![-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5]
        );
        assert_eq!(pv("1").representable_values(), vec![0.0, 1.0]);
        // All 8 subsets of {1/2, 1, 2}, enumerated by hand.
        assert_eq!(
            pv("0.5,1,2").representable_values(),
            vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5]
        );
    }

    #[test]
    fn representable_count_bounded_by_two_to_the_k() {
        for list in ["1", "0.5,1,2", "-1,-0.5,0.5,1", "-2,-1,-0.5,0.5,1,2", "-4,1"] {
            let p = pv(list);
            let count = p.representable_values().len();
            let sums = subset_sums(p.entries());
            let mut distinct = sums.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            assert!(count <= 1 << p.len());
            assert_eq!(count == 1 << p.len(), distinct.len() == sums.len());
        }
    }

    #[test]
    fn parse_accepts_exact_powers_of_two() {
        assert_eq!(pv("-2,-1,-0.5,0.5,1,2"), PrecisionVector::default());
        assert_eq!(parse_entry("1/4").unwrap(), 0.25);
        assert_eq!(parse_entry("-2^-3").unwrap(), -0.125);
        assert_eq!(parse_entry("0.0625").unwrap(), 0.0625);
        assert_eq!(parse_entry(" 8.000 ").unwrap(), 8.0);
        assert_eq!(parse_entry("+1024").unwrap(), 1024.0);
    }

    #[test]
    fn parse_rejects_non_powers_and_rounding() {
        for bad in ["0", "3", "0.75", "1.5", "0.5000000000000001", "abc", "", "3^2", "1/3", "-0"] {
            let err = parse_entry(bad).unwrap_err();
            assert!(matches!(err, Error::InvalidPrecision { ref entry, .. } if entry == bad), "{bad}");
        }
    }

    #[test]
    fn construction_rejects_unsorted_and_duplicates() {
        assert!(PrecisionVector::new(vec![1.0, 0.5]).is_err());
        assert!(PrecisionVector::new(vec![0.5, 0.5]).is_err());
        assert!(PrecisionVector::new(vec![0.5, 3.0]).is_err());
        assert!(PrecisionVector::new(vec![]).is_err());
    }

    #[test]
    fn k_plus_and_positive_block() {
        let p = pv("-1,-0.5,0.5,1");
        assert_eq!(p.k_plus(), Some(3));
        assert_eq!(p.positive(), &[0.5, 1.0]);
        assert_eq!(p.positive_count(), p.len() - p.k_plus().unwrap() + 1);
        assert_eq!(pv("-2,-1").k_plus(), None);
    }

    #[test]
    fn regression_matrix_is_kronecker_expansion() {
        let pm = build_regression_precision_matrix(&pv("0.5,1"), 1);
        assert_eq!(
            pm.dense(),
            DMatrix::from_row_slice(2, 4, &[0.5, 1.0, 0.0, 0.0, 0.0, 0.0, 0.5, 1.0])
        );
        let pm = build_regression_precision_matrix(&PrecisionVector::default(), 3);
        assert_eq!(pm.dense().shape(), (4, 24));
        assert_eq!((pm.rows(), pm.cols()), (4, 24));
    }

    #[test]
    fn regression_matrix_sparsity_pattern() {
        let pm = build_regression_precision_matrix(&PrecisionVector::default(), 3);
        let dense = pm.dense();
        for r in 0..dense.nrows() {
            assert_eq!(dense.row(r).iter().filter(|v| **v != 0.0).count(), 6);
        }
        for c in 0..dense.ncols() {
            assert_eq!(dense.column(c).iter().filter(|v| **v != 0.0).count(), 1);
        }
    }

    #[test]
    fn all_ones_decodes_to_row_sums() {
        let p = pv("-1,0.5,2");
        let pm = build_regression_precision_matrix(&p, 2);
        let w = pm.decode(&BitVector::ones(pm.cols())).unwrap();
        let row_sums = pm.dense() * DVector::from_element(pm.cols(), 1.0);
        assert_eq!(w, row_sums);
        assert!(w.iter().all(|&v| v == 1.5));
    }

    #[test]
    fn svm_matrix_shapes() {
        let pm = build_svm_precision_matrix(&pv("-1,1"), 1, 1).unwrap();
        let dense = pm.dense();
        assert_eq!(dense.shape(), (3, 5));
        assert_eq!(dense[(2, 4)], 1.0);
        assert_eq!(dense.row(2).iter().filter(|v| **v != 0.0).count(), 1);

        let pm = build_svm_precision_matrix(&pv("-1,-0.5,0.5,1"), 2, 3).unwrap();
        assert_eq!((pm.rows(), pm.cols()), (6, 18));
        assert_eq!(pm.dense().shape(), (6, 18));

        assert!(matches!(
            build_svm_precision_matrix(&pv("-1,-0.5"), 2, 3),
            Err(Error::NoPositivePrecision)
        ));
    }

    #[test]
    fn decode_matches_dense_product_and_direct_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = pv("-1,-0.5,0.5,1");
        let pm = build_svm_precision_matrix(&p, 2, 3).unwrap();
        let dense = pm.dense();
        for _ in 0..50 {
            let bits: BitVector = (0..pm.cols()).map(|_| rng.random::<bool>()).collect();
            let theta = pm.decode(&bits).unwrap();
            let z = DVector::from_iterator(bits.len(), bits.as_slice().iter().map(|&b| f64::from(b)));
            assert_eq!(theta, &dense * z);
            // w_j and b: sum over all of P; lambda_i: sum over P_+ only.
            let k = p.len();
            for j in 0..3 {
                let direct: f64 = (0..k).map(|q| p.entries()[q] * f64::from(bits.as_slice()[j * k + q])).sum();
                assert_eq!(theta[j], direct);
            }
            for i in 0..3 {
                let start = 3 * k + 2 * i;
                let direct = 0.5 * f64::from(bits.as_slice()[start]) + f64::from(bits.as_slice()[start + 1]);
                assert_eq!(theta[3 + i], direct);
            }
        }
    }

    #[test]
    fn decode_examples() {
        let pm = build_regression_precision_matrix(&pv("0.5,1"), 1);
        let w = pm.decode(&BitVector::new(vec![1, 0, 0, 1]).unwrap()).unwrap();
        assert_eq!(w.as_slice(), &[0.5, 1.0]);
        assert!(pm.decode(&BitVector::zeros(4)).unwrap().iter().all(|&v| v == 0.0));
        assert!(matches!(
            pm.decode(&BitVector::zeros(3)),
            Err(Error::DimensionMismatch { expected: 4, actual: 3 })
        ));
    }

    #[test]
    fn lambda_blocks_never_decode_negative() {
        let p = pv("-2,-1,0.5,1");
        let pm = build_svm_precision_matrix(&p, 1, 2).unwrap();
        let (start, _) = pm.block(2);
        for mask in 0..1u64 << (pm.cols() - start) {
            let mut bits = BitVector::zeros(pm.cols());
            for i in 0..pm.cols() - start {
                bits.set(start + i, mask >> i & 1 == 1);
            }
            let theta = pm.decode(&bits).unwrap();
            assert!(theta.rows(2, 2).iter().all(|&l| l >= 0.0));
        }
    }

    #[test]
    fn encode_nearest_examples() {
        // Subset sums of [-1,-1/2,1/2,1] nearest 0.6 is 1/2 (distance 0.1).
        let pm = build_regression_precision_matrix(&pv("-1,-0.5,0.5,1"), 0);
        let bits = pm.encode_nearest(&DVector::from_vec(vec![0.6])).unwrap();
        assert_eq!(pm.decode(&bits).unwrap()[0], 0.5);
        // 0.5 is reachable as 0010 and as 0101; the smaller pattern wins.
        let bits = pm.encode_nearest(&DVector::from_vec(vec![0.5])).unwrap();
        assert_eq!(bits.as_slice(), &[0, 0, 1, 0]);
        let bits = pm.encode_nearest(&DVector::from_vec(vec![-1.5])).unwrap();
        assert_eq!(pm.decode(&bits).unwrap()[0], -1.5);

        let pm = build_regression_precision_matrix(&pv("0.5,1"), 0);
        let bits = pm.encode_nearest(&DVector::from_vec(vec![10.0])).unwrap();
        assert_eq!(pm.decode(&bits).unwrap()[0], 1.5);
        assert!(pm.encode_nearest(&DVector::from_vec(vec![1.0, 2.0])).is_err());
    }

    #[test]
    fn decode_is_additive_over_disjoint_supports() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pm = build_regression_precision_matrix(&PrecisionVector::default(), 2);
        for _ in 0..100 {
            let mut first = BitVector::zeros(pm.cols());
            let mut second = BitVector::zeros(pm.cols());
            let mut union = BitVector::zeros(pm.cols());
            for i in 0..pm.cols() {
                match rng.random_range(0..3) {
                    0 => first.set(i, true),
                    1 => second.set(i, true),
                    _ => {}
                }
                union.set(i, first.get(i) || second.get(i));
            }
            let sum = pm.decode(&first).unwrap() + pm.decode(&second).unwrap();
            assert_eq!(sum, pm.decode(&union).unwrap());
        }
    }

    proptest::proptest! {
        #[test]
        fn encode_decode_round_trip(bits in proptest::collection::vec(0u8..2, 18)) {
            let pm = build_regression_precision_matrix(&PrecisionVector::default(), 2);
            let bits = BitVector::new(bits).unwrap();
            let w = pm.decode(&bits).unwrap();
            let again = pm.decode(&pm.encode_nearest(&w).unwrap()).unwrap();
            proptest::prop_assert_eq!(w, again);
        }
    }
}
