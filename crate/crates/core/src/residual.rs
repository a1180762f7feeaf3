//! Nearest-integer reduction, height functions and residual evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Residual coordinates closer than this to an integer are treated as exact hits.
pub const EXACT_ZERO_THRESHOLD: f64 = 1e-13;

/// A real `m x n` matrix `X` together with an inhomogeneous shift `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxInstance {
    m: usize,
    n: usize,
    /// Row-major entries.
    x: Vec<f64>,
    theta: Vec<f64>,
}

impl ApproxInstance {
    /// Builds an instance from row-major entries.
    pub fn new(m: usize, n: usize, x: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        if m == 0 || n == 0 {
            return domain("instance dimensions must be positive");
        }
        if x.len() != m * n {
            return Err(Error::Dimension {
                expected: m * n,
                got: x.len(),
            });
        }
        if theta.len() != m {
            return Err(Error::Dimension {
                expected: m,
                got: theta.len(),
            });
        }
        if x.iter().chain(theta.iter()).any(|v| !v.is_finite()) {
            return domain("instance entries must be finite");
        }
        Ok(Self { m, n, x, theta })
    }

    pub fn homogeneous(m: usize, n: usize, x: Vec<f64>) -> Result<Self> {
        Self::new(m, n, x, vec![0.0; m])
    }

    /// Builds an instance from explicit rows.
    pub fn from_rows(rows: &[Vec<f64>], theta: Vec<f64>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return domain("matrix rows have unequal lengths");
        }
        Self::new(m, n, rows.concat(), theta)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn entries(&self) -> &[f64] {
        &self.x
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.x[j * self.n..(j + 1) * self.n]
    }

    pub fn is_homogeneous(&self) -> bool {
        self.theta.iter().all(|&t| t == 0.0)
    }

    /// The transposed homogeneous instance (`n x m`, zero shift).
    pub fn transpose(&self) -> Self {
        let mut xt = vec![0.0; self.m * self.n];
        for j in 0..self.m {
            for i in 0..self.n {
                xt[i * self.m + j] = self.x[j * self.n + i];
            }
        }
        Self {
            m: self.n,
            n: self.m,
            x: xt,
            theta: vec![0.0; self.n],
        }
    }

    /// Same matrix with a different shift.
    pub fn with_theta(&self, theta: Vec<f64>) -> Result<Self> {
        Self::new(self.m, self.n, self.x.clone(), theta)
    }

    /// `X_j q + theta_j` for row `j` as an unevaluated sum `hi + lo`. Products
    /// and partial sums carry their rounding errors, so the fractional part
    /// survives large `q`.
    #[inline]
    pub fn row_value_dd(&self, j: usize, q: &[i64]) -> (f64, f64) {
        let mut hi = self.theta[j];
        let mut lo = 0.0;
        for (&x, &qi) in self.row(j).iter().zip(q) {
            let qf = qi as f64;
            let prod = x * qf;
            let prod_err = x.mul_add(qf, -prod);
            let sum = hi + prod;
            let bb = sum - hi;
            let sum_err = (hi - (sum - bb)) + (prod - bb);
            hi = sum;
            lo += prod_err + sum_err;
        }
        (hi, lo)
    }

    /// `X_j q + theta_j` for row `j`.
    #[inline]
    pub fn row_value(&self, j: usize, q: &[i64]) -> f64 {
        let (hi, lo) = self.row_value_dd(j, q);
        hi + lo
    }

    /// `(k, r)` with `X_j q + theta_j = k + r`, `k` an integer and `r` the
    /// signed fractional part in `[-1/2, 1/2)`.
    #[inline]
    pub fn row_split(&self, j: usize, q: &[i64]) -> (f64, f64) {
        let (hi, lo) = self.row_value_dd(j, q);
        let k = hi.round();
        let f = (hi - k) + lo;
        let r = signed_frac_scalar(f);
        (k + (f - r).round(), r)
    }

    /// `Xq + theta`.
    pub fn apply(&self, q: &[i64]) -> Vec<f64> {
        (0..self.m).map(|j| self.row_value(j, q)).collect()
    }
}

/// An element `(p, q)` of `Z^m x (Z^n \ {0})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub p: Vec<i64>,
    pub q: Vec<i64>,
}

impl LatticePoint {
    pub fn new(p: Vec<i64>, q: Vec<i64>) -> Result<Self> {
        if q.iter().all(|&v| v == 0) {
            return domain("lattice point requires q != 0");
        }
        Ok(Self { p, q })
    }

    /// `X_j q + p_j + theta_j` for every row.
    pub fn residual(&self, inst: &ApproxInstance) -> Vec<f64> {
        (0..inst.m())
            .map(|j| {
                let (hi, lo) = inst.row_value_dd(j, &self.q);
                (hi + self.p[j] as f64) + lo
            })
            .collect()
    }
}

/// The two approximation functionals evaluated at one `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quality {
    /// Distance of `Xq + theta` to the nearest integer point (sup norm).
    pub sup_dist: f64,
    /// Product of the coordinate-wise distances.
    pub mult_prod: f64,
    /// Set iff `sup_dist` is zero.
    pub exact_zero: bool,
}

impl Quality {
    /// Value minimized in standard mode: `sup_dist^m`.
    ///
    /// The power is taken by repeated multiplication so that it is directly
    /// comparable with `mult_prod` under floating-point rounding.
    pub fn standard_value(&self, m: usize) -> f64 {
        (0..m).fold(1.0, |acc, _| acc * self.sup_dist)
    }
}

/// Reduces each coordinate to `[-1/2, 1/2)`.
pub fn signed_frac(y: &[f64]) -> Result<Vec<f64>> {
    if y.iter().any(|v| !v.is_finite()) {
        return domain("signed_frac requires finite input");
    }
    Ok(y.iter().map(|&v| signed_frac_scalar(v)).collect())
}

#[inline]
pub(crate) fn signed_frac_scalar(v: f64) -> f64 {
    let mut r = v - v.round();
    if r >= 0.5 {
        r -= 1.0;
    } else if r < -0.5 {
        r += 1.0;
    }
    r
}

/// Sup-norm distance to the nearest integer point.
pub fn dist_nearest_int(y: &[f64]) -> Result<f64> {
    Ok(signed_frac(y)?
        .into_iter()
        .fold(0.0, |acc: f64, v| acc.max(v.abs())))
}

/// `prod max(1, |q_i|)`.
pub fn prod_plus(q: &[i64]) -> u128 {
    q.iter()
        .map(|&v| v.unsigned_abs().max(1) as u128)
        .product()
}

/// Sup norm of an integer vector.
pub fn sup_norm(q: &[i64]) -> u64 {
    q.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
}

/// Evaluates both quality functionals of `inst` at `q`.
pub fn residual_quality(inst: &ApproxInstance, q: &[i64]) -> Result<Quality> {
    if q.len() != inst.n() {
        return Err(Error::Dimension {
            expected: inst.n(),
            got: q.len(),
        });
    }
    if q.iter().all(|&v| v == 0) {
        return domain("residual_quality requires q != 0");
    }
    Ok(quality_unchecked(inst, q))
}

#[inline]
pub(crate) fn quality_unchecked(inst: &ApproxInstance, q: &[i64]) -> Quality {
    let mut sup: f64 = 0.0;
    let mut prod = 1.0;
    for j in 0..inst.m() {
        let mut a = inst.row_split(j, q).1.abs();
        if a < EXACT_ZERO_THRESHOLD {
            a = 0.0;
        }
        sup = sup.max(a);
        prod *= a;
    }
    Quality {
        sup_dist: sup,
        mult_prod: prod,
        exact_zero: sup == 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    /// `||q x||` for `x = a / 2^52` computed exactly in integers.
    fn exact_dist(a: u64, q: u64) -> f64 {
        let b: u128 = 1 << 52;
        let r = (a as u128 * q as u128) % b;
        (r.min(b - r)) as f64 / b as f64
    }

    #[test]
    fn fractional_part_survives_large_q() {
        let x = 1.618_033_988_749_895_f64;
        let a = (x * 2f64.powi(52)) as u64;
        assert_eq!(a as f64 / 2f64.powi(52), x);
        let inst = ApproxInstance::homogeneous(1, 1, vec![x]).unwrap();
        for q in [1u64, 987, 832_040, 1 << 30, (1 << 40) + 17] {
            let got = inst.row_split(0, &[q as i64]).1.abs();
            assert!((got - exact_dist(a, q)).abs() < 1e-15, "q = {q}");
            let naive = signed_frac_scalar(x * q as f64).abs();
            if q > 1 << 29 && !q.is_power_of_two() {
                assert!((naive - exact_dist(a, q)).abs() > 1e-12);
            }
        }
    }

    #[test]
    fn row_split_recombines() {
        let inst = ApproxInstance::new(2, 2, vec![0.3, -1.7, 2.25, 0.125], vec![0.4, -0.6]).unwrap();
        for q in [[3i64, -5], [1000, 7], [-123_456, 654_321]] {
            for j in 0..2 {
                let (k, r) = inst.row_split(j, &q);
                assert_eq!(k, k.round());
                assert!((-0.5..0.5).contains(&r));
                assert!((k + r - inst.row_value(j, &q)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn signed_frac_examples() {
        assert_eq!(signed_frac(&[0.75]).unwrap(), vec![-0.25]);
        assert_eq!(signed_frac(&[-0.5]).unwrap(), vec![-0.5]);
        assert_eq!(signed_frac(&[0.5]).unwrap(), vec![-0.5]);
        let r = signed_frac(&[2.3, -1.2]).unwrap();
        assert!(close(r[0], 0.3) && close(r[1], -0.2));
        assert!(signed_frac(&[f64::NAN]).is_err());
        assert!(signed_frac(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn dist_examples() {
        assert!(close(dist_nearest_int(&[0.75, 0.4]).unwrap(), 0.4));
        assert_eq!(dist_nearest_int(&[3.0, -7.0]).unwrap(), 0.0);
        assert_eq!(dist_nearest_int(&[0.5]).unwrap(), 0.5);
    }

    #[test]
    fn prod_plus_examples() {
        assert_eq!(prod_plus(&[0, 3, -2]), 6);
        assert_eq!(prod_plus(&[1]), 1);
        assert_eq!(prod_plus(&[-5]), 5);
    }

    #[test]
    fn residual_quality_examples() {
        let inst = ApproxInstance::homogeneous(1, 1, vec![0.5]).unwrap();
        let q = residual_quality(&inst, &[2]).unwrap();
        assert_eq!(q.sup_dist, 0.0);
        assert!(q.exact_zero);

        let inst = ApproxInstance::new(1, 1, vec![0.5], vec![0.25]).unwrap();
        let q = residual_quality(&inst, &[1]).unwrap();
        assert!(close(q.sup_dist, 0.25));

        let inst = ApproxInstance::homogeneous(2, 1, vec![0.3, 0.4]).unwrap();
        let q = residual_quality(&inst, &[1]).unwrap();
        assert!(close(q.mult_prod, 0.12));
        assert!(close(q.sup_dist, 0.4));
        assert!(!q.exact_zero);
    }

    #[test]
    fn residual_quality_rejects_zero_and_bad_length() {
        let inst = ApproxInstance::homogeneous(1, 2, vec![0.3, 0.4]).unwrap();
        assert!(matches!(
            residual_quality(&inst, &[0, 0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            residual_quality(&inst, &[1]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn instance_validation() {
        assert!(ApproxInstance::homogeneous(0, 1, vec![]).is_err());
        assert!(ApproxInstance::homogeneous(1, 2, vec![1.0]).is_err());
        assert!(ApproxInstance::new(1, 1, vec![f64::NAN], vec![0.0]).is_err());
        let t = ApproxInstance::homogeneous(2, 3, vec![1., 2., 3., 4., 5., 6.])
            .unwrap()
            .transpose();
        assert_eq!((t.m(), t.n()), (3, 2));
        assert_eq!(t.entries(), &[1., 4., 2., 5., 3., 6.]);
    }

    proptest! {
        #[test]
        fn signed_frac_is_idempotent_and_bounded(y in prop::collection::vec(-1e6f64..1e6, 1..4)) {
            let r = signed_frac(&y).unwrap();
            for (&a, &b) in r.iter().zip(&y) {
                prop_assert!((-0.5..0.5).contains(&a));
                let k = b - a;
                prop_assert!((k - k.round()).abs() < 1e-9);
            }
            prop_assert_eq!(signed_frac(&r).unwrap(), r.clone());
            let d = dist_nearest_int(&y).unwrap();
            prop_assert!((0.0..=0.5).contains(&d));
        }

        #[test]
        fn mult_prod_bounded_by_sup_power(
            m in 1usize..4,
            n in 1usize..4,
            seed in prop::collection::vec(-3.0f64..3.0, 16),
            qs in prop::collection::vec(-50i64..50, 3),
        ) {
            let x = seed[..m * n].to_vec();
            let theta = seed[9..9 + m].to_vec();
            let inst = ApproxInstance::new(m, n, x, theta).unwrap();
            let mut q = qs[..n].to_vec();
            if q.iter().all(|&v| v == 0) { q[0] = 1; }
            let qual = residual_quality(&inst, &q).unwrap();
            prop_assert!(qual.mult_prod <= qual.standard_value(m));
            prop_assert_eq!(qual.exact_zero, qual.sup_dist == 0.0);
        }

        #[test]
        fn prod_plus_bounded_by_sup_power(q in prop::collection::vec(-30i64..30, 1..4)) {
            prop_assume!(q.iter().any(|&v| v != 0));
            let s = sup_norm(&q) as u128;
            let bound = s.pow(q.len() as u32);
            let pp = prod_plus(&q);
            prop_assert!(pp <= bound);
            let all_equal = q.iter().all(|v| v.unsigned_abs() as u128 == s);
            prop_assert_eq!(pp == bound, all_equal);
        }
    }
}
