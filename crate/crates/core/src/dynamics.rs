//! Diagonal flows on affine lattices and the solution-transport maps between
//! Diophantine inequalities and shrinking neighbourhoods under the flow.
//!
//! A flow vector `t` is built from dyadic data `(s, l)` as
//! `t = (s_1 - z, .., s_m - z, l_1 + z, .., l_n + z)` with
//! `z = (sum(s) - sum(l)) / (m + n)`. The flow `g_t` scales the first `m`
//! coordinates by `2^{t_j}` and the last `n` by `2^{-t_{m+i}}`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::residual::{prod_plus, ApproxInstance, LatticePoint};

/// Tolerance for the linear identities satisfied by every flow vector.
pub const FLOW_TOL: f64 = 1e-12;

/// Largest candidate box `min_g_norm` will enumerate.
pub const MAX_CANDIDATES: u64 = 50_000_000;

/// How the index set is generated: free dyadic vectors, or constant ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `s` in `Z_+^m`, `l` in `Z_+^n`.
    General,
    /// `s = (s, .., s)`, `l = (l, .., l)` for scalars `s`, `l`.
    Primed,
}

/// Admissibility predicate restricting which `(s, l)` enter the index set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Admissibility {
    /// `sum(s) >= sigma(t)`, as printed.
    Literal,
    /// `sum(s) >= sum(l)`, the condition the forward transport map produces.
    Step1,
}

impl Admissibility {
    pub fn as_str(self) -> &'static str {
        match self {
            Admissibility::Literal => "literal",
            Admissibility::Step1 => "step1",
        }
    }

    fn admits(self, m: usize, n: usize, sum_s: i64, sum_l: i64) -> bool {
        let (m, n) = (m as i64, n as i64);
        match self {
            // sigma = 2 (n S + m L) / (m + n)
            Admissibility::Literal => (m + n) * sum_s >= 2 * (n * sum_s + m * sum_l),
            Admissibility::Step1 => sum_s >= sum_l,
        }
    }
}

/// An element of the index set with its derived data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowVector {
    pub m: usize,
    pub n: usize,
    pub t: Vec<f64>,
    pub sigma: f64,
    pub zeta: f64,
    pub s: Vec<i64>,
    pub l: Vec<i64>,
    pub variant: Variant,
}

impl FlowVector {
    fn build(s: Vec<i64>, l: Vec<i64>, variant: Variant) -> Self {
        let (m, n) = (s.len(), l.len());
        let sum_s: i64 = s.iter().sum();
        let sum_l: i64 = l.iter().sum();
        let zeta = (sum_s - sum_l) as f64 / (m + n) as f64;
        let t: Vec<f64> = s
            .iter()
            .map(|&sj| sj as f64 - zeta)
            .chain(l.iter().map(|&li| li as f64 + zeta))
            .collect();
        let sigma = t.iter().sum();
        Self {
            m,
            n,
            t,
            sigma,
            zeta,
            s,
            l,
            variant,
        }
    }

    pub fn sum_s(&self) -> i64 {
        self.s.iter().sum()
    }

    pub fn sum_l(&self) -> i64 {
        self.l.iter().sum()
    }

    /// Exact key: `(m + n) * t_k` is an integer for every coordinate.
    fn key(&self) -> Vec<i64> {
        let k = (self.m + self.n) as i64;
        let diff = self.sum_s() - self.sum_l();
        self.s
            .iter()
            .map(|&sj| k * sj - diff)
            .chain(self.l.iter().map(|&li| k * li + diff))
            .collect()
    }

    /// Diagonal entries of `g_t`.
    pub fn diagonal(&self) -> Vec<f64> {
        self.t
            .iter()
            .enumerate()
            .map(|(k, &tk)| if k < self.m { tk.exp2() } else { (-tk).exp2() })
            .collect()
    }

    /// The name of the first violated identity, if any, at tolerance `tol`.
    pub fn invariant_violation(&self, tol: f64) -> Option<&'static str> {
        let (m, n) = (self.m as f64, self.n as f64);
        let sum_s = self.sum_s() as f64;
        let sum_l = self.sum_l() as f64;
        let head: f64 = self.t[..self.m].iter().sum();
        let tail: f64 = self.t[self.m..].iter().sum();
        let half = 0.5 * self.sigma;
        if (head - tail).abs() > tol {
            return Some("balance: sum of expanding exponents equals sum of contracting ones");
        }
        if (half - (sum_s - m * self.zeta)).abs() > tol || (half - (sum_l + n * self.zeta)).abs() > tol {
            return Some("half sigma equals sum(s) - m zeta and sum(l) + n zeta");
        }
        if sum_l > half + tol || half > sum_s + tol {
            return Some("sum(l) <= sigma / 2 <= sum(s)");
        }
        if self.sigma + tol < (sum_s + sum_l) / (m + n) {
            return Some("sigma >= (sum(s) + sum(l)) / (m + n)");
        }
        if self.t[self.m..].iter().any(|&x| x < -tol) {
            return Some("contracting exponents are non-negative");
        }
        None
    }
}

/// Flow vector of the dyadic data `(s, l)`.
pub fn flow_from_sl(s: &[i64], l: &[i64]) -> Result<FlowVector> {
    if s.is_empty() || l.is_empty() {
        return domain("flow vector needs m >= 1 and n >= 1");
    }
    if s.iter().chain(l).any(|&v| v < 0) {
        return domain("dyadic data (s, l) must be non-negative");
    }
    Ok(FlowVector::build(s.to_vec(), l.to_vec(), Variant::General))
}

/// Flow vector of constant dyadic data `s = (s, .., s)`, `l = (l, .., l)`.
pub fn flow_from_sl_primed(m: usize, n: usize, s: i64, l: i64) -> Result<FlowVector> {
    if m == 0 || n == 0 {
        return domain("flow vector needs m >= 1 and n >= 1");
    }
    if s < 0 || l < 0 {
        return domain("dyadic data (s, l) must be non-negative");
    }
    Ok(FlowVector::build(vec![s; m], vec![l; n], Variant::Primed))
}

/// Calls `f` for every composition of `total` into `parts` non-negative parts, in lexicographic order.
fn compositions(total: i64, parts: usize, f: &mut impl FnMut(&[i64])) {
    fn go(rest: i64, k: usize, buf: &mut Vec<i64>, parts: usize, f: &mut impl FnMut(&[i64])) {
        if k + 1 == parts {
            buf.push(rest);
            f(buf);
            buf.pop();
            return;
        }
        for v in 0..=rest {
            buf.push(v);
            go(rest - v, k + 1, buf, parts, f);
            buf.pop();
        }
    }
    go(total, 0, &mut Vec::with_capacity(parts), parts, f);
}

/// All flow vectors of the index set with `sigma(t) < v`, ordered by `sigma`
/// and then lexicographically by `t`.
pub fn enumerate_t(
    m: usize,
    n: usize,
    v: f64,
    variant: Variant,
    admissibility: Admissibility,
) -> Result<Vec<FlowVector>> {
    if m == 0 || n == 0 {
        return domain("flow vector needs m >= 1 and n >= 1");
    }
    if !(v > 0.0) {
        return Ok(Vec::new());
    }
    let (mi, ni) = (m as i64, n as i64);
    // sigma < v  <=>  n S + m L < v (m + n) / 2
    let limit = v * (m + n) as f64 / 2.0;
    let below = |sum_s: i64, sum_l: i64| ((ni * sum_s + mi * sum_l) as f64) < limit;
    let mut found: BTreeMap<(i64, Vec<i64>), FlowVector> = BTreeMap::new();
    let mut insert = |fv: FlowVector| {
        let key = fv.key();
        let sigma_key: i64 = key.iter().sum();
        found.entry((sigma_key, key)).or_insert(fv);
    };
    match variant {
        Variant::General => {
            let mut sum_s = 0;
            while below(sum_s, 0) {
                let mut sum_l = 0;
                while below(sum_s, sum_l) {
                    if admissibility.admits(m, n, sum_s, sum_l) {
                        compositions(sum_s, m, &mut |s| {
                            compositions(sum_l, n, &mut |l| {
                                insert(FlowVector::build(s.to_vec(), l.to_vec(), Variant::General));
                            });
                        });
                    }
                    sum_l += 1;
                }
                sum_s += 1;
            }
        }
        Variant::Primed => {
            let mut s = 0;
            while below(mi * s, 0) {
                let mut l = 0;
                while below(mi * s, ni * l) {
                    if admissibility.admits(m, n, mi * s, ni * l) {
                        insert(FlowVector::build(vec![s; m], vec![l; n], Variant::Primed));
                    }
                    l += 1;
                }
                s += 1;
            }
        }
    }
    Ok(found.into_values().collect())
}

fn check_dims(inst: &ApproxInstance, t: &FlowVector) -> Result<()> {
    if t.m != inst.m() || t.n != inst.n() {
        return Err(Error::Dimension {
            expected: inst.m() + inst.n(),
            got: t.m + t.n,
        });
    }
    Ok(())
}

/// `g_t M_X^theta alpha`.
pub fn g_apply(inst: &ApproxInstance, t: &FlowVector, alpha: &LatticePoint) -> Result<Vec<f64>> {
    check_dims(inst, t)?;
    if alpha.p.len() != inst.m() || alpha.q.len() != inst.n() {
        return Err(Error::Dimension {
            expected: inst.m() + inst.n(),
            got: alpha.p.len() + alpha.q.len(),
        });
    }
    Ok(g_apply_unchecked(inst, t, alpha))
}

fn g_apply_unchecked(inst: &ApproxInstance, t: &FlowVector, alpha: &LatticePoint) -> Vec<f64> {
    let m = inst.m();
    alpha
        .residual(inst)
        .into_iter()
        .enumerate()
        .map(|(j, r)| t.t[j].exp2() * r)
        .chain(
            alpha
                .q
                .iter()
                .enumerate()
                .map(|(i, &qi)| (-t.t[m + i]).exp2() * qi as f64),
        )
        .collect()
}

/// Sup norm of `g_t M_X^theta alpha`.
pub fn g_norm(inst: &ApproxInstance, t: &FlowVector, alpha: &LatticePoint) -> Result<f64> {
    Ok(sup(&g_apply(inst, t, alpha)?))
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
}

/// `2^{-eta sigma(t)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFunction {
    eta: f64,
}

impl ScalingFunction {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return domain(format!("eta must be a positive real, got {eta}"));
        }
        Ok(Self { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn at(&self, t: &FlowVector) -> f64 {
        (-self.eta * t.sigma).exp2()
    }
}

/// A lattice point whose flowed image is shorter than `epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipWitness {
    pub t: FlowVector,
    pub alpha: LatticePoint,
    pub value: f64,
    pub epsilon: f64,
}

/// Largest integer strictly below `x` (for `x > 0`), floored at zero.
fn strict_floor(x: f64) -> u64 {
    let f = x.floor();
    let r = if f == x { f - 1.0 } else { f };
    r.max(0.0) as u64
}

/// Searches `A` for the shortest `g_t M_X^theta alpha`; returns it if shorter than `epsilon`.
///
/// Only `|q_i| < 2^{t_{m+i}} epsilon` can qualify, and for fixed `q` each
/// `p_j` is chosen by rounding, since it enters a single coordinate. Ties go
/// to the lexicographically first `q`, taken with its first nonzero entry
/// positive when `theta = 0`.
pub fn min_g_norm(
    inst: &ApproxInstance,
    t: &FlowVector,
    epsilon: f64,
) -> Result<Option<MembershipWitness>> {
    check_dims(inst, t)?;
    if !(epsilon > 0.0) {
        return domain(format!("epsilon must be positive, got {epsilon}"));
    }
    let (m, n) = (inst.m(), inst.n());
    let radii: Vec<i64> = (0..n)
        .map(|i| strict_floor(t.t[m + i].exp2() * epsilon) as i64)
        .collect();
    let count = radii
        .iter()
        .try_fold(1u64, |acc, &r| acc.checked_mul(2 * r as u64 + 1));
    match count {
        Some(c) if c <= MAX_CANDIDATES => {}
        _ => return domain("candidate box for min_g_norm is too large"),
    }
    let scale_p: Vec<f64> = t.t[..m].iter().map(|x| x.exp2()).collect();
    let scale_q: Vec<f64> = t.t[m..].iter().map(|x| (-x).exp2()).collect();
    let lo: Vec<i64> = radii.iter().map(|r| -r).collect();
    let symmetric = inst.is_homogeneous();
    let mut best: Option<(f64, Vec<i64>, Vec<i64>)> = None;
    for_each_box(&lo, &radii, &mut |q| {
        // alpha and -alpha have the same norm when theta = 0
        match q.iter().find(|&&v| v != 0) {
            None => return,
            Some(&v) if symmetric && v < 0 => return,
            _ => {}
        }
        let mut value: f64 = 0.0;
        for (i, &qi) in q.iter().enumerate() {
            value = value.max(scale_q[i] * (qi as f64).abs());
        }
        let mut p = Vec::with_capacity(m);
        for j in 0..m {
            let (k, r) = inst.row_split(j, q);
            value = value.max(scale_p[j] * r.abs());
            p.push(-k as i64);
        }
        if value < epsilon && best.as_ref().is_none_or(|(bv, _, _)| value < *bv) {
            best = Some((value, p, q.to_vec()));
        }
    });
    Ok(best.map(|(value, p, q)| MembershipWitness {
        t: t.clone(),
        alpha: LatticePoint { p, q },
        value,
        epsilon,
    }))
}

/// Calls `f` for every integer vector in the box `lo..=hi`, lexicographically.
fn for_each_box(lo: &[i64], hi: &[i64], f: &mut impl FnMut(&[i64])) {
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return;
    }
    let mut v = lo.to_vec();
    loop {
        f(&v);
        let mut k = v.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if v[k] < hi[k] {
                v[k] += 1;
                break;
            }
            v[k] = lo[k];
        }
    }
}

/// Exhaustive membership oracle over every `(p, q)` in a box that contains all
/// candidates; no rounding shortcut. Returns the smallest value found below
/// `epsilon`.
pub fn brute_force_membership(
    inst: &ApproxInstance,
    t: &FlowVector,
    epsilon: f64,
) -> Result<Option<(f64, LatticePoint)>> {
    check_dims(inst, t)?;
    let (m, n) = (inst.m(), inst.n());
    let q_hi: Vec<i64> = (0..n)
        .map(|i| (t.t[m + i].exp2() * epsilon).ceil() as i64)
        .collect();
    let q_lo: Vec<i64> = q_hi.iter().map(|r| -r).collect();
    let mut best: Option<(f64, LatticePoint)> = None;
    for_each_box(&q_lo, &q_hi, &mut |q| {
        if q.iter().all(|&v| v == 0) {
            return;
        }
        let (p_lo, p_hi): (Vec<i64>, Vec<i64>) = (0..m)
            .map(|j| {
                let y = inst.row_value(j, q);
                let w = epsilon * (-t.t[j]).exp2();
                ((-y - w).floor() as i64 - 1, (-y + w).ceil() as i64 + 1)
            })
            .unzip();
        for_each_box(&p_lo, &p_hi, &mut |p| {
            let alpha = LatticePoint {
                p: p.to_vec(),
                q: q.to_vec(),
            };
            let value = sup(&g_apply_unchecked(inst, t, &alpha));
            if value < epsilon && best.as_ref().is_none_or(|(bv, _)| value < *bv) {
                best = Some((value, alpha));
            }
        });
    });
    Ok(best)
}

/// Witnesses `X in Delta_t(psi_t)` for every `t` of the index set with `sigma(t) < v`.
pub fn lambda_membership_scan(
    inst: &ApproxInstance,
    eta: f64,
    v: f64,
    variant: Variant,
    admissibility: Admissibility,
) -> Result<Vec<MembershipWitness>> {
    let psi = ScalingFunction::new(eta)?;
    let ts = enumerate_t(inst.m(), inst.n(), v, variant, admissibility)?;
    let found: Result<Vec<Option<MembershipWitness>>> = ts
        .par_iter()
        .map(|t| min_g_norm(inst, t, psi.at(t)))
        .collect();
    Ok(found?.into_iter().flatten().collect())
}

/// Result of transporting a solution of the Diophantine system to the flow side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step1Outcome {
    pub flow: FlowVector,
    pub eta0: f64,
    /// `sup |g_t M_X^theta alpha|`.
    pub flow_norm: f64,
    /// `sum(s) - sum(l) > eps * sum(l)`.
    pub gap_holds: bool,
    /// `flow_norm < 2 * 2^{-zeta}`.
    pub norm_bound_holds: bool,
    /// `zeta > eta0 * sigma`.
    pub zeta_bound_holds: bool,
    pub certified: bool,
}

/// Unique `s >= 0` with `2^{-s} <= x < 2^{-s+1}`, for `0 < x < 1`.
fn dyadic_level(x: f64) -> i64 {
    let mut s = (-x.log2()).ceil() as i64;
    while (-(s as f64)).exp2() > x {
        s += 1;
    }
    while (-(s as f64) + 1.0).exp2() <= x {
        s -= 1;
    }
    s
}

/// Unique `l >= 0` with `2^l <= a < 2^{l+1}`, for `a >= 1`.
fn bit_level(a: u64) -> i64 {
    63 - a.max(1).leading_zeros() as i64
}

/// Forward transport: a solution `alpha` of the multiplicative system at
/// `(Q, eps)` yields a flow vector `t` at which `alpha` is short.
pub fn step1_forward(
    inst: &ApproxInstance,
    scale: f64,
    eps: f64,
    alpha: &LatticePoint,
) -> Result<Step1Outcome> {
    let (m, n) = (inst.m(), inst.n());
    if alpha.p.len() != m || alpha.q.len() != n {
        return Err(Error::Dimension {
            expected: m + n,
            got: alpha.p.len() + alpha.q.len(),
        });
    }
    if !(scale > 1.0) || !(eps > 0.0) {
        return domain("step1_forward needs Q > 1 and eps > 0");
    }
    if alpha.q.iter().all(|&v| v == 0) {
        return domain("alpha must have q != 0");
    }
    let r = alpha.residual(inst);
    let sup_r = sup(&r);
    if sup_r > 0.5 {
        return Err(Error::Precondition {
            condition: "|Xq + p + theta| <= 1/2",
            detail: format!("sup residual {sup_r}"),
        });
    }
    let threshold = scale.powf(-(1.0 + eps));
    let prod: f64 = r.iter().map(|v| v.abs()).product();
    if !(prod < threshold) {
        return Err(Error::Precondition {
            condition: "prod |Xq + p + theta| < Q^-(1+eps)",
            detail: format!("product {prod} vs {threshold}"),
        });
    }
    let height = prod_plus(&alpha.q);
    if height as f64 > scale {
        return Err(Error::Precondition {
            condition: "prod_plus(q) <= Q",
            detail: format!("prod_plus(q) = {height} > Q = {scale}"),
        });
    }
    let s: Vec<i64> = r
        .iter()
        .map(|&rj| dyadic_level(rj.abs().max(threshold)))
        .collect();
    let l: Vec<i64> = alpha.q.iter().map(|qi| bit_level(qi.unsigned_abs())).collect();
    let flow = flow_from_sl(&s, &l)?;
    let eta0 = eps.min(1.0) / (4 * (m + n)) as f64;
    let flow_norm = sup(&g_apply_unchecked(inst, &flow, alpha));
    let gap_holds = (flow.sum_s() - flow.sum_l()) as f64 > eps * flow.sum_l() as f64;
    let norm_bound_holds = flow_norm < 2.0 * (-flow.zeta).exp2();
    let zeta_bound_holds = flow.zeta > eta0 * flow.sigma;
    Ok(Step1Outcome {
        certified: gap_holds && norm_bound_holds && zeta_bound_holds,
        flow,
        eta0,
        flow_norm,
        gap_holds,
        norm_bound_holds,
        zeta_bound_holds,
    })
}

/// Result of transporting a short flowed lattice point back to a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step2Outcome {
    /// `2^{sigma / 2}`.
    pub scale: f64,
    /// `2 m eta`.
    pub eps: f64,
    pub residual_product: f64,
    pub height: u128,
    /// `prod |Xq + p + theta| < 2^{-m eta sigma - sigma / 2}`.
    pub product_bound_holds: bool,
    /// `prod_plus(q) < 2^{sigma / 2}`.
    pub height_bound_holds: bool,
    pub certified: bool,
}

/// Backward transport: `|g_t M_X^theta alpha| < 2^{-eta sigma}` yields a
/// solution of the multiplicative system at `Q = 2^{sigma/2}`, `eps = 2 m eta`.
pub fn step2_backward(
    inst: &ApproxInstance,
    t: &FlowVector,
    eta: f64,
    alpha: &LatticePoint,
) -> Result<Step2Outcome> {
    let psi = ScalingFunction::new(eta)?;
    let norm = g_norm(inst, t, alpha)?;
    let target = psi.at(t);
    if !(norm < target) {
        return Err(Error::Precondition {
            condition: "|g_t M_X^theta alpha| < 2^(-eta sigma)",
            detail: format!("norm {norm} vs {target}"),
        });
    }
    let m = inst.m() as f64;
    let residual_product: f64 = alpha.residual(inst).iter().map(|v| v.abs()).product();
    let height = prod_plus(&alpha.q);
    let product_bound_holds = residual_product < (-m * eta * t.sigma - t.sigma / 2.0).exp2();
    let height_bound_holds = (height as f64) < (t.sigma / 2.0).exp2();
    Ok(Step2Outcome {
        scale: (t.sigma / 2.0).exp2(),
        eps: 2.0 * m * eta,
        residual_product,
        height,
        product_bound_holds,
        height_bound_holds,
        certified: product_bound_holds && height_bound_holds,
    })
}
