//! Exhaustive search for best standard and multiplicative approximations.
//!
//! The admissible region at scale `Q` is `{q != 0 : |q|^n <= Q}` in standard
//! mode and `{q != 0 : prod max(1, |q_i|) <= Q}` in multiplicative mode. Both
//! are split into slabs over the magnitude of the leading coordinate; each
//! slab is scanned in lexicographic order of `q` and results are merged by
//! the `(value, q)` key, so the outcome does not depend on how many slabs or
//! threads were used.

use std::cmp::Ordering;
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::residual::{prod_plus, quality_unchecked, sup_norm, ApproxInstance, Quality};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Standard,
    Multiplicative,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Standard => "standard",
            Mode::Multiplicative => "multiplicative",
        }
    }

    /// The quantity minimized in this mode.
    #[inline]
    pub fn value(self, quality: &Quality, m: usize) -> f64 {
        match self {
            Mode::Standard => quality.standard_value(m),
            Mode::Multiplicative => quality.mult_prod,
        }
    }
}

/// Minimizer of the mode's quality functional over the region at scale `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestApproximation {
    pub q_star: Vec<i64>,
    pub quality: Quality,
    pub scale: f64,
    pub mode: Mode,
    pub candidates_scanned: u64,
}

impl BestApproximation {
    /// `sup_dist^m` in standard mode, `mult_prod` in multiplicative mode.
    pub fn value(&self, m: usize) -> f64 {
        self.mode.value(&self.quality, m)
    }

    /// True when the minimum is an exact hit, i.e. the exponent is infinite.
    pub fn is_zero(&self, m: usize) -> bool {
        self.value(m) == 0.0
    }
}

/// Slab of the admissible region: all `q` with `lead_lo <= |q_1| <= lead_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRegion {
    pub lead_lo: u64,
    pub lead_hi: u64,
}

/// Largest integer `b` with `b^n <= scale`.
pub fn standard_radius(n: usize, scale: f64) -> u64 {
    let mut b = scale.powf(1.0 / n as f64).floor().max(0.0) as u64;
    let fits = |b: u64| (b as f64).powi(n as i32) <= scale;
    while fits(b + 1) {
        b += 1;
    }
    while b > 0 && !fits(b) {
        b -= 1;
    }
    b
}

fn lead_max(n: usize, scale: f64, mode: Mode) -> u64 {
    match mode {
        Mode::Standard => standard_radius(n, scale),
        Mode::Multiplicative => scale.floor() as u64,
    }
}

/// Splits the admissible region into at most `workers` contiguous slabs.
pub fn scan_partition(n: usize, scale: f64, workers: usize, mode: Mode) -> Vec<ScanRegion> {
    let hi = lead_max(n, scale, mode);
    let lo = if n == 1 { 1 } else { 0 };
    if hi < lo {
        return Vec::new();
    }
    let count = hi - lo + 1;
    let parts = (workers.max(1) as u64).min(count);
    let base = count / parts;
    let extra = count % parts;
    let mut out = Vec::with_capacity(parts as usize);
    let mut start = lo;
    for k in 0..parts {
        let len = base + u64::from(k < extra);
        out.push(ScanRegion {
            lead_lo: start,
            lead_hi: start + len - 1,
        });
        start += len;
    }
    out
}

#[derive(Clone, Copy)]
enum Bound {
    Radius(u64),
    Product(u128),
}

/// Visits every admissible `q` of `region` in lexicographic order.
///
/// With `symmetric` set only `q` whose first nonzero coordinate is positive
/// are visited.
fn for_each_in_region<F>(n: usize, bound: Bound, region: ScanRegion, symmetric: bool, f: &mut F)
where
    F: FnMut(&[i64]) -> ControlFlow<()>,
{
    let mut q = vec![0i64; n];
    let lead: Vec<i64> = {
        let hi = match bound {
            Bound::Radius(r) => region.lead_hi.min(r),
            Bound::Product(c) => region.lead_hi.min(c.min(u64::MAX as u128) as u64),
        };
        let lo = region.lead_lo;
        let mut v = Vec::new();
        if lo <= hi {
            if !symmetric {
                v.extend((lo.max(1)..=hi).rev().map(|a| -(a as i64)));
            }
            if lo == 0 {
                v.push(0);
            }
            v.extend((lo.max(1)..=hi).map(|a| a as i64));
        }
        v
    };
    for a in lead {
        q[0] = a;
        let used = a.unsigned_abs().max(1) as u128;
        if recurse(&mut q, 1, bound, used, symmetric && a == 0, a != 0, f).is_break() {
            return;
        }
    }
}

fn recurse<F>(
    q: &mut [i64],
    k: usize,
    bound: Bound,
    used: u128,
    canonical_pending: bool,
    nonzero: bool,
    f: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[i64]) -> ControlFlow<()>,
{
    let n = q.len();
    if k == n {
        return if nonzero { f(q) } else { ControlFlow::Continue(()) };
    }
    let r = match bound {
        Bound::Radius(r) => r,
        Bound::Product(c) => (c / used).min(u64::MAX as u128) as u64,
    } as i64;
    let lo = if canonical_pending { 0 } else { -r };
    for v in lo..=r {
        q[k] = v;
        let used_next = used * v.unsigned_abs().max(1) as u128;
        recurse(
            q,
            k + 1,
            bound,
            used_next,
            canonical_pending && v == 0,
            nonzero || v != 0,
            f,
        )?;
    }
    q[k] = 0;
    ControlFlow::Continue(())
}

#[derive(Clone)]
struct Candidate {
    value: f64,
    q: Vec<i64>,
    quality: Quality,
}

impl Candidate {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| self.q.cmp(&other.q))
    }
}

fn pick(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.key_cmp(&a) == Ordering::Less { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale >= 1.0) || !scale.is_finite() {
        return domain(format!("scale Q must be a finite real >= 1, got {scale}"));
    }
    Ok(())
}

fn bound_for(n: usize, scale: f64, mode: Mode) -> Bound {
    match mode {
        Mode::Standard => Bound::Radius(standard_radius(n, scale)),
        Mode::Multiplicative => Bound::Product(scale.floor() as u128),
    }
}

/// Best approximation in one mode at one scale, short-circuiting on an exact hit.
pub fn best_approximation(inst: &ApproxInstance, scale: f64, mode: Mode) -> Result<BestApproximation> {
    check_scale(scale)?;
    let n = inst.n();
    let m = inst.m();
    let symmetric = inst.is_homogeneous();
    let bound = bound_for(n, scale, mode);
    let regions = scan_partition(n, scale, rayon::current_num_threads(), mode);
    let (best, scanned) = regions
        .par_iter()
        .map(|&region| {
            let mut best: Option<Candidate> = None;
            let mut scanned = 0u64;
            for_each_in_region(n, bound, region, symmetric, &mut |q| {
                scanned += 1;
                let quality = quality_unchecked(inst, q);
                let value = mode.value(&quality, m);
                let better = best.as_ref().is_none_or(|b| value < b.value);
                if better {
                    best = Some(Candidate {
                        value,
                        q: q.to_vec(),
                        quality,
                    });
                }
                if value == 0.0 {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            });
            (best, scanned)
        })
        .reduce(|| (None, 0), |a, b| (pick(a.0, b.0), a.1 + b.1));
    let best = best.expect("admissible region is never empty for Q >= 1");
    Ok(BestApproximation {
        q_star: best.q,
        quality: best.quality,
        scale,
        mode,
        candidates_scanned: scanned,
    })
}

/// Best standard approximation: minimizes `||Xq + theta||` over `|q|^n <= Q`.
pub fn best_standard(inst: &ApproxInstance, scale: f64) -> Result<BestApproximation> {
    best_approximation(inst, scale, Mode::Standard)
}

/// Best multiplicative approximation: minimizes `prod |<Xq + theta>_j|` over `prod_plus(q) <= Q`.
pub fn best_multiplicative(inst: &ApproxInstance, scale: f64) -> Result<BestApproximation> {
    best_approximation(inst, scale, Mode::Multiplicative)
}

/// Best approximations at every scale of an increasing grid, from one scan.
///
/// Each entry equals what [`best_approximation`] returns at that scale, with
/// `candidates_scanned` counting the full admissible region.
pub fn best_over_grid(
    inst: &ApproxInstance,
    grid: &[f64],
    mode: Mode,
) -> Result<Vec<BestApproximation>> {
    if grid.is_empty() {
        return domain("scale grid is empty");
    }
    for &s in grid {
        check_scale(s)?;
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return domain("scale grid must be strictly increasing");
    }
    let n = inst.n();
    let m = inst.m();
    let symmetric = inst.is_homogeneous();
    let top = *grid.last().unwrap();
    // Height of q and per-level height caps.
    let caps: Vec<u128> = grid
        .iter()
        .map(|&s| match mode {
            Mode::Standard => standard_radius(n, s) as u128,
            Mode::Multiplicative => s.floor() as u128,
        })
        .collect();
    let height = |q: &[i64]| -> u128 {
        match mode {
            Mode::Standard => sup_norm(q) as u128,
            Mode::Multiplicative => prod_plus(q),
        }
    };
    let levels = grid.len();
    let bound = bound_for(n, top, mode);
    let regions = scan_partition(n, top, rayon::current_num_threads(), mode);
    type Acc = (Vec<Option<Candidate>>, Vec<u64>);
    let empty = || -> Acc { (vec![None; levels], vec![0; levels]) };
    let (per_level, counts) = regions
        .par_iter()
        .map(|&region| {
            let mut acc = empty();
            for_each_in_region(n, bound, region, symmetric, &mut |q| {
                let h = height(q);
                let level = caps.partition_point(|&c| c < h);
                if level < levels {
                    acc.1[level] += 1;
                    let quality = quality_unchecked(inst, q);
                    let value = mode.value(&quality, m);
                    let slot = &mut acc.0[level];
                    if slot.as_ref().is_none_or(|b| value < b.value) {
                        *slot = Some(Candidate {
                            value,
                            q: q.to_vec(),
                            quality,
                        });
                    }
                }
                ControlFlow::Continue(())
            });
            acc
        })
        .reduce(empty, |mut a, b| {
            for (k, (c, cnt)) in b.0.into_iter().zip(b.1).enumerate() {
                let cur = a.0[k].take();
                a.0[k] = pick(cur, c);
                a.1[k] += cnt;
            }
            a
        });
    let mut out = Vec::with_capacity(levels);
    let mut running: Option<Candidate> = None;
    let mut scanned = 0u64;
    for (k, (c, cnt)) in per_level.into_iter().zip(counts).enumerate() {
        running = pick(running, c);
        scanned += cnt;
        let best = running
            .clone()
            .expect("admissible region is never empty for Q >= 1");
        out.push(BestApproximation {
            q_star: best.q,
            quality: best.quality,
            scale: grid[k],
            mode,
            candidates_scanned: scanned,
        });
    }
    Ok(out)
}
