//! Empirical Diophantine exponents and transference reports.
//!
//! At scale `Q` the exponent is `e(Q) = -log v(Q) / log Q`, where `v(Q)` is
//! `sup_dist^m` of the best standard approximation or the `mult_prod` of the
//! best multiplicative one. The ordinary exponent is estimated by the maximum
//! of `e` over the tail of the grid and the uniform exponent by the minimum.

use serde::{Deserialize, Serialize};

use crate::enumeration::{best_over_grid, BestApproximation, Mode};
use crate::error::{domain, Result};
use crate::residual::ApproxInstance;

pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;

/// Default geometric grid `Q_k = 10 * 2^k` truncated at `q_max`.
pub fn default_grid(q_max: f64) -> Vec<f64> {
    std::iter::successors(Some(10.0f64), |q| Some(q * 2.0))
        .take_while(|&q| q <= q_max)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub scale: f64,
    /// Minimized quality value at this scale.
    pub value: f64,
    /// `e(Q)`; `+inf` once an exact hit was found.
    pub exponent: f64,
    pub q_star: Vec<i64>,
}

impl CurvePoint {
    fn from_best(b: &BestApproximation, m: usize) -> Self {
        let value = b.value(m);
        Self {
            scale: b.scale,
            value,
            exponent: exponent_of(value, b.scale),
            q_star: b.q_star.clone(),
        }
    }
}

/// `-ln(value) / ln(scale)`, infinite for a zero value.
pub fn exponent_of(value: f64, scale: f64) -> f64 {
    if value == 0.0 {
        f64::INFINITY
    } else {
        -value.ln() / scale.ln()
    }
}

/// The empirical exponent curve of `inst` over `grid`.
pub fn exponent_curve(inst: &ApproxInstance, grid: &[f64], mode: Mode) -> Result<Vec<CurvePoint>> {
    if grid.is_empty() {
        return domain("exponent grid is empty");
    }
    if grid[0] <= 1.0 {
        return domain("exponent grid scales must exceed 1");
    }
    let best = best_over_grid(inst, grid, mode)?;
    Ok(best
        .iter()
        .map(|b| CurvePoint::from_best(b, inst.m()))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub grid: Vec<f64>,
    pub curve: Vec<f64>,
    /// Tail maximum of the curve (ordinary exponent proxy).
    pub w_est: f64,
    /// Tail minimum of the curve (uniform exponent proxy).
    pub what_est: f64,
    pub tail_fraction: f64,
    pub mode: Mode,
}

impl ExponentEstimate {
    pub fn is_infinite(&self) -> bool {
        self.w_est.is_infinite()
    }
}

/// Summarizes a curve by its tail maximum and minimum.
pub fn estimate_exponents(
    curve: &[CurvePoint],
    tail_fraction: f64,
    mode: Mode,
) -> Result<ExponentEstimate> {
    if curve.is_empty() {
        return domain("cannot estimate exponents of an empty curve");
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return domain(format!("tail_fraction must lie in (0, 1], got {tail_fraction}"));
    }
    let len = curve.len();
    let take = ((len as f64 * tail_fraction).ceil() as usize).clamp(1, len);
    let tail = &curve[len - take..];
    let (w_est, what_est) = if curve.iter().any(|p| p.exponent.is_infinite()) {
        (f64::INFINITY, f64::INFINITY)
    } else {
        tail.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), p| {
            (hi.max(p.exponent), lo.min(p.exponent))
        })
    };
    Ok(ExponentEstimate {
        grid: curve.iter().map(|p| p.scale).collect(),
        curve: curve.iter().map(|p| p.exponent).collect(),
        w_est,
        what_est,
        tail_fraction,
        mode,
    })
}

/// Tolerances used by [`transference_report`]. They are echoed into the report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferenceTolerances {
    pub tail_fraction: f64,
    /// Slack allowed on the Dirichlet and Bugeaud-Laurent lower bounds.
    pub bound_tol: f64,
    /// Width of the "exponent is approximately 1" band in the Dyson check.
    pub dyson_band: f64,
}

impl Default for TransferenceTolerances {
    fn default() -> Self {
        Self {
            tail_fraction: DEFAULT_TAIL_FRACTION,
            bound_tol: 0.15,
            dyson_band: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    /// `w(X) >= 1`.
    Dirichlet,
    /// `e_mult(Q) >= e_std(Q)` at every scale, exactly.
    MultDominates,
    /// `w(X) = 1` iff `w(tX) = 1`.
    Dyson,
    /// `w(X, theta) >= 1 / what(tX)`.
    BugeaudLaurentOrdinary,
    /// `what(X, theta) >= 1 / w(tX)`.
    BugeaudLaurentUniform,
    /// `what(X) >= 1`.
    UniformDirichlet,
    /// `w(X) >= what(X)`.
    UniformBelowOrdinary,
}

impl CheckId {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::Dirichlet => "dirichlet",
            CheckId::MultDominates => "mult_dominates",
            CheckId::Dyson => "dyson",
            CheckId::BugeaudLaurentOrdinary => "bl_ordinary",
            CheckId::BugeaudLaurentUniform => "bl_uniform",
            CheckId::UniformDirichlet => "uniform_dirichlet",
            CheckId::UniformBelowOrdinary => "uniform_below_ordinary",
        }
    }
}

/// One inequality check; satisfied iff `slack >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: CheckId,
    pub slack: f64,
}

impl Check {
    pub fn satisfied(&self) -> bool {
        self.slack >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferenceReport {
    pub w_hom: ExponentEstimate,
    pub w_mult_hom: ExponentEstimate,
    pub w_transpose: ExponentEstimate,
    pub w_inhom: ExponentEstimate,
    pub tolerances: TransferenceTolerances,
    pub checks: Vec<Check>,
}

impl TransferenceReport {
    pub fn what_hom(&self) -> f64 {
        self.w_hom.what_est
    }

    pub fn what_transpose(&self) -> f64 {
        self.w_transpose.what_est
    }

    pub fn what_inhom(&self) -> f64 {
        self.w_inhom.what_est
    }

    pub fn check(&self, id: CheckId) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn all_satisfied(&self) -> bool {
        self.checks.iter().all(Check::satisfied)
    }
}

/// `a - b` with `inf - inf` read as zero slack.
fn diff(a: f64, b: f64) -> f64 {
    if a.is_infinite() && b.is_infinite() && a.signum() == b.signum() {
        0.0
    } else {
        a - b
    }
}

fn recip(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

/// Pointwise slack of `e_mult(Q) >= e_std(Q)`: the minimum difference over the grid.
pub fn mult_domination_slack(standard: &[CurvePoint], multiplicative: &[CurvePoint]) -> f64 {
    standard
        .iter()
        .zip(multiplicative)
        .map(|(s, m)| diff(m.exponent, s.exponent))
        .fold(f64::INFINITY, f64::min)
}

fn dyson_slack(w: f64, w_t: f64, band: f64) -> f64 {
    let d = (w - 1.0).abs();
    let d_t = (w_t - 1.0).abs();
    match (d <= band, d_t <= band) {
        (true, true) => band - d.max(d_t),
        (false, false) => diff(d.min(d_t), band),
        _ => -(d - band).abs().min((d_t - band).abs()),
    }
}

/// Estimates exponents of `X`, `tX` and `(X, theta)` and checks the classical
/// transference inequalities between them.
pub fn transference_report(
    inst: &ApproxInstance,
    grid: &[f64],
    tol: TransferenceTolerances,
) -> Result<TransferenceReport> {
    let hom = inst.with_theta(vec![0.0; inst.m()])?;
    let transpose = inst.transpose();
    let std_curve = exponent_curve(&hom, grid, Mode::Standard)?;
    let mult_curve = exponent_curve(&hom, grid, Mode::Multiplicative)?;
    let t_curve = exponent_curve(&transpose, grid, Mode::Standard)?;
    let inhom_curve = exponent_curve(inst, grid, Mode::Standard)?;

    let w_hom = estimate_exponents(&std_curve, tol.tail_fraction, Mode::Standard)?;
    let w_mult_hom = estimate_exponents(&mult_curve, tol.tail_fraction, Mode::Multiplicative)?;
    let w_transpose = estimate_exponents(&t_curve, tol.tail_fraction, Mode::Standard)?;
    let w_inhom = estimate_exponents(&inhom_curve, tol.tail_fraction, Mode::Standard)?;

    let checks = vec![
        Check {
            id: CheckId::Dirichlet,
            slack: diff(w_hom.w_est, 1.0 - tol.bound_tol),
        },
        Check {
            id: CheckId::MultDominates,
            slack: mult_domination_slack(&std_curve, &mult_curve),
        },
        Check {
            id: CheckId::Dyson,
            slack: dyson_slack(w_hom.w_est, w_transpose.w_est, tol.dyson_band),
        },
        Check {
            id: CheckId::BugeaudLaurentOrdinary,
            slack: diff(w_inhom.w_est, recip(w_transpose.what_est) - tol.bound_tol),
        },
        Check {
            id: CheckId::BugeaudLaurentUniform,
            slack: diff(w_inhom.what_est, recip(w_transpose.w_est) - tol.bound_tol),
        },
        Check {
            id: CheckId::UniformDirichlet,
            slack: diff(w_hom.what_est, 1.0 - tol.bound_tol),
        },
        Check {
            id: CheckId::UniformBelowOrdinary,
            slack: diff(w_hom.w_est, w_hom.what_est),
        },
    ];
    Ok(TransferenceReport {
        w_hom,
        w_mult_hom,
        w_transpose,
        w_inhom,
        tolerances: tol,
        checks,
    })
}
