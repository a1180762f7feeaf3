//! Arclength measure on monotone parametric curves and the contracting
//! certificate for point neighbourhoods in `R^{n x 1}`.
//!
//! Every component of a [`CurveModel`] satisfies `1/kappa <= |g_i'| <= kappa`
//! on its interval, so each component is strictly monotone. Preimages of
//! boxes and of balls centred on the curve are therefore intervals, found by
//! bisection.

use serde::{Deserialize, Serialize};

use super::quadrature::{integrate, QuadResult, DEFAULT_REL_TOL};
use super::{NeighborhoodSpec, Plane};
use crate::error::{domain, Error, Result};

const BISECT_ITERS: usize = 200;
const KAPPA_SAMPLES: usize = 4096;

pub trait CurveModel: Sync {
    /// Number of components.
    fn dim(&self) -> usize;
    fn interval(&self) -> (f64, f64);
    fn kappa(&self) -> f64;
    fn eval(&self, x: f64) -> Vec<f64>;
    fn deriv(&self, x: f64) -> Vec<f64>;

    /// `|g'(x)|_2`.
    fn speed(&self, x: f64) -> f64 {
        self.deriv(x).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Arclength of `g([a, b])`.
    fn arclength(&self, a: f64, b: f64) -> Result<QuadResult> {
        integrate(|x| self.speed(x), a, b, DEFAULT_REL_TOL)
    }

    /// Radius below which no box neighbourhood contains the whole curve.
    fn r0(&self) -> f64 {
        let (lo, hi) = self.interval();
        (hi - lo) / (2.0 * self.kappa())
    }
}

/// A curve with polynomial components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyCurve {
    /// Ascending coefficients of each component.
    coeffs: Vec<Vec<f64>>,
    lo: f64,
    hi: f64,
    kappa: f64,
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc.mul_add(x, a))
}

fn horner_deriv(c: &[f64], x: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &a)| acc.mul_add(x, k as f64 * a))
}

impl PolyCurve {
    /// Validates the derivative bounds on a dense grid of the interval.
    pub fn new(coeffs: Vec<Vec<f64>>, lo: f64, hi: f64, kappa: f64) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(Vec::is_empty) {
            return domain("curve needs at least one non-empty component");
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return domain(format!("invalid parameter interval [{lo}, {hi}]"));
        }
        if !(kappa > 1.0) {
            return domain(format!("kappa must exceed 1, got {kappa}"));
        }
        let curve = Self {
            coeffs,
            lo,
            hi,
            kappa,
        };
        for k in 0..=KAPPA_SAMPLES {
            let x = lo + (hi - lo) * k as f64 / KAPPA_SAMPLES as f64;
            for d in curve.deriv(x) {
                let a = d.abs();
                if a < 1.0 / kappa - 1e-12 || a > kappa + 1e-12 {
                    return domain(format!(
                        "derivative {d} at x = {x} violates 1/kappa <= |g_i'| <= kappa with kappa = {kappa}"
                    ));
                }
            }
        }
        Ok(curve)
    }

    /// `x -> (x, x^2, .., x^degree)` on `[lo, hi]`.
    pub fn veronese(degree: usize, lo: f64, hi: f64, kappa: f64) -> Result<Self> {
        let coeffs = (1..=degree)
            .map(|k| {
                let mut c = vec![0.0; k + 1];
                c[k] = 1.0;
                c
            })
            .collect();
        Self::new(coeffs, lo, hi, kappa)
    }
}

impl CurveModel for PolyCurve {
    fn dim(&self) -> usize {
        self.coeffs.len()
    }

    fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn kappa(&self) -> f64 {
        self.kappa
    }

    fn eval(&self, x: f64) -> Vec<f64> {
        self.coeffs.iter().map(|c| horner(c, x)).collect()
    }

    fn deriv(&self, x: f64) -> Vec<f64> {
        self.coeffs.iter().map(|c| horner_deriv(c, x)).collect()
    }
}

/// Boundary of `{x : pred(x)}` between `inside` (satisfies) and `outside` (fails).
fn bisect(mut inside: f64, mut outside: f64, pred: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if pred(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// `{x in [lo, hi] : |h(x)| < c}` for monotone `h`, as a closed interval.
fn monotone_sublevel(h: impl Fn(f64) -> f64, lo: f64, hi: f64, c: f64) -> Option<(f64, f64)> {
    let inside = |x: f64| h(x).abs() < c;
    let seed = find_inside(&h, lo, hi, c)?;
    let left = if inside(lo) { lo } else { bisect(seed, lo, inside) };
    let right = if inside(hi) { hi } else { bisect(seed, hi, inside) };
    (left < right).then_some((left, right))
}

/// Some point of `[lo, hi]` where `|h| < c`, for monotone `h`.
fn find_inside(h: &impl Fn(f64) -> f64, lo: f64, hi: f64, c: f64) -> Option<f64> {
    let (h_lo, h_hi) = (h(lo), h(hi));
    if h_lo.abs() < c {
        return Some(lo);
    }
    if h_hi.abs() < c {
        return Some(hi);
    }
    // both ends outside the band: it is crossed only if they sit on opposite sides
    if (h_lo >= c) == (h_hi >= c) {
        return None;
    }
    let lo_above = h_lo >= c;
    let (mut a, mut b) = (lo, hi);
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (a + b);
        let v = h(mid);
        if v.abs() < c {
            return Some(mid);
        }
        if (v >= c) == lo_above {
            a = mid;
        } else {
            b = mid;
        }
    }
    None
}

/// Parameter interval of `{x : g(x) in L^{(w)}_{a,b}}` for the point-plane `(a, b)`.
fn box_preimage(
    curve: &impl CurveModel,
    plane: &Plane,
    widths: &[f64],
) -> Result<Option<(f64, f64)>> {
    let dim = curve.dim();
    if plane.a().len() != 1 {
        return domain("curves live in R^{n x 1}: the plane must have scalar a");
    }
    if plane.b().len() != dim || widths.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: plane.b().len().min(widths.len()),
        });
    }
    let a = plane.a()[0];
    let (mut lo, mut hi) = curve.interval();
    for j in 0..dim {
        let b = plane.b()[j];
        let h = |x: f64| a * curve.eval(x)[j] + b;
        match monotone_sublevel(h, lo, hi, widths[j]) {
            Some((l, r)) => {
                lo = l;
                hi = r;
            }
            None => return Ok(None),
        }
    }
    Ok((lo < hi).then_some((lo, hi)))
}

/// Parameter interval of `{x : |g(x) - g(center)|_2 < radius}`.
fn ball_preimage(curve: &impl CurveModel, center: f64, radius: f64) -> (f64, f64) {
    let (lo, hi) = curve.interval();
    let gc = curve.eval(center);
    let inside = |x: f64| {
        curve
            .eval(x)
            .iter()
            .zip(&gc)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            < radius * radius
    };
    let left = if inside(lo) { lo } else { bisect(center, lo, inside) };
    let right = if inside(hi) { hi } else { bisect(center, hi, inside) };
    (left, right)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodMeasure {
    /// Curve measure of the contracted neighbourhood.
    pub value: f64,
    pub rel_error: f64,
    /// Parameter interval of the preimage, if non-empty.
    pub preimage: Option<(f64, f64)>,
    /// `2 sqrt(n) kappa^2 delta eps_min`.
    pub bound: f64,
    pub bound_holds: bool,
}

/// Curve measure of `L^{(delta eps)}_{a,b}`.
pub fn curve_neighborhood_measure(
    curve: &impl CurveModel,
    plane: &Plane,
    spec: &NeighborhoodSpec,
) -> Result<NeighborhoodMeasure> {
    let widths = spec.contracted();
    let delta = spec.delta.unwrap_or(1.0);
    let n = curve.dim() as f64;
    let kappa = curve.kappa();
    let bound = 2.0 * n.sqrt() * kappa * kappa * delta * spec.min_eps();
    let preimage = box_preimage(curve, plane, &widths)?;
    let (value, rel_error) = match preimage {
        Some((a, b)) => {
            let q = curve.arclength(a, b)?;
            (q.value, q.relative_error())
        }
        None => (0.0, 0.0),
    };
    Ok(NeighborhoodMeasure {
        value,
        rel_error,
        preimage,
        bound,
        bound_holds: value <= bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractingCertificate {
    /// `L^{(delta eps)} ∩ C` is empty; nothing to certify.
    pub vacuous: bool,
    /// Parameter of the centre `X = g(x)`.
    pub center: f64,
    /// Radius of `B`, `eps_min / 2`.
    pub radius: f64,
    /// `B ⊂ L^{(eps)}`.
    pub ball_inside: bool,
    /// `mu(5B ∩ C) >= eps_min / 4`.
    pub mass_lower_holds: bool,
    pub mass_5b: f64,
    pub mass_5b_contracted: f64,
    /// `mu(5B ∩ L^{(delta eps)} ∩ C) / mu(5B ∩ C)`.
    pub ratio: f64,
    /// `8 sqrt(n) kappa^2 delta`.
    pub bound: f64,
    pub ratio_holds: bool,
    /// Largest relative quadrature error estimate among the integrals used.
    pub rel_error: f64,
}

impl ContractingCertificate {
    fn vacuous(radius: f64, bound: f64) -> Self {
        Self {
            vacuous: true,
            center: f64::NAN,
            radius,
            ball_inside: true,
            mass_lower_holds: true,
            mass_5b: 0.0,
            mass_5b_contracted: 0.0,
            ratio: 0.0,
            bound,
            ratio_holds: true,
            rel_error: 0.0,
        }
    }

    pub fn holds(&self) -> bool {
        self.ball_inside && self.mass_lower_holds && self.ratio_holds
    }
}

fn check_contracting_pre(curve: &impl CurveModel, spec: &NeighborhoodSpec) -> Result<f64> {
    let delta = match spec.delta {
        Some(d) if d < 0.5 => d,
        other => return domain(format!("contraction factor must lie in (0, 1/2), got {other:?}")),
    };
    if !(spec.min_eps() < curve.r0()) {
        return domain(format!(
            "min eps {} must be below r0 = {}",
            spec.min_eps(),
            curve.r0()
        ));
    }
    Ok(delta)
}

/// Contracting certificate at the midpoint of the contracted neighbourhood's preimage.
pub fn contracting_certificate(
    curve: &impl CurveModel,
    plane: &Plane,
    spec: &NeighborhoodSpec,
) -> Result<ContractingCertificate> {
    check_contracting_pre(curve, spec)?;
    match box_preimage(curve, plane, &spec.contracted())? {
        Some((a, b)) => contracting_certificate_at(curve, plane, spec, 0.5 * (a + b)),
        None => {
            let delta = spec.delta.unwrap_or(1.0);
            let kappa = curve.kappa();
            let bound = 8.0 * (curve.dim() as f64).sqrt() * kappa * kappa * delta;
            Ok(ContractingCertificate::vacuous(0.5 * spec.min_eps(), bound))
        }
    }
}

/// Contracting certificate for the ball centred at `g(center)`, which must
/// lie in the contracted neighbourhood.
pub fn contracting_certificate_at(
    curve: &impl CurveModel,
    plane: &Plane,
    spec: &NeighborhoodSpec,
    center: f64,
) -> Result<ContractingCertificate> {
    let delta = check_contracting_pre(curve, spec)?;
    let eps_min = spec.min_eps();
    let kappa = curve.kappa();
    let bound = 8.0 * (curve.dim() as f64).sqrt() * kappa * kappa * delta;
    let radius = 0.5 * eps_min;
    let contracted = spec.contracted();
    let x = curve.eval(center);
    let offsets = plane.offsets(&x)?;
    if offsets.iter().zip(&contracted).any(|(o, w)| o >= w) {
        return domain("certificate centre is not in the contracted neighbourhood");
    }
    let ball_inside = offsets
        .iter()
        .zip(&spec.eps)
        .all(|(o, e)| o + radius <= *e);
    let Some((na, nb)) = box_preimage(curve, plane, &contracted)? else {
        return Ok(ContractingCertificate::vacuous(radius, bound));
    };
    let (ba, bb) = ball_preimage(curve, center, 5.0 * radius);
    let mass = curve.arclength(ba, bb)?;
    let (ia, ib) = (ba.max(na), bb.min(nb));
    let inner = if ia < ib {
        curve.arclength(ia, ib)?
    } else {
        QuadResult {
            value: 0.0,
            error: 0.0,
        }
    };
    let ratio = inner.value / mass.value;
    Ok(ContractingCertificate {
        vacuous: false,
        center,
        radius,
        ball_inside,
        mass_lower_holds: mass.value >= eps_min / 4.0,
        mass_5b: mass.value,
        mass_5b_contracted: inner.value,
        ratio,
        bound,
        ratio_holds: ratio <= bound,
        rel_error: mass.relative_error().max(inner.relative_error()),
    })
}
