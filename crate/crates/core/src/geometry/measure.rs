//! Measures evaluable on intervals and balls: Lebesgue on an interval, the
//! middle-thirds Cantor measure, and arclength on a curve.

use serde::{Deserialize, Serialize};

use super::curve::{CurveModel, PolyCurve};
use super::Plane;
use crate::error::{domain, Error, Result};

/// Triadic depth of the support grid used for `sup dist(x, L)` on the Cantor set.
pub const CANTOR_GRID_DEPTH: u32 = 20;
const CANTOR_CDF_DIGITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeasureModel {
    LebesgueInterval { lo: f64, hi: f64 },
    /// Middle-thirds Cantor measure on `[0, 1]`.
    Cantor,
    CurveArclength(PolyCurve),
}

/// Cantor function.
pub fn cantor_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let (mut y, mut acc, mut w) = (x, 0.0, 0.5);
    for _ in 0..CANTOR_CDF_DIGITS {
        y *= 3.0;
        let d = y.floor();
        y -= d;
        if d >= 2.0 {
            acc += w;
        } else if d >= 1.0 {
            return acc + w;
        }
        w *= 0.5;
    }
    acc
}

/// Leftmost (or rightmost) endpoint of a depth-limited triadic interval of the
/// Cantor construction lying in the open interval `(lo, hi)`.
fn cantor_extreme(lo: f64, hi: f64, depth: u32, leftmost: bool) -> Option<f64> {
    fn go(a: f64, len: f64, lo: f64, hi: f64, depth: u32, leftmost: bool) -> Option<f64> {
        if a + len <= lo || a >= hi {
            return None;
        }
        if depth == 0 {
            let (first, second) = if leftmost { (a, a + len) } else { (a + len, a) };
            return [first, second].into_iter().find(|&p| p > lo && p < hi);
        }
        let third = len / 3.0;
        let children = [a, a + 2.0 * third];
        let order: [f64; 2] = if leftmost { children } else { [children[1], children[0]] };
        order
            .into_iter()
            .find_map(|c| go(c, third, lo, hi, depth - 1, leftmost))
    }
    go(0.0, 1.0, lo, hi, depth, leftmost)
}

impl MeasureModel {
    pub fn kind(&self) -> &'static str {
        match self {
            MeasureModel::LebesgueInterval { .. } => "lebesgue-interval",
            MeasureModel::Cantor => "cantor",
            MeasureModel::CurveArclength(_) => "curve-arclength",
        }
    }

    /// Doubling constant when known in closed form.
    pub fn doubling_constant(&self) -> Option<f64> {
        match self {
            MeasureModel::LebesgueInterval { .. } => Some(2.0),
            MeasureModel::Cantor => Some(8.0),
            MeasureModel::CurveArclength(_) => None,
        }
    }

    fn line_only(&self) -> Result<()> {
        match self {
            MeasureModel::CurveArclength(_) => domain("operation needs a measure on the line"),
            _ => Ok(()),
        }
    }

    /// Measure of the interval `(a, b)` for measures on the line.
    pub fn interval_measure(&self, a: f64, b: f64) -> Result<f64> {
        self.line_only()?;
        if b <= a {
            return Ok(0.0);
        }
        Ok(match self {
            MeasureModel::LebesgueInterval { lo, hi } => (b.min(*hi) - a.max(*lo)).max(0.0),
            MeasureModel::Cantor => cantor_cdf(b) - cantor_cdf(a),
            MeasureModel::CurveArclength(_) => unreachable!(),
        })
    }

    /// Total mass.
    pub fn total(&self) -> Result<f64> {
        Ok(match self {
            MeasureModel::LebesgueInterval { lo, hi } => hi - lo,
            MeasureModel::Cantor => 1.0,
            MeasureModel::CurveArclength(c) => {
                let (a, b) = c.interval();
                c.arclength(a, b)?.value
            }
        })
    }

    /// Measure of the open ball of `radius` about `center`. For curves the
    /// centre is given as a curve parameter in `center[0]`.
    pub fn ball_measure(&self, center: &[f64], radius: f64) -> Result<f64> {
        match self {
            MeasureModel::CurveArclength(curve) => {
                let (lo, hi) = curve.interval();
                let x = center[0];
                let gc = curve.eval(x);
                let inside = |y: f64| {
                    curve
                        .eval(y)
                        .iter()
                        .zip(&gc)
                        .map(|(u, v)| (u - v) * (u - v))
                        .sum::<f64>()
                        < radius * radius
                };
                let edge = |mut a: f64, mut b: f64| {
                    if inside(b) {
                        return b;
                    }
                    for _ in 0..200 {
                        let mid = 0.5 * (a + b);
                        if inside(mid) {
                            a = mid;
                        } else {
                            b = mid;
                        }
                    }
                    a
                };
                let (l, r) = (edge(x, lo), edge(x, hi));
                Ok(curve.arclength(l, r)?.value)
            }
            _ => {
                let c = center[0];
                self.interval_measure(c - radius, c + radius)
            }
        }
    }

    /// `mu(2B) / mu(B)`.
    pub fn doubling_ratio(&self, center: &[f64], radius: f64) -> Result<f64> {
        let inner = self.ball_measure(center, radius)?;
        if inner <= 0.0 {
            return domain("ball has zero measure");
        }
        Ok(self.ball_measure(center, 2.0 * radius)? / inner)
    }

    /// `sup dist(x, p)` over `x` in the support within `(c - r, c + r)`.
    pub fn sup_distance(&self, c: f64, r: f64, p: f64) -> Result<Option<f64>> {
        self.line_only()?;
        let extremes = match self {
            MeasureModel::LebesgueInterval { lo, hi } => {
                let (a, b) = ((c - r).max(*lo), (c + r).min(*hi));
                (a < b).then_some((a, b))
            }
            MeasureModel::Cantor => cantor_extreme(c - r, c + r, CANTOR_GRID_DEPTH, true)
                .zip(cantor_extreme(c - r, c + r, CANTOR_GRID_DEPTH, false)),
            MeasureModel::CurveArclength(_) => unreachable!(),
        };
        Ok(extremes.map(|(a, b)| (a - p).abs().max((b - p).abs())))
    }
}

/// Constants of a `(C, alpha)`-decaying estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayParams {
    pub c: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayingRatio {
    /// `mu(B ∩ L^{(eps)}) / mu(B)`.
    pub ratio: f64,
    /// `C (eps / ||d_L||)^alpha`.
    pub bound: f64,
    /// `||d_L||_{mu,B}`.
    pub d_norm: f64,
    /// Smallest `C` for which this instance satisfies the estimate.
    pub c_needed: f64,
}

impl DecayingRatio {
    pub fn holds(&self) -> bool {
        self.ratio <= self.bound
    }
}

/// Decay of `mu` near the hyperplane `L` (a point on the line) inside the ball `(c - r, c + r)`.
pub fn decaying_ratio(
    measure: &MeasureModel,
    center: f64,
    radius: f64,
    plane: &Plane,
    eps: f64,
    params: DecayParams,
) -> Result<DecayingRatio> {
    if plane.a().len() != 1 || plane.b().len() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: plane.a().len().max(plane.b().len()),
        });
    }
    if !(eps > 0.0) || !(radius > 0.0) {
        return domain("eps and radius must be positive");
    }
    let p = -plane.b()[0] / plane.a()[0];
    let mass = measure.interval_measure(center - radius, center + radius)?;
    if mass <= 0.0 {
        return domain("ball has zero measure");
    }
    let near = measure.interval_measure((center - radius).max(p - eps), (center + radius).min(p + eps))?;
    let ratio = near / mass;
    let d_norm = measure
        .sup_distance(center, radius, p)?
        .ok_or_else(|| Error::Domain("ball does not meet the support".into()))?;
    let scale = (eps / d_norm).powf(params.alpha);
    Ok(DecayingRatio {
        ratio,
        bound: params.c * scale,
        d_norm,
        c_needed: ratio / scale,
    })
}

/// Exponent `log 2 / log 3` of the middle-thirds Cantor measure.
pub fn cantor_alpha() -> f64 {
    std::f64::consts::LN_2 / 3f64.ln()
}

/// Point of the Cantor set whose first 40 ternary digits are `2 * bit_i`.
pub fn cantor_point(bits: u64) -> f64 {
    let mut x = 0.0;
    let mut w = 1.0;
    for i in 0..40 {
        w /= 3.0;
        if bits >> i & 1 == 1 {
            x += 2.0 * w;
        }
    }
    x
}

/// One decaying test: ball `(center - radius, center + radius)`, the point `target`, width `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayProbe {
    pub center: f64,
    pub radius: f64,
    pub target: f64,
    pub eps: f64,
}

impl DecayProbe {
    pub fn evaluate(&self, measure: &MeasureModel, params: DecayParams) -> Result<DecayingRatio> {
        let plane = Plane::point(&[self.target])?;
        decaying_ratio(measure, self.center, self.radius, &plane, self.eps, params)
    }
}

/// `margin` times the largest constant any probe needs at exponent `alpha`.
pub fn calibrate_decay_constant(
    measure: &MeasureModel,
    probes: &[DecayProbe],
    alpha: f64,
    margin: f64,
) -> Result<f64> {
    let params = DecayParams { c: 1.0, alpha };
    let mut c: f64 = 0.0;
    for p in probes {
        c = c.max(p.evaluate(measure, params)?.c_needed);
    }
    Ok(margin * c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_cdf_values() {
        assert_eq!(cantor_cdf(0.0), 0.0);
        assert_eq!(cantor_cdf(1.0), 1.0);
        assert_eq!(cantor_cdf(0.5), 0.5);
        assert!((cantor_cdf(1.0 / 3.0) - 0.5).abs() < 1e-12);
        assert!((cantor_cdf(0.25) - 1.0 / 3.0).abs() < 1e-9);
        assert!((cantor_cdf(2.0 / 9.0 + 1e-12) - 0.25).abs() < 1e-6);
    }

    #[test]
    fn lebesgue_decay_is_tight() {
        let mu = MeasureModel::LebesgueInterval { lo: 0.0, hi: 1.0 };
        let plane = Plane::point(&[0.5]).unwrap();
        let r = decaying_ratio(&mu, 0.5, 0.5, &plane, 0.1, DecayParams { c: 1.0, alpha: 1.0 })
            .unwrap();
        assert!((r.ratio - 0.2).abs() < 1e-15);
        assert!((r.d_norm - 0.5).abs() < 1e-15);
        assert!((r.bound - 0.2).abs() < 1e-15);
        assert!(r.holds());
    }

    #[test]
    fn wide_eps_is_trivial() {
        let mu = MeasureModel::Cantor;
        let plane = Plane::point(&[0.3]).unwrap();
        let r = decaying_ratio(&mu, 0.0, 0.5, &plane, 2.0, DecayParams { c: 1.0, alpha: 0.63 })
            .unwrap();
        assert!(r.bound >= 1.0 && r.holds());
    }

    #[test]
    fn zero_mass_ball_is_error() {
        let mu = MeasureModel::Cantor;
        let plane = Plane::point(&[0.5]).unwrap();
        let e = decaying_ratio(&mu, 0.5, 0.1, &plane, 0.01, DecayParams { c: 1.0, alpha: 0.63 });
        assert!(matches!(e, Err(Error::Domain(_))));
        assert!(mu.doubling_ratio(&[0.5], 0.1).is_err());
    }

    #[test]
    fn cantor_extremes() {
        let lo = cantor_extreme(0.2, 0.8, CANTOR_GRID_DEPTH, true).unwrap();
        let hi = cantor_extreme(0.2, 0.8, CANTOR_GRID_DEPTH, false).unwrap();
        assert!((lo - 2.0 / 9.0).abs() < 1e-12);
        assert!((hi - 7.0 / 9.0).abs() < 1e-12);
        assert!(cantor_extreme(0.35, 0.65, CANTOR_GRID_DEPTH, true).is_none());
    }

    #[test]
    fn doubling_on_cantor_endpoint() {
        let mu = MeasureModel::Cantor;
        for k in 1..12 {
            let r = 3f64.powi(-k);
            let ratio = mu.doubling_ratio(&[0.0], r).unwrap();
            assert!(ratio <= 8.0, "r = {r}: {ratio}");
        }
    }

    #[test]
    fn cantor_points_lie_in_support() {
        for bits in [0u64, 1, 0xdead_beef, u64::MAX] {
            let x = cantor_point(bits);
            assert!(MeasureModel::Cantor.ball_measure(&[x], 1e-9).unwrap() > 0.0);
        }
        assert_eq!(cantor_point(0), 0.0);
        assert!((cantor_point(u64::MAX) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn calibrated_cantor_constant_is_moderate() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mu = MeasureModel::Cantor;
        let probes: Vec<DecayProbe> = (0..2000)
            .map(|_| {
                let center = cantor_point(rng.random());
                let radius = 3f64.powi(-rng.random_range(0..10)) * rng.random_range(0.2..1.0);
                DecayProbe {
                    center,
                    radius,
                    target: center + radius * rng.random_range(-1.0..1.0),
                    eps: radius * 10f64.powf(-3.0 * rng.random::<f64>()),
                }
            })
            .collect();
        let c = calibrate_decay_constant(&mu, &probes, cantor_alpha(), 1.0).unwrap();
        assert!(c > 0.5 && c <= 25.0, "{c}");
        let params = DecayParams { c, alpha: cantor_alpha() };
        assert!(probes.iter().all(|p| p.evaluate(&mu, params).unwrap().holds()));
    }

    #[test]
    fn curve_ball_measure() {
        let curve = PolyCurve::veronese(2, 1.0, 2.0, 4.0).unwrap();
        let mu = MeasureModel::CurveArclength(curve);
        let full = mu.total().unwrap();
        assert!((mu.ball_measure(&[1.5], 10.0).unwrap() - full).abs() < 1e-9);
        let ratio = mu.doubling_ratio(&[1.5], 0.01).unwrap();
        assert!((ratio - 2.0).abs() < 1e-3);
    }
}
