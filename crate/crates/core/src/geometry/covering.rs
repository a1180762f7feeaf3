//! Greedy 5r-covering of ball families, the overlap bound for interval
//! families, and the essential/inessential split across labelled families.

use serde::{Deserialize, Serialize};

use super::measure::MeasureModel;
use crate::error::{domain, Error, Result};

/// Relative slack allowed on the mass bound.
pub const MASS_BOUND_SLACK: f64 = 1e-9;

/// Open Euclidean ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return domain("ball centre must be non-empty");
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return domain(format!("ball radius must be positive and finite, got {radius}"));
        }
        Ok(Self { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    fn dist_sq(&self, other: &Ball) -> f64 {
        self.center
            .iter()
            .zip(&other.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Strict separation: `|c1 - c2|^2 > (r1 + r2)^2`.
    pub fn disjoint_from(&self, other: &Ball) -> bool {
        let s = self.radius + other.radius;
        self.dist_sq(other) > s * s
    }

    /// `self ⊂ factor · other`, tested as `|c1 - c2| + r1 <= factor · r2`.
    pub fn inside_dilate(&self, other: &Ball, factor: f64) -> bool {
        self.dist_sq(other).sqrt() + self.radius <= factor * other.radius
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let d: f64 = self.center.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        d < self.radius * self.radius
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BallFamily {
    pub balls: Vec<Ball>,
}

impl BallFamily {
    pub fn new(balls: Vec<Ball>) -> Result<Self> {
        if let Some(first) = balls.first() {
            let d = first.dim();
            if let Some(b) = balls.iter().find(|b| b.dim() != d) {
                return Err(Error::Dimension {
                    expected: d,
                    got: b.dim(),
                });
            }
        }
        Ok(Self { balls })
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn pairwise_disjoint(&self) -> bool {
        let b = &self.balls;
        (0..b.len()).all(|i| (i + 1..b.len()).all(|j| b[i].disjoint_from(&b[j])))
    }

    /// Intervals of a family on the line.
    pub fn intervals(&self) -> Result<Vec<Interval>> {
        self.balls
            .iter()
            .map(|b| {
                if b.dim() != 1 {
                    return Err(Error::Dimension {
                        expected: 1,
                        got: b.dim(),
                    });
                }
                Ok(Interval::new(b.center[0] - b.radius, b.center[0] + b.radius))
            })
            .collect()
    }
}

/// Open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }

    pub fn measure(&self, mu: &MeasureModel) -> Result<f64> {
        mu.interval_measure(self.lo, self.hi)
    }
}

/// Measure of a finite union of intervals.
pub fn union_measure(mut parts: Vec<Interval>, mu: &MeasureModel) -> Result<f64> {
    parts.retain(|p| p.lo < p.hi);
    parts.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut total = 0.0;
    let mut iter = parts.into_iter();
    let Some(mut cur) = iter.next() else {
        return Ok(0.0);
    };
    for p in iter {
        if p.lo <= cur.hi {
            cur.hi = cur.hi.max(p.hi);
        } else {
            total += cur.measure(mu)?;
            cur = p;
        }
    }
    Ok(total + cur.measure(mu)?)
}

/// `mu(target ∩ ∪ others)`.
fn overlap_measure<'a>(
    target: &Interval,
    others: impl Iterator<Item = &'a Interval>,
    mu: &MeasureModel,
) -> Result<f64> {
    union_measure(others.filter_map(|o| target.intersect(o)).collect(), mu)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverSelection {
    /// Indices of accepted balls, in acceptance order.
    pub selected: Vec<usize>,
    /// For each input ball, the accepted ball whose 5-dilate contains it.
    pub witness: Vec<usize>,
}

impl CoverSelection {
    pub fn family(&self, input: &BallFamily) -> BallFamily {
        BallFamily {
            balls: self.selected.iter().map(|&i| input.balls[i].clone()).collect(),
        }
    }

    /// Input balls that are not inside the 5-dilate of their witness.
    pub fn containment_violations(&self, input: &BallFamily) -> Vec<usize> {
        (0..input.len())
            .filter(|&i| !input.balls[i].inside_dilate(&input.balls[self.witness[i]], 5.0))
            .collect()
    }
}

/// Greedy disjoint subfamily: scan by radius non-increasing (ties broken
/// lexicographically on the centre) and accept a ball iff it is disjoint from
/// everything accepted so far.
pub fn cover_5r(family: &BallFamily) -> CoverSelection {
    let balls = &family.balls;
    let mut order: Vec<usize> = (0..balls.len()).collect();
    order.sort_by(|&i, &j| {
        balls[j]
            .radius
            .total_cmp(&balls[i].radius)
            .then_with(|| {
                balls[i]
                    .center
                    .iter()
                    .zip(&balls[j].center)
                    .map(|(a, b)| a.total_cmp(b))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .then(i.cmp(&j))
    });
    let mut selected: Vec<usize> = Vec::new();
    let mut witness = vec![usize::MAX; balls.len()];
    for i in order {
        match selected.iter().find(|&&s| !balls[i].disjoint_from(&balls[s])) {
            Some(&s) => witness[i] = s,
            None => {
                witness[i] = i;
                selected.push(i);
            }
        }
    }
    CoverSelection { selected, witness }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisjointnessCheck {
    pub c_measured: f64,
    pub total_mass: f64,
    pub omega_measure: f64,
    /// `c_measured < 1`.
    pub applicable: bool,
    pub bound_holds: bool,
}

/// Measured overlap constant `c = max_i mu(B_i ∩ ∪_{j≠i} B_j) / mu(B_i)` and
/// the bound `Σ mu(B_i) <= mu(Ω) / (1 - c)`.
pub fn disjointness_bound_check(
    family: &[Interval],
    mu: &MeasureModel,
    omega_measure: f64,
) -> Result<DisjointnessCheck> {
    let mut c: f64 = 0.0;
    let mut total = 0.0;
    for (i, b) in family.iter().enumerate() {
        let mass = b.measure(mu)?;
        if mass <= 0.0 {
            return domain(format!("interval {i} has zero measure"));
        }
        total += mass;
        let others = family.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, o)| o);
        c = c.max(overlap_measure(b, others, mu)? / mass);
    }
    let applicable = c < 1.0;
    let bound_holds =
        applicable && total <= omega_measure / (1.0 - c) * (1.0 + MASS_BOUND_SLACK);
    Ok(DisjointnessCheck {
        c_measured: c,
        total_mass: total,
        omega_measure,
        applicable,
        bound_holds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EssentialEntry {
    pub family: usize,
    pub index: usize,
    pub mass: f64,
    pub overlap_fraction: f64,
    pub essential: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssentialSplit {
    pub entries: Vec<EssentialEntry>,
}

impl EssentialSplit {
    pub fn essential(&self) -> impl Iterator<Item = &EssentialEntry> {
        self.entries.iter().filter(|e| e.essential)
    }

    pub fn inessential(&self) -> impl Iterator<Item = &EssentialEntry> {
        self.entries.iter().filter(|e| !e.essential)
    }
}

/// A ball of family `a` is essential iff its overlap with the union of all
/// other families is at most half its mass. Each family must be internally
/// disjoint.
pub fn essential_split(families: &[Vec<Interval>], mu: &MeasureModel) -> Result<EssentialSplit> {
    for (a, fam) in families.iter().enumerate() {
        for i in 0..fam.len() {
            for j in i + 1..fam.len() {
                if fam[i].intersect(&fam[j]).is_some() {
                    return domain(format!("family {a} is not disjoint ({i} meets {j})"));
                }
            }
        }
    }
    let mut entries = Vec::new();
    for (a, fam) in families.iter().enumerate() {
        for (i, b) in fam.iter().enumerate() {
            let mass = b.measure(mu)?;
            if mass <= 0.0 {
                return domain(format!("ball {i} of family {a} has zero measure"));
            }
            let others = families
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != a)
                .flat_map(|(_, f)| f.iter());
            let overlap_fraction = overlap_measure(b, others, mu)? / mass;
            entries.push(EssentialEntry {
                family: a,
                index: i,
                mass,
                overlap_fraction,
                essential: overlap_fraction <= 0.5,
            });
        }
    }
    Ok(EssentialSplit { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EssentialMass {
    pub total: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `Σ_{essential} mu(B) <= 2 mu(Ω)`.
pub fn essential_mass_bound(split: &EssentialSplit, omega_measure: f64) -> EssentialMass {
    let total: f64 = split.essential().map(|e| e.mass).sum();
    let bound = 2.0 * omega_measure;
    EssentialMass {
        total,
        bound,
        holds: total <= bound * (1.0 + MASS_BOUND_SLACK),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leb() -> MeasureModel {
        MeasureModel::LebesgueInterval { lo: 0.0, hi: 1.0 }
    }

    fn ball(c: &[f64], r: f64) -> Ball {
        Ball::new(c.to_vec(), r).unwrap()
    }

    #[test]
    fn cover_examples() {
        let one = BallFamily::new(vec![ball(&[0.0, 0.0], 1.0)]).unwrap();
        let sel = cover_5r(&one);
        assert_eq!(sel.selected, vec![0]);

        let two = BallFamily::new(vec![ball(&[1.0, 2.0], 0.5), ball(&[1.0, 2.0], 0.5)]).unwrap();
        let sel = cover_5r(&two);
        assert_eq!(sel.selected, vec![0]);
        assert_eq!(sel.witness, vec![0, 0]);
        assert!(sel.containment_violations(&two).is_empty());
    }

    #[test]
    fn cover_prefers_large_then_lexicographic() {
        let fam = BallFamily::new(vec![
            ball(&[0.5], 0.1),
            ball(&[0.3], 0.3),
            ball(&[0.2], 0.3),
        ])
        .unwrap();
        let sel = cover_5r(&fam);
        assert_eq!(sel.selected, vec![2]);
        assert_eq!(sel.witness, vec![2, 2, 2]);
    }

    #[test]
    fn tangent_balls_are_not_disjoint() {
        assert!(!ball(&[0.0], 1.0).disjoint_from(&ball(&[2.0], 1.0)));
        assert!(ball(&[0.0], 1.0).disjoint_from(&ball(&[2.5], 1.0)));
    }

    #[test]
    fn union_measure_merges() {
        let parts = vec![
            Interval::new(0.5, 0.7),
            Interval::new(0.1, 0.3),
            Interval::new(0.2, 0.4),
        ];
        assert!((union_measure(parts, &leb()).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(union_measure(Vec::new(), &leb()).unwrap(), 0.0);
    }

    #[test]
    fn disjointness_examples() {
        let fam = [Interval::new(0.0, 0.3), Interval::new(0.5, 0.9)];
        let r = disjointness_bound_check(&fam, &leb(), 1.0).unwrap();
        assert_eq!(r.c_measured, 0.0);
        assert!(r.bound_holds && r.total_mass <= 1.0);

        let same = [Interval::new(0.2, 0.4), Interval::new(0.2, 0.4)];
        let r = disjointness_bound_check(&same, &leb(), 1.0).unwrap();
        assert_eq!(r.c_measured, 1.0);
        assert!(!r.applicable && !r.bound_holds);

        let gap = [Interval::new(0.4, 0.6)];
        assert!(disjointness_bound_check(&gap, &MeasureModel::Cantor, 1.0).is_err());
    }

    #[test]
    fn essential_examples() {
        let fams = vec![
            vec![Interval::new(0.0, 0.1), Interval::new(0.2, 0.3)],
            vec![Interval::new(0.5, 0.6)],
        ];
        let split = essential_split(&fams, &leb()).unwrap();
        assert!(split.entries.iter().all(|e| e.essential && e.overlap_fraction == 0.0));
        let mass = essential_mass_bound(&split, 1.0);
        assert!(mass.holds && mass.total <= 1.0);

        let fams = vec![vec![Interval::new(0.2, 0.3)], vec![Interval::new(0.1, 0.5)]];
        let split = essential_split(&fams, &leb()).unwrap();
        assert!(!split.entries[0].essential);
        assert!((split.entries[0].overlap_fraction - 1.0).abs() < 1e-12);
        assert!(split.entries[1].essential);

        let empty = essential_split(&[], &leb()).unwrap();
        assert_eq!(essential_mass_bound(&empty, 1.0).total, 0.0);
    }

    #[test]
    fn essential_rejects_overlapping_family() {
        let fams = vec![vec![Interval::new(0.0, 0.2), Interval::new(0.1, 0.3)]];
        assert!(essential_split(&fams, &leb()).is_err());
    }
}
