//! Plane neighbourhoods, measures on curves and on the line, and the
//! covering and essential-ball machinery.

pub mod covering;
pub mod curve;
pub mod measure;
pub mod quadrature;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub use covering::{
    cover_5r, disjointness_bound_check, essential_mass_bound, essential_split, Ball, BallFamily,
    CoverSelection, DisjointnessCheck, EssentialEntry, EssentialMass, EssentialSplit, Interval,
};
pub use curve::{
    contracting_certificate, contracting_certificate_at, curve_neighborhood_measure,
    ContractingCertificate, CurveModel, NeighborhoodMeasure, PolyCurve,
};
pub use measure::{
    calibrate_decay_constant, cantor_alpha, cantor_cdf, cantor_point, decaying_ratio, DecayParams,
    DecayProbe, DecayingRatio, MeasureModel,
};

/// The plane `{X : Xa + b = 0}` with `|a|_2 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Plane {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return domain("plane needs non-empty a and b");
        }
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return domain(format!("plane normal must have unit length, got {norm}"));
        }
        Ok(Self { a, b })
    }

    /// The point `-b / a` of `R^{m x 1}`, written with `a = 1`.
    pub fn point(target: &[f64]) -> Result<Self> {
        Self::new(vec![1.0], target.iter().map(|v| -v).collect())
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `|X_j a + b_j|` for each row of the row-major `m x n` matrix `x`.
    pub fn offsets(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (m, n) = (self.b.len(), self.a.len());
        if x.len() != m * n {
            return Err(Error::Dimension {
                expected: m * n,
                got: x.len(),
            });
        }
        Ok((0..m)
            .map(|j| {
                let dot: f64 = x[j * n..(j + 1) * n]
                    .iter()
                    .zip(&self.a)
                    .map(|(xv, av)| xv * av)
                    .sum();
                (dot + self.b[j]).abs()
            })
            .collect())
    }
}

/// Widths `eps` of a plane neighbourhood and an optional contraction factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodSpec {
    pub eps: Vec<f64>,
    pub delta: Option<f64>,
}

impl NeighborhoodSpec {
    pub fn new(eps: Vec<f64>, delta: Option<f64>) -> Result<Self> {
        if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0)) {
            return domain("neighbourhood widths must be positive");
        }
        if let Some(d) = delta {
            if !(d > 0.0 && d < 1.0) {
                return domain(format!("contraction factor must lie in (0, 1), got {d}"));
            }
        }
        Ok(Self { eps, delta })
    }

    pub fn min_eps(&self) -> f64 {
        self.eps.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Widths scaled by the contraction factor (or unchanged when none is set).
    pub fn contracted(&self) -> Vec<f64> {
        let d = self.delta.unwrap_or(1.0);
        self.eps.iter().map(|e| d * e).collect()
    }
}

/// True iff `|X_j a + b_j| < eps_j` for every row.
pub fn neighborhood_contains(x: &[f64], plane: &Plane, spec: &NeighborhoodSpec) -> Result<bool> {
    if spec.eps.len() != plane.b.len() {
        return Err(Error::Dimension {
            expected: plane.b.len(),
            got: spec.eps.len(),
        });
    }
    Ok(plane
        .offsets(x)?
        .iter()
        .zip(&spec.eps)
        .all(|(o, e)| o < e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighborhood_examples() {
        let plane = Plane::new(vec![1.0, 0.0], vec![0.05]).unwrap();
        let x = [0.1, 0.2];
        let wide = NeighborhoodSpec::new(vec![0.2], None).unwrap();
        let narrow = NeighborhoodSpec::new(vec![0.1], None).unwrap();
        assert!(neighborhood_contains(&x, &plane, &wide).unwrap());
        assert!(!neighborhood_contains(&x, &plane, &narrow).unwrap());
        let boundary = NeighborhoodSpec::new(vec![0.5], None).unwrap();
        let plane = Plane::new(vec![1.0, 0.0], vec![0.25]).unwrap();
        assert!(!neighborhood_contains(&[0.25, 0.5], &plane, &boundary).unwrap());
    }

    #[test]
    fn dimension_and_domain_errors() {
        let plane = Plane::new(vec![1.0, 0.0], vec![0.05]).unwrap();
        let spec = NeighborhoodSpec::new(vec![0.2], None).unwrap();
        assert!(neighborhood_contains(&[0.1], &plane, &spec).is_err());
        let spec2 = NeighborhoodSpec::new(vec![0.2, 0.1], None).unwrap();
        assert!(neighborhood_contains(&[0.1, 0.2], &plane, &spec2).is_err());
        assert!(Plane::new(vec![1.0, 1.0], vec![0.0]).is_err());
        assert!(NeighborhoodSpec::new(vec![0.0], None).is_err());
        assert!(NeighborhoodSpec::new(vec![0.1], Some(1.0)).is_err());
    }
}
