//! Monte Carlo exponents along a Veronese curve in dual form.

use diophantine_core::{default_grid, estimate_exponents, exponent_curve, ApproxInstance, Mode};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{tail_fraction_ok, JobOutput};
use crate::config::{check, ExtremalConfig};
use crate::error::CliError;
use crate::output::{num, Table, F17};
use crate::rng::CounterRng;

#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub theta: F17,
    pub mode: &'static str,
    pub samples: usize,
    pub median_w_est: F17,
    pub median_what_est: F17,
    /// Fraction of samples with `w_est > 1 + margin`.
    pub fraction_above: F17,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremalSummary {
    pub degree: usize,
    pub q_max: F17,
    pub margin: F17,
    pub aggregates: Vec<Aggregate>,
}

impl ExtremalSummary {
    pub fn aggregate(&self, theta: f64, mode: Mode) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.theta.0 == theta && a.mode == mode.as_str())
    }
}

struct SampleResult {
    x: f64,
    /// `(theta index, mode index) -> (w_est, what_est)`.
    est: Vec<Vec<(f64, f64)>>,
}

/// Row `(x, x^2, .., x^degree)` of the dual instance.
pub fn veronese_row(x: f64, degree: usize) -> Vec<f64> {
    (1..=degree as i32).map(|k| x.powi(k)).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

pub fn run(cfg: &ExtremalConfig, seed: Option<u64>) -> Result<JobOutput<ExtremalSummary>, CliError> {
    check(cfg.degree >= 1, || "degree must be at least 1".into())?;
    check(cfg.samples >= 1, || "samples must be at least 1".into())?;
    check(cfg.x_lo.is_finite() && cfg.x_lo < cfg.x_hi && cfg.x_hi.is_finite(), || {
        format!("need x_lo < x_hi, got [{}, {}]", cfg.x_lo, cfg.x_hi)
    })?;
    check(cfg.q_max >= 10.0, || "q_max must be >= 10".into())?;
    check(!cfg.thetas.is_empty() && !cfg.modes.is_empty(), || {
        "thetas and modes must be non-empty".into()
    })?;
    tail_fraction_ok(cfg.tail_fraction)?;
    let seed = seed.ok_or_else(|| CliError::Config("extremal-mc needs `seed`".into()))?;
    let grid = default_grid(cfg.q_max);
    let rng = CounterRng::new(seed, "extremal-mc/x");
    let modes: Vec<Mode> = cfg.modes.iter().map(|&m| m.into()).collect();

    let results: Vec<SampleResult> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let x = rng.at(i as u64).random_range(cfg.x_lo..cfg.x_hi);
            let row = veronese_row(x, cfg.degree);
            let est = cfg
                .thetas
                .iter()
                .map(|&theta| {
                    let inst = ApproxInstance::new(1, cfg.degree, row.clone(), vec![theta])?;
                    modes
                        .iter()
                        .map(|&mode| {
                            let curve = exponent_curve(&inst, &grid, mode)?;
                            let e = estimate_exponents(&curve, cfg.tail_fraction, mode)?;
                            Ok((e.w_est, e.what_est))
                        })
                        .collect::<Result<Vec<_>, CliError>>()
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(SampleResult { x, est })
        })
        .collect::<Result<_, CliError>>()?;

    let mut rows = Table::new("extremal_samples", &["sample", "x", "theta", "mode", "w_est", "what_est"]);
    for (i, r) in results.iter().enumerate() {
        for (ti, &theta) in cfg.thetas.iter().enumerate() {
            for (mi, mode) in modes.iter().enumerate() {
                let (w, wh) = r.est[ti][mi];
                rows.push(vec![
                    i.to_string(),
                    num(r.x),
                    num(theta),
                    mode.as_str().into(),
                    num(w),
                    num(wh),
                ]);
            }
        }
    }
    let mut agg_table = Table::new(
        "extremal_aggregate",
        &["theta", "mode", "samples", "median_w_est", "median_what_est", "fraction_above"],
    );
    let mut aggregates = Vec::new();
    for (ti, &theta) in cfg.thetas.iter().enumerate() {
        for (mi, mode) in modes.iter().enumerate() {
            let w: Vec<f64> = results.iter().map(|r| r.est[ti][mi].0).collect();
            let wh: Vec<f64> = results.iter().map(|r| r.est[ti][mi].1).collect();
            let above = w.iter().filter(|&&v| v > 1.0 + cfg.margin).count() as f64 / w.len() as f64;
            let a = Aggregate {
                theta: F17(theta),
                mode: mode.as_str(),
                samples: w.len(),
                median_w_est: F17(median(w)),
                median_what_est: F17(median(wh)),
                fraction_above: F17(above),
            };
            agg_table.push(vec![
                num(theta),
                a.mode.into(),
                a.samples.to_string(),
                num(a.median_w_est.0),
                num(a.median_what_est.0),
                num(above),
            ]);
            aggregates.push(a);
        }
    }
    Ok(JobOutput {
        tables: vec![rows, agg_table],
        summary: ExtremalSummary {
            degree: cfg.degree,
            q_max: F17(cfg.q_max),
            margin: F17(cfg.margin),
            aggregates,
        },
        violations: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn veronese_rows() {
        assert_eq!(veronese_row(2.0, 3), vec![2.0, 4.0, 8.0]);
    }
}
