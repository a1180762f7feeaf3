//! Exponent curves and estimates per instance.

use diophantine_core::exponents::mult_domination_slack;
use diophantine_core::{
    estimate_exponents, exponent_curve, transference_report, CheckId, CurvePoint, Mode,
    TransferenceTolerances,
};
use rayon::prelude::*;
use serde::Serialize;

use super::{grid_of, materialize, tail_fraction_ok, JobOutput, NamedInstance};
use crate::config::{check, ExponentConfig};
use crate::error::CliError;
use crate::output::{ints, num, Table, F17};

#[derive(Debug, Clone, Serialize)]
pub struct EstimateSummary {
    pub mode: &'static str,
    pub w_est: F17,
    pub what_est: F17,
    pub infinite: bool,
    #[serde(skip)]
    pub curve: Vec<CurvePoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub id: &'static str,
    pub slack: F17,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferenceSummary {
    pub w_hom: F17,
    pub what_hom: F17,
    pub w_mult_hom: F17,
    pub w_transpose: F17,
    pub what_transpose: F17,
    pub w_inhom: F17,
    pub what_inhom: F17,
    pub checks: Vec<CheckSummary>,
}

impl TransferenceSummary {
    pub fn slack(&self, id: CheckId) -> Option<f64> {
        self.checks.iter().find(|c| c.id == id.as_str()).map(|c| c.slack.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceSummary {
    pub id: String,
    pub m: usize,
    pub n: usize,
    pub homogeneous: bool,
    pub estimates: Vec<EstimateSummary>,
    /// `min_Q (e_mult(Q) - e_std(Q))` when both modes ran.
    pub mult_domination_slack: Option<F17>,
    pub transference: Option<TransferenceSummary>,
}

impl InstanceSummary {
    pub fn estimate(&self, mode: Mode) -> Option<&EstimateSummary> {
        self.estimates.iter().find(|e| e.mode == mode.as_str())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentSummary {
    pub grid: Vec<F17>,
    pub tail_fraction: F17,
    pub instances: Vec<InstanceSummary>,
}

fn validate(cfg: &ExponentConfig) -> Result<Vec<f64>, CliError> {
    tail_fraction_ok(cfg.tail_fraction)?;
    check(!cfg.modes.is_empty(), || "modes must be non-empty".into())?;
    check(cfg.bound_tol >= 0.0 && cfg.dyson_band >= 0.0, || {
        "bound_tol and dyson_band must be non-negative".into()
    })?;
    grid_of(&cfg.grid)
}

fn run_instance(
    named: &NamedInstance,
    grid: &[f64],
    cfg: &ExponentConfig,
) -> Result<InstanceSummary, CliError> {
    let inst = &named.instance;
    let mut estimates = Vec::new();
    for &mode in &cfg.modes {
        let mode = Mode::from(mode);
        let curve = exponent_curve(inst, grid, mode)?;
        let est = estimate_exponents(&curve, cfg.tail_fraction, mode)?;
        estimates.push(EstimateSummary {
            mode: mode.as_str(),
            w_est: F17(est.w_est),
            what_est: F17(est.what_est),
            infinite: est.is_infinite(),
            curve,
        });
    }
    let std = estimates.iter().find(|e| e.mode == Mode::Standard.as_str());
    let mult = estimates.iter().find(|e| e.mode == Mode::Multiplicative.as_str());
    let mult_domination_slack = match (std, mult) {
        (Some(s), Some(m)) => Some(F17(mult_domination_slack(&s.curve, &m.curve))),
        _ => None,
    };
    let transference = if cfg.transference {
        let tol = TransferenceTolerances {
            tail_fraction: cfg.tail_fraction,
            bound_tol: cfg.bound_tol,
            dyson_band: cfg.dyson_band,
        };
        let r = transference_report(inst, grid, tol)?;
        Some(TransferenceSummary {
            w_hom: F17(r.w_hom.w_est),
            what_hom: F17(r.what_hom()),
            w_mult_hom: F17(r.w_mult_hom.w_est),
            w_transpose: F17(r.w_transpose.w_est),
            what_transpose: F17(r.what_transpose()),
            w_inhom: F17(r.w_inhom.w_est),
            what_inhom: F17(r.what_inhom()),
            checks: r
                .checks
                .iter()
                .map(|c| CheckSummary {
                    id: c.id.as_str(),
                    slack: F17(c.slack),
                    satisfied: c.satisfied(),
                })
                .collect(),
        })
    } else {
        None
    };
    Ok(InstanceSummary {
        id: named.id.clone(),
        m: inst.m(),
        n: inst.n(),
        homogeneous: inst.is_homogeneous(),
        estimates,
        mult_domination_slack,
        transference,
    })
}

pub fn run(cfg: &ExponentConfig, seed: Option<u64>) -> Result<JobOutput<ExponentSummary>, CliError> {
    let grid = validate(cfg)?;
    let instances = materialize(&cfg.instances, seed)?;
    let summaries: Vec<InstanceSummary> = instances
        .par_iter()
        .map(|named| run_instance(named, &grid, cfg))
        .collect::<Result<_, _>>()?;

    let mut curves = Table::new(
        "exponent_curves",
        &["instance_id", "m", "n", "mode", "Q", "best_value", "e_of_Q", "q_star"],
    );
    let mut estimates = Table::new(
        "exponent_estimates",
        &["instance_id", "mode", "w_est", "what_est", "infinite"],
    );
    let mut checks = Table::new("transference_checks", &["instance_id", "check", "slack", "satisfied"]);
    let mut violations = Vec::new();
    for s in &summaries {
        for e in &s.estimates {
            for p in &e.curve {
                curves.push(vec![
                    s.id.clone(),
                    s.m.to_string(),
                    s.n.to_string(),
                    e.mode.into(),
                    num(p.scale),
                    num(p.value),
                    num(p.exponent),
                    ints(&p.q_star),
                ]);
            }
            estimates.push(vec![
                s.id.clone(),
                e.mode.into(),
                num(e.w_est.0),
                num(e.what_est.0),
                e.infinite.to_string(),
            ]);
        }
        if let Some(slack) = s.mult_domination_slack {
            if slack.0 < 0.0 {
                violations.push(format!("{}: e_mult < e_std by {}", s.id, -slack.0));
            }
        }
        if let Some(t) = &s.transference {
            for c in &t.checks {
                checks.push(vec![s.id.clone(), c.id.into(), num(c.slack.0), c.satisfied.to_string()]);
            }
        }
    }
    let mut tables = vec![curves, estimates];
    if cfg.transference {
        tables.push(checks);
    }
    Ok(JobOutput {
        tables,
        summary: ExponentSummary {
            grid: grid.iter().map(|&q| F17(q)).collect(),
            tail_fraction: F17(cfg.tail_fraction),
            instances: summaries,
        },
        violations,
    })
}
