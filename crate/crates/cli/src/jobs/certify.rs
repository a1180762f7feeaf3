//! Contracting, decaying and doubling certificates on seeded sweeps.

use diophantine_core::geometry::{
    calibrate_decay_constant, cantor_alpha, cantor_point, contracting_certificate,
    ContractingCertificate, DecayParams, DecayProbe,
};
use diophantine_core::{CurveModel, MeasureModel, NeighborhoodSpec, Plane, PolyCurve};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::JobOutput;
use crate::config::{check, check_range, CertifyConfig, ContractingSweep, DecayingSweep, DoublingSweep};
use crate::error::CliError;
use crate::output::{num, nums, Table, F17};
use crate::rng::CounterRng;

#[derive(Debug, Clone, Serialize)]
pub struct ContractingSummary {
    pub requested: usize,
    pub collected: usize,
    pub attempts_used: usize,
    pub failures: usize,
    pub max_ratio_over_bound: F17,
    pub max_rel_error: F17,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayingSummary {
    pub alpha: F17,
    pub c_calibrated: F17,
    pub probes: usize,
    pub failures: usize,
    pub max_ratio_over_bound: F17,
}

#[derive(Debug, Clone, Serialize)]
pub struct DoublingSummary {
    pub lambda: F17,
    pub balls: usize,
    pub failures: usize,
    pub max_ratio: F17,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifySummary {
    pub contracting: Option<ContractingSummary>,
    pub decaying: Option<DecayingSummary>,
    pub doubling: Option<DoublingSummary>,
}

struct Attempt {
    x0: f64,
    delta: f64,
    eps: Vec<f64>,
    target: Vec<f64>,
    cert: ContractingCertificate,
}

fn contracting(
    cfg: &ContractingSweep,
    seed: u64,
    tables: &mut Vec<Table>,
    violations: &mut Vec<String>,
) -> Result<ContractingSummary, CliError> {
    check(cfg.degree >= 1, || "contracting.degree must be at least 1".into())?;
    check_range("contracting.delta_range", cfg.delta_range, f64::MIN_POSITIVE, 0.5)?;
    check(cfg.delta_range[1] < 0.5, || "contracting.delta_range must stay below 1/2".into())?;
    check_range("contracting.eps_fraction_range", cfg.eps_fraction_range, f64::MIN_POSITIVE, 1.0)?;
    check(cfg.eps_fraction_range[1] < 1.0, || "eps fractions must stay below 1".into())?;
    let curve = PolyCurve::veronese(cfg.degree, cfg.x_lo, cfg.x_hi, cfg.kappa)
        .map_err(|e| CliError::Config(format!("contracting curve: {e}")))?;
    let r0 = curve.r0();
    let rng = CounterRng::new(seed, "certify/contracting");
    let attempt = |r: &mut ChaCha8Rng| -> Result<Attempt, CliError> {
        let x0 = r.random_range(cfg.x_lo..cfg.x_hi);
        let delta = r.random_range(cfg.delta_range[0]..=cfg.delta_range[1]);
        let eps: Vec<f64> = (0..cfg.degree)
            .map(|_| r0 * r.random_range(cfg.eps_fraction_range[0]..=cfg.eps_fraction_range[1]))
            .collect();
        let target: Vec<f64> = curve
            .eval(x0)
            .iter()
            .zip(&eps)
            .map(|(g, e)| g + 1.5 * delta * e * r.random_range(-1.0..1.0))
            .collect();
        let plane = Plane::point(&target)?;
        let spec = NeighborhoodSpec::new(eps.clone(), Some(delta))?;
        let cert = contracting_certificate(&curve, &plane, &spec)?;
        Ok(Attempt { x0, delta, eps, target, cert })
    };
    let attempts: Vec<Attempt> = (0..cfg.max_attempts)
        .into_par_iter()
        .map(|i| attempt(&mut rng.at(i as u64)))
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(
        "certify_contracting",
        &[
            "attempt", "x0", "delta", "eps", "target", "center", "ratio", "bound", "ratio_holds",
            "ball_inside", "mass_lower_holds", "rel_error",
        ],
    );
    let mut collected = 0;
    let mut attempts_used = 0;
    let mut failures = 0;
    let mut max_ratio: f64 = 0.0;
    let mut max_err: f64 = 0.0;
    for (i, a) in attempts.iter().enumerate() {
        if collected == cfg.certificates {
            break;
        }
        attempts_used = i + 1;
        if a.cert.vacuous {
            continue;
        }
        collected += 1;
        let c = &a.cert;
        max_ratio = max_ratio.max(c.ratio / c.bound);
        max_err = max_err.max(c.rel_error);
        if !c.holds() || c.rel_error > cfg.max_rel_error {
            failures += 1;
            violations.push(format!(
                "contracting attempt {i}: ratio {} bound {} inside {} mass {} rel_error {}",
                c.ratio, c.bound, c.ball_inside, c.mass_lower_holds, c.rel_error
            ));
        }
        table.push(vec![
            i.to_string(),
            num(a.x0),
            num(a.delta),
            nums(&a.eps),
            nums(&a.target),
            num(c.center),
            num(c.ratio),
            num(c.bound),
            c.ratio_holds.to_string(),
            c.ball_inside.to_string(),
            c.mass_lower_holds.to_string(),
            num(c.rel_error),
        ]);
    }
    if collected < cfg.certificates {
        violations.push(format!(
            "only {collected} of {} non-vacuous certificates within {} attempts",
            cfg.certificates, cfg.max_attempts
        ));
    }
    tables.push(table);
    Ok(ContractingSummary {
        requested: cfg.certificates,
        collected,
        attempts_used,
        failures,
        max_ratio_over_bound: F17(max_ratio),
        max_rel_error: F17(max_err),
    })
}

/// A ball centred in the Cantor set with radius `u 3^{-k}`.
fn cantor_ball(r: &mut ChaCha8Rng, max_level: u32) -> (f64, f64) {
    let center = cantor_point(r.random());
    let k = r.random_range(0..=max_level) as i32;
    (center, 3f64.powi(-k) * r.random_range(0.2..1.0))
}

fn probes(rng: &CounterRng, count: usize, max_level: u32) -> Vec<DecayProbe> {
    (0..count)
        .map(|i| {
            let mut r = rng.at(i as u64);
            let (center, radius) = cantor_ball(&mut r, max_level);
            DecayProbe {
                center,
                radius,
                target: center + radius * r.random_range(-1.0..1.0),
                eps: radius * 10f64.powf(-3.0 * r.random::<f64>()),
            }
        })
        .collect()
}

fn decaying(
    cfg: &DecayingSweep,
    seed: u64,
    tables: &mut Vec<Table>,
    violations: &mut Vec<String>,
) -> Result<DecayingSummary, CliError> {
    check(cfg.max_level <= 15, || "decaying.max_level must be at most 15".into())?;
    check(cfg.margin >= 1.0, || "decaying.margin must be at least 1".into())?;
    check(cfg.calibration_probes >= 1, || "decaying.calibration_probes must be positive".into())?;
    let mu = MeasureModel::Cantor;
    let alpha = cantor_alpha();
    let calib = probes(&CounterRng::new(seed, "certify/decay-calibration"), cfg.calibration_probes, cfg.max_level);
    let c = calibrate_decay_constant(&mu, &calib, alpha, cfg.margin)?;
    let params = DecayParams { c, alpha };
    let tests = probes(&CounterRng::new(seed, "certify/decay-probes"), cfg.probes, cfg.max_level);
    let results = tests
        .par_iter()
        .map(|p| p.evaluate(&mu, params))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(
        "certify_decaying",
        &["probe", "center", "radius", "target", "eps", "ratio", "d_norm", "bound", "holds"],
    );
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for (i, (p, d)) in tests.iter().zip(&results).enumerate() {
        worst = worst.max(d.ratio / d.bound);
        if !d.holds() {
            failures += 1;
            violations.push(format!("decaying probe {i}: ratio {} > bound {}", d.ratio, d.bound));
        }
        table.push(vec![
            i.to_string(),
            num(p.center),
            num(p.radius),
            num(p.target),
            num(p.eps),
            num(d.ratio),
            num(d.d_norm),
            num(d.bound),
            d.holds().to_string(),
        ]);
    }
    tables.push(table);
    Ok(DecayingSummary {
        alpha: F17(alpha),
        c_calibrated: F17(c),
        probes: tests.len(),
        failures,
        max_ratio_over_bound: F17(worst),
    })
}

fn doubling(
    cfg: &DoublingSweep,
    seed: u64,
    tables: &mut Vec<Table>,
    violations: &mut Vec<String>,
) -> Result<DoublingSummary, CliError> {
    check(cfg.max_level <= 30, || "doubling.max_level must be at most 30".into())?;
    check(cfg.lambda >= 1.0, || "doubling.lambda must be at least 1".into())?;
    let mu = MeasureModel::Cantor;
    let rng = CounterRng::new(seed, "certify/doubling");
    let rows = (0..cfg.balls)
        .into_par_iter()
        .map(|i| {
            let (center, radius) = cantor_ball(&mut rng.at(i as u64), cfg.max_level);
            Ok((center, radius, mu.doubling_ratio(&[center], radius)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut table = Table::new("certify_doubling", &["ball", "center", "radius", "ratio", "holds"]);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for (i, &(c, r, ratio)) in rows.iter().enumerate() {
        worst = worst.max(ratio);
        let holds = ratio <= cfg.lambda;
        if !holds {
            failures += 1;
            violations.push(format!("doubling ball {i}: ratio {ratio} > {}", cfg.lambda));
        }
        table.push(vec![i.to_string(), num(c), num(r), num(ratio), holds.to_string()]);
    }
    tables.push(table);
    Ok(DoublingSummary {
        lambda: F17(cfg.lambda),
        balls: rows.len(),
        failures,
        max_ratio: F17(worst),
    })
}

pub fn run(cfg: &CertifyConfig, seed: Option<u64>) -> Result<JobOutput<CertifySummary>, CliError> {
    check(
        cfg.contracting.is_some() || cfg.decaying.is_some() || cfg.doubling.is_some(),
        || "certify needs at least one of contracting, decaying, doubling".into(),
    )?;
    let seed = seed.ok_or_else(|| CliError::Config("certify needs `seed`".into()))?;
    let mut tables = Vec::new();
    let mut violations = Vec::new();
    let summary = CertifySummary {
        contracting: cfg
            .contracting
            .as_ref()
            .map(|c| contracting(c, seed, &mut tables, &mut violations))
            .transpose()?,
        decaying: cfg
            .decaying
            .as_ref()
            .map(|c| decaying(c, seed, &mut tables, &mut violations))
            .transpose()?,
        doubling: cfg
            .doubling
            .as_ref()
            .map(|c| doubling(c, seed, &mut tables, &mut violations))
            .transpose()?,
    };
    Ok(JobOutput {
        tables,
        summary,
        violations,
    })
}
