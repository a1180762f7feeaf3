//! Greedy 5r-covering on random ball families and the essential split on
//! random labelled interval families.

use diophantine_core::geometry::{
    cover_5r, disjointness_bound_check, essential_mass_bound, essential_split, Ball, BallFamily,
    Interval,
};
use diophantine_core::MeasureModel;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::JobOutput;
use crate::config::{check, BallSweep, CoverConfig, IntervalSweep};
use crate::error::CliError;
use crate::output::{num, nums, Table, F17};
use crate::rng::CounterRng;

#[derive(Debug, Clone, Serialize)]
pub struct FamilyReport {
    pub family: usize,
    pub input: usize,
    pub selected: usize,
    /// Accepted pairs that are not strictly separated.
    pub disjointness_violations: usize,
    /// Input balls outside the 5-dilate of their witness.
    pub containment_violations: usize,
    /// Sampled points of the input union outside every accepted 5-dilate.
    pub sample_violations: usize,
    pub sampled_points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalReport {
    pub instance: usize,
    pub families: usize,
    pub intervals: usize,
    pub c_measured: F17,
    pub total_mass: F17,
    pub applicable: bool,
    pub lemma_bound_holds: bool,
    pub essential: usize,
    pub inessential: usize,
    pub essential_mass: F17,
    pub essential_bound_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverSummary {
    pub families: Vec<FamilyReport>,
    pub interval_instances: Vec<IntervalReport>,
}

fn random_family(cfg: &BallSweep, rng: &CounterRng, f: usize) -> Result<BallFamily, CliError> {
    let balls = (0..cfg.balls_per_family)
        .map(|i| {
            let mut r = rng.at((f * cfg.balls_per_family + i) as u64);
            let center: Vec<f64> = (0..cfg.dim).map(|_| r.random_range(0.0..cfg.extent)).collect();
            let radius = r.random_range(cfg.radius_range[0]..=cfg.radius_range[1]);
            Ball::new(center, radius)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BallFamily::new(balls)?)
}

/// Uniform point of the input union, drawn by picking a ball and rejection sampling.
fn sample_point(fam: &BallFamily, r: &mut impl Rng) -> Vec<f64> {
    let b = &fam.balls[r.random_range(0..fam.len())];
    loop {
        let p: Vec<f64> = b
            .center
            .iter()
            .map(|c| c + b.radius * r.random_range(-1.0..1.0))
            .collect();
        if b.contains(&p) {
            return p;
        }
    }
}

fn ball_sweep(
    cfg: &BallSweep,
    seed: u64,
    tables: &mut Vec<Table>,
    violations: &mut Vec<String>,
) -> Result<Vec<FamilyReport>, CliError> {
    check(cfg.dim >= 1, || "balls.dim must be at least 1".into())?;
    check(cfg.extent > 0.0, || "balls.extent must be positive".into())?;
    check(
        cfg.radius_range[0] > 0.0 && cfg.radius_range[0] <= cfg.radius_range[1] && cfg.radius_range[1].is_finite(),
        || format!("balls.radius_range must satisfy 0 < lo <= hi, got {:?}", cfg.radius_range),
    )?;
    let ball_rng = CounterRng::new(seed, "cover/balls");
    let point_rng = CounterRng::new(seed, "cover/points");
    let results = (0..cfg.families)
        .into_par_iter()
        .map(|f| {
            let fam = random_family(cfg, &ball_rng, f)?;
            let sel = cover_5r(&fam);
            let chosen = sel.family(&fam);
            let mut disjoint = 0;
            for i in 0..chosen.len() {
                for j in i + 1..chosen.len() {
                    if !chosen.balls[i].disjoint_from(&chosen.balls[j]) {
                        disjoint += 1;
                    }
                }
            }
            let containment = sel.containment_violations(&fam).len();
            let sampled = if fam.is_empty() { 0 } else { cfg.sample_points };
            let mut missed = 0;
            for k in 0..sampled {
                let p = sample_point(&fam, &mut point_rng.at((f * cfg.sample_points + k) as u64));
                let covered = chosen.balls.iter().any(|b| {
                    let d: f64 = b.center.iter().zip(&p).map(|(a, x)| (a - x) * (a - x)).sum();
                    d.sqrt() < 5.0 * b.radius
                });
                missed += !covered as usize;
            }
            let report = FamilyReport {
                family: f,
                input: fam.len(),
                selected: sel.selected.len(),
                disjointness_violations: disjoint,
                containment_violations: containment,
                sample_violations: missed,
                sampled_points: sampled,
            };
            Ok((report, chosen, sel.selected))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut fam_table = Table::new(
        "cover_families",
        &["family", "input", "selected", "disjointness_violations", "containment_violations", "sampled_points", "sample_violations"],
    );
    let mut sel_table = Table::new("cover_selected", &["family", "input_index", "center", "radius"]);
    let mut reports = Vec::new();
    for (rep, chosen, idx) in results {
        if rep.disjointness_violations + rep.containment_violations + rep.sample_violations > 0 {
            violations.push(format!(
                "family {}: {} overlapping pairs, {} uncovered balls, {} uncovered points",
                rep.family, rep.disjointness_violations, rep.containment_violations, rep.sample_violations
            ));
        }
        fam_table.push(vec![
            rep.family.to_string(),
            rep.input.to_string(),
            rep.selected.to_string(),
            rep.disjointness_violations.to_string(),
            rep.containment_violations.to_string(),
            rep.sampled_points.to_string(),
            rep.sample_violations.to_string(),
        ]);
        for (b, i) in chosen.balls.iter().zip(idx) {
            sel_table.push(vec![rep.family.to_string(), i.to_string(), nums(&b.center), num(b.radius)]);
        }
        reports.push(rep);
    }
    tables.push(fam_table);
    tables.push(sel_table);
    Ok(reports)
}

/// `count` disjoint intervals of `[0, 1]`: consecutive pairs of sorted uniform points.
fn disjoint_intervals(r: &mut impl Rng, count: usize) -> Vec<Interval> {
    let mut pts: Vec<f64> = (0..2 * count).map(|_| r.random()).collect();
    pts.sort_by(f64::total_cmp);
    pts.chunks(2)
        .map(|c| Interval::new(c[0], c[1]))
        .filter(|iv| iv.lo < iv.hi)
        .collect()
}

fn interval_sweep(
    cfg: &IntervalSweep,
    seed: u64,
    tables: &mut Vec<Table>,
    violations: &mut Vec<String>,
) -> Result<Vec<IntervalReport>, CliError> {
    check(cfg.families[0] <= cfg.families[1], || "intervals.families must satisfy lo <= hi".into())?;
    check(cfg.per_family[0] <= cfg.per_family[1], || "intervals.per_family must satisfy lo <= hi".into())?;
    let mu = MeasureModel::LebesgueInterval { lo: 0.0, hi: 1.0 };
    let omega = 1.0;
    let rng = CounterRng::new(seed, "cover/intervals");
    let results = (0..cfg.instances)
        .into_par_iter()
        .map(|k| {
            let mut r = rng.at(k as u64);
            let nf = r.random_range(cfg.families[0]..=cfg.families[1]);
            let families: Vec<Vec<Interval>> = (0..nf)
                .map(|_| {
                    let c = r.random_range(cfg.per_family[0]..=cfg.per_family[1]);
                    disjoint_intervals(&mut r, c)
                })
                .collect();
            let all: Vec<Interval> = families.iter().flatten().copied().collect();
            let lemma = disjointness_bound_check(&all, &mu, omega)?;
            let split = essential_split(&families, &mu)?;
            let mass = essential_mass_bound(&split, omega);
            let report = IntervalReport {
                instance: k,
                families: nf,
                intervals: all.len(),
                c_measured: F17(lemma.c_measured),
                total_mass: F17(lemma.total_mass),
                applicable: lemma.applicable,
                lemma_bound_holds: lemma.bound_holds,
                essential: split.essential().count(),
                inessential: split.inessential().count(),
                essential_mass: F17(mass.total),
                essential_bound_holds: mass.holds,
            };
            Ok((report, families, split))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut inst_table = Table::new(
        "cover_intervals",
        &[
            "instance", "families", "intervals", "c_measured", "total_mass", "applicable",
            "lemma_bound_holds", "essential", "inessential", "essential_mass", "essential_bound_holds",
        ],
    );
    let mut split_table = Table::new(
        "cover_essential",
        &["instance", "family", "index", "lo", "hi", "overlap_fraction", "essential"],
    );
    let mut reports = Vec::new();
    for (rep, families, split) in results {
        if rep.applicable && !rep.lemma_bound_holds {
            violations.push(format!(
                "interval instance {}: sum {} exceeds 1/(1 - {})",
                rep.instance, rep.total_mass.0, rep.c_measured.0
            ));
        }
        if !rep.essential_bound_holds {
            violations.push(format!(
                "interval instance {}: essential mass {} > 2",
                rep.instance, rep.essential_mass.0
            ));
        }
        inst_table.push(vec![
            rep.instance.to_string(),
            rep.families.to_string(),
            rep.intervals.to_string(),
            num(rep.c_measured.0),
            num(rep.total_mass.0),
            rep.applicable.to_string(),
            rep.lemma_bound_holds.to_string(),
            rep.essential.to_string(),
            rep.inessential.to_string(),
            num(rep.essential_mass.0),
            rep.essential_bound_holds.to_string(),
        ]);
        for e in &split.entries {
            let iv = families[e.family][e.index];
            split_table.push(vec![
                rep.instance.to_string(),
                e.family.to_string(),
                e.index.to_string(),
                num(iv.lo),
                num(iv.hi),
                num(e.overlap_fraction),
                e.essential.to_string(),
            ]);
        }
        reports.push(rep);
    }
    tables.push(inst_table);
    tables.push(split_table);
    Ok(reports)
}

pub fn run(cfg: &CoverConfig, seed: Option<u64>) -> Result<JobOutput<CoverSummary>, CliError> {
    check(cfg.balls.is_some() || cfg.intervals.is_some(), || {
        "cover needs at least one of balls, intervals".into()
    })?;
    let seed = seed.ok_or_else(|| CliError::Config("cover needs `seed`".into()))?;
    let mut tables = Vec::new();
    let mut violations = Vec::new();
    let families = match &cfg.balls {
        Some(b) => ball_sweep(b, seed, &mut tables, &mut violations)?,
        None => Vec::new(),
    };
    let interval_instances = match &cfg.intervals {
        Some(iv) => interval_sweep(iv, seed, &mut tables, &mut violations)?,
        None => Vec::new(),
    };
    Ok(JobOutput {
        tables,
        summary: CoverSummary {
            families,
            interval_instances,
        },
        violations,
    })
}
