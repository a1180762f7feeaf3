//! Agreement of the flow-side membership scan with a brute-force oracle, and
//! round trips through the two transport maps.

use diophantine_core::dynamics::brute_force_membership;
use diophantine_core::{
    enumerate_t, min_g_norm, step1_forward, step2_backward, Admissibility, ApproxInstance,
    LatticePoint, ScalingFunction, Variant,
};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::JobOutput;
use crate::config::{check, ReformulateConfig};
use crate::error::CliError;
use crate::output::{ints, num, nums, Table, F17};
use crate::rng::CounterRng;

/// Relative tolerance for comparing the scan value with the oracle value.
pub const AGREEMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct VariantAgreement {
    pub admissibility: &'static str,
    pub comparisons: usize,
    pub agreements: usize,
    pub witnesses: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundTrip {
    pub index: usize,
    pub scale: F17,
    pub q: i64,
    pub p: i64,
    pub step1_certified: bool,
    pub eta: F17,
    pub step2_certified: bool,
    pub eps_recovered: F17,
    /// `eps_recovered == 2 m eta` bit for bit.
    pub eps_exact: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReformulateSummary {
    pub instances: usize,
    pub v: F17,
    pub eta: F17,
    pub agreement: Vec<VariantAgreement>,
    pub round_trips: Vec<RoundTrip>,
}

struct Comparison {
    instance: usize,
    t: Vec<f64>,
    sigma: f64,
    fast: Option<(f64, LatticePoint)>,
    slow: Option<f64>,
}

impl Comparison {
    fn agree(&self) -> bool {
        match (&self.fast, self.slow) {
            (None, None) => true,
            (Some((a, _)), Some(b)) => (a - b).abs() <= AGREEMENT_TOL * a.abs().max(b.abs()),
            _ => false,
        }
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn planted(cfg: &ReformulateConfig, rng: &CounterRng, k: usize) -> Result<RoundTrip, CliError> {
    let mut r = rng.at(k as u64);
    let log2_q = r.random_range(cfg.planted_log2_q[0]..=cfg.planted_log2_q[1]);
    let scale = (log2_q as f64).exp2();
    let q = r.random_range(1..=scale as i64);
    let p: i64 = r.random_range(-8..=8);
    let theta: f64 = r.random();
    let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
    let resid = sign * r.random_range(0.05..0.5) * scale.powf(-(1.0 + cfg.planted_eps));
    let x = (resid - p as f64 - theta) / q as f64;
    let inst = ApproxInstance::new(1, 1, vec![x], vec![theta])?;
    let alpha = LatticePoint::new(vec![p], vec![q])?;
    let mut trip = RoundTrip {
        index: k,
        scale: F17(scale),
        q,
        p,
        step1_certified: false,
        eta: F17(f64::NAN),
        step2_certified: false,
        eps_recovered: F17(f64::NAN),
        eps_exact: false,
        detail: String::new(),
    };
    let fwd = match step1_forward(&inst, scale, cfg.planted_eps, &alpha) {
        Ok(f) => f,
        Err(e) => {
            trip.detail = format!("step1: {e}");
            return Ok(trip);
        }
    };
    trip.step1_certified = fwd.certified;
    let eta = 0.5 * fwd.eta0;
    trip.eta = F17(eta);
    match step2_backward(&inst, &fwd.flow, eta, &alpha) {
        Ok(back) => {
            trip.step2_certified = back.certified;
            trip.eps_recovered = F17(back.eps);
            trip.eps_exact = back.eps == 2.0 * inst.m() as f64 * eta;
        }
        Err(e) => trip.detail = format!("step2: {e}"),
    }
    Ok(trip)
}

pub fn run(cfg: &ReformulateConfig, seed: Option<u64>) -> Result<JobOutput<ReformulateSummary>, CliError> {
    check(cfg.v >= 0.0 && cfg.v.is_finite(), || format!("v must be finite and >= 0, got {}", cfg.v))?;
    ScalingFunction::new(cfg.eta).map_err(|e| CliError::Config(e.to_string()))?;
    check(!cfg.variants.is_empty(), || "variants must be non-empty".into())?;
    check(cfg.planted_eps > 0.0, || "planted_eps must be positive".into())?;
    check(
        cfg.planted_log2_q[0] >= 2 && cfg.planted_log2_q[0] <= cfg.planted_log2_q[1] && cfg.planted_log2_q[1] <= 40,
        || format!("planted_log2_q must satisfy 2 <= lo <= hi <= 40, got {:?}", cfg.planted_log2_q),
    )?;
    check(cfg.rational.iter().all(|r| r[1] > 0), || "rational denominators must be positive".into())?;
    let needs_seed = cfg.instances > 0 || cfg.round_trips > 0;
    let seed = match (seed, needs_seed) {
        (Some(s), _) => s,
        (None, false) => 0,
        (None, true) => return Err(CliError::Config("reformulate needs `seed`".into())),
    };

    let inst_rng = CounterRng::new(seed, "reformulate/instances");
    let mut instances = Vec::new();
    for r in &cfg.rational {
        instances.push(ApproxInstance::new(1, 1, vec![r[0] as f64 / r[1] as f64], vec![0.0])?);
    }
    for i in 0..cfg.instances {
        let mut r = inst_rng.at(i as u64);
        instances.push(ApproxInstance::new(1, 1, vec![r.random()], vec![r.random()])?);
    }
    let psi = ScalingFunction::new(cfg.eta)?;

    let mut table = Table::new(
        "reformulate_agreement",
        &["instance", "admissibility", "t", "sigma", "scan_value", "oracle_value", "witness_p", "witness_q", "agree"],
    );
    let mut agreement = Vec::new();
    let mut violations = Vec::new();
    for &variant in &cfg.variants {
        let adm = Admissibility::from(variant);
        let ts = enumerate_t(1, 1, cfg.v, Variant::General, adm)?;
        let jobs: Vec<(usize, usize)> = (0..instances.len())
            .flat_map(|i| (0..ts.len()).map(move |k| (i, k)))
            .collect();
        let comps: Vec<Comparison> = jobs
            .par_iter()
            .map(|&(i, k)| {
                let (inst, t) = (&instances[i], &ts[k]);
                let eps = psi.at(t);
                let fast = min_g_norm(inst, t, eps)?.map(|w| (w.value, w.alpha));
                let slow = brute_force_membership(inst, t, eps)?.map(|b| b.0);
                Ok(Comparison {
                    instance: i,
                    t: t.t.clone(),
                    sigma: t.sigma,
                    fast,
                    slow,
                })
            })
            .collect::<Result<_, CliError>>()?;
        let mut agreements = 0;
        for c in &comps {
            let agree = c.agree();
            agreements += agree as usize;
            if !agree {
                violations.push(format!(
                    "{}: instance {} t {:?}: scan {:?} vs oracle {:?}",
                    adm.as_str(),
                    c.instance,
                    c.t,
                    c.fast.as_ref().map(|f| f.0),
                    c.slow
                ));
            }
            let (wp, wq) = match &c.fast {
                Some((_, a)) => (ints(&a.p), ints(&a.q)),
                None => (String::new(), String::new()),
            };
            table.push(vec![
                c.instance.to_string(),
                adm.as_str().into(),
                nums(&c.t),
                num(c.sigma),
                opt_num(c.fast.as_ref().map(|f| f.0)),
                opt_num(c.slow),
                wp,
                wq,
                agree.to_string(),
            ]);
        }
        agreement.push(VariantAgreement {
            admissibility: adm.as_str(),
            comparisons: comps.len(),
            agreements,
            witnesses: comps.iter().filter(|c| c.fast.is_some()).count(),
        });
    }

    let plant_rng = CounterRng::new(seed, "reformulate/planted");
    let round_trips: Vec<RoundTrip> = (0..cfg.round_trips)
        .into_par_iter()
        .map(|k| planted(cfg, &plant_rng, k))
        .collect::<Result<_, _>>()?;
    let mut trips = Table::new(
        "reformulate_round_trips",
        &["index", "Q", "q", "p", "step1_certified", "eta", "step2_certified", "eps_recovered", "eps_exact", "detail"],
    );
    for t in &round_trips {
        if !(t.step1_certified && t.step2_certified && t.eps_exact) {
            violations.push(format!("round trip {} failed: {}", t.index, t.detail));
        }
        trips.push(vec![
            t.index.to_string(),
            num(t.scale.0),
            t.q.to_string(),
            t.p.to_string(),
            t.step1_certified.to_string(),
            num(t.eta.0),
            t.step2_certified.to_string(),
            num(t.eps_recovered.0),
            t.eps_exact.to_string(),
            t.detail.clone(),
        ]);
    }
    Ok(JobOutput {
        tables: vec![table, trips],
        summary: ReformulateSummary {
            instances: instances.len(),
            v: F17(cfg.v),
            eta: F17(cfg.eta),
            agreement,
            round_trips,
        },
        violations,
    })
}
