pub mod certify;
pub mod cover;
pub mod exponent;
pub mod extremal;
pub mod reformulate;

use diophantine_core::{default_grid, ApproxInstance};
use rand::Rng;
use serde::Serialize;

use crate::config::{check, GridSpec, InstanceSpec, ThetaSpec};
use crate::error::CliError;
use crate::output::Table;
use crate::rng::CounterRng;

/// Tables, a typed summary, and any property violations found by one job.
#[derive(Debug, Clone)]
pub struct JobOutput<S> {
    pub tables: Vec<Table>,
    pub summary: S,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedInstance {
    pub id: String,
    pub instance: ApproxInstance,
}

pub fn materialize(specs: &[InstanceSpec], seed: Option<u64>) -> Result<Vec<NamedInstance>, CliError> {
    let mut out = Vec::new();
    for spec in specs {
        match spec {
            InstanceSpec::Explicit { id, m, n, x, theta } => {
                let theta = theta.clone().unwrap_or_else(|| vec![0.0; *m]);
                let instance = ApproxInstance::new(*m, *n, x.clone(), theta)
                    .map_err(|e| CliError::Config(format!("instance {id}: {e}")))?;
                out.push(NamedInstance { id: id.clone(), instance });
            }
            InstanceSpec::Random { id_prefix, stream, count, dims, theta } => {
                check(!dims.is_empty(), || format!("{id_prefix}: dims must be non-empty"))?;
                check(dims.iter().all(|d| d[0] >= 1 && d[1] >= 1), || {
                    format!("{id_prefix}: dimensions must be at least 1")
                })?;
                let seed = seed.ok_or_else(|| {
                    CliError::Config(format!("{id_prefix}: random instances need `seed`"))
                })?;
                let stream = stream.as_deref().unwrap_or(id_prefix);
                let rng = CounterRng::new(seed, &format!("instances/{stream}"));
                for i in 0..*count {
                    let [m, n] = dims[i % dims.len()];
                    let mut r = rng.at(i as u64);
                    let x: Vec<f64> = (0..m * n).map(|_| r.random()).collect();
                    let theta = match theta {
                        ThetaSpec::Zero => vec![0.0; m],
                        ThetaSpec::Random => (0..m).map(|_| r.random()).collect(),
                        ThetaSpec::Explicit { values } => {
                            check(values.len() == m, || {
                                format!("{id_prefix}: theta has {} entries, m = {m}", values.len())
                            })?;
                            values.clone()
                        }
                    };
                    let instance = ApproxInstance::new(m, n, x, theta)?;
                    out.push(NamedInstance {
                        id: format!("{id_prefix}-{i:04}"),
                        instance,
                    });
                }
            }
        }
    }
    check(!out.is_empty(), || "no instances configured".into())?;
    Ok(out)
}

pub fn grid_of(spec: &GridSpec) -> Result<Vec<f64>, CliError> {
    let grid = match (&spec.scales, spec.q_max) {
        (Some(s), None) => s.clone(),
        (None, Some(q)) => {
            check(q.is_finite() && q >= 10.0, || format!("q_max must be >= 10, got {q}"))?;
            default_grid(q)
        }
        _ => return Err(CliError::Config("grid needs exactly one of `scales` or `q_max`".into())),
    };
    check(!grid.is_empty(), || "grid is empty".into())?;
    check(grid[0] > 1.0, || "grid scales must exceed 1".into())?;
    check(grid.windows(2).all(|w| w[0] < w[1]), || {
        "grid must be strictly increasing".into()
    })?;
    Ok(grid)
}

pub(crate) fn tail_fraction_ok(f: f64) -> Result<(), CliError> {
    check(f > 0.0 && f <= 1.0, || format!("tail_fraction must lie in (0, 1], got {f}"))
}
