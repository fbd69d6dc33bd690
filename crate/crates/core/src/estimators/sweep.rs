use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{mean, sample_variance};
use super::{run_trajectory, TrajectoryEstimate, DEFAULT_BATCHES};
use crate::coupling::CouplingKind;
use crate::dynamics::{ModelSpec, Observable, SimParams};
use crate::error::{Error, Result};
use crate::noise::NoiseSource;

/// A cell is invalid once more than this fraction of its replicas blew up.
pub const MAX_BLOWUP_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub n_batches: usize,
    /// Reference mean of the observable, subtracted by standard NEMD only.
    pub r0_mean: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            n_batches: DEFAULT_BATCHES,
            r0_mean: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaRecord {
    pub kind: CouplingKind,
    pub eta: f64,
    pub replica: u64,
    pub estimate: Option<TrajectoryEstimate>,
    /// Description of the blow-up that aborted this replica.
    pub blowup: Option<String>,
}

/// Aggregate over the replicas of one `(kind, η)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub kind: CouplingKind,
    pub eta: f64,
    pub params: SimParams,
    /// Mean of the per-replica estimates.
    pub alpha_hat: f64,
    /// Standard error of `alpha_hat`; NaN with fewer than two valid replicas.
    pub se: f64,
    /// Empirical variance of the per-replica estimates.
    pub cross_var: f64,
    pub asym_var_hat: f64,
    pub summand_var: f64,
    pub meet_fraction: Option<f64>,
    pub mean_sq_dist: Option<f64>,
    pub n_valid: usize,
    pub blowups: usize,
    pub valid: bool,
    pub records: Vec<ReplicaRecord>,
}

impl ExperimentResult {
    fn aggregate(kind: CouplingKind, params: SimParams, records: Vec<ReplicaRecord>) -> Self {
        let ests: Vec<TrajectoryEstimate> = records.iter().filter_map(|r| r.estimate).collect();
        let blowups = records.len() - ests.len();
        let alphas: Vec<f64> = ests.iter().map(|e| e.alpha_hat).collect();
        let cross_var = sample_variance(&alphas);
        let field_mean = |f: &dyn Fn(&TrajectoryEstimate) -> f64| -> f64 {
            mean(&ests.iter().map(f).collect::<Vec<_>>())
        };
        let opt_mean = |f: &dyn Fn(&TrajectoryEstimate) -> Option<f64>| -> Option<f64> {
            let v: Option<Vec<f64>> = ests.iter().map(f).collect();
            v.filter(|v| !v.is_empty()).map(|v| mean(&v))
        };
        ExperimentResult {
            kind,
            eta: params.eta,
            params,
            alpha_hat: mean(&alphas),
            se: (cross_var / alphas.len() as f64).sqrt(),
            cross_var,
            asym_var_hat: field_mean(&|e| e.asym_var_hat),
            summand_var: field_mean(&|e| e.summand_var),
            meet_fraction: opt_mean(&|e| e.meet_fraction),
            mean_sq_dist: opt_mean(&|e| e.mean_sq_dist),
            n_valid: ests.len(),
            blowups,
            valid: !ests.is_empty()
                && (blowups as f64) <= MAX_BLOWUP_FRACTION * records.len() as f64,
            records,
        }
    }
}

/// Runs `replicas` trajectories for every `(kind, η)` pair.
///
/// Replica `r` draws from the stream keyed by `p.seed ^ r` in every cell, so
/// cells are paired replica by replica. Output order is `kinds × etas` as
/// given; results do not depend on the number of worker threads.
pub fn eta_sweep(
    kinds: &[CouplingKind],
    model: &ModelSpec,
    obs: &Observable,
    etas: &[f64],
    replicas: u64,
    p: &SimParams,
    opts: &SweepOptions,
) -> Result<Vec<ExperimentResult>> {
    eta_sweep_with_progress(kinds, model, obs, etas, replicas, p, opts, |_| {})
}

#[allow(clippy::too_many_arguments)]
pub fn eta_sweep_with_progress(
    kinds: &[CouplingKind],
    model: &ModelSpec,
    obs: &Observable,
    etas: &[f64],
    replicas: u64,
    p: &SimParams,
    opts: &SweepOptions,
    mut on_cell: impl FnMut(&ExperimentResult),
) -> Result<Vec<ExperimentResult>> {
    if kinds.is_empty() || etas.is_empty() {
        return Err(Error::param("sweep needs at least one kind and one eta"));
    }
    if let Some(bad) = etas.iter().find(|e| **e == 0.0 || !e.is_finite()) {
        return Err(Error::param(format!(
            "sweep etas must be finite and nonzero, got {bad}"
        )));
    }
    if replicas == 0 {
        return Err(Error::param("replicas must be >= 1"));
    }
    p.validate()?;
    let mut cells = Vec::with_capacity(kinds.len() * etas.len());
    for &kind in kinds {
        for &eta in etas {
            let cell_params = p.with_eta(eta);
            let records: Vec<ReplicaRecord> = (0..replicas)
                .into_par_iter()
                .map(|r| {
                    let noise = NoiseSource::for_replica(p.seed, r);
                    let out = run_trajectory(
                        kind,
                        model,
                        obs,
                        &cell_params,
                        opts.r0_mean,
                        opts.n_batches,
                        eta,
                        noise,
                    );
                    match out {
                        Ok(est) => Ok(ReplicaRecord {
                            kind,
                            eta,
                            replica: r,
                            estimate: Some(est),
                            blowup: None,
                        }),
                        Err(e) if e.is_blow_up() => Ok(ReplicaRecord {
                            kind,
                            eta,
                            replica: r,
                            estimate: None,
                            blowup: Some(e.to_string()),
                        }),
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<_>>()?;
            let cell = ExperimentResult::aggregate(kind, cell_params, records);
            on_cell(&cell);
            cells.push(cell);
        }
    }
    Ok(cells)
}
