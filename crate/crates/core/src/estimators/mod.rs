//! Trajectory estimators of the transport coefficient and the replica harness.

mod chain;
mod fit;
mod stats;
mod sweep;

pub use chain::CoupledChain;
pub use fit::{linear_response_fit, LinearFit};
pub use stats::{
    batch_means_variance, compensated_sum, mean, sample_variance, CompensatedSum, RunningMoments,
};
pub use sweep::{
    eta_sweep, eta_sweep_with_progress, ExperimentResult, ReplicaRecord, SweepOptions,
};

use serde::{Deserialize, Serialize};

use crate::coupling::{CoupledState, CouplingKind};
use crate::dynamics::{advance, ensure_finite, ModelSpec, Observable, SimParams};
use crate::error::{Error, Result};
use crate::noise::NoiseSource;

pub const DEFAULT_BATCHES: usize = 50;
/// Leading fraction of each measured trajectory left out of the batch means.
pub const BATCH_DISCARD_FRACTION: f64 = 0.1;

/// Running statistics of the summands `R(X_n) - R(Y_n)` (or `R(X_n) - r0` for
/// standard NEMD) over `n = 1..=N`, before division by `η`.
///
/// Batches cover the trailing `n_batches * m` steps, `m = ⌊0.9 N / n_batches⌋`.
#[derive(Debug, Clone)]
pub struct EstimatorAccumulator {
    total: u64,
    count: u64,
    sum: CompensatedSum,
    moments: RunningMoments,
    batch_len: u64,
    batch_start: u64,
    batch_sums: Vec<CompensatedSum>,
    dist2: CompensatedSum,
    met_steps: u64,
}

impl EstimatorAccumulator {
    pub fn new(n_steps: u64, n_batches: usize) -> Self {
        let retained = n_steps - (n_steps as f64 * BATCH_DISCARD_FRACTION).floor() as u64;
        let batch_len = if n_batches >= 2 {
            retained / n_batches as u64
        } else {
            0
        };
        let (batch_start, batch_sums) = if batch_len == 0 {
            (n_steps, Vec::new())
        } else {
            (
                n_steps - batch_len * n_batches as u64,
                vec![CompensatedSum::default(); n_batches],
            )
        };
        EstimatorAccumulator {
            total: n_steps,
            count: 0,
            sum: CompensatedSum::default(),
            moments: RunningMoments::default(),
            batch_len,
            batch_start,
            batch_sums,
            dist2: CompensatedSum::default(),
            met_steps: 0,
        }
    }

    #[inline]
    pub fn push(&mut self, summand: f64, dist2: f64, met: bool) {
        self.count += 1;
        self.sum.add(summand);
        self.moments.push(summand);
        if self.count > self.batch_start && self.batch_len > 0 {
            let b = ((self.count - self.batch_start - 1) / self.batch_len) as usize;
            self.batch_sums[b].add(summand);
        }
        self.dist2.add(dist2);
        self.met_steps += met as u64;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Divides by `divisor` (normally `η`) and packages the statistics.
    pub fn finish(&self, divisor: f64, dt: f64, coupled: bool) -> TrajectoryEstimate {
        let n = self.count as f64;
        let asym_var_hat = if self.batch_sums.is_empty() || self.count < self.total {
            f64::NAN
        } else {
            let means: Vec<f64> = self
                .batch_sums
                .iter()
                .map(|s| s.value() / self.batch_len as f64)
                .collect();
            stats::batch_means_from_block_means(&means, self.batch_len as usize, dt)
                / (divisor * divisor)
        };
        TrajectoryEstimate {
            alpha_hat: self.sum.value() / (n * divisor),
            summand_var: self.moments.variance() / (divisor * divisor),
            asym_var_hat,
            meet_fraction: coupled.then(|| self.met_steps as f64 / n),
            mean_sq_dist: coupled.then(|| self.dist2.value() / n),
            n_steps: self.count,
        }
    }
}

/// Result of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEstimate {
    pub alpha_hat: f64,
    /// Per-step variance of the summands divided by `η`.
    pub summand_var: f64,
    /// Batch-means estimate of the asymptotic variance at rate `sqrt(N Δt)`.
    pub asym_var_hat: f64,
    /// Fraction of steps with `x = y`; `None` for standard NEMD.
    pub meet_fraction: Option<f64>,
    /// Time average of `|x - y|²`; `None` for standard NEMD.
    pub mean_sq_dist: Option<f64>,
    pub n_steps: u64,
}

/// Runs `n_burnin` steps of the unperturbed chain from the model's default
/// start and returns the glued pair `(x, x)`.
pub fn burn_in_init(model: &ModelSpec, p: &SimParams) -> Result<CoupledState> {
    let mut noise = NoiseSource::from_seed(p.seed);
    burn_in_with(model, p, &mut noise)
}

pub(crate) fn burn_in_with(
    model: &ModelSpec,
    p: &SimParams,
    noise: &mut NoiseSource,
) -> Result<CoupledState> {
    let d = model.dim;
    let mut x = model.default_start();
    let mut next = vec![0.0; d];
    let mut drift = vec![0.0; d];
    let mut g = vec![0.0; d];
    let scale = p.noise_scale();
    for k in 0..p.n_burnin {
        model.drift_into(&x, &mut drift).map_err(|e| e.at_step(k))?;
        noise.fill_gaussian(&mut g);
        advance(&x, &drift, None, 0.0, p.dt, scale, &g, &mut next);
        ensure_finite(&next, "burn-in state").map_err(|e| e.at_step(k + 1))?;
        std::mem::swap(&mut x, &mut next);
    }
    Ok(CoupledState::glued(x))
}

/// Burn-in followed by `n_steps` steps of `kind`, drawing all randomness from `noise`.
/// `divisor` is `η` for the estimators proper.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_trajectory(
    kind: CouplingKind,
    model: &ModelSpec,
    obs: &Observable,
    p: &SimParams,
    r0_mean: f64,
    n_batches: usize,
    divisor: f64,
    mut noise: NoiseSource,
) -> Result<TrajectoryEstimate> {
    p.validate()?;
    let start = burn_in_with(model, p, &mut noise)?;
    let mut chain = CoupledChain::new(kind, model, *p, start, noise)?;
    let mut acc = EstimatorAccumulator::new(p.n_steps, n_batches);
    let coupled = kind.is_coupled();
    for _ in 0..p.n_steps {
        chain.step()?;
        let rx = obs.eval_with_drift(chain.x(), chain.drift_x());
        if coupled {
            let (summand, d2) = if chain.met() {
                (0.0, 0.0)
            } else {
                let ry = obs.eval_with_drift(chain.y(), chain.drift_y());
                let d2: f64 = chain
                    .x()
                    .iter()
                    .zip(chain.y())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (rx - ry, d2)
            };
            acc.push(summand, d2, chain.met());
        } else {
            acc.push(rx - r0_mean, 0.0, false);
        }
    }
    let est = acc.finish(divisor, p.dt, coupled);
    if !est.alpha_hat.is_finite() {
        return Err(Error::blow_up("non-finite estimate").at_step(p.n_steps));
    }
    Ok(est)
}

fn require_nonzero_eta(p: &SimParams) -> Result<()> {
    if p.eta == 0.0 {
        return Err(Error::param(
            "eta must be nonzero for the transport estimators",
        ));
    }
    Ok(())
}

/// Standard NEMD estimate `(1/ηN) Σ_{n=1}^N [R(X_n) - r0_mean]`.
pub fn run_standard(
    model: &ModelSpec,
    obs: &Observable,
    p: &SimParams,
    r0_mean: f64,
) -> Result<TrajectoryEstimate> {
    require_nonzero_eta(p)?;
    run_trajectory(
        CouplingKind::Standard,
        model,
        obs,
        p,
        r0_mean,
        DEFAULT_BATCHES,
        p.eta,
        NoiseSource::from_seed(p.seed),
    )
}

/// Coupled estimate `(1/ηN) Σ_{n=1}^N [R(X_n) - R(Y_n)]`.
pub fn run_coupled(
    kind: CouplingKind,
    model: &ModelSpec,
    obs: &Observable,
    p: &SimParams,
) -> Result<TrajectoryEstimate> {
    require_nonzero_eta(p)?;
    if !kind.is_coupled() {
        return Err(Error::param("run_coupled needs a coupled kind"));
    }
    run_trajectory(
        kind,
        model,
        obs,
        p,
        0.0,
        DEFAULT_BATCHES,
        p.eta,
        NoiseSource::from_seed(p.seed),
    )
}

/// `run_coupled` without the division by `η`, which also accepts `η = 0`.
pub fn run_coupled_undivided(
    kind: CouplingKind,
    model: &ModelSpec,
    obs: &Observable,
    p: &SimParams,
) -> Result<TrajectoryEstimate> {
    run_trajectory(
        kind,
        model,
        obs,
        p,
        0.0,
        DEFAULT_BATCHES,
        1.0,
        NoiseSource::from_seed(p.seed),
    )
}
