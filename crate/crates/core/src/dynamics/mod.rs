//! Models, observables and the Euler–Maruyama chain
//! `X' = X + Δt (b(X) + η F(X)) + sqrt(2Δt/β) G`.

mod contraction;
mod forcing;
mod observable;
mod potential;

pub use contraction::{admissible_dt_bound, check_drift_control, tau, time_step_bound};
pub use forcing::Forcing;
pub use observable::{Observable, ScalarField, DEFAULT_TILT_EPS};
pub use potential::{LjCluster, Potential, VectorField};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `σ` placing the Lennard-Jones pair minimum at distance 1.
pub fn lj_unit_sigma() -> f64 {
    2f64.powf(-1.0 / 6.0)
}

/// Regularity constants of `b` and `F`: contraction rate `m` outside the ball of
/// radius `M`, Lipschitz constants, and `‖F‖∞` (possibly infinite).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub m: f64,
    pub big_m: f64,
    pub lip_b: f64,
    pub lip_f: f64,
    pub f_sup: f64,
}

impl Constants {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0) {
            return Err(Error::param(format!(
                "contraction rate m must be > 0, got {}",
                self.m
            )));
        }
        if !(self.big_m >= 0.0 && self.lip_b > 0.0 && self.lip_f >= 0.0 && self.f_sup >= 0.0) {
            return Err(Error::param(format!(
                "inconsistent model constants {self:?}"
            )));
        }
        Ok(())
    }
}

/// Time step, temperature, perturbation strength, run lengths and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub dt: f64,
    pub beta: f64,
    pub eta: f64,
    pub n_steps: u64,
    pub n_burnin: u64,
    pub seed: u64,
}

impl SimParams {
    pub fn new(dt: f64, beta: f64, eta: f64) -> Self {
        SimParams {
            dt,
            beta,
            eta,
            n_steps: 1,
            n_burnin: 0,
            seed: 0,
        }
    }

    pub fn with_eta(self, eta: f64) -> Self {
        SimParams { eta, ..self }
    }

    pub fn with_steps(self, n_steps: u64, n_burnin: u64) -> Self {
        SimParams {
            n_steps,
            n_burnin,
            ..self
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SimParams { seed, ..self }
    }

    /// `sqrt(2Δt/β)`.
    pub fn noise_scale(&self) -> f64 {
        (2.0 * self.dt / self.beta).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::param(format!("beta must be > 0, got {}", self.beta)));
        }
        if !self.eta.is_finite() {
            return Err(Error::param("eta must be finite"));
        }
        if self.n_steps == 0 {
            return Err(Error::param("n_steps must be >= 1"));
        }
        Ok(())
    }
}

/// A reference drift, a perturbation, and the constants of both.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub name: String,
    pub dim: usize,
    pub potential: Potential,
    pub forcing: Forcing,
    pub constants: Option<Constants>,
    potential_constants: Option<(f64, f64, f64)>,
}

impl ModelSpec {
    /// A model from an arbitrary drift. `constants` holds `(m, M, L_b)` if known.
    pub fn from_drift(
        name: impl Into<String>,
        dim: usize,
        drift: VectorField,
        constants: Option<(f64, f64, f64)>,
    ) -> Self {
        ModelSpec::assemble(name.into(), dim, Potential::Drift(drift), constants)
    }

    /// Harmonic potential `|x|^2 / 2` in dimension `dim`.
    pub fn harmonic(dim: usize) -> Self {
        ModelSpec::assemble(
            "harmonic".into(),
            dim,
            Potential::Harmonic,
            Some((1.0, 0.0, 1.0)),
        )
    }

    fn assemble(
        name: String,
        dim: usize,
        potential: Potential,
        potential_constants: Option<(f64, f64, f64)>,
    ) -> Self {
        let mut m = ModelSpec {
            name,
            dim,
            potential,
            forcing: Forcing::Zero,
            constants: None,
            potential_constants,
        };
        m.refresh_constants();
        m
    }

    fn refresh_constants(&mut self) {
        self.constants = match (
            self.potential_constants,
            self.forcing.lipschitz(),
            self.forcing.sup_norm(self.dim),
        ) {
            (Some((m, big_m, lip_b)), Some(lip_f), Some(f_sup)) => Some(Constants {
                m,
                big_m,
                lip_b,
                lip_f,
                f_sup,
            }),
            _ => None,
        };
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = forcing;
        self.refresh_constants();
        self
    }

    pub fn drift_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.potential.drift_into(x, out)
    }

    pub fn drift(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; x.len()];
        self.drift_into(x, &mut out)?;
        Ok(out)
    }

    pub fn energy(&self, x: &[f64]) -> Option<f64> {
        self.potential.energy(x)
    }

    /// The state every replica starts burn-in from.
    pub fn default_start(&self) -> Vec<f64> {
        match &self.potential {
            Potential::LjCluster(c) => c.lattice_start(),
            _ => vec![0.0; self.dim],
        }
    }

    pub(crate) fn require_constants(&self) -> Result<Constants> {
        let c = self.constants.ok_or_else(|| {
            Error::param(format!(
                "model '{}' carries no regularity constants",
                self.name
            ))
        })?;
        c.validate()?;
        Ok(c)
    }
}

/// `U(x) = |x|^2/2` in two dimensions, with no forcing attached.
pub fn make_harmonic() -> ModelSpec {
    ModelSpec::harmonic(2)
}

/// Two-dimensional cosine-product well of half-width `half_width`.
pub fn make_cosine_well(half_width: f64) -> Result<ModelSpec> {
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::param(format!(
            "cosine well half-width must be > 0, got {half_width}"
        )));
    }
    Ok(ModelSpec::assemble(
        "cosine_well".into(),
        2,
        Potential::CosineWell { half_width },
        None,
    ))
}

/// Lennard-Jones cluster of `n_particles` free particles in the plane plus an
/// anchor at the origin, confined to `[-L, L]^2` with strength `confinement`.
pub fn make_lj_cluster(
    n_particles: usize,
    confinement: f64,
    box_half_width: f64,
    epsilon: f64,
    sigma: f64,
) -> Result<ModelSpec> {
    if n_particles == 0 {
        return Err(Error::param("LJ cluster needs at least one particle"));
    }
    if !(confinement >= 0.0 && box_half_width > 0.0 && epsilon > 0.0 && sigma > 0.0) {
        return Err(Error::param(format!(
            "bad LJ parameters: alpha={confinement}, L={box_half_width}, epsilon={epsilon}, sigma={sigma}"
        )));
    }
    Ok(ModelSpec::assemble(
        "lj_cluster".into(),
        2 * n_particles,
        Potential::LjCluster(LjCluster {
            n_particles,
            confinement,
            box_half_width,
            epsilon,
            sigma,
        }),
        None,
    ))
}

/// `out = x + Δt (drift + η force) + scale g`, component by component.
#[inline]
#[allow(clippy::too_many_arguments)]
pub(crate) fn advance(
    x: &[f64],
    drift: &[f64],
    force: Option<&[f64]>,
    eta: f64,
    dt: f64,
    scale: f64,
    g: &[f64],
    out: &mut [f64],
) {
    match force {
        Some(f) => {
            for i in 0..x.len() {
                out[i] = x[i] + dt * (drift[i] + eta * f[i]) + scale * g[i];
            }
        }
        None => {
            for i in 0..x.len() {
                out[i] = x[i] + dt * drift[i] + scale * g[i];
            }
        }
    }
}

pub(crate) fn ensure_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::blow_up(format!("non-finite {what}")))
    }
}

/// One Euler–Maruyama step of the perturbed chain driven by the Gaussian draw `g`.
pub fn em_step(x: &[f64], model: &ModelSpec, p: &SimParams, g: &[f64]) -> Result<Vec<f64>> {
    if x.len() != model.dim || g.len() != model.dim {
        return Err(Error::param(format!(
            "dimension mismatch: model {}, x {}, g {}",
            model.dim,
            x.len(),
            g.len()
        )));
    }
    if !(p.dt > 0.0) {
        return Err(Error::param("dt must be > 0"));
    }
    let drift = model.drift(x)?;
    let force = (p.eta != 0.0).then(|| model.forcing.eval(x));
    let mut out = vec![0.0; x.len()];
    advance(
        x,
        &drift,
        force.as_deref(),
        p.eta,
        p.dt,
        p.noise_scale(),
        g,
        &mut out,
    );
    ensure_finite(&out, "state after Euler-Maruyama step")?;
    Ok(out)
}

/// Worst componentwise error between a central finite difference of `U` and
/// the analytic gradient `-b`, relative to `max(|∂U|, 1)`.
pub fn grad_check(model: &ModelSpec, x: &[f64], h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::param("finite-difference step must be > 0"));
    }
    if model.energy(x).is_none() {
        return Err(Error::UnsupportedModel {
            model: model.name.clone(),
            reason: "no potential energy available".into(),
        });
    }
    let drift = model.drift(x)?;
    let mut probe = x.to_vec();
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = model.energy(&probe).unwrap_or(f64::NAN);
        probe[i] = x[i] - h;
        let down = model.energy(&probe).unwrap_or(f64::NAN);
        probe[i] = x[i];
        let fd = (up - down) / (2.0 * h);
        let analytic = -drift[i];
        let err = (fd - analytic).abs() / analytic.abs().max(1.0);
        if err.is_nan() {
            return Ok(f64::INFINITY);
        }
        worst = worst.max(err);
    }
    Ok(worst)
}
