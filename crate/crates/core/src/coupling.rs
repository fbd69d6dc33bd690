//! One-step coupling kernels for the pair `(X, Y)` of Euler–Maruyama chains,
//! `X` perturbed by `η F` and `Y` unperturbed.
//!
//! Both marginals are exact: `X` always moves by a plain Euler–Maruyama step
//! driven by `G`, and `Y` moves by a step driven either by `G`, by its
//! reflection across the hyperplane orthogonal to the mean difference, or is
//! glued onto `X` with the maximal-coupling probability.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{advance, ensure_finite, tau, Constants, ModelSpec, SimParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    /// Perturbed chain alone (standard NEMD).
    Standard,
    Synchronous,
    Sticky,
    Hybrid,
}

impl CouplingKind {
    pub const ALL: [CouplingKind; 4] = [
        CouplingKind::Standard,
        CouplingKind::Synchronous,
        CouplingKind::Sticky,
        CouplingKind::Hybrid,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CouplingKind::Standard => "standard",
            CouplingKind::Synchronous => "synchronous",
            CouplingKind::Sticky => "sticky",
            CouplingKind::Hybrid => "hybrid",
        }
    }

    pub fn is_coupled(&self) -> bool {
        !matches!(self, CouplingKind::Standard)
    }
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CouplingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CouplingKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::param(format!("unknown coupling kind '{s}'")))
    }
}

/// The pair `(x, y)`; `met` records exact componentwise equality.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub met: bool,
}

impl CoupledState {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let met = x == y;
        CoupledState { x, y, met }
    }

    /// Both chains at `x`.
    pub fn glued(x: Vec<f64>) -> Self {
        CoupledState {
            y: x.clone(),
            x,
            met: true,
        }
    }

    pub fn distance(&self) -> f64 {
        dist2(&self.x, &self.y).sqrt()
    }
}

/// Gaussian increment `g` shared by both chains and the uniform `u` deciding
/// the merge.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingNoise {
    pub g: Vec<f64>,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `y'` was set to `x'`.
    Merged,
    /// `y'` moved with the reflected increment.
    Reflected,
    /// `y'` moved with the same increment as `x'` (hybrid only).
    Synchronous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StickyStepReport {
    pub next: CoupledState,
    /// Merge probability used for the decision.
    pub p: f64,
    pub branch: Branch,
    /// Unit direction of the mean difference, or the zero vector.
    pub e: Vec<f64>,
}

#[inline]
fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// `min{1, φ_d(a + g) / φ_d(g)}`, evaluated as `exp(min{0, -(|a+g|² - |g|²)/2})`.
pub fn shifted_density_ratio(a: &[f64], g: &[f64]) -> f64 {
    let delta: f64 = a.iter().zip(g).map(|(ai, gi)| ai * (ai + 2.0 * gi)).sum();
    (-0.5 * delta).min(0.0).exp()
}

/// `min{1, φ_1(z - h) / φ_1(h)}` for `z >= 0`, in log space.
fn shifted_density_ratio_1d(z: f64, h: f64) -> f64 {
    (-0.5 * z * (z - 2.0 * h)).min(0.0).exp()
}

/// Drifts of both chains and the forcing on `x`, as needed by the kernels.
pub(crate) struct PairEval<'a> {
    pub bx: &'a [f64],
    pub fx: Option<&'a [f64]>,
    pub by: &'a [f64],
}

fn mean_difference_into(x: &[f64], y: &[f64], ev: &PairEval, p: &SimParams, out: &mut [f64]) {
    for i in 0..x.len() {
        let forced = match ev.fx {
            Some(f) => p.eta * f[i],
            None => 0.0,
        };
        out[i] = y[i] - x[i] + p.dt * (ev.by[i] - ev.bx[i] - forced);
    }
}

/// Normalizes `big_e` into `e`, returning `|E|`. Leaves `e = 0` when `E = 0`.
fn normalize_into(big_e: &[f64], e: &mut [f64]) -> f64 {
    let norm = dot(big_e, big_e).sqrt();
    if norm == 0.0 {
        e.fill(0.0);
    } else {
        for (ei, &v) in e.iter_mut().zip(big_e) {
            *ei = v / norm;
        }
    }
    norm
}

/// `p` in the one-dimensional form, from `|E|` and `⟨e, g⟩`.
#[inline]
fn merge_probability(norm_e: f64, e_dot_g: f64, p: &SimParams) -> f64 {
    shifted_density_ratio_1d(norm_e / p.noise_scale(), e_dot_g)
}

/// Scratch buffers reused across steps of one trajectory.
#[derive(Debug, Clone)]
pub(crate) struct StepScratch {
    pub big_e: Vec<f64>,
    pub e: Vec<f64>,
}

impl StepScratch {
    pub fn new(dim: usize) -> Self {
        StepScratch {
            big_e: vec![0.0; dim],
            e: vec![0.0; dim],
        }
    }
}

/// Sticky update in place. Returns `(p, branch)`; `scratch.e` holds `e_k`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn sticky_kernel(
    x: &[f64],
    y: &[f64],
    ev: &PairEval,
    g: &[f64],
    u: f64,
    p: &SimParams,
    scratch: &mut StepScratch,
    x_next: &mut [f64],
    y_next: &mut [f64],
) -> (f64, Branch) {
    let scale = p.noise_scale();
    advance(x, ev.bx, ev.fx, p.eta, p.dt, scale, g, x_next);
    mean_difference_into(x, y, ev, p, &mut scratch.big_e);
    let norm = normalize_into(&scratch.big_e, &mut scratch.e);
    let eg = dot(&scratch.e, g);
    let prob = merge_probability(norm, eg, p);
    if u <= prob {
        y_next.copy_from_slice(x_next);
        (prob, Branch::Merged)
    } else {
        let e = &scratch.e;
        for i in 0..y.len() {
            y_next[i] = y[i] + p.dt * ev.by[i] + scale * (g[i] - 2.0 * eg * e[i]);
        }
        (prob, Branch::Reflected)
    }
}

pub(crate) fn sync_kernel(
    x: &[f64],
    y: &[f64],
    ev: &PairEval,
    g: &[f64],
    p: &SimParams,
    x_next: &mut [f64],
    y_next: &mut [f64],
) {
    let scale = p.noise_scale();
    advance(x, ev.bx, ev.fx, p.eta, p.dt, scale, g, x_next);
    advance(y, ev.by, None, 0.0, p.dt, scale, g, y_next);
}

/// `⟨x - y, b(x) + η F(x) - b(y)⟩`.
pub(crate) fn contractivity(x: &[f64], y: &[f64], ev: &PairEval, eta: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        let forced = match ev.fx {
            Some(f) => eta * f[i],
            None => 0.0,
        };
        s += (x[i] - y[i]) * (ev.bx[i] + forced - ev.by[i]);
    }
    s
}

struct OwnedEval {
    bx: Vec<f64>,
    fx: Option<Vec<f64>>,
    by: Vec<f64>,
}

impl OwnedEval {
    fn new(x: &[f64], y: &[f64], model: &ModelSpec, p: &SimParams) -> Result<Self> {
        if x.len() != model.dim || y.len() != model.dim {
            return Err(Error::param(format!(
                "dimension mismatch: model {}, x {}, y {}",
                model.dim,
                x.len(),
                y.len()
            )));
        }
        Ok(OwnedEval {
            bx: model.drift(x)?,
            fx: (p.eta != 0.0).then(|| model.forcing.eval(x)),
            by: model.drift(y)?,
        })
    }

    fn view(&self) -> PairEval<'_> {
        PairEval {
            bx: &self.bx,
            fx: self.fx.as_deref(),
            by: &self.by,
        }
    }
}

/// `E = y - x + Δt [b(y) - b(x) - η F(x)]` and its normalization `e`
/// (zero when `E = 0`).
pub fn e_vector(
    x: &[f64],
    y: &[f64],
    model: &ModelSpec,
    p: &SimParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let ev = OwnedEval::new(x, y, model, p)?;
    let mut big_e = vec![0.0; x.len()];
    let mut e = vec![0.0; x.len()];
    mean_difference_into(x, y, &ev.view(), p, &mut big_e);
    normalize_into(&big_e, &mut e);
    Ok((big_e, e))
}

/// Probability that the sticky kernel glues `y'` onto `x'` given the shared
/// increment `g`: `min{1, φ_d(g - E/s) / φ_d(g)}` with `s = sqrt(2Δt/β)`.
///
/// `g - E/s` is the increment that would carry `y` onto `x'`; the ratio of
/// its density to that of `g` is what makes the glued-or-reflected `y'`
/// distributed exactly as an unperturbed Euler–Maruyama step.
pub fn meeting_probability(
    x: &[f64],
    y: &[f64],
    g: &[f64],
    model: &ModelSpec,
    p: &SimParams,
) -> Result<f64> {
    let (big_e, _) = e_vector(x, y, model, p)?;
    let inv_scale = 1.0 / p.noise_scale();
    let a: Vec<f64> = big_e.iter().map(|v| -v * inv_scale).collect();
    Ok(shifted_density_ratio(&a, g))
}

/// The same probability through the projection onto `e`:
/// `min{1, φ_1(|E|/s - ⟨e, g⟩) / φ_1(⟨e, g⟩)}`.
pub fn meeting_probability_1d(
    x: &[f64],
    y: &[f64],
    g: &[f64],
    model: &ModelSpec,
    p: &SimParams,
) -> Result<f64> {
    let (big_e, e) = e_vector(x, y, model, p)?;
    let norm = dot(&big_e, &big_e).sqrt();
    Ok(merge_probability(norm, dot(&e, g), p))
}

/// `(Id - 2 e eᵀ) g`; identity when `e = 0`.
pub fn reflect(g: &[f64], e: &[f64]) -> Vec<f64> {
    let eg = dot(e, g);
    g.iter().zip(e).map(|(gi, ei)| gi - 2.0 * eg * ei).collect()
}

fn finish(x_next: Vec<f64>, y_next: Vec<f64>) -> Result<CoupledState> {
    ensure_finite(&x_next, "perturbed state")?;
    ensure_finite(&y_next, "reference state")?;
    Ok(CoupledState::new(x_next, y_next))
}

/// One step of the discrete sticky coupling.
pub fn sticky_step(
    s: &CoupledState,
    n: &CouplingNoise,
    model: &ModelSpec,
    p: &SimParams,
) -> Result<StickyStepReport> {
    let ev = OwnedEval::new(&s.x, &s.y, model, p)?;
    let d = model.dim;
    let mut scratch = StepScratch::new(d);
    let (mut xn, mut yn) = (vec![0.0; d], vec![0.0; d]);
    let (prob, branch) = sticky_kernel(
        &s.x,
        &s.y,
        &ev.view(),
        &n.g,
        n.u,
        p,
        &mut scratch,
        &mut xn,
        &mut yn,
    );
    Ok(StickyStepReport {
        next: finish(xn, yn)?,
        p: prob,
        branch,
        e: scratch.e,
    })
}

/// One step of the synchronous coupling: both chains see `g`.
pub fn sync_step(
    s: &CoupledState,
    g: &[f64],
    model: &ModelSpec,
    p: &SimParams,
) -> Result<CoupledState> {
    let ev = OwnedEval::new(&s.x, &s.y, model, p)?;
    let d = model.dim;
    let (mut xn, mut yn) = (vec![0.0; d], vec![0.0; d]);
    sync_kernel(&s.x, &s.y, &ev.view(), g, p, &mut xn, &mut yn);
    finish(xn, yn)
}

/// Synchronous step where the perturbed drift pulls the chains together
/// (`⟨x - y, b(x) + ηF(x) - b(y)⟩ < 0`, or `x = y`); sticky step otherwise.
pub fn hybrid_step(
    s: &CoupledState,
    n: &CouplingNoise,
    model: &ModelSpec,
    p: &SimParams,
) -> Result<StickyStepReport> {
    let ev = OwnedEval::new(&s.x, &s.y, model, p)?;
    let d = model.dim;
    let (mut xn, mut yn) = (vec![0.0; d], vec![0.0; d]);
    if s.x == s.y || contractivity(&s.x, &s.y, &ev.view(), p.eta) < 0.0 {
        sync_kernel(&s.x, &s.y, &ev.view(), &n.g, p, &mut xn, &mut yn);
        let next = finish(xn, yn)?;
        let (prob, branch) = if next.met {
            (1.0, Branch::Merged)
        } else {
            (0.0, Branch::Synchronous)
        };
        return Ok(StickyStepReport {
            next,
            p: prob,
            branch,
            e: vec![0.0; d],
        });
    }
    let mut scratch = StepScratch::new(d);
    let (prob, branch) = sticky_kernel(
        &s.x,
        &s.y,
        &ev.view(),
        &n.g,
        n.u,
        p,
        &mut scratch,
        &mut xn,
        &mut yn,
    );
    Ok(StickyStepReport {
        next: finish(xn, yn)?,
        p: prob,
        branch,
        e: scratch.e,
    })
}

/// `p̄(a, g) = min{1, φ_1(a sqrt(β/2Δt) - g) / φ_1(g)}`.
pub fn bounding_merge_probability(a: f64, g: f64, p: &SimParams) -> f64 {
    shifted_density_ratio_1d(a / p.noise_scale(), g)
}

/// Candidate and clamping flag of one bounding-chain transition.
fn bounding_transition(
    w: f64,
    gcal: f64,
    u: f64,
    c: &Constants,
    p: &SimParams,
) -> Result<(f64, bool)> {
    if !c.f_sup.is_finite() {
        return Err(Error::param(
            "bounding chain needs a bounded forcing (finite ‖F‖∞)",
        ));
    }
    if !(w >= 0.0) {
        return Err(Error::param(format!(
            "bounding chain state must be >= 0, got {w}"
        )));
    }
    let a = tau(w, 0.0, p.dt, c)? + p.eta.abs() * c.f_sup * p.dt;
    if u < bounding_merge_probability(a, gcal, p) {
        return Ok((0.0, false));
    }
    let candidate = a - 2.0 * p.noise_scale() * gcal;
    Ok(if candidate < 0.0 {
        (0.0, true)
    } else {
        (candidate, false)
    })
}

/// One transition `W' = 𝒢_Δt(W, 𝒢, U)` of the one-dimensional chain that
/// dominates `|X_k - Y_k|` under the sticky coupling.
pub fn bounding_chain_step(w: f64, gcal: f64, u: f64, c: &Constants, p: &SimParams) -> Result<f64> {
    bounding_transition(w, gcal, u, c, p).map(|(w, _)| w)
}

/// The bounding chain with a count of transitions whose candidate went negative
/// and was clamped to zero.
#[derive(Debug, Clone)]
pub struct BoundingChain {
    pub w: f64,
    pub clamped: u64,
    constants: Constants,
    params: SimParams,
}

impl BoundingChain {
    pub fn new(w0: f64, model: &ModelSpec, params: SimParams) -> Result<Self> {
        let constants = model.require_constants()?;
        Ok(BoundingChain {
            w: w0,
            clamped: 0,
            constants,
            params,
        })
    }

    pub fn step(&mut self, gcal: f64, u: f64) -> Result<f64> {
        let (w, clamped) = bounding_transition(self.w, gcal, u, &self.constants, &self.params)?;
        self.clamped += clamped as u64;
        self.w = w;
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{make_cosine_well, make_harmonic, Forcing};
    use std::sync::Arc;

    fn free_model() -> ModelSpec {
        ModelSpec::from_drift("free", 2, Arc::new(|_, o| o.fill(0.0)), None)
    }

    #[test]
    fn e_vector_examples() {
        let m = make_harmonic();
        let p = SimParams::new(0.1, 1.0, 0.0);
        let (big_e, e) = e_vector(&[0.3, 0.4], &[0.3, 0.4], &m, &p).unwrap();
        assert_eq!(big_e, vec![0.0, 0.0]);
        assert_eq!(e, vec![0.0, 0.0]);

        let (big_e, e) = e_vector(&[0.0, 0.0], &[3.0, 4.0], &free_model(), &p).unwrap();
        assert_eq!(big_e, vec![3.0, 4.0]);
        assert!((e[0] - 0.6).abs() < 1e-15 && (e[1] - 0.8).abs() < 1e-15);

        let (big_e, e) = e_vector(&[0.0, 0.0], &[1.0, 0.0], &m, &p).unwrap();
        assert!((big_e[0] - 0.9).abs() < 1e-15 && big_e[1] == 0.0);
        assert_eq!(e, vec![1.0, 0.0]);
    }

    #[test]
    fn density_ratio_examples() {
        assert!((shifted_density_ratio(&[1.0, 0.0], &[0.0, 0.0]) - (-0.5f64).exp()).abs() < 1e-15);
        let g = [0.3, -1.2, 2.0];
        let a: Vec<f64> = g.iter().map(|v| -2.0 * v).collect();
        assert!((shifted_density_ratio(&a, &g) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn meeting_probability_is_one_when_chains_coincide() {
        let m = make_harmonic().with_forcing(Forcing::linear_shear());
        let p = SimParams::new(0.01, 1.0, 0.0);
        let x = [0.7, -0.2];
        for g in [[0.0, 0.0], [3.0, -5.0], [-40.0, 12.0]] {
            assert_eq!(meeting_probability(&x, &x, &g, &m, &p).unwrap(), 1.0);
            assert_eq!(meeting_probability_1d(&x, &x, &g, &m, &p).unwrap(), 1.0);
        }
    }

    #[test]
    fn one_dimensional_form_decays_with_separation() {
        let m = free_model();
        let p = SimParams::new(0.01, 1.0, 0.0);
        let g = [0.8, -0.4];
        let x = [0.0, 0.0];
        let mut last = f64::INFINITY;
        for k in 1..60 {
            let y = [0.05 * k as f64, 0.0];
            let pr = meeting_probability_1d(&x, &y, &g, &m, &p).unwrap();
            assert!(pr <= last + 1e-15);
            last = pr;
        }
        assert!(last < 1e-20);
    }

    #[test]
    fn reflection_examples() {
        assert_eq!(reflect(&[3.0, 4.0], &[1.0, 0.0]), vec![-3.0, 4.0]);
        assert_eq!(reflect(&[0.0, 4.0], &[1.0, 0.0]), vec![0.0, 4.0]);
        assert_eq!(reflect(&[1.5, -2.0], &[0.0, 0.0]), vec![1.5, -2.0]);
    }

    #[test]
    fn sticky_at_zero_eta_stays_glued() {
        let m = make_harmonic();
        let p = SimParams::new(0.05, 1.0, 0.0);
        let mut s = CoupledState::glued(vec![0.4, -0.9]);
        let mut noise = crate::noise::NoiseSource::from_seed(3);
        for _ in 0..500 {
            let mut g = vec![0.0; 2];
            noise.fill_gaussian(&mut g);
            let n = CouplingNoise {
                g,
                u: noise.uniform(),
            };
            let r = sticky_step(&s, &n, &m, &p).unwrap();
            assert_eq!(r.p, 1.0);
            assert_eq!(r.branch, Branch::Merged);
            assert!(r.next.met);
            s = r.next;
        }
    }

    #[test]
    fn zero_uniform_always_merges() {
        let m = make_harmonic().with_forcing(Forcing::linear_shear());
        let p = SimParams::new(0.05, 1.0, 0.3);
        let s = CoupledState::new(vec![0.0, 1.0], vec![0.5, -0.5]);
        let n = CouplingNoise {
            g: vec![0.2, 0.1],
            u: 0.0,
        };
        let r = sticky_step(&s, &n, &m, &p).unwrap();
        assert!(r.p > 0.0);
        assert_eq!(r.branch, Branch::Merged);
        assert_eq!(r.next.x, r.next.y);
    }

    #[test]
    fn reflected_branch_matches_scalar_reimplementation() {
        let m = make_harmonic().with_forcing(Forcing::linear_shear());
        let p = SimParams::new(0.1, 1.0, 0.1);
        let (x, y) = ([0.3, -0.8], [1.1, 0.4]);
        let g = [0.25, -0.6];
        let s = CoupledState::new(x.to_vec(), y.to_vec());
        let r = sticky_step(
            &s,
            &CouplingNoise {
                g: g.to_vec(),
                u: 0.999,
            },
            &m,
            &p,
        )
        .unwrap();
        assert_eq!(r.branch, Branch::Reflected);

        // Independent scalar evaluation of the same update.
        let (dt, eta, sc) = (0.1f64, 0.1f64, (2.0f64 * 0.1).sqrt());
        let e1 = y[0] - x[0] + dt * (-y[0] + x[0] - eta * x[1]);
        let e2 = y[1] - x[1] + dt * (-y[1] + x[1]);
        let n = (e1 * e1 + e2 * e2).sqrt();
        let (u1, u2) = (e1 / n, e2 / n);
        let proj = u1 * g[0] + u2 * g[1];
        let pr = (-0.5 * ((n / sc - proj).powi(2) - proj * proj))
            .min(0.0)
            .exp();
        assert!((r.p - pr).abs() < 1e-14);
        let y1 = y[0] - dt * y[0] + sc * (g[0] - 2.0 * proj * u1);
        let y2 = y[1] - dt * y[1] + sc * (g[1] - 2.0 * proj * u2);
        assert!((r.next.y[0] - y1).abs() < 1e-14);
        assert!((r.next.y[1] - y2).abs() < 1e-14);
        let x1 = x[0] + dt * (-x[0] + eta * x[1]) + sc * g[0];
        assert!((r.next.x[0] - x1).abs() < 1e-14);
    }

    #[test]
    fn sync_step_contracts_harmonic_pairs() {
        let m = make_harmonic();
        let p = SimParams::new(0.1, 1.0, 0.0);
        let s = CoupledState::new(vec![1.0, -2.0], vec![-0.5, 0.5]);
        let next = sync_step(&s, &[0.7, 0.3], &m, &p).unwrap();
        assert!((next.distance() - 0.9 * s.distance()).abs() < 1e-14);
        let glued = CoupledState::glued(vec![0.1, 0.2]);
        assert!(sync_step(&glued, &[0.7, 0.3], &m, &p).unwrap().met);
    }

    #[test]
    fn hybrid_branch_selection() {
        let p = SimParams::new(0.01, 1.0, 0.0);
        let n = CouplingNoise {
            g: vec![0.1, -0.3],
            u: 0.5,
        };

        let h = make_harmonic();
        let s = CoupledState::new(vec![1.0, 0.0], vec![0.0, 0.5]);
        let r = hybrid_step(&s, &n, &h, &p).unwrap();
        assert_eq!(r.branch, Branch::Synchronous);
        let r = hybrid_step(&CoupledState::glued(vec![0.2, 0.2]), &n, &h, &p).unwrap();
        assert_eq!(r.branch, Branch::Merged);
        assert!(r.next.met);

        // Straddling the maximum of the cosine well the drift pushes the pair apart.
        let l = 2.0 * std::f64::consts::PI;
        let cw = make_cosine_well(l).unwrap();
        let s = CoupledState::new(vec![l / 2.0 - 0.3, l / 2.0], vec![l / 2.0 + 0.3, l / 2.0]);
        let r = hybrid_step(&s, &n, &cw, &p).unwrap();
        assert_ne!(r.branch, Branch::Synchronous);
        assert!(r.p < 1.0);
    }

    #[test]
    fn bounding_chain_absorbs_at_zero_without_forcing() {
        let c = make_harmonic().constants.unwrap();
        let p = SimParams::new(0.05, 1.0, 0.0);
        for g in [-3.0, 0.0, 0.4, 5.0] {
            assert_eq!(bounding_chain_step(0.0, g, 0.999, &c, &p).unwrap(), 0.0);
            assert_eq!(bounding_merge_probability(0.0, g, &p), 1.0);
        }
    }

    #[test]
    fn bounding_chain_needs_bounded_forcing() {
        let c = make_harmonic()
            .with_forcing(Forcing::linear_shear())
            .constants
            .unwrap();
        let p = SimParams::new(0.05, 1.0, 0.1);
        assert!(bounding_chain_step(1.0, 0.0, 0.5, &c, &p).is_err());
        let lj = crate::dynamics::make_lj_cluster(1, 1.0, 5.0, 1.0, 1.0).unwrap();
        assert!(BoundingChain::new(1.0, &lj, p).is_err());
    }

    #[test]
    fn kind_keys_round_trip() {
        for k in CouplingKind::ALL {
            assert_eq!(k.as_str().parse::<CouplingKind>().unwrap(), k);
        }
        assert!("reflection".parse::<CouplingKind>().is_err());
    }
}
