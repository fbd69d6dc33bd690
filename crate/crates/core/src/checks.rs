//! Invariant suites shared by the `check` command and the test-suite.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::coupling::{
    meeting_probability, meeting_probability_1d, reflect, BoundingChain, CoupledState, CouplingKind,
};
use crate::dynamics::{
    admissible_dt_bound, check_drift_control, make_harmonic, Forcing, ModelSpec, SimParams,
};
use crate::error::Result;
use crate::estimators::CoupledChain;
use crate::noise::NoiseSource;
use crate::oracles::{em_kernel_means, gaussian_tv_isotropic};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckLevel {
    Fast,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        CheckOutcome {
            name,
            passed,
            detail,
        }
    }
}

fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Harmonic drift in dimension `d` with the bounded forcing `F_i = sin(x_{i+1 mod d})`.
pub fn harmonic_with_cyclic_shear(d: usize) -> ModelSpec {
    let field = Arc::new(move |x: &[f64], out: &mut [f64]| {
        for i in 0..x.len() {
            out[i] = x[(i + 1) % x.len()].sin();
        }
    });
    ModelSpec::harmonic(d).with_forcing(Forcing::Field {
        field,
        lipschitz: Some(1.0),
        sup_norm: Some((d as f64).sqrt()),
    })
}

/// Largest gap between the d-dimensional and projected meeting probabilities
/// over `tuples` random draws in each dimension of `dims`.
pub fn meeting_form_gap(dims: &[usize], tuples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for &d in dims {
        let model = harmonic_with_cyclic_shear(d);
        for _ in 0..tuples {
            let spread = 10f64.powf(rng.gen_range(-3.0..0.5));
            let x = gaussian_vec(&mut rng, d, 1.0);
            let mut y = x.clone();
            for v in y.iter_mut() {
                *v += spread * rng.sample::<f64, _>(StandardNormal);
            }
            let g = gaussian_vec(&mut rng, d, 1.0);
            let p = SimParams::new(
                10f64.powf(rng.gen_range(-3.0..-1.0)),
                rng.gen_range(0.5..4.0),
                rng.gen_range(-0.5..0.5),
            );
            let a = meeting_probability(&x, &y, &g, &model, &p)?;
            let b = meeting_probability_1d(&x, &y, &g, &model, &p)?;
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                return Ok(f64::INFINITY);
            }
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

fn check_meeting_forms(tuples: usize, seed: u64) -> Result<CheckOutcome> {
    let gap = meeting_form_gap(&[1, 2, 5, 36], tuples, seed)?;
    Ok(CheckOutcome::new(
        "meeting-probability forms agree",
        gap <= 1e-10,
        format!("max |p_d - p_1d| = {gap:.3e} over {tuples} tuples per dimension"),
    ))
}

fn check_reflection(samples: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for k in 0..samples {
        let d = 1 + k % 40;
        let g = gaussian_vec(&mut rng, d, 3.0);
        let raw = gaussian_vec(&mut rng, d, 1.0);
        let n = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        let e: Vec<f64> = raw.iter().map(|v| v / n).collect();
        let r = reflect(&g, &e);
        let back = reflect(&r, &e);
        let norm = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
        let scale = norm(&g).max(1.0);
        let inv = g
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst
            .max(inv / scale)
            .max((norm(&r) - norm(&g)).abs() / scale);
    }
    CheckOutcome::new(
        "reflection is an involutive isometry",
        worst <= 1e-12,
        format!("max relative deviation {worst:.3e} over {samples} draws"),
    )
}

/// Counts violations of the discrete drift control for random harmonic pairs
/// under linear shear, `|η| <= η* = 0.1` and admissible `Δt`.
pub fn drift_control_violations(pairs: usize, seed: u64) -> Result<usize> {
    let model = make_harmonic().with_forcing(Forcing::linear_shear());
    let eta_star = 0.1;
    let bound = admissible_dt_bound(&model.constants.expect("harmonic constants"), eta_star);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    for _ in 0..pairs {
        let scale = 10f64.powf(rng.gen_range(-2.0..1.5));
        let x = gaussian_vec(&mut rng, 2, scale);
        let y = gaussian_vec(&mut rng, 2, scale);
        let eta = rng.gen_range(-eta_star..=eta_star);
        let dt = rng.gen_range(1e-4..bound * 0.999);
        if !check_drift_control(&x, &y, &model, eta, eta_star, dt)? {
            violations += 1;
        }
    }
    Ok(violations)
}

fn check_drift_control_sweep(pairs: usize, seed: u64) -> Result<CheckOutcome> {
    let v = drift_control_violations(pairs, seed)?;
    Ok(CheckOutcome::new(
        "discrete drift control holds",
        v == 0,
        format!("{v} violations over {pairs} pairs"),
    ))
}

/// Monte Carlo mean of the meeting probability against `1 - TV` of the two
/// one-step kernels. Returns the largest deviation in binomial standard errors.
pub fn maximal_coupling_closure(pairs: usize, draws: usize, seed: u64) -> Result<f64> {
    let model = make_harmonic().with_forcing(Forcing::linear_shear());
    let p = SimParams::new(0.1, 1.0, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let x = gaussian_vec(&mut rng, 2, 0.5);
        let y = gaussian_vec(&mut rng, 2, 0.5);
        let (mx, my, s) = em_kernel_means(&x, &y, &model, &p)?;
        let expected = 1.0 - gaussian_tv_isotropic(&mx, &my, s)?;
        let mut total = 0.0;
        for _ in 0..draws {
            let g = gaussian_vec(&mut rng, 2, 1.0);
            total += meeting_probability(&x, &y, &g, &model, &p)?;
        }
        let mean = total / draws as f64;
        let se = (expected * (1.0 - expected) / draws as f64).sqrt();
        let z = if se > 0.0 {
            (mean - expected).abs() / se
        } else if (mean - expected).abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(z);
    }
    Ok(worst)
}

fn check_maximal_coupling(pairs: usize, draws: usize, seed: u64) -> Result<CheckOutcome> {
    let z = maximal_coupling_closure(pairs, draws, seed)?;
    Ok(CheckOutcome::new(
        "sticky coupling is maximal",
        z <= 3.0,
        format!("worst deviation {z:.2} binomial SE over {pairs} pairs x {draws} draws"),
    ))
}

/// Runs sticky trajectories next to the bounding chain on shared draws and
/// counts steps where `|X_k - Y_k| > W_k + 1e-12`.
pub fn dominance_violations(trajectories: u64, steps: u64, seed: u64) -> Result<(u64, u64)> {
    let model = make_harmonic().with_forcing(Forcing::sinusoidal_shear());
    let p = SimParams::new(0.01, 1.0, 0.1);
    let mut violations = 0;
    let mut clamps = 0;
    for r in 0..trajectories {
        let mut noise = NoiseSource::for_replica(seed, r);
        let x0: Vec<f64> = (0..2).map(|_| noise.gaussian()).collect();
        let y0: Vec<f64> = x0.iter().map(|v| v + 0.5 * noise.gaussian()).collect();
        let start = CoupledState::new(x0, y0);
        let mut w = BoundingChain::new(start.distance(), &model, p)?;
        let mut chain = CoupledChain::new(CouplingKind::Sticky, &model, p, start, noise)?;
        for _ in 0..steps {
            chain.step()?;
            let gcal: f64 = chain
                .last_direction()
                .iter()
                .zip(chain.last_increment())
                .map(|(e, g)| e * g)
                .sum();
            let u = chain.last_uniform().expect("sticky steps draw a uniform");
            let bound = w.step(gcal, u)?;
            if chain.state().distance() > bound + 1e-12 {
                violations += 1;
            }
        }
        clamps += w.clamped;
    }
    Ok((violations, clamps))
}

fn check_dominance(trajectories: u64, steps: u64, seed: u64) -> Result<CheckOutcome> {
    let (v, clamps) = dominance_violations(trajectories, steps, seed)?;
    Ok(CheckOutcome::new(
        "bounding chain dominates the coupling distance",
        v == 0,
        format!(
            "{v} violations over {trajectories} x {steps} steps ({clamps} clamped transitions)"
        ),
    ))
}

/// Drives every kind from the same start and replica stream and compares the
/// perturbed trajectories bit for bit.
pub fn marginal_mismatches(model: &ModelSpec, p: &SimParams, steps: u64, seed: u64) -> Result<u64> {
    let start = CoupledState::glued(model.default_start());
    let mut chains = CouplingKind::ALL
        .iter()
        .map(|&k| {
            CoupledChain::new(
                k,
                model,
                *p,
                start.clone(),
                NoiseSource::for_replica(seed, 0),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut mismatches = 0;
    for _ in 0..steps {
        for c in chains.iter_mut() {
            c.step()?;
        }
        let reference = chains[0].x().to_vec();
        if chains[1..].iter().any(|c| c.x() != &reference[..]) {
            mismatches += 1;
        }
    }
    Ok(mismatches)
}

fn check_marginals(seed: u64) -> Result<CheckOutcome> {
    let model = make_harmonic().with_forcing(Forcing::linear_shear());
    let p = SimParams::new(0.005, 1.0, 0.1);
    let m = marginal_mismatches(&model, &p, 10_000, seed)?;
    Ok(CheckOutcome::new(
        "perturbed marginal identical across kinds",
        m == 0,
        format!("{m} mismatching steps over 10000"),
    ))
}

fn check_stickiness(seed: u64) -> Result<CheckOutcome> {
    let model = make_harmonic().with_forcing(Forcing::linear_shear());
    let p = SimParams::new(0.005, 1.0, 0.0);
    let start = CoupledState::glued(vec![0.3, -0.4]);
    let mut chain = CoupledChain::new(
        CouplingKind::Sticky,
        &model,
        p,
        start,
        NoiseSource::from_seed(seed),
    )?;
    let mut separated = 0;
    for _ in 0..10_000 {
        chain.step()?;
        separated += (!chain.met()) as u64;
    }
    Ok(CheckOutcome::new(
        "sticky chains stay glued without forcing",
        separated == 0,
        format!("{separated} separated steps over 10000"),
    ))
}

pub fn run_checks(level: CheckLevel, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = vec![
        check_meeting_forms(10_000, seed)?,
        check_reflection(10_000, seed),
        check_drift_control_sweep(100_000, seed)?,
    ];
    if level == CheckLevel::Full {
        out.push(check_maximal_coupling(20, 100_000, seed)?);
        out.push(check_dominance(100, 10_000, seed)?);
        out.push(check_marginals(seed)?);
        out.push(check_stickiness(seed)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suite_passes_and_is_deterministic() {
        let a = run_checks(CheckLevel::Fast, 5).unwrap();
        let b = run_checks(CheckLevel::Fast, 5).unwrap();
        assert_eq!(a, b);
        for o in &a {
            assert!(o.passed, "{}: {}", o.name, o.detail);
        }
    }
}
