//! Monte Carlo checks of the estimators against closed-form behaviour.

use langevin_coupling::coupling::{e_vector, sticky_step};
use langevin_coupling::dynamics::{em_step, make_harmonic};
use langevin_coupling::estimators::{
    eta_sweep, linear_response_fit, run_coupled, sample_variance, RunningMoments, SweepOptions,
};
use langevin_coupling::noise::NoiseSource;
use langevin_coupling::oracles::{em_kernel_means, normal_cdf, ou_stationary};
use langevin_coupling::{
    CoupledState, CouplingKind, CouplingNoise, Forcing, ModelSpec, Observable, SimParams,
};

fn sheared_harmonic() -> ModelSpec {
    make_harmonic().with_forcing(Forcing::linear_shear())
}

#[test]
fn unperturbed_chain_samples_the_gaussian_law() {
    // The Euler-Maruyama chain for |x|²/2 has variance 1/(β(1 - Δt/2)).
    let (beta, dt) = (2.0, 0.01);
    let model = make_harmonic();
    let p = SimParams::new(dt, beta, 0.0);
    let mut noise = NoiseSource::from_seed(3);
    let mut x = vec![0.0, 0.0];
    let mut g = vec![0.0; 2];
    let mut m = RunningMoments::default();
    for k in 0..1_000_000 {
        noise.fill_gaussian(&mut g);
        x = em_step(&x, &model, &p, &g).unwrap();
        if k >= 1_000 {
            m.push(x[0] * x[0]);
        }
    }
    let exact = ou_stationary(beta, 0.0).unwrap().sigma[0][0];
    let discrete = exact / (1.0 - dt / 2.0);
    // Roughly 1e4 effective samples; allow the documented 2Δt relative slack on top.
    assert!(
        (m.mean() - discrete).abs() < 0.03,
        "{} vs {discrete}",
        m.mean()
    );
    assert!((m.mean() - exact).abs() < 0.03 + 2.0 * dt * exact);
}

#[test]
fn sticky_reference_chain_keeps_its_marginal() {
    // Y' must be N(y + Δt b(y), s² I) whatever the merge decision. Project the
    // standardized increment on e and on its normal and compare with N(0, 1).
    let model = sheared_harmonic();
    let p = SimParams::new(0.05, 1.0, 0.4);
    let (x, y) = (vec![0.3, 0.9], vec![0.1, 0.5]);
    let (_, e) = e_vector(&x, &y, &model, &p).unwrap();
    let (_, mu_y, s) = em_kernel_means(&x, &y, &model, &p).unwrap();
    let normal = [-e[1], e[0]];
    let mut noise = NoiseSource::from_seed(17);
    let n = 200_000;
    let mut along = Vec::with_capacity(n);
    let mut across = Vec::with_capacity(n);
    let mut merged = 0;
    for _ in 0..n {
        let g = vec![noise.gaussian(), noise.gaussian()];
        let u = noise.uniform();
        let r = sticky_step(
            &CoupledState::new(x.clone(), y.clone()),
            &CouplingNoise { g, u },
            &model,
            &p,
        )
        .unwrap();
        merged += r.next.met as usize;
        let z = [(r.next.y[0] - mu_y[0]) / s, (r.next.y[1] - mu_y[1]) / s];
        along.push(z[0] * e[0] + z[1] * e[1]);
        across.push(z[0] * normal[0] + z[1] * normal[1]);
    }
    let frac = merged as f64 / n as f64;
    assert!(
        frac > 0.2 && frac < 0.8,
        "merge fraction {frac} makes the test insensitive"
    );
    for sample in [&mut along, &mut across] {
        sample.sort_by(f64::total_cmp);
        let ks = sample
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let c = normal_cdf(*v);
                (c - i as f64 / n as f64)
                    .abs()
                    .max((c - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        // 0.1% critical value of the Kolmogorov distribution.
        assert!(ks < 1.95 / (n as f64).sqrt(), "KS statistic {ks}");
    }
}

#[test]
fn synchronous_distance_scales_with_eta_squared() {
    // Under linear shear the second coordinate does not see η, so the
    // synchronous difference is exactly linear in η.
    let model = sheared_harmonic();
    let p = SimParams::new(0.005, 1.0, 0.1)
        .with_steps(20_000, 500)
        .with_seed(8);
    let big = run_coupled(CouplingKind::Synchronous, &model, &Observable::r_cov(), &p).unwrap();
    let small = run_coupled(
        CouplingKind::Synchronous,
        &model,
        &Observable::r_cov(),
        &p.with_eta(0.01),
    )
    .unwrap();
    let ratio = big.mean_sq_dist.unwrap() / small.mean_sq_dist.unwrap();
    assert!((ratio - 100.0).abs() < 1e-6, "{ratio}");
    assert!((big.alpha_hat - small.alpha_hat).abs() < 1e-3 * big.alpha_hat.abs());
    assert_eq!(big.meet_fraction, Some(0.0));
}

#[test]
fn sticky_chains_stay_glued_longer_at_small_eta() {
    let cells = eta_sweep(
        &[CouplingKind::Sticky],
        &sheared_harmonic(),
        &Observable::r_cov(),
        &[0.2, 0.05, 0.01],
        8,
        &SimParams::new(0.005, 1.0, 0.1)
            .with_steps(20_000, 500)
            .with_seed(4),
        &SweepOptions::default(),
    )
    .unwrap();
    let meet: Vec<f64> = cells.iter().map(|c| c.meet_fraction.unwrap()).collect();
    assert!(meet[0] < meet[1] && meet[1] < meet[2], "{meet:?}");
    assert!(meet[2] > 0.9);
}

#[test]
fn linear_response_fit_recovers_the_harmonic_coefficient() {
    let etas = [0.25, 0.5, 1.0];
    let cells = eta_sweep(
        &[CouplingKind::Standard],
        &sheared_harmonic(),
        &Observable::r_cov(),
        &etas,
        16,
        &SimParams::new(0.005, 1.0, 0.1)
            .with_steps(100_000, 1_000)
            .with_seed(6),
        &SweepOptions::default(),
    )
    .unwrap();
    let alphas: Vec<f64> = cells.iter().map(|c| c.alpha_hat).collect();
    let ses: Vec<f64> = cells.iter().map(|c| c.se).collect();
    let fit = linear_response_fit(&etas, &alphas, &ses).unwrap();
    let exact = ou_stationary(1.0, 0.0).unwrap().alpha;
    assert!(
        (fit.slope - exact).abs() < 0.05,
        "slope {} ± {}",
        fit.slope,
        fit.stderr
    );
    assert!(fit.stderr > 0.0 && fit.stderr < 0.05);
}

#[test]
fn coupled_kinds_agree_with_each_other() {
    let cells = eta_sweep(
        &CouplingKind::ALL,
        &sheared_harmonic(),
        &Observable::r_cov(),
        &[0.2],
        24,
        &SimParams::new(0.005, 1.0, 0.1)
            .with_steps(40_000, 1_000)
            .with_seed(12),
        &SweepOptions::default(),
    )
    .unwrap();
    let sync = &cells[1];
    for c in &cells {
        let z = (c.alpha_hat - sync.alpha_hat).abs()
            / (c.se.powi(2) + sync.se.powi(2)).sqrt().max(1e-12);
        assert!(
            c.kind == CouplingKind::Synchronous || z < 4.0,
            "{} z={z}",
            c.kind
        );
        assert!(c.valid && c.n_valid == 24);
    }
    // Synchronous coupling has by far the smallest spread on a convex potential.
    assert!(cells.iter().all(|c| c.cross_var >= sync.cross_var));
}

#[test]
fn sweeps_are_reproducible_and_thread_count_independent() {
    let run = || {
        eta_sweep(
            &[CouplingKind::Sticky, CouplingKind::Hybrid],
            &sheared_harmonic(),
            &Observable::r_cov(),
            &[0.1, 0.02],
            6,
            &SimParams::new(0.005, 1.0, 0.1)
                .with_steps(5_000, 100)
                .with_seed(99),
            &SweepOptions::default(),
        )
        .unwrap()
    };
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(run);
    let three = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(run);
    assert_eq!(one, three);
    let alphas: Vec<f64> = one[0]
        .records
        .iter()
        .map(|r| r.estimate.unwrap().alpha_hat)
        .collect();
    assert!(sample_variance(&alphas) > 0.0);
}
