//! Closed-form references.

use crate::dynamics::{ModelSpec, SimParams};
use crate::error::{Error, Result};

/// Stationary law `N(0, Σ)` of the harmonic model under linear shear, and the
/// transport coefficient of `R = x_1 x_2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OUStationary {
    pub sigma: [[f64; 2]; 2],
    pub alpha: f64,
}

impl OUStationary {
    pub fn determinant(&self) -> f64 {
        self.sigma[0][0] * self.sigma[1][1] - self.sigma[0][1] * self.sigma[1][0]
    }
}

/// `Σ = (1/2β) [[2 + η², η], [η, 2]]`, `α = 1/(2β)`.
pub fn ou_stationary(beta: f64, eta: f64) -> Result<OUStationary> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::param(format!("beta must be > 0, got {beta}")));
    }
    let k = 1.0 / (2.0 * beta);
    Ok(OUStationary {
        sigma: [[k * (2.0 + eta * eta), k * eta], [k * eta, k * 2.0]],
        alpha: k,
    })
}

/// Standard normal CDF through `erfc`, accurate in both tails.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Total variation between `N(mu1, σ² I)` and `N(mu2, σ² I)`:
/// `2 Φ(|mu1 - mu2| / 2σ) - 1`.
pub fn gaussian_tv_isotropic(mu1: &[f64], mu2: &[f64], sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::param(format!("sigma must be > 0, got {sigma}")));
    }
    if mu1.len() != mu2.len() {
        return Err(Error::param("mean vectors differ in length"));
    }
    let d: f64 = mu1
        .iter()
        .zip(mu2)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(tv_from_distance(d, sigma))
}

pub fn tv_from_distance(distance: f64, sigma: f64) -> f64 {
    // 1 - 2Φ(-z) keeps full precision for small z.
    let z = distance / (2.0 * sigma);
    (1.0 - 2.0 * normal_cdf(-z)).clamp(0.0, 1.0)
}

/// Means of the one-step kernels of the perturbed and reference chains and
/// their common standard deviation `sqrt(2Δt/β)`.
pub fn em_kernel_means(
    x: &[f64],
    y: &[f64],
    model: &ModelSpec,
    p: &SimParams,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let bx = model.drift(x)?;
    let by = model.drift(y)?;
    let fx = model.forcing.eval(x);
    let mu_x = (0..x.len())
        .map(|i| x[i] + p.dt * (bx[i] + p.eta * fx[i]))
        .collect();
    let mu_y = (0..y.len()).map(|i| y[i] + p.dt * by[i]).collect();
    Ok((mu_x, mu_y, p.noise_scale()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::make_harmonic;

    #[test]
    fn ou_examples() {
        let o = ou_stationary(1.0, 0.0).unwrap();
        assert_eq!(o.sigma, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(o.alpha, 0.5);
        let o = ou_stationary(1.0, 0.1).unwrap();
        let want = [[1.005, 0.05], [0.05, 1.0]];
        for (got, want) in o.sigma.iter().flatten().zip(want.iter().flatten()) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(ou_stationary(2.0, 0.3).unwrap().alpha, 0.25);
        assert!(ou_stationary(0.0, 0.1).is_err());
        assert!(ou_stationary(-1.0, 0.1).is_err());
    }

    #[test]
    fn ou_covariance_solves_the_lyapunov_equation() {
        // A Σ + Σ Aᵀ = (2/β) I with A = [[1, -η], [0, 1]].
        for &(beta, eta) in &[(1.0, 0.1), (0.5, -0.7), (3.0, 2.0)] {
            let s = ou_stationary(beta, eta).unwrap().sigma;
            let a = [[1.0, -eta], [0.0, 1.0]];
            for i in 0..2 {
                for j in 0..2 {
                    let mut v = 0.0;
                    for k in 0..2 {
                        v += a[i][k] * s[k][j] + s[i][k] * a[j][k];
                    }
                    let rhs = if i == j { 2.0 / beta } else { 0.0 };
                    assert!((v - rhs).abs() < 1e-13);
                }
            }
            let det = ou_stationary(beta, eta).unwrap().determinant();
            assert!((det - (4.0 + eta * eta) / (4.0 * beta * beta)).abs() < 1e-13);
        }
    }

    #[test]
    fn tv_examples() {
        assert_eq!(
            gaussian_tv_isotropic(&[1.0, 2.0], &[1.0, 2.0], 0.3).unwrap(),
            0.0
        );
        let tv = gaussian_tv_isotropic(&[0.0, 0.0], &[0.0, 2.0], 1.0).unwrap();
        // Midpoint-rule quadrature of ½∫|φ(z) - φ(z - 2)| dz.
        let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let h = 1e-4;
        let quad: f64 = (0..200_000)
            .map(|k| {
                let z = -10.0 + (k as f64 + 0.5) * h;
                (phi(z) - phi(z - 2.0)).abs()
            })
            .sum::<f64>()
            * h
            * 0.5;
        assert!((tv - quad).abs() < 1e-9, "{tv} vs {quad}");
        assert!((tv - 0.682_689_492_137_085_9).abs() < 1e-12);
        assert_eq!(gaussian_tv_isotropic(&[0.0], &[1e6], 1.0).unwrap(), 1.0);
        assert!(gaussian_tv_isotropic(&[0.0], &[1.0], 0.0).is_err());
    }

    #[test]
    fn kernel_means() {
        let m = make_harmonic();
        let p = SimParams::new(0.1, 2.0, 0.0);
        let (mx, my, s) = em_kernel_means(&[0.4, 0.1], &[0.4, 0.1], &m, &p).unwrap();
        assert_eq!(mx, my);
        assert!((s - 0.1f64.sqrt()).abs() < 1e-16);
        let (_, _, s2) = em_kernel_means(&[9.0, 1.0], &[-3.0, 2.0], &m, &p).unwrap();
        assert_eq!(s, s2);
    }
}
