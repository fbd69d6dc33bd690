use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::ModelSpec;
use crate::error::Result;

/// Regularization used by the cluster tilt unless configured otherwise.
pub const DEFAULT_TILT_EPS: f64 = 0.2;

/// Scalar function of the state.
pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Scalar response function `R`.
///
/// Built-in observables have zero mean under the reference measure for the
/// models they are paired with, so standard NEMD subtracts nothing by default.
#[derive(Clone)]
pub enum Observable {
    /// `x_1 x_2`.
    Cov,
    /// `Σ_i sin(π x_2^i / L) ∂_{x_1^i} U`. Reads the drift, so it needs `b = -∇U`.
    Mobility {
        box_half_width: f64,
    },
    /// `Σ_i tanh(x_1^i / ε) tanh(x_2^i / ε)`.
    Tilt {
        eps: f64,
    },
    Constant(f64),
    Custom {
        name: String,
        f: ScalarField,
    },
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Observable({})", self.name())
    }
}

impl Observable {
    pub fn r_cov() -> Self {
        Observable::Cov
    }

    pub fn r_mobility(box_half_width: f64) -> Self {
        Observable::Mobility { box_half_width }
    }

    pub fn r_tilt(eps: f64) -> Self {
        Observable::Tilt { eps }
    }

    pub fn name(&self) -> &str {
        match self {
            Observable::Cov => "r_cov",
            Observable::Mobility { .. } => "r_mobility",
            Observable::Tilt { .. } => "r_tilt",
            Observable::Constant(_) => "constant",
            Observable::Custom { name, .. } => name,
        }
    }

    pub(crate) fn needs_drift(&self) -> bool {
        matches!(self, Observable::Mobility { .. })
    }

    /// Evaluates `R(x)` given the drift `b(x)` already computed at `x`.
    pub fn eval_with_drift(&self, x: &[f64], drift: &[f64]) -> f64 {
        match self {
            Observable::Cov => x[0] * x[1],
            Observable::Mobility { box_half_width } => {
                let k = PI / box_half_width;
                x.chunks_exact(2)
                    .zip(drift.chunks_exact(2))
                    .map(|(p, b)| -(k * p[1]).sin() * b[0])
                    .sum()
            }
            Observable::Tilt { eps } => x
                .chunks_exact(2)
                .map(|p| (p[0] / eps).tanh() * (p[1] / eps).tanh())
                .sum(),
            Observable::Constant(c) => *c,
            Observable::Custom { f, .. } => f(x),
        }
    }

    pub fn eval(&self, model: &ModelSpec, x: &[f64]) -> Result<f64> {
        if self.needs_drift() {
            let drift = model.drift(x)?;
            Ok(self.eval_with_drift(x, &drift))
        } else {
            Ok(self.eval_with_drift(x, &[]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::make_lj_cluster;

    #[test]
    fn closed_forms() {
        let m = crate::dynamics::make_harmonic();
        assert_eq!(Observable::r_cov().eval(&m, &[1.0, 2.0]).unwrap(), 2.0);
        let z = vec![0.0; 12];
        assert_eq!(
            Observable::r_tilt(DEFAULT_TILT_EPS).eval(&m, &z).unwrap(),
            0.0
        );
    }

    #[test]
    fn mobility_vanishes_at_a_critical_point() {
        // One free particle at the pair minimum, inside the box: ∇U = 0.
        let lj = make_lj_cluster(1, 1.0, 5.0, 1.0, 2f64.powf(-1.0 / 6.0)).unwrap();
        let r = Observable::r_mobility(5.0).eval(&lj, &[0.0, 1.0]).unwrap();
        assert!(r.abs() < 1e-12, "{r}");
    }

    #[test]
    fn mobility_matches_forcing_dot_gradient() {
        let lj = make_lj_cluster(3, 1.0, 5.0, 1.0, 2f64.powf(-1.0 / 6.0)).unwrap();
        let x = [1.1, 0.2, -0.3, 1.4, 0.9, -1.2];
        let grad: Vec<f64> = lj.drift(&x).unwrap().iter().map(|b| -b).collect();
        let f = crate::dynamics::Forcing::lj_shear(5.0).eval(&x);
        let expected: f64 = f.iter().zip(&grad).map(|(a, b)| a * b).sum();
        let got = Observable::r_mobility(5.0).eval(&lj, &x).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected.abs().max(1.0));
    }
}
