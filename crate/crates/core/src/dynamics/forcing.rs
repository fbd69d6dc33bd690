use std::f64::consts::PI;
use std::fmt;

use super::potential::VectorField;

/// Non-gradient perturbation `F`.
#[derive(Clone)]
pub enum Forcing {
    /// `F ≡ 0`.
    Zero,
    /// `F(x) = (x_2, 0)`. Unbounded, so `‖F‖∞ = ∞`.
    LinearShear,
    /// `F(x) = (sin x_2, 0)`.
    SinusoidalShear,
    /// Per particle `i`: `F_{2i-1} = sin(π x_2^i / L)`, `F_{2i} = 0`.
    LjShear { box_half_width: f64 },
    /// Arbitrary field with optional Lipschitz constant and sup-norm.
    Field {
        field: VectorField,
        lipschitz: Option<f64>,
        sup_norm: Option<f64>,
    },
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Zero => write!(f, "Zero"),
            Forcing::LinearShear => write!(f, "LinearShear"),
            Forcing::SinusoidalShear => write!(f, "SinusoidalShear"),
            Forcing::LjShear { box_half_width } => f
                .debug_struct("LjShear")
                .field("box_half_width", box_half_width)
                .finish(),
            Forcing::Field { .. } => write!(f, "Field(<fn>)"),
        }
    }
}

impl Forcing {
    pub fn linear_shear() -> Self {
        Forcing::LinearShear
    }

    pub fn sinusoidal_shear() -> Self {
        Forcing::SinusoidalShear
    }

    pub fn lj_shear(box_half_width: f64) -> Self {
        Forcing::LjShear { box_half_width }
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Forcing::Zero => out.iter_mut().for_each(|o| *o = 0.0),
            Forcing::LinearShear => {
                out.iter_mut().for_each(|o| *o = 0.0);
                out[0] = x[1];
            }
            Forcing::SinusoidalShear => {
                out.iter_mut().for_each(|o| *o = 0.0);
                out[0] = x[1].sin();
            }
            Forcing::LjShear { box_half_width } => {
                let k = PI / box_half_width;
                for (o, p) in out.chunks_exact_mut(2).zip(x.chunks_exact(2)) {
                    o[0] = (k * p[1]).sin();
                    o[1] = 0.0;
                }
            }
            Forcing::Field { field, .. } => field(x, out),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.eval_into(x, &mut out);
        out
    }

    /// Lipschitz constant `L_F`, when known.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            Forcing::Zero => Some(0.0),
            Forcing::LinearShear | Forcing::SinusoidalShear => Some(1.0),
            Forcing::LjShear { box_half_width } => Some(PI / box_half_width),
            Forcing::Field { lipschitz, .. } => *lipschitz,
        }
    }

    /// `‖F‖∞` in dimension `dim`, when known; may be infinite.
    pub fn sup_norm(&self, dim: usize) -> Option<f64> {
        match self {
            Forcing::Zero => Some(0.0),
            Forcing::LinearShear => Some(f64::INFINITY),
            Forcing::SinusoidalShear => Some(1.0),
            Forcing::LjShear { .. } => Some(((dim / 2) as f64).sqrt()),
            Forcing::Field { sup_norm, .. } => *sup_norm,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Forcing::Zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shear_formulas() {
        assert_eq!(Forcing::linear_shear().eval(&[1.0, 2.0]), vec![2.0, 0.0]);
        assert_eq!(
            Forcing::sinusoidal_shear().eval(&[0.0, 0.0]),
            vec![0.0, 0.0]
        );
        let f = Forcing::lj_shear(5.0).eval(&[0.3, 1.0, -4.0, 2.5, 1.0, 0.0]);
        assert_eq!(f[2], 1.0);
        assert_eq!(f[3], 0.0);
        assert_eq!(f[5], 0.0);
        assert_eq!(f[4], 0.0);
    }

    #[test]
    fn lj_shear_sup_norm_is_sqrt_n() {
        assert_eq!(Forcing::lj_shear(5.0).sup_norm(2 * 9), Some(3.0));
    }
}
