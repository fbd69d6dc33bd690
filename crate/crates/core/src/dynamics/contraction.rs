use super::{Constants, ModelSpec};
use crate::error::{Error, Result};

/// Upper end `m / (2 (L_b + η* L_F)^2)` of the time steps for which the
/// contraction function is defined.
pub fn admissible_dt_bound(c: &Constants, eta_star: f64) -> f64 {
    let lip = c.lip_b + eta_star.abs() * c.lip_f;
    c.m / (2.0 * lip * lip)
}

/// `Δt* = min{1/m, m / (2 (L_b + η* L_F)^2)}`.
pub fn time_step_bound(c: &Constants, eta_star: f64) -> f64 {
    (1.0 / c.m).min(admissible_dt_bound(c, eta_star))
}

fn radius(c: &Constants, eta_star: f64) -> f64 {
    let forced = if eta_star == 0.0 {
        0.0
    } else {
        4.0 * eta_star.abs() * c.f_sup / c.m
    };
    c.big_m.max(forced)
}

/// Piecewise affine bound on how far one deterministic Euler step can move
/// two points apart: expansion `1 + (L_b + η* L_F) Δt` up to radius
/// `M̃ = max{M, 4 η* ‖F‖∞ / m}`, contraction `1 - m Δt / 4` beyond it.
pub fn tau(r: f64, eta_star: f64, dt: f64, c: &Constants) -> Result<f64> {
    c.validate()?;
    let bound = admissible_dt_bound(c, eta_star);
    if !(dt > 0.0 && dt < bound) {
        return Err(Error::param(format!(
            "dt={dt} outside the admissible range (0, {bound})"
        )));
    }
    if !(r >= 0.0) {
        return Err(Error::param(format!("tau needs r >= 0, got {r}")));
    }
    let expand = 1.0 + (c.lip_b + eta_star.abs() * c.lip_f) * dt;
    let m_tilde = radius(c, eta_star);
    Ok(if r <= m_tilde {
        expand * r
    } else {
        expand * m_tilde + (1.0 - dt * c.m / 4.0) * (r - m_tilde)
    })
}

/// Whether `|x - y + Δt (b(x) - b(y) + η (F(x) - F(y)))| <= τ(|x - y|)`.
pub fn check_drift_control(
    x: &[f64],
    y: &[f64],
    model: &ModelSpec,
    eta: f64,
    eta_star: f64,
    dt: f64,
) -> Result<bool> {
    let c = model.require_constants()?;
    if eta.abs() > eta_star {
        return Err(Error::param(format!(
            "|eta|={} exceeds eta*={eta_star}",
            eta.abs()
        )));
    }
    let bx = model.drift(x)?;
    let by = model.drift(y)?;
    let fx = model.forcing.eval(x);
    let fy = model.forcing.eval(y);
    let mut lhs = 0.0;
    let mut dist = 0.0;
    for i in 0..x.len() {
        let d = x[i] - y[i];
        let v = d + dt * (bx[i] - by[i] + eta * (fx[i] - fy[i]));
        lhs += v * v;
        dist += d * d;
    }
    Ok(lhs.sqrt() <= tau(dist.sqrt(), eta_star, dt, &c)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{make_harmonic, Forcing};

    fn harmonic_constants() -> Constants {
        make_harmonic().constants.unwrap()
    }

    #[test]
    fn tau_vanishes_at_zero() {
        assert_eq!(tau(0.0, 0.0, 0.1, &harmonic_constants()).unwrap(), 0.0);
        let c = make_harmonic()
            .with_forcing(Forcing::sinusoidal_shear())
            .constants
            .unwrap();
        assert_eq!(tau(0.0, 0.1, 0.1, &c).unwrap(), 0.0);
    }

    #[test]
    fn tau_contraction_branch_for_harmonic() {
        let t = tau(2.0, 0.0, 0.1, &harmonic_constants()).unwrap();
        assert!((t - 1.95).abs() < 1e-15);
    }

    #[test]
    fn tau_is_continuous_at_the_radius() {
        let c = make_harmonic()
            .with_forcing(Forcing::sinusoidal_shear())
            .constants
            .unwrap();
        let (eta_star, dt) = (0.1, 0.05);
        let m_tilde = radius(&c, eta_star);
        assert!((m_tilde - 0.4).abs() < 1e-15);
        let below = tau(m_tilde * (1.0 - 1e-12), eta_star, dt, &c).unwrap();
        let at = tau(m_tilde, eta_star, dt, &c).unwrap();
        let above = tau(m_tilde * (1.0 + 1e-12), eta_star, dt, &c).unwrap();
        let shared = (1.0 + (c.lip_b + eta_star * c.lip_f) * dt) * m_tilde;
        assert!((at - shared).abs() < 1e-15);
        assert!((below - at).abs() < 1e-11 && (above - at).abs() < 1e-11);
    }

    #[test]
    fn tau_rejects_large_steps_and_missing_constants() {
        assert!(matches!(
            tau(1.0, 0.0, 0.5, &harmonic_constants()),
            Err(Error::Parameter(_))
        ));
        let lj = crate::dynamics::make_lj_cluster(2, 1.0, 5.0, 1.0, 1.0).unwrap();
        assert!(check_drift_control(&[0.0; 4], &[1.0; 4], &lj, 0.0, 0.0, 1e-3).is_err());
    }

    #[test]
    fn drift_control_holds_for_harmonic_examples() {
        let m = make_harmonic();
        assert!(check_drift_control(&[1.0, 2.0], &[1.0, 2.0], &m, 0.0, 0.0, 0.1).unwrap());
        assert!(check_drift_control(&[1.0, 2.0], &[-3.0, 0.5], &m, 0.0, 0.0, 0.1).unwrap());
    }
}
