use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// In-place vector field `x -> out`, used for drift-only models and custom forcings.
pub type VectorField = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Parameters of a two-dimensional Lennard-Jones cluster tied to an anchor
/// particle fixed at the origin and confined to the box `[-L, L]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LjCluster {
    pub n_particles: usize,
    /// Strength of the quadratic confinement outside the box.
    pub confinement: f64,
    pub box_half_width: f64,
    pub epsilon: f64,
    pub sigma: f64,
}

impl LjCluster {
    /// Pair energy `4ε[(σ/r)^12 - (σ/r)^6]`.
    pub fn pair_energy(&self, r: f64) -> f64 {
        let s6 = (self.sigma / r).powi(6);
        4.0 * self.epsilon * (s6 * s6 - s6)
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let n = self.n_particles;
        let mut u = 0.0;
        for i in 0..n {
            let (xi, yi) = (x[2 * i], x[2 * i + 1]);
            u += self.pair_energy(xi.hypot(yi));
            for j in (i + 1)..n {
                let dx = xi - x[2 * j];
                let dy = yi - x[2 * j + 1];
                u += self.pair_energy(dx.hypot(dy));
            }
        }
        let l = self.box_half_width;
        let excess: f64 = x
            .iter()
            .map(|c| {
                let e = (c.abs() - l).max(0.0);
                e * e
            })
            .sum();
        u + 0.5 * self.confinement * excess
    }

    fn drift_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.n_particles;
        let sigma2 = self.sigma * self.sigma;
        let eps24 = 24.0 * self.epsilon;
        // -dv/dr / r, so that the force on i from j is this times (x_i - x_j).
        let radial = |r2: f64| -> f64 {
            let s2 = sigma2 / r2;
            let s6 = s2 * s2 * s2;
            eps24 * (2.0 * s6 * s6 - s6) / r2
        };
        let l = self.box_half_width;
        for (o, &c) in out.iter_mut().zip(x) {
            let e = (c.abs() - l).max(0.0);
            *o = -self.confinement * e * c.signum();
        }
        for i in 0..n {
            let (xi, yi) = (x[2 * i], x[2 * i + 1]);
            let r2 = xi * xi + yi * yi;
            if r2 == 0.0 {
                return Err(Error::blow_up(format!(
                    "particle {} sits on the anchor",
                    i + 1
                )));
            }
            let f = radial(r2);
            out[2 * i] += f * xi;
            out[2 * i + 1] += f * yi;
            for j in (i + 1)..n {
                let dx = xi - x[2 * j];
                let dy = yi - x[2 * j + 1];
                let r2 = dx * dx + dy * dy;
                if r2 == 0.0 {
                    return Err(Error::blow_up(format!(
                        "particles {} and {} coincide",
                        i + 1,
                        j + 1
                    )));
                }
                let f = radial(r2);
                out[2 * i] += f * dx;
                out[2 * i + 1] += f * dy;
                out[2 * j] -= f * dx;
                out[2 * j + 1] -= f * dy;
            }
        }
        Ok(())
    }

    /// Free particles on the triangular lattice of spacing 1 around the anchor,
    /// filled shell by shell (6 at distance 1, 6 at sqrt(3), 6 at 2, ...).
    pub fn lattice_start(&self) -> Vec<f64> {
        let mut sites = Vec::new();
        let reach = (self.n_particles as f64).sqrt().ceil() as i64 + 2;
        let h = 3f64.sqrt() / 2.0;
        for row in -reach..=reach {
            for col in -reach..=reach {
                if row == 0 && col == 0 {
                    continue;
                }
                let px = col as f64 + 0.5 * row as f64;
                let py = h * row as f64;
                sites.push((px * px + py * py, px.atan2(py), px, py));
            }
        }
        // Sort by shell radius, then by angle so the fill order is stable.
        sites.sort_by(|a, b| {
            let ra = (a.0 * 1e9).round();
            let rb = (b.0 * 1e9).round();
            ra.total_cmp(&rb).then(a.1.total_cmp(&b.1))
        });
        sites
            .into_iter()
            .take(self.n_particles)
            .flat_map(|(_, _, px, py)| [px, py])
            .collect()
    }
}

/// The reference drift `b`, either as minus the gradient of a known potential
/// or as a bare vector field.
#[derive(Clone)]
pub enum Potential {
    /// `U(x) = |x|^2 / 2` in any dimension.
    Harmonic,
    /// Product of cosines inside `[-L, L]^2`, quadratic outside (two-dimensional).
    CosineWell {
        half_width: f64,
    },
    LjCluster(LjCluster),
    /// A model defined only through its drift; no energy is available.
    Drift(VectorField),
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Harmonic => write!(f, "Harmonic"),
            Potential::CosineWell { half_width } => f
                .debug_struct("CosineWell")
                .field("half_width", half_width)
                .finish(),
            Potential::LjCluster(c) => f.debug_tuple("LjCluster").field(c).finish(),
            Potential::Drift(_) => write!(f, "Drift(<fn>)"),
        }
    }
}

impl Potential {
    /// `U(x)`, or `None` for drift-only models.
    pub fn energy(&self, x: &[f64]) -> Option<f64> {
        match self {
            Potential::Harmonic => Some(0.5 * x.iter().map(|v| v * v).sum::<f64>()),
            Potential::CosineWell { half_width } => Some(cosine_well_energy(*half_width, x)),
            Potential::LjCluster(c) => Some(c.energy(x)),
            Potential::Drift(_) => None,
        }
    }

    /// Writes `b(x)` into `out`.
    pub fn drift_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            Potential::Harmonic => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = -v;
                }
                Ok(())
            }
            Potential::CosineWell { half_width } => {
                cosine_well_drift(*half_width, x, out);
                Ok(())
            }
            Potential::LjCluster(c) => c.drift_into(x, out),
            Potential::Drift(field) => {
                field(x, out);
                Ok(())
            }
        }
    }
}

fn cosine_well_energy(l: f64, x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    if a.abs().max(b.abs()) < l {
        let k = 2.0 * PI / l;
        (1.0 - (k * a).cos()) * (1.0 - (k * b).cos())
    } else {
        let ea = (a.abs() - l).max(0.0);
        let eb = (b.abs() - l).max(0.0);
        0.5 * (ea * ea + eb * eb)
    }
}

fn cosine_well_drift(l: f64, x: &[f64], out: &mut [f64]) {
    let (a, b) = (x[0], x[1]);
    if a.abs().max(b.abs()) < l {
        let k = 2.0 * PI / l;
        let (sa, ca) = (k * a).sin_cos();
        let (sb, cb) = (k * b).sin_cos();
        out[0] = -k * sa * (1.0 - cb);
        out[1] = -k * (1.0 - ca) * sb;
    } else {
        out[0] = -(a.abs() - l).max(0.0) * a.signum();
        out[1] = -(b.abs() - l).max(0.0) * b.signum();
    }
}
