use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub stderr: f64,
}

/// Weighted least-squares slope through the origin of the response
/// `η α̂_η` against `η`.
///
/// Weights are `1 / (η se)²` when every standard error is positive and finite,
/// uniform otherwise. With two or more points the standard error comes from
/// the weighted residuals; a single point falls back to its own `se`.
pub fn linear_response_fit(etas: &[f64], alpha_hats: &[f64], ses: &[f64]) -> Result<LinearFit> {
    if etas.is_empty() || etas.len() != alpha_hats.len() || etas.len() != ses.len() {
        return Err(Error::param(
            "fit needs equally long, non-empty eta/alpha/se lists",
        ));
    }
    let responses: Vec<f64> = etas.iter().zip(alpha_hats).map(|(e, a)| e * a).collect();
    let weighted = ses.iter().all(|s| *s > 0.0 && s.is_finite());
    let weights: Vec<f64> = etas
        .iter()
        .zip(ses)
        .map(|(e, s)| if weighted { 1.0 / (e * s).powi(2) } else { 1.0 })
        .collect();
    let sxx: f64 = weights.iter().zip(etas).map(|(w, e)| w * e * e).sum();
    if !(sxx > 0.0 && sxx.is_finite()) {
        return Err(Error::param(
            "degenerate design: no nonzero eta to fit against",
        ));
    }
    let sxy: f64 = weights
        .iter()
        .zip(etas.iter().zip(&responses))
        .map(|(w, (e, r))| w * e * r)
        .sum();
    let slope = sxy / sxx;
    let n = etas.len();
    let stderr = if n >= 2 {
        let rss: f64 = weights
            .iter()
            .zip(etas.iter().zip(&responses))
            .map(|(w, (e, r))| w * (r - slope * e).powi(2))
            .sum();
        (rss / (n - 1) as f64 / sxx).sqrt()
    } else if weighted {
        ses[0]
    } else {
        f64::NAN
    };
    Ok(LinearFit { slope, stderr })
}
