use crate::error::{Error, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = CompensatedSum::default();
    values.into_iter().for_each(|v| s.add(v));
    s.value()
}

/// Welford running mean and variance.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningMoments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    #[inline]
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        let d = v - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (v - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; NaN below two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
}

pub fn mean(values: &[f64]) -> f64 {
    compensated_sum(values.iter().copied()) / values.len() as f64
}

/// Unbiased sample variance (two-pass); NaN below two samples.
pub fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    compensated_sum(values.iter().map(|v| (v - m) * (v - m))) / (values.len() - 1) as f64
}

/// Asymptotic variance of the time average of `series`, scaled for the
/// `sqrt(N Δt)` central limit theorem.
///
/// The trailing `n_batches * m` values are cut into `n_batches` blocks of
/// length `m = ⌊len / n_batches⌋` (any leading remainder is dropped). With
/// `B_j` the block means, the estimate is `m Δt Var(B)`: the block means have
/// variance close to `σ² / (m Δt)` once `m` exceeds the correlation length.
pub fn batch_means_variance(series: &[f64], n_batches: usize, dt: f64) -> Result<f64> {
    if n_batches < 2 {
        return Err(Error::param("batch means needs at least two batches"));
    }
    if series.len() < 2 * n_batches {
        return Err(Error::param(format!(
            "series of length {} too short for {n_batches} batches",
            series.len()
        )));
    }
    let m = series.len() / n_batches;
    let start = series.len() - m * n_batches;
    let means: Vec<f64> = series[start..]
        .chunks_exact(m)
        .map(|c| compensated_sum(c.iter().copied()) / m as f64)
        .collect();
    Ok(batch_means_from_block_means(&means, m, dt))
}

pub(crate) fn batch_means_from_block_means(block_means: &[f64], block_len: usize, dt: f64) -> f64 {
    block_len as f64 * dt * sample_variance(block_means)
}
