//! Bartlett-kernel long-run (co)variance estimation.
//!
//! Autocovariances are uncentered, `gamma_j = (1/n) sum_t u_t u_{t-j}`;
//! callers pass residual-like series that are already mean zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    #[default]
    Bartlett,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Fixed(usize),
    /// `floor(4 (n/100)^(2/9))`
    #[default]
    Automatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct LrvSpec {
    pub kernel: Kernel,
    pub bandwidth: Bandwidth,
}

impl LrvSpec {
    pub fn fixed(m: usize) -> Self {
        Self {
            kernel: Kernel::Bartlett,
            bandwidth: Bandwidth::Fixed(m),
        }
    }

    /// Truncation lag for a series of length `n`, never beyond `n - 1`.
    pub fn lags(&self, n: usize) -> usize {
        let m = match self.bandwidth {
            Bandwidth::Fixed(m) => m,
            Bandwidth::Automatic => (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize,
        };
        m.min(n.saturating_sub(1))
    }

    fn weight(&self, j: usize, m: usize) -> f64 {
        match self.kernel {
            Kernel::Bartlett => 1.0 - j as f64 / (m as f64 + 1.0),
        }
    }
}

fn cross_autocov(a: &[f64], b: &[f64], j: usize) -> f64 {
    let n = a.len();
    (j..n).map(|t| a[t] * b[t - j]).sum::<f64>() / n as f64
}

/// Pieces of a univariate long-run variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrvParts {
    /// `gamma_0`
    pub variance: f64,
    /// `sum_{j=1..m} w_j gamma_j`
    pub one_sided: f64,
    /// `gamma_0 + 2 * one_sided`
    pub long_run: f64,
}

pub fn lrv_parts(u: &[f64], spec: &LrvSpec) -> Result<LrvParts> {
    if u.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "long-run variance needs at least 4 observations, got {}",
            u.len()
        )));
    }
    let m = spec.lags(u.len());
    let variance = cross_autocov(u, u, 0);
    let one_sided: f64 = (1..=m)
        .map(|j| spec.weight(j, m) * cross_autocov(u, u, j))
        .sum();
    Ok(LrvParts {
        variance,
        one_sided,
        long_run: variance + 2.0 * one_sided,
    })
}

pub fn long_run_variance(u: &[f64], spec: &LrvSpec) -> Result<f64> {
    Ok(lrv_parts(u, spec)?.long_run)
}

/// Long-run covariance matrix `[[aa, ab], [ab, bb]]` of two aligned series.
pub fn long_run_covariance(a: &[f64], b: &[f64], spec: &LrvSpec) -> Result<[[f64; 2]; 2]> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput("series lengths differ".into()));
    }
    let aa = long_run_variance(a, spec)?;
    let bb = long_run_variance(b, spec)?;
    let m = spec.lags(a.len());
    let ab = cross_autocov(a, b, 0)
        + (1..=m)
            .map(|j| spec.weight(j, m) * (cross_autocov(a, b, j) + cross_autocov(b, a, j)))
            .sum::<f64>();
    Ok([[aa, ab], [ab, bb]])
}
