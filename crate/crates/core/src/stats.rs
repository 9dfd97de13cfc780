//! Standard normal and chi-square helpers.

use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Normal};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("valid parameters")
}

pub fn norm_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

pub fn norm_sf(x: f64) -> f64 {
    std_normal().sf(x)
}

/// Inverse of the standard normal CDF, polished by Newton steps.
pub fn probit(p: f64) -> f64 {
    let d = std_normal();
    let mut z = d.inverse_cdf(p);
    if z.is_finite() {
        for _ in 0..2 {
            let err = if z < 0.0 {
                d.cdf(z) - p
            } else {
                (1.0 - p) - d.sf(z)
            };
            z -= err / d.pdf(z);
        }
    }
    z
}

pub fn chi2_sf(x: f64, df: f64) -> f64 {
    ChiSquared::new(df)
        .expect("positive degrees of freedom")
        .sf(x)
}

pub fn chi2_ppf(p: f64, df: f64) -> f64 {
    let d = ChiSquared::new(df).expect("positive degrees of freedom");
    let mut x = d.inverse_cdf(p);
    for _ in 0..3 {
        let dens = d.pdf(x);
        if !(dens > 0.0) {
            break;
        }
        x -= (d.cdf(x) - p) / dens;
    }
    x
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample variance with the `n - 1` divisor.
pub(crate) fn sample_var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probit_inverts_cdf() {
        for &p in &[1e-6, 0.01, 0.3, 0.5, 0.975] {
            assert!((norm_cdf(probit(p)) - p).abs() < 1e-12);
        }
        assert_eq!(probit(0.5), 0.0);
    }

    #[test]
    fn chi2_quantile_round_trip() {
        let q = chi2_ppf(0.95, 20.0);
        assert!((chi2_sf(q, 20.0) - 0.05).abs() < 1e-9);
    }
}
