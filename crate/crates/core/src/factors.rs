//! Principal-component factor extraction from an N x T residual panel.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    pub k: usize,
    /// T x k, orthonormal columns.
    pub factors: DMatrix<f64>,
    /// N x k, orthonormal columns; each column's largest-magnitude entry is
    /// positive.
    pub loadings: DMatrix<f64>,
    /// N x T residuals with the factors projected out.
    pub defactored: DMatrix<f64>,
    /// Eigenvalues of `E E'`, descending.
    pub eigenvalues: Vec<f64>,
}

impl FactorModel {
    /// `(I - L L') a` for an N-row matrix `a`.
    pub fn project_out(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        a - &self.loadings * (self.loadings.tr_mul(a))
    }
}

/// Eigen-decomposition of `E E'`, eigenvalues descending with eigenvectors
/// in matching columns.
fn sorted_eigen(e: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let cov = e * e.transpose();
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = eig.eigenvectors.select_columns(&order);
    (values, vectors)
}

/// Extracts `k` principal-component factors from the N x T matrix `e`.
pub fn extract_factors(e: &DMatrix<f64>, k: usize) -> Result<FactorModel> {
    let (n, t) = e.shape();
    if k == 0 || k >= n {
        return Err(Error::InvalidInput(format!(
            "number of factors must satisfy 1 <= k < N = {n}, got {k}"
        )));
    }
    if t <= k {
        return Err(Error::InvalidInput(
            "too few periods for the factor count".into(),
        ));
    }
    let (values, vectors) = sorted_eigen(e);
    let mut loadings = vectors.columns(0, k).into_owned();
    for mut col in loadings.column_iter_mut() {
        let (mut best, mut idx) = (0.0f64, 0);
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best {
                best = v.abs();
                idx = i;
            }
        }
        if col[idx] < 0.0 {
            col.neg_mut();
        }
    }
    let mut factors = DMatrix::zeros(t, k);
    for j in 0..k {
        if !(values[j] > 0.0) {
            return Err(Error::Degenerate(format!(
                "factor {} has zero variance",
                j + 1
            )));
        }
        let f = e.tr_mul(&loadings.column(j)) / values[j].sqrt();
        factors.set_column(j, &f);
    }
    let defactored = e - &loadings * loadings.tr_mul(e);
    Ok(FactorModel {
        k,
        factors,
        loadings,
        defactored,
        eigenvalues: values,
    })
}

/// Eigenvalue-ratio estimate of the factor count: the `k <= k_max` that
/// maximizes `mu_k / mu_{k+1}`.
pub fn eigenvalue_ratio_k(e: &DMatrix<f64>, k_max: usize) -> Result<usize> {
    let n = e.nrows();
    if k_max == 0 || k_max + 1 > n {
        return Err(Error::InvalidInput(format!(
            "k_max must lie in 1..N-1 for N = {n}"
        )));
    }
    let (values, _) = sorted_eigen(e);
    let mut best = (1, f64::NEG_INFINITY);
    for k in 1..=k_max {
        let ratio = values[k - 1] / values[k].max(f64::MIN_POSITIVE);
        if ratio > best.1 {
            best = (k, ratio);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn one_factor_panel(n: usize, t: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<f64> = (0..t).map(|_| StandardNormal.sample(&mut rng)).collect();
        DMatrix::from_fn(n, t, |i, s| {
            let noise: f64 = StandardNormal.sample(&mut rng);
            (1.0 + i as f64 * 0.3) * f[s] + 0.5 * noise
        })
    }

    #[test]
    fn factors_orthonormal_and_defactored_orthogonal() {
        let e = one_factor_panel(8, 120, 2);
        let m = extract_factors(&e, 2).unwrap();
        let ftf = m.factors.tr_mul(&m.factors);
        assert!((ftf - DMatrix::<f64>::identity(2, 2)).amax() < 1e-8);
        let cross = &m.defactored * &m.factors;
        assert!(cross.amax() < 1e-8 * e.amax());
        assert!(m.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn sign_convention() {
        let e = one_factor_panel(6, 80, 4);
        let m = extract_factors(&-e.clone(), 1).unwrap();
        let col = m.loadings.column(0);
        let idx = col.iamax();
        assert!(col[idx] > 0.0);
        let m2 = extract_factors(&e, 1).unwrap();
        assert!((m.loadings.clone() - m2.loadings).amax() < 1e-10);
    }

    #[test]
    fn ratio_finds_single_factor() {
        let e = one_factor_panel(10, 200, 9);
        assert_eq!(eigenvalue_ratio_k(&e, 4).unwrap(), 1);
    }

    #[test]
    fn k_must_be_below_n() {
        let e = one_factor_panel(3, 50, 1);
        assert!(extract_factors(&e, 3).is_err());
        assert!(extract_factors(&e, 0).is_err());
    }
}
