//! Least squares and the lagged-regressor designs shared by every unit root
//! regression.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Columns whose triangular factor falls below this fraction of the column
/// norm are treated as linearly dependent.
const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    /// `rss / (n - k)`.
    pub sigma2: f64,
}

impl OlsFit {
    pub fn n_obs(&self) -> usize {
        self.residuals.len()
    }

    pub fn t_ratio(&self, k: usize) -> f64 {
        self.coefficients[k] / self.stderrs[k]
    }
}

/// Ordinary least squares through a Householder QR factorization.
///
/// Rank-deficient designs are rejected with [`Error::Singular`]; there is no
/// pseudo-inverse fallback.
pub fn ols(y: &[f64], x: &DMatrix<f64>) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::InvalidInput(format!(
            "response has {} rows, design has {n}",
            y.len()
        )));
    }
    if n <= k {
        return Err(Error::InvalidInput(format!(
            "{n} observations cannot identify {k} coefficients"
        )));
    }
    let norms: Vec<f64> = x.column_iter().map(|c| c.norm()).collect();
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..k {
        if norms[j] == 0.0 || r[(j, j)].abs() <= RANK_TOL * norms[j] {
            return Err(Error::Singular);
        }
    }
    let mut qty = DVector::from_column_slice(y);
    qr.q_tr_mul(&mut qty);
    let rhs = qty.rows(0, k).into_owned();
    let beta = r.solve_upper_triangular(&rhs).ok_or(Error::Singular)?;
    let fitted = x * &beta;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let sigma2 = rss / (n - k) as f64;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::Singular)?;
    // (X'X)^-1 = R^-1 R^-T, so the diagonal is the squared row norms of R^-1.
    let stderrs = (0..k)
        .map(|j| (sigma2 * r_inv.row(j).norm_squared()).sqrt())
        .collect();
    Ok(OlsFit {
        coefficients: beta.iter().copied().collect(),
        stderrs,
        residuals,
        rss,
        sigma2,
    })
}

/// One column of a time-series regression, evaluated at time `t`.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Term<'a> {
    Const,
    /// `s[t - lag]`
    Level(&'a [f64], usize),
    /// `s[t - lag] - s[t - lag - 1]`
    Diff(&'a [f64], usize),
    /// Series aligned with first differences: element `k` belongs to time
    /// `k + 1`, so the value at `t` with `lag` is `s[t - 1 - lag]`.
    Aligned(&'a [f64], usize),
}

impl Term<'_> {
    #[inline]
    fn at(&self, t: usize) -> f64 {
        match *self {
            Term::Const => 1.0,
            Term::Level(s, l) => s[t - l],
            Term::Diff(s, l) => s[t - l] - s[t - l - 1],
            Term::Aligned(s, l) => s[t - 1 - l],
        }
    }

    /// First `t` at which the term is defined.
    fn min_t(&self) -> usize {
        match *self {
            Term::Const => 0,
            Term::Level(_, l) => l,
            Term::Diff(_, l) => l + 1,
            Term::Aligned(_, l) => l + 1,
        }
    }
}

pub(crate) fn min_start(terms: &[Term]) -> usize {
    terms.iter().map(Term::min_t).max().unwrap_or(0).max(1)
}

pub(crate) fn design(terms: &[Term], start: usize, end: usize) -> DMatrix<f64> {
    let n = end - start;
    DMatrix::from_fn(n, terms.len(), |i, j| terms[j].at(start + i))
}

pub(crate) fn diffs(y: &[f64], start: usize, end: usize) -> Vec<f64> {
    (start..end).map(|t| y[t] - y[t - 1]).collect()
}

/// Cross products of a full design, for scoring column subsets cheaply.
pub(crate) struct Gram {
    xtx: DMatrix<f64>,
    xty: DVector<f64>,
    yty: f64,
    n: usize,
}

impl Gram {
    pub(crate) fn new(y: &[f64], x: &DMatrix<f64>) -> Self {
        let yv = DVector::from_column_slice(y);
        Self {
            xtx: x.tr_mul(x),
            xty: x.tr_mul(&yv),
            yty: yv.norm_squared(),
            n: y.len(),
        }
    }

    /// Residual sum of squares of the regression on `cols`, `None` if the
    /// subset is numerically singular.
    pub(crate) fn rss(&self, cols: &[usize]) -> Option<f64> {
        let k = cols.len();
        let sub = DMatrix::from_fn(k, k, |i, j| self.xtx[(cols[i], cols[j])]);
        let rhs = DVector::from_fn(k, |i, _| self.xty[cols[i]]);
        let diag_max = (0..k).map(|i| sub[(i, i)]).fold(0.0f64, f64::max);
        let chol = sub.cholesky()?;
        let l = chol.l_dirty();
        if (0..k).any(|i| l[(i, i)] * l[(i, i)] <= 1e-12 * diag_max) {
            return None;
        }
        let b = chol.solve(&rhs);
        Some((self.yty - b.dot(&rhs)).max(f64::MIN_POSITIVE))
    }

    /// Akaike criterion `n ln(RSS/n) + 2k`.
    pub(crate) fn aic(&self, cols: &[usize]) -> Option<f64> {
        let rss = self.rss(cols)?;
        let n = self.n as f64;
        Some(n * (rss / n).ln() + 2.0 * cols.len() as f64)
    }
}

/// Index of the smallest score; ties resolve to the earliest candidate.
pub(crate) fn argmin_first(scores: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, s) in scores.iter().enumerate() {
        if let Some(s) = *s {
            if best.map_or(true, |(_, b)| s < b) {
                best = Some((k, s));
            }
        }
    }
    best.map(|(k, _)| k)
}
