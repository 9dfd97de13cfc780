//! Augmented Dickey-Fuller regressions and their relatives.
//!
//! Every regression here explains `dy_t = y_t - y_{t-1}` by the lagged level
//! `y_{t-1}`, optional deterministics, lagged differences and, depending on
//! the variant, extra covariates. Lag orders chosen by AIC are compared on a
//! common sample (the one the largest candidate needs); the winner is then
//! re-estimated on the longest sample its own lags allow.

use serde::{Deserialize, Serialize};

use crate::data::{require_balanced, Panel};
use crate::error::{Error, Result};
use crate::lrv::{long_run_covariance, LrvSpec};
use crate::regression::{argmin_first, design, diffs, min_start, ols, Gram, OlsFit, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deterministics {
    None,
    Constant,
}

impl Deterministics {
    pub fn as_str(self) -> &'static str {
        match self {
            Deterministics::None => "none",
            Deterministics::Constant => "constant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagSelection {
    Fixed(usize),
    Aic { max_lag: usize },
}

impl LagSelection {
    pub fn max_lag(self) -> usize {
        match self {
            LagSelection::Fixed(p) => p,
            LagSelection::Aic { max_lag } => max_lag,
        }
    }

    fn candidates(self) -> Vec<usize> {
        match self {
            LagSelection::Fixed(p) => vec![p],
            LagSelection::Aic { max_lag } => (0..=max_lag).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdfSpec {
    pub deterministics: Deterministics,
    pub lag_selection: LagSelection,
}

impl Default for AdfSpec {
    fn default() -> Self {
        Self::constant_aic(5)
    }
}

impl AdfSpec {
    pub fn constant_aic(max_lag: usize) -> Self {
        Self {
            deterministics: Deterministics::Constant,
            lag_selection: LagSelection::Aic { max_lag },
        }
    }

    pub fn fixed(deterministics: Deterministics, lag: usize) -> Self {
        Self {
            deterministics,
            lag_selection: LagSelection::Fixed(lag),
        }
    }

    pub fn with_deterministics(self, deterministics: Deterministics) -> Self {
        Self {
            deterministics,
            ..self
        }
    }

    pub fn max_lag(&self) -> usize {
        self.lag_selection.max_lag()
    }

    fn check_length(&self, n: usize) -> Result<()> {
        let p = self.max_lag();
        if n < p + 10 {
            return Err(Error::InvalidInput(format!(
                "series of length {n} too short for {p} lags (need {})",
                p + 10
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdfFit {
    /// Coefficient on the lagged level.
    pub rho_hat: f64,
    pub stderr_rho: f64,
    pub t_stat: f64,
    pub alpha_hat: Option<f64>,
    /// Coefficients on the lagged own differences, lag 1 first.
    pub beta_hats: Vec<f64>,
    pub selected_lag: usize,
    pub residuals: Vec<f64>,
    pub n_obs: usize,
    /// Index of the first `t` used; residual `k` belongs to `t = start + k`.
    pub start: usize,
    pub sigma2: f64,
}

/// Regressors split into always-present terms and lag groups whose length is
/// chosen per candidate.
struct LagLayout<'a> {
    base: Vec<Term<'a>>,
    groups: Vec<Vec<Term<'a>>>,
}

struct Selected {
    fit: OlsFit,
    counts: Vec<usize>,
    start: usize,
}

impl<'a> LagLayout<'a> {
    fn columns(&self, counts: &[usize]) -> Vec<usize> {
        let mut cols: Vec<usize> = (0..self.base.len()).collect();
        let mut offset = self.base.len();
        for (g, &c) in self.groups.iter().zip(counts) {
            cols.extend(offset..offset + c);
            offset += g.len();
        }
        cols
    }

    fn terms(&self, counts: &[usize]) -> Vec<Term<'a>> {
        let mut terms = self.base.clone();
        for (g, &c) in self.groups.iter().zip(counts) {
            terms.extend_from_slice(&g[..c]);
        }
        terms
    }

    /// Scores each candidate on the common sample, refits the winner.
    fn select_and_fit(&self, y: &[f64], candidates: &[Vec<usize>]) -> Result<Selected> {
        let n = y.len();
        let chosen = if candidates.len() == 1 {
            candidates[0].clone()
        } else {
            let full = self.terms(&self.groups.iter().map(Vec::len).collect::<Vec<_>>());
            let start = min_start(&full);
            if n <= start + full.len() {
                return Err(Error::InvalidInput(format!(
                    "series of length {n} too short for the largest lag candidate"
                )));
            }
            let x = design(&full, start, n);
            let gram = Gram::new(&diffs(y, start, n), &x);
            let scores: Vec<Option<f64>> = candidates
                .iter()
                .map(|c| gram.aic(&self.columns(c)))
                .collect();
            let k = argmin_first(&scores).ok_or(Error::Singular)?;
            candidates[k].clone()
        };
        let terms = self.terms(&chosen);
        let start = min_start(&terms);
        let dy = diffs(y, start, n);
        let fit = ols(&dy, &design(&terms, start, n))?;
        let tss: f64 = dy.iter().map(|v| v * v).sum();
        if fit.rss <= EXACT_FIT_TOL * tss {
            return Err(Error::Degenerate(
                "regressors reproduce the differenced series exactly".into(),
            ));
        }
        Ok(Selected {
            fit,
            counts: chosen,
            start,
        })
    }
}

/// Relative residual sum of squares below which a fit is treated as exact.
const EXACT_FIT_TOL: f64 = 1e-20;

fn check_not_constant(y: &[f64]) -> Result<()> {
    let first = y[0];
    if y.iter().all(|&v| v == first) {
        return Err(Error::Degenerate("series is constant".into()));
    }
    Ok(())
}

fn to_adf_fit(sel: Selected, has_const: bool, level_idx: usize, own_group_offset: usize) -> AdfFit {
    let fit = sel.fit;
    let p = sel.counts[0];
    AdfFit {
        rho_hat: fit.coefficients[level_idx],
        stderr_rho: fit.stderrs[level_idx],
        t_stat: fit.t_ratio(level_idx),
        alpha_hat: has_const.then(|| fit.coefficients[0]),
        beta_hats: fit.coefficients[own_group_offset..own_group_offset + p].to_vec(),
        selected_lag: p,
        n_obs: fit.n_obs(),
        start: sel.start,
        sigma2: fit.sigma2,
        residuals: fit.residuals,
    }
}

/// ADF regression `dy_t = [a] + rho y_{t-1} + sum_k b_k dy_{t-k} + v_t`.
pub fn adf_fit(y: &[f64], spec: &AdfSpec) -> Result<AdfFit> {
    spec.check_length(y.len())?;
    check_not_constant(y)?;
    let has_const = spec.deterministics == Deterministics::Constant;
    let mut base = Vec::new();
    if has_const {
        base.push(Term::Const);
    }
    let level_idx = base.len();
    base.push(Term::Level(y, 1));
    let own = (1..=spec.max_lag()).map(|l| Term::Diff(y, l)).collect();
    let layout = LagLayout {
        base,
        groups: vec![own],
    };
    let candidates: Vec<Vec<usize>> = spec
        .lag_selection
        .candidates()
        .into_iter()
        .map(|p| vec![p])
        .collect();
    let sel = layout.select_and_fit(y, &candidates)?;
    Ok(to_adf_fit(sel, has_const, level_idx, level_idx + 1))
}

/// Cross-sectionally augmented regression for one unit:
/// `dy_t = [a] + b y_{t-1} + c ybar_{t-1} + sum_{j=0..p} d_j dybar_{t-j} + sum_{j=1..p} e_j dy_{t-j}`.
///
/// Own and cross-average lags share one order, chosen by AIC when requested.
pub fn pesaran_cadf_unit(y: &[f64], ybar: &[f64], spec: &AdfSpec) -> Result<AdfFit> {
    if y.len() != ybar.len() {
        return Err(Error::InvalidInput(
            "unit and cross-section mean lengths differ".into(),
        ));
    }
    spec.check_length(y.len())?;
    check_not_constant(y)?;
    // A cross-section mean that is zero up to round-off (differentials
    // against the group's own average) carries no factor information.
    let spread = |s: &[f64]| {
        let m = s.iter().sum::<f64>() / s.len() as f64;
        s.iter().map(|v| (v - m).powi(2)).sum::<f64>()
    };
    if spread(ybar) <= 1e-20 * spread(y) {
        return Err(Error::DegenerateCovariate);
    }
    let has_const = spec.deterministics == Deterministics::Constant;
    let mut base = Vec::new();
    if has_const {
        base.push(Term::Const);
    }
    let level_idx = base.len();
    base.extend([Term::Level(y, 1), Term::Level(ybar, 1), Term::Diff(ybar, 0)]);
    let own_offset = base.len();
    let max = spec.max_lag();
    let layout = LagLayout {
        base,
        groups: vec![
            (1..=max).map(|l| Term::Diff(y, l)).collect(),
            (1..=max).map(|l| Term::Diff(ybar, l)).collect(),
        ],
    };
    let candidates: Vec<Vec<usize>> = spec
        .lag_selection
        .candidates()
        .into_iter()
        .map(|p| vec![p, p])
        .collect();
    let sel = layout.select_and_fit(y, &candidates)?;
    Ok(to_adf_fit(sel, has_const, level_idx, own_offset))
}

/// Covariate-augmented ADF fit.
#[derive(Debug, Clone, PartialEq)]
pub struct CadfFit {
    pub adf: AdfFit,
    /// Coefficients on `x_t, x_{t-1}, ..., x_{t-q}`.
    pub covariate_coefs: Vec<f64>,
    pub covariate_lag: usize,
    /// Squared long-run correlation between the covariate-free error and the
    /// regression error, clamped to `[0, 1]`. One means the covariate carries
    /// no information and the statistic follows the Dickey-Fuller law.
    pub rho2_hat: f64,
}

impl CadfFit {
    pub fn delta_hat(&self) -> f64 {
        self.adf.rho_hat
    }

    pub fn t_stat(&self) -> f64 {
        self.adf.t_stat
    }
}

/// Covariate-augmented ADF regression
/// `dy_t = [a] + delta y_{t-1} + sum_{k=1..p} a_k dy_{t-k} + sum_{k=0..q} b_k x_{t-k} + e_t`.
///
/// `x` is a stationary covariate aligned with the differences of `y`:
/// `x[k]` belongs to time `k + 1`, so `x.len() == y.len() - 1`. Own lags
/// follow `spec.lag_selection`, covariate lags follow `covariate_lags`; under
/// AIC the pair is chosen jointly over the full grid.
pub fn cadf_fit(
    y: &[f64],
    x: &[f64],
    spec: &AdfSpec,
    covariate_lags: LagSelection,
    lrv: &LrvSpec,
) -> Result<CadfFit> {
    if x.len() + 1 != y.len() {
        return Err(Error::InvalidInput(format!(
            "covariate must have one element per difference: {} vs {}",
            x.len(),
            y.len() - 1
        )));
    }
    let need = spec.max_lag().max(covariate_lags.max_lag()) + 10;
    if y.len() < need {
        return Err(Error::InvalidInput(format!(
            "series of length {} too short for the lag grid (need {need})",
            y.len()
        )));
    }
    check_not_constant(y)?;
    let x_mean = x.iter().sum::<f64>() / x.len() as f64;
    let x_var = x.iter().map(|v| (v - x_mean).powi(2)).sum::<f64>();
    if x_var <= 1e-300 || !x_var.is_finite() {
        return Err(Error::DegenerateCovariate);
    }
    let has_const = spec.deterministics == Deterministics::Constant;
    let mut base = Vec::new();
    if has_const {
        base.push(Term::Const);
    }
    let level_idx = base.len();
    base.push(Term::Level(y, 1));
    let max_p = spec.max_lag();
    let max_q = covariate_lags.max_lag();
    let layout = LagLayout {
        base,
        groups: vec![
            (1..=max_p).map(|l| Term::Diff(y, l)).collect(),
            (0..=max_q).map(|l| Term::Aligned(x, l)).collect(),
        ],
    };
    let mut candidates = Vec::new();
    for p in spec.lag_selection.candidates() {
        for q in covariate_lags.candidates() {
            candidates.push(vec![p, q + 1]);
        }
    }
    let sel = layout.select_and_fit(y, &candidates)?;
    let q = sel.counts[1] - 1;
    let cov_offset = level_idx + 1 + sel.counts[0];
    let covariate_coefs = sel.fit.coefficients[cov_offset..cov_offset + q + 1].to_vec();
    let start = sel.start;

    let e = &sel.fit.residuals;
    let mut v: Vec<f64> = e
        .iter()
        .enumerate()
        .map(|(i, &ei)| {
            let t = start + i;
            ei + covariate_coefs
                .iter()
                .enumerate()
                .map(|(k, b)| b * x[t - 1 - k])
                .sum::<f64>()
        })
        .collect();
    let mut e = e.clone();
    demean_in_place(&mut v);
    demean_in_place(&mut e);
    let omega = long_run_covariance(&v, &e, lrv)?;
    let denom = omega[0][0] * omega[1][1];
    let rho2_hat = if denom > 0.0 {
        (omega[0][1] * omega[0][1] / denom).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(CadfFit {
        adf: to_adf_fit(sel, has_const, level_idx, level_idx + 1),
        covariate_coefs,
        covariate_lag: q,
        rho2_hat,
    })
}

fn demean_in_place(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

/// GLS detrending for the constant-only case.
///
/// Quasi-differences `y` and the constant at `a = 1 + c_bar/T` (first
/// observation kept in levels), regresses one on the other and subtracts the
/// estimated constant from `y`.
pub fn gls_detrend(y: &[f64], c_bar: f64) -> Result<Vec<f64>> {
    let n = y.len();
    if n < 3 {
        return Err(Error::InvalidInput(
            "GLS detrending needs at least 3 observations".into(),
        ));
    }
    let a = 1.0 + c_bar / n as f64;
    let z_rest = 1.0 - a;
    let szy = y[0] + (1..n).map(|t| z_rest * (y[t] - a * y[t - 1])).sum::<f64>();
    let szz = 1.0 + (n - 1) as f64 * z_rest * z_rest;
    let beta = szy / szz;
    Ok(y.iter().map(|v| v - beta).collect())
}

/// Conventional constant-case value of `c_bar`.
pub const ERS_C_BAR: f64 = -7.0;

/// Subtracts the cross-section mean at each date.
pub fn demean_cross_section(panel: &Panel) -> Result<Panel> {
    let rows = panel.balanced_rows()?;
    let demeaned = demean_rows(&rows);
    Panel::from_rows_on_axis(panel, demeaned)
}

pub(crate) fn demean_rows(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len() as f64;
    let t = rows[0].len();
    let means: Vec<f64> = (0..t)
        .map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / n)
        .collect();
    rows.iter()
        .map(|r| r.iter().zip(&means).map(|(v, m)| v - m).collect())
        .collect()
}

pub(crate) fn cross_section_mean(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len() as f64;
    (0..rows[0].len())
        .map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / n)
        .collect()
}

impl Panel {
    /// Balanced panel with the units and axis of `like` and new values.
    pub fn from_rows_on_axis(like: &Panel, rows: Vec<Vec<f64>>) -> Result<Panel> {
        require_balanced(like)?;
        Panel::new(
            like.units().to_vec(),
            like.time_axis().to_vec(),
            rows.into_iter()
                .map(|r| r.into_iter().map(Some).collect())
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn random_walk(n: usize, seed: u64) -> Vec<f64> {
        normals(n, seed)
            .into_iter()
            .scan(0.0, |s, e| {
                *s += e;
                Some(*s)
            })
            .collect()
    }

    fn ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
        normals(n, seed)
            .into_iter()
            .scan(0.0, |s, e| {
                *s = phi * *s + e;
                Some(*s)
            })
            .collect()
    }

    #[test]
    fn residuals_sum_to_zero_with_constant() {
        let y = random_walk(120, 1);
        let fit = adf_fit(&y, &AdfSpec::default()).unwrap();
        let scale: f64 = fit.residuals.iter().map(|e| e.abs()).sum();
        assert!(fit.residuals.iter().sum::<f64>().abs() < 1e-8 * scale);
        assert_eq!(fit.residuals.len(), fit.n_obs);
        assert_eq!(fit.n_obs, 120 - fit.start);
        assert_eq!(fit.start, fit.selected_lag + 1);
    }

    #[test]
    fn scale_invariance() {
        let y = random_walk(150, 2);
        let scaled: Vec<f64> = y.iter().map(|v| 37.5 * v).collect();
        let a = adf_fit(&y, &AdfSpec::default()).unwrap();
        let b = adf_fit(&scaled, &AdfSpec::default()).unwrap();
        assert_eq!(a.selected_lag, b.selected_lag);
        assert_abs_diff_eq!(a.t_stat, b.t_stat, epsilon = 1e-10);
    }

    #[test]
    fn t_stat_recomputed_from_residuals() {
        let y = ar1(100, 0.7, 3);
        let spec = AdfSpec::fixed(Deterministics::Constant, 2);
        let fit = adf_fit(&y, &spec).unwrap();
        // rebuild the design and recompute the standard error from residuals
        let terms = [
            Term::Const,
            Term::Level(&y, 1),
            Term::Diff(&y, 1),
            Term::Diff(&y, 2),
        ];
        let x = design(&terms, fit.start, y.len());
        let s2 = fit.residuals.iter().map(|e| e * e).sum::<f64>() / (fit.n_obs - 4) as f64;
        let xtx_inv = (x.transpose() * &x).try_inverse().unwrap();
        let se = (s2 * xtx_inv[(1, 1)]).sqrt();
        assert_abs_diff_eq!(fit.rho_hat / se, fit.t_stat, epsilon = 1e-10);
    }

    #[test]
    fn constant_series_is_degenerate() {
        assert!(matches!(
            adf_fit(&[3.0; 40], &AdfSpec::default()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn short_series_rejected() {
        assert!(adf_fit(&random_walk(14, 1), &AdfSpec::default()).is_err());
    }

    #[test]
    fn aic_selection_is_reproducible() {
        let y = ar1(200, 0.9, 4);
        let a = adf_fit(&y, &AdfSpec::default()).unwrap();
        let b = adf_fit(&y, &AdfSpec::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn aic_picks_up_serial_correlation() {
        // differences follow AR(2): lag selection should go past zero
        let e = normals(400, 5);
        let mut d = vec![0.0; 400];
        for t in 2..400 {
            d[t] = 0.6 * d[t - 1] - 0.3 * d[t - 2] + e[t];
        }
        let y: Vec<f64> = d
            .iter()
            .scan(0.0, |s, v| {
                *s += v;
                Some(*s)
            })
            .collect();
        assert!(adf_fit(&y, &AdfSpec::default()).unwrap().selected_lag >= 2);
    }

    #[test]
    fn gls_detrend_zero_and_shift() {
        assert!(gls_detrend(&[0.0; 10], ERS_C_BAR)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        let y = random_walk(50, 6);
        let shifted: Vec<f64> = y.iter().map(|v| v + 12.0).collect();
        let a = gls_detrend(&y, ERS_C_BAR).unwrap();
        let b = gls_detrend(&shifted, ERS_C_BAR).unwrap();
        for (x, z) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, z, epsilon = 1e-10);
        }
    }

    #[test]
    fn gls_detrend_at_zero_quasi_difference_is_demeaning() {
        let y = random_walk(30, 7);
        let out = gls_detrend(&y, -(y.len() as f64)).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        for (o, v) in out.iter().zip(&y) {
            assert_abs_diff_eq!(*o, v - mean, epsilon = 1e-12);
        }
    }

    #[test]
    fn gls_detrend_matches_direct_quasi_difference_regression() {
        let y = random_walk(40, 8);
        let n = y.len();
        let a = 1.0 + ERS_C_BAR / n as f64;
        let mut yq = vec![y[0]];
        let mut zq = vec![1.0];
        for t in 1..n {
            yq.push(y[t] - a * y[t - 1]);
            zq.push(1.0 - a);
        }
        let x = nalgebra::DMatrix::from_column_slice(n, 1, &zq);
        let beta = ols(&yq, &x).unwrap().coefficients[0];
        let out = gls_detrend(&y, ERS_C_BAR).unwrap();
        assert_abs_diff_eq!(out[5], y[5] - beta, epsilon = 1e-10);
    }

    #[test]
    fn demeaning_two_units() {
        let a = vec![1.0, 4.0, -2.0];
        let b = vec![3.0, 0.0, 5.0];
        let p = Panel::from_unnamed_rows(vec![a.clone(), b.clone()]).unwrap();
        let d = demean_cross_section(&p).unwrap().balanced_rows().unwrap();
        for t in 0..3 {
            assert_abs_diff_eq!(d[0][t], (a[t] - b[t]) / 2.0, epsilon = 1e-15);
            assert_abs_diff_eq!(d[1][t], -(a[t] - b[t]) / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn demeaning_identical_units_gives_zero() {
        let r = random_walk(20, 9);
        let p = Panel::from_unnamed_rows(vec![r.clone(), r.clone(), r]).unwrap();
        let d = demean_cross_section(&p).unwrap().balanced_rows().unwrap();
        assert!(d.iter().flatten().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn demeaning_requires_balance() {
        let p = Panel::new(
            vec!["A".into(), "B".into()],
            crate::data::MonthIndex::range_inclusive(
                crate::data::MonthIndex::new(2000, 1).unwrap(),
                crate::data::MonthIndex::new(2000, 2).unwrap(),
            ),
            vec![vec![Some(1.0), None], vec![Some(1.0), Some(2.0)]],
        )
        .unwrap();
        assert!(matches!(
            demean_cross_section(&p),
            Err(Error::BalanceRequired { .. })
        ));
    }

    #[test]
    fn pesaran_unit_collinear_when_mean_is_self() {
        let y = random_walk(80, 10);
        assert!(matches!(
            pesaran_cadf_unit(&y, &y, &AdfSpec::default()),
            Err(Error::Singular)
        ));
    }

    #[test]
    fn pesaran_unit_joint_scale_invariance() {
        let y = random_walk(120, 11);
        let other = random_walk(120, 12);
        let ybar: Vec<f64> = y.iter().zip(&other).map(|(a, b)| (a + b) / 2.0).collect();
        let a = pesaran_cadf_unit(&y, &ybar, &AdfSpec::default()).unwrap();
        let ys: Vec<f64> = y.iter().map(|v| 4.0 * v).collect();
        let yb: Vec<f64> = ybar.iter().map(|v| 4.0 * v).collect();
        let b = pesaran_cadf_unit(&ys, &yb, &AdfSpec::default()).unwrap();
        assert_abs_diff_eq!(a.t_stat, b.t_stat, epsilon = 1e-10);
    }

    #[test]
    fn cadf_scale_invariance_in_covariate() {
        let y = random_walk(150, 13);
        let x = normals(149, 14);
        let xs: Vec<f64> = x.iter().map(|v| 0.01 * v).collect();
        let spec = AdfSpec::default();
        let lags = LagSelection::Aic { max_lag: 5 };
        let a = cadf_fit(&y, &x, &spec, lags, &LrvSpec::default()).unwrap();
        let b = cadf_fit(&y, &xs, &spec, lags, &LrvSpec::default()).unwrap();
        assert_abs_diff_eq!(a.t_stat(), b.t_stat(), epsilon = 1e-9);
        assert_abs_diff_eq!(a.rho2_hat, b.rho2_hat, epsilon = 1e-9);
    }

    #[test]
    fn cadf_rejects_constant_covariate() {
        let y = random_walk(60, 15);
        let err = cadf_fit(
            &y,
            &[2.0; 59],
            &AdfSpec::default(),
            LagSelection::Fixed(0),
            &LrvSpec::default(),
        );
        assert!(matches!(err, Err(Error::DegenerateCovariate)));
    }

    #[test]
    fn cadf_rho2_near_one_for_irrelevant_covariate() {
        let y = random_walk(2000, 16);
        let x = normals(1999, 17);
        let fit = cadf_fit(
            &y,
            &x,
            &AdfSpec::fixed(Deterministics::Constant, 0),
            LagSelection::Fixed(0),
            &LrvSpec::default(),
        )
        .unwrap();
        assert!(fit.rho2_hat > 0.95, "{}", fit.rho2_hat);
    }

    #[test]
    fn cadf_rho2_near_zero_when_covariate_is_the_innovation() {
        let eps = normals(2000, 18);
        let noise = normals(2000, 19);
        let y: Vec<f64> = eps
            .iter()
            .scan(0.0, |s, e| {
                *s += e;
                Some(*s)
            })
            .collect();
        let x: Vec<f64> = (1..2000).map(|t| eps[t] + 0.1 * noise[t]).collect();
        let fit = cadf_fit(
            &y,
            &x,
            &AdfSpec::fixed(Deterministics::Constant, 0),
            LagSelection::Fixed(0),
            &LrvSpec::default(),
        )
        .unwrap();
        assert!(fit.rho2_hat < 0.05, "{}", fit.rho2_hat);
    }

    #[test]
    fn cadf_zero_cross_section_mean_is_degenerate() {
        let e = normals(80, 21);
        let y: Vec<f64> = e
            .iter()
            .scan(0.0, |a, v| {
                *a += v;
                Some(*a)
            })
            .collect();
        let ybar: Vec<f64> = y.iter().map(|v| v * 1e-17).collect();
        let spec = AdfSpec::fixed(Deterministics::Constant, 1);
        assert!(matches!(
            pesaran_cadf_unit(&y, &ybar, &spec),
            Err(Error::DegenerateCovariate)
        ));
    }

    #[test]
    fn covariate_equal_to_own_difference_is_an_exact_fit() {
        let e = normals(80, 22);
        let y: Vec<f64> = e
            .iter()
            .scan(0.0, |a, v| {
                *a += v;
                Some(*a)
            })
            .collect();
        let x: Vec<f64> = (1..80).map(|t| -(y[t] - y[t - 1]) / 3.0).collect();
        let err = cadf_fit(
            &y,
            &x,
            &AdfSpec::fixed(Deterministics::Constant, 0),
            LagSelection::Fixed(0),
            &LrvSpec::default(),
        );
        assert!(matches!(err, Err(Error::Degenerate(_))), "{err:?}");
    }
}
