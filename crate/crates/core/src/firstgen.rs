//! Panel unit root tests that assume independent units: Fisher-type p-value
//! combinations (MW, Choi Z), pooled LLC and the IPS t-bar.

use rayon::prelude::*;

use crate::adf::{adf_fit, AdfFit, AdfSpec, Deterministics};
use crate::data::{require_balanced, Panel};
use crate::dist::{embedded, TableStore};
use crate::error::{Error, Result};
use crate::lrv::{long_run_variance, LrvSpec};
use crate::regression::{design, diffs, ols, Term};
use crate::result::{Tail, TestResult, UnitDiagnostic};
use crate::stats::{chi2_ppf, chi2_sf, norm_cdf, norm_sf};

/// Observed stretch of one unit; interior gaps are an error.
pub fn unit_series(panel: &Panel, i: usize) -> Result<Vec<f64>> {
    Ok(unit_span(panel, i)?.1)
}

/// Like [`unit_series`], also returning the index of the first observed
/// period on the panel's time axis.
pub fn unit_span(panel: &Panel, i: usize) -> Result<(usize, Vec<f64>)> {
    let row = &panel.values()[i];
    let first = row.iter().position(Option::is_some);
    let last = row.iter().rposition(Option::is_some);
    let (Some(a), Some(b)) = (first, last) else {
        return Err(Error::EmptyWindow {
            unit: panel.units()[i].clone(),
        });
    };
    let values = row[a..=b]
        .iter()
        .enumerate()
        .map(|(k, v)| {
            v.ok_or_else(|| Error::MissingCell {
                unit: panel.units()[i].clone(),
                date: panel.time_axis()[a + k],
            })
        })
        .collect::<Result<_>>()?;
    Ok((a, values))
}

fn check_units(panel: &Panel) -> Result<()> {
    if panel.n_units() < 2 {
        return Err(Error::InvalidInput(format!(
            "panel tests need at least two units, got {}",
            panel.n_units()
        )));
    }
    Ok(())
}

/// One unit's ADF regression and its left-tail p-value.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitAdf {
    pub unit: String,
    pub fit: AdfFit,
    /// Position of the series' first observation on the panel time axis.
    pub offset: usize,
    /// Length of the series the fit used; keys the null table.
    pub t: usize,
    pub p_value: f64,
}

impl UnitAdf {
    pub fn diagnostic(&self) -> UnitDiagnostic {
        UnitDiagnostic {
            unit: self.unit.clone(),
            t_stat: self.fit.t_stat,
            lag: self.fit.selected_lag,
            p_value: Some(self.p_value),
            rho2: None,
        }
    }
}

/// ADF fits for every unit (concurrently) and their table p-values.
pub fn unit_adf(panel: &Panel, spec: &AdfSpec, store: &TableStore) -> Result<Vec<UnitAdf>> {
    let spans: Vec<(usize, Vec<f64>)> = (0..panel.n_units())
        .map(|i| unit_span(panel, i))
        .collect::<Result<_>>()?;
    let series: Vec<Vec<f64>> = spans.iter().map(|s| s.1.clone()).collect();
    let mut units = adf_on_rows(panel.units(), &series, spec, store)?;
    for (u, s) in units.iter_mut().zip(&spans) {
        u.offset = s.0;
    }
    Ok(units)
}

pub(crate) fn adf_on_rows(
    units: &[String],
    rows: &[Vec<f64>],
    spec: &AdfSpec,
    store: &TableStore,
) -> Result<Vec<UnitAdf>> {
    let fits: Vec<AdfFit> = rows
        .par_iter()
        .zip(units.par_iter())
        .map(|(y, u)| adf_fit(y, spec).map_err(|e| e.in_unit(u)))
        .collect::<Result<_>>()?;
    units
        .iter()
        .zip(rows)
        .zip(fits)
        .map(|((u, y), fit)| {
            let p_value = store
                .df_pvalue(spec.deterministics, y.len(), fit.selected_lag, fit.t_stat)
                .map_err(|e| e.in_unit(u))?;
            Ok(UnitAdf {
                unit: u.clone(),
                fit,
                offset: 0,
                t: y.len(),
                p_value,
            })
        })
        .collect()
}

/// Fisher statistic `-2 sum ln p_i` against chi-square with `2N` degrees of
/// freedom.
pub fn mw_from_pvalues(p: &[f64]) -> TestResult {
    let n = p.len();
    let stat = -2.0 * p.iter().map(|x| x.ln()).sum::<f64>();
    let df = 2.0 * n as f64;
    let cv = if n == 10 {
        embedded::CHI2_20_UPPER
    } else {
        [0.99, 0.95, 0.90].map(|q| chi2_ppf(q, df))
    };
    TestResult::new("MW", stat, Some(chi2_sf(stat, df)), cv, Tail::Right)
}

/// `sqrt(N) (P/N - 2) / 2`, the standardized Fisher statistic.
pub fn choi_z_from_pvalues(p: &[f64]) -> TestResult {
    let n = p.len() as f64;
    let fisher = -2.0 * p.iter().map(|x| x.ln()).sum::<f64>();
    let stat = n.sqrt() * (fisher / n - 2.0) / 2.0;
    TestResult::new(
        "Choi",
        stat,
        Some(norm_sf(stat)),
        embedded::NORMAL_UPPER,
        Tail::Right,
    )
}

pub fn mw_test(panel: &Panel, spec: &AdfSpec, store: &TableStore) -> Result<TestResult> {
    check_units(panel)?;
    let units = unit_adf(panel, spec, store)?;
    let p: Vec<f64> = units.iter().map(|u| u.p_value).collect();
    Ok(mw_from_pvalues(&p).with_units(units.iter().map(UnitAdf::diagnostic).collect()))
}

pub fn choi_z_test(panel: &Panel, spec: &AdfSpec, store: &TableStore) -> Result<TestResult> {
    check_units(panel)?;
    let units = unit_adf(panel, spec, store)?;
    let p: Vec<f64> = units.iter().map(|u| u.p_value).collect();
    Ok(choi_z_from_pvalues(&p).with_units(units.iter().map(UnitAdf::diagnostic).collect()))
}

/// Per-unit pieces of the LLC construction, already scaled by the unit's
/// regression standard error.
#[derive(Debug, Clone)]
pub(crate) struct LlcUnit {
    /// Orthogonalized first differences.
    pub e: Vec<f64>,
    /// Orthogonalized lagged levels.
    pub v: Vec<f64>,
    /// Long-run to short-run standard deviation ratio.
    pub s: f64,
    pub lag: usize,
}

pub(crate) fn llc_unit(y: &[f64], spec: &AdfSpec, lrv: &LrvSpec) -> Result<LlcUnit> {
    let spec = spec.with_deterministics(Deterministics::None);
    let p = adf_fit(y, &spec)?.selected_lag;
    let n = y.len();
    let start = p + 1;
    let dy = diffs(y, start, n);
    let lagged: Vec<f64> = (start..n).map(|t| y[t - 1]).collect();
    let (e, v) = if p == 0 {
        (dy, lagged)
    } else {
        let terms: Vec<Term> = (1..=p).map(|l| Term::Diff(y, l)).collect();
        let x = design(&terms, start, n);
        (ols(&dy, &x)?.residuals, ols(&lagged, &x)?.residuals)
    };
    let sv: f64 = v.iter().map(|a| a * a).sum();
    if sv <= 0.0 {
        return Err(Error::Degenerate("lagged level has no variation".into()));
    }
    let delta = e.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / sv;
    let dof = e.len() as f64 - p as f64 - 1.0;
    let sigma2 = e
        .iter()
        .zip(&v)
        .map(|(a, b)| (a - delta * b).powi(2))
        .sum::<f64>()
        / dof;
    if !(sigma2 > 0.0) {
        return Err(Error::Degenerate("zero residual variance".into()));
    }
    let sigma = sigma2.sqrt();
    let s = long_run_variance(&diffs(y, 1, n), lrv)?.sqrt() / sigma;
    Ok(LlcUnit {
        e: e.into_iter().map(|x| x / sigma).collect(),
        v: v.into_iter().map(|x| x / sigma).collect(),
        s,
        lag: p,
    })
}

/// Levin-Lin-Chu adjusted pooled t-statistic, no deterministic terms. Lag
/// orders come from `spec` (its deterministic setting is ignored).
pub fn llc_test(
    panel: &Panel,
    spec: &AdfSpec,
    lrv: &LrvSpec,
    store: &TableStore,
) -> Result<TestResult> {
    check_units(panel)?;
    let rows = require_balanced(panel)?.balanced_rows()?;
    let units: Vec<LlcUnit> = rows
        .par_iter()
        .zip(panel.units().par_iter())
        .map(|(y, u)| llc_unit(y, spec, lrv).map_err(|e| e.in_unit(u)))
        .collect::<Result<_>>()?;
    let n = units.len() as f64;
    let t = panel.n_periods();
    let p_bar = units.iter().map(|u| u.lag as f64).sum::<f64>() / n;
    let t_tilde = t as f64 - p_bar - 1.0;

    let num: f64 = units
        .iter()
        .flat_map(|u| u.e.iter().zip(&u.v))
        .map(|(e, v)| e * v)
        .sum();
    let den: f64 = units.iter().flat_map(|u| &u.v).map(|v| v * v).sum();
    let delta = num / den;
    let rss: f64 = units
        .iter()
        .flat_map(|u| u.e.iter().zip(&u.v))
        .map(|(e, v)| (e - delta * v).powi(2))
        .sum();
    let sigma2 = rss / (n * t_tilde);
    let std = sigma2.sqrt() / den.sqrt();
    let t_delta = delta / std;
    let s_n = units.iter().map(|u| u.s).sum::<f64>() / n;
    let adj = store.llc_adjustments(t)?;
    let stat = (t_delta - n * t_tilde * s_n / sigma2 * std * adj.mu_star) / adj.sigma_star;

    let diags = panel
        .units()
        .iter()
        .zip(&units)
        .map(|(name, u)| UnitDiagnostic {
            unit: name.clone(),
            t_stat: f64::NAN,
            lag: u.lag,
            p_value: None,
            rho2: None,
        })
        .collect();
    Ok(TestResult::new(
        "LLC",
        stat,
        Some(norm_cdf(stat)),
        embedded::NORMAL_LOWER,
        Tail::Left,
    )
    .with_units(diags))
}

/// IPS standardized t-bar from already fitted units.
pub fn ips_from_units(units: &[UnitAdf], store: &TableStore) -> Result<TestResult> {
    let n = units.len() as f64;
    let t_bar = units.iter().map(|u| u.fit.t_stat).sum::<f64>() / n;
    let (mut e, mut v) = (0.0, 0.0);
    for u in units {
        let m = store.ips_moments(u.t, u.fit.selected_lag)?;
        e += m.mean;
        v += m.var;
    }
    let (e, v) = (e / n, v / n);
    let stat = n.sqrt() * (t_bar - e) / v.sqrt();
    Ok(TestResult::new(
        "IPS",
        stat,
        Some(norm_cdf(stat)),
        embedded::NORMAL_LOWER,
        Tail::Left,
    )
    .with_units(units.iter().map(UnitAdf::diagnostic).collect()))
}

pub fn ips_test(panel: &Panel, spec: &AdfSpec, store: &TableStore) -> Result<TestResult> {
    check_units(panel)?;
    require_balanced(panel)?;
    let spec = spec.with_deterministics(Deterministics::Constant);
    ips_from_units(&unit_adf(panel, &spec, store)?, store)
}
