//! P-value combination and intersection tests, the cross-section dependence
//! pre-test, and the ADF/CADF-based test families built on them.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adf::{cadf_fit, AdfSpec, Deterministics, LagSelection};
use crate::data::{require_balanced, Panel};
use crate::dist::{embedded, TableStore, P_CEIL, P_FLOOR};
use crate::error::{Error, Result};
use crate::factors::extract_factors;
use crate::firstgen::{unit_adf, unit_span, UnitAdf};
use crate::lrv::LrvSpec;
use crate::result::{
    CombinationBranch, CombinationInfo, Decision, Tail, TestResult, UnitDiagnostic, LEVELS,
};
use crate::stats::{norm_cdf, norm_sf, probit};

/// Probits of clamped p-values.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbitVector {
    pub pvalues: Vec<f64>,
    pub probits: Vec<f64>,
}

impl ProbitVector {
    pub fn new(pvalues: &[f64]) -> Self {
        let pvalues: Vec<f64> = pvalues.iter().map(|p| p.clamp(P_FLOOR, P_CEIL)).collect();
        let probits = pvalues.iter().map(|&p| probit(p)).collect();
        Self { pvalues, probits }
    }

    pub fn len(&self) -> usize {
        self.probits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probits.is_empty()
    }

    fn sum(&self) -> f64 {
        self.probits.iter().sum()
    }
}

fn normal_left(name: &str, stat: f64) -> TestResult {
    TestResult::new(
        name,
        stat,
        Some(norm_cdf(stat)),
        embedded::NORMAL_LOWER,
        Tail::Left,
    )
}

/// Inverse normal combination `sum probit(p_i) / sqrt(N)`.
pub fn choi_inverse_normal(pvals: &[f64]) -> Result<TestResult> {
    if pvals.is_empty() {
        return Err(Error::InvalidInput("no p-values to combine".into()));
    }
    let pv = ProbitVector::new(pvals);
    Ok(normal_left(
        "Choi inverse normal",
        pv.sum() / (pv.len() as f64).sqrt(),
    ))
}

/// `theta_hat = 1 - sample variance of the probits`, and its floor at
/// `-1/(N-1)`.
pub fn hartung_rho_hat(probits: &ProbitVector) -> Result<(f64, f64)> {
    let n = probits.len();
    if n < 2 {
        return Err(Error::InvalidInput(
            "correlation estimate needs N >= 2".into(),
        ));
    }
    let mean = probits.sum() / n as f64;
    let ss: f64 = probits.probits.iter().map(|z| (z - mean).powi(2)).sum();
    let theta_hat = 1.0 - ss / (n - 1) as f64;
    Ok((theta_hat, theta_hat.max(-1.0 / (n - 1) as f64)))
}

/// Combination under a common correlation `theta` among the probits.
pub fn hartung_z(pvals: &[f64], theta: f64) -> Result<TestResult> {
    let pv = ProbitVector::new(pvals);
    let n = pv.len() as f64;
    let v = 1.0 + theta * (n - 1.0);
    if pv.is_empty() || !(v > 0.0) {
        return Err(Error::Domain(format!(
            "nonpositive variance term 1 + theta (N - 1) = {v}"
        )));
    }
    Ok(normal_left("Hartung", pv.sum() / (n * v).sqrt()))
}

/// Hartung's combination with the estimated correlation inflated by
/// `0.2 sqrt(2/(N+1)) (1 - theta*)`.
pub fn demetrescu_z(pvals: &[f64]) -> Result<TestResult> {
    let pv = ProbitVector::new(pvals);
    let (_, theta_star) = hartung_rho_hat(&pv)?;
    let n = pv.len() as f64;
    let theta = theta_star + 0.2 * (2.0 / (n + 1.0)).sqrt() * (1.0 - theta_star);
    let mut r = hartung_z(pvals, theta)?;
    r.test_name = "Demetrescu".into();
    Ok(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimesDecision {
    pub ordered: Vec<f64>,
    pub alpha: f64,
    pub reject: bool,
    /// First 1-based rank `i` with `N p_(i) / i <= alpha`.
    pub witness: Option<usize>,
}

impl SimesDecision {
    pub fn decision(&self) -> Decision {
        Decision::from_reject(self.reject)
    }
}

fn sorted(pvals: &[f64]) -> Vec<f64> {
    let mut p = pvals.to_vec();
    p.sort_by(f64::total_cmp);
    p
}

/// Simes-adjusted p-value `min_i N p_(i) / i`.
pub fn simes_pvalue(pvals: &[f64]) -> f64 {
    let p = sorted(pvals);
    let n = p.len() as f64;
    p.iter()
        .enumerate()
        .map(|(i, x)| n * x / (i + 1) as f64)
        .fold(f64::INFINITY, f64::min)
        .min(1.0)
}

/// Intersection test: reject if `p_(i) <= i alpha / N` for some `i`.
pub fn simes_test(pvals: &[f64], alpha_levels: &[f64]) -> Result<Vec<SimesDecision>> {
    if pvals.is_empty() {
        return Err(Error::InvalidInput("no p-values to test".into()));
    }
    let ordered = sorted(pvals);
    let n = ordered.len() as f64;
    Ok(alpha_levels
        .iter()
        .map(|&alpha| {
            let witness = ordered
                .iter()
                .enumerate()
                .position(|(i, x)| n * x / (i + 1) as f64 <= alpha)
                .map(|k| k + 1);
            SimesDecision {
                ordered: ordered.clone(),
                alpha,
                reject: witness.is_some(),
                witness,
            }
        })
        .collect())
}

/// Simes outcome as a test result: the statistic is the Simes p-value,
/// compared with the nominal levels themselves.
pub fn simes_result(name: &str, pvals: &[f64]) -> Result<TestResult> {
    let decisions = simes_test(pvals, &LEVELS)?;
    let stat = simes_pvalue(pvals);
    let mut r = TestResult::new(name, stat, Some(stat), LEVELS, Tail::Left);
    r.decisions = [0, 1, 2].map(|k| decisions[k].decision());
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdTest {
    pub cd_stat: f64,
    pub p_value: f64,
}

fn pair_corr(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (x - ma, y - mb);
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    if saa > 0.0 && sbb > 0.0 {
        sab / (saa * sbb).sqrt()
    } else {
        0.0
    }
}

/// Pesaran's CD statistic over residual series placed on a common time
/// index: `(start, values)` pairs. Each pair of units contributes
/// `sqrt(T_ij) r_ij` over its overlapping stretch.
pub fn pesaran_cd(residuals: &[(usize, Vec<f64>)]) -> Result<CdTest> {
    let n = residuals.len();
    if n < 2 {
        return Err(Error::InvalidInput("CD test needs N >= 2".into()));
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let (si, ei) = (residuals[i].0, residuals[i].0 + residuals[i].1.len());
            let (sj, ej) = (residuals[j].0, residuals[j].0 + residuals[j].1.len());
            let (lo, hi) = (si.max(sj), ei.min(ej));
            if hi < lo + 3 {
                return Err(Error::InvalidInput(format!(
                    "residual series {i} and {j} overlap in fewer than 3 periods"
                )));
            }
            let a = &residuals[i].1[lo - si..hi - si];
            let b = &residuals[j].1[lo - sj..hi - sj];
            total += ((hi - lo) as f64).sqrt() * pair_corr(a, b);
        }
    }
    let cd_stat = (2.0 / (n * (n - 1)) as f64).sqrt() * total;
    Ok(CdTest {
        cd_stat,
        p_value: (2.0 * norm_sf(cd_stat.abs())).min(1.0),
    })
}

/// CD test for a balanced residual panel (rows of equal length).
pub fn pesaran_cd_balanced(rows: &[Vec<f64>]) -> Result<CdTest> {
    if let Some(r) = rows.iter().find(|r| r.len() != rows[0].len()) {
        return Err(Error::InvalidInput(format!(
            "residual rows differ in length ({})",
            r.len()
        )));
    }
    pesaran_cd(&rows.iter().map(|r| (0, r.clone())).collect::<Vec<_>>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComboVariant {
    /// Plain ADF p-values.
    Adf,
    /// Covariate-augmented ADF with the mean of the other units' differences.
    Cadf,
    /// Covariate-augmented ADF with the first principal component of the
    /// differenced panel.
    CadfPc,
}

impl ComboVariant {
    pub fn suffix(self) -> &'static str {
        match self {
            ComboVariant::Adf => "ADF",
            ComboVariant::Cadf => "CADF",
            ComboVariant::CadfPc => "CADF_PC",
        }
    }
}

impl fmt::Display for ComboVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.suffix())
    }
}

impl FromStr for ComboVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adf" => Ok(ComboVariant::Adf),
            "cadf" => Ok(ComboVariant::Cadf),
            "cadf_pc" => Ok(ComboVariant::CadfPc),
            other => Err(Error::Config(format!(
                "unknown combination variant '{other}'"
            ))),
        }
    }
}

/// Constant-case ADF fits and the CD pre-test on their residuals; shared by
/// every variant.
#[derive(Debug, Clone)]
pub struct ComboContext {
    pub adf: Vec<UnitAdf>,
    pub cd: CdTest,
}

pub fn combo_context(panel: &Panel, spec: &AdfSpec, store: &TableStore) -> Result<ComboContext> {
    if panel.n_units() < 2 {
        return Err(Error::InvalidInput(format!(
            "panel tests need at least two units, got {}",
            panel.n_units()
        )));
    }
    let spec = spec.with_deterministics(Deterministics::Constant);
    let adf = unit_adf(panel, &spec, store)?;
    let residuals: Vec<(usize, Vec<f64>)> = adf
        .iter()
        .map(|u| (u.offset + u.fit.start, u.fit.residuals.clone()))
        .collect();
    let cd = pesaran_cd(&residuals)?;
    Ok(ComboContext { adf, cd })
}

/// One unit's covariate: the mean of the other units' first differences,
/// aligned with the unit's own differences.
fn others_mean_diff(panel: &Panel, i: usize, offset: usize, len: usize) -> Result<Vec<f64>> {
    let values = panel.values();
    (offset + 1..offset + len)
        .map(|k| {
            let (mut sum, mut count) = (0.0, 0usize);
            for (j, row) in values.iter().enumerate() {
                if j == i {
                    continue;
                }
                if let (Some(a), Some(b)) = (row[k], row[k - 1]) {
                    sum += a - b;
                    count += 1;
                }
            }
            if count == 0 {
                Err(Error::InvalidInput(format!(
                    "no other unit observed at {}",
                    panel.time_axis()[k]
                )))
            } else {
                Ok(sum / count as f64)
            }
        })
        .collect()
}

/// First principal component of the differenced panel, each unit's
/// differences standardized first.
pub fn differenced_pc(panel: &Panel) -> Result<Vec<f64>> {
    let rows = require_balanced(panel)?.balanced_rows()?;
    let n = rows.len();
    let t = rows[0].len() - 1;
    let mut d = DMatrix::zeros(n, t);
    for (i, r) in rows.iter().enumerate() {
        let dr: Vec<f64> = r.windows(2).map(|w| w[1] - w[0]).collect();
        let m = dr.iter().sum::<f64>() / t as f64;
        let sd = (dr.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (t as f64 - 1.0)).sqrt();
        if !(sd > 0.0) {
            return Err(Error::DegenerateCovariate.in_unit(&panel.units()[i]));
        }
        for (k, x) in dr.iter().enumerate() {
            d[(i, k)] = (x - m) / sd;
        }
    }
    let model = extract_factors(&d, 1)?;
    Ok(model.factors.column(0).iter().copied().collect())
}

/// Per-unit p-values for one variant with their diagnostics.
pub fn unit_pvalues(
    panel: &Panel,
    variant: ComboVariant,
    spec: &AdfSpec,
    lrv: &LrvSpec,
    store: &TableStore,
    ctx: &ComboContext,
) -> Result<Vec<UnitDiagnostic>> {
    if variant == ComboVariant::Adf {
        return Ok(ctx.adf.iter().map(UnitAdf::diagnostic).collect());
    }
    let spec = spec.with_deterministics(Deterministics::Constant);
    let cov_lags = LagSelection::Aic {
        max_lag: spec.max_lag(),
    };
    let shared = match variant {
        ComboVariant::CadfPc => Some(differenced_pc(panel)?),
        _ => None,
    };
    let spans: Vec<(usize, Vec<f64>)> = (0..panel.n_units())
        .map(|i| unit_span(panel, i))
        .collect::<Result<_>>()?;
    let covariates: Vec<Vec<f64>> = spans
        .iter()
        .enumerate()
        .map(|(i, (offset, y))| match &shared {
            Some(pc) => Ok(pc[*offset..*offset + y.len() - 1].to_vec()),
            None => others_mean_diff(panel, i, *offset, y.len())
                .map_err(|e| e.in_unit(&panel.units()[i])),
        })
        .collect::<Result<_>>()?;
    let fits = spans
        .par_iter()
        .zip(covariates.par_iter())
        .zip(panel.units().par_iter())
        .map(|(((_, y), x), u)| cadf_fit(y, x, &spec, cov_lags, lrv).map_err(|e| e.in_unit(u)))
        .collect::<Result<Vec<_>>>()?;
    let surface = store.hansen_surface(Deterministics::Constant)?;
    Ok(panel
        .units()
        .iter()
        .zip(fits)
        .map(|(u, f)| UnitDiagnostic {
            unit: u.clone(),
            t_stat: f.t_stat(),
            lag: f.adf.selected_lag,
            p_value: Some(surface.pvalue(f.t_stat(), f.rho2_hat)),
            rho2: Some(f.rho2_hat),
        })
        .collect())
}

/// Inverse-normal combination, corrected for cross-correlation when the CD
/// pre-test rejects at `threshold`.
pub fn combine_pvalues(
    name: &str,
    pvals: &[f64],
    cd: &CdTest,
    threshold: f64,
) -> Result<TestResult> {
    let branch = if threshold >= 1.0 || cd.p_value < threshold {
        CombinationBranch::Hartung
    } else {
        CombinationBranch::Choi
    };
    let mut r = match branch {
        CombinationBranch::Hartung => demetrescu_z(pvals)?,
        CombinationBranch::Choi => choi_inverse_normal(pvals)?,
    };
    r.test_name = name.to_string();
    r.combination = Some(CombinationInfo {
        branch,
        cd_stat: cd.cd_stat,
        cd_p_value: cd.p_value,
        threshold,
    });
    Ok(r)
}

fn pvals_of(units: &[UnitDiagnostic]) -> Vec<f64> {
    units
        .iter()
        .map(|u| u.p_value.expect("unit p-value"))
        .collect()
}

/// `pADF`, `pCADF` or `pCADF_PC` from a prepared context.
pub fn pcadf_from(
    variant: ComboVariant,
    units: Vec<UnitDiagnostic>,
    ctx: &ComboContext,
    cd_threshold: f64,
) -> Result<TestResult> {
    let name = format!("p{}", variant.suffix());
    Ok(combine_pvalues(&name, &pvals_of(&units), &ctx.cd, cd_threshold)?.with_units(units))
}

/// `sADF`, `sCADF` or `sCADF_PC` from a prepared context.
pub fn scadf_from(variant: ComboVariant, units: Vec<UnitDiagnostic>) -> Result<TestResult> {
    let name = format!("s{}", variant.suffix());
    Ok(simes_result(&name, &pvals_of(&units))?.with_units(units))
}

pub fn pcadf_family(
    panel: &Panel,
    variant: ComboVariant,
    spec: &AdfSpec,
    lrv: &LrvSpec,
    cd_threshold: f64,
    store: &TableStore,
) -> Result<TestResult> {
    if variant == ComboVariant::CadfPc {
        require_balanced(panel)?;
    }
    let ctx = combo_context(panel, spec, store)?;
    let units = unit_pvalues(panel, variant, spec, lrv, store, &ctx)?;
    pcadf_from(variant, units, &ctx, cd_threshold)
}

pub fn scadf_family(
    panel: &Panel,
    variant: ComboVariant,
    spec: &AdfSpec,
    lrv: &LrvSpec,
    store: &TableStore,
) -> Result<TestResult> {
    if variant == ComboVariant::CadfPc {
        require_balanced(panel)?;
    }
    let ctx = combo_context(panel, spec, store)?;
    let units = unit_pvalues(panel, variant, spec, lrv, store, &ctx)?;
    scadf_from(variant, units)
}
