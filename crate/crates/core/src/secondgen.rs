//! Panel unit root tests robust to cross-section dependence: Moon-Perron
//! de-factored tests, Pesaran's CIPS and Choi's demeaned/detrended
//! combination tests.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::adf::cross_section_mean;
use crate::adf::{
    demean_rows, gls_detrend, pesaran_cadf_unit, AdfFit, AdfSpec, Deterministics, ERS_C_BAR,
};
use crate::data::{require_balanced, Panel};
use crate::dist::{embedded, pvalue_from_table, TableStore};
use crate::error::{Error, Result};
use crate::factors::{extract_factors, FactorModel};
use crate::firstgen::{adf_on_rows, UnitAdf};
use crate::lrv::{lrv_parts, LrvSpec};
use crate::result::{Tail, TestResult, UnitDiagnostic};
use crate::stats::{norm_cdf, norm_sf, probit};

fn balanced_rows(panel: &Panel) -> Result<Vec<Vec<f64>>> {
    if panel.n_units() < 2 {
        return Err(Error::InvalidInput(format!(
            "panel tests need at least two units, got {}",
            panel.n_units()
        )));
    }
    require_balanced(panel)?.balanced_rows()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoonPerron {
    pub t_a: TestResult,
    pub t_b: TestResult,
    pub model: FactorModel,
    pub rho_pool: f64,
    pub rho_plus: f64,
}

fn frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Moon-Perron `t_a*` and `t_b*` with `k` principal-component factors taken
/// from the residuals of the pooled autoregression.
pub fn moon_perron_test(panel: &Panel, k: usize, lrv: &LrvSpec) -> Result<MoonPerron> {
    let rows = balanced_rows(panel)?;
    let n = rows.len();
    let t = rows[0].len();
    if t < 6 {
        return Err(Error::InvalidInput("too few periods".into()));
    }
    let tp = t - 1;
    let y = DMatrix::from_fn(n, tp, |i, s| rows[i][s + 1]);
    let y_lag = DMatrix::from_fn(n, tp, |i, s| rows[i][s]);
    let lag_ss = frobenius(&y_lag, &y_lag);
    if !(lag_ss > 0.0) {
        return Err(Error::Degenerate("panel is identically zero".into()));
    }
    let rho_pool = frobenius(&y_lag, &y) / lag_ss;
    let resid = &y - &y_lag * rho_pool;
    let model = extract_factors(&resid, k)?;

    let mut omega2 = 0.0;
    let mut phi4 = 0.0;
    let mut lambda = 0.0;
    for i in 0..n {
        let row: Vec<f64> = model.defactored.row(i).iter().copied().collect();
        let parts = lrv_parts(&row, lrv)?;
        omega2 += parts.long_run;
        phi4 += parts.long_run * parts.long_run;
        lambda += parts.one_sided;
    }
    let nf = n as f64;
    let (omega2, phi4, lambda) = (omega2 / nf, phi4 / nf, lambda / nf);
    if !(omega2 > 0.0 && phi4 > 0.0) {
        return Err(Error::Degenerate(
            "de-factored residuals have no long-run variance".into(),
        ));
    }

    let q_lag = model.project_out(&y_lag);
    let denom = frobenius(&y_lag, &q_lag);
    let num = frobenius(&q_lag, &y) - nf * tp as f64 * lambda;
    let rho_plus = num / denom;
    let tpf = tp as f64;
    let scaled = tpf * nf.sqrt() * (rho_plus - 1.0);
    let t_a = scaled / (2.0 * phi4 / (omega2 * omega2)).sqrt();
    let t_b = scaled * (denom / (nf * tpf * tpf)).sqrt() * (omega2 / phi4).sqrt();
    let mk = |name: &str, s: f64| {
        TestResult::new(
            name,
            s,
            Some(norm_cdf(s)),
            embedded::NORMAL_LOWER,
            Tail::Left,
        )
    };
    Ok(MoonPerron {
        t_a: mk("MP t_a*", t_a),
        t_b: mk("MP t_b*", t_b),
        model,
        rho_pool,
        rho_plus,
    })
}

/// Cross-section augmented ADF fits for every unit against the panel mean.
pub fn cadf_units(panel: &Panel, spec: &AdfSpec) -> Result<Vec<AdfFit>> {
    let rows = balanced_rows(panel)?;
    let ybar = cross_section_mean(&rows);
    rows.par_iter()
        .zip(panel.units().par_iter())
        .map(|(y, u)| pesaran_cadf_unit(y, &ybar, spec).map_err(|e| e.in_unit(u)))
        .collect()
}

/// CIPS: the mean of the units' CADF t-ratios.
pub fn cips_test(panel: &Panel, spec: &AdfSpec, store: &TableStore) -> Result<TestResult> {
    let fits = cadf_units(panel, spec)?;
    let n = fits.len();
    let stat = fits.iter().map(|f| f.t_stat).sum::<f64>() / n as f64;
    let (cv, table) = store.cips(n, panel.n_periods(), 0)?;
    let p = table.map(|t| pvalue_from_table(stat, &t[0]));
    let diags = panel
        .units()
        .iter()
        .zip(&fits)
        .map(|(u, f)| UnitDiagnostic {
            unit: u.clone(),
            t_stat: f.t_stat,
            lag: f.selected_lag,
            p_value: None,
            rho2: None,
        })
        .collect();
    Ok(TestResult::new("CIPS", stat, p, cv, Tail::Left).with_units(diags))
}

/// The three combination statistics on demeaned, GLS-detrended data.
#[derive(Debug, Clone, PartialEq)]
pub struct Choi2006 {
    pub pm: TestResult,
    pub z: TestResult,
    pub l_star: TestResult,
}

pub fn choi2006_from_pvalues(p: &[f64]) -> Choi2006 {
    let n = p.len() as f64;
    let pm = -p.iter().map(|x| x.ln() + 1.0).sum::<f64>() / n.sqrt();
    let z = p.iter().map(|&x| probit(x)).sum::<f64>() / n.sqrt();
    let l = p.iter().map(|x| (x / (1.0 - x)).ln()).sum::<f64>()
        / (std::f64::consts::PI.powi(2) * n / 3.0).sqrt();
    Choi2006 {
        pm: TestResult::new(
            "Choi Pm",
            pm,
            Some(norm_sf(pm)),
            embedded::NORMAL_UPPER,
            Tail::Right,
        ),
        z: TestResult::new(
            "Choi Z",
            z,
            Some(norm_cdf(z)),
            embedded::NORMAL_LOWER,
            Tail::Left,
        ),
        l_star: TestResult::new(
            "Choi L*",
            l,
            Some(norm_cdf(l)),
            embedded::NORMAL_LOWER,
            Tail::Left,
        ),
    }
}

/// Cross-section demeaned, then GLS-detrended unit series.
pub fn choi_transform(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    demean_rows(rows)
        .iter()
        .map(|r| gls_detrend(r, ERS_C_BAR))
        .collect()
}

pub fn choi2006_tests(panel: &Panel, spec: &AdfSpec, store: &TableStore) -> Result<Choi2006> {
    let rows = balanced_rows(panel)?;
    let transformed = choi_transform(&rows)?;
    let spec = spec.with_deterministics(Deterministics::None);
    let units = adf_on_rows(panel.units(), &transformed, &spec, store)?;
    let p: Vec<f64> = units.iter().map(|u| u.p_value).collect();
    let diags: Vec<UnitDiagnostic> = units.iter().map(UnitAdf::diagnostic).collect();
    let mut out = choi2006_from_pvalues(&p);
    out.pm.per_unit = diags.clone();
    out.z.per_unit = diags.clone();
    out.l_star.per_unit = diags;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn choi_half_pvalues() {
        let c = choi2006_from_pvalues(&[0.5; 10]);
        assert!(c.z.statistic.abs() < 1e-15);
        assert!(c.l_star.statistic.abs() < 1e-15);
        let exact = -(10f64).sqrt() * (1.0 + 0.5f64.ln());
        assert!((c.pm.statistic - exact).abs() < 1e-12);
        assert!((c.pm.statistic + 0.9706).abs() < 1e-3);
    }

    #[test]
    fn choi_transform_zero_cross_mean() {
        let rows = vec![
            vec![1.0, 2.0, 4.0, 3.0, 5.0],
            vec![0.0, -1.0, 2.0, 2.5, 1.0],
            vec![3.0, 3.5, 2.0, 1.0, 0.0],
        ];
        let out = choi_transform(&rows).unwrap();
        for t in 0..5 {
            let m: f64 = out.iter().map(|r| r[t]).sum::<f64>();
            assert!(m.abs() < 1e-10);
        }
    }
}
