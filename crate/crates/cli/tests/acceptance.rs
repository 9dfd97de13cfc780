//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.
//!
//! Criterion 7, reproduction of the published tables from the original
//! macro dataset, needs data that is not distributed with this repository.
//! It is not run here; see the README for how to check it by hand.

use std::process::ExitCode;
use std::time::Instant;

use panelur::combo::{
    choi_inverse_normal, demetrescu_z, hartung_rho_hat, hartung_z, simes_test, ProbitVector,
};
use panelur::data::Panel;
use panelur::dist::embedded::{CHI2_20_UPPER, CIPS_N10, NORMAL_LOWER, NORMAL_UPPER};
use panelur::dist::{simulate_df_quantiles, simulate_hansen_surface, SimSettings, TableStore};
use panelur::firstgen::{choi_z_from_pvalues, mw_from_pvalues, unit_adf};
use panelur::report::{run_battery, BatteryOptions, TestName};
use panelur::rird::{build_rird, Benchmark, InflationMode, RirdOptions};
use panelur::secondgen::choi2006_from_pvalues;
use panelur::stats::{chi2_ppf, probit};
use panelur::synthetic::{generate, synthetic_macro, Dgp};
use panelur::{adf_fit, AdfSpec, Deterministics};

type Outcome = (bool, String);

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn constants() -> Outcome {
    let mut ok = NORMAL_UPPER == [2.3263, 1.6449, 1.2816]
        && NORMAL_LOWER == [-2.3263, -1.6449, -1.2816]
        && CHI2_20_UPPER == [37.566, 31.410, 28.412]
        && CIPS_N10 == [-2.5669, -2.3310, -2.2062];
    let mut worst: f64 = 0.0;
    for (k, level) in [0.01, 0.05, 0.10].into_iter().enumerate() {
        let chi = chi2_ppf(1.0 - level, 20.0);
        let z = probit(1.0 - level);
        worst = worst
            .max((chi - CHI2_20_UPPER[k]).abs())
            .max((z - NORMAL_UPPER[k]).abs());
        ok &= close(chi, CHI2_20_UPPER[k], 1e-3) && close(z, NORMAL_UPPER[k], 1e-3);
    }
    // The Fisher test must serve the published values at N = 10.
    ok &= mw_from_pvalues(&[0.5; 10]).critical_values == CHI2_20_UPPER;
    (ok, format!("largest recomputation gap {worst:.2e}"))
}

fn identities() -> Outcome {
    let p = [0.01, 0.2, 0.45, 0.03, 0.8, 0.6, 0.12, 0.33];
    let n = p.len() as f64;
    let mut ok = true;
    let mut notes = Vec::new();

    let h0 = hartung_z(&p, 0.0).unwrap().statistic;
    let inv = choi_inverse_normal(&p).unwrap().statistic;
    ok &= close(h0, inv, 1e-12);
    notes.push(format!("hartung(0) - inverse normal {:.1e}", h0 - inv));

    let fisher = mw_from_pvalues(&p).statistic;
    let z = choi_z_from_pvalues(&p).statistic;
    ok &= close(z, (fisher - 2.0 * n) / (2.0 * n.sqrt()), 1e-12);

    let half = choi2006_from_pvalues(&[0.5; 10]);
    let pm = -(10f64).sqrt() * (1.0 + 0.5f64.ln());
    ok &= close(half.z.statistic, 0.0, 1e-12) && close(half.l_star.statistic, 0.0, 1e-12);
    ok &= close(half.pm.statistic, pm, 1e-12);

    let (theta, _) = hartung_rho_hat(&ProbitVector::new(&[0.3; 8])).unwrap();
    ok &= close(theta, 1.0, 1e-12);

    // Simes: rank one rejects, rank three rejects, and a near miss.
    let d = simes_test(&[0.01, 0.02, 0.03, 0.04], &[0.05]).unwrap();
    ok &= d[0].reject && d[0].witness == Some(1);
    let d = simes_test(&[0.9, 0.034, 0.03, 0.036], &[0.05]).unwrap();
    ok &= d[0].reject && d[0].witness == Some(3);
    let d = simes_test(&[0.02, 0.2, 0.3, 0.4], &[0.05]).unwrap();
    ok &= !d[0].reject;
    let d = simes_test(&[0.0125, 0.5, 0.5, 0.5], &[0.05]).unwrap();
    ok &= d[0].reject;
    (ok, notes.join("; "))
}

/// Brute-force ADF t-statistic from the normal equations, solved by
/// Gauss-Jordan elimination.
fn oracle_t(y: &[f64], p: usize, constant: bool) -> f64 {
    let mut rows = Vec::new();
    let mut dy = Vec::new();
    for t in (p + 1)..y.len() {
        let mut r = Vec::new();
        if constant {
            r.push(1.0);
        }
        r.push(y[t - 1]);
        for j in 1..=p {
            r.push(y[t - j] - y[t - j - 1]);
        }
        rows.push(r);
        dy.push(y[t] - y[t - 1]);
    }
    let k = rows[0].len();
    let m = rows.len();
    let mut a = vec![vec![0.0; 2 * k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = (0..m).map(|t| rows[t][i] * rows[t][j]).sum();
        }
        a[i][k + i] = 1.0;
        a[i][2 * k] = (0..m).map(|t| rows[t][i] * dy[t]).sum();
    }
    for c in 0..k {
        let piv = (c..k)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, piv);
        let d = a[c][c];
        a[c].iter_mut().for_each(|v| *v /= d);
        for r in 0..k {
            if r != c {
                let f = a[r][c];
                let src = a[c].clone();
                a[r].iter_mut().zip(src).for_each(|(v, w)| *v -= f * w);
            }
        }
    }
    let beta: Vec<f64> = (0..k).map(|i| a[i][2 * k]).collect();
    let rss: f64 = (0..m)
        .map(|t| (dy[t] - (0..k).map(|j| rows[t][j] * beta[j]).sum::<f64>()).powi(2))
        .sum();
    let s2 = rss / (m - k) as f64;
    let idx = usize::from(constant);
    beta[idx] / (s2 * a[idx][k + idx]).sqrt()
}

fn oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let y = generate(Dgp::RandomWalk, 1, 15, seed).unwrap().remove(0);
        for p in 0..=2 {
            for case in [Deterministics::Constant, Deterministics::None] {
                let got = adf_fit(&y, &AdfSpec::fixed(case, p)).unwrap().t_stat;
                let want = oracle_t(&y, p, case == Deterministics::Constant);
                worst = worst.max((got - want).abs());
            }
        }
    }
    let mut sum_gap: f64 = 0.0;
    for mode in [InflationMode::ExAnte, InflationMode::ExPost] {
        let series = synthetic_macro(Dgp::RandomWalk, 10, 148, 4).unwrap();
        let rird = build_rird(
            &series,
            mode,
            Benchmark::GroupAverage,
            &RirdOptions::default(),
        )
        .unwrap();
        let rows = rird.panel.balanced_rows().unwrap();
        for t in 0..rows[0].len() {
            sum_gap = sum_gap.max(rows.iter().map(|r| r[t]).sum::<f64>().abs());
        }
    }
    (
        worst <= 1e-10 && sum_gap <= 1e-10,
        format!("max t-stat gap {worst:.1e}, max group-average row sum {sum_gap:.1e}"),
    )
}

fn calibration() -> Outcome {
    let seed = SimSettings::default().seed;
    let reps = 50_000;
    let dfc = simulate_df_quantiles(Deterministics::Constant, 500, 0, reps, seed).unwrap();
    let dfn = simulate_df_quantiles(Deterministics::None, 500, 0, reps, seed).unwrap();
    let q_c = dfc.quantile_at(0.05).unwrap();
    let q_n = dfn.quantile_at(0.05).unwrap();
    let mut ok = close(q_c, -2.86, 0.03) && close(q_n, -1.95, 0.03);

    // The surface is judged at 5% and 10%. At 1% the Monte Carlo standard
    // error of a quantile from 50k draws is about 0.017, too close to the
    // tolerance to say anything, so those gaps are only reported.
    let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let surface =
        simulate_hansen_surface(Deterministics::None, &grid, reps, 1000, seed ^ 1).unwrap();
    let at0 = surface.critical_values(0.0);
    let at1 = surface.critical_values(1.0);
    let df_none = dfn.critical_values();
    let gap0 = [0, 1, 2].map(|k| (at0[k] - NORMAL_LOWER[k]).abs());
    let gap1 = [0, 1, 2].map(|k| (at1[k] - df_none[k]).abs());
    ok &= gap0[1] <= 0.02 && gap0[2] <= 0.02 && gap1[1] <= 0.03 && gap1[2] <= 0.03;
    (
        ok,
        format!(
            "DF 5%: constant {q_c:.4}, none {q_n:.4}; CADF surface gap at 1/5/10% to normal {:.4}/{:.4}/{:.4}, to DF(none) {:.4}/{:.4}/{:.4}",
            gap0[0], gap0[1], gap0[2], gap1[0], gap1[1], gap1[2]
        ),
    )
}

fn store() -> TableStore {
    TableStore::new(SimSettings::default())
        .with_cache_dir(concat!(env!("CARGO_TARGET_TMPDIR"), "/panelur-acceptance"))
}

fn panel(dgp: Dgp, seed: u64) -> Panel {
    Panel::from_unnamed_rows(generate(dgp, 10, 148, seed).unwrap()).unwrap()
}

/// Rejection frequency at 5% of each battery row over `reps` panels.
fn rejection_rates(
    dgp: Dgp,
    reps: u64,
    tests: &[TestName],
    opts: &BatteryOptions,
    store: &TableStore,
) -> Vec<(String, f64)> {
    let mut counts: Vec<(String, usize)> = Vec::new();
    for seed in 0..reps {
        let rows = run_battery(&panel(dgp, 1_000_000 + seed), tests, opts, store);
        if counts.is_empty() {
            counts = rows.iter().map(|r| (r.label.clone(), 0)).collect();
        }
        for (row, c) in rows.iter().zip(counts.iter_mut()) {
            let t = row
                .outcome
                .as_ref()
                .unwrap_or_else(|e| panic!("{}: {e}", row.label));
            c.1 += usize::from(t.rejects_at(0.05));
        }
    }
    counts
        .into_iter()
        .map(|(l, c)| (l, c as f64 / reps as f64))
        .collect()
}

fn size(store: &TableStore) -> Outcome {
    let tests = [
        TestName::Mw,
        TestName::Choi,
        TestName::Llc,
        TestName::Ips,
        TestName::Cips,
        TestName::Padf,
        TestName::Sadf,
        TestName::Scadf,
        TestName::ScadfPc,
    ];
    // Judged at the default configuration, AIC lags up to 5.
    let rates = rejection_rates(
        Dgp::RandomWalk,
        2000,
        &tests,
        &BatteryOptions::default(),
        store,
    );
    let mut ok = rates.iter().all(|(_, r)| (r - 0.05).abs() <= 0.02);
    let mut detail: Vec<String> = rates
        .iter()
        .map(|(l, r)| format!("{l} {:.1}%", 100.0 * r))
        .collect();

    // Reported only: the same panels with the lag fixed at the true order,
    // which separates the effect of lag selection from the tables.
    let fixed = BatteryOptions {
        spec: AdfSpec::fixed(Deterministics::Constant, 0),
        ..BatteryOptions::default()
    };
    let rates0 = rejection_rates(Dgp::RandomWalk, 2000, &tests, &fixed, store);
    detail.push(format!(
        "with lag fixed at 0: {}",
        rates0
            .iter()
            .map(|(l, r)| format!("{l} {:.1}%", 100.0 * r))
            .collect::<Vec<_>>()
            .join(" ")
    ));

    // Common factor in the innovations: the correlation-corrected
    // combination should hold size where the plain one does not.
    let spec = BatteryOptions::default().spec;
    let (mut dem, mut inv) = (0usize, 0usize);
    let reps = 2000;
    for seed in 0..reps {
        let units = unit_adf(
            &panel(Dgp::Factor { loading: 1.0 }, 2_000_000 + seed),
            &spec,
            store,
        )
        .unwrap();
        let p: Vec<f64> = units.iter().map(|u| u.p_value).collect();
        dem += usize::from(demetrescu_z(&p).unwrap().rejects_at(0.05));
        inv += usize::from(choi_inverse_normal(&p).unwrap().rejects_at(0.05));
    }
    let (dem, inv) = (dem as f64 / reps as f64, inv as f64 / reps as f64);
    ok &= (dem - 0.05).abs() <= 0.02 && inv > dem && inv > 0.07;
    detail.push(format!(
        "factor null: Demetrescu {:.1}%, inverse normal {:.1}%",
        100.0 * dem,
        100.0 * inv
    ));
    (ok, detail.join(", "))
}

fn power(store: &TableStore) -> Outcome {
    let tests = [TestName::Ips, TestName::Cips, TestName::Pcadf];
    let rates = rejection_rates(
        Dgp::Ar1 { rho: 0.8 },
        500,
        &tests,
        &BatteryOptions::default(),
        store,
    );
    let ok = rates.iter().all(|(_, r)| *r > 0.90);
    let detail = rates
        .iter()
        .map(|(l, r)| format!("{l} {:.1}%", 100.0 * r))
        .collect::<Vec<_>>();
    (ok, detail.join(", "))
}

fn main() -> ExitCode {
    let store = store();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 published constants", Box::new(constants)),
        ("2 analytic identities", Box::new(identities)),
        ("3 oracle equivalence", Box::new(oracle)),
        ("4 distribution calibration", Box::new(calibration)),
        ("5 size at N=10, T=148", Box::new(|| size(&store))),
        ("6 power against AR(0.8)", Box::new(|| power(&store))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let start = Instant::now();
        let (ok, detail) = check();
        failed += usize::from(!ok);
        println!(
            "criterion {name}: {} ({detail}) [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "criterion 7 reproduction of published tables: NOT RUN (needs the original macro dataset)"
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
