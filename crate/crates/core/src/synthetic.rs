//! Synthetic panels for calibration studies and self-contained demos.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{MonthIndex, Panel, RawSeries, Variable, EURO_AREA};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dgp {
    /// Independent driftless random walks.
    RandomWalk,
    /// Independent stationary AR(1) processes started from their stationary
    /// distribution.
    Ar1 { rho: f64 },
    /// Random walks whose innovations share one common factor:
    /// `u_it = loading * f_t + e_it`.
    Factor { loading: f64 },
    /// The first `stationary` units are AR(1) with root `rho`, the rest are
    /// random walks.
    Heterogeneous { stationary: usize, rho: f64 },
}

impl fmt::Display for Dgp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dgp::RandomWalk => f.write_str("random_walk"),
            Dgp::Ar1 { rho } => write!(f, "ar1(rho={rho})"),
            Dgp::Factor { loading } => write!(f, "factor(loading={loading})"),
            Dgp::Heterogeneous { stationary, rho } => {
                write!(f, "heterogeneous(stationary={stationary}, rho={rho})")
            }
        }
    }
}

impl FromStr for Dgp {
    type Err = Error;

    /// `random_walk`, `ar1`, `ar1:0.5`, `factor`, `factor:2`,
    /// `heterogeneous`, `heterogeneous:3:0.5`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        let num = |k: usize, default: f64| -> Result<f64> {
            args.get(k).map_or(Ok(default), |v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("bad DGP parameter '{v}'")))
            })
        };
        let dgp = match name {
            "random_walk" | "rw" => Dgp::RandomWalk,
            "ar1" => Dgp::Ar1 { rho: num(0, 0.8)? },
            "factor" => Dgp::Factor {
                loading: num(0, 1.0)?,
            },
            "heterogeneous" => Dgp::Heterogeneous {
                stationary: num(0, 1.0)? as usize,
                rho: num(1, 0.5)?,
            },
            other => return Err(Error::Config(format!("unknown DGP '{other}'"))),
        };
        if let Dgp::Ar1 { rho } | Dgp::Heterogeneous { rho, .. } = dgp {
            if !(rho.abs() < 1.0) {
                return Err(Error::Config(format!("AR root {rho} is not stationary")));
            }
        }
        Ok(dgp)
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn ar1_path(rng: &mut ChaCha8Rng, t: usize, rho: f64) -> Vec<f64> {
    let mut y = Vec::with_capacity(t);
    let mut level = normal(rng) / (1.0 - rho * rho).sqrt();
    y.push(level);
    for _ in 1..t {
        level = rho * level + normal(rng);
        y.push(level);
    }
    y
}

fn walk(rng: &mut ChaCha8Rng, t: usize) -> Vec<f64> {
    let mut y = Vec::with_capacity(t);
    let mut level = 0.0;
    y.push(level);
    for _ in 1..t {
        level += normal(rng);
        y.push(level);
    }
    y
}

/// `n` rows of length `t` drawn from `dgp`; identical for identical seeds.
pub fn generate(dgp: Dgp, n: usize, t: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 || t < 2 {
        return Err(Error::InvalidInput(format!(
            "cannot generate a {n} x {t} panel"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match dgp {
        Dgp::RandomWalk => (0..n).map(|_| walk(&mut rng, t)).collect(),
        Dgp::Ar1 { rho } => (0..n).map(|_| ar1_path(&mut rng, t, rho)).collect(),
        Dgp::Heterogeneous { stationary, rho } => (0..n)
            .map(|i| {
                if i < stationary {
                    ar1_path(&mut rng, t, rho)
                } else {
                    walk(&mut rng, t)
                }
            })
            .collect(),
        Dgp::Factor { loading } => {
            let f: Vec<f64> = (0..t).map(|_| normal(&mut rng)).collect();
            (0..n)
                .map(|_| {
                    let mut level = 0.0;
                    let mut y = vec![0.0];
                    for ft in &f[1..] {
                        level += loading * ft + normal(&mut rng);
                        y.push(level);
                    }
                    y
                })
                .collect()
        }
    })
}

pub fn synthetic_panel(dgp: Dgp, n: usize, t: usize, seed: u64) -> Result<Panel> {
    Panel::from_unnamed_rows(generate(dgp, n, t, seed)?)
}

/// Raw CPI and nominal-rate series for `n` countries plus the euro area,
/// built so the ex-ante real rate differential against `EA` (12-month
/// inflation) reproduces `generate(dgp, n, t, seed)` exactly.
///
/// CPI runs for `t + 13` months from 2000-01; rates cover the `t` months on
/// which both the ex-ante and ex-post differentials are defined.
pub fn synthetic_macro(dgp: Dgp, n: usize, t: usize, seed: u64) -> Result<Vec<RawSeries>> {
    let rows = generate(dgp, n, t, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
    let start = MonthIndex::new(2000, 1)?;
    let months = t + 13;
    let mut out = Vec::with_capacity(2 * (n + 1));
    let names: Vec<String> = (1..=n)
        .map(|k| format!("C{k:02}"))
        .chain([EURO_AREA.to_string()])
        .collect();
    for (idx, name) in names.iter().enumerate() {
        let drift = rng.gen_range(0.001..0.004);
        let mut log_cpi = (100.0f64).ln();
        let mut cpi = Vec::with_capacity(months);
        for _ in 0..months {
            cpi.push(log_cpi.exp());
            log_cpi += drift + 0.002 * normal(&mut rng);
        }
        let inflation = |m: usize| 100.0 * (cpi[m] / cpi[m - 12]).ln();
        let rates: Vec<f64> = (0..t)
            .map(|k| {
                let m = 12 + k;
                let real = if idx < n { rows[idx][k] } else { 0.0 };
                inflation(m) + real
            })
            .collect();
        out.push(RawSeries::from_values(name, Variable::Cpi, start, &cpi)?);
        out.push(RawSeries::from_values(
            name,
            Variable::NominalRate,
            start.offset(12),
            &rates,
        )?);
    }
    Ok(out)
}
