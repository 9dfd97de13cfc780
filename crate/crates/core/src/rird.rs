//! Real interest rate differentials.
//!
//! Inflation is the annualized log-difference of CPI in percent. Real rates
//! subtract expected inflation from the nominal money market rate, where the
//! expectation is either last observed inflation (ex ante) or realized
//! next-month inflation (ex post). Differentials are taken against the
//! Euro-area series or against the cross-section mean of the member units.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{align_panel, MonthIndex, Panel, RawSeries, Variable, EURO_AREA};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InflationMode {
    ExAnte,
    ExPost,
}

impl InflationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            InflationMode::ExAnte => "ex_ante",
            InflationMode::ExPost => "ex_post",
        }
    }
}

impl fmt::Display for InflationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InflationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ex_ante" => Ok(Self::ExAnte),
            "ex_post" => Ok(Self::ExPost),
            _ => Err(Error::Config(format!("unknown inflation mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    EuroArea,
    GroupAverage,
}

impl Benchmark {
    pub fn as_str(self) -> &'static str {
        match self {
            Benchmark::EuroArea => "euro_area",
            Benchmark::GroupAverage => "group_average",
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Benchmark {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euro_area" => Ok(Self::EuroArea),
            "group_average" => Ok(Self::GroupAverage),
            _ => Err(Error::Config(format!("unknown benchmark {s:?}"))),
        }
    }
}

/// Real rate of one unit; carries `Variable::RealRate`.
pub type RealRateSeries = RawSeries;

/// Annualized log-difference inflation over `horizon_months`, in percent.
///
/// `inflation_t = 100 * (ln CPI_t - ln CPI_{t-h}) * 12 / h`. The output is
/// dated at `t` and starts `h` months after the first CPI observation.
pub fn compute_inflation(cpi: &RawSeries, horizon_months: usize) -> Result<RawSeries> {
    if horizon_months == 0 {
        return Err(Error::InvalidInput(
            "inflation horizon must be >= 1 month".into(),
        ));
    }
    if cpi.len() <= horizon_months {
        return Err(Error::InvalidInput(format!(
            "CPI series {} has {} observations, need more than {horizon_months}",
            cpi.unit_id(),
            cpi.len()
        )));
    }
    if let Some((d, v)) = cpi.observations().iter().find(|(_, v)| *v <= 0.0) {
        return Err(Error::Domain(format!(
            "CPI of {} is {v} at {d}; logarithm undefined",
            cpi.unit_id()
        )));
    }
    let h = horizon_months as i64;
    let scale = 100.0 * 12.0 / horizon_months as f64;
    let obs = cpi
        .observations()
        .iter()
        .filter_map(|&(d, v)| {
            cpi.get(d.offset(-h))
                .map(|lag| (d, scale * (v.ln() - lag.ln())))
        })
        .collect();
    RawSeries::new(cpi.unit_id(), Variable::Inflation, obs)
}

/// `r_t = i_t - pi_t` (ex ante) or `r_t = i_t - pi_{t+1}` (ex post), dated at `t`.
pub fn compute_real_rate(
    nominal: &RawSeries,
    inflation: &RawSeries,
    mode: InflationMode,
) -> Result<RealRateSeries> {
    let overlap = nominal
        .observations()
        .iter()
        .filter(|(d, _)| inflation.get(*d).is_some())
        .count();
    if overlap < 2 {
        return Err(Error::InvalidInput(format!(
            "unit {}: nominal rate and inflation overlap on {overlap} month(s), need 2",
            nominal.unit_id()
        )));
    }
    let lead = match mode {
        InflationMode::ExAnte => 0,
        InflationMode::ExPost => 1,
    };
    let obs = nominal
        .observations()
        .iter()
        .filter_map(|&(d, i)| inflation.get(d.offset(lead)).map(|pi| (d, i - pi)))
        .collect();
    RawSeries::new(nominal.unit_id(), Variable::RealRate, obs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RirdPanel {
    pub panel: Panel,
    pub mode: InflationMode,
    pub benchmark: Benchmark,
}

/// Differentials against the chosen benchmark.
///
/// The result covers the common window of every unit involved (latest first
/// observation to earliest last observation); a gap inside that window is an
/// error. Under `EuroArea` the `EA` row is the benchmark and is dropped from
/// the output. Under `GroupAverage` the benchmark at `t` is the mean over all
/// non-`EA` units, including unit `i` itself unless `leave_one_out` is set.
pub fn compute_rird(
    real_rates: &Panel,
    benchmark: Benchmark,
    mode: InflationMode,
    leave_one_out: bool,
) -> Result<RirdPanel> {
    let ea = real_rates.unit_index(EURO_AREA);
    let members: Vec<usize> = (0..real_rates.n_units())
        .filter(|&k| Some(k) != ea)
        .collect();
    match benchmark {
        Benchmark::EuroArea if ea.is_none() => {
            return Err(Error::MissingBenchmark(EURO_AREA.to_string()))
        }
        Benchmark::EuroArea if members.is_empty() => {
            return Err(Error::InvalidInput("no member units besides EA".into()))
        }
        Benchmark::GroupAverage if members.len() < 2 => {
            return Err(Error::InvalidInput(format!(
                "group average needs at least 2 member units, found {}",
                members.len()
            )))
        }
        _ => {}
    }
    let involved: Vec<usize> = match benchmark {
        Benchmark::EuroArea => members.iter().copied().chain(ea).collect(),
        Benchmark::GroupAverage => members.clone(),
    };

    let values = real_rates.values();
    let axis = real_rates.time_axis();
    let first = |k: usize| values[k].iter().position(Option::is_some);
    let last = |k: usize| values[k].iter().rposition(Option::is_some);
    let mut start = 0;
    let mut end = axis.len();
    for &k in &involved {
        match (first(k), last(k)) {
            (Some(a), Some(b)) => {
                start = start.max(a);
                end = end.min(b + 1);
            }
            _ => {
                return Err(Error::EmptyWindow {
                    unit: real_rates.units()[k].clone(),
                })
            }
        }
    }
    if start >= end {
        return Err(Error::InvalidInput("units share no common window".into()));
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(involved.len());
    for &k in &involved {
        let mut row = Vec::with_capacity(end - start);
        for t in start..end {
            row.push(values[k][t].ok_or_else(|| Error::MissingCell {
                unit: real_rates.units()[k].clone(),
                date: axis[t],
            })?);
        }
        rows.push(row);
    }

    let n_members = members.len();
    let len = end - start;
    let out: Vec<Vec<f64>> = match benchmark {
        Benchmark::EuroArea => {
            let bench = &rows[n_members];
            rows[..n_members]
                .iter()
                .map(|r| r.iter().zip(bench).map(|(a, b)| a - b).collect())
                .collect()
        }
        Benchmark::GroupAverage => {
            let totals: Vec<f64> = (0..len).map(|t| rows.iter().map(|r| r[t]).sum()).collect();
            let n = n_members as f64;
            rows.iter()
                .map(|r| {
                    (0..len)
                        .map(|t| {
                            let avg = if leave_one_out {
                                (totals[t] - r[t]) / (n - 1.0)
                            } else {
                                totals[t] / n
                            };
                            r[t] - avg
                        })
                        .collect()
                })
                .collect()
        }
    };
    let units = members
        .iter()
        .map(|&k| real_rates.units()[k].clone())
        .collect();
    let panel = Panel::new(
        units,
        axis[start..end].to_vec(),
        out.into_iter()
            .map(|r| r.into_iter().map(Some).collect())
            .collect(),
    )?;
    Ok(RirdPanel {
        panel,
        mode,
        benchmark,
    })
}

/// Settings for building RIRD panels straight from CPI and rate series.
#[derive(Debug, Clone, PartialEq)]
pub struct RirdOptions {
    pub horizon_months: usize,
    pub leave_one_out: bool,
    pub window: Option<(MonthIndex, MonthIndex)>,
}

impl Default for RirdOptions {
    fn default() -> Self {
        Self {
            horizon_months: 12,
            leave_one_out: false,
            window: None,
        }
    }
}

/// Real-rate panel for every unit that has both CPI and a nominal rate.
pub fn real_rate_panel(
    series: &[RawSeries],
    mode: InflationMode,
    opts: &RirdOptions,
) -> Result<Panel> {
    let mut cpi: HashMap<&str, &RawSeries> = HashMap::new();
    for s in series.iter().filter(|s| s.variable() == Variable::Cpi) {
        cpi.insert(s.unit_id(), s);
    }
    let mut real = Vec::new();
    for rate in series
        .iter()
        .filter(|s| s.variable() == Variable::NominalRate)
    {
        let Some(c) = cpi.get(rate.unit_id()) else {
            continue;
        };
        let build = || -> Result<RawSeries> {
            let pi = compute_inflation(c, opts.horizon_months)?;
            compute_real_rate(rate, &pi, mode)
        };
        real.push(build().map_err(|e| e.in_unit(rate.unit_id()))?);
    }
    align_panel(&real, Variable::RealRate, opts.window)
}

pub fn build_rird(
    series: &[RawSeries],
    mode: InflationMode,
    benchmark: Benchmark,
    opts: &RirdOptions,
) -> Result<RirdPanel> {
    let real = real_rate_panel(series, mode, opts)?;
    compute_rird(&real, benchmark, mode, opts.leave_one_out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub sd: f64,
}

impl SummaryRow {
    fn of(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput(
                "summary statistics need at least 2 observations".into(),
            ));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        Ok(Self {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean,
            sd: (ss / (n - 1.0)).sqrt(),
        })
    }
}

/// Per-unit and pooled descriptive statistics of a RIRD panel.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub mode: InflationMode,
    pub benchmark: Benchmark,
    pub units: Vec<(String, SummaryRow)>,
    pub pooled: SummaryRow,
}

pub fn summary_stats(rird: &RirdPanel) -> Result<SummaryStats> {
    let p = &rird.panel;
    let mut units = Vec::with_capacity(p.n_units());
    let mut all = Vec::new();
    for (u, row) in p.units().iter().zip(p.values()) {
        let obs: Vec<f64> = row.iter().flatten().copied().collect();
        units.push((u.clone(), SummaryRow::of(&obs).map_err(|e| e.in_unit(u))?));
        all.extend(obs);
    }
    Ok(SummaryStats {
        mode: rird.mode,
        benchmark: rird.benchmark,
        units,
        pooled: SummaryRow::of(&all)?,
    })
}

/// Long CSV `date,unit,rird`.
pub fn write_rird_csv<W: Write>(writer: W, rird: &RirdPanel) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "unit", "rird"])?;
    let p = &rird.panel;
    for (u, row) in p.units().iter().zip(p.values()) {
        for (d, v) in p.time_axis().iter().zip(row) {
            if let Some(v) = v {
                w.write_record([d.to_string(), u.clone(), v.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
