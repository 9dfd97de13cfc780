//! Monthly country panels: ingestion, alignment and validation.
//!
//! Input files follow a long layout with one observation per row:
//!
//! ```text
//! date,country,variable,value
//! 2000-01,BU,cpi,101.2
//! 2000-01,BU,rate,4.35
//! ```
//!
//! Dates are month-granular (`YYYY-MM`). Anything carrying a day component
//! is rejected rather than truncated. Missing observations are represented
//! as `None` cells once series are aligned into a [`Panel`]; no numeric
//! sentinel ever stands in for a missing value.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reserved unit id of the Euro-area benchmark series.
pub const EURO_AREA: &str = "EA";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonthIndex {
    year: i32,
    month: u8,
}

impl MonthIndex {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidInput(format!("invalid month {month}")));
        }
        Ok(Self {
            year,
            month: month as u8,
        })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u32 {
        self.month as u32
    }

    /// Months elapsed since January of year 0; consecutive months differ by one.
    pub fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn from_ordinal(ordinal: i64) -> Self {
        let year = ordinal.div_euclid(12);
        let month = ordinal.rem_euclid(12) + 1;
        Self {
            year: year as i32,
            month: month as u8,
        }
    }

    pub fn offset(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    pub fn succ(self) -> Self {
        self.offset(1)
    }

    /// Inclusive range of consecutive months.
    pub fn range_inclusive(start: MonthIndex, end: MonthIndex) -> Vec<MonthIndex> {
        (start.ordinal()..=end.ordinal())
            .map(MonthIndex::from_ordinal)
            .collect()
    }
}

impl fmt::Display for MonthIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for MonthIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidInput(format!("invalid date {s:?}, expected YYYY-MM"));
        let (year, month) = s.split_once('-').ok_or_else(bad)?;
        if year.len() != 4 || month.len() != 2 || !month.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let year: i32 = year.parse().map_err(|_| bad())?;
        let month: u32 = month.parse().map_err(|_| bad())?;
        MonthIndex::new(year, month)
    }
}

impl Serialize for MonthIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MonthIndex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variable {
    Cpi,
    NominalRate,
    /// Derived: annualized CPI inflation in percent.
    Inflation,
    /// Derived: nominal rate minus expected inflation.
    RealRate,
    /// Derived: real interest rate differential.
    Rird,
}

impl Variable {
    pub fn as_str(self) -> &'static str {
        match self {
            Variable::Cpi => "cpi",
            Variable::NominalRate => "rate",
            Variable::Inflation => "inflation",
            Variable::RealRate => "real_rate",
            Variable::Rird => "rird",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cpi" => Ok(Variable::Cpi),
            "rate" => Ok(Variable::NominalRate),
            other => Err(Error::InvalidInput(format!(
                "unknown variable {other:?}, expected cpi or rate"
            ))),
        }
    }
}

/// One country's observations of one variable, strictly increasing in time.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    unit_id: String,
    variable: Variable,
    observations: Vec<(MonthIndex, f64)>,
}

impl RawSeries {
    pub fn new(
        unit_id: impl Into<String>,
        variable: Variable,
        observations: Vec<(MonthIndex, f64)>,
    ) -> Result<Self> {
        let unit_id = unit_id.into();
        for w in observations.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidInput(format!(
                    "series {unit_id}/{variable}: timestamps not strictly increasing at {}",
                    w[1].0
                )));
            }
        }
        if let Some((date, value)) = observations.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "series {unit_id}/{variable}: non-finite value {value} at {date}"
            )));
        }
        Ok(Self {
            unit_id,
            variable,
            observations,
        })
    }

    /// Builds a series of consecutive months starting at `start`.
    pub fn from_values(
        unit_id: impl Into<String>,
        variable: Variable,
        start: MonthIndex,
        values: &[f64],
    ) -> Result<Self> {
        let obs = values
            .iter()
            .enumerate()
            .map(|(k, &v)| (start.offset(k as i64), v))
            .collect();
        Self::new(unit_id, variable, obs)
    }

    pub fn unit_id(&self) -> &str {
        &self.unit_id
    }

    pub fn variable(&self) -> Variable {
        self.variable
    }

    pub fn observations(&self) -> &[(MonthIndex, f64)] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|&(_, v)| v).collect()
    }

    pub fn dates(&self) -> Vec<MonthIndex> {
        self.observations.iter().map(|&(d, _)| d).collect()
    }

    /// True when every observation is exactly one month after its predecessor.
    pub fn is_contiguous(&self) -> bool {
        self.observations
            .windows(2)
            .all(|w| w[1].0.ordinal() - w[0].0.ordinal() == 1)
    }

    pub fn get(&self, date: MonthIndex) -> Option<f64> {
        self.observations
            .binary_search_by_key(&date, |&(d, _)| d)
            .ok()
            .map(|k| self.observations[k].1)
    }
}

/// Header names of the four input columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub date: String,
    pub country: String,
    pub variable: String,
    pub value: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            date: "date".into(),
            country: "country".into(),
            variable: "variable".into(),
            value: "value".into(),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &ColumnMapping) -> Result<Vec<RawSeries>> {
    let file = File::open(path.as_ref())?;
    read_csv(file, schema)
}

/// Parses the long CSV layout. Row numbers in errors count the header as row 1.
pub fn read_csv<R: Read>(reader: R, schema: &ColumnMapping) -> Result<Vec<RawSeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Ingest {
                row: 1,
                message: format!("missing column {name:?}"),
            })
    };
    let (c_date, c_country, c_var, c_value) = (
        col(&schema.date)?,
        col(&schema.country)?,
        col(&schema.variable)?,
        col(&schema.value)?,
    );

    // (country, variable) -> (date -> (value, row))
    let mut order: Vec<(String, Variable)> = Vec::new();
    let mut cells: HashMap<(String, Variable), Vec<(MonthIndex, f64, usize)>> = HashMap::new();
    let mut seen: HashMap<(String, Variable, MonthIndex), usize> = HashMap::new();

    for (k, record) in rdr.records().enumerate() {
        let row = k + 2;
        let record = record.map_err(|e| Error::Ingest {
            row,
            message: e.to_string(),
        })?;
        let field = |c: usize| record.get(c).unwrap_or("");
        let ingest = |e: Error| Error::Ingest {
            row,
            message: match e {
                Error::InvalidInput(m) => m,
                other => other.to_string(),
            },
        };
        let date: MonthIndex = field(c_date).parse().map_err(ingest)?;
        let country = field(c_country).to_string();
        if country.is_empty() {
            return Err(Error::Ingest {
                row,
                message: "empty country code".into(),
            });
        }
        let variable: Variable = field(c_var).parse().map_err(ingest)?;
        let raw_value = field(c_value);
        let value: f64 = raw_value.parse().map_err(|_| Error::Ingest {
            row,
            message: format!("non-numeric value {raw_value:?}"),
        })?;
        if !value.is_finite() {
            return Err(Error::Ingest {
                row,
                message: format!("non-finite value {raw_value:?}"),
            });
        }
        if variable == Variable::Cpi && value <= 0.0 {
            return Err(Error::Ingest {
                row,
                message: format!("CPI must be strictly positive, got {value}"),
            });
        }
        if let Some(&first) = seen.get(&(country.clone(), variable, date)) {
            return Err(Error::Duplicate {
                country,
                variable: variable.to_string(),
                date,
                first,
                second: row,
            });
        }
        seen.insert((country.clone(), variable, date), row);
        let key = (country, variable);
        if !cells.contains_key(&key) {
            order.push(key.clone());
        }
        cells.entry(key).or_default().push((date, value, row));
    }

    order
        .into_iter()
        .map(|key| {
            let mut obs = cells.remove(&key).unwrap_or_default();
            obs.sort_by_key(|&(d, _, _)| d);
            RawSeries::new(
                key.0,
                key.1,
                obs.into_iter().map(|(d, v, _)| (d, v)).collect(),
            )
        })
        .collect()
}

/// Writes series back out in the input layout, one row per observation.
pub fn write_csv<W: Write>(writer: W, series: &[RawSeries]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "country", "variable", "value"])?;
    for s in series {
        for (date, value) in &s.observations {
            w.write_record([
                date.to_string(),
                s.unit_id.clone(),
                s.variable.to_string(),
                value.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// N units on a shared monthly axis; `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    units: Vec<String>,
    time_axis: Vec<MonthIndex>,
    values: Vec<Vec<Option<f64>>>,
    balanced: bool,
}

impl Panel {
    pub fn new(
        units: Vec<String>,
        time_axis: Vec<MonthIndex>,
        values: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for u in &units {
            if !ids.insert(u.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate unit id {u:?}")));
            }
        }
        if values.len() != units.len() {
            return Err(Error::InvalidInput(format!(
                "{} value rows for {} units",
                values.len(),
                units.len()
            )));
        }
        for w in time_axis.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidInput("time axis not increasing".into()));
            }
        }
        if let Some(k) = values.iter().position(|r| r.len() != time_axis.len()) {
            return Err(Error::InvalidInput(format!(
                "unit {} has {} cells, time axis has {}",
                units[k],
                values[k].len(),
                time_axis.len()
            )));
        }
        let balanced = values.iter().all(|r| r.iter().all(Option::is_some));
        Ok(Self {
            units,
            time_axis,
            values,
            balanced,
        })
    }

    /// Balanced panel of consecutive months from complete rows.
    pub fn from_rows(units: Vec<String>, start: MonthIndex, rows: Vec<Vec<f64>>) -> Result<Self> {
        let t = rows.first().map_or(0, Vec::len);
        let axis = (0..t).map(|k| start.offset(k as i64)).collect();
        let values = rows
            .into_iter()
            .map(|r| r.into_iter().map(Some).collect())
            .collect();
        Self::new(units, axis, values)
    }

    /// Convenience for synthetic data: units named `U01`, `U02`, ... starting 2000-01.
    pub fn from_unnamed_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let units = (1..=rows.len()).map(|k| format!("U{k:02}")).collect();
        let start = MonthIndex::new(2000, 1)?;
        Self::from_rows(units, start, rows)
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn time_axis(&self) -> &[MonthIndex] {
        &self.time_axis
    }

    pub fn values(&self) -> &[Vec<Option<f64>>] {
        &self.values
    }

    pub fn is_balanced(&self) -> bool {
        self.balanced
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    pub fn n_periods(&self) -> usize {
        self.time_axis.len()
    }

    pub fn unit_index(&self, unit: &str) -> Option<usize> {
        self.units.iter().position(|u| u == unit)
    }

    pub fn missing_cells(&self) -> Vec<(String, MonthIndex)> {
        let mut out = Vec::new();
        for (u, row) in self.units.iter().zip(&self.values) {
            for (d, v) in self.time_axis.iter().zip(row) {
                if v.is_none() {
                    out.push((u.clone(), *d));
                }
            }
        }
        out
    }

    /// Complete rows, or `BalanceRequired` listing every missing cell.
    pub fn balanced_rows(&self) -> Result<Vec<Vec<f64>>> {
        require_balanced(self)?;
        Ok(self
            .values
            .iter()
            .map(|r| r.iter().map(|v| v.unwrap_or(f64::NAN)).collect())
            .collect())
    }

    /// Observed cells of each unit as series, in unit order.
    pub fn to_series(&self, variable: Variable) -> Vec<RawSeries> {
        self.units
            .iter()
            .zip(&self.values)
            .map(|(u, row)| RawSeries {
                unit_id: u.clone(),
                variable,
                observations: self
                    .time_axis
                    .iter()
                    .zip(row)
                    .filter_map(|(d, v)| v.map(|v| (*d, v)))
                    .collect(),
            })
            .collect()
    }

    /// Same axis, rows restricted to `keep` (in the given order).
    pub fn select_units(&self, keep: &[usize]) -> Result<Panel> {
        Panel::new(
            keep.iter().map(|&k| self.units[k].clone()).collect(),
            self.time_axis.clone(),
            keep.iter().map(|&k| self.values[k].clone()).collect(),
        )
    }

    /// Columns `[start, end)` of the time axis.
    pub fn slice_time(&self, start: usize, end: usize) -> Result<Panel> {
        Panel::new(
            self.units.clone(),
            self.time_axis[start..end].to_vec(),
            self.values.iter().map(|r| r[start..end].to_vec()).collect(),
        )
    }

    /// Applies `f` to every observed cell.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Panel {
        Panel {
            units: self.units.clone(),
            time_axis: self.time_axis.clone(),
            values: self
                .values
                .iter()
                .map(|r| r.iter().map(|v| v.map(&f)).collect())
                .collect(),
            balanced: self.balanced,
        }
    }
}

/// Aligns all series of `variable` on one monthly axis.
///
/// The axis runs over every month between the earliest and latest observation
/// (clipped to `window`), so months absent from a series become missing cells.
pub fn align_panel(
    series: &[RawSeries],
    variable: Variable,
    window: Option<(MonthIndex, MonthIndex)>,
) -> Result<Panel> {
    let picked: Vec<&RawSeries> = series.iter().filter(|s| s.variable == variable).collect();
    if picked.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 {variable} series to form a panel, found {}",
            picked.len()
        )));
    }
    let inside = |d: MonthIndex| window.map_or(true, |(lo, hi)| d >= lo && d <= hi);
    for s in &picked {
        if !s.observations.iter().any(|&(d, _)| inside(d)) {
            return Err(Error::EmptyWindow {
                unit: s.unit_id.clone(),
            });
        }
    }
    let dates = picked
        .iter()
        .flat_map(|s| s.observations.iter().map(|&(d, _)| d))
        .filter(|&d| inside(d));
    let (lo, hi) = dates.fold((None::<MonthIndex>, None::<MonthIndex>), |(lo, hi), d| {
        (
            Some(lo.map_or(d, |l| l.min(d))),
            Some(hi.map_or(d, |h| h.max(d))),
        )
    });
    let (lo, hi) = (lo.expect("non-empty"), hi.expect("non-empty"));
    let axis = MonthIndex::range_inclusive(lo, hi);
    let values = picked
        .iter()
        .map(|s| axis.iter().map(|&d| s.get(d)).collect())
        .collect();
    Panel::new(
        picked.iter().map(|s| s.unit_id.clone()).collect(),
        axis,
        values,
    )
}

/// Passes a balanced panel through; refuses anything with missing cells.
pub fn require_balanced(panel: &Panel) -> Result<&Panel> {
    if panel.balanced {
        Ok(panel)
    } else {
        Err(Error::BalanceRequired {
            missing: panel.missing_cells(),
        })
    }
}
