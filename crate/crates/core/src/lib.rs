//! Panel unit root testing for real interest rate differentials.

pub mod adf;
pub mod combo;
pub mod data;
pub mod dist;
pub mod error;
pub mod factors;
pub mod firstgen;
pub mod lrv;
pub mod regression;
pub mod report;
pub mod result;
pub mod rird;
pub mod secondgen;
pub mod stats;
pub mod synthetic;

pub use adf::{
    adf_fit, cadf_fit, gls_detrend, AdfFit, AdfSpec, CadfFit, Deterministics, LagSelection,
};
pub use data::{align_panel, load_csv, ColumnMapping, MonthIndex, Panel, RawSeries, Variable};
pub use dist::{QuantileTable, SimSettings, TableStore};
pub use error::{Error, Result};
pub use lrv::{long_run_variance, LrvSpec};
pub use result::{Decision, Tail, TestResult};
pub use rird::{Benchmark, InflationMode, RirdPanel};
