//! Run configuration, orchestration of the full battery over inflation modes
//! and benchmarks, and CSV/markdown rendering.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adf::{AdfSpec, Deterministics, LagSelection};
use crate::combo::{
    combo_context, pcadf_from, scadf_from, unit_pvalues, ComboContext, ComboVariant,
};
use crate::data::{load_csv, require_balanced, ColumnMapping, MonthIndex, Panel};
use crate::dist::{SimSettings, TableStore};
use crate::error::{Error, Result};
use crate::firstgen::{
    choi_z_from_pvalues, ips_from_units, llc_test, mw_from_pvalues, unit_adf, UnitAdf,
};
use crate::lrv::{Bandwidth, LrvSpec};
use crate::result::{Tail, TestResult, UnitDiagnostic};
use crate::rird::{
    build_rird, summary_stats, Benchmark, InflationMode, RirdOptions, SummaryRow, SummaryStats,
};
use crate::secondgen::{choi2006_tests, cips_test, moon_perron_test};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestName {
    Mw,
    Choi,
    Llc,
    Ips,
    Mp,
    Choi2006,
    Cips,
    Cd,
    Padf,
    Pcadf,
    PcadfPc,
    Sadf,
    Scadf,
    ScadfPc,
}

impl TestName {
    pub const ALL: [TestName; 14] = [
        TestName::Mw,
        TestName::Choi,
        TestName::Llc,
        TestName::Ips,
        TestName::Mp,
        TestName::Choi2006,
        TestName::Cips,
        TestName::Cd,
        TestName::Padf,
        TestName::Pcadf,
        TestName::PcadfPc,
        TestName::Sadf,
        TestName::Scadf,
        TestName::ScadfPc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TestName::Mw => "mw",
            TestName::Choi => "choi",
            TestName::Llc => "llc",
            TestName::Ips => "ips",
            TestName::Mp => "mp",
            TestName::Choi2006 => "choi2006",
            TestName::Cips => "cips",
            TestName::Cd => "cd",
            TestName::Padf => "padf",
            TestName::Pcadf => "pcadf",
            TestName::PcadfPc => "pcadf_pc",
            TestName::Sadf => "sadf",
            TestName::Scadf => "scadf",
            TestName::ScadfPc => "scadf_pc",
        }
    }

    pub fn section(self) -> Section {
        match self {
            TestName::Mw | TestName::Choi | TestName::Llc | TestName::Ips => {
                Section::FirstGeneration
            }
            TestName::Mp | TestName::Choi2006 | TestName::Cips => Section::SecondGeneration,
            _ => Section::Combination,
        }
    }

    fn is_simes(self) -> bool {
        matches!(self, TestName::Sadf | TestName::Scadf | TestName::ScadfPc)
    }
}

impl fmt::Display for TestName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestName::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown test '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    FirstGeneration,
    SecondGeneration,
    Combination,
}

impl Section {
    pub fn as_str(self) -> &'static str {
        match self {
            Section::FirstGeneration => "first_generation",
            Section::SecondGeneration => "second_generation",
            Section::Combination => "combination",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Section::FirstGeneration => "First-generation tests",
            Section::SecondGeneration => "Second-generation tests",
            Section::Combination => "P-value combination tests",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LagCriterion {
    #[default]
    Aic,
    /// Always use `max_lag` lags.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            other => Err(Error::Config(format!("unknown output format '{other}'"))),
        }
    }
}

/// Everything a run depends on. Relative paths are resolved against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: PathBuf,
    pub columns: ColumnMapping,
    pub inflation_modes: Vec<InflationMode>,
    pub benchmarks: Vec<Benchmark>,
    pub inflation_horizon: usize,
    pub leave_one_out: bool,
    pub window_start: Option<MonthIndex>,
    pub window_end: Option<MonthIndex>,
    pub tests: Vec<TestName>,
    pub max_lag: usize,
    pub lag_criterion: LagCriterion,
    /// Bartlett truncation lag; automatic when absent.
    pub lrv_bandwidth: Option<usize>,
    pub factors: usize,
    pub cd_threshold: f64,
    pub seed: u64,
    pub reps: usize,
    pub hansen_steps: usize,
    pub cache_dir: Option<PathBuf>,
    pub format: OutputFormat,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sim = SimSettings::default();
        Self {
            input: PathBuf::new(),
            columns: ColumnMapping::default(),
            inflation_modes: vec![InflationMode::ExAnte, InflationMode::ExPost],
            benchmarks: vec![Benchmark::EuroArea, Benchmark::GroupAverage],
            inflation_horizon: 12,
            leave_one_out: false,
            window_start: None,
            window_end: None,
            tests: TestName::ALL.to_vec(),
            max_lag: 5,
            lag_criterion: LagCriterion::Aic,
            lrv_bandwidth: None,
            factors: 1,
            cd_threshold: 0.10,
            seed: sim.seed,
            reps: sim.reps,
            hansen_steps: sim.hansen_steps,
            cache_dir: None,
            format: OutputFormat::Csv,
            out: PathBuf::from("report"),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses a config file and resolves its relative paths.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &Path| {
            if p.is_relative() {
                base.join(p)
            } else {
                p.to_path_buf()
            }
        };
        cfg.input = resolve(&cfg.input);
        cfg.out = resolve(&cfg.out);
        cfg.cache_dir = cfg.cache_dir.as_deref().map(resolve);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.input.as_os_str().is_empty() {
            return bad("input path is required".into());
        }
        if self.inflation_modes.is_empty() || self.benchmarks.is_empty() {
            return bad("at least one inflation mode and one benchmark are required".into());
        }
        if self.inflation_horizon == 0 {
            return bad("inflation_horizon must be positive".into());
        }
        let mut seen = BTreeSet::new();
        for t in &self.tests {
            if !seen.insert(*t) {
                return bad(format!("test '{t}' listed twice"));
            }
        }
        if self.reps < 10_000 {
            return bad(format!("reps must be at least 10000, got {}", self.reps));
        }
        if self.hansen_steps < 1000 {
            return bad(format!(
                "hansen_steps must be at least 1000, got {}",
                self.hansen_steps
            ));
        }
        if !(0.0..=1.0).contains(&self.cd_threshold) {
            return bad(format!("cd_threshold {} outside [0, 1]", self.cd_threshold));
        }
        if self.factors == 0 {
            return bad("factors must be at least 1".into());
        }
        match (self.window_start, self.window_end) {
            (Some(a), Some(b)) if a > b => return bad(format!("window {a}..{b} is empty")),
            (Some(_), None) | (None, Some(_)) => {
                return bad("window_start and window_end must be given together".into())
            }
            _ => {}
        }
        Ok(())
    }

    pub fn adf_spec(&self) -> AdfSpec {
        AdfSpec {
            deterministics: Deterministics::Constant,
            lag_selection: match self.lag_criterion {
                LagCriterion::Aic => LagSelection::Aic {
                    max_lag: self.max_lag,
                },
                LagCriterion::Fixed => LagSelection::Fixed(self.max_lag),
            },
        }
    }

    pub fn lrv_spec(&self) -> LrvSpec {
        match self.lrv_bandwidth {
            Some(m) => LrvSpec::fixed(m),
            None => LrvSpec {
                bandwidth: Bandwidth::Automatic,
                ..LrvSpec::default()
            },
        }
    }

    pub fn sim_settings(&self) -> SimSettings {
        SimSettings {
            reps: self.reps,
            seed: self.seed,
            hansen_steps: self.hansen_steps,
            ..SimSettings::default()
        }
    }

    pub fn battery_options(&self) -> BatteryOptions {
        BatteryOptions {
            spec: self.adf_spec(),
            lrv: self.lrv_spec(),
            cd_threshold: self.cd_threshold,
            factors: self.factors,
        }
    }

    fn rird_options(&self) -> RirdOptions {
        RirdOptions {
            horizon_months: self.inflation_horizon,
            leave_one_out: self.leave_one_out,
            window: self.window_start.zip(self.window_end),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryOptions {
    pub spec: AdfSpec,
    pub lrv: LrvSpec,
    pub cd_threshold: f64,
    pub factors: usize,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        RunConfig::default().battery_options()
    }
}

/// One line of a battery: a test's statistic, or why it could not be
/// computed.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryRow {
    pub test: TestName,
    pub label: String,
    pub outcome: std::result::Result<TestResult, String>,
}

/// Two-sided normal critical values.
const NORMAL_TWO_SIDED: [f64; 3] = [2.5758, 1.9600, 1.6449];

fn cd_result(ctx: &ComboContext) -> TestResult {
    TestResult::new(
        "CD",
        ctx.cd.cd_stat,
        Some(ctx.cd.p_value),
        NORMAL_TWO_SIDED,
        Tail::Both,
    )
}

/// Runs `tests` on one panel, sharing per-unit fits between tests. Rows come
/// back in canonical test order; a failing test yields an error row and does
/// not stop the others.
pub fn run_battery(
    panel: &Panel,
    tests: &[TestName],
    opts: &BatteryOptions,
    store: &TableStore,
) -> Vec<BatteryRow> {
    type Shared<T> = std::result::Result<T, String>;
    let msg = |e: Error| e.to_string();
    let wanted: BTreeSet<TestName> = tests.iter().copied().collect();
    let spec = opts.spec.with_deterministics(Deterministics::Constant);
    let mut rows = Vec::new();
    let mut push = |test: TestName, label: &str, outcome: Shared<TestResult>| {
        rows.push(BatteryRow {
            test,
            label: label.to_string(),
            outcome,
        });
    };

    let needs_adf = [TestName::Mw, TestName::Choi, TestName::Ips]
        .iter()
        .any(|t| wanted.contains(t));
    let adf: Shared<Vec<UnitAdf>> = if needs_adf {
        unit_adf(panel, &spec, store).map_err(msg)
    } else {
        Err("not computed".into())
    };
    let adf_p = || -> Shared<(Vec<f64>, Vec<UnitDiagnostic>)> {
        let units = adf.as_ref().map_err(Clone::clone)?;
        if units.len() < 2 {
            return Err(msg(Error::InvalidInput(
                "panel tests need at least two units".into(),
            )));
        }
        Ok((
            units.iter().map(|u| u.p_value).collect(),
            units.iter().map(UnitAdf::diagnostic).collect(),
        ))
    };

    let needs_ctx = wanted.iter().any(|t| t.section() == Section::Combination);
    let ctx: Shared<ComboContext> = if needs_ctx {
        combo_context(panel, &spec, store).map_err(msg)
    } else {
        Err("not computed".into())
    };
    let mut variants: Vec<(ComboVariant, Shared<Vec<UnitDiagnostic>>)> = Vec::new();
    for (v, p, s) in [
        (ComboVariant::Adf, TestName::Padf, TestName::Sadf),
        (ComboVariant::Cadf, TestName::Pcadf, TestName::Scadf),
        (ComboVariant::CadfPc, TestName::PcadfPc, TestName::ScadfPc),
    ] {
        if wanted.contains(&p) || wanted.contains(&s) {
            let units = ctx.as_ref().map_err(Clone::clone).and_then(|c| {
                if v == ComboVariant::CadfPc {
                    require_balanced(panel).map_err(msg)?;
                }
                unit_pvalues(panel, v, &spec, &opts.lrv, store, c).map_err(msg)
            });
            variants.push((v, units));
        }
    }
    let variant_units = |v: ComboVariant| -> Shared<Vec<UnitDiagnostic>> {
        variants
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, u)| u.clone())
            .expect("variant computed")
    };

    for test in TestName::ALL.into_iter().filter(|t| wanted.contains(t)) {
        match test {
            TestName::Mw => push(
                test,
                "MW",
                adf_p().map(|(p, d)| mw_from_pvalues(&p).with_units(d)),
            ),
            TestName::Choi => push(
                test,
                "Choi",
                adf_p().map(|(p, d)| choi_z_from_pvalues(&p).with_units(d)),
            ),
            TestName::Llc => push(
                test,
                "LLC",
                llc_test(panel, &spec, &opts.lrv, store).map_err(msg),
            ),
            TestName::Ips => push(
                test,
                "IPS",
                require_balanced(panel).map_err(msg).and_then(|_| {
                    let units = adf.as_ref().map_err(Clone::clone)?;
                    ips_from_units(units, store).map_err(msg)
                }),
            ),
            TestName::Mp => match moon_perron_test(panel, opts.factors, &opts.lrv) {
                Ok(mp) => {
                    push(test, "MP t_a*", Ok(mp.t_a));
                    push(test, "MP t_b*", Ok(mp.t_b));
                }
                Err(e) => {
                    let e = msg(e);
                    push(test, "MP t_a*", Err(e.clone()));
                    push(test, "MP t_b*", Err(e));
                }
            },
            TestName::Choi2006 => match choi2006_tests(panel, &spec, store) {
                Ok(c) => {
                    push(test, "Choi Pm", Ok(c.pm));
                    push(test, "Choi Z", Ok(c.z));
                    push(test, "Choi L*", Ok(c.l_star));
                }
                Err(e) => {
                    let e = msg(e);
                    for label in ["Choi Pm", "Choi Z", "Choi L*"] {
                        push(test, label, Err(e.clone()));
                    }
                }
            },
            TestName::Cips => push(test, "CIPS", cips_test(panel, &spec, store).map_err(msg)),
            TestName::Cd => push(
                test,
                "CD",
                ctx.as_ref().map(cd_result).map_err(Clone::clone),
            ),
            TestName::Padf | TestName::Pcadf | TestName::PcadfPc => {
                let v = match test {
                    TestName::Padf => ComboVariant::Adf,
                    TestName::Pcadf => ComboVariant::Cadf,
                    _ => ComboVariant::CadfPc,
                };
                let r = ctx.as_ref().map_err(Clone::clone).and_then(|c| {
                    pcadf_from(v, variant_units(v)?, c, opts.cd_threshold).map_err(msg)
                });
                push(test, &format!("p{}", v.suffix()), r);
            }
            TestName::Sadf | TestName::Scadf | TestName::ScadfPc => {
                let v = match test {
                    TestName::Sadf => ComboVariant::Adf,
                    TestName::Scadf => ComboVariant::Cadf,
                    _ => ComboVariant::CadfPc,
                };
                let r = variant_units(v).and_then(|u| scadf_from(v, u).map_err(msg));
                push(test, &format!("s{}", v.suffix()), r);
            }
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub mode: InflationMode,
    pub benchmark: Benchmark,
    pub row: BatteryRow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Effective configuration, after overrides.
    pub config: RunConfig,
    pub rows: Vec<ReportRow>,
    pub summaries: Vec<SummaryStats>,
    /// Where each distribution table came from (simulation settings or
    /// published values).
    pub provenance: Vec<String>,
    /// Per-run notes on cache hits, misses and discarded cache files. Kept
    /// out of the emitted files so that output does not depend on cache
    /// state.
    pub cache_log: Vec<String>,
    pub version: String,
}

/// Executes the configured battery for every (inflation mode, benchmark)
/// combination. Ingest failures abort the run; failures while building one
/// combination's panel or running one test are recorded as error rows.
pub fn run(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let mut store = TableStore::new(config.sim_settings());
    if let Some(dir) = &config.cache_dir {
        store = store.with_cache_dir(dir);
    }
    let series = load_csv(&config.input, &config.columns).map_err(|e| e.in_stage("ingest"))?;
    let opts = config.battery_options();
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &mode in &config.inflation_modes {
        for &benchmark in &config.benchmarks {
            let built = build_rird(&series, mode, benchmark, &config.rird_options())
                .and_then(|r| Ok((summary_stats(&r)?, r)))
                .map_err(|e| e.in_stage("rird"));
            match built {
                Ok((summary, rird)) => {
                    summaries.push(summary);
                    for row in run_battery(&rird.panel, &config.tests, &opts, &store) {
                        rows.push(ReportRow {
                            mode,
                            benchmark,
                            row,
                        });
                    }
                }
                Err(e) => {
                    for test in TestName::ALL
                        .into_iter()
                        .filter(|t| config.tests.contains(t))
                    {
                        rows.push(ReportRow {
                            mode,
                            benchmark,
                            row: BatteryRow {
                                test,
                                label: test.as_str().to_string(),
                                outcome: Err(e.to_string()),
                            },
                        });
                    }
                }
            }
        }
    }
    let mut provenance = Vec::new();
    let mut cache_log = Vec::new();
    for line in store.provenance_log() {
        match line.rsplit_once(" [") {
            Some((table, _)) if line.ends_with(']') => provenance.push(table.to_string()),
            _ => {}
        }
        cache_log.push(line);
    }
    provenance.dedup();
    Ok(Report {
        config: config.clone(),
        rows,
        summaries,
        provenance,
        cache_log,
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

/// Flat CSV form of one report row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub mode: String,
    pub benchmark: String,
    pub section: String,
    pub test: String,
    pub label: String,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub cv_1: Option<f64>,
    pub cv_5: Option<f64>,
    pub cv_10: Option<f64>,
    pub tail: String,
    pub dec_1: String,
    pub dec_5: String,
    pub dec_10: String,
    pub branch: String,
    pub cd_pvalue: Option<f64>,
    pub error: String,
}

impl ResultRecord {
    pub fn from_row(r: &ReportRow) -> Self {
        let base = |tail: String| ResultRecord {
            mode: r.mode.as_str().into(),
            benchmark: r.benchmark.as_str().into(),
            section: r.row.test.section().as_str().into(),
            test: r.row.test.as_str().into(),
            label: r.row.label.clone(),
            statistic: None,
            p_value: None,
            cv_1: None,
            cv_5: None,
            cv_10: None,
            tail,
            dec_1: String::new(),
            dec_5: String::new(),
            dec_10: String::new(),
            branch: String::new(),
            cd_pvalue: None,
            error: String::new(),
        };
        match &r.row.outcome {
            Ok(t) => ResultRecord {
                statistic: Some(t.statistic),
                p_value: t.p_value,
                cv_1: Some(t.critical_values[0]),
                cv_5: Some(t.critical_values[1]),
                cv_10: Some(t.critical_values[2]),
                dec_1: t.decisions[0].to_string(),
                dec_5: t.decisions[1].to_string(),
                dec_10: t.decisions[2].to_string(),
                branch: t
                    .combination
                    .map(|c| c.branch.as_str().to_string())
                    .unwrap_or_default(),
                cd_pvalue: t.combination.map(|c| c.cd_p_value),
                ..base(t.tail.as_str().into())
            },
            Err(e) => ResultRecord {
                error: e.clone(),
                ..base(String::new())
            },
        }
    }
}

pub fn result_records(report: &Report) -> Vec<ResultRecord> {
    report.rows.iter().map(ResultRecord::from_row).collect()
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

fn metadata_pairs(report: &Report) -> Vec<(String, String)> {
    let mut out = vec![("version".to_string(), report.version.clone())];
    let cfg: toml::Value = toml::Value::try_from(&report.config).expect("config serializes");
    if let toml::Value::Table(t) = cfg {
        for (k, v) in t {
            let v = match v {
                toml::Value::String(s) => s,
                other => other.to_string(),
            };
            out.push((format!("config.{k}"), v));
        }
    }
    let spec = report.config.adf_spec();
    out.push((
        "effective.adf_deterministics".into(),
        spec.deterministics.as_str().into(),
    ));
    out.push((
        "effective.lrv".into(),
        match report.config.lrv_bandwidth {
            Some(m) => format!("bartlett, fixed lag {m}"),
            None => "bartlett, lag floor(4 (T/100)^(2/9))".into(),
        },
    ));
    out.push((
        "effective.rho2_grid".into(),
        SimSettings::default()
            .rho2_grid
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(" "),
    ));
    for (k, line) in report.provenance.iter().enumerate() {
        out.push((format!("table.{k:03}"), line.clone()));
    }
    out
}

fn write_summary_csv(report: &Report, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["mode", "benchmark", "unit", "min", "max", "mean", "sd"])?;
    for s in &report.summaries {
        let rows = s
            .units
            .iter()
            .map(|(u, r)| (u.as_str(), r))
            .chain([("pooled", &s.pooled)]);
        for (u, r) in rows {
            w.write_record([
                s.mode.as_str(),
                s.benchmark.as_str(),
                u,
                &r.min.to_string(),
                &r.max.to_string(),
                &r.mean.to_string(),
                &r.sd.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the report into `dir` and returns the files written.
pub fn emit(report: &Report, format: OutputFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    match format {
        OutputFormat::Csv => {
            let results = dir.join("results.csv");
            let mut w = csv::Writer::from_path(&results)?;
            let records = result_records(report);
            if records.is_empty() {
                w.write_record([
                    "mode",
                    "benchmark",
                    "section",
                    "test",
                    "label",
                    "statistic",
                    "p_value",
                    "cv_1",
                    "cv_5",
                    "cv_10",
                    "tail",
                    "dec_1",
                    "dec_5",
                    "dec_10",
                    "branch",
                    "cd_pvalue",
                    "error",
                ])?;
            }
            for r in &records {
                w.serialize(r)?;
            }
            w.flush()?;
            let summary = dir.join("summary.csv");
            write_summary_csv(report, &summary)?;
            let meta = dir.join("metadata.csv");
            let mut w = csv::Writer::from_path(&meta)?;
            w.write_record(["key", "value"])?;
            for (k, v) in metadata_pairs(report) {
                w.write_record([k, v])?;
            }
            w.flush()?;
            Ok(vec![results, summary, meta])
        }
        OutputFormat::Markdown => {
            let path = dir.join("report.md");
            fs::write(&path, render_markdown(report))?;
            Ok(vec![path])
        }
    }
}

fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.4}")
    }
}

fn summary_cells(r: &SummaryRow) -> String {
    format!(
        "{} | {} | {} | {}",
        fmt_num(r.min),
        fmt_num(r.max),
        fmt_num(r.mean),
        fmt_num(r.sd)
    )
}

/// Markdown with one table per inflation mode and test generation: rows are
/// tests, columns the statistic under each benchmark followed by the
/// critical values.
pub fn render_markdown(report: &Report) -> String {
    let mut md = String::new();
    let cfg = &report.config;
    writeln!(md, "# Panel unit root report\n").unwrap();
    writeln!(md, "## Run metadata\n\n| key | value |\n|---|---|").unwrap();
    for (k, v) in metadata_pairs(report) {
        writeln!(md, "| {k} | {} |", v.replace('|', "\\|")).unwrap();
    }
    md.push('\n');

    for s in &report.summaries {
        writeln!(
            md,
            "## Summary statistics: {}, {}\n\n| unit | min | max | mean | sd |\n|---|---|---|---|---|",
            s.mode, s.benchmark
        )
        .unwrap();
        for (u, r) in &s.units {
            writeln!(md, "| {u} | {} |", summary_cells(r)).unwrap();
        }
        writeln!(md, "| pooled | {} |\n", summary_cells(&s.pooled)).unwrap();
    }

    let mut errors = Vec::new();
    for &mode in &cfg.inflation_modes {
        for section in [
            Section::FirstGeneration,
            Section::SecondGeneration,
            Section::Combination,
        ] {
            let rows: Vec<&ReportRow> = report
                .rows
                .iter()
                .filter(|r| r.mode == mode && r.row.test.section() == section)
                .collect();
            if rows.is_empty() {
                continue;
            }
            let mut labels: Vec<(TestName, String)> = Vec::new();
            for r in &rows {
                if !labels.iter().any(|(_, l)| *l == r.row.label) {
                    labels.push((r.row.test, r.row.label.clone()));
                }
            }
            let cell = |label: &str, b: Benchmark| {
                rows.iter()
                    .find(|r| r.row.label == label && r.benchmark == b)
                    .map(|r| &r.row.outcome)
            };
            let benches = &cfg.benchmarks;
            writeln!(md, "## {}: {}\n", section.title(), mode).unwrap();
            let with_p = section == Section::Combination;
            let mut header = String::from("| Test |");
            let mut rule = String::from("|---|");
            for b in benches {
                header += &format!(" {b} |");
                rule += "---|";
                if with_p {
                    header += &format!(" {b} p-value |");
                    rule += "---|";
                }
            }
            header += " 1% | 5% | 10% |";
            rule += "---|---|---|";
            let plain: Vec<_> = labels.iter().filter(|(t, _)| !t.is_simes()).collect();
            if !plain.is_empty() {
                writeln!(md, "{header}\n{rule}").unwrap();
            }
            for (_, label) in &plain {
                let mut line = format!("| {label} |");
                let mut cv = None;
                for &b in benches {
                    match cell(label, b) {
                        Some(Ok(t)) => {
                            cv.get_or_insert(t.critical_values);
                            line += &format!(" {} |", fmt_num(t.statistic));
                            if with_p {
                                let branch = t
                                    .combination
                                    .map(|c| format!(" ({})", c.branch.as_str()))
                                    .unwrap_or_default();
                                line +=
                                    &format!(" {}{branch} |", t.p_value.map_or("".into(), fmt_num));
                            }
                        }
                        Some(Err(e)) => {
                            errors.push(format!("{mode}, {b}, {label}: {e}"));
                            line += " error |";
                            if with_p {
                                line += " |";
                            }
                        }
                        None => {
                            line += " |";
                            if with_p {
                                line += " |";
                            }
                        }
                    }
                }
                match cv {
                    Some(c) => {
                        line += &format!(
                            " {} | {} | {} |",
                            fmt_num(c[0]),
                            fmt_num(c[1]),
                            fmt_num(c[2])
                        )
                    }
                    None => line += " | | |",
                }
                writeln!(md, "{line}").unwrap();
            }
            let simes: Vec<_> = labels.iter().filter(|(t, _)| t.is_simes()).collect();
            if !simes.is_empty() {
                md.push('\n');
                let mut header = String::from("| Test |");
                let mut rule = String::from("|---|");
                for b in benches {
                    for lvl in ["1%", "5%", "10%"] {
                        header += &format!(" {b} {lvl} |");
                        rule += "---|";
                    }
                }
                writeln!(md, "{header}\n{rule}").unwrap();
                for (_, label) in &simes {
                    let mut line = format!("| {label} |");
                    for &b in benches {
                        match cell(label, b) {
                            Some(Ok(t)) => {
                                for d in t.decisions {
                                    line += &format!(" {} |", d.as_true_false());
                                }
                            }
                            Some(Err(e)) => {
                                errors.push(format!("{mode}, {b}, {label}: {e}"));
                                line += " error | error | error |";
                            }
                            None => line += " | | |",
                        }
                    }
                    writeln!(md, "{line}").unwrap();
                }
            }
            md.push('\n');
        }
    }

    writeln!(md, "## Notes\n").unwrap();
    writeln!(
        md,
        "- MW, Choi and Choi Pm reject when above their critical values; LLC, IPS, MP, CIPS, Choi Z, Choi L* and the p-tests reject when below."
    )
    .unwrap();
    writeln!(
        md,
        "- CD is two-sided; a rejection signals cross-section dependence."
    )
    .unwrap();
    writeln!(
        md,
        "- For the Simes tests TRUE means the unit root null is not rejected at that level."
    )
    .unwrap();
    writeln!(
        md,
        "- The p-tests combine unit p-values with the inverse normal rule, switching to the correlation-corrected rule when the CD p-value is below {}; the branch is shown next to each p-value.",
        cfg.cd_threshold
    )
    .unwrap();
    for e in errors {
        writeln!(md, "- error: {e}").unwrap();
    }
    md
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_names_round_trip_in_canonical_order() {
        for t in TestName::ALL {
            assert_eq!(t.as_str().parse::<TestName>().unwrap(), t);
        }
        let mut sorted = TestName::ALL.to_vec();
        sorted.sort();
        assert_eq!(sorted, TestName::ALL.to_vec());
        assert!("kpss".parse::<TestName>().is_err());
    }

    #[test]
    fn sections() {
        assert_eq!(TestName::Ips.section(), Section::FirstGeneration);
        assert_eq!(TestName::Cips.section(), Section::SecondGeneration);
        assert_eq!(TestName::Cd.section(), Section::Combination);
        assert_eq!(TestName::ScadfPc.section(), Section::Combination);
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = RunConfig::from_toml_str("input = \"data.csv\"").unwrap();
        assert_eq!(cfg.tests, TestName::ALL.to_vec());
        assert_eq!(cfg.inflation_modes.len(), 2);
        assert_eq!(cfg.benchmarks.len(), 2);
        assert_eq!(cfg.max_lag, 5);
        assert_eq!(cfg.reps, 20_000);
        assert_eq!(cfg.cd_threshold, 0.10);
        cfg.validate().unwrap();
    }

    #[test]
    fn config_parses_all_fields() {
        let text = r#"
input = "x.csv"
inflation_modes = ["ex_post"]
benchmarks = ["group_average"]
tests = ["ips", "cd", "scadf_pc"]
max_lag = 3
lag_criterion = "fixed"
lrv_bandwidth = 2
factors = 2
cd_threshold = 0.05
seed = 7
reps = 12000
hansen_steps = 1500
format = "markdown"
leave_one_out = true
window_start = "2001-01"
window_end = "2005-12"

[columns]
date = "d"
country = "c"
variable = "v"
value = "x"
"#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(
            cfg.tests,
            vec![TestName::Ips, TestName::Cd, TestName::ScadfPc]
        );
        assert_eq!(cfg.adf_spec().lag_selection, LagSelection::Fixed(3));
        assert_eq!(cfg.lrv_spec(), LrvSpec::fixed(2));
        assert_eq!(cfg.format, OutputFormat::Markdown);
        assert_eq!(cfg.columns.country, "c");
        assert_eq!(cfg.window_start, Some(MonthIndex::new(2001, 1).unwrap()));
        let back = RunConfig::from_toml_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml_str("input = \"a\"\nreplications = 5").is_err());
    }

    #[test]
    fn validation_failures() {
        let ok = RunConfig {
            input: "a.csv".into(),
            ..RunConfig::default()
        };
        ok.validate().unwrap();
        let cases = [
            RunConfig {
                reps: 999,
                ..ok.clone()
            },
            RunConfig {
                hansen_steps: 10,
                ..ok.clone()
            },
            RunConfig {
                cd_threshold: 1.5,
                ..ok.clone()
            },
            RunConfig {
                factors: 0,
                ..ok.clone()
            },
            RunConfig {
                tests: vec![TestName::Mw, TestName::Mw],
                ..ok.clone()
            },
            RunConfig {
                benchmarks: vec![],
                ..ok.clone()
            },
            RunConfig {
                input: PathBuf::new(),
                ..ok.clone()
            },
            RunConfig {
                window_start: MonthIndex::new(2001, 1).ok(),
                ..ok.clone()
            },
            RunConfig {
                window_start: MonthIndex::new(2002, 1).ok(),
                window_end: MonthIndex::new(2001, 1).ok(),
                ..ok.clone()
            },
        ];
        for c in cases {
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
        }
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(
            &path,
            "input = \"data/x.csv\"\nout = \"res\"\ncache_dir = \"/abs/cache\"",
        )
        .unwrap();
        let cfg = RunConfig::from_file(&path).unwrap();
        assert_eq!(cfg.input, dir.path().join("data/x.csv"));
        assert_eq!(cfg.out, dir.path().join("res"));
        assert_eq!(cfg.cache_dir, Some(PathBuf::from("/abs/cache")));
    }

    #[test]
    fn output_format_parsing() {
        assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        assert_eq!(
            "md".parse::<OutputFormat>().unwrap(),
            OutputFormat::Markdown
        );
        assert!("json".parse::<OutputFormat>().is_err());
    }

    #[test]
    fn error_rows_become_error_records() {
        let row = ReportRow {
            mode: InflationMode::ExAnte,
            benchmark: Benchmark::EuroArea,
            row: BatteryRow {
                test: TestName::Llc,
                label: "LLC".into(),
                outcome: Err("boom".into()),
            },
        };
        let rec = ResultRecord::from_row(&row);
        assert_eq!(rec.error, "boom");
        assert_eq!(rec.statistic, None);
        assert_eq!(rec.section, "first_generation");
    }
}
