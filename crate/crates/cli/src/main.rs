use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use panelur::data::write_csv;
use panelur::dist::embedded::{CIPS_N10, CIPS_N10_UNITS};
use panelur::dist::{
    cache_file_name, cache_store, simulate_cips_quantiles, Family, QuantileTable, SimSettings,
    TableStore,
};
use panelur::report::{emit, run, OutputFormat, RunConfig};
use panelur::synthetic::{synthetic_macro, synthetic_panel, Dgp};
use panelur::{Deterministics, Variable};

/// Panel unit root tests for real interest rate differentials.
#[derive(Parser)]
#[command(name = "panelur", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Markdown => OutputFormat::Markdown,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Case {
    None,
    Constant,
}

impl From<Case> for Deterministics {
    fn from(c: Case) -> Self {
        match c {
            Case::None => Deterministics::None,
            Case::Constant => Deterministics::Constant,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured battery and write the report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Simulate a null distribution table and store it in a cache directory.
    SimulateTables {
        /// df_t, ips_moments, llc_adjustments, cips or hansen_cadf.
        #[arg(long)]
        family: String,
        /// Series length.
        #[arg(long, default_value_t = 148)]
        t: usize,
        /// Augmentation lag.
        #[arg(long, default_value_t = 0)]
        p: usize,
        /// Units (cips only).
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Case::Constant)]
        case: Case,
        #[arg(long, default_value_t = SimSettings::default().reps)]
        reps: usize,
        #[arg(long, default_value_t = SimSettings::default().seed)]
        seed: u64,
        /// Random walk steps for the CADF surface.
        #[arg(long, default_value_t = SimSettings::default().hansen_steps)]
        steps: usize,
        /// Cache directory to write into.
        #[arg(long, default_value = "cache")]
        out: PathBuf,
    },
    /// Write a synthetic panel, or synthetic CPI and rate data with --macro.
    GenSynthetic {
        /// random_walk, ar1[:rho], factor[:loading] or heterogeneous[:k[:rho]].
        #[arg(long)]
        dgp: String,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 148)]
        t: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Emit CPI and nominal rates in the input layout instead of the
        /// differentials themselves.
        #[arg(long = "macro")]
        macro_data: bool,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("panelur: error: {e}");
            for cause in e.chain().skip(1) {
                eprintln!("  caused by: {cause}");
            }
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            reps,
            out,
            format,
        } => {
            let mut cfg = RunConfig::from_file(&config).context("config")?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = reps {
                cfg.reps = r;
            }
            if let Some(o) = out {
                cfg.out = o;
            }
            if let Some(f) = format {
                cfg.format = f.into();
            }
            cfg.validate().context("config")?;
            let report = run(&cfg)?;
            for line in &report.cache_log {
                eprintln!("table: {line}");
            }
            let failed = report
                .rows
                .iter()
                .filter(|r| r.row.outcome.is_err())
                .count();
            let files = emit(&report, cfg.format, &cfg.out).context("emit")?;
            for f in files {
                println!("{}", f.display());
            }
            if failed > 0 {
                eprintln!("{failed} test row(s) failed; see the error column");
            }
            Ok(())
        }
        Command::SimulateTables {
            family,
            t,
            p,
            n,
            case,
            reps,
            seed,
            steps,
            out,
        } => simulate_tables(&family, t, p, n, case.into(), reps, seed, steps, out)
            .context("simulate-tables"),
        Command::GenSynthetic {
            dgp,
            n,
            t,
            seed,
            macro_data,
            out,
        } => gen_synthetic(&dgp, n, t, seed, macro_data, out).context("gen-synthetic"),
    }
}

fn print_cv(label: &str, cv: [f64; 3]) {
    println!(
        "{label}: 1% {:.4}  5% {:.4}  10% {:.4}",
        cv[0], cv[1], cv[2]
    );
}

#[allow(clippy::too_many_arguments)]
fn simulate_tables(
    family: &str,
    t: usize,
    p: usize,
    n: usize,
    case: Deterministics,
    reps: usize,
    seed: u64,
    steps: usize,
    out: PathBuf,
) -> Result<()> {
    let family: Family = family.parse()?;
    let settings = SimSettings {
        reps,
        seed,
        hansen_steps: steps,
        ..SimSettings::default()
    };
    let store = TableStore::new(settings).with_cache_dir(&out);
    match family {
        Family::DfT => {
            let tables = store.df_table(case, t, p)?;
            print_cv(
                &format!("df_t {}", tables[0].params_string()),
                tables[0].critical_values(),
            );
        }
        Family::IpsMoments => {
            let m = store.ips_moments(t, p)?;
            println!(
                "ips_moments t={t} p={p}: mean {:.4}  var {:.4}",
                m.mean, m.var
            );
        }
        Family::LlcAdjustments => {
            let a = store.llc_adjustments(t)?;
            println!(
                "llc_adjustments t={t}: mu_star {:.4}  sigma_star {:.4}",
                a.mu_star, a.sigma_star
            );
        }
        Family::Cips => {
            // The store serves published values for ten units; simulate
            // explicitly so the table can be compared against them.
            let table: QuantileTable = simulate_cips_quantiles(n, t, p, reps, seed)?;
            let name = cache_file_name(Family::Cips, &table.params_string(), seed, reps);
            std::fs::create_dir_all(&out)?;
            cache_store(std::slice::from_ref(&table), &out.join(name))?;
            print_cv(
                &format!("cips {}", table.params_string()),
                table.critical_values(),
            );
            if n == CIPS_N10_UNITS {
                print_cv("published (N=10)", CIPS_N10);
            }
        }
        Family::HansenCadf => {
            let s = store.hansen_surface(case)?;
            for (r2, table) in s.rho2.iter().zip(&s.tables) {
                print_cv(
                    &format!("hansen_cadf case={} rho2={r2}", case.as_str()),
                    table.critical_values(),
                );
            }
        }
    }
    for line in store.provenance_log() {
        eprintln!("table: {line}");
    }
    Ok(())
}

fn gen_synthetic(
    dgp: &str,
    n: usize,
    t: usize,
    seed: u64,
    macro_data: bool,
    out: Option<PathBuf>,
) -> Result<()> {
    let dgp: Dgp = dgp.parse()?;
    let sink: Box<dyn Write> = match &out {
        Some(path) => Box::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    if macro_data {
        write_csv(sink, &synthetic_macro(dgp, n, t, seed)?)?;
    } else {
        if n == 0 || t == 0 {
            bail!("n and t must be positive");
        }
        let panel = synthetic_panel(dgp, n, t, seed)?;
        write_csv(sink, &panel.to_series(Variable::Rird))?;
    }
    Ok(())
}
