use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};

use panelur::dist::{simulate_df_quantiles, SimSettings, TableStore};
use panelur::report::{run_battery, BatteryOptions, TestName};
use panelur::synthetic::{generate, synthetic_panel, Dgp};
use panelur::{adf_fit, AdfSpec, Deterministics, LagSelection};

fn unit_regressions(c: &mut Criterion) {
    let y = generate(Dgp::RandomWalk, 1, 148, 1).unwrap().remove(0);
    let fixed = AdfSpec::fixed(Deterministics::Constant, 2);
    let aic = AdfSpec {
        deterministics: Deterministics::Constant,
        lag_selection: LagSelection::Aic { max_lag: 5 },
    };
    c.bench_function("adf_fit T=148 p=2", |b| {
        b.iter(|| adf_fit(black_box(&y), &fixed).unwrap())
    });
    c.bench_function("adf_fit T=148 aic<=5", |b| {
        b.iter(|| adf_fit(black_box(&y), &aic).unwrap())
    });
}

fn table_simulation(c: &mut Criterion) {
    let mut g = c.benchmark_group("tables");
    g.sample_size(10);
    g.bench_function("df_t constant T=148 10k reps", |b| {
        b.iter(|| simulate_df_quantiles(Deterministics::Constant, 148, 0, 10_000, 7).unwrap())
    });
    g.finish();
}

fn battery(c: &mut Criterion) {
    let panel = synthetic_panel(Dgp::Ar1 { rho: 0.8 }, 10, 148, 3).unwrap();
    let store = TableStore::new(SimSettings {
        reps: 10_000,
        ..SimSettings::default()
    });
    let opts = BatteryOptions::default();
    // Tables are simulated once here and served from memory afterwards.
    run_battery(&panel, &TestName::ALL, &opts, &store);
    let mut g = c.benchmark_group("battery");
    g.sample_size(10);
    g.bench_function("14 tests N=10 T=148", |b| {
        b.iter_batched(
            || panel.clone(),
            |p| run_battery(&p, &TestName::ALL, &opts, &store),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

criterion_group!(benches, unit_regressions, table_simulation, battery);
criterion_main!(benches);
