use std::f64::consts::PI;

use jchsim::invariants::run_invariant_suite;
use jchsim::observables::PacketSpec;
use jchsim::scenario::*;
use jchsim::{Error, HubbardU};

fn small(id: ScenarioId) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(id);
    c.model.half_length = Some(40);
    c.model.lambda = Some(2.0);
    c
}

fn assert_clean(out: &ScenarioOutput) {
    let bad: Vec<_> = out.checks.iter().filter(|c| !c.passed).collect();
    assert!(bad.is_empty(), "{}: {bad:?}", out.scenario_id.as_str());
    for t in &out.tables {
        assert!(!t.rows.is_empty(), "empty table {}", t.name);
        assert!(t.rows.iter().all(|r| r.len() == t.columns.len()));
    }
}

#[test]
fn collision_on_a_short_chain() {
    let mut c = small(ScenarioId::CollisionFig5);
    c.packets = Some(vec![PacketSpec::new(-15, PI / 2.0, 0.5)]);
    c.u_variants = Some(vec![UValue::Number(0.0), UValue::Symbol(InfiniteSymbol::Infinite)]);
    c.t_max = Some(16.0);
    c.l0 = Some(5);
    let out = run_scenario(&c).unwrap();
    assert_clean(&out);
    let d = out.table("density_u_0").expect("density table");
    assert_eq!(d.columns, vec!["t", "l", "value"]);
    assert!(d.rows.iter().any(|r| r[1] == Cell::Text("e".into())));
    assert!(out.value("gamma_spin").unwrap() > 0.05);
    assert!(out.value("gamma_u_0").unwrap() < 0.01);
}

#[test]
fn gamma_scan_orders_results_by_k0() {
    let mut c = small(ScenarioId::GammaScanFig6);
    c.packets = Some(vec![PacketSpec::new(-15, 2.3, 0.5)]);
    c.k0_scan = Some(K0Scan { start: 0.5 * PI, end: 0.9 * PI, points: 3 });
    let out = run_scenario(&c).unwrap();
    assert_clean(&out);
    let t = out.table("gamma_scan").unwrap();
    let k: Vec<f64> = t.rows.iter().map(|r| if let Cell::Num(x) = r[0] { x } else { panic!() }).collect();
    assert!(k.windows(2).all(|w| w[0] < w[1]));
    assert!(out.value("peak_gamma").unwrap() > 0.0);
}

#[test]
fn longtime_and_two_packet_runs() {
    let mut c = small(ScenarioId::LongtimeFig7);
    c.packets = Some(vec![PacketSpec::new(-15, PI / 2.0, 0.5)]);
    c.t_max = Some(40.0);
    let out = run_scenario(&c).unwrap();
    assert_clean(&out);
    assert!(out.summary.keys().any(|k| k.starts_with("trailing_avg_")));

    let mut c = small(ScenarioId::RamanFig8);
    c.packets = Some(vec![PacketSpec::new(-15, PI / 3.0, 0.5), PacketSpec::new(15, -PI / 3.0, 0.5)]);
    c.channel_every = Some(20);
    let out = run_scenario(&c).unwrap();
    assert_clean(&out);
    assert!(out.value("c1_final").unwrap() > out.value("c1_initial").unwrap());
    assert!(out.value("witness_final").unwrap() > 0.0);

    let mut c = small(ScenarioId::PhotonTrain);
    c.packets = Some(vec![PacketSpec::new(-12, PI / 3.0, 0.5)]);
    let out = run_scenario(&c).unwrap();
    assert_clean(&out);
    assert!(out.value("witness_final").unwrap() < 1e-3);
}

#[test]
fn config_json_round_trip() {
    let mut c = small(ScenarioId::CollisionFig5);
    c.u_variants = Some(vec![UValue::Number(-10.0), UValue::Symbol(InfiniteSymbol::Infinite)]);
    c.packets = Some(vec![PacketSpec::new(-15, PI / 2.0, 0.5)]);
    c.t_max = Some(20.0);
    c.format = Some(OutputFormat::Json);
    let back = ScenarioConfig::from_json(&c.to_json()).unwrap();
    assert_eq!(back, c);
    assert_eq!(back.resolve().unwrap().u_variants, vec![HubbardU::Finite(-10.0), HubbardU::Infinite]);
    let r = c.resolve().unwrap();
    let echo: ResolvedScenario = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(echo, r);
}

#[test]
fn bad_configs_are_validation_errors() {
    for text in [
        r#"{"scenario_id":"raman_fig8","extra":true}"#,
        r#"{"scenario_id":"no_such_scenario"}"#,
        r#"{"scenario_id":"raman_fig8","tolerance":{"krylov":1e-9}}"#,
        r#"not json"#,
    ] {
        let e = ScenarioConfig::from_json(text).unwrap_err();
        assert!(matches!(e, Error::Validation { .. }), "{text}: {e}");
        assert!(!e.is_numerical());
    }
    let mut c = small(ScenarioId::RamanFig8);
    c.l0 = Some(40);
    assert!(matches!(c.resolve(), Err(Error::Validation { .. })));
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let mut t = small(ScenarioId::CollisionFig5);
    t.packets = Some(vec![PacketSpec::new(-15, PI / 2.0, 0.5)]);
    t.u_variants = Some(vec![UValue::Number(0.0)]);
    t.t_max = Some(8.0);
    let values = [1.8, 2.0, 2.5];
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| merge_sweep("lambda", &sweep(&t, "lambda", &values).unwrap()))
    };
    let (one, three) = (run(1), run(3));
    assert_eq!(one, three);
    assert_eq!(one.rows.len(), 3);
    assert_eq!(one.columns[0], "lambda");
    assert!(merge_sweep("lambda", &sweep(&t, "lambda", &[]).unwrap()).rows.is_empty());
}

#[test]
fn invariant_suite_passes() {
    let r = run_invariant_suite().unwrap();
    assert!(r.passed, "{:?}", r.failures);
    assert!(r.checks.len() > 40);
}
