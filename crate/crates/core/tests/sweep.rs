use mrcg::error::Error;
use mrcg::sim::{run, AgentMode, SimConfig};
use mrcg::sweep::*;

fn tiny(variable: SweepVariable, values: Vec<f64>) -> SweepSpec {
    let mut base = SimConfig::baseline(4, 2);
    base.network.nodes = 20;
    base.network.capacity = 16;
    base.steps = 60;
    base.warmup = 30;
    SweepSpec {
        base,
        sweep_variable: variable,
        values,
        modes: Vec::new(),
        replications: 2,
        ne_baseline: true,
        lambda_grid: Vec::new(),
    }
}

#[test]
fn point_configs() {
    let spec = tiny(SweepVariable::Nodes, vec![40.0]);
    let cfg = spec.config_at(40.0).unwrap();
    assert_eq!(
        (cfg.network.nodes, cfg.network.capacity, cfg.network.hub_links),
        (40, 32, 4)
    );

    let spec = tiny(SweepVariable::CapacityRatio, vec![0.3]);
    assert_eq!(spec.config_at(0.3).unwrap().network.capacity, 6);

    let spec = tiny(SweepVariable::Memory, vec![3.0]);
    assert_eq!(spec.config_at(3.0).unwrap().memory, 3);
}

#[test]
fn invalid_specs_name_the_field() {
    let spec = tiny(SweepVariable::Lambda, vec![]);
    assert!(matches!(
        spec.validate(),
        Err(Error::InvalidSpec { field: "values", .. })
    ));

    let spec = tiny(SweepVariable::Lambda, vec![2.5]);
    assert!(matches!(
        spec.validate(),
        Err(Error::InvalidSpec { field: "values", .. })
    ));

    let spec = tiny(SweepVariable::Lambda, vec![21.0]);
    let err = spec.validate().unwrap_err();
    assert!(matches!(err, Error::InvalidSpec { field: "values", .. }));
    assert!(err.to_string().contains("hub_links"), "{err}");

    let mut spec = tiny(SweepVariable::Lambda, vec![3.0]);
    spec.replications = 0;
    assert!(matches!(
        spec.validate(),
        Err(Error::InvalidSpec {
            field: "replications",
            ..
        })
    ));

    let spec = tiny(SweepVariable::Lambda, vec![3.0]);
    assert!(matches!(
        optimal_lambda(&spec),
        Err(Error::InvalidSpec {
            field: "sweep_variable",
            ..
        })
    ));
    assert!(preset("nope", 0, 1).is_err());
}

#[test]
fn single_point_single_run_matches_run() {
    let mut spec = tiny(SweepVariable::Lambda, vec![5.0]);
    spec.replications = 1;
    let rows = run_sweep(&spec).unwrap();
    assert_eq!(rows.len(), 1);
    let mut cfg = spec.base.clone();
    cfg.network.hub_links = 5;
    let out = run(&cfg, false).unwrap();
    assert_eq!(rows[0].avg_cost, out.metrics.avg_cost);
    assert_eq!(rows[0].congestion_ratio, out.metrics.congestion_ratio);
    assert_eq!(rows[0].std_hub_users, out.metrics.std_hub_users);
    assert_eq!(rows[0].n_p, out.metrics.potential as f64);
}

#[test]
fn rows_follow_value_then_mode_order() {
    let mut spec = tiny(SweepVariable::Lambda, vec![6.0, 2.0]);
    spec.modes = vec![AgentMode::Random, AgentMode::Homogeneous];
    let rows = run_sweep(&spec).unwrap();
    let keys: Vec<(f64, AgentMode)> = rows.iter().map(|r| (r.value, r.mode)).collect();
    assert_eq!(
        keys,
        vec![
            (6.0, AgentMode::Random),
            (6.0, AgentMode::Homogeneous),
            (2.0, AgentMode::Random),
            (2.0, AgentMode::Homogeneous)
        ]
    );
    for r in &rows {
        assert!(r.ne_best.unwrap() <= r.ne_worst.unwrap());
        assert!((0.0..=1.0).contains(&r.congestion_ratio));
        assert!(r.std_hub_users >= 0.0 && r.avg_hub_users <= 20.0);
    }
}

#[test]
fn baseline_off_leaves_ne_columns_empty() {
    let mut spec = tiny(SweepVariable::Lambda, vec![3.0]);
    spec.ne_baseline = false;
    let rows = run_sweep(&spec).unwrap();
    assert_eq!(rows[0].ne_best, None);
}

fn row(value: f64, cost: f64) -> SweepRow {
    SweepRow {
        value,
        mode: AgentMode::Homogeneous,
        avg_cost: cost,
        congestion_ratio: 0.0,
        avg_hub_users: 0.0,
        std_hub_users: 0.0,
        n_p: 0.0,
        ne_best: None,
        ne_worst: None,
    }
}

#[test]
fn argmin_prefers_smaller_lambda_on_ties() {
    let rows = vec![row(5.0, 2.0), row(3.0, 2.0), row(7.0, 1.0), row(4.0, 1.0)];
    assert_eq!(argmin_lambda(&rows).unwrap().value, 4.0);
    assert_eq!(argmin_lambda(&rows[..1]).unwrap().value, 5.0);
    assert!(argmin_lambda(&[]).is_none());
}

#[test]
fn optimal_lambda_on_a_one_point_grid() {
    let mut spec = tiny(SweepVariable::CapacityRatio, vec![0.5, 0.9]);
    spec.lambda_grid = vec![6];
    let table = optimal_lambda(&spec).unwrap();
    assert_eq!(table.len(), 2);
    assert!(table.iter().all(|t| t.lambda == 6 && t.curve.len() == 1));
    assert_eq!(table[0].capacity, 10);
}

#[test]
fn presets_are_valid() {
    for name in PRESET_NAMES {
        let p = preset(name, 1, 3).unwrap();
        assert!(!p.specs.is_empty());
        for (_, spec) in &p.specs {
            spec.validate().unwrap();
            assert_eq!(spec.replications, 3);
            assert_eq!(spec.base.seed, 1);
        }
    }
    let ms = preset("multi-scale", 0, 1).unwrap();
    let sizes: Vec<(usize, usize)> = ms
        .specs
        .iter()
        .map(|(_, s)| (s.base.network.nodes, s.base.network.capacity))
        .collect();
    assert_eq!(sizes, vec![(20, 16), (40, 32), (60, 48), (80, 64)]);
}
