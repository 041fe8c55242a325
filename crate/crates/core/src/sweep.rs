//! Parameter sweeps and the experiment presets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{replicate, AgentMode, SimConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Number of hub links `λ`.
    Lambda,
    /// Memory length `M`.
    Memory,
    /// Network size `N`. Capacity keeps the base `L/N` ratio and `λ` is
    /// capped at `N`.
    Nodes,
    /// Hub capacity ratio `L/N`; `L = round(ratio·N)`.
    CapacityRatio,
}

impl SweepVariable {
    pub fn label(self) -> &'static str {
        match self {
            SweepVariable::Lambda => "hub links",
            SweepVariable::Memory => "memory length",
            SweepVariable::Nodes => "network size",
            SweepVariable::CapacityRatio => "capacity ratio L/N",
        }
    }
}

pub const DEFAULT_REPLICATIONS: usize = 1000;
pub const FAST_REPLICATIONS: usize = 50;

fn default_replications() -> usize {
    DEFAULT_REPLICATIONS
}

fn default_true() -> bool {
    true
}

/// A one-dimensional experiment grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: SimConfig,
    pub sweep_variable: SweepVariable,
    pub values: Vec<f64>,
    /// Agent modes to run at every point. Empty means `base.mode` only.
    #[serde(default)]
    pub modes: Vec<AgentMode>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_true")]
    pub ne_baseline: bool,
    /// `λ` values scanned per ratio by [`optimal_lambda`]; empty means
    /// `2..=N`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda_grid: Vec<usize>,
}

/// Averages at one sweep point for one agent mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub mode: AgentMode,
    pub avg_cost: f64,
    pub congestion_ratio: f64,
    pub avg_hub_users: f64,
    pub std_hub_users: f64,
    pub n_p: f64,
    pub ne_best: Option<f64>,
    pub ne_worst: Option<f64>,
}

fn integral(field: &'static str, v: f64) -> Result<usize> {
    if v.fract() != 0.0 || v < 0.0 || !v.is_finite() {
        return Err(Error::spec(field, format!("expected a non-negative integer, got {v}")));
    }
    Ok(v as usize)
}

fn round_capacity(ratio: f64, nodes: usize) -> usize {
    ((ratio * nodes as f64).round() as usize).clamp(1, nodes)
}

impl SweepSpec {
    pub fn modes(&self) -> Vec<AgentMode> {
        if self.modes.is_empty() {
            vec![self.base.mode]
        } else {
            self.modes.clone()
        }
    }

    /// The simulation config at one sweep value.
    pub fn config_at(&self, value: f64) -> Result<SimConfig> {
        let mut cfg = self.base.clone();
        match self.sweep_variable {
            SweepVariable::Lambda => cfg.network.hub_links = integral("values", value)?,
            SweepVariable::Memory => cfg.memory = integral("values", value)? as u32,
            SweepVariable::Nodes => {
                let nodes = integral("values", value)?;
                if nodes < 4 {
                    return Err(Error::spec(
                        "values",
                        format!("network size must be at least 4, got {nodes}"),
                    ));
                }
                let ratio = self.base.network.capacity as f64 / self.base.network.nodes as f64;
                cfg.network.nodes = nodes;
                cfg.network.capacity = round_capacity(ratio, nodes);
                cfg.network.hub_links = cfg.network.hub_links.min(nodes);
            }
            SweepVariable::CapacityRatio => {
                if !(value > 0.0 && value <= 1.0) {
                    return Err(Error::spec(
                        "values",
                        format!("capacity ratio must be in (0, 1], got {value}"),
                    ));
                }
                cfg.network.capacity = round_capacity(value, cfg.network.nodes);
            }
        }
        cfg.validate()
            .map_err(|e| Error::spec("values", format!("value {value}: {e}")))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate().map_err(|e| Error::spec("base", e.to_string()))?;
        if self.values.is_empty() {
            return Err(Error::spec("values", "at least one value is required"));
        }
        if self.replications == 0 {
            return Err(Error::spec("replications", "must be at least 1"));
        }
        for &v in &self.values {
            self.config_at(v)?;
        }
        Ok(())
    }
}

/// Runs every `(value, mode)` point and returns rows ordered by value, then
/// by the order of `modes`.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.values.len() * spec.modes().len());
    for &value in &spec.values {
        let cfg = spec.config_at(value)?;
        for mode in spec.modes() {
            let mut c = cfg.clone();
            c.mode = mode;
            let rep = replicate(&c, spec.replications)?;
            rows.push(SweepRow {
                value,
                mode,
                avg_cost: rep.avg_cost.mean,
                congestion_ratio: rep.congestion_ratio.mean,
                avg_hub_users: rep.avg_hub_users.mean,
                std_hub_users: rep.std_hub_users.mean,
                n_p: rep.potential.mean,
                ne_best: spec.ne_baseline.then_some(rep.ne_best.mean),
                ne_worst: spec.ne_baseline.then_some(rep.ne_worst.mean),
            });
        }
    }
    Ok(rows)
}

/// `λ` with the lowest mean cost; ties go to the smaller `λ`.
pub fn argmin_lambda(rows: &[SweepRow]) -> Option<&SweepRow> {
    rows.iter().fold(None, |best: Option<&SweepRow>, row| match best {
        Some(b) if b.avg_cost < row.avg_cost || (b.avg_cost == row.avg_cost && b.value <= row.value) => Some(b),
        _ => Some(row),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalLambda {
    pub capacity_ratio: f64,
    pub capacity: usize,
    pub lambda: usize,
    pub avg_cost: f64,
    /// The full cost-vs-`λ` curve at this ratio.
    pub curve: Vec<SweepRow>,
}

/// For each capacity ratio in `spec.values`, scans `λ` over
/// `spec.lambda_grid` (default `2..=N`) and reports the cost-minimizing `λ`.
/// Only `spec.base.mode` is run.
pub fn optimal_lambda(spec: &SweepSpec) -> Result<Vec<OptimalLambda>> {
    if spec.sweep_variable != SweepVariable::CapacityRatio {
        return Err(Error::spec(
            "sweep_variable",
            "optimal lambda needs a capacity_ratio sweep",
        ));
    }
    spec.validate()?;
    let nodes = spec.base.network.nodes;
    let grid: Vec<f64> = if spec.lambda_grid.is_empty() {
        (2..=nodes).map(|l| l as f64).collect()
    } else {
        spec.lambda_grid.iter().map(|&l| l as f64).collect()
    };
    spec.values
        .iter()
        .map(|&ratio| {
            let base = spec.config_at(ratio)?;
            let inner = SweepSpec {
                base: base.clone(),
                sweep_variable: SweepVariable::Lambda,
                values: grid.clone(),
                modes: vec![spec.base.mode],
                replications: spec.replications,
                ne_baseline: spec.ne_baseline,
                lambda_grid: Vec::new(),
            };
            let curve = run_sweep(&inner).map_err(|e| match e {
                Error::InvalidSpec { message, .. } => Error::spec("lambda_grid", message),
                other => other,
            })?;
            let best = argmin_lambda(&curve).expect("non-empty lambda grid");
            Ok(OptimalLambda {
                capacity_ratio: ratio,
                capacity: base.network.capacity,
                lambda: best.value as usize,
                avg_cost: best.avg_cost,
                curve: curve.clone(),
            })
        })
        .collect()
}

/// What a preset asks the runner to do with its specs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresetKind {
    Sweep,
    OptimalLambda,
}

/// Named experiment setups. Each entry is a file stem and its spec.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub kind: PresetKind,
    pub specs: Vec<(String, SweepSpec)>,
}

pub const PRESET_NAMES: [&str; 4] = ["baseline", "heterogeneous", "multi-scale", "optimal-lambda"];

fn lambda_range(nodes: usize) -> Vec<f64> {
    (2..=nodes).map(|l| l as f64).collect()
}

fn memory_family(prefix: &str, mode: AgentMode, seed: u64, replications: usize) -> Vec<(String, SweepSpec)> {
    [2u32, 4, 8]
        .into_iter()
        .map(|memory| {
            let mut base = SimConfig::baseline(2, memory);
            base.mode = mode;
            base.seed = seed;
            let modes = if memory == 2 {
                vec![mode, AgentMode::Random]
            } else {
                vec![mode]
            };
            (
                format!("{prefix}_m{memory}"),
                SweepSpec {
                    base,
                    sweep_variable: SweepVariable::Lambda,
                    values: lambda_range(100),
                    modes,
                    replications,
                    ne_baseline: true,
                    lambda_grid: Vec::new(),
                },
            )
        })
        .collect()
}

/// Builds a preset by name.
pub fn preset(name: &str, seed: u64, replications: usize) -> Result<Preset> {
    let preset = match name {
        // N = 100, L = 80, S = 8, M in {2, 4, 8}, λ = 2..=100
        "baseline" => Preset {
            name: "baseline",
            kind: PresetKind::Sweep,
            specs: memory_family("baseline", AgentMode::Homogeneous, seed, replications),
        },
        "heterogeneous" => Preset {
            name: "heterogeneous",
            kind: PresetKind::Sweep,
            specs: memory_family("heterogeneous", AgentMode::Heterogeneous, seed, replications),
        },
        // N in {20, 40, 60, 80}, L/N = 0.8, M = 2
        "multi-scale" => Preset {
            name: "multi-scale",
            kind: PresetKind::Sweep,
            specs: [20usize, 40, 60, 80]
                .into_iter()
                .map(|nodes| {
                    let mut base = SimConfig::baseline(2, 2);
                    base.network.nodes = nodes;
                    base.network.capacity = round_capacity(0.8, nodes);
                    base.seed = seed;
                    (
                        format!("multi_scale_n{nodes}"),
                        SweepSpec {
                            base,
                            sweep_variable: SweepVariable::Lambda,
                            values: lambda_range(nodes),
                            modes: Vec::new(),
                            replications,
                            ne_baseline: true,
                            lambda_grid: Vec::new(),
                        },
                    )
                })
                .collect(),
        },
        // N = 100, M = 2, L/N from 0.3 to 0.9
        "optimal-lambda" => {
            let mut base = SimConfig::baseline(2, 2);
            base.seed = seed;
            Preset {
                name: "optimal-lambda",
                kind: PresetKind::OptimalLambda,
                specs: vec![(
                    "optimal_lambda".to_string(),
                    SweepSpec {
                        base,
                        sweep_variable: SweepVariable::CapacityRatio,
                        values: vec![0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
                        modes: Vec::new(),
                        replications,
                        ne_baseline: true,
                        lambda_grid: Vec::new(),
                    },
                )],
            }
        }
        other => {
            return Err(Error::spec(
                "preset",
                format!("unknown preset `{other}`, expected one of {}", PRESET_NAMES.join(", ")),
            ))
        }
    };
    Ok(preset)
}
