//! Discrete-time game loop and the run-level measures.
//!
//! One step: every agent picks a route from the current history, the hub
//! state is resolved from the number of inside users, everybody pays the
//! realized cost, all strategies are re-scored and the new hub state is
//! shifted into the history.

use std::io::Write;

use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{table_len, Action, AgentMind, BiasMode, MAX_MEMORY};
use crate::equilibrium::{self, NeResult};
use crate::error::{Error, Result};
use crate::network::{price_agents, Cost, Network, NetworkConfig, OdPair, PricedAgent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentMode {
    Homogeneous,
    Heterogeneous,
    Random,
}

impl AgentMode {
    pub const ALL: [AgentMode; 3] = [AgentMode::Homogeneous, AgentMode::Heterogeneous, AgentMode::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentMode::Homogeneous => "homogeneous",
            AgentMode::Heterogeneous => "heterogeneous",
            AgentMode::Random => "random",
        }
    }

    fn bias_mode(self) -> Option<BiasMode> {
        match self {
            AgentMode::Homogeneous => Some(BiasMode::Homogeneous),
            AgentMode::Heterogeneous => Some(BiasMode::Heterogeneous),
            AgentMode::Random => None,
        }
    }
}

impl std::fmt::Display for AgentMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AgentMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "homogeneous" => Ok(AgentMode::Homogeneous),
            "heterogeneous" => Ok(AgentMode::Heterogeneous),
            "random" => Ok(AgentMode::Random),
            other => Err(format!("unknown agent mode `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub network: NetworkConfig,
    /// History length `M`.
    pub memory: u32,
    /// Strategies per agent `S`.
    pub strategies: usize,
    pub mode: AgentMode,
    /// Total number of steps `T`.
    pub steps: usize,
    /// Leading steps excluded from the measures.
    pub warmup: usize,
    pub seed: u64,
}

impl SimConfig {
    /// `N = 100`, `L = 80`, `S = 8`, homogeneous, 1000 steps of which the
    /// first 500 are warm-up.
    pub fn baseline(hub_links: usize, memory: u32) -> Self {
        Self {
            network: NetworkConfig::new(100, hub_links, 80),
            memory,
            strategies: 8,
            mode: AgentMode::Homogeneous,
            steps: 1000,
            warmup: 500,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        if self.memory == 0 || self.memory > MAX_MEMORY {
            return Err(Error::InvalidConfig(format!(
                "memory must be in 1..={MAX_MEMORY}, got {}",
                self.memory
            )));
        }
        if self.strategies == 0 {
            return Err(Error::InvalidConfig("strategies must be positive".into()));
        }
        if self.warmup >= self.steps {
            return Err(Error::InvalidConfig(format!(
                "warmup ({}) must be smaller than steps ({})",
                self.warmup, self.steps
            )));
        }
        Ok(())
    }
}

/// What happened at one step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepRecord {
    /// 1-based step index.
    pub t: usize,
    /// Number of inside-route users `N_in(t)`.
    pub n_in: usize,
    /// Hub state `h(t)`: true iff `n_in > L`.
    pub congested: bool,
    /// Sum of the realized costs of all agents.
    pub total_cost: Cost,
}

/// Run-level measures over the measurement window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Metrics {
    /// Mean realized cost per agent and step.
    pub avg_cost: f64,
    /// Fraction of measured steps with a congested hub.
    pub congestion_ratio: f64,
    /// Mean of `N_in(t)`.
    pub avg_hub_users: f64,
    /// Population standard deviation of `N_in(t)`.
    pub std_hub_users: f64,
    /// Number of potential hub users `N_p`.
    pub potential: usize,
}

/// Computes [`Metrics`] from the steps with `t > warmup`.
pub fn measure(trace: &[StepRecord], warmup: usize, agents: usize, potential: usize) -> Metrics {
    let window: Vec<&StepRecord> = trace.iter().filter(|r| r.t > warmup).collect();
    let steps = window.len() as u128;
    if steps == 0 || agents == 0 {
        return Metrics {
            avg_cost: 0.0,
            congestion_ratio: 0.0,
            avg_hub_users: 0.0,
            std_hub_users: 0.0,
            potential,
        };
    }
    let cost: Cost = window.iter().map(|r| r.total_cost).sum();
    let congested = window.iter().filter(|r| r.congested).count();
    let sum: u128 = window.iter().map(|r| r.n_in as u128).sum();
    let sum_sq: u128 = window.iter().map(|r| (r.n_in as u128).pow(2)).sum();
    // T²·var = T·Σx² − (Σx)², exact in integers
    let scaled_var = steps * sum_sq - sum * sum;
    Metrics {
        avg_cost: (cost / (steps as i64 * agents as i64)).to_f64().unwrap_or(f64::NAN),
        congestion_ratio: congested as f64 / steps as f64,
        avg_hub_users: sum as f64 / steps as f64,
        std_hub_users: (scaled_var as f64).sqrt() / steps as f64,
        potential,
    }
}

/// Per-agent costs as integers in units of `1/scale`.
#[derive(Clone, Copy, Debug)]
struct ScaledCosts {
    outside: i64,
    inside: [i64; 2],
    /// `sign(C_out − C_in)` for a free and a congested hub.
    sign: [i64; 2],
}

/// State of one run.
#[derive(Debug)]
pub struct Simulation {
    cfg: SimConfig,
    network: Network,
    agents: Vec<PricedAgent>,
    minds: Vec<AgentMind>,
    ne: NeResult,
    scale: i64,
    scaled: Vec<ScaledCosts>,
    history: usize,
    t: usize,
    rng: ChaCha8Rng,
    actions: Vec<Action>,
}

impl Simulation {
    /// Draws destinations, strategies and the initial history from `cfg.seed`.
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let network = Network::build(&cfg.network)?;
        let ods = network.assign_destinations(&mut rng);
        let minds = (0..ods.len())
            .map(|_| match cfg.mode.bias_mode() {
                Some(mode) => AgentMind::generate(mode, cfg.memory, cfg.strategies, &mut rng),
                None => Ok(AgentMind::random()),
            })
            .collect::<Result<Vec<_>>>()?;
        let history = rng.random_range(0..table_len(cfg.memory) as usize);
        Self::assemble(cfg, network, &ods, minds, history, rng)
    }

    /// Run with explicit destinations, minds and initial history. The RNG
    /// (used for tie-breaking and random agents) is still seeded from `cfg`.
    pub fn with_parts(cfg: &SimConfig, ods: &[OdPair], minds: Vec<AgentMind>, history: usize) -> Result<Self> {
        cfg.validate()?;
        let network = Network::build(&cfg.network)?;
        if ods.len() != network.nodes() || minds.len() != ods.len() {
            return Err(Error::InconsistentLengths(format!(
                "{} nodes, {} OD pairs, {} agents",
                network.nodes(),
                ods.len(),
                minds.len()
            )));
        }
        if history >= table_len(cfg.memory) as usize {
            return Err(Error::InvalidConfig(format!(
                "initial history {history} does not fit in {} bits",
                cfg.memory
            )));
        }
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Self::assemble(cfg, network, ods, minds, history, rng)
    }

    fn assemble(
        cfg: &SimConfig,
        network: Network,
        ods: &[OdPair],
        minds: Vec<AgentMind>,
        history: usize,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        let agents = price_agents(&network, ods, &cfg.network)?;
        let ne = equilibrium::solve(&agents, cfg.network.capacity)?;
        let scale = cfg.network.alpha.denom().lcm(cfg.network.beta.denom());
        let to_scaled = |c: Cost| (c * scale).to_integer();
        let scaled = agents
            .iter()
            .map(|a| {
                let outside = to_scaled(a.outside);
                let inside = [to_scaled(a.inside_free), to_scaled(a.inside_congested)];
                ScaledCosts {
                    outside,
                    inside,
                    sign: inside.map(|c| (outside - c).signum()),
                }
            })
            .collect();
        Ok(Self {
            cfg: cfg.clone(),
            network,
            actions: vec![Action::Outside; agents.len()],
            agents,
            minds,
            ne,
            scale,
            scaled,
            history,
            t: 0,
            rng,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn agents(&self) -> &[PricedAgent] {
        &self.agents
    }

    pub fn minds(&self) -> &[AgentMind] {
        &self.minds
    }

    /// Current history `μ` as an integer; the most recent state is the
    /// lowest bit.
    pub fn history(&self) -> usize {
        self.history
    }

    /// Routes chosen at the last step.
    pub fn last_actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn equilibrium(&self) -> NeResult {
        self.ne
    }

    /// Number of steps taken so far.
    pub fn time(&self) -> usize {
        self.t
    }

    pub fn step(&mut self) -> StepRecord {
        let mu = self.history;
        for (action, mind) in self.actions.iter_mut().zip(&self.minds) {
            *action = mind.choose_action(mu, &mut self.rng);
        }
        let n_in = self.actions.iter().filter(|&&a| a == Action::Inside).count();
        let congested = n_in > self.cfg.network.capacity;
        let h = congested as usize;

        let mut total = 0i64;
        for ((mind, &action), costs) in self.minds.iter_mut().zip(&self.actions).zip(&self.scaled) {
            total += match action {
                Action::Outside => costs.outside,
                Action::Inside => costs.inside[h],
            };
            mind.update_with_sign(mu, costs.sign[h]);
        }

        let mask = table_len(self.cfg.memory) as usize - 1;
        self.history = ((mu << 1) | h) & mask;
        self.t += 1;
        StepRecord {
            t: self.t,
            n_in,
            congested,
            total_cost: Cost::new(total, self.scale),
        }
    }

    /// Runs the remaining steps and returns the full trace.
    pub fn run_to_end(&mut self) -> Vec<StepRecord> {
        let remaining = self.cfg.steps.saturating_sub(self.t);
        (0..remaining).map(|_| self.step()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub metrics: Metrics,
    pub equilibrium: NeResult,
    pub trace: Option<Vec<StepRecord>>,
}

/// Executes one full run. The trace covers all steps, including warm-up.
pub fn run(cfg: &SimConfig, keep_trace: bool) -> Result<RunOutput> {
    let mut sim = Simulation::new(cfg)?;
    let trace = sim.run_to_end();
    let metrics = measure(&trace, cfg.warmup, sim.agents().len(), sim.equilibrium().potential);
    Ok(RunOutput {
        metrics,
        equilibrium: sim.equilibrium(),
        trace: keep_trace.then_some(trace),
    })
}

/// Sample mean and standard error of the mean.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Self::default();
        }
        let mean = xs.iter().sum::<f64>() / n;
        let std_err = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        Self { mean, std_err }
    }
}

/// Averages over independent runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Replicates {
    pub runs: usize,
    pub avg_cost: Estimate,
    pub congestion_ratio: Estimate,
    pub avg_hub_users: Estimate,
    pub std_hub_users: Estimate,
    pub potential: Estimate,
    pub ne_best: Estimate,
    pub ne_worst: Estimate,
}

impl Replicates {
    /// Aggregates per-run results. The sums run in the order given, so a
    /// fixed input order gives bit-identical output.
    pub fn from_runs(runs: &[(Metrics, NeResult)]) -> Self {
        let column =
            |f: &dyn Fn(&(Metrics, NeResult)) -> f64| Estimate::from_samples(&runs.iter().map(f).collect::<Vec<_>>());
        let ratio = |c: Cost| c.to_f64().unwrap_or(f64::NAN);
        Self {
            runs: runs.len(),
            avg_cost: column(&|r| r.0.avg_cost),
            congestion_ratio: column(&|r| r.0.congestion_ratio),
            avg_hub_users: column(&|r| r.0.avg_hub_users),
            std_hub_users: column(&|r| r.0.std_hub_users),
            potential: column(&|r| r.0.potential as f64),
            ne_best: column(&|r| ratio(r.1.best)),
            ne_worst: column(&|r| ratio(r.1.worst)),
        }
    }
}

/// `runs` independent runs with seeds `cfg.seed + 0 .. cfg.seed + runs`,
/// executed in parallel and aggregated in seed order.
pub fn replicate(cfg: &SimConfig, runs: usize) -> Result<Replicates> {
    if runs == 0 {
        return Err(Error::InvalidConfig("at least one replication is required".into()));
    }
    cfg.validate()?;
    let results = (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let mut c = cfg.clone();
            c.seed = cfg.seed.wrapping_add(i);
            run(&c, false).map(|out| (out.metrics, out.equilibrium))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Replicates::from_runs(&results))
}

/// Writes `t,n_in,h,total_cost` rows, one per step.
pub fn write_trace_csv<W: Write>(trace: &[StepRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["t", "n_in", "h", "total_cost"])?;
    for r in trace {
        w.write_record([
            r.t.to_string(),
            r.n_in.to_string(),
            (r.congested as u8).to_string(),
            r.total_cost.to_f64().unwrap_or(f64::NAN).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
