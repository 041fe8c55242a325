//! Inductive route choice.
//!
//! Each agent holds `S` lookup-table strategies keyed by the last `M` hub
//! states and plays the one with the highest virtual score. After every step
//! all strategies are re-scored against the realized hub state, whether they
//! were played or not.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Cost;

/// Largest supported memory length. Tables hold `2^M` entries.
pub const MAX_MEMORY: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Action {
    Outside = 0,
    Inside = 1,
}

impl Action {
    /// `2·s − 1`: +1 for inside, −1 for outside.
    #[inline]
    pub fn polarity(self) -> i64 {
        match self {
            Action::Outside => -1,
            Action::Inside => 1,
        }
    }

    fn from_coin<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random_bool(0.5) {
            Action::Inside
        } else {
            Action::Outside
        }
    }
}

/// How the bias `K` of each strategy is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasMode {
    /// `K = 2^(M-1)`: every entry is a fair coin.
    Homogeneous,
    /// `K` uniform on `0..=2^M`, independently per strategy.
    Heterogeneous,
}

/// Number of distinct histories for memory `m`.
pub fn table_len(memory: u32) -> u32 {
    1 << memory
}

pub fn draw_bias<R: Rng + ?Sized>(mode: BiasMode, memory: u32, rng: &mut R) -> u32 {
    let p = table_len(memory);
    match mode {
        BiasMode::Homogeneous => p / 2,
        BiasMode::Heterogeneous => rng.random_range(0..=p),
    }
}

/// A map from `M`-bit hub history to a route.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    memory: u32,
    bias: u32,
    table: Vec<Action>,
}

impl Strategy {
    /// Each of the `2^M` entries is independently `Outside` with probability
    /// `K / 2^M`.
    pub fn generate<R: Rng + ?Sized>(memory: u32, bias: u32, rng: &mut R) -> Result<Self> {
        check_memory(memory)?;
        let p = table_len(memory);
        if bias > p {
            return Err(Error::InvalidBias { bias, table_len: p });
        }
        let table = (0..p)
            .map(|_| {
                if rng.random_range(0..p) < bias {
                    Action::Outside
                } else {
                    Action::Inside
                }
            })
            .collect();
        Ok(Self { memory, bias, table })
    }

    /// Strategy with a fixed table. `bias` is recorded as given.
    pub fn from_table(memory: u32, bias: u32, table: Vec<Action>) -> Result<Self> {
        check_memory(memory)?;
        if table.len() != table_len(memory) as usize {
            return Err(Error::InconsistentLengths(format!(
                "table has {} entries, memory {memory} needs {}",
                table.len(),
                table_len(memory)
            )));
        }
        Ok(Self { memory, bias, table })
    }

    pub fn memory(&self) -> u32 {
        self.memory
    }

    pub fn bias(&self) -> u32 {
        self.bias
    }

    pub fn table(&self) -> &[Action] {
        &self.table
    }

    #[inline]
    pub fn action(&self, history: usize) -> Action {
        self.table[history]
    }
}

fn check_memory(memory: u32) -> Result<()> {
    if memory == 0 || memory > MAX_MEMORY {
        return Err(Error::InvalidConfig(format!(
            "memory must be in 1..={MAX_MEMORY}, got {memory}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    /// Play the best-scoring strategy.
    Mrcg,
    /// Fair coin every step; strategies are ignored.
    Random,
}

/// The decision state of one agent.
#[derive(Clone, Debug)]
pub struct AgentMind {
    policy: Policy,
    strategies: Vec<Strategy>,
    scores: Vec<i64>,
}

impl AgentMind {
    pub fn mrcg(strategies: Vec<Strategy>) -> Self {
        let scores = vec![0; strategies.len()];
        Self {
            policy: Policy::Mrcg,
            strategies,
            scores,
        }
    }

    /// An MRCG mind with given starting scores, one per strategy.
    pub fn with_scores(strategies: Vec<Strategy>, scores: Vec<i64>) -> Result<Self> {
        if scores.len() != strategies.len() {
            return Err(Error::InconsistentLengths(format!(
                "{} strategies, {} scores",
                strategies.len(),
                scores.len()
            )));
        }
        Ok(Self {
            policy: Policy::Mrcg,
            strategies,
            scores,
        })
    }

    /// Draws `count` strategies with independently chosen biases.
    pub fn generate<R: Rng + ?Sized>(mode: BiasMode, memory: u32, count: usize, rng: &mut R) -> Result<Self> {
        let strategies = (0..count)
            .map(|_| {
                let bias = draw_bias(mode, memory, rng);
                Strategy::generate(memory, bias, rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::mrcg(strategies))
    }

    pub fn random() -> Self {
        Self {
            policy: Policy::Random,
            strategies: Vec::new(),
            scores: Vec::new(),
        }
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    pub fn scores(&self) -> &[i64] {
        &self.scores
    }

    /// Route for history `mu`. Among equally best-scoring strategies one is
    /// picked uniformly at random.
    pub fn choose_action<R: Rng + ?Sized>(&self, mu: usize, rng: &mut R) -> Action {
        match self.policy {
            Policy::Random => Action::from_coin(rng),
            Policy::Mrcg => self.strategies[self.pick_best(rng)].action(mu),
        }
    }

    /// Index of a best-scoring strategy, ties broken uniformly.
    pub fn pick_best<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut best = i64::MIN;
        let mut ties = 0usize;
        let mut first = 0usize;
        for (i, &score) in self.scores.iter().enumerate() {
            match score.cmp(&best) {
                Ordering::Greater => {
                    best = score;
                    ties = 1;
                    first = i;
                }
                Ordering::Equal => ties += 1,
                Ordering::Less => {}
            }
        }
        if ties <= 1 {
            return first;
        }
        let mut k = rng.random_range(0..ties);
        for (i, &score) in self.scores.iter().enumerate().skip(first) {
            if score == best {
                if k == 0 {
                    return i;
                }
                k -= 1;
            }
        }
        unreachable!("tie count mismatch")
    }

    /// Virtual score update: every strategy gains
    /// `sign(c_out − c_in) · (2·s(mu) − 1)`, with `sign(0) = 0`.
    pub fn update_scores(&mut self, mu: usize, c_out: Cost, c_in: Cost) {
        let sign = match c_out.cmp(&c_in) {
            Ordering::Greater => 1,
            Ordering::Equal => 0,
            Ordering::Less => -1,
        };
        self.update_with_sign(mu, sign);
    }

    /// Same as [`AgentMind::update_scores`] with the sign of the cost
    /// difference already known.
    #[inline]
    pub fn update_with_sign(&mut self, mu: usize, sign: i64) {
        if sign == 0 {
            return;
        }
        for (score, strategy) in self.scores.iter_mut().zip(&self.strategies) {
            *score += sign * strategy.action(mu).polarity();
        }
    }
}
