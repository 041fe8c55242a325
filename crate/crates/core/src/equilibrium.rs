//! Nash-equilibrium baseline.
//!
//! Under equilibrium the hub never congests: if there are at most `L`
//! potential users (agents strictly better off inside on a free hub) they all
//! go inside, otherwise exactly `L` of them do. The best allocation admits
//! the `L` agents with the largest advantage, the worst one the `L` with the
//! smallest positive advantage.

use std::cmp::Reverse;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::network::{price_agents, Cost, Network, NetworkConfig, OdPair, PricedAgent};

/// `l = C_out − C_in` on a free hub for one agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostAdvantage {
    pub agent: usize,
    pub advantage: Cost,
}

impl CostAdvantage {
    /// Strictly positive advantage. Indifferent agents (`l = 0`) do not count.
    pub fn is_potential(&self) -> bool {
        self.advantage.is_positive()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NeResult {
    /// Number of potential hub users `N_p`.
    pub potential: usize,
    /// Average cost per agent under the best equilibrium allocation.
    pub best: Cost,
    /// Average cost per agent under the worst equilibrium allocation.
    pub worst: Cost,
}

pub fn advantages(agents: &[PricedAgent]) -> Vec<CostAdvantage> {
    agents
        .iter()
        .enumerate()
        .map(|(agent, p)| CostAdvantage {
            agent,
            advantage: p.advantage(),
        })
        .collect()
}

pub fn potential_count(advantages: &[CostAdvantage]) -> usize {
    advantages.iter().filter(|a| a.is_potential()).count()
}

/// Best and worst equilibrium average costs.
///
/// `outside[n]` and `inside_free[n]` are the costs of agent `n`; the
/// advantages may come in any order and are ranked here by decreasing `l`,
/// ties by agent index.
///
/// Assumes `β > 1`, so a congested hub always costs more than the ring. With
/// `β ≤ 1` overfilled allocations can also be equilibria and the result no
/// longer bounds them.
pub fn ne_costs(
    advantages: &[CostAdvantage],
    outside: &[Cost],
    inside_free: &[Cost],
    capacity: usize,
) -> Result<NeResult> {
    let n = advantages.len();
    if outside.len() != n || inside_free.len() != n {
        return Err(Error::InconsistentLengths(format!(
            "{n} advantages, {} outside costs, {} inside costs",
            outside.len(),
            inside_free.len()
        )));
    }
    if n == 0 {
        return Err(Error::InconsistentLengths("no agents".into()));
    }
    let mut seen = vec![false; n];
    for a in advantages {
        if a.agent >= n || std::mem::replace(&mut seen[a.agent], true) {
            return Err(Error::InconsistentLengths(format!(
                "agent index {} is out of range or repeated",
                a.agent
            )));
        }
    }

    let mut ranked: Vec<&CostAdvantage> = advantages.iter().collect();
    ranked.sort_by_key(|a| (Reverse(a.advantage), a.agent));

    let potential = potential_count(advantages);
    let admitted = potential.min(capacity);
    let turned_away = potential - admitted;

    // best: ranks [0, admitted) inside
    let best: Cost = ranked
        .iter()
        .enumerate()
        .map(|(rank, a)| {
            if rank < admitted {
                inside_free[a.agent]
            } else {
                outside[a.agent]
            }
        })
        .sum();
    // worst: ranks [turned_away, potential) inside
    let worst: Cost = ranked
        .iter()
        .enumerate()
        .map(|(rank, a)| {
            if (turned_away..potential).contains(&rank) {
                inside_free[a.agent]
            } else {
                outside[a.agent]
            }
        })
        .sum();

    let agents = n as i64;
    Ok(NeResult {
        potential,
        best: best / agents,
        worst: worst / agents,
    })
}

/// Equilibrium baseline for a concrete instance.
pub fn solve(agents: &[PricedAgent], capacity: usize) -> Result<NeResult> {
    let outside: Vec<Cost> = agents.iter().map(|a| a.outside).collect();
    let inside: Vec<Cost> = agents.iter().map(|a| a.inside_free).collect();
    ne_costs(&advantages(agents), &outside, &inside, capacity)
}

/// Largest instance [`brute_force_ne`] will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 16;

/// Extremal average costs over all pure equilibria, found by enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NeBounds {
    pub min: Cost,
    pub max: Cost,
    /// Number of equilibrium allocations found.
    pub allocations: usize,
}

/// Enumerates every inside/outside allocation and keeps those where no agent
/// can strictly lower its own cost by switching route, then reports the
/// cheapest and the dearest. Agents with zero advantage are kept off the hub.
pub fn brute_force_ne(network: &Network, ods: &[OdPair], cfg: &NetworkConfig) -> Result<NeBounds> {
    let n = ods.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge {
            agents: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let agents = price_agents(network, ods, cfg)?;
    let indifferent: u32 = agents
        .iter()
        .enumerate()
        .filter(|(_, a)| a.advantage().is_zero())
        .fold(0, |m, (i, _)| m | 1 << i);

    let mut bounds: Option<NeBounds> = None;
    for mask in 0u32..1 << n {
        if mask & indifferent != 0 {
            continue;
        }
        let users = mask.count_ones() as usize;
        let congested = users > cfg.capacity;
        let mut total = Cost::zero();
        let mut stable = true;
        for (i, agent) in agents.iter().enumerate() {
            let inside = mask >> i & 1 == 1;
            let (current, alternative) = if inside {
                (agent.inside(congested), agent.outside)
            } else {
                (agent.outside, agent.inside(users + 1 > cfg.capacity))
            };
            if alternative < current {
                stable = false;
                break;
            }
            total += current;
        }
        if !stable {
            continue;
        }
        let avg = total / n as i64;
        bounds = Some(match bounds {
            None => NeBounds {
                min: avg,
                max: avg,
                allocations: 1,
            },
            Some(b) => NeBounds {
                min: b.min.min(avg),
                max: b.max.max(avg),
                allocations: b.allocations + 1,
            },
        });
    }
    // the threshold allocation is always an equilibrium
    Ok(bounds.expect("at least one equilibrium allocation"))
}
