//! Ring-and-hub topology and route costs.
//!
//! `N` peripheral nodes sit on a cycle, each linked to its two neighbours.
//! A central hub is linked to `λ` of them (the interchanges). An agent either
//! travels the short way round the ring (outside route) or walks to an
//! interchange, crosses the hub and walks from the exit interchange to its
//! destination (inside route). Crossing the hub costs `α` per ring link it
//! spans when the hub is free, `β` when it is congested.

use num_rational::Rational64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact route cost in link units.
pub type Cost = Rational64;

/// Static parameters of a ring-and-hub network.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Number of peripheral nodes (and agents).
    pub nodes: usize,
    /// Number of hub links `λ`.
    pub hub_links: usize,
    /// Hub capacity `L`: the hub is congested when more than `L` agents use it.
    pub capacity: usize,
    /// Hub crossing coefficient when uncongested.
    #[serde(with = "ratio_str", default = "default_alpha")]
    pub alpha: Rational64,
    /// Hub crossing coefficient when congested.
    #[serde(with = "ratio_str", default = "default_beta")]
    pub beta: Rational64,
}

fn default_alpha() -> Rational64 {
    Rational64::new(1, 2)
}

fn default_beta() -> Rational64 {
    Rational64::new(3, 2)
}

impl NetworkConfig {
    /// Config with the default coefficients `α = 1/2`, `β = 3/2`.
    pub fn new(nodes: usize, hub_links: usize, capacity: usize) -> Self {
        Self {
            nodes,
            hub_links,
            capacity,
            alpha: default_alpha(),
            beta: default_beta(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 4 {
            return Err(Error::InvalidConfig(format!(
                "nodes must be at least 4, got {}",
                self.nodes
            )));
        }
        if self.hub_links < 2 || self.hub_links > self.nodes {
            return Err(Error::InvalidConfig(format!(
                "hub_links must be in 2..={}, got {}",
                self.nodes, self.hub_links
            )));
        }
        if self.capacity < 1 || self.capacity > self.nodes {
            return Err(Error::InvalidConfig(format!(
                "capacity must be in 1..={}, got {}",
                self.nodes, self.capacity
            )));
        }
        let zero = Rational64::from_integer(0);
        if self.alpha <= zero || self.beta <= self.alpha {
            return Err(Error::InvalidConfig(format!(
                "coefficients must satisfy 0 < alpha < beta, got alpha = {}, beta = {}",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

/// A ring of `nodes` peripheral nodes with the sorted set of hub-linked nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    nodes: usize,
    interchanges: Vec<usize>,
}

impl Network {
    /// Places `λ` hub links as evenly as possible: node `round(i·N/λ)` for
    /// `i = 0..λ`. Collisions (which cannot occur for `λ ≤ N`, but the rule is
    /// kept total) are resolved by taking the nearest unused node.
    pub fn build(cfg: &NetworkConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.nodes;
        let lambda = cfg.hub_links;

        let mut used = vec![false; n];
        let mut interchanges = Vec::with_capacity(lambda);
        for i in 0..lambda {
            // round half up of i*n/lambda
            let ideal = (2 * i * n + lambda) / (2 * lambda) % n;
            let node = if used[ideal] {
                nearest_unused(&used, ideal)
            } else {
                ideal
            };
            used[node] = true;
            interchanges.push(node);
        }
        interchanges.sort_unstable();
        Ok(Self { nodes: n, interchanges })
    }

    /// Network over an explicit interchange set. Indices are sorted and
    /// deduplicated.
    pub fn with_interchanges(nodes: usize, interchanges: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut interchanges: Vec<usize> = interchanges.into_iter().collect();
        if let Some(&bad) = interchanges.iter().find(|&&h| h >= nodes) {
            return Err(Error::IndexOutOfRange { index: bad, nodes });
        }
        interchanges.sort_unstable();
        interchanges.dedup();
        Ok(Self { nodes, interchanges })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn interchanges(&self) -> &[usize] {
        &self.interchanges
    }

    pub fn hub_links(&self) -> usize {
        self.interchanges.len()
    }

    pub fn is_interchange(&self, node: usize) -> bool {
        self.interchanges.binary_search(&node).is_ok()
    }

    /// One random destination per agent. Agent `n` lives at node `n`; its
    /// destination is uniform over the other `N - 1` nodes.
    pub fn assign_destinations<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<OdPair> {
        (0..self.nodes)
            .map(|origin| {
                let k = rng.random_range(0..self.nodes - 1);
                let destination = if k >= origin { k + 1 } else { k };
                OdPair { origin, destination }
            })
            .collect()
    }

    /// Cheapest inside route for `od` when the hub is uncongested.
    ///
    /// Scans every ordered pair of distinct interchanges; ties go to the
    /// lexicographically smallest `(h_in, h_out)`.
    pub fn best_inside_route(&self, od: OdPair, alpha: Rational64) -> Result<InsideRoute> {
        if self.interchanges.len() < 2 {
            return Err(Error::NoRoute);
        }
        let (num, den) = (*alpha.numer(), *alpha.denom());
        let n = self.nodes;
        let mut best: Option<(i64, InsideRoute)> = None;
        for &h_in in &self.interchanges {
            let to_hub = dist(od.origin, h_in, n);
            for &h_out in &self.interchanges {
                if h_in == h_out {
                    continue;
                }
                let d_access = to_hub + dist(h_out, od.destination, n);
                let d_hub = dist(h_in, h_out, n);
                // cost scaled by the denominator of alpha
                let scaled = den * d_access as i64 + num * d_hub as i64;
                if best.as_ref().is_none_or(|(b, _)| scaled < *b) {
                    best = Some((
                        scaled,
                        InsideRoute {
                            h_in,
                            h_out,
                            d_access,
                            d_hub,
                        },
                    ));
                }
            }
        }
        Ok(best.expect("at least two interchanges").1)
    }
}

fn nearest_unused(used: &[bool], from: usize) -> usize {
    let n = used.len();
    (1..n)
        .flat_map(|k| [(from + k) % n, (from + n - k) % n])
        .find(|&c| !used[c])
        .expect("fewer interchanges than nodes")
}

#[inline]
pub(crate) fn dist(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}

/// Number of ring links on the shorter arc between `i` and `j`.
pub fn ring_distance(i: usize, j: usize, nodes: usize) -> Result<usize> {
    for index in [i, j] {
        if index >= nodes {
            return Err(Error::IndexOutOfRange { index, nodes });
        }
    }
    Ok(dist(i, j, nodes))
}

/// Origin/destination of one agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OdPair {
    pub origin: usize,
    pub destination: usize,
}

/// Cost of the outside route, `d(O, D)`. Independent of the hub state.
pub fn outside_cost(od: OdPair, nodes: usize) -> Cost {
    Cost::from_integer(dist(od.origin, od.destination, nodes) as i64)
}

/// An inside route, decomposed into the ring walk to and from the hub
/// (`d_access`) and the ring span crossed via the hub (`d_hub`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InsideRoute {
    pub h_in: usize,
    pub h_out: usize,
    pub d_access: usize,
    pub d_hub: usize,
}

/// `d_access + α·d_hub` when free, `d_access + β·d_hub` when congested.
pub fn inside_cost(route: &InsideRoute, congested: bool, alpha: Rational64, beta: Rational64) -> Cost {
    let coefficient = if congested { beta } else { alpha };
    Cost::from_integer(route.d_access as i64) + coefficient * route.d_hub as i64
}

/// Everything an agent needs to know about its two routes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PricedAgent {
    pub od: OdPair,
    pub route: InsideRoute,
    pub outside: Cost,
    pub inside_free: Cost,
    pub inside_congested: Cost,
}

impl PricedAgent {
    /// `C_out − C_in` on a free hub.
    pub fn advantage(&self) -> Cost {
        self.outside - self.inside_free
    }

    pub fn inside(&self, congested: bool) -> Cost {
        if congested {
            self.inside_congested
        } else {
            self.inside_free
        }
    }
}

/// Routes and costs for every agent. The inside route is chosen on the free
/// hub and kept fixed; under congestion it is re-priced with `β`.
pub fn price_agents(network: &Network, ods: &[OdPair], cfg: &NetworkConfig) -> Result<Vec<PricedAgent>> {
    ods.iter()
        .map(|&od| {
            for index in [od.origin, od.destination] {
                if index >= network.nodes() {
                    return Err(Error::IndexOutOfRange {
                        index,
                        nodes: network.nodes(),
                    });
                }
            }
            let route = network.best_inside_route(od, cfg.alpha)?;
            Ok(PricedAgent {
                od,
                route,
                outside: outside_cost(od, network.nodes()),
                inside_free: inside_cost(&route, false, cfg.alpha, cfg.beta),
                inside_congested: inside_cost(&route, true, cfg.alpha, cfg.beta),
            })
        })
        .collect()
}

mod ratio_str {
    use num_rational::Rational64;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(value)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        let raw = String::deserialize(d)?;
        raw.trim()
            .parse()
            .map_err(|e| D::Error::custom(format!("bad rational `{raw}`: {e}")))
    }
}
