//! Minority route-choice game on ring-and-hub traffic networks.
//!
//! Agents on a ring decide every step whether to take the hub shortcut or the
//! peripheral detour, learning from a short history of hub congestion. The
//! crate provides the network model ([`network`]), the agents' inductive
//! decision rule ([`agents`]), the game loop and its measures ([`sim`]), an
//! analytic Nash-equilibrium baseline ([`equilibrium`]) and a sweep harness
//! with CSV/SVG output ([`sweep`], [`output`]).

pub mod agents;
pub mod equilibrium;
pub mod error;
pub mod network;
pub mod output;
pub mod sim;
pub mod sweep;

pub use error::{Error, Result};
