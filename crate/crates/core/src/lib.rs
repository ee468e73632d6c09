//! Agents that learn to play multiagent Tetris well *and* within their
//! team's social code, from two channels of trainer feedback: whether an
//! action was effective, and whether it was permissible.
//!
//! Start with [`runner::run_proxy_suite`] for an in-process training run,
//! [`harness::run_grid`] for the full design x code comparison, and
//! [`gateway::Gateway`] for live human trainers.

pub mod affinity;
pub mod agent;
pub mod board;
pub mod error;
pub mod features;
pub mod feedback;
pub mod gateway;
pub mod harness;
pub mod model;
pub mod piece;
pub mod placement;
pub mod plot;
pub mod proxy;
pub mod runner;
pub mod social;
