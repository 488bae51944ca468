//! Competitive search for a moving target.
//!
//! An object moves over a finite set of states according to a time-varying
//! Markov chain. Each period one player (or, with probability `r`, nobody)
//! is active and searches one state; the first player to find the object
//! wins. This crate provides:
//!
//! * [`model`]: scenarios and the Bayesian location filter over public histories,
//! * [`strategy`]: greedy, scripted, uniform and custom strategies,
//! * [`engine`]: reproducible, parallel Monte Carlo simulation,
//! * [`analysis`]: exact winning probabilities, residual bounds, one-shot
//!   deviation gains and subgame-perfect-equilibrium checks,
//! * [`scenarios`]: built-in games, JSON documents and random generators.
//!
//! ```
//! use searchgame::analysis::exact_win_probs;
//! use searchgame::scenarios::preset;
//!
//! let game = preset("two_state(0.2)").unwrap();
//! let greedy = game.profile("greedy").unwrap();
//! let report = exact_win_probs(&game.scenario, greedy, 60).unwrap();
//! assert!((report.values[0] - 0.99).abs() <= report.residual + 1e-9);
//! ```

pub mod analysis;
pub mod engine;
pub mod model;
pub mod scenarios;
pub mod strategy;

pub use model::{Belief, History, SearchScenario, Step};
pub use strategy::{Strategy, StrategyProfile, TieBreak};
