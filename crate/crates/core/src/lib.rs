//! Multi-objective policy search for combined-heat-and-power microgrid dispatch.
//!
//! The crate bundles a simulator of a campus microgrid (two CHP units, a
//! boiler, a back-pressure steam turbine and a utility tie), a small sigmoid
//! policy network, an ε-dominance evolutionary optimizer that trains the
//! network against cost, emissions and heat waste, and a time-varying
//! sensitivity analysis of the trained policies.
//!
//! ```no_run
//! use chp_morl::data::{generate_synthetic, SyntheticSpec};
//! use chp_morl::environment::evaluate_policy;
//! use chp_morl::grid::MicrogridConfig;
//! use chp_morl::policy::{Architecture, InputNormalization, PolicyNetwork};
//!
//! let config = MicrogridConfig::campus_winter();
//! let days = generate_synthetic(&SyntheticSpec::winter(1, 7)).unwrap();
//! let norm = InputNormalization::fit(days.iter().flat_map(|d| d.hours.iter().map(|h| &h.observable)));
//! let policy = PolicyNetwork::zeros(Architecture::new(15, config.decision_dim()), norm);
//! let result = evaluate_policy(&policy, &days, &config, false).unwrap();
//! println!("{:?}", result.objectives);
//! ```

pub mod cli;
pub mod data;
pub mod environment;
pub mod error;
pub mod grid;
pub mod io;
pub mod manifest;
pub mod moea;
pub mod policy;
pub mod report;
pub mod training;
pub mod tvsa;

pub use error::{Error, Result};
