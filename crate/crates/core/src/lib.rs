//! Joint data purchasing and placement for geo-distributed data clouds.
//!
//! A data cloud buys datasets from providers at one of several quality
//! levels, copies them to its data centers and serves client queries. The
//! crate evaluates such plans exactly, solves the one-data-center case to
//! optimality, approximates the general case with the two-step Datum
//! heuristic, and ships the baselines and scenario generator used to
//! compare them.

pub mod baselines;
pub mod cities;
pub mod datum;
pub mod error;
pub mod experiment;
pub mod geo;
pub mod io;
pub mod lp;
pub mod model;
pub mod rational;
pub mod scenario;
pub mod single_dc;

pub use baselines::{nearest_dc, opt_band, opt_cost, ExhaustiveBudget, UflpInstance};
pub use datum::{datum_solve, datum_solve_bulk, DatumConfig};
pub use error::{Error, Result};
pub use experiment::{Algorithm, RunRecord, SolveConfig};
pub use model::{evaluate_cost, validate_instance, CostBreakdown, MarketInstance, Plan};
pub use rational::Rational;
pub use scenario::{generate, ScenarioParams};
pub use single_dc::{single_dc_solve, solve_single_dc};
