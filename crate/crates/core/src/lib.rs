//! Weighted proportional fairness in multi-band, multi-cell wireless
//! networks.
//!
//! The crate models APs with one or more radios, clients with weights, and a
//! set of channels whose rates and interference ranges follow a path-loss
//! model. It solves client scheduling and channel access in closed form and
//! searches client association and channel selection with a Gibbs sampler
//! (DP) or its greedy counterpart, alongside a minimum-interference baseline
//! and brute-force oracles for verification.

// Negated float comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops mirror the per-AP and per-client sums they compute.
#![allow(clippy::needless_range_loop)]

pub mod annealing;
pub mod baselines;
pub mod cli;
pub mod error;
pub mod fairness;
pub mod model;
pub mod oracle;
pub mod radio;
pub mod scenarios;

pub use error::{ModelError, OracleError, ScenarioError};
pub use fairness::{Energy, Scheme};
pub use model::{Configuration, Network};
