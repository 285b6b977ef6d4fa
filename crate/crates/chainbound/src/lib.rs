//! Chained and unchained information-theoretic generalisation bounds over
//! finite learning channels.
//!
//! The crate evaluates bounds of the master form
//! `|G| <= xi * E_{P_W}[D(P_S, P_{S|W})]` and their chained counterparts
//! `|G| <= xi * sum_k eps_{k-1} E_{P_W}[D(P_S, P_{S|W_k})]` over refining
//! sequences of nets, for a catalogue of divergences (mutual information,
//! Wasserstein-1, chi-square, power, total variation, lautum, and
//! conditional variants on super-samples), plus standard and chained
//! PAC-Bayes bounds.  Two analytic toy families with closed-form values act
//! as oracles for the whole pipeline.
//!
//! Modules follow the pipeline:
//!
//! * [`dist`] — atoms, discrete distributions, joint channels, super-sample
//!   channels;
//! * [`divergence`] — exact divergence computations and closed forms;
//! * [`transport`] — exact discrete optimal transport;
//! * [`nets`] — refining sequences of nets with level projections;
//! * [`engine`] — the bound evaluators and the preset catalogue;
//! * [`pac`] — PAC-Bayesian bounds and schedules;
//! * [`mc`] — reproducible Monte Carlo estimation;
//! * [`toy`] — the two analytic toy models;
//! * [`checks`] — randomized property suites shared by tests and the CLI.

pub mod checks;
pub mod dist;
pub mod divergence;
pub mod engine;
pub mod error;
pub mod mc;
pub mod nets;
pub mod pac;
pub mod special;
pub mod toy;
pub mod transport;

pub use error::{Error, Result};
