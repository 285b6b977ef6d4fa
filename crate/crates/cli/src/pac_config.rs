//! JSON configuration schema for the `pac` subcommand.
//!
//! ```json
//! {
//!   "xi": 1.0,
//!   "m": 100,
//!   "delta": 0.05,
//!   "net": "nested-dyadic:1:8",
//!   "depth": 8,
//!   "lambdas": [1.0, ...],        // exclusive with "alpha"
//!   "alpha": 0.6931,              // linear-KL heuristic schedule
//!   "deltas": [...],              // optional; defaults to the geometric budget
//!   "posterior": {"type": "dirac", "at": [0.0]}
//!              | {"type": "weighted", "atoms": [{"label": "a", "coords": [0.1]}], "probs": [1.0]},
//!   "priors": {"type": "uniform"}
//!           | {"type": "pushforward", "atoms": [...], "probs": [...]}
//! }
//! ```

use chainbound::dist::{Atom, DiscreteDistribution};
use chainbound::nets::RefiningNetSequence;
use chainbound::pac::{PacSchedule, PosteriorOnNets, PriorSpec};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacConfig {
    pub xi: f64,
    pub m: u32,
    pub delta: f64,
    pub net: String,
    pub depth: usize,
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub deltas: Option<Vec<f64>>,
    pub posterior: PosteriorConfig,
    #[serde(default)]
    pub priors: Option<PriorConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum PosteriorConfig {
    Dirac { at: Vec<f64> },
    Weighted { atoms: Vec<Atom>, probs: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum PriorConfig {
    Uniform,
    Pushforward { atoms: Vec<Atom>, probs: Vec<f64> },
}

pub struct ResolvedPac {
    pub config: serde_json::Value,
    pub xi: f64,
    pub m: u32,
    pub net: RefiningNetSequence,
    pub posterior: PosteriorOnNets,
    pub deltas: Vec<f64>,
    pub schedule: Option<PacSchedule>,
    pub alpha: Option<f64>,
}

impl PacConfig {
    pub fn resolve(self) -> chainbound::Result<ResolvedPac> {
        let net = crate::runs::parse_net(&self.net)?;
        let deltas = match &self.deltas {
            Some(d) => d.clone(),
            None => PacSchedule::geometric_deltas(self.delta, self.depth),
        };
        let base = match &self.posterior {
            PosteriorConfig::Dirac { at } => DiscreteDistribution::new(
                vec![Atom::with_coords("dirac", at.clone())],
                vec![1.0],
            )?,
            PosteriorConfig::Weighted { atoms, probs } => {
                DiscreteDistribution::new(atoms.clone(), probs.clone())?
            }
        };
        let prior_base;
        let priors = match &self.priors {
            None | Some(PriorConfig::Uniform) => PriorSpec::Uniform,
            Some(PriorConfig::Pushforward { atoms, probs }) => {
                prior_base = DiscreteDistribution::new(atoms.clone(), probs.clone())?;
                PriorSpec::Pushforward(&prior_base)
            }
        };
        let posterior = PosteriorOnNets::from_base(&net, self.depth, &base, priors)?;
        let (schedule, alpha) = match (&self.lambdas, self.alpha) {
            (Some(lambdas), None) => (
                Some(PacSchedule::new(lambdas.clone(), deltas.clone(), self.delta)?),
                None,
            ),
            (None, Some(alpha)) => (None, Some(alpha)),
            _ => {
                return Err(chainbound::Error::BadConfig(
                    "provide exactly one of \"lambdas\" or \"alpha\"".into(),
                ))
            }
        };
        let config = serde_json::json!({
            "xi": self.xi,
            "m": self.m,
            "delta": self.delta,
            "net": self.net,
            "depth": self.depth,
            "lambdas": self.lambdas,
            "alpha": self.alpha,
            "deltas": deltas,
        });
        Ok(ResolvedPac {
            config,
            xi: self.xi,
            m: self.m,
            net,
            posterior,
            deltas,
            schedule,
            alpha,
        })
    }
}
