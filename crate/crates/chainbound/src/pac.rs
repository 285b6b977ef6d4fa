//! Standard and chained PAC-Bayesian bounds.
//!
//! The standard bound is `(xi / sqrt(2m)) * (lambda +
//! (KL(posterior||prior) + log(1/delta)) / lambda)`. The chained variant
//! spends a `{delta_k}` budget across net levels and pays
//! `eps_{k-1} (lambda_k + (KL_k + log(1/delta_k)) / lambda_k)` per level
//! plus a `2 sqrt(log(1/delta_0))` root term; the per-level complexities
//! `KL_k = KL(P_{W_k|S} || P*_{W_k})` are finite for any posterior on
//! finite nets, so the chained bound stays finite even for deterministic
//! algorithms.
//!
//! `lambda` (and the whole `{lambda_k}` schedule) must be fixed before
//! seeing the sample; optimizing it against the realized KL voids the
//! high-probability guarantee. The oracle-lambda helper is therefore a
//! diagnostic only, and the honest route to near-optimal lambdas is the
//! union-bound grid helper, which charges `t * delta` for `t` candidates.

use crate::dist::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::nets::RefiningNetSequence;
use serde::Serialize;

/// Per-level `lambda_k` (k = 1..=K) and `delta_k` (k = 0..=K) sequences.
/// The deltas must sum to the declared total confidence budget.
#[derive(Debug, Clone)]
pub struct PacSchedule {
    lambdas: Vec<f64>,
    deltas: Vec<f64>,
}

impl PacSchedule {
    pub fn new(lambdas: Vec<f64>, deltas: Vec<f64>, declared_delta: f64) -> Result<Self> {
        if deltas.len() != lambdas.len() + 1 {
            return Err(Error::BadConfig(format!(
                "need one delta per level 0..=K: got {} lambdas and {} deltas",
                lambdas.len(),
                deltas.len()
            )));
        }
        if let Some(&l) = lambdas.iter().find(|l| l.is_nan() || **l <= 0.0) {
            return Err(Error::BadLambda(l));
        }
        if let Some(&d) = deltas.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
            return Err(Error::BadDelta(d));
        }
        check_delta(declared_delta)?;
        let total: f64 = deltas.iter().sum();
        if (total - declared_delta).abs() > 1e-12 {
            return Err(Error::BadConfig(format!(
                "deltas sum to {total}, declared budget is {declared_delta}"
            )));
        }
        Ok(PacSchedule { lambdas, deltas })
    }

    /// Depth `K`: number of chained levels.
    pub fn depth(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambda(&self, k: usize) -> f64 {
        self.lambdas[k - 1]
    }

    pub fn delta(&self, k: usize) -> f64 {
        self.deltas[k]
    }

    /// The default geometric budget `delta_k = delta 2^{-(k+1)}`, with the
    /// truncated tail folded into the last level so the budget sums to
    /// `delta` exactly.
    pub fn geometric_deltas(delta: f64, depth: usize) -> Vec<f64> {
        let mut out: Vec<f64> =
            (0..=depth).map(|k| delta * 0.5f64.powi(k as i32 + 1)).collect();
        out[depth] *= 2.0;
        out
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_nan() || delta <= 0.0 || delta >= 1.0 {
        return Err(Error::BadDelta(delta));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_nan() || lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::BadLambda(lambda));
    }
    Ok(())
}

/// Standard PAC-Bayes bound
/// `(xi / sqrt(2m)) (lambda + (kl + log(1/delta)) / lambda)`.
/// `kl = +inf` (a deterministic posterior against a diffuse prior)
/// propagates to `+inf`.
pub fn pac_bound(xi: f64, m: u32, lambda: f64, delta: f64, kl_term: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_delta(delta)?;
    if kl_term < 0.0 {
        return Err(Error::BadConfig(format!("KL term must be non-negative, got {kl_term}")));
    }
    let pre = xi / (2.0 * m as f64).sqrt();
    Ok(pre * (lambda + (kl_term + (1.0 / delta).ln()) / lambda))
}

/// Diagnostic only: the lambda minimizing the standard bound,
/// `lambda* = sqrt(kl + log(1/delta))`, and the minimized value. Because
/// `lambda*` depends on the realized KL it is NOT a valid high-probability
/// bound; use a pre-committed lambda or [`pac_bound_union_grid`].
pub fn pac_bound_oracle_lambda(xi: f64, m: u32, delta: f64, kl_term: f64) -> Result<(f64, f64)> {
    check_delta(delta)?;
    let lambda = (kl_term + (1.0 / delta).ln()).sqrt();
    Ok((lambda, pac_bound(xi, m, lambda, delta, kl_term)?))
}

/// Union-bound grid: evaluates the bound at `t` pre-committed lambdas, each
/// at confidence `delta`, and returns the best value together with the total
/// failure probability `t * delta` it holds at.
pub fn pac_bound_union_grid(
    xi: f64,
    m: u32,
    lambdas: &[f64],
    delta: f64,
    kl_term: f64,
) -> Result<(f64, f64)> {
    if lambdas.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut best = f64::INFINITY;
    for &l in lambdas {
        best = best.min(pac_bound(xi, m, l, delta, kl_term)?);
    }
    Ok((best, delta * lambdas.len() as f64))
}

/// Per-level posteriors `P_{W_k|S}` over net points together with priors
/// `P*_{W_k}`, for levels `0..=K`.
#[derive(Debug, Clone)]
pub struct PosteriorOnNets {
    posterior: Vec<Vec<f64>>,
    priors: Vec<Vec<f64>>,
}

/// How the per-level priors are built.
pub enum PriorSpec<'a> {
    /// Uniform on each level's net points (the deterministic-algorithm
    /// yardstick: a Dirac posterior then has `KL_k = log |W_k|`).
    Uniform,
    /// Pushforward of a fixed coordinate-carrying base measure through the
    /// level projections.
    Pushforward(&'a DiscreteDistribution),
}

impl PosteriorOnNets {
    /// Build all levels by pushing a base posterior (a distribution over
    /// coordinate-carrying atoms) through the net projections, and validate
    /// the coarsening consistency `push_{k-1}(P_{W_k|S}) = P_{W_{k-1}|S}`.
    pub fn from_base(
        net: &RefiningNetSequence,
        depth: usize,
        base: &DiscreteDistribution,
        priors: PriorSpec<'_>,
    ) -> Result<Self> {
        if depth > net.k_max() {
            return Err(Error::ScheduleTooDeep { depth, net: net.k_max() });
        }
        let posterior = push_levels(net, depth, base)?;
        let priors = match priors {
            PriorSpec::Uniform => (0..=depth)
                .map(|k| {
                    let n = net.level(k).len();
                    vec![1.0 / n as f64; n]
                })
                .collect(),
            PriorSpec::Pushforward(base_prior) => push_levels(net, depth, base_prior)?,
        };
        let out = PosteriorOnNets { posterior, priors };
        out.validate_consistency(net)?;
        Ok(out)
    }

    /// Dirac posterior at a single hypothesis, uniform priors.
    pub fn dirac_uniform(net: &RefiningNetSequence, depth: usize, w: &[f64]) -> Result<Self> {
        let base = DiscreteDistribution::new(
            vec![crate::dist::Atom::with_coords("w", w.to_vec())],
            vec![1.0],
        )?;
        Self::from_base(net, depth, &base, PriorSpec::Uniform)
    }

    pub fn depth(&self) -> usize {
        self.posterior.len() - 1
    }

    pub fn posterior_level(&self, k: usize) -> &[f64] {
        &self.posterior[k]
    }

    pub fn prior_level(&self, k: usize) -> &[f64] {
        &self.priors[k]
    }

    /// `KL(P_{W_k|S} || P*_{W_k})` on the finite level; `+inf` on prior
    /// support escape.
    pub fn kl_at_level(&self, k: usize) -> f64 {
        let mut acc = 0.0;
        for (q, p) in self.posterior[k].iter().zip(&self.priors[k]) {
            if *q > 0.0 {
                if *p <= 0.0 {
                    return f64::INFINITY;
                }
                acc += q * (q / p).ln();
            }
        }
        acc.max(0.0)
    }

    fn validate_consistency(&self, net: &RefiningNetSequence) -> Result<()> {
        for k in 1..self.posterior.len() {
            let mut pushed = vec![0.0; self.posterior[k - 1].len()];
            for (idx, &mass) in self.posterior[k].iter().enumerate() {
                if mass > 0.0 {
                    let coords = &net.point(k, idx).coords;
                    pushed[net.project_index(coords, k - 1)?] += mass;
                }
            }
            for (i, (a, b)) in pushed.iter().zip(&self.posterior[k - 1]).enumerate() {
                if (a - b).abs() > 1e-12 {
                    return Err(Error::InconsistentPosterior(format!(
                        "level {k} pushed through pi_{} differs from level {} at point {i}: {a} vs {b}",
                        k - 1,
                        k - 1
                    )));
                }
            }
        }
        Ok(())
    }
}

fn push_levels(
    net: &RefiningNetSequence,
    depth: usize,
    base: &DiscreteDistribution,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let mut level = vec![0.0; net.level(k).len()];
        for (atom, &p) in base.atoms().iter().zip(base.probs()) {
            let coords = atom
                .coords
                .as_deref()
                .ok_or_else(|| Error::MissingCoords(atom.label.clone()))?;
            level[net.project_index(coords, k)?] += p;
        }
        out.push(level);
    }
    Ok(out)
}

/// One level of a chained PAC-Bayes evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct PacLevelRow {
    pub k: usize,
    pub eps_prev: f64,
    pub kl: f64,
    pub lambda: f64,
    pub delta: f64,
    pub term: f64,
}

/// Chained PAC-Bayes value with its per-level decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct PacReport {
    pub value: f64,
    pub prefix_term: f64,
    pub per_level: Vec<PacLevelRow>,
    pub xi: f64,
    pub m: u32,
}

/// Chained PAC-Bayes bound
/// `(xi / sqrt(2m)) (2 sqrt(log(1/delta_0)) + sum_k eps_{k-1} (lambda_k +
/// (KL_k + log(1/delta_k)) / lambda_k))`, evaluated to the schedule depth.
pub fn chained_pac_bound(
    xi: f64,
    m: u32,
    net: &RefiningNetSequence,
    schedule: &PacSchedule,
    posterior: &PosteriorOnNets,
) -> Result<PacReport> {
    let depth = schedule.depth();
    if depth > net.k_max() {
        return Err(Error::ScheduleTooDeep { depth, net: net.k_max() });
    }
    if posterior.depth() < depth {
        return Err(Error::BadConfig(format!(
            "posterior has {} levels, schedule needs {depth}",
            posterior.depth()
        )));
    }
    let pre = xi / (2.0 * m as f64).sqrt();
    let prefix = 2.0 * (1.0 / schedule.delta(0)).ln().sqrt();
    let mut per_level = Vec::with_capacity(depth);
    let mut sum = prefix;
    for k in 1..=depth {
        let kl = posterior.kl_at_level(k);
        let lambda = schedule.lambda(k);
        let delta = schedule.delta(k);
        let eps_prev = net.radius(k - 1);
        let term = eps_prev * (lambda + (kl + (1.0 / delta).ln()) / lambda);
        sum += term;
        per_level.push(PacLevelRow { k, eps_prev, kl, lambda, delta, term });
    }
    Ok(PacReport { value: pre * sum, prefix_term: pre * prefix, per_level, xi, m })
}

/// The linear-complexity heuristic: guess `KL_k ~ alpha k`, optimize the
/// lambdas against the guess, and evaluate the resulting display with the
/// actual per-level KL in the numerator:
/// `(xi / sqrt(2m)) (2 sqrt(log(1/delta_0)) + sum_k eps_{k-1} (KL_k +
/// log(1/delta_k)) / sqrt(alpha k + log(1/delta_k)))`.
#[allow(clippy::needless_range_loop)] // k indexes deltas, radii and levels together
pub fn alpha_heuristic_bound(
    xi: f64,
    m: u32,
    net: &RefiningNetSequence,
    alpha: f64,
    deltas: &[f64],
    posterior: &PosteriorOnNets,
) -> Result<PacReport> {
    if alpha.is_nan() || alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::BadAlpha(alpha));
    }
    let depth = deltas.len().saturating_sub(1);
    if depth == 0 {
        return Err(Error::BadConfig("need deltas for levels 0..=K with K >= 1".into()));
    }
    if depth > net.k_max() {
        return Err(Error::ScheduleTooDeep { depth, net: net.k_max() });
    }
    if posterior.depth() < depth {
        return Err(Error::BadConfig(format!(
            "posterior has {} levels, heuristic needs {depth}",
            posterior.depth()
        )));
    }
    if let Some(&d) = deltas.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
        return Err(Error::BadDelta(d));
    }
    let pre = xi / (2.0 * m as f64).sqrt();
    let prefix = 2.0 * (1.0 / deltas[0]).ln().sqrt();
    let mut per_level = Vec::with_capacity(depth);
    let mut sum = prefix;
    for k in 1..=depth {
        let kl = posterior.kl_at_level(k);
        let delta = deltas[k];
        let log_term = (1.0 / delta).ln();
        let lambda = (alpha * k as f64 + log_term).sqrt();
        let eps_prev = net.radius(k - 1);
        let term = eps_prev * (kl + log_term) / lambda;
        sum += term;
        per_level.push(PacLevelRow { k, eps_prev, kl, lambda, delta, term });
    }
    Ok(PacReport { value: pre * sum, prefix_term: pre * prefix, per_level, xi, m })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_bound_matches_direct_arithmetic() {
        // lambda = sqrt(log 20), delta = 0.05, m = 100, xi = 1, kl = 0:
        // value = 2 sqrt(log 20) / sqrt(200)
        let lambda = (20.0f64).ln().sqrt();
        let v = pac_bound(1.0, 100, lambda, 0.05, 0.0).unwrap();
        let expect = 2.0 * (20.0f64).ln().sqrt() / 200.0f64.sqrt();
        assert!((v - expect).abs() < 1e-15);
        assert!((v - 0.2448).abs() < 1e-4, "got {v}");

        let v1 = pac_bound(1.0, 100, 1.0, 0.05, 0.0).unwrap();
        let expect1 = (1.0 + (20.0f64).ln()) / 200.0f64.sqrt();
        assert!((v1 - expect1).abs() < 1e-15);
        assert!((v1 - 0.2826).abs() < 5e-4, "got {v1}");
    }

    #[test]
    fn infinite_kl_gives_infinite_bound() {
        let v = pac_bound(1.0, 100, 1.0, 0.05, f64::INFINITY).unwrap();
        assert!(v.is_infinite());
    }

    #[test]
    fn parameter_validation() {
        assert_eq!(pac_bound(1.0, 10, 0.0, 0.05, 0.0).unwrap_err().code(), "BAD_LAMBDA");
        assert_eq!(pac_bound(1.0, 10, 1.0, 0.0, 0.0).unwrap_err().code(), "BAD_DELTA");
        assert_eq!(pac_bound(1.0, 10, 1.0, 1.0, 0.0).unwrap_err().code(), "BAD_DELTA");
    }

    #[test]
    fn oracle_lambda_beats_a_grid() {
        let (lambda_star, v_star) = pac_bound_oracle_lambda(1.5, 64, 0.05, 3.0).unwrap();
        assert!((lambda_star - (3.0 + (20.0f64).ln()).sqrt()).abs() < 1e-15);
        for i in 1..200 {
            let lambda = 0.05 * i as f64;
            let v = pac_bound(1.5, 64, lambda, 0.05, 3.0).unwrap();
            assert!(v_star <= v + 1e-12, "grid lambda {lambda} beat the oracle");
        }
    }

    #[test]
    fn union_grid_reports_inflated_failure_probability() {
        let grid = [0.5, 1.0, 2.0, 4.0];
        let (best, total) = pac_bound_union_grid(1.0, 100, &grid, 0.01, 2.0).unwrap();
        assert!((total - 0.04).abs() < 1e-15);
        let direct: f64 = grid
            .iter()
            .map(|&l| pac_bound(1.0, 100, l, 0.01, 2.0).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(best, direct);
    }

    #[test]
    fn geometric_deltas_sum_to_budget_exactly() {
        for depth in [1, 3, 8] {
            let deltas = PacSchedule::geometric_deltas(0.05, depth);
            let total: f64 = deltas.iter().sum();
            assert!((total - 0.05).abs() < 1e-16, "depth {depth}: {total}");
        }
    }

    #[test]
    fn dirac_posterior_uniform_priors_have_log_cardinality_kl() {
        let net = RefiningNetSequence::nested_dyadic_box(1, 8).unwrap();
        let post = PosteriorOnNets::dirac_uniform(&net, 8, &[0.3]).unwrap();
        for k in 1..=8 {
            let expect = (net.level(k).len() as f64).ln();
            assert!(
                (post.kl_at_level(k) - expect).abs() < 1e-12,
                "level {k}: {} vs log|W_k| = {expect}",
                post.kl_at_level(k)
            );
        }
    }

    #[test]
    fn chained_bound_matches_series_arithmetic() {
        // K = 6, lambda_k = sqrt(k log 2 + log(1/delta_k)), uniform priors,
        // Dirac posterior on the nested dyadic net (|W_k| = 2^k)
        let net = RefiningNetSequence::nested_dyadic_box(1, 6).unwrap();
        let delta = 0.05;
        let deltas = PacSchedule::geometric_deltas(delta, 6);
        let lambdas: Vec<f64> = (1..=6)
            .map(|k| (k as f64 * 2.0f64.ln() + (1.0 / deltas[k]).ln()).sqrt())
            .collect();
        let schedule = PacSchedule::new(lambdas.clone(), deltas.clone(), delta).unwrap();
        let post = PosteriorOnNets::dirac_uniform(&net, 6, &[0.3]).unwrap();
        let report = chained_pac_bound(1.0, 100, &net, &schedule, &post).unwrap();
        assert!(report.value.is_finite());

        // direct series arithmetic
        let pre = 1.0 / 200.0f64.sqrt();
        let mut expect = 2.0 * (1.0 / deltas[0]).ln().sqrt();
        for k in 1..=6usize {
            let kl = (net.level(k).len() as f64).ln();
            let lam = lambdas[k - 1];
            expect += net.radius(k - 1) * (lam + (kl + (1.0 / deltas[k]).ln()) / lam);
        }
        assert!((report.value - pre * expect).abs() < 1e-13);
    }

    #[test]
    fn schedule_validation_errors() {
        let net = RefiningNetSequence::nested_dyadic_box(1, 3).unwrap();
        let deltas = PacSchedule::geometric_deltas(0.1, 5);
        let lambdas = vec![1.0; 5];
        let schedule = PacSchedule::new(lambdas, deltas, 0.1).unwrap();
        let post = PosteriorOnNets::dirac_uniform(&net, 3, &[0.0]).unwrap();
        let err = chained_pac_bound(1.0, 10, &net, &schedule, &post).unwrap_err();
        assert_eq!(err.code(), "SCHEDULE_TOO_DEEP");

        let bad = PacSchedule::new(vec![1.0], vec![0.05, 0.04], 0.05);
        assert!(bad.is_err(), "delta budget mismatch must be rejected");
    }

    #[test]
    fn posterior_consistency_holds_on_refining_nets_and_fails_otherwise() {
        let nested = RefiningNetSequence::nested_dyadic_box(1, 6).unwrap();
        let atoms = vec![
            crate::dist::Atom::with_coords("a", vec![0.31]),
            crate::dist::Atom::with_coords("b", vec![-0.62]),
            crate::dist::Atom::with_coords("c", vec![0.8]),
        ];
        let base = DiscreteDistribution::new(atoms.clone(), vec![0.5, 0.3, 0.2]).unwrap();
        assert!(PosteriorOnNets::from_base(&nested, 6, &base, PriorSpec::Uniform).is_ok());

        // the centred classical family is not refining; a base point whose
        // projection chain breaks is rejected
        let centred = RefiningNetSequence::dyadic_box(1, 6).unwrap();
        let tricky = DiscreteDistribution::new(
            vec![crate::dist::Atom::with_coords("w", vec![0.3])],
            vec![1.0],
        )
        .unwrap();
        let err = PosteriorOnNets::from_base(&centred, 6, &tricky, PriorSpec::Uniform)
            .unwrap_err();
        assert_eq!(err.code(), "INCONSISTENT_POSTERIOR");
    }

    #[test]
    fn alpha_heuristic_limits_and_relation_to_chained_bound() {
        let net = RefiningNetSequence::nested_dyadic_box(1, 6).unwrap();
        let post = PosteriorOnNets::dirac_uniform(&net, 6, &[0.3]).unwrap();
        let deltas = PacSchedule::geometric_deltas(0.05, 6);

        // Dirac posterior with uniform priors realizes KL_k = k log 2
        // exactly, the heuristic's linear guess with alpha = log 2.
        let alpha = 2.0f64.ln();
        for k in 1..=6 {
            assert!((post.kl_at_level(k) - alpha * k as f64).abs() < 1e-12);
        }
        let heur = alpha_heuristic_bound(1.0, 100, &net, alpha, &deltas, &post).unwrap();
        // at alpha k = KL_k each display term is exactly half the chained
        // term at lambda_k = sqrt(alpha k + log(1/delta_k))
        let lambdas: Vec<f64> = (1..=6)
            .map(|k| (alpha * k as f64 + (1.0 / deltas[k]).ln()).sqrt())
            .collect();
        let schedule = PacSchedule::new(lambdas, deltas.clone(), 0.05).unwrap();
        let chained = chained_pac_bound(1.0, 100, &net, &schedule, &post).unwrap();
        let heur_sum = heur.value - heur.prefix_term;
        let chained_sum = chained.value - chained.prefix_term;
        assert!(
            (chained_sum - 2.0 * heur_sum).abs() < 1e-12,
            "chained sum {chained_sum} vs twice the display sum {}",
            2.0 * heur_sum
        );

        // the sum terms shrink like 1/sqrt(alpha); only the prefix survives
        let mut prev_sum = f64::INFINITY;
        for big in [1e2, 1e4, 1e6] {
            let r = alpha_heuristic_bound(1.0, 100, &net, big, &deltas, &post).unwrap();
            let sum = r.value - r.prefix_term;
            assert!(sum < prev_sum, "sum terms must shrink with alpha");
            prev_sum = sum;
        }
        let huge = alpha_heuristic_bound(1.0, 100, &net, 1e12, &deltas, &post).unwrap();
        assert!((huge.value - huge.prefix_term) < 1e-4 * huge.prefix_term);
        assert_eq!(
            alpha_heuristic_bound(1.0, 100, &net, 0.0, &deltas, &post).unwrap_err().code(),
            "BAD_ALPHA"
        );
    }

    #[test]
    fn chained_bound_is_convex_beneficiary_of_finite_nets() {
        // contrast: standard bound with infinite KL vs finite chained value
        let inf = pac_bound(1.0, 100, 1.0, 0.05, f64::INFINITY).unwrap();
        assert!(inf.is_infinite());
        let net = RefiningNetSequence::nested_dyadic_box(1, 8).unwrap();
        let deltas = PacSchedule::geometric_deltas(0.05, 8);
        let lambdas = vec![1.0; 8];
        let schedule = PacSchedule::new(lambdas, deltas, 0.05).unwrap();
        let post = PosteriorOnNets::dirac_uniform(&net, 8, &[0.77]).unwrap();
        let report = chained_pac_bound(1.0, 100, &net, &schedule, &post).unwrap();
        assert!(report.value.is_finite());
    }
}
