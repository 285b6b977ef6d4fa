//! Randomized property suites: net axioms, divergence invariants, level
//! monotonicity, Pinsker, the Gaussian transport-cost inequality, and
//! brute-force regularity checks. Shared by the acceptance tests and the
//! CLI `check` subcommand; failures carry printable counterexamples.

use crate::dist::{Atom, DiscreteDistribution, JointChannel};
use crate::divergence::{chi2, kl, power_divergence, tv, DivergenceKind};
use crate::engine::{chained_bound, unchained_bound, BoundSpec, Scaling};
use crate::error::Result;
use crate::nets::RefiningNetSequence;
use crate::transport::w1_1d;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub const SUITES: [&str; 6] =
    ["nets", "divergences", "monotonicity", "pinsker", "t1", "regularity"];

/// Run one suite by name, or every suite for "all".
pub fn run_suite(name: &str, seed: u64) -> Result<Vec<SuiteReport>> {
    let all = |name: &str| -> Result<SuiteReport> {
        Ok(match name {
            "nets" => suite_nets(seed),
            "divergences" => suite_divergences(seed),
            "monotonicity" => suite_monotonicity(seed),
            "pinsker" => suite_pinsker(seed),
            "t1" => suite_t1(),
            "regularity" => suite_regularity(seed),
            other => {
                return Err(crate::error::Error::BadConfig(format!(
                    "unknown suite {other}; available: {} or all",
                    SUITES.join(", ")
                )))
            }
        })
    };
    if name == "all" {
        SUITES.iter().map(|s| all(s)).collect()
    } else {
        Ok(vec![all(name)?])
    }
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn labelled(probs: &[f64]) -> DiscreteDistribution {
    let atoms = (0..probs.len()).map(|i| Atom::plain(format!("z{i}"))).collect();
    DiscreteDistribution::new(atoms, probs.to_vec()).unwrap()
}

/// The four refining-net axioms on 1e4 random domain points per refining
/// family, plus distance/covering on the classical centred families and a
/// validator cross-check (the centred point sets must be rejected by the
/// generic constructor, since no refining projections exist for them).
pub fn suite_nets(seed: u64) -> SuiteReport {
    let mut failures = Vec::new();
    let mut cases = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let refining = [
        RefiningNetSequence::nested_dyadic_box(1, 8).unwrap(),
        RefiningNetSequence::nested_dyadic_box(2, 5).unwrap(),
        RefiningNetSequence::nested_circle(8).unwrap(),
    ];
    for net in &refining {
        // axiom 1: strictly decreasing, vanishing radii
        for k in 1..=net.k_max() {
            if net.radius(k) >= net.radius(k - 1) {
                failures.push(format!("{}: radii not decreasing at k={k}", net.name()));
            }
        }
        if net.radius(net.k_max()) >= net.radius(0) {
            failures.push(format!("{}: radii do not vanish", net.name()));
        }
        let w0 = net.level(0)[0].coords.clone();
        for _ in 0..10_000 {
            cases += 1;
            let w = sample_domain_point(&mut rng, net);
            // axiom 2: w_0 covers the domain at eps_0
            let d0 = dist(&w, &w0);
            if d0 > net.radius(0) + 1e-12 {
                failures.push(format!("{}: |w - w0| = {d0} > eps_0", net.name()));
                continue;
            }
            for k in 1..=net.k_max() {
                // axiom 3: projection distance
                let p = match net.project(&w, k) {
                    Ok(p) => p.clone(),
                    Err(e) => {
                        failures.push(format!("{}: project failed at k={k}: {e}", net.name()));
                        break;
                    }
                };
                let dk = dist(&w, &p.coords);
                if dk > net.radius(k) + 1e-12 {
                    failures.push(format!(
                        "{}: |pi_{k}(w) - w| = {dk} > eps_{k} = {} at w={w:?}",
                        net.name(),
                        net.radius(k)
                    ));
                }
                // axiom 4: composition, by label equality
                let direct = net.project(&w, k - 1).unwrap().label.clone();
                let via = net.project(&p.coords, k - 1).unwrap().label.clone();
                if direct != via {
                    failures.push(format!(
                        "{}: pi_{}(pi_{k}(w)) = {via} but pi_{}(w) = {direct}",
                        net.name(),
                        k - 1,
                        k - 1
                    ));
                }
            }
        }
    }

    // classical centred families: distance + covering only; they are
    // flagged non-refining and the generic validator must reject their
    // point sets
    let centred =
        [RefiningNetSequence::dyadic_box(1, 8).unwrap(), RefiningNetSequence::circle(8).unwrap()];
    for net in &centred {
        if net.refining() {
            failures.push(format!("{}: centred family must be flagged non-refining", net.name()));
        }
        for _ in 0..10_000 {
            cases += 1;
            let w = sample_domain_point(&mut rng, net);
            for k in 1..=net.k_max() {
                let p = net.project(&w, k).unwrap().coords.clone();
                let dk = dist(&w, &p);
                if dk > net.radius(k) + 1e-12 {
                    failures.push(format!("{}: distance axiom fails at k={k}", net.name()));
                }
            }
        }
    }
    let centred_levels: Vec<Vec<crate::nets::NetPoint>> =
        (0..=4).map(|k| centred[0].level(k).to_vec()).collect();
    cases += 1;
    if RefiningNetSequence::from_level_points(
        centred_levels,
        centred[0].radii()[..=4].to_vec(),
    )
    .is_ok()
    {
        failures.push(
            "generic validator accepted the centred dyadic point set, which admits no refining \
             projections"
                .into(),
        );
    }

    SuiteReport { suite: "nets", cases, failures }
}

fn sample_domain_point(rng: &mut ChaCha8Rng, net: &RefiningNetSequence) -> Vec<f64> {
    if net.name().contains("circle") {
        let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        vec![phi.cos(), phi.sin()]
    } else {
        (0..net.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Non-negativity and zero-at-equality of the divergences, the chi-square /
/// power coincidence at p = 2, and the interval closed forms against fine
/// discretizations.
pub fn suite_divergences(seed: u64) -> SuiteReport {
    let mut failures = Vec::new();
    let mut cases = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..200 {
        cases += 1;
        let n = rng.gen_range(2..=10);
        let nu = labelled(&random_simplex(&mut rng, n));
        let mu = labelled(&random_simplex(&mut rng, n));
        let checks: [(&str, f64); 4] = [
            ("kl", kl(&nu, &mu).unwrap()),
            ("chi2", chi2(&nu, &mu).unwrap()),
            ("tv", tv(&nu, &mu).unwrap()),
            ("power3", power_divergence(3.0, &nu, &mu).unwrap()),
        ];
        for (name, v) in checks {
            if v.is_nan() || v < 0.0 {
                failures.push(format!("{name} negative: {v}"));
            }
        }
        if kl(&mu, &mu).unwrap() != 0.0 || tv(&mu, &mu).unwrap() != 0.0 {
            failures.push("divergence nonzero at equality".into());
        }
        let a = chi2(&nu, &mu).unwrap();
        let b = power_divergence(2.0, &nu, &mu).unwrap();
        if (a - b).abs() > 1e-12 {
            failures.push(format!("chi2 {a} != power(2) {b}"));
        }
    }
    // interval closed forms against fine discretizations
    let fine = |lo: f64, hi: f64, n: usize| -> DiscreteDistribution {
        let atoms: Vec<Atom> = (0..n)
            .map(|i| {
                let x = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
                Atom::with_coords(format!("c{i}"), vec![x])
            })
            .collect();
        DiscreteDistribution::uniform(atoms).unwrap()
    };
    cases += 1;
    let outer = crate::divergence::UniformInterval::new(0.0, 2.0).unwrap();
    let inner = crate::divergence::UniformInterval::new(0.0, 1.0).unwrap();
    let closed = crate::divergence::w1_uniform_intervals(&outer, &inner).unwrap();
    let coarse_outer = fine(0.0, 2.0, 4096);
    let coarse_inner = fine(0.0, 1.0, 2048);
    let numeric = w1_1d(&coarse_outer, &coarse_inner).unwrap();
    if (closed - numeric).abs() > 1e-4 {
        failures.push(format!("interval transport closed form {closed} vs numeric {numeric}"));
    }
    SuiteReport { suite: "divergences", cases, failures }
}

/// Per-level expected divergence is non-decreasing in the level and capped
/// by the unchained value, over 200 random channels on a refining net.
pub fn suite_monotonicity(seed: u64) -> SuiteReport {
    let mut failures = Vec::new();
    let mut cases = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = RefiningNetSequence::nested_dyadic_box(1, 5).unwrap();
    let kinds = [
        DivergenceKind::Kl,
        DivergenceKind::Sqrt2Kl,
        DivergenceKind::Chi2Sqrt,
        DivergenceKind::Tv2,
        DivergenceKind::Power(2.0),
        DivergenceKind::LautumSqrt2,
        DivergenceKind::W1,
    ];
    for case in 0..200 {
        cases += 1;
        let nw = rng.gen_range(4..=12);
        let ns = rng.gen_range(3..=8);
        let w_atoms: Vec<Atom> = (0..nw)
            .map(|i| Atom::with_coords(format!("w{i}"), vec![rng.gen_range(-1.0..1.0)]))
            .collect();
        let s_atoms: Vec<Atom> = (0..ns)
            .map(|i| Atom::with_coords(format!("s{i}"), vec![rng.gen_range(-1.0..1.0)]))
            .collect();
        let mut joint: Vec<f64> = (0..nw * ns).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = joint.iter().sum();
        joint.iter_mut().for_each(|x| *x /= total);
        let ch = JointChannel::from_flat(w_atoms, s_atoms, joint).unwrap();
        for kind in kinds {
            let spec = BoundSpec::new(kind, 1.0, 1, Scaling::None);
            let cap = unchained_bound(&ch, &spec).unwrap().value;
            let report = chained_bound(&ch, &net, &spec, 5).unwrap();
            let mut prev = 0.0;
            for row in &report.per_level {
                if row.expected_divergence < prev - 1e-10 {
                    failures.push(format!(
                        "case {case} {kind:?}: level {} divergence dropped",
                        row.k
                    ));
                }
                if row.expected_divergence > cap + 1e-10 {
                    failures.push(format!(
                        "case {case} {kind:?}: level {} exceeds unchained cap",
                        row.k
                    ));
                }
                prev = row.expected_divergence;
            }
        }
    }
    SuiteReport { suite: "monotonicity", cases, failures }
}

/// `TV(mu, nu) <= sqrt(KL(nu||mu)/2)` on 500 random pairs.
pub fn suite_pinsker(seed: u64) -> SuiteReport {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..500 {
        let n = rng.gen_range(2..=12);
        let nu = labelled(&random_simplex(&mut rng, n));
        let mu = labelled(&random_simplex(&mut rng, n));
        let t = tv(&mu, &nu).unwrap();
        let k = kl(&nu, &mu).unwrap();
        if t > (k / 2.0).sqrt() + 1e-12 {
            failures.push(format!("case {case}: tv {t} > sqrt(kl/2) with kl {k}"));
        }
    }
    SuiteReport { suite: "pinsker", cases: 500, failures }
}

/// Gaussian transport-cost inequality `W1 <= sqrt(2 KL)` for discretized
/// `N(a, sigma^2)` against `N(0, 1)` over a parameter grid, with 1e-3
/// discretization slack.
pub fn suite_t1() -> SuiteReport {
    let mut failures = Vec::new();
    let mut cases = 0usize;
    let n = 4001;
    let lo = -12.0;
    let hi = 12.0;
    let grid_dist = |mean: f64, sigma: f64| -> DiscreteDistribution {
        let atoms: Vec<Atom> = (0..n)
            .map(|i| {
                let x = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
                Atom::with_coords(format!("g{i}"), vec![x])
            })
            .collect();
        let weights: Vec<f64> = atoms
            .iter()
            .map(|a| {
                let x = a.coords.as_ref().unwrap()[0];
                (-(x - mean) * (x - mean) / (2.0 * sigma * sigma)).exp() / sigma
            })
            .collect();
        let total: f64 = weights.iter().sum();
        DiscreteDistribution::new(atoms, weights.into_iter().map(|w| w / total).collect())
            .unwrap()
    };
    let reference = grid_dist(0.0, 1.0);
    for &a in &[-0.5, -0.25, 0.0, 0.25, 0.5, 0.75] {
        for &sigma in &[0.7, 0.85, 1.0, 1.15, 1.3] {
            cases += 1;
            let nu = grid_dist(a, sigma);
            let w = w1_1d(&nu, &reference).unwrap();
            let k = kl(&nu, &reference).unwrap();
            if w > (2.0 * k).sqrt() + 1e-3 {
                failures.push(format!(
                    "a={a} sigma={sigma}: W1 {w} > sqrt(2 KL) {}",
                    (2.0 * k).sqrt()
                ));
            }
        }
    }
    SuiteReport { suite: "t1", cases, failures }
}

/// Brute-force regularity checks on 100 random triples (f, mu, nu) of at
/// most 16 atoms: bounded functions against twice the total variation,
/// Lipschitz functions against the transport distance, and bounded-range
/// sub-Gaussian certificates against `sqrt(2 KL)`.
pub fn suite_regularity(seed: u64) -> SuiteReport {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..100 {
        let n = rng.gen_range(3..=16);
        let mut xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let atoms: Vec<Atom> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| Atom::with_coords(format!("z{i}"), vec![x]))
            .collect();
        let mu = DiscreteDistribution::new(atoms.clone(), random_simplex(&mut rng, n)).unwrap();
        let nu = DiscreteDistribution::new(atoms, random_simplex(&mut rng, n)).unwrap();

        let expect_gap = |f: &[f64]| -> f64 {
            let e_mu: f64 = f.iter().zip(mu.probs()).map(|(v, p)| v * p).sum();
            let e_nu: f64 = f.iter().zip(nu.probs()).map(|(v, p)| v * p).sum();
            (e_mu - e_nu).abs()
        };

        // bounded recipe: |f| <= xi gives |E_mu f - E_nu f| <= xi * 2 TV
        let f_bounded: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let xi = f_bounded.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bound = xi * 2.0 * tv(&mu, &nu).unwrap();
        if expect_gap(&f_bounded) > bound + 1e-12 {
            failures.push(format!("case {case}: bounded/TV recipe violated"));
        }

        // Lipschitz recipe: slope-limited f gives |gap| <= L * W1
        let lip = rng.gen_range(0.5..3.0);
        let mut f_lip = vec![rng.gen_range(-1.0..1.0f64)];
        for i in 1..n {
            let slope = rng.gen_range(-lip..lip);
            let prev = f_lip[i - 1];
            f_lip.push(prev + slope * (xs[i] - xs[i - 1]));
        }
        let bound = lip * w1_1d(&mu, &nu).unwrap();
        if expect_gap(&f_lip) > bound + 1e-12 {
            failures.push(format!("case {case}: Lipschitz/W1 recipe violated"));
        }

        // bounded-range sub-Gaussian recipe: xi = (max - min)/2 certifies
        // |gap| <= xi sqrt(2 KL(nu||mu))
        let spread = f_bounded.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
            - f_bounded.iter().fold(f64::INFINITY, |m, v| m.min(*v));
        let xi_sg = spread / 2.0;
        let bound = xi_sg * (2.0 * kl(&nu, &mu).unwrap()).sqrt();
        if expect_gap(&f_bounded) > bound + 1e-12 {
            failures.push(format!("case {case}: sub-Gaussian/KL recipe violated"));
        }
    }
    SuiteReport { suite: "regularity", cases: 100, failures }
}
