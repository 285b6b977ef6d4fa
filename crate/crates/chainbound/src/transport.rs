//! Exact discrete optimal transport.
//!
//! `w1_discrete` solves the transportation linear program exactly via
//! successive shortest augmenting paths with node potentials (reduced costs
//! stay non-negative, so plain Dijkstra applies). No entropic smoothing:
//! bound values are upper bounds and must match closed forms to 1e-8.
//!
//! On the line the optimal coupling is the quantile coupling, so `w1_1d`
//! integrates `|F_mu - F_nu|` directly.

use crate::dist::DiscreteDistribution;
use crate::error::{Error, Result};

/// Mass below which a supply or demand is treated as exhausted.
const MASS_EPS: f64 = 1e-15;

/// Exact 1-Wasserstein distance between two finite distributions under an
/// explicit non-negative cost matrix (`cost[i][j]` moves mass from `mu` atom
/// `i` to `nu` atom `j`).
pub fn w1_discrete(
    mu: &DiscreteDistribution,
    nu: &DiscreteDistribution,
    cost: &[Vec<f64>],
) -> Result<f64> {
    if cost.len() != mu.len() || cost.iter().any(|row| row.len() != nu.len()) {
        return Err(Error::DimensionMismatch(format!(
            "cost matrix {}x{} vs supports {}x{}",
            cost.len(),
            cost.first().map_or(0, Vec::len),
            mu.len(),
            nu.len()
        )));
    }
    if cost.iter().flatten().any(|c| *c < 0.0 || !c.is_finite()) {
        return Err(Error::BadConfig("transport costs must be finite and non-negative".into()));
    }
    Ok(solve_transport(mu.probs(), nu.probs(), |i, j| cost[i][j]))
}

/// Exact 1D 1-Wasserstein distance via the quantile coupling; atoms must
/// carry scalar coordinates.
pub fn w1_1d(mu: &DiscreteDistribution, nu: &DiscreteDistribution) -> Result<f64> {
    let xs = mu.scalar_coords()?;
    let ys = nu.scalar_coords()?;
    Ok(w1_1d_weighted(&xs, mu.probs(), &ys, nu.probs()))
}

/// 1D transport between raw weighted point lists.
pub fn w1_1d_weighted(xs: &[f64], ps: &[f64], ys: &[f64], qs: &[f64]) -> f64 {
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(xs.len() + ys.len());
    events.extend(xs.iter().zip(ps).map(|(&x, &p)| (x, p)));
    events.extend(ys.iter().zip(qs).map(|(&y, &q)| (y, -q)));
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("non-NaN coordinates"));
    let mut total = 0.0f64;
    let mut cdf_diff = 0.0f64;
    let mut prev = match events.first() {
        Some(e) => e.0,
        None => return 0.0,
    };
    for (x, dp) in events {
        total += cdf_diff.abs() * (x - prev);
        cdf_diff += dp;
        prev = x;
    }
    total
}

/// 1D transport between two mass vectors on a shared support. `order` is the
/// index permutation sorting `xs` ascending; precomputing it turns repeated
/// per-cell calls into a single linear walk.
pub fn w1_common_support(order: &[usize], xs: &[f64], p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut cdf_diff = 0.0;
    for w in order.windows(2) {
        cdf_diff += p[w[0]] - q[w[0]];
        total += cdf_diff.abs() * (xs[w[1]] - xs[w[0]]);
    }
    total
}

/// Successive-shortest-path solver for the transportation problem. Supplies
/// and demands must each sum to the same total (validated upstream: both are
/// probability vectors). A super-source node feeds every source with
/// remaining surplus, which keeps the reduced-cost invariant across
/// iterations; Dijkstra then runs on non-negative reduced costs.
pub fn solve_transport(supply: &[f64], demand: &[f64], cost: impl Fn(usize, usize) -> f64) -> f64 {
    let n = supply.len();
    let m = demand.len();
    let ss = n + m; // super-source index
    let mut surplus = supply.to_vec();
    let mut deficit = demand.to_vec();
    let mut flow = vec![0.0f64; n * m];
    // node potentials: sources, sinks, super-source
    let mut pot = vec![0.0f64; n + m + 1];

    let mut remaining: f64 = surplus.iter().sum();
    let mut guard = 0usize;
    let guard_max = 64 * (n + m).max(4) * (n + m).max(4);
    while remaining > MASS_EPS {
        guard += 1;
        assert!(guard <= guard_max, "transport solver failed to make progress");
        let inf = f64::INFINITY;
        let mut dist = vec![inf; n + m + 1];
        let mut parent: Vec<Option<usize>> = vec![None; n + m + 1];
        let mut done = vec![false; n + m + 1];
        dist[ss] = 0.0;
        // Dijkstra runs to completion: every reachable node must receive its
        // exact distance, otherwise flow-bearing sources hidden behind
        // un-popped sinks would keep stale potentials and the reduced-cost
        // invariant would break on their forward arcs.
        loop {
            let mut best = None;
            let mut best_d = inf;
            for (x, &d) in dist.iter().enumerate() {
                if !done[x] && d < best_d {
                    best_d = d;
                    best = Some(x);
                }
            }
            let Some(x) = best else { break };
            done[x] = true;
            if x == ss {
                // zero-cost arcs to all sources with remaining surplus
                for (i, &s) in surplus.iter().enumerate() {
                    if s > MASS_EPS {
                        let rc = (pot[ss] - pot[i]).max(0.0);
                        if best_d + rc < dist[i] {
                            dist[i] = best_d + rc;
                            parent[i] = Some(ss);
                        }
                    }
                }
            } else if x < n {
                // forward arcs to every sink
                for j in 0..m {
                    let rc = (cost(x, j) + pot[x] - pot[n + j]).max(0.0);
                    if best_d + rc < dist[n + j] {
                        dist[n + j] = best_d + rc;
                        parent[n + j] = Some(x);
                    }
                }
            } else {
                // backward arcs along positive flows
                let j = x - n;
                for i in 0..n {
                    if flow[i * m + j] > MASS_EPS {
                        let rc = (-cost(i, j) + pot[n + j] - pot[i]).max(0.0);
                        if best_d + rc < dist[i] {
                            dist[i] = best_d + rc;
                            parent[i] = Some(n + j);
                        }
                    }
                }
            }
        }
        let target = (0..m)
            .filter(|&j| deficit[j] > MASS_EPS && dist[n + j] < inf)
            .min_by(|&a, &b| dist[n + a].partial_cmp(&dist[n + b]).unwrap());
        let t = target.expect("feasible transportation problem");
        let dt = dist[n + t];
        for (x, p) in pot.iter_mut().enumerate() {
            if dist[x] < inf {
                *p += dist[x].min(dt);
            }
        }
        // trace the augmenting path back to the super-source
        let mut path = Vec::new();
        let mut node = n + t;
        while let Some(prev) = parent[node] {
            if prev != ss {
                path.push((prev, node));
            }
            node = prev;
        }
        debug_assert_eq!(node, ss);
        let source = path.last().expect("path has at least one arc").0;
        let mut delta = surplus[source].min(deficit[t]);
        for &(a, b) in &path {
            if a >= n {
                // backward arc (sink a -> source b): limited by current flow
                delta = delta.min(flow[b * m + (a - n)]);
            }
        }
        for &(a, b) in &path {
            if a < n {
                flow[a * m + (b - n)] += delta;
            } else {
                flow[b * m + (a - n)] -= delta;
            }
        }
        surplus[source] -= delta;
        deficit[t] -= delta;
        remaining -= delta;
    }

    let mut total = 0.0;
    for i in 0..n {
        for j in 0..m {
            let f = flow[i * m + j];
            if f > 0.0 {
                total += f * cost(i, j);
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Atom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dist_at(points: &[f64], probs: &[f64]) -> DiscreteDistribution {
        let atoms = points
            .iter()
            .enumerate()
            .map(|(i, &x)| Atom::with_coords(format!("p{i}"), vec![x]))
            .collect();
        DiscreteDistribution::new(atoms, probs.to_vec()).unwrap()
    }

    /// Minimum cost over all basic feasible plans of a 3x3 transportation
    /// polytope: every vertex is supported on a spanning forest, so
    /// enumerating 5-edge spanning trees of K_{3,3} and peeling leaves finds
    /// the exact optimum.
    fn vertex_enumeration_3x3(a: &[f64; 3], b: &[f64; 3], c: &[[f64; 3]; 3]) -> f64 {
        let edges: Vec<(usize, usize)> =
            (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << 9) {
            if mask.count_ones() != 5 {
                continue;
            }
            let tree: Vec<(usize, usize)> = edges
                .iter()
                .enumerate()
                .filter(|(e, _)| mask & (1 << e) != 0)
                .map(|(_, &ij)| ij)
                .collect();
            // peel leaves: each leaf pins its unique incident edge's flow
            let mut remaining = tree.clone();
            let mut supply = *a;
            let mut demand = *b;
            let mut flows: Vec<(usize, usize, f64)> = Vec::new();
            let mut ok = true;
            while !remaining.is_empty() {
                let mut deg = [[0usize; 3]; 2];
                for &(i, j) in &remaining {
                    deg[0][i] += 1;
                    deg[1][j] += 1;
                }
                let leaf = remaining.iter().position(|&(i, j)| deg[0][i] == 1 || deg[1][j] == 1);
                let Some(pos) = leaf else {
                    ok = false; // cycle: not a forest
                    break;
                };
                let (i, j) = remaining.swap_remove(pos);
                let f = if deg[0][i] == 1 { supply[i] } else { demand[j] };
                flows.push((i, j, f));
                supply[i] -= f;
                demand[j] -= f;
            }
            if !ok
                || supply.iter().any(|s| s.abs() > 1e-9)
                || demand.iter().any(|d| d.abs() > 1e-9)
                || flows.iter().any(|&(_, _, f)| f < -1e-12)
            {
                continue;
            }
            let total: f64 = flows.iter().map(|&(i, j, f)| f * c[i][j]).sum();
            best = best.min(total);
        }
        best
    }

    #[test]
    fn identical_distributions_cost_zero() {
        let mu = dist_at(&[0.0, 1.0], &[0.4, 0.6]);
        let cost = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(w1_discrete(&mu, &mu, &cost).unwrap(), 0.0);
    }

    #[test]
    fn point_masses_move_at_stated_cost() {
        let mu = dist_at(&[0.0], &[1.0]);
        let nu = dist_at(&[3.0], &[1.0]);
        assert!((w1_discrete(&mu, &nu, &[vec![3.0]]).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mu = dist_at(&[0.0, 1.0], &[0.5, 0.5]);
        let nu = dist_at(&[0.0], &[1.0]);
        let err = w1_discrete(&mu, &nu, &[vec![0.0, 1.0]]).unwrap_err();
        assert_eq!(err.code(), "DIMENSION_MISMATCH");
    }

    #[test]
    fn solver_matches_vertex_enumeration_on_random_3x3() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for case in 0..200 {
            let mut a = [0.0; 3];
            let mut b = [0.0; 3];
            for x in &mut a {
                *x = rng.gen_range(0.05..1.0);
            }
            for x in &mut b {
                *x = rng.gen_range(0.05..1.0);
            }
            let sa: f64 = a.iter().sum();
            let sb: f64 = b.iter().sum();
            a.iter_mut().for_each(|x| *x /= sa);
            b.iter_mut().for_each(|x| *x /= sb);
            let mut c = [[0.0; 3]; 3];
            for row in &mut c {
                for x in row.iter_mut() {
                    *x = rng.gen_range(0.0..5.0);
                }
            }
            let oracle = vertex_enumeration_3x3(&a, &b, &c);
            let got = solve_transport(&a, &b, |i, j| c[i][j]);
            assert!(
                (oracle - got).abs() < 1e-10,
                "case {case}: solver {got} vs vertex enumeration {oracle}"
            );
        }
    }

    #[test]
    fn one_dimensional_route_agrees_with_lp() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for case in 0..100 {
            let n = rng.gen_range(2..=16);
            let m = rng.gen_range(2..=16);
            let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let ys: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut ps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
            let mut qs: Vec<f64> = (0..m).map(|_| rng.gen_range(0.01..1.0)).collect();
            let sp: f64 = ps.iter().sum();
            let sq: f64 = qs.iter().sum();
            ps.iter_mut().for_each(|p| *p /= sp);
            qs.iter_mut().for_each(|q| *q /= sq);
            let mu = dist_at(&xs, &ps);
            let nu = dist_at(&ys, &qs);
            let cost: Vec<Vec<f64>> =
                xs.iter().map(|x| ys.iter().map(|y| (x - y).abs()).collect()).collect();
            let lp = w1_discrete(&mu, &nu, &cost).unwrap();
            let quantile = w1_1d(&mu, &nu).unwrap();
            assert!(
                (lp - quantile).abs() < 1e-10,
                "case {case}: lp {lp} vs quantile {quantile}"
            );
        }
    }

    #[test]
    fn degenerate_ties_terminate_and_stay_exact() {
        // uniform masses with lattice costs maximize pivot ties
        let n = 8;
        let p = vec![1.0 / n as f64; n];
        let identity = solve_transport(&p, &p, |i, j| (i as i64 - j as i64).unsigned_abs() as f64);
        assert!(identity.abs() < 1e-14, "identity transport must be free: {identity}");
        // supplies at 0..8, demands at 1..9: a unit translation, full of
        // equal-cost alternatives
        let shift =
            solve_transport(&p, &p, |i, j| (i as i64 - (j as i64 + 1)).unsigned_abs() as f64);
        assert!((shift - 1.0).abs() < 1e-12, "translation costs its distance: {shift}");
    }

    #[test]
    fn translation_moves_by_the_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let shifted: Vec<f64> = xs.iter().map(|x| x + 0.7).collect();
        let probs = vec![0.05; 20];
        let mu = dist_at(&xs, &probs);
        let nu = dist_at(&shifted, &probs);
        assert!((w1_1d(&mu, &nu).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn common_support_walk_matches_general_walk() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 32;
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
        for _ in 0..20 {
            let mut p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let sp: f64 = p.iter().sum();
            let sq: f64 = q.iter().sum();
            p.iter_mut().for_each(|x| *x /= sp);
            q.iter_mut().for_each(|x| *x /= sq);
            let fast = w1_common_support(&order, &xs, &p, &q);
            let general = w1_1d_weighted(&xs, &p, &xs, &q);
            assert!((fast - general).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_coords_surface_as_error() {
        let mu = DiscreteDistribution::new(
            vec![Atom::plain("a"), Atom::plain("b")],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert_eq!(w1_1d(&mu, &mu).unwrap_err().code(), "MISSING_COORDS");
    }
}
