//! Refining sequences of nets on boxes and the circle: finite level point
//! sets `W_k`, radii `eps_k`, level projections and preimage cells.
//!
//! Two projection styles are provided per domain.
//!
//! * `dyadic_box` / `circle`: net points at the classical dyadic positions
//!   (`2^{1-k} j` per coordinate, resp. angles `2 pi j / 2^k`) with
//!   per-level centered rounding. These reproduce the textbook per-level
//!   partitions (two half-width boundary cells on a centred support) and are
//!   what the toy models evaluate against. Their cells at consecutive levels
//!   do **not** nest, so `pi_{k-1} . pi_k = pi_{k-1}` fails on a set of
//!   positive measure; `refining()` reports `false`. This is not fixable by
//!   a better tie rule: with radii `2^{-k}` every point of `(p - eps_k,
//!   p + eps_k)` has `p` as its only admissible image, which forces the
//!   centred cells, and centred cells at consecutive levels cannot nest.
//! * `nested_dyadic_box` / `nested_circle`: cell-centre points on nested
//!   half-open cells. All four net axioms hold exactly, with the same radii.
//!
//! A generic nearest-point constructor for user-supplied point sets validates
//! the axioms on a sample and rejects violations.

use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

const TAU: f64 = 2.0 * PI;
/// Relative snap width for boundary ties, so grid-exact inputs project
/// deterministically despite float wobble.
const TIE_SNAP: f64 = 1e-9;

/// One net point: a label (stable across rebuilds) plus coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetPoint {
    pub label: String,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Projection {
    /// Points `2^{1-k} j`, centred half-open cells `[p - 2^{-k}, p + 2^{-k})`.
    DyadicCentered,
    /// Points at centres of nested cells `[c 2^{1-k}, (c+1) 2^{1-k})`.
    DyadicNested,
    /// Angles `2 pi j / 2^k`, centred angular cells, ties to the lower index.
    CircleCentered,
    /// Arc-centre points on nested arcs `[2 pi c / 2^k, 2 pi (c+1) / 2^k)`.
    CircleNested,
    /// Nearest point among the stored level lists.
    Explicit,
}

/// A materialized `{eps_k}`-sequence of nets with level projections.
#[derive(Debug, Clone)]
pub struct RefiningNetSequence {
    name: String,
    dim: usize,
    radii: Vec<f64>,
    levels: Vec<Vec<NetPoint>>,
    projection: Projection,
    refining: bool,
    /// Geometric decay ratio of the radii beyond the materialized depth,
    /// when known; `None` means no tail certificate is available.
    tail_ratio: Option<f64>,
}

impl RefiningNetSequence {
    /// Dyadic nets on `[-1,1]^dim`: level `k` points `{2^{1-k} j}` per
    /// coordinate with `j in [-2^{k-1} .. 2^{k-1}]`, radii
    /// `eps_k = 2^{-k} sqrt(dim)`, centred rounding with half-open cells
    /// (topmost boundary closed).
    pub fn dyadic_box(dim: usize, k_max: usize) -> Result<Self> {
        if dim == 0 || k_max == 0 {
            return Err(Error::BadConfig("dyadic nets need dim >= 1, k_max >= 1".into()));
        }
        let radii = (0..=k_max).map(|k| pow2(-(k as i32)) * (dim as f64).sqrt()).collect();
        let levels = (0..=k_max).map(|k| dyadic_centered_level(dim, k)).collect();
        Ok(RefiningNetSequence {
            name: format!("dyadic:{dim}:{k_max}"),
            dim,
            radii,
            levels,
            projection: Projection::DyadicCentered,
            refining: false,
            tail_ratio: Some(0.5),
        })
    }

    /// Nested dyadic nets on `[-1,1]^dim`: level `k` has `2^k` half-open
    /// cells per coordinate with points at the cell centres, radii
    /// `eps_k = 2^{-k} sqrt(dim)`. All four net axioms hold exactly.
    pub fn nested_dyadic_box(dim: usize, k_max: usize) -> Result<Self> {
        if dim == 0 || k_max == 0 {
            return Err(Error::BadConfig("dyadic nets need dim >= 1, k_max >= 1".into()));
        }
        let radii = (0..=k_max).map(|k| pow2(-(k as i32)) * (dim as f64).sqrt()).collect();
        let levels = (0..=k_max).map(|k| dyadic_nested_level(dim, k)).collect();
        Ok(RefiningNetSequence {
            name: format!("nested-dyadic:{dim}:{k_max}"),
            dim,
            radii,
            levels,
            projection: Projection::DyadicNested,
            refining: true,
            tail_ratio: Some(0.5),
        })
    }

    /// Angular dyadic nets on the unit circle: level `k` has the `2^k`
    /// points `(cos 2 pi j / 2^k, sin 2 pi j / 2^k)`, radii `eps_k = 4/2^k`,
    /// `w_0 = (1, 0)`. Projection rounds the angle to the nearest level-`k`
    /// grid angle, ties toward the lower adjacent index.
    pub fn circle(k_max: usize) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::BadConfig("circle nets need k_max >= 1".into()));
        }
        let radii = (0..=k_max).map(|k| 4.0 * pow2(-(k as i32))).collect();
        let levels = (0..=k_max).map(circle_centered_level).collect();
        Ok(RefiningNetSequence {
            name: format!("circle:{k_max}"),
            dim: 2,
            radii,
            levels,
            projection: Projection::CircleCentered,
            refining: false,
            tail_ratio: Some(0.5),
        })
    }

    /// Nested circle nets: level `k` splits the circle into `2^k` half-open
    /// arcs with points at the arc centres, radii `eps_k = 4/2^k`. All four
    /// net axioms hold exactly.
    pub fn nested_circle(k_max: usize) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::BadConfig("circle nets need k_max >= 1".into()));
        }
        let radii = (0..=k_max).map(|k| 4.0 * pow2(-(k as i32))).collect();
        let levels = (0..=k_max).map(circle_nested_level).collect();
        Ok(RefiningNetSequence {
            name: format!("nested-circle:{k_max}"),
            dim: 2,
            radii,
            levels,
            projection: Projection::CircleNested,
            refining: true,
            tail_ratio: Some(0.5),
        })
    }

    /// Generic nearest-point nets over user-supplied level lists. The
    /// refining axioms are validated on the supplied points plus a
    /// deterministic sample of perturbations; violations are rejected.
    /// No tail certificate is attached (radii beyond the last level are
    /// unknown), so chained evaluation must truncate at `k_max`.
    pub fn from_level_points(levels: Vec<Vec<NetPoint>>, radii: Vec<f64>) -> Result<Self> {
        if levels.len() != radii.len() || levels.len() < 2 {
            return Err(Error::BadConfig(
                "need matching level and radius lists covering k = 0..=k_max, k_max >= 1".into(),
            ));
        }
        if levels[0].len() != 1 {
            return Err(Error::NetValidation("level 0 must be a single point".into()));
        }
        let dim = levels[0][0].coords.len();
        if levels.iter().flatten().any(|p| p.coords.len() != dim) {
            return Err(Error::DimensionMismatch("net points of mixed dimension".into()));
        }
        let net = RefiningNetSequence {
            name: format!("explicit:{}", levels.len() - 1),
            dim,
            radii,
            levels,
            projection: Projection::Explicit,
            refining: true,
            tail_ratio: None,
        };
        net.validate_axioms()?;
        Ok(net)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Deepest materialized level.
    pub fn k_max(&self) -> usize {
        self.levels.len() - 1
    }

    /// Radius `eps_k`.
    pub fn radius(&self, k: usize) -> f64 {
        self.radii[k]
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Whether the composition axiom `pi_{k-1} . pi_k = pi_{k-1}` holds
    /// exactly for this family.
    pub fn refining(&self) -> bool {
        self.refining
    }

    pub fn level(&self, k: usize) -> &[NetPoint] {
        &self.levels[k]
    }

    pub fn point(&self, k: usize, idx: usize) -> &NetPoint {
        &self.levels[k][idx]
    }

    /// `sum_{j >= t} eps_j`, extending the materialized radii by their
    /// geometric decay; `None` when the decay beyond `k_max` is unknown.
    pub fn tail_radius_sum(&self, t: usize) -> Option<f64> {
        let ratio = self.tail_ratio?;
        let start = if t <= self.k_max() {
            self.radii[t]
        } else {
            self.radii[self.k_max()] * ratio.powi((t - self.k_max()) as i32)
        };
        Some(start / (1.0 - ratio))
    }

    /// Project `w` onto level `k`, returning the net point.
    pub fn project(&self, w: &[f64], k: usize) -> Result<&NetPoint> {
        let idx = self.project_index(w, k)?;
        Ok(&self.levels[k][idx])
    }

    /// Project `w` onto level `k`, returning the point's index within the
    /// level list.
    pub fn project_index(&self, w: &[f64], k: usize) -> Result<usize> {
        if k > self.k_max() {
            return Err(Error::BadLevel(format!("k = {k} > k_max = {}", self.k_max())));
        }
        if w.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "point of dimension {} vs net dimension {}",
                w.len(),
                self.dim
            )));
        }
        match self.projection {
            Projection::DyadicCentered => {
                check_box_domain(w)?;
                if k == 0 {
                    return Ok(0);
                }
                let per = (1usize << k) + 1;
                let jmax = 1i64 << (k - 1);
                let mut idx = 0usize;
                for &x in w {
                    let spacing = pow2(1 - k as i32);
                    let j = snap_floor(x / spacing + 0.5).clamp(-jmax, jmax);
                    idx = idx * per + (j + jmax) as usize;
                }
                Ok(idx)
            }
            Projection::DyadicNested => {
                check_box_domain(w)?;
                if k == 0 {
                    return Ok(0);
                }
                let per = 1usize << k;
                let cmax = (1i64 << (k - 1)) - 1;
                let cmin = -(1i64 << (k - 1));
                let mut idx = 0usize;
                for &x in w {
                    let width = pow2(1 - k as i32);
                    let c = snap_floor(x / width).clamp(cmin, cmax);
                    idx = idx * per + (c - cmin) as usize;
                }
                Ok(idx)
            }
            Projection::CircleCentered => {
                let phi = circle_angle(w)?;
                if k == 0 {
                    return Ok(0);
                }
                let n = 1usize << k;
                let t = phi / TAU * n as f64;
                // nearest grid index, half-integer ties toward the lower index
                let j = snap_ceil(t - 0.5).rem_euclid(n as i64);
                Ok(j as usize)
            }
            Projection::CircleNested => {
                let phi = circle_angle(w)?;
                if k == 0 {
                    return Ok(0);
                }
                let n = 1usize << k;
                let c = snap_floor(phi / TAU * n as f64).rem_euclid(n as i64);
                Ok(c as usize)
            }
            Projection::Explicit => {
                let pts = &self.levels[k];
                let mut best = 0usize;
                let mut best_d = f64::INFINITY;
                for (i, p) in pts.iter().enumerate() {
                    let d = euclid(w, &p.coords);
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                if best_d > self.radii[k] * (1.0 + 1e-9) {
                    return Err(Error::OutOfDomain(format!(
                        "nearest level-{k} point at distance {best_d} > eps_{k} = {}",
                        self.radii[k]
                    )));
                }
                Ok(best)
            }
        }
    }

    /// Preimage cells of level `k` as human-readable descriptions: each cell
    /// owner with its bounds (intervals per coordinate for boxes, angular
    /// range for circles).
    pub fn cells(&self, k: usize) -> Result<Vec<Cell>> {
        if k > self.k_max() {
            return Err(Error::BadLevel(format!("k = {k} > k_max = {}", self.k_max())));
        }
        let level = &self.levels[k];
        let describe = |idx: usize| -> Cell {
            let bounds = match self.projection {
                Projection::DyadicCentered => box_cell_bounds(self.dim, k, idx, true),
                Projection::DyadicNested => box_cell_bounds(self.dim, k, idx, false),
                Projection::CircleCentered => {
                    if k == 0 {
                        vec![(0.0, TAU)]
                    } else {
                        let n = (1usize << k) as f64;
                        let centre = TAU * idx as f64 / n;
                        vec![(centre - PI / n, centre + PI / n)]
                    }
                }
                Projection::CircleNested => {
                    if k == 0 {
                        vec![(0.0, TAU)]
                    } else {
                        let n = (1usize << k) as f64;
                        vec![(TAU * idx as f64 / n, TAU * (idx as f64 + 1.0) / n)]
                    }
                }
                Projection::Explicit => Vec::new(),
            };
            Cell { point_index: idx, label: level[idx].label.clone(), bounds }
        };
        Ok((0..level.len()).map(describe).collect())
    }

    /// Masses a distribution over coordinate-carrying atoms assigns to the
    /// level-`k` cells, in level point order.
    pub fn cell_masses(
        &self,
        k: usize,
        dist: &crate::dist::DiscreteDistribution,
    ) -> Result<Vec<f64>> {
        let mut masses = vec![0.0; self.levels[k].len()];
        for (atom, &p) in dist.atoms().iter().zip(dist.probs()) {
            let coords = atom
                .coords
                .as_deref()
                .ok_or_else(|| Error::MissingCoords(atom.label.clone()))?;
            masses[self.project_index(coords, k)?] += p;
        }
        Ok(masses)
    }

    /// Validate the four net axioms on the union of level points plus a
    /// seeded sample of in-domain points.
    pub fn validate_axioms(&self) -> Result<()> {
        for k in 1..=self.k_max() {
            if self.radii[k] >= self.radii[k - 1] {
                return Err(Error::NetValidation(format!(
                    "radii not strictly decreasing at k = {k}"
                )));
            }
        }
        let samples = self.validation_sample();
        let w0 = &self.levels[0][0].coords;
        for w in &samples {
            if euclid(w, w0) > self.radii[0] * (1.0 + 1e-9) {
                return Err(Error::NetValidation(format!(
                    "w_0 does not cover the sampled point {w:?} within eps_0"
                )));
            }
            for k in 1..=self.k_max() {
                let pc = self.project(w, k)?.coords.clone();
                let d = euclid(w, &pc);
                if d > self.radii[k] * (1.0 + 1e-9) {
                    return Err(Error::NetValidation(format!(
                        "|pi_{k}(w) - w| = {d} > eps_{k} = {} at w = {w:?}",
                        self.radii[k]
                    )));
                }
                let direct = self.project(w, k - 1)?.label.clone();
                let via = self.project(&pc, k - 1)?.label.clone();
                if direct != via {
                    return Err(Error::NetValidation(format!(
                        "pi_{}(pi_{k}(w)) = {via} but pi_{}(w) = {direct} at w = {w:?}",
                        k - 1,
                        k - 1
                    )));
                }
            }
        }
        Ok(())
    }

    fn validation_sample(&self) -> Vec<Vec<f64>> {
        use rand::{Rng, SeedableRng};
        let mut out: Vec<Vec<f64>> =
            self.levels.iter().flatten().map(|p| p.coords.clone()).collect();
        // bounding box of the supplied points, for explicit nets
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.levels.iter().flatten() {
            for (d, &c) in p.coords.iter().enumerate() {
                lo[d] = lo[d].min(c);
                hi[d] = hi[d].max(c);
            }
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x6e65_7473);
        let finest = self.k_max();
        for base in self.levels[finest].clone() {
            for _ in 0..4 {
                let mut w: Vec<f64> = base
                    .coords
                    .iter()
                    .map(|c| c + rng.gen_range(-1.0..1.0) * self.radii[finest])
                    .collect();
                match self.projection {
                    Projection::CircleCentered | Projection::CircleNested => {
                        let n = (w[0] * w[0] + w[1] * w[1]).sqrt();
                        w = vec![w[0] / n, w[1] / n];
                    }
                    Projection::DyadicCentered | Projection::DyadicNested => {
                        for x in &mut w {
                            *x = x.clamp(-1.0, 1.0);
                        }
                    }
                    Projection::Explicit => {
                        for (d, x) in w.iter_mut().enumerate() {
                            *x = x.clamp(lo[d], hi[d]);
                        }
                    }
                }
                out.push(w);
            }
        }
        out
    }
}

/// A preimage cell description: owning point plus per-coordinate bounds
/// (half-open except at the top of the domain), or an angular range for
/// circle nets.
#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub point_index: usize,
    pub label: String,
    pub bounds: Vec<(f64, f64)>,
}

fn pow2(e: i32) -> f64 {
    (e as f64).exp2()
}

/// Per-coordinate bounds of a box cell, clipped to `[-1, 1]`.
fn box_cell_bounds(dim: usize, k: usize, idx: usize, centered: bool) -> Vec<(f64, f64)> {
    if k == 0 {
        return vec![(-1.0, 1.0); dim];
    }
    let per = if centered { (1usize << k) + 1 } else { 1usize << k };
    // unpack the mixed-radix index, most significant coordinate first
    let mut digits = vec![0usize; dim];
    let mut rest = idx;
    for d in (0..dim).rev() {
        digits[d] = rest % per;
        rest /= per;
    }
    let spacing = pow2(1 - k as i32);
    digits
        .into_iter()
        .map(|digit| {
            if centered {
                let j = digit as i64 - (1i64 << (k - 1));
                let centre = j as f64 * spacing;
                ((centre - spacing / 2.0).max(-1.0), (centre + spacing / 2.0).min(1.0))
            } else {
                let c = digit as i64 - (1i64 << (k - 1));
                (c as f64 * spacing, (c as f64 + 1.0) * spacing)
            }
        })
        .collect()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_box_domain(w: &[f64]) -> Result<()> {
    for &x in w {
        if !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&x) {
            return Err(Error::OutOfDomain(format!("coordinate {x} outside [-1, 1]")));
        }
    }
    Ok(())
}

fn circle_angle(w: &[f64]) -> Result<f64> {
    let norm = (w[0] * w[0] + w[1] * w[1]).sqrt();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::OutOfDomain(format!("point has norm {norm}, expected 1")));
    }
    let phi = w[1].atan2(w[0]);
    Ok(if phi < 0.0 { phi + TAU } else { phi })
}

/// Floor with a snap window so values that are boundary-exact up to float
/// wobble land deterministically on the boundary's own cell.
fn snap_floor(t: f64) -> i64 {
    let r = t.round();
    if (t - r).abs() < TIE_SNAP * r.abs().max(1.0) {
        r as i64
    } else {
        t.floor() as i64
    }
}

/// Ceil with the same snap window; snapped values take the integer itself,
/// which sends half-integer ties down.
fn snap_ceil(t: f64) -> i64 {
    let r = t.round();
    if (t - r).abs() < TIE_SNAP * r.abs().max(1.0) {
        r as i64
    } else {
        t.ceil() as i64
    }
}

fn dyadic_centered_level(dim: usize, k: usize) -> Vec<NetPoint> {
    if k == 0 {
        return vec![NetPoint { label: "d0:0".into(), coords: vec![0.0; dim] }];
    }
    let jmax = 1i64 << (k - 1);
    let per: Vec<i64> = (-jmax..=jmax).collect();
    product_points(dim, &per, |js| {
        let coords = js.iter().map(|&j| j as f64 * pow2(1 - k as i32)).collect();
        let tag = js.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",");
        NetPoint { label: format!("d{k}:{tag}"), coords }
    })
}

fn dyadic_nested_level(dim: usize, k: usize) -> Vec<NetPoint> {
    if k == 0 {
        return vec![NetPoint { label: "n0:0".into(), coords: vec![0.0; dim] }];
    }
    let cmax = (1i64 << (k - 1)) - 1;
    let cmin = -(1i64 << (k - 1));
    let per: Vec<i64> = (cmin..=cmax).collect();
    product_points(dim, &per, |cs| {
        let coords = cs.iter().map(|&c| (c as f64 + 0.5) * pow2(1 - k as i32)).collect();
        let tag = cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        NetPoint { label: format!("n{k}:{tag}"), coords }
    })
}

fn product_points(
    dim: usize,
    per: &[i64],
    make: impl Fn(&[i64]) -> NetPoint,
) -> Vec<NetPoint> {
    let mut out = Vec::with_capacity(per.len().pow(dim as u32));
    let mut idx = vec![0usize; dim];
    loop {
        let js: Vec<i64> = idx.iter().map(|&i| per[i]).collect();
        out.push(make(&js));
        // odometer increment, most significant digit first to match the
        // mixed-radix order used by project_index
        let mut d = dim;
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < per.len() {
                break;
            }
            idx[d] = 0;
        }
    }
}

fn circle_centered_level(k: usize) -> Vec<NetPoint> {
    if k == 0 {
        return vec![NetPoint { label: "c0:0".into(), coords: vec![1.0, 0.0] }];
    }
    let n = 1usize << k;
    (0..n)
        .map(|j| {
            let phi = TAU * j as f64 / n as f64;
            NetPoint { label: format!("c{k}:{j}"), coords: vec![phi.cos(), phi.sin()] }
        })
        .collect()
}

fn circle_nested_level(k: usize) -> Vec<NetPoint> {
    if k == 0 {
        return vec![NetPoint { label: "a0:0".into(), coords: vec![1.0, 0.0] }];
    }
    let n = 1usize << k;
    (0..n)
        .map(|c| {
            let phi = TAU * (c as f64 + 0.5) / n as f64;
            NetPoint { label: format!("a{k}:{c}"), coords: vec![phi.cos(), phi.sin()] }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dyadic_level_one_points() {
        let net = RefiningNetSequence::dyadic_box(1, 3).unwrap();
        let pts: Vec<f64> = net.level(1).iter().map(|p| p.coords[0]).collect();
        assert_eq!(pts, vec![-1.0, 0.0, 1.0]);
        assert!((net.radius(3) - 0.125).abs() < 1e-15, "eps_3 = {}", net.radius(3));
    }

    #[test]
    fn dyadic_level_counts() {
        let net = RefiningNetSequence::dyadic_box(1, 6).unwrap();
        for k in 0..=6 {
            let expect = if k == 0 { 1 } else { (1 << k) + 1 };
            assert_eq!(net.level(k).len(), expect, "level {k}");
        }
        let nested = RefiningNetSequence::nested_dyadic_box(1, 6).unwrap();
        for k in 1..=6 {
            assert_eq!(nested.level(k).len(), 1 << k);
        }
    }

    #[test]
    fn circle_level_one_points_and_radius() {
        let net = RefiningNetSequence::circle(4).unwrap();
        assert_eq!(net.level(1).len(), 2);
        let p0 = &net.level(1)[0].coords;
        let p1 = &net.level(1)[1].coords;
        assert!((p0[0] - 1.0).abs() < 1e-15 && p0[1].abs() < 1e-15);
        assert!((p1[0] + 1.0).abs() < 1e-15 && p1[1].abs() < 1e-12);
        assert!((net.radius(2) - 1.0).abs() < 1e-15);
        for k in 0..=4 {
            let expect = if k == 0 { 1 } else { 1 << k };
            assert_eq!(net.level(k).len(), expect);
        }
    }

    #[test]
    fn two_dimensional_root_covers_the_box_corners() {
        let net = RefiningNetSequence::dyadic_box(2, 3).unwrap();
        assert_eq!(net.level(0).len(), 1);
        assert!((net.radius(0) - 2.0f64.sqrt()).abs() < 1e-15);
        for corner in [[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]] {
            let d = euclid(&corner, &net.level(0)[0].coords);
            assert!(d <= net.radius(0) + 1e-15, "corner at distance {d}");
        }
    }

    #[test]
    fn project_level_zero_is_w0() {
        let net = RefiningNetSequence::dyadic_box(1, 4).unwrap();
        for w in [-1.0, -0.37, 0.0, 0.99, 1.0] {
            assert_eq!(net.project(&[w], 0).unwrap().label, "d0:0");
        }
    }

    #[test]
    fn project_rounds_to_nearest_grid_point() {
        let net = RefiningNetSequence::dyadic_box(1, 4).unwrap();
        let p = net.project(&[0.3], 2).unwrap();
        assert!((p.coords[0] - 0.5).abs() < 1e-15, "pi_2(0.3) = {}", p.coords[0]);
    }

    #[test]
    fn boundary_tie_goes_to_upper_cell_in_boxes() {
        // cells are half-open [lower, upper): the shared boundary belongs to
        // the upper point's cell
        let net = RefiningNetSequence::dyadic_box(1, 3).unwrap();
        let p = net.project(&[0.25], 2).unwrap();
        assert!((p.coords[0] - 0.5).abs() < 1e-15);
        // topmost boundary is closed
        let top = net.project(&[1.0], 3).unwrap();
        assert!((top.coords[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_domain_rejected() {
        let net = RefiningNetSequence::dyadic_box(1, 3).unwrap();
        assert_eq!(net.project(&[1.5], 2).unwrap_err().code(), "OUT_OF_DOMAIN");
    }

    #[test]
    fn nested_families_satisfy_all_axioms() {
        for net in [
            RefiningNetSequence::nested_dyadic_box(1, 8).unwrap(),
            RefiningNetSequence::nested_dyadic_box(2, 5).unwrap(),
            RefiningNetSequence::nested_circle(8).unwrap(),
        ] {
            net.validate_axioms().unwrap_or_else(|e| panic!("{}: {e}", net.name()));
        }
    }

    #[test]
    fn nested_circle_composition_on_random_angles() {
        let net = RefiningNetSequence::nested_circle(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let phi: f64 = rng.gen_range(0.0..TAU);
            let w = [phi.cos(), phi.sin()];
            let p2 = net.project(&w, 2).unwrap().coords.clone();
            let via = net.project(&p2, 1).unwrap().label.clone();
            let direct = net.project(&w, 1).unwrap().label.clone();
            assert_eq!(via, direct, "composition failed at phi = {phi}");
        }
    }

    #[test]
    fn centered_families_fail_composition_on_known_strips() {
        // The classical dyadic positions with radii 2^{-k} admit no refining
        // projections at all; this documents where centred rounding breaks.
        let net = RefiningNetSequence::dyadic_box(1, 3).unwrap();
        let w = [0.3];
        let p2 = net.project(&w, 2).unwrap().coords.clone();
        let via = net.project(&p2, 1).unwrap().label.clone();
        let direct = net.project(&w, 1).unwrap().label.clone();
        assert_ne!(via, direct, "expected the documented composition defect");
        assert!(!net.refining());
        assert!(!RefiningNetSequence::circle(4).unwrap().refining());
    }

    #[test]
    fn centered_families_satisfy_distance_and_covering() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let net = RefiningNetSequence::dyadic_box(1, 8).unwrap();
        for _ in 0..10_000 {
            let w = [rng.gen_range(-1.0f64..1.0)];
            assert!(w[0].abs() <= net.radius(0));
            for k in 1..=8 {
                let p = net.project(&w, k).unwrap();
                assert!((p.coords[0] - w[0]).abs() <= net.radius(k) + 1e-12);
            }
        }
        let circle = RefiningNetSequence::circle(8).unwrap();
        for _ in 0..10_000 {
            let phi: f64 = rng.gen_range(0.0..TAU);
            let w = [phi.cos(), phi.sin()];
            for k in 1..=8 {
                let p = circle.project(&w, k).unwrap();
                let d = euclid(&w, &p.coords);
                assert!(d <= circle.radius(k) + 1e-12, "k={k} d={d}");
            }
        }
    }

    #[test]
    fn explicit_constructor_rejects_non_refining_points() {
        // the classical dyadic positions: provably non-refining
        let levels = vec![
            vec![NetPoint { label: "0".into(), coords: vec![0.0] }],
            vec![
                NetPoint { label: "a".into(), coords: vec![-1.0] },
                NetPoint { label: "b".into(), coords: vec![0.0] },
                NetPoint { label: "c".into(), coords: vec![1.0] },
            ],
            vec![
                NetPoint { label: "p".into(), coords: vec![-1.0] },
                NetPoint { label: "q".into(), coords: vec![-0.5] },
                NetPoint { label: "r".into(), coords: vec![0.0] },
                NetPoint { label: "s".into(), coords: vec![0.5] },
                NetPoint { label: "t".into(), coords: vec![1.0] },
            ],
        ];
        let err = RefiningNetSequence::from_level_points(levels, vec![1.0, 0.5, 0.25]);
        assert!(err.is_err(), "nearest-point hierarchy should be rejected");
    }

    #[test]
    fn explicit_constructor_accepts_nested_centres() {
        let src = RefiningNetSequence::nested_dyadic_box(1, 4).unwrap();
        let levels: Vec<Vec<NetPoint>> =
            (0..=4).map(|k| src.level(k).to_vec()).collect();
        let net = RefiningNetSequence::from_level_points(levels, src.radii().to_vec()).unwrap();
        assert!(net.refining());
        assert!(net.tail_radius_sum(1).is_none(), "explicit nets carry no tail rule");
    }

    #[test]
    fn tail_radius_sum_is_geometric() {
        let net = RefiningNetSequence::dyadic_box(1, 6).unwrap();
        // sum_{j >= t} 2^{-j} = 2^{1-t}
        for t in 0..=6 {
            let expect = (1.0f64 - t as f64).exp2();
            assert!((net.tail_radius_sum(t).unwrap() - expect).abs() < 1e-15);
        }
        assert!((net.tail_radius_sum(8).unwrap() - 2f64.powi(-7)).abs() < 1e-15);
    }

    #[test]
    fn cells_partition_the_line() {
        let net = RefiningNetSequence::dyadic_box(1, 3).unwrap();
        let cells = net.cells(0).unwrap();
        assert_eq!(cells.len(), 1);
        let cells2 = net.cells(2).unwrap();
        assert_eq!(cells2.len(), 5);
        // cell masses sum to 1 under any coordinate distribution
        let atoms: Vec<crate::dist::Atom> = (0..16)
            .map(|i| {
                crate::dist::Atom::with_coords(format!("x{i}"), vec![-1.0 + (2.0 * i as f64 + 1.0) / 16.0])
            })
            .collect();
        let d = crate::dist::DiscreteDistribution::uniform(atoms).unwrap();
        for k in 0..=3 {
            let masses = net.cell_masses(k, &d).unwrap();
            let total: f64 = masses.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
