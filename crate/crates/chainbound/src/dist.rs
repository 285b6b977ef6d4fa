//! Finite probability types: labelled atoms, discrete distributions, joint
//! channels over hypothesis x sample atoms, and the super-sample channel used
//! by conditional-information bounds.
//!
//! All types are immutable values after construction. Validation refuses,
//! rather than silently renormalizing, mass errors above `MASS_SLACK`.

use crate::error::{Error, Result};
use crate::nets::RefiningNetSequence;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Mass-validation tolerance: inputs whose total mass deviates from 1 by more
/// than this are rejected outright.
pub const MASS_SLACK: f64 = 1e-9;

/// Tolerance used when re-normalizing inputs that already sum to 1 within
/// `MASS_SLACK`, and when asserting internal mass identities.
pub const MASS_TIGHT: f64 = 1e-12;

/// A labelled point of a finite space. Coordinates are optional and only
/// required by transport costs and net projections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

impl Atom {
    pub fn plain(label: impl Into<String>) -> Self {
        Atom { label: label.into(), coords: None }
    }

    pub fn with_coords(label: impl Into<String>, coords: Vec<f64>) -> Self {
        Atom { label: label.into(), coords: Some(coords) }
    }

    pub fn scalar_coord(&self) -> Result<f64> {
        match &self.coords {
            Some(c) if c.len() == 1 => Ok(c[0]),
            Some(c) => Err(Error::DimensionMismatch(format!(
                "atom {} has {} coordinates, expected 1",
                self.label,
                c.len()
            ))),
            None => Err(Error::MissingCoords(self.label.clone())),
        }
    }
}

/// Finite probability mass function over labelled atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    atoms: Vec<Atom>,
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    /// Build a distribution, validating masses. Probabilities must be
    /// non-negative, sum to 1 within `MASS_SLACK`, and the labels must be
    /// distinct. A residual below the slack is renormalized away.
    pub fn new(atoms: Vec<Atom>, probs: Vec<f64>) -> Result<Self> {
        if atoms.len() != probs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} atoms vs {} probabilities",
                atoms.len(),
                probs.len()
            )));
        }
        if let Some(&bad) = probs.iter().find(|p| **p < 0.0 || !p.is_finite()) {
            return Err(Error::NegativeMass(bad));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_SLACK {
            return Err(Error::SumNotOne(total));
        }
        check_coord_dims(&atoms)?;
        check_unique_labels(&atoms)?;
        let probs = probs.into_iter().map(|p| p / total).collect();
        Ok(DiscreteDistribution { atoms, probs })
    }

    /// Uniform distribution over the given atoms.
    pub fn uniform(atoms: Vec<Atom>) -> Result<Self> {
        let n = atoms.len();
        if n == 0 {
            return Err(Error::BadConfig("empty atom list".into()));
        }
        Self::new(atoms, vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// Index of probabilities by atom label.
    pub fn label_index(&self) -> HashMap<&str, usize> {
        self.atoms.iter().enumerate().map(|(i, a)| (a.label.as_str(), i)).collect()
    }

    /// Scalar coordinates of every atom, in atom order.
    pub fn scalar_coords(&self) -> Result<Vec<f64>> {
        self.atoms.iter().map(Atom::scalar_coord).collect()
    }

    /// Mean of scalar coordinates.
    pub fn mean_scalar(&self) -> Result<f64> {
        let xs = self.scalar_coords()?;
        Ok(xs.iter().zip(&self.probs).map(|(x, p)| x * p).sum())
    }
}

fn check_coord_dims(atoms: &[Atom]) -> Result<()> {
    let mut dim: Option<usize> = None;
    for a in atoms {
        if let Some(c) = &a.coords {
            match dim {
                None => dim = Some(c.len()),
                Some(d) if d != c.len() => {
                    return Err(Error::DimensionMismatch(format!(
                        "atom {} has {} coordinates, others have {}",
                        a.label,
                        c.len(),
                        d
                    )))
                }
                _ => {}
            }
        }
    }
    Ok(())
}

fn check_unique_labels(atoms: &[Atom]) -> Result<()> {
    let mut seen = HashMap::with_capacity(atoms.len());
    for a in atoms {
        if seen.insert(a.label.as_str(), ()).is_some() {
            return Err(Error::DuplicateLabel(a.label.clone()));
        }
    }
    Ok(())
}

/// Finite joint pmf over hypothesis atoms x sample atoms; the computational
/// stand-in for the joint law of hypothesis and sample. Stored row-major with
/// one row per W-atom.
#[derive(Debug, Clone, PartialEq)]
pub struct JointChannel {
    w_atoms: Vec<Atom>,
    s_atoms: Vec<Atom>,
    joint: Vec<f64>,
}

impl JointChannel {
    pub fn new(w_atoms: Vec<Atom>, s_atoms: Vec<Atom>, joint: Vec<Vec<f64>>) -> Result<Self> {
        if joint.len() != w_atoms.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} joint rows vs {} W atoms",
                joint.len(),
                w_atoms.len()
            )));
        }
        let mut flat = Vec::with_capacity(w_atoms.len() * s_atoms.len());
        for row in &joint {
            if row.len() != s_atoms.len() {
                return Err(Error::DimensionMismatch(format!(
                    "joint row of length {} vs {} S atoms",
                    row.len(),
                    s_atoms.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(w_atoms, s_atoms, flat)
    }

    /// Build from a flat row-major joint vector.
    pub fn from_flat(w_atoms: Vec<Atom>, s_atoms: Vec<Atom>, joint: Vec<f64>) -> Result<Self> {
        if joint.len() != w_atoms.len() * s_atoms.len() {
            return Err(Error::DimensionMismatch(format!(
                "flat joint of length {} vs {}x{}",
                joint.len(),
                w_atoms.len(),
                s_atoms.len()
            )));
        }
        if let Some(&bad) = joint.iter().find(|p| **p < 0.0 || !p.is_finite()) {
            return Err(Error::NegativeMass(bad));
        }
        let total: f64 = joint.iter().sum();
        if (total - 1.0).abs() > MASS_SLACK {
            return Err(Error::SumNotOne(total));
        }
        check_coord_dims(&w_atoms)?;
        check_coord_dims(&s_atoms)?;
        check_unique_labels(&w_atoms)?;
        check_unique_labels(&s_atoms)?;
        let joint = joint.into_iter().map(|p| p / total).collect();
        Ok(JointChannel { w_atoms, s_atoms, joint })
    }

    /// Independent coupling of two distributions.
    pub fn product(w: &DiscreteDistribution, s: &DiscreteDistribution) -> Result<Self> {
        let mut joint = Vec::with_capacity(w.len() * s.len());
        for pw in w.probs() {
            for ps in s.probs() {
                joint.push(pw * ps);
            }
        }
        Self::from_flat(w.atoms().to_vec(), s.atoms().to_vec(), joint)
    }

    pub fn w_atoms(&self) -> &[Atom] {
        &self.w_atoms
    }

    pub fn s_atoms(&self) -> &[Atom] {
        &self.s_atoms
    }

    pub fn entry(&self, wi: usize, si: usize) -> f64 {
        self.joint[wi * self.s_atoms.len() + si]
    }

    pub fn row(&self, wi: usize) -> &[f64] {
        let n = self.s_atoms.len();
        &self.joint[wi * n..(wi + 1) * n]
    }

    /// Marginal distributions `(P_W, P_S)` as row and column sums.
    pub fn marginals(&self) -> (DiscreteDistribution, DiscreteDistribution) {
        let n = self.s_atoms.len();
        let mut pw = vec![0.0; self.w_atoms.len()];
        let mut ps = vec![0.0; n];
        for (wi, w) in pw.iter_mut().enumerate() {
            for (si, s) in ps.iter_mut().enumerate() {
                let v = self.joint[wi * n + si];
                *w += v;
                *s += v;
            }
        }
        let pw_total: f64 = pw.iter().sum();
        debug_assert!((pw_total - 1.0).abs() < MASS_TIGHT * self.joint.len().max(1) as f64);
        let pw = DiscreteDistribution { atoms: self.w_atoms.clone(), probs: pw };
        let ps = DiscreteDistribution { atoms: self.s_atoms.clone(), probs: ps };
        (pw, ps)
    }

    /// Conditional `P_{S|W=w}` for the atom with the given label.
    pub fn conditional_s_given_w(&self, w_label: &str) -> Result<DiscreteDistribution> {
        let wi = self
            .w_atoms
            .iter()
            .position(|a| a.label == w_label)
            .ok_or_else(|| Error::LabelMismatch(format!("no W atom labelled {w_label}")))?;
        self.conditional_s_given_w_index(wi)
    }

    /// Conditional `P_{S|W}` by row index.
    pub fn conditional_s_given_w_index(&self, wi: usize) -> Result<DiscreteDistribution> {
        let row = self.row(wi);
        let mass: f64 = row.iter().sum();
        if mass <= 0.0 {
            return Err(Error::ZeroMassCondition(self.w_atoms[wi].label.clone()));
        }
        let probs = row.iter().map(|p| p / mass).collect();
        Ok(DiscreteDistribution { atoms: self.s_atoms.clone(), probs })
    }

    /// Swap the two coordinates, turning `P_{W,S}` into `P_{S,W}`.
    pub fn transpose(&self) -> JointChannel {
        let (nw, ns) = (self.w_atoms.len(), self.s_atoms.len());
        let mut joint = vec![0.0; nw * ns];
        for wi in 0..nw {
            for si in 0..ns {
                joint[si * nw + wi] = self.joint[wi * ns + si];
            }
        }
        JointChannel { w_atoms: self.s_atoms.clone(), s_atoms: self.w_atoms.clone(), joint }
    }

    /// Merge W-atoms that share their level-`k` net projection. Output
    /// W-atoms are the occupied level-`k` net points (ascending label order),
    /// carrying the net points' coordinates; the S side is untouched, so the
    /// S-marginal is preserved exactly.
    pub fn coarsen(&self, net: &RefiningNetSequence, k: usize) -> Result<JointChannel> {
        let ns = self.s_atoms.len();
        // net-point index -> output row
        let mut rows: HashMap<usize, usize> = HashMap::new();
        let mut order: Vec<usize> = Vec::new();
        let mut assignments = Vec::with_capacity(self.w_atoms.len());
        for a in &self.w_atoms {
            let coords = a
                .coords
                .as_deref()
                .ok_or_else(|| Error::MissingCoords(a.label.clone()))?;
            let pt = net.project_index(coords, k)?;
            let next = rows.len();
            let row = *rows.entry(pt).or_insert_with(|| {
                order.push(pt);
                next
            });
            assignments.push(row);
        }
        let mut sorted = order.clone();
        sorted.sort_unstable();
        let rank: HashMap<usize, usize> =
            sorted.iter().enumerate().map(|(r, pt)| (*pt, r)).collect();
        let mut joint = vec![0.0; sorted.len() * ns];
        for (wi, &row_unordered) in assignments.iter().enumerate() {
            let pt = order[row_unordered];
            let row = rank[&pt];
            let src = self.row(wi);
            let dst = &mut joint[row * ns..(row + 1) * ns];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
        let w_atoms = sorted
            .iter()
            .map(|&pt| {
                let p = net.point(k, pt);
                Atom::with_coords(p.label.clone(), p.coords.clone())
            })
            .collect();
        Ok(JointChannel { w_atoms, s_atoms: self.s_atoms.clone(), joint })
    }
}

/// Channel JSON schema accepted by the CLI: row-major joint with one row per
/// W atom.
#[derive(Debug, Serialize, Deserialize)]
pub struct ChannelFile {
    pub w_atoms: Vec<Atom>,
    pub s_atoms: Vec<Atom>,
    pub joint: Vec<Vec<f64>>,
}

impl ChannelFile {
    pub fn into_channel(self) -> Result<JointChannel> {
        JointChannel::new(self.w_atoms, self.s_atoms, self.joint)
    }

    pub fn from_channel(ch: &JointChannel) -> Self {
        let joint = (0..ch.w_atoms().len()).map(|wi| ch.row(wi).to_vec()).collect();
        ChannelFile {
            w_atoms: ch.w_atoms().to_vec(),
            s_atoms: ch.s_atoms().to_vec(),
            joint,
        }
    }
}

/// Joint law of `(W, S*, U)` for random sub-sampling from a super-sample of
/// `m` pairs. The structural constraints are encoded by construction: `U` is
/// uniform over the `2^m` selector masks and independent of `S*`.
///
/// The training half is `S = S*_U` and the ghost half is `S_bar = S*_{1-U}`.
/// Per super-sample atom, `s_class[u]` names the equivalence class of the
/// training half selected by mask `u`, so masks that pick identical values
/// can be merged exactly.
#[derive(Debug, Clone)]
pub struct SuperSampleChannel {
    w_atoms: Vec<Atom>,
    sstar_atoms: Vec<Atom>,
    sstar_probs: Vec<f64>,
    m: usize,
    /// `w_given[su][u][wi] = P(W = wi | S* = su, U = u)`.
    w_given: Vec<Vec<Vec<f64>>>,
    /// `s_class[su][u]`: class id of the training half `s*_u`.
    s_class: Vec<Vec<usize>>,
    /// Optional scalar-or-vector coordinates per (super-sample atom, class),
    /// for transport-based divergences.
    class_coords: Option<Vec<Vec<Vec<f64>>>>,
}

impl SuperSampleChannel {
    pub fn new(
        w_atoms: Vec<Atom>,
        sstar: DiscreteDistribution,
        m: usize,
        w_given: Vec<Vec<Vec<f64>>>,
        s_class: Vec<Vec<usize>>,
        class_coords: Option<Vec<Vec<Vec<f64>>>>,
    ) -> Result<Self> {
        let masks = 1usize << m;
        if w_given.len() != sstar.len() || s_class.len() != sstar.len() {
            return Err(Error::DimensionMismatch(
                "per-super-sample tables must match the super-sample support".into(),
            ));
        }
        for (su, (kernel, classes)) in w_given.iter().zip(&s_class).enumerate() {
            if kernel.len() != masks || classes.len() != masks {
                return Err(Error::DimensionMismatch(format!(
                    "super-sample atom {su}: expected {masks} selector masks"
                )));
            }
            for dist in kernel {
                if dist.len() != w_atoms.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "super-sample atom {su}: kernel row length {} vs {} W atoms",
                        dist.len(),
                        w_atoms.len()
                    )));
                }
                let total: f64 = dist.iter().sum();
                if (total - 1.0).abs() > MASS_SLACK {
                    return Err(Error::SumNotOne(total));
                }
                if let Some(&bad) = dist.iter().find(|p| **p < 0.0) {
                    return Err(Error::NegativeMass(bad));
                }
            }
        }
        check_unique_labels(&w_atoms)?;
        let sstar_probs = sstar.probs().to_vec();
        Ok(SuperSampleChannel {
            w_atoms,
            sstar_atoms: sstar.atoms().to_vec(),
            sstar_probs,
            m,
            w_given,
            s_class,
            class_coords,
        })
    }

    /// Deterministic-algorithm constructor: `W` is a function of the selected
    /// training half. `s_class` still names the class of `s*_u`; `w_of_class`
    /// maps each class to the chosen hypothesis atom.
    pub fn deterministic(
        w_atoms: Vec<Atom>,
        sstar: DiscreteDistribution,
        m: usize,
        s_class: Vec<Vec<usize>>,
        w_of_class: &dyn Fn(usize, usize) -> usize,
        class_coords: Option<Vec<Vec<Vec<f64>>>>,
    ) -> Result<Self> {
        let masks = 1usize << m;
        let mut w_given = Vec::with_capacity(sstar.len());
        for (su, classes) in s_class.iter().enumerate() {
            let mut kernel = Vec::with_capacity(masks);
            for &c in classes {
                let wi = w_of_class(su, c);
                let mut row = vec![0.0; w_atoms.len()];
                row[wi] = 1.0;
                kernel.push(row);
            }
            w_given.push(kernel);
        }
        SuperSampleChannel::new(w_atoms, sstar, m, w_given, s_class, class_coords)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn masks(&self) -> usize {
        1usize << self.m
    }

    pub fn w_atoms(&self) -> &[Atom] {
        &self.w_atoms
    }

    pub fn sstar_atoms(&self) -> &[Atom] {
        &self.sstar_atoms
    }

    pub fn sstar_probs(&self) -> &[f64] {
        &self.sstar_probs
    }

    pub fn s_class(&self, su: usize) -> &[usize] {
        &self.s_class[su]
    }

    /// Class of the ghost half for mask `u`: the class of the complement mask.
    pub fn sbar_class(&self, su: usize, u: usize) -> usize {
        let flipped = !u & (self.masks() - 1);
        self.s_class[su][flipped]
    }

    pub fn w_given(&self, su: usize, u: usize) -> &[f64] {
        &self.w_given[su][u]
    }

    pub fn class_coords(&self, su: usize, class: usize) -> Option<&[f64]> {
        self.class_coords.as_ref().map(|c| c[su][class].as_slice())
    }

    /// Number of distinct S classes for a given super-sample atom.
    pub fn class_count(&self, su: usize) -> usize {
        self.s_class[su].iter().copied().max().map_or(0, |m| m + 1)
    }

    /// `P(W | S* = su)` as a vector over W atoms.
    pub fn w_given_sstar(&self, su: usize) -> Vec<f64> {
        let mask_p = 1.0 / self.masks() as f64;
        let mut out = vec![0.0; self.w_atoms.len()];
        for u in 0..self.masks() {
            for (o, p) in out.iter_mut().zip(&self.w_given[su][u]) {
                *o += mask_p * p;
            }
        }
        out
    }

    /// Full joint over `(W, S*)` marginalizing `U`, as a `JointChannel` with
    /// W rows. Used by comparisons against unconditional quantities.
    pub fn w_sstar_channel(&self) -> Result<JointChannel> {
        let nw = self.w_atoms.len();
        let ns = self.sstar_atoms.len();
        let mut joint = vec![0.0; nw * ns];
        for su in 0..ns {
            let pw = self.w_given_sstar(su);
            for (wi, p) in pw.iter().enumerate() {
                joint[wi * ns + su] = p * self.sstar_probs[su];
            }
        }
        JointChannel::from_flat(self.w_atoms.clone(), self.sstar_atoms.clone(), joint)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_half() -> DiscreteDistribution {
        DiscreteDistribution::new(
            vec![Atom::plain("a"), Atom::plain("b")],
            vec![0.5, 0.5],
        )
        .unwrap()
    }

    #[test]
    fn make_discrete_accepts_uniform() {
        let d = half_half();
        assert_eq!(d.len(), 2);
        assert!((d.probs()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn make_discrete_rejects_mass_deficit() {
        let err = DiscreteDistribution::new(
            vec![Atom::plain("a"), Atom::plain("b")],
            vec![0.3, 0.3],
        )
        .unwrap_err();
        assert_eq!(err.code(), "SUM_NOT_ONE");
    }

    #[test]
    fn make_discrete_rejects_negative_mass() {
        let err = DiscreteDistribution::new(
            vec![Atom::plain("a"), Atom::plain("b")],
            vec![-0.1, 1.1],
        )
        .unwrap_err();
        assert_eq!(err.code(), "NEGATIVE_MASS");
    }

    #[test]
    fn make_discrete_rejects_duplicate_labels() {
        let err = DiscreteDistribution::new(
            vec![Atom::plain("a"), Atom::plain("a")],
            vec![0.5, 0.5],
        )
        .unwrap_err();
        assert_eq!(err.code(), "DUPLICATE_LABEL");
    }

    #[test]
    fn tiny_residual_is_renormalized() {
        let d = DiscreteDistribution::new(
            vec![Atom::plain("a"), Atom::plain("b")],
            vec![0.5 + 1e-13, 0.5],
        )
        .unwrap();
        let total: f64 = d.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_channel_marginals_factorize() {
        let p = DiscreteDistribution::new(
            vec![Atom::plain("w0"), Atom::plain("w1")],
            vec![0.3, 0.7],
        )
        .unwrap();
        let q = DiscreteDistribution::new(
            vec![Atom::plain("s0"), Atom::plain("s1"), Atom::plain("s2")],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        let ch = JointChannel::product(&p, &q).unwrap();
        let (pw, ps) = ch.marginals();
        for i in 0..2 {
            assert!((pw.probs()[i] - p.probs()[i]).abs() < 1e-15);
        }
        for i in 0..3 {
            assert!((ps.probs()[i] - q.probs()[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_channel_marginals_are_uniform() {
        let ch = JointChannel::new(
            vec![Atom::plain("a"), Atom::plain("b")],
            vec![Atom::plain("x"), Atom::plain("y")],
            vec![vec![0.5, 0.0], vec![0.0, 0.5]],
        )
        .unwrap();
        let (pw, ps) = ch.marginals();
        assert_eq!(pw.probs(), &[0.5, 0.5]);
        assert_eq!(ps.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn product_conditional_is_the_s_marginal() {
        let p = half_half();
        let q = DiscreteDistribution::new(
            vec![Atom::plain("x"), Atom::plain("y")],
            vec![0.25, 0.75],
        )
        .unwrap();
        let ch = JointChannel::product(&p, &q).unwrap();
        for label in ["a", "b"] {
            let c = ch.conditional_s_given_w(label).unwrap();
            assert!((c.probs()[0] - 0.25).abs() < 1e-15);
            assert!((c.probs()[1] - 0.75).abs() < 1e-15);
        }
    }

    #[test]
    fn deterministic_channel_conditional_is_dirac() {
        let ch = JointChannel::new(
            vec![Atom::plain("a"), Atom::plain("b")],
            vec![Atom::plain("x"), Atom::plain("y")],
            vec![vec![0.5, 0.0], vec![0.0, 0.5]],
        )
        .unwrap();
        let c = ch.conditional_s_given_w("a").unwrap();
        assert_eq!(c.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn zero_mass_conditioning_is_an_error() {
        let ch = JointChannel::new(
            vec![Atom::plain("a"), Atom::plain("b")],
            vec![Atom::plain("x")],
            vec![vec![1.0], vec![0.0]],
        )
        .unwrap();
        let err = ch.conditional_s_given_w("b").unwrap_err();
        assert_eq!(err.code(), "ZERO_MASS_CONDITION");
    }

    #[test]
    fn conditional_support_is_inside_marginal_support() {
        // joint-derived conditionals can only put mass where the joint does
        let ch = JointChannel::new(
            vec![Atom::plain("a"), Atom::plain("b")],
            vec![Atom::plain("x"), Atom::plain("y"), Atom::plain("z")],
            vec![vec![0.2, 0.3, 0.0], vec![0.1, 0.4, 0.0]],
        )
        .unwrap();
        let (_, ps) = ch.marginals();
        for label in ["a", "b"] {
            let c = ch.conditional_s_given_w(label).unwrap();
            for (si, p) in c.probs().iter().enumerate() {
                assert!(*p == 0.0 || ps.probs()[si] > 0.0);
            }
        }
    }

    #[test]
    fn channel_file_roundtrip() {
        let ch = JointChannel::new(
            vec![Atom::with_coords("a", vec![0.0]), Atom::with_coords("b", vec![1.0])],
            vec![Atom::with_coords("x", vec![0.0]), Atom::with_coords("y", vec![1.0])],
            vec![vec![0.4, 0.1], vec![0.1, 0.4]],
        )
        .unwrap();
        let text = serde_json::to_string(&ChannelFile::from_channel(&ch)).unwrap();
        let back: ChannelFile = serde_json::from_str(&text).unwrap();
        let ch2 = back.into_channel().unwrap();
        assert_eq!(ch, ch2);
    }
}
