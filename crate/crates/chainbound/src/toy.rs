//! Two analytic toy families with closed-form values, used as end-to-end
//! oracles for the bound engine.
//!
//! **Family 1** (uniform/quadratic): hypotheses and samples live on
//! `[-1, 1]`, the sample is uniform on `(-theta, theta)` with
//! `theta = 2^{-k*}`, and the algorithm picks `w = x`. Every quantity has a
//! closed form: the gap is `theta^2/3`, the unchained transport bound is
//! `2 theta/3` (shifted loss) or `4 theta/3` (raw loss), the per-level
//! chained transport values and per-level mutual informations are explicit,
//! and the chained-MI series constant is `~3.50`.
//!
//! Note on the chained transport constant: the quoted closed form
//! `(247/105) theta^2` is not consistent with the per-level values it is
//! supposed to sum — those simplify to `(2/3 - 2^{-k'}/3) theta` per level,
//! whose weighted series is `(10/9) theta^2`, and no chained value can
//! exceed `(4/3) theta^2` (each level is capped by the unchained value).
//! `b_grad` reports the quoted constant; `b_grad_series` reports the summed
//! series, which is what the engine reproduces.
//!
//! **Family 2** (Gaussian direction): hypotheses on the unit circle,
//! `X ~ N((a, 0), I)`, loss `-w . x`, algorithm `w = x/|x|`. The gap has a
//! Bessel-function closed form, and the unchained transport bound is only
//! bracketed; the Monte Carlo estimator is validated against the brackets.

use crate::dist::{Atom, JointChannel};
use crate::divergence::{w1_uniform_intervals, UniformInterval};
use crate::engine::{chained_bound, BoundReport, BoundSpec, Scaling};
use crate::error::{Error, Result};
use crate::mc::{estimate_expectation, standard_normal_pair, McConfig, McEstimate};
use crate::nets::RefiningNetSequence;
use crate::special::{bessel_i0e, bessel_i1e, erf, normal_cdf, normal_pdf};
use crate::transport::w1_1d_weighted;
use std::f64::consts::PI;

const LN2: f64 = std::f64::consts::LN_2;

/// Parameters of the uniform/quadratic family: `theta = 2^{-k_star}`, and a
/// discretization depth for the finite channel (cells of width
/// `2^{-resolution}`).
#[derive(Debug, Clone, Copy)]
pub struct Toy1Config {
    pub k_star: u32,
    pub resolution: u32,
}

impl Toy1Config {
    pub fn new(k_star: u32, resolution: u32) -> Result<Self> {
        if k_star == 0 {
            return Err(Error::BadConfig("k_star must be >= 1".into()));
        }
        if resolution < k_star + 1 {
            return Err(Error::BadConfig(format!(
                "resolution {resolution} must be at least k_star + 1 = {}",
                k_star + 1
            )));
        }
        if resolution > k_star + 11 {
            return Err(Error::BadConfig(format!(
                "resolution {resolution} would materialize 2^{} support cells; the dense \
                 channel caps at resolution <= k_star + 11",
                resolution - k_star + 1
            )));
        }
        Ok(Toy1Config { k_star, resolution })
    }

    pub fn theta(&self) -> f64 {
        (-(self.k_star as f64)).exp2()
    }
}

/// Closed-form values of family 1.
#[derive(Debug, Clone, Copy)]
pub struct Toy1Analytic {
    /// `|G| = theta^2 / 3`.
    pub gap: f64,
    /// Raw-loss unchained transport bound `4 theta / 3`.
    pub b_l: f64,
    /// Shifted-loss unchained transport bound `2 theta / 3`.
    pub b_ltilde: f64,
    /// Quoted chained-transport constant `(247/105) theta^2`.
    pub b_grad: f64,
    /// The per-level series actually summed: `theta^2 sum_k 2^{1-k'}
    /// (2/3 - 2^{-k'}/3) = (10/9) theta^2`.
    pub b_grad_series: f64,
    /// Chained-MI series `theta sum_k 2^{1-k'} sqrt(2 (k' + 2^{-k'}) log 2)`.
    pub b_cmi: f64,
}

/// Evaluate every closed form of family 1.
pub fn toy1_analytic(cfg: &Toy1Config) -> Toy1Analytic {
    let theta = cfg.theta();
    Toy1Analytic {
        gap: theta * theta / 3.0,
        b_l: 4.0 * theta / 3.0,
        b_ltilde: 2.0 * theta / 3.0,
        b_grad: 247.0 / 105.0 * theta * theta,
        b_grad_series: theta * theta * toy1_grad_series_constant(),
        b_cmi: theta * toy1_cmi_series_constant(),
    }
}

/// `sum_{k'>=1} 2^{1-k'} (E1 + E2)/theta`, summed to machine convergence.
pub fn toy1_grad_series_constant() -> f64 {
    let mut total = 0.0;
    for kp in 1..200u32 {
        let weight = (1.0 - kp as f64).exp2();
        let term = weight * toy1_level_w1_unit(kp);
        total += term;
        if term < total * 1e-18 {
            break;
        }
    }
    total
}

/// `sum_{k'>=1} 2^{1-k'} sqrt(2 (k' + 2^{-k'}) log 2)`, summed to machine
/// convergence; evaluates to about 3.50.
pub fn toy1_cmi_series_constant() -> f64 {
    let mut total = 0.0;
    for kp in 1..400u32 {
        let weight = (1.0 - kp as f64).exp2();
        let term = weight * (2.0 * toy1_level_mi(kp).expect("kp >= 1")).sqrt();
        total += term;
        if term < total * 1e-18 {
            break;
        }
    }
    total
}

/// Per-level expected transport divergence in units of theta, for level
/// `k = k_star + k_prime`:
/// `E1 = (4 - 12 x + 11 x^2 - 3 x^3) / (6 (1 - x))` and
/// `E2 = x - x^2/2` with `x = 2^{-k'}`.
fn toy1_level_w1_unit(k_prime: u32) -> f64 {
    let x = (-(k_prime as f64)).exp2();
    let e1 = (4.0 - 12.0 * x + 11.0 * x * x - 3.0 * x * x * x) / (6.0 * (1.0 - x));
    let e2 = x - 0.5 * x * x;
    e1 + e2
}

/// `E_{P_W}[W1(P_X, P_{X|W_k})]` at level `k = k_star + k_prime`; levels at
/// or below `k_star` are exactly zero and live outside this op's domain.
pub fn toy1_level_w1(cfg: &Toy1Config, k_prime: u32) -> Result<f64> {
    if k_prime == 0 {
        return Err(Error::BadLevel("per-level values are defined for k' >= 1".into()));
    }
    Ok(cfg.theta() * toy1_level_w1_unit(k_prime))
}

/// `I(W_k; X) = (k' + 2^{-k'}) log 2` at level `k = k_star + k_prime`.
pub fn toy1_level_mi(k_prime: u32) -> Result<f64> {
    if k_prime == 0 {
        return Err(Error::BadLevel("per-level values are defined for k' >= 1".into()));
    }
    Ok((k_prime as f64 + (-(k_prime as f64)).exp2()) * LN2)
}

/// The discretized deterministic channel: `2^{resolution+1}` equal cells of
/// `[-1, 1]`, restricted to the cells inside the support `(-theta, theta)`,
/// with uniform masses on the diagonal and midpoint coordinates.
pub fn toy1_channel(cfg: &Toy1Config) -> Result<JointChannel> {
    let width = (-(cfg.resolution as f64)).exp2();
    let n_support = 1usize << (cfg.resolution - cfg.k_star + 1);
    let first = (1usize << cfg.resolution) - (1usize << (cfg.resolution - cfg.k_star));
    let midpoints: Vec<f64> =
        (0..n_support).map(|i| -1.0 + ((first + i) as f64 + 0.5) * width).collect();
    let w_atoms: Vec<Atom> = midpoints
        .iter()
        .enumerate()
        .map(|(i, &x)| Atom::with_coords(format!("w{i}"), vec![x]))
        .collect();
    let s_atoms: Vec<Atom> = midpoints
        .iter()
        .enumerate()
        .map(|(i, &x)| Atom::with_coords(format!("x{i}"), vec![x]))
        .collect();
    let mass = 1.0 / n_support as f64;
    let mut joint = vec![0.0; n_support * n_support];
    for i in 0..n_support {
        joint[i * n_support + i] = mass;
    }
    JointChannel::from_flat(w_atoms, s_atoms, joint)
}

/// The m-fold channel: samples are m-tuples of support cells, the
/// hypothesis is their midpoint average. Sized for small resolutions only
/// (the sample space has `n_support^m` atoms).
pub fn toy1_channel_m(cfg: &Toy1Config, m: u32) -> Result<JointChannel> {
    let base = toy1_channel(cfg)?;
    let n = base.s_atoms().len();
    let tuples = n.pow(m);
    if tuples > 1 << 16 {
        return Err(Error::BadConfig(format!(
            "m-fold channel would have {tuples} sample atoms; lower the resolution"
        )));
    }
    let xs: Vec<f64> = base.s_atoms().iter().map(|a| a.coords.as_ref().unwrap()[0]).collect();
    // distinct hypothesis values are index sums (means of midpoints)
    let width = (-(cfg.resolution as f64)).exp2();
    let n_sums = (n - 1) * m as usize + 1;
    let w_atoms: Vec<Atom> = (0..n_sums)
        .map(|s| {
            let mean = xs[0] + s as f64 * width / m as f64;
            Atom::with_coords(format!("w{s}"), vec![mean])
        })
        .collect();
    let mut s_atoms = Vec::with_capacity(tuples);
    let mut joint = vec![0.0; n_sums * tuples];
    let mass = 1.0 / tuples as f64;
    for t in 0..tuples {
        let mut rest = t;
        let mut sum = 0usize;
        let mut coords = Vec::with_capacity(m as usize);
        for _ in 0..m {
            let idx = rest % n;
            rest /= n;
            sum += idx;
            coords.push(xs[idx]);
        }
        s_atoms.push(Atom::with_coords(format!("t{t}"), coords));
        joint[sum * tuples + t] = mass;
    }
    JointChannel::from_flat(w_atoms, s_atoms, joint)
}

/// Exact generalisation gap of the discretized channel under the shifted
/// quadratic loss: `E_{P_W x P_X} - E_{P_{W,X}}` of
/// `(w - x)^2/2 - x^2/2`.
pub fn toy1_gap_discrete(ch: &JointChannel) -> f64 {
    let (pw, ps) = ch.marginals();
    let loss = |w: f64, x: f64| 0.5 * (w - x) * (w - x) - 0.5 * x * x;
    let mut product = 0.0;
    let mut joint = 0.0;
    for (wi, wa) in pw.atoms().iter().enumerate() {
        let w = wa.coords.as_ref().unwrap()[0];
        for (si, sa) in ps.atoms().iter().enumerate() {
            let x = sa.coords.as_ref().unwrap()[0];
            product += pw.prob(wi) * ps.prob(si) * loss(w, x);
            joint += ch.entry(wi, si) * loss(w, x);
        }
    }
    (product - joint).abs()
}

/// End-to-end engine values for family 1: the discrete gap, the unchained
/// transport bounds, and the chained transport report on the classical
/// dyadic net.
pub struct Toy1Engine {
    pub gap: f64,
    pub b_ltilde: f64,
    pub b_l: f64,
    pub b_grad: BoundReport,
}

pub fn toy1_engine(cfg: &Toy1Config) -> Result<Toy1Engine> {
    let ch = toy1_channel(cfg)?;
    let net = RefiningNetSequence::dyadic_box(1, cfg.resolution as usize)?;
    let spec = BoundSpec::new(crate::divergence::DivergenceKind::W1, 1.0, 1, Scaling::InvSqrtM);
    let unchained = crate::engine::unchained_bound(&ch, &spec)?.value;
    let b_grad = chained_bound(&ch, &net, &spec, cfg.resolution as usize)?;
    Ok(Toy1Engine { gap: toy1_gap_discrete(&ch), b_ltilde: unchained, b_l: 2.0 * unchained, b_grad })
}

/// Monte Carlo estimate of `E_W[W1(P_X, P_{X|W})]`: the hypothesis is
/// uniform on `(-theta, theta)` and the per-hypothesis transport distance
/// has the uniform-to-Dirac closed form.
pub fn toy1_mc_unchained(cfg: &Toy1Config, mc: &McConfig) -> Result<McEstimate> {
    use rand::Rng;
    let theta = cfg.theta();
    let outer = UniformInterval::new(-theta, theta)?;
    estimate_expectation(
        mc,
        move |rng| rng.gen_range(-theta..theta),
        move |&w| w1_uniform_intervals(&outer, &UniformInterval::point(w)).expect("nested"),
    )
}

/// Closed forms of the high-dimensional l1 variant.
#[derive(Debug, Clone, Copy)]
pub struct Toy1HighDim {
    pub b_ltilde_l1: f64,
    pub b_grad_l1: f64,
}

/// `b_ltilde_l1 = (2 sqrt(d)/3) (1 + (d-1) theta)` and
/// `b_grad_l1 = (247 sqrt(d)/105) (1 + (d-1) theta^2)`: the support is a
/// thin box around a line, with `d-1` narrow coordinates of half-width
/// `theta` and one full coordinate, and the l1 transport decomposes across
/// coordinates.
pub fn toy1_highdim(d: u32, theta: f64) -> Result<Toy1HighDim> {
    if d == 0 {
        return Err(Error::BadConfig("dimension must be >= 1".into()));
    }
    if theta.is_nan() || theta <= 0.0 || theta > 1.0 {
        return Err(Error::BadConfig(format!("theta must be in (0, 1], got {theta}")));
    }
    let sd = (d as f64).sqrt();
    let extra = (d - 1) as f64;
    Ok(Toy1HighDim {
        b_ltilde_l1: 2.0 * sd / 3.0 * (1.0 + extra * theta),
        b_grad_l1: 247.0 * sd / 105.0 * (1.0 + extra * theta * theta),
    })
}

// ---------------------------------------------------------------------------
// family 2: Gaussian direction on the circle
// ---------------------------------------------------------------------------

/// Angular density of the selected direction for `X ~ N((a,0), I)`:
/// `rho_a(alpha) = e^{-a^2/2}/(2 pi) + (a cos alpha / sqrt(2 pi))
/// Phi(a cos alpha) e^{-(a sin alpha)^2 / 2}` (the cancellation-free form of
/// the pdf/cdf ratio expression).
pub fn toy2_density(a: f64, alpha: f64) -> f64 {
    let c = a * alpha.cos();
    let s = a * alpha.sin();
    (-0.5 * a * a).exp() / (2.0 * PI)
        + c / (2.0 * PI).sqrt() * normal_cdf(c) * (-0.5 * s * s).exp()
}

/// Periodic trapezoid quadrature of `f` over `[-pi, pi]`.
fn periodic_quadrature(n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = 2.0 * PI / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        acc += f(-PI + i as f64 * h);
    }
    acc * h
}

/// `int rho_a` over the circle; 1 up to quadrature error.
pub fn toy2_density_integral(a: f64) -> f64 {
    periodic_quadrature(8192, |alpha| toy2_density(a, alpha))
}

/// Closed-form expected gap
/// `G(a) = a - (a^2/2) sqrt(pi/2) e^{-t} (I0(t) + I1(t))` with `t = a^2/4`.
pub fn toy2_gap_analytic(a: f64) -> Result<f64> {
    if a.is_nan() || a <= 0.0 {
        return Err(Error::BadConfig(format!("need a > 0, got {a}")));
    }
    let t = 0.25 * a * a;
    Ok(a - 0.5 * a * a * (PI / 2.0).sqrt() * (bessel_i0e(t) + bessel_i1e(t)))
}

/// The same gap by direct quadrature of `a int (1 - cos alpha) rho_a`.
pub fn toy2_gap_quadrature(a: f64) -> f64 {
    a * periodic_quadrature(8192, |alpha| (1.0 - alpha.cos()) * toy2_density(a, alpha))
}

/// Analytic brackets for the unchained transport bound:
/// `sqrt(2/pi) erf(a/sqrt(2)) <= B(a) <= 1 + sqrt(2/pi) erf(a/sqrt(2)) +
/// e^{-a^2} / Phi(-a)`. The tail ratio is evaluated through the scaled
/// complementary error function, `2 e^{-a^2/2} / erfcx(a/sqrt(2))`, so it
/// stays finite where `e^{-a^2}` and `Phi(-a)` both underflow.
pub fn toy2_w1_brackets(a: f64) -> Result<(f64, f64)> {
    if a.is_nan() || a <= 0.0 {
        return Err(Error::BadConfig(format!("need a > 0, got {a}")));
    }
    let lower = (2.0 / PI).sqrt() * erf(a / std::f64::consts::SQRT_2);
    let tail = 2.0 * (-0.5 * a * a).exp() / crate::special::erfcx(a / std::f64::consts::SQRT_2);
    Ok((lower, 1.0 + lower + tail))
}

/// Discretization used for the per-hypothesis transport estimate.
const TOY2_GRID: usize = 512;
const TOY2_SPAN: f64 = 8.5;

/// Monte Carlo estimate of `E_W[W1(P_X, P_{X|W})]`. Per sampled direction
/// the transport is evaluated along the hypothesis ray: the plan first
/// projects the plane onto the ray's axis (closed-form expected offset
/// `E|N(a sin alpha, 1)|`), then rearranges the projected standard normal
/// into the conditional ray measure (density proportional to
/// `(v + a cos alpha) phi(v)` past the origin) by 1D transport on a
/// 512-point discretization. This is an upper-transport estimate of the
/// bound; it is validated only against the analytic brackets.
pub fn toy2_mc_unchained(a: f64, mc: &McConfig) -> Result<McEstimate> {
    if a.is_nan() || a <= 0.0 {
        return Err(Error::BadConfig(format!("need a > 0, got {a}")));
    }
    // fixed discretization of the projected standard normal
    let step = 2.0 * TOY2_SPAN / TOY2_GRID as f64;
    let mut proj_xs = Vec::with_capacity(TOY2_GRID);
    let mut proj_ps = Vec::with_capacity(TOY2_GRID);
    for i in 0..TOY2_GRID {
        let x = -TOY2_SPAN + (i as f64 + 0.5) * step;
        proj_xs.push(x);
        proj_ps.push(normal_pdf(x));
    }
    let total: f64 = proj_ps.iter().sum();
    proj_ps.iter_mut().for_each(|p| *p /= total);

    estimate_expectation(
        mc,
        move |rng| {
            let (z1, z2) = standard_normal_pair(rng);
            (a + z1, z2)
        },
        move |&(x1, x2)| {
            let alpha = x2.atan2(x1);
            let c = a * alpha.cos();
            let mu = a * alpha.sin();
            // projection leg: expected distance to the axis
            let e_abs = mu * (2.0 * normal_cdf(mu) - 1.0) + 2.0 * normal_pdf(mu);
            // conditional ray measure in axis coordinates
            let lo = (-c).max(-TOY2_SPAN);
            let hi = TOY2_SPAN + 1.0;
            let h = (hi - lo) / TOY2_GRID as f64;
            let mut vs = Vec::with_capacity(TOY2_GRID);
            let mut qs = Vec::with_capacity(TOY2_GRID);
            let mut mass = 0.0;
            for i in 0..TOY2_GRID {
                let v = lo + (i as f64 + 0.5) * h;
                let q = (v + c).max(0.0) * normal_pdf(v);
                vs.push(v);
                qs.push(q);
                mass += q;
            }
            qs.iter_mut().for_each(|q| *q /= mass);
            e_abs + w1_1d_weighted(&proj_xs, &proj_ps, &vs, &qs)
        },
    )
}
