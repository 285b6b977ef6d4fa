//! Scalar special functions used by the Gaussian toy model: standard normal
//! pdf/cdf and exponentially scaled modified Bessel functions of the first
//! kind.

use std::f64::consts::PI;

/// Standard normal density `phi(t) = exp(-t^2/2) / sqrt(2*pi)`.
pub fn normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

/// Standard normal cdf, computed through `erfc` so the far tails keep
/// relative accuracy.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / std::f64::consts::SQRT_2)
}

/// Error function.
pub fn erf(t: f64) -> f64 {
    libm::erf(t)
}

/// Scaled complementary error function `erfcx(y) = e^{y^2} erfc(y)` for
/// `y >= 0`; stable where `erfc` itself underflows.
pub fn erfcx(y: f64) -> f64 {
    assert!(y >= 0.0, "erfcx implemented for y >= 0, got {y}");
    if y < 6.0 {
        libm::erfc(y) * (y * y).exp()
    } else {
        // erfcx(y) ~ 1/(y sqrt(pi)) * sum_j (-1)^j (2j-1)!! / (2 y^2)^j
        let inv2y2 = 1.0 / (2.0 * y * y);
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        for j in 1..=10u32 {
            term *= -((2 * j - 1) as f64) * inv2y2;
            sum += term;
        }
        sum / (y * PI.sqrt())
    }
}

/// `exp(-t) * I0(t)` for `t >= 0`, where `I0` is the modified Bessel function
/// of the first kind of order zero.
pub fn bessel_i0e(t: f64) -> f64 {
    scaled_bessel(t, 0)
}

/// `exp(-t) * I1(t)` for `t >= 0`.
pub fn bessel_i1e(t: f64) -> f64 {
    scaled_bessel(t, 1)
}

// Power series for moderate arguments (all terms positive, no cancellation),
// large-argument asymptotic expansion beyond. The crossover at t = 100 keeps
// both branches comfortably above 1e-12 relative accuracy.
fn scaled_bessel(t: f64, order: u32) -> f64 {
    assert!(t >= 0.0, "scaled Bessel defined for t >= 0, got {t}");
    if t <= 100.0 {
        let q = 0.25 * t * t;
        let mut term = if order == 0 { 1.0 } else { 0.5 * t };
        let mut sum = term;
        let mut k = 1.0f64;
        loop {
            term *= q / (k * (k + order as f64));
            sum += term;
            if term <= sum * 1e-18 {
                break;
            }
            k += 1.0;
        }
        sum * (-t).exp()
    } else {
        // I_nu(t) ~ e^t / sqrt(2 pi t) * sum_j (-1)^j a_j(nu) / (8t)^j
        let mu = 4.0 * (order as f64) * (order as f64);
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        for j in 1..=12u32 {
            let j = j as f64;
            term *= -(mu - (2.0 * j - 1.0) * (2.0 * j - 1.0)) / (8.0 * t * j);
            sum += term;
        }
        sum / (2.0 * PI * t).sqrt()
    }
}
