//! Special-function kernel: Bessel K, Lambert W, zeta and Dirichlet beta,
//! log-gamma and erfc. Everything here is double precision and pure.

mod bessel;
mod gamma;
mod lambert;
mod zeta;

pub use bessel::{bessel_k, bessel_k_half, k0, k0_scaled, k1, k1_scaled, k2};
pub use gamma::{erfc, ln_gamma, log_gamma};
pub use lambert::{lambert_w, lambert_w0, lambert_wm1};
pub use zeta::{
    alternating_tail_scaled,
    catalan, dirichlet_beta, dirichlet_beta_prime_at_1, eta, hurwitz_scaled, zeta,
    zeta_dirichlet, zeta_laurent_constant,
};

use serde::Serialize;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// A value together with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecialValue {
    pub value: f64,
    pub abs_error_bound: f64,
}

impl SpecialValue {
    pub fn new(value: f64, abs_error_bound: f64) -> Self {
        debug_assert!(abs_error_bound >= 0.0 || abs_error_bound.is_nan());
        SpecialValue { value, abs_error_bound: abs_error_bound.abs() }
    }

    /// Value with a relative bound `rel` (plus a few ulps).
    pub fn rel(value: f64, rel: f64) -> Self {
        SpecialValue::new(value, value.abs() * (rel + 4.0 * f64::EPSILON))
    }

    pub fn exact(value: f64) -> Self {
        SpecialValue::new(value, 0.0)
    }
}

/// Surface area of the unit sphere in R^d.
pub fn omega(d: u32) -> f64 {
    let h = 0.5 * d as f64;
    2.0 * std::f64::consts::PI.powf(h) / ln_gamma(h).exp()
}

/// Volume of the unit ball in R^d.
pub fn ball_volume(d: u32) -> f64 {
    omega(d) / d as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert!((omega(1) - 2.0).abs() < 1e-15);
        assert!((omega(2) - 2.0 * PI).abs() < 1e-14);
        assert!((omega(3) - 4.0 * PI).abs() < 1e-13);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
    }
}
