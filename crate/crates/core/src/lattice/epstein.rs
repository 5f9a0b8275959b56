//! Lattice zeta values Z_d(s) = sum' |k|^{-s}.
//!
//! d = 1: 2 zeta(s). d = 2: 4 zeta(s/2) beta(s/2) (Hardy). d = 3, s = 2σ
//! with integer σ >= 2: split off the last coordinate and Poisson-sum it,
//!
//! ```text
//! Z_3(2σ) = 2ζ(2σ) + sqrt(pi) Γ(σ-1/2)/Γ(σ) Z_2(2σ-1)
//!         + 4 pi^σ / Γ(σ) sum_q r(q) q^{(1/2-σ)/2} sum_m m^{σ-1/2} K_{σ-1/2}(2 pi m sqrt q)
//! ```
//!
//! where r(q) counts planar points on the circle |k|^2 = q.

use super::shells::{shell_count_2d, Shells};
use crate::error::{Error, Result};
use crate::specfun::{bessel_k_half, dirichlet_beta, ln_gamma, zeta, SpecialValue};
use std::f64::consts::PI;

/// Z_d(s) over Z^d \ {0}; needs s > d.
pub fn lattice_zeta(d: u32, s: f64) -> Result<SpecialValue> {
    if !(s > d as f64) {
        return Err(Error::Domain(format!("lattice zeta Z_{d}({s}) diverges")));
    }
    match d {
        1 => Ok(SpecialValue::rel(2.0 * zeta(s), 4e-15)),
        2 => {
            let h = 0.5 * s;
            Ok(SpecialValue::rel(4.0 * zeta(h) * dirichlet_beta(h), 6e-15))
        }
        3 => {
            let sigma = 0.5 * s;
            if sigma.fract() != 0.0 || sigma > 40.0 {
                return Err(Error::Domain(format!("Z_3({s}) only for even integer s <= 80")));
            }
            Ok(z3(sigma as u32))
        }
        _ => Err(Error::Domain(format!("dimension {d} not supported"))),
    }
}

fn z3(sigma: u32) -> SpecialValue {
    let sg = sigma as f64;
    if sigma >= 8 {
        // the split cancels badly here; shells to m = 400 leave < 1e-16
        let sh = Shells::new(3, 400).expect("small shell table");
        let (v, _) = sh.sum_range(0, 400, |m| (-sg * (m as f64).ln()).exp());
        let tail = 4.0 * PI * 20f64.powf(3.0 - 2.0 * sg) / (2.0 * sg - 3.0);
        return SpecialValue::new(v, tail + 4e-16 * v);
    }
    let a = 2.0 * zeta(2.0 * sg);
    let hz = sg - 0.5;
    let z2 = 4.0 * zeta(hz) * dirichlet_beta(hz);
    let b = (0.5 * PI.ln() + ln_gamma(hz) - ln_gamma(sg)).exp() * z2;
    let ln_pref = 4f64.ln() + sg * PI.ln() - ln_gamma(sg);
    let j = sigma - 1; // K_{sigma - 1/2} = K_{j + 1/2}
    let mut c = 0.0;
    for q in 1..=400u64 {
        let rq = shell_count_2d(q);
        if rq == 0 {
            continue;
        }
        let sq = (q as f64).sqrt();
        if 2.0 * PI * sq > 60.0 + 2.0 * sg {
            break;
        }
        let mut inner = 0.0;
        for m in 1..200u64 {
            let x = 2.0 * PI * m as f64 * sq;
            let t = (ln_pref + (0.5 - sg) * 0.5 * (q as f64).ln() + hz * (m as f64).ln()).exp() * bessel_k_half(j, x);
            inner += t;
            if t < 1e-19 * (a + b) {
                break;
            }
        }
        c += rq as f64 * inner;
    }
    SpecialValue::rel(a + b + c, 2e-14)
}
