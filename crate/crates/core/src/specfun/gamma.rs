//! log-gamma and the complementary error function.

use super::{zeta, SpecialValue, EULER_GAMMA};
use crate::error::{domain, Result};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// zeta(k) - 1 for k = 2..=45.
fn zeta_minus_one() -> &'static [f64; 46] {
    static T: OnceLock<[f64; 46]> = OnceLock::new();
    T.get_or_init(|| {
        let mut t = [0.0; 46];
        for (k, v) in t.iter_mut().enumerate().skip(2) {
            *v = if k < 24 {
                zeta(k as f64) - 1.0
            } else {
                (2..12).map(|n| (n as f64).powi(-(k as i32))).sum()
            };
        }
        t
    })
}

/// ln Gamma(2 + z) for |z| <= 1/2; vanishes exactly at z = 0.
fn ln_gamma_2pz(z: f64) -> f64 {
    let t = zeta_minus_one();
    let mut s = 0.0;
    // zk = (-z)^k
    let mut zk = -z;
    for (k, zm1) in t.iter().enumerate().skip(2) {
        zk *= -z;
        s += zm1 * zk / k as f64;
        if zk.abs() < 1e-20 {
            break;
        }
    }
    z * (1.0 - EULER_GAMMA) + s
}

/// ln Gamma(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return ln_gamma(1.0 + x) - x.ln();
    }
    if x <= 1.5 {
        // ln Gamma(1+z) = ln Gamma(2+z) - ln(1+z)
        let z = x - 1.0;
        return ln_gamma_2pz(z) - z.ln_1p();
    }
    if x <= 2.5 {
        return ln_gamma_2pz(x - 2.0);
    }
    if x < 8.0 {
        let mut y = x;
        let mut p = 1.0;
        while y > 2.5 {
            y -= 1.0;
            p *= y;
        }
        return p.ln() + ln_gamma_2pz(y - 2.0);
    }
    // Stirling with Bernoulli corrections B_{2k} / (2k (2k-1) x^{2k-1}).
    const C: [f64; 9] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
        43867.0 / 244_188.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut p = inv;
    for c in C {
        corr += c * p;
        p *= inv2;
    }
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + corr
}

/// ln Gamma(x) with an error bound.
pub fn log_gamma(x: f64) -> Result<SpecialValue> {
    if !(x > 0.0) {
        return domain(format!("log_gamma needs x > 0, got {x}"));
    }
    let v = ln_gamma(x);
    Ok(SpecialValue::new(v, 8.0 * f64::EPSILON * v.abs().max(1e-2 * x.ln().abs()).max(f64::MIN_POSITIVE)))
}

fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..60 {
        let nf = n as f64;
        term *= -x2 / nf;
        let add = term / (2.0 * nf + 1.0);
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    2.0 / PI.sqrt() * sum
}

/// Continued fraction for x >= 1/2 (modified Lentz).
fn erfc_cf(x: f64) -> f64 {
    // erfc x = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..20_000 {
        let a = 0.5 * n as f64;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.abs() < 0.5 {
        1.0 - erf_series(x)
    } else if x > 0.0 {
        erfc_cf(x)
    } else {
        2.0 - erfc_cf(-x)
    }
}
