//! Modified Bessel functions of the second kind.
//!
//! Power series below x = 2, Steed's continued fraction (Temme's form) on
//! [2, 25) and the Hankel asymptotic series from 25 on.

use super::{SpecialValue, EULER_GAMMA};
use crate::error::{domain, Result};
use std::f64::consts::PI;

const SERIES_MAX: f64 = 2.0;
const ASYMPTOTIC_MIN: f64 = 25.0;

fn series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let lg = (0.5 * x).ln();
    // I0, I1 and the digamma-weighted companions.
    let mut t0 = 1.0; // y^k / (k!)^2
    let mut t1 = 1.0; // y^k / (k!(k+1)!)
    let mut hk = 0.0; // harmonic number H_k
    let mut i0 = 0.0;
    let mut i1 = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in 0..60 {
        let kf = k as f64;
        if k > 0 {
            t0 *= y / (kf * kf);
            t1 *= y / (kf * (kf + 1.0));
            hk += 1.0 / kf;
        }
        i0 += t0;
        i1 += t1;
        s0 += hk * t0;
        // psi(k+1) + psi(k+2) = 2 H_k + 1/(k+1) - 2 gamma
        s1 += (2.0 * hk + 1.0 / (kf + 1.0) - 2.0 * EULER_GAMMA) * t1;
        if t0 < 1e-18 * i0 && k > 2 {
            break;
        }
    }
    let i1 = 0.5 * x * i1;
    let k0 = -(lg + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / x + lg * i1 - 0.25 * x * s1;
    (k0, k1)
}

/// Steed / Temme continued fraction; returns e^x K0, e^x K1.
fn cf2_scaled(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 && (delh / h).abs() < 1e-17 {
            break;
        }
    }
    let h = a1 * h;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// Hankel expansion for e^x K_nu(x), nu in {0, 1}.
fn asymptotic_scaled(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..80 {
        let kf = k as f64;
        let next = term * (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    (PI / (2.0 * x)).sqrt() * sum
}

fn scaled_pair(x: f64) -> (f64, f64) {
    if x < SERIES_MAX {
        let (a, b) = series(x);
        let e = x.exp();
        (a * e, b * e)
    } else if x < ASYMPTOTIC_MIN {
        cf2_scaled(x)
    } else {
        (asymptotic_scaled(0.0, x), asymptotic_scaled(1.0, x))
    }
}

/// e^x K0(x) for x > 0.
pub fn k0_scaled(x: f64) -> f64 {
    scaled_pair(x).0
}

/// e^x K1(x) for x > 0.
pub fn k1_scaled(x: f64) -> f64 {
    scaled_pair(x).1
}

/// K0(x); zero once e^{-x} underflows.
pub fn k0(x: f64) -> f64 {
    if x < SERIES_MAX {
        series(x).0
    } else if x > 745.0 {
        0.0
    } else {
        k0_scaled(x) * (-x).exp()
    }
}

pub fn k1(x: f64) -> f64 {
    if x < SERIES_MAX {
        series(x).1
    } else if x > 745.0 {
        0.0
    } else {
        k1_scaled(x) * (-x).exp()
    }
}

/// K2 from the recurrence K2 = K0 + 2 K1 / x.
pub fn k2(x: f64) -> f64 {
    k0(x) + 2.0 * k1(x) / x
}

/// K_{j+1/2}(x) from the terminating closed form.
pub fn bessel_k_half(j: u32, x: f64) -> f64 {
    // sqrt(pi/2x) e^{-x} sum_{i<=j} (j+i)! / (i! (j-i)!) (2x)^{-i}
    let mut term = 1.0;
    let mut sum = 1.0;
    let jf = j as f64;
    for i in 1..=j {
        let fi = i as f64;
        // ratio of consecutive coefficients: (j+i)(j-i+1) / i
        term *= (jf + fi) * (jf - fi + 1.0) / (fi * 2.0 * x);
        sum += term;
    }
    (PI / (2.0 * x)).sqrt() * (-x).exp() * sum
}

/// K_order(x) for order 0 or 1 with a relative error bound.
pub fn bessel_k(order: i32, x: f64) -> Result<SpecialValue> {
    if !(x > 0.0) {
        return domain(format!("bessel_k needs x > 0, got {x}"));
    }
    let v = match order {
        0 => k0(x),
        1 => k1(x),
        _ => return domain(format!("bessel_k order must be 0 or 1, got {order}")),
    };
    Ok(SpecialValue::rel(v, 2e-15))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Trapezoid rule on int_0^inf e^{-x cosh t} cosh(nu t) dt, which is
    /// spectrally accurate for this analytic, doubly-decaying integrand.
    fn quad_k(nu: f64, x: f64) -> f64 {
        let h: f64 = 1.0 / 64.0;
        let mut s = 0.5 * (-x).exp();
        let mut t = h;
        loop {
            let v = (-x * t.cosh()).exp() * (nu * t).cosh();
            s += v;
            if v < 1e-300 || t > 40.0 {
                break;
            }
            t += h;
        }
        s * h
    }

    #[test]
    fn quadrature_oracle_values() {
        assert!((k0(1.0) - 0.421_024_438_240_708_3).abs() < 1e-15);
        assert!((k1(1.0) - 0.601_907_230_197_234_6).abs() < 1e-15);
        for &x in &[1e-6, 1e-3, 0.1, 0.5, 1.0, 1.9, 2.0, 2.1, 3.0, 7.5, 15.0, 24.9, 25.0, 40.0, 100.0, 600.0] {
            for nu in [0.0, 1.0] {
                let exact = quad_k(nu, x);
                let got = if nu == 0.0 { k0(x) } else { k1(x) };
                assert!(((got - exact) / exact).abs() < 1e-13, "nu={nu} x={x} got={got} exact={exact}");
            }
        }
    }

    #[test]
    fn branches_agree_at_crossovers() {
        for x in [SERIES_MAX, ASYMPTOTIC_MIN] {
            let (a0, a1) = if x == SERIES_MAX {
                let (a, b) = series(x);
                (a * x.exp(), b * x.exp())
            } else {
                (asymptotic_scaled(0.0, x), asymptotic_scaled(1.0, x))
            };
            let (b0, b1) = cf2_scaled(x);
            assert!(((a0 - b0) / b0).abs() < 1e-13);
            assert!(((a1 - b1) / b1).abs() < 1e-13);
        }
    }

    #[test]
    fn small_argument_logarithm() {
        let x: f64 = 1e-8;
        let approx = -x.ln() + 2f64.ln() - EULER_GAMMA;
        assert!((k0(x) - approx).abs() < 1e-14);
    }

    #[test]
    fn derivative_relation() {
        let mut x = 0.5;
        while x <= 20.0 {
            let h = 1e-5 * x;
            let d = (k0(x + h) - k0(x - h)) / (2.0 * h);
            assert!((d + k1(x)).abs() < 1e-8 * (1.0 + k1(x)), "x={x}");
            x += 0.37;
        }
    }

    #[test]
    fn decreasing_and_underflow() {
        let mut prev = (f64::INFINITY, f64::INFINITY);
        let mut x = 1e-4;
        while x < 800.0 {
            let cur = (k0(x), k1(x));
            assert!(cur.0 <= prev.0 && cur.1 <= prev.1);
            if cur.0 > 0.0 {
                assert!(cur.0 < prev.0 && cur.1 < prev.1);
            }
            prev = cur;
            x *= 1.07;
        }
        assert_eq!(k0(760.0), 0.0);
        assert_eq!(k1(760.0), 0.0);
    }

    #[test]
    fn half_integer_orders() {
        for &x in &[0.3, 1.0, 4.0, 12.0] {
            for j in 0..4u32 {
                let nu = j as f64 + 0.5;
                let exact = quad_k(nu, x);
                assert!(((bessel_k_half(j, x) - exact) / exact).abs() < 1e-12);
            }
        }
        let x = 2.7;
        assert!(((k2(x) - quad_k(2.0, x)) / k2(x)).abs() < 1e-13);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_k(0, 0.0).is_err());
        assert!(bessel_k(2, 1.0).is_err());
        assert!(bessel_k(1, 3.0).unwrap().abs_error_bound > 0.0);
    }
}
