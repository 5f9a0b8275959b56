//! Riemann zeta, Dirichlet beta and a scaled Hurwitz tail.
//!
//! Alternating series are summed with the Cohen-Rodriguez Villegas-Zagier
//! acceleration, which needs only ~40 terms for double precision.

use super::{ln_gamma, SpecialValue, EULER_GAMMA};
use crate::error::{domain, Result};
use std::f64::consts::{LN_2, PI};

const CVZ_N: usize = 42;

/// sum_{k>=0} (-1)^k a(k) for completely monotone a.
fn cvz(a: impl Fn(f64) -> f64) -> f64 {
    let n = CVZ_N as f64;
    let mut d = (3.0 + 8f64.sqrt()).powi(CVZ_N as i32);
    d = 0.5 * (d + 1.0 / d);
    let mut b = -1.0;
    let mut c = -d;
    let mut s = 0.0;
    for k in 0..CVZ_N {
        let kf = k as f64;
        c = b - c;
        s += c * a(kf);
        b = (kf + n) * (kf - n) * b / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}

/// Dirichlet eta function for s > 0.
pub fn eta(s: f64) -> f64 {
    cvz(|k| (k + 1.0).powf(-s))
}

/// Riemann zeta for s > 0, s != 1 (returns +inf at s = 1).
pub fn zeta(s: f64) -> f64 {
    if s == 1.0 {
        return f64::INFINITY;
    }
    if s > 60.0 {
        return 1.0 + 2f64.powf(-s) + 3f64.powf(-s);
    }
    // zeta = eta / (1 - 2^{1-s})
    eta(s) / -((1.0 - s) * LN_2).exp_m1()
}

/// Dirichlet beta, sum_{k>=0} (-1)^k (2k+1)^{-s}, for s > 0.
pub fn dirichlet_beta(s: f64) -> f64 {
    if s > 60.0 {
        return 1.0 - 3f64.powf(-s) + 5f64.powf(-s);
    }
    cvz(|k| (2.0 * k + 1.0).powf(-s))
}

/// Catalan's constant, beta(2).
pub fn catalan() -> f64 {
    dirichlet_beta(2.0)
}

/// Constant term of zeta(1 + e) = 1/e + gamma + O(e).
pub fn zeta_laurent_constant() -> f64 {
    EULER_GAMMA
}

/// beta'(1) = (pi/4)(gamma + 2 log 2 + 3 log pi - 4 log Gamma(1/4)).
pub fn dirichlet_beta_prime_at_1() -> SpecialValue {
    let v = 0.25 * PI * (EULER_GAMMA + 2.0 * LN_2 + 3.0 * PI.ln() - 4.0 * ln_gamma(0.25));
    SpecialValue::rel(v, 1e-14)
}

/// (zeta(s), beta(s)); zeta is +inf at s = 1.
pub fn zeta_dirichlet(s: f64) -> Result<(SpecialValue, SpecialValue)> {
    if !(s > 0.0) {
        return domain(format!("zeta_dirichlet needs s > 0, got {s}"));
    }
    let z = zeta(s);
    let zv = if z.is_finite() {
        // conditioning of 1 - 2^{1-s} near s = 1 is benign; allow a few ulps
        SpecialValue::rel(z, 2e-15)
    } else {
        SpecialValue::new(z, 0.0)
    };
    Ok((zv, SpecialValue::rel(dirichlet_beta(s), 2e-15)))
}

const BERNOULLI_2J: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// sum_{k>=a} (q/k)^sigma for integer a >= 1, sigma > 1, with an error
/// estimate. Terms are formed as powers of q/k so nothing overflows.
pub fn hurwitz_scaled(sigma: f64, a: u64, q: f64) -> (f64, f64) {
    assert!(sigma > 1.0 && a >= 1);
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut k = a;
    let switch_at = (a + 8).max(sigma.ceil() as u64 + 1);
    loop {
        let t = (sigma * (q / k as f64).ln()).exp();
        // Neumaier step
        let s2 = sum + t;
        comp += if sum.abs() >= t.abs() { (sum - s2) + t } else { (t - s2) + sum };
        sum = s2;
        k += 1;
        if t <= 1e-19 * (sum + comp).abs() || t == 0.0 {
            return (sum + comp, 2e-16 * (sum + comp).abs());
        }
        if k >= switch_at {
            break;
        }
    }
    // Euler-Maclaurin from b = k.
    let b = k as f64;
    let fb = (sigma * (q / b).ln()).exp();
    let mut em = b * fb / (sigma - 1.0) + 0.5 * fb;
    // (sigma)_{2j-1} / b^{2j-1} / (2j)!
    let mut poch = sigma / b; // j = 1: (sigma)_1 / b
    let mut fact = 2.0; // (2j)!
    let mut last = f64::INFINITY;
    for (j, bj) in BERNOULLI_2J.iter().enumerate() {
        let jj = (j + 1) as f64;
        if j > 0 {
            // advance (sigma)_{2j-3} -> (sigma)_{2j-1}
            poch *= (sigma + 2.0 * jj - 3.0) * (sigma + 2.0 * jj - 2.0) / (b * b);
            fact *= (2.0 * jj - 1.0) * (2.0 * jj);
        }
        let term = bj / fact * poch * fb;
        if term.abs() > last {
            break;
        }
        em += term;
        last = term.abs();
        if last < 1e-18 * em.abs() {
            break;
        }
    }
    let total = sum + comp + em;
    (total, last.min(total.abs()) + 4e-16 * total.abs())
}

/// sum over odd a > q of chi(a) (q/a)^sigma, chi(a) = (-1)^((a-1)/2).
/// Direct terms until the Boole expansion (Euler numbers via B_2n) is safe.
pub fn alternating_tail_scaled(sigma: f64, q: f64) -> (f64, f64) {
    assert!(sigma > 0.0 && q > 0.0);
    let mut a0 = q.floor() as u64 + 1;
    if a0 % 2 == 0 {
        a0 += 1;
    }
    let chi = if a0 % 4 == 1 { 1.0 } else { -1.0 };
    let x_min = 3.2 * (sigma + 20.0);
    let mut sum: f64 = 0.0;
    let mut comp: f64 = 0.0;
    let mut sign = 1.0;
    let mut a = a0 as f64;
    let mut abs = 0.0;
    while a < x_min {
        let t = (sigma * (q / a).ln()).exp();
        if t < 1e-19 * (sum + comp).abs() {
            // alternating, decreasing: remainder below the next term
            return (chi * (sum + comp), t + 2e-16 * abs);
        }
        let v = sign * t;
        let s2 = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - s2) + v } else { (v - s2) + sum };
        sum = s2;
        abs += t;
        sign = -sign;
        a += 2.0;
    }
    // Boole: sum_k (-1)^k g(k), g(k) = (q/(a+2k))^sigma
    let g0 = (sigma * (q / a).ln()).exp();
    let mut boole = 0.5;
    let mut poch = sigma; // (sigma)_{2n-1}
    let mut pw = 2.0 / a; // (2/a)^{2n-1}
    let mut fact = 2.0; // (2n)!
    let mut four = 4.0;
    let mut last = f64::INFINITY;
    for (j, bj) in BERNOULLI_2J.iter().enumerate() {
        if j > 0 {
            let n = (j + 1) as f64;
            poch *= (sigma + 2.0 * n - 3.0) * (sigma + 2.0 * n - 2.0);
            pw *= 4.0 / (a * a);
            fact *= (2.0 * n - 1.0) * (2.0 * n);
            four *= 4.0;
        }
        let t = (four - 1.0) * bj / fact * pw * poch;
        if t.abs() > last {
            break;
        }
        boole += t;
        last = t.abs();
        if last < 1e-19 {
            break;
        }
    }
    let tail = sign * g0 * boole;
    abs += g0;
    let v = chi * (sum + comp + tail);
    (v, g0 * last + 2e-16 * abs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_tail_against_direct() {
        for &(s, q) in &[(2.0, 0.5), (2.0, 7.3), (3.5, 40.0), (10.0, 100.0), (30.0, 3.0)] {
            let (v, e) = alternating_tail_scaled(s, q);
            let mut acc = 0.0;
            let mut a = (q as f64).floor() as u64 + 1;
            // pair terms to speed up convergence, then average the last two partial sums
            let mut prev = 0.0;
            for _ in 0..2_000_000 {
                if a % 2 == 1 {
                    let chi = if a % 4 == 1 { 1.0 } else { -1.0 };
                    prev = acc;
                    acc += chi * (q / a as f64).powf(s);
                }
                a += 1;
            }
            let avg = 0.5 * (acc + prev);
            assert!((v - avg).abs() < 1e-12 * v.abs().max(1e-3) + 1e-13, "s={s} q={q} {v} {avg}");
            assert!(e < 1e-14 * v.abs().max(1.0));
        }
        // full series at q -> 0 scaled back: beta(s) = sum_{odd a} chi(a) a^{-s}
        let q: f64 = 0.5;
        let (v, _) = alternating_tail_scaled(3.0, q);
        assert!((v / q.powi(3) - dirichlet_beta(3.0)).abs() < 1e-13);
    }

    #[test]
    fn classical_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta(3.0) - 1.202_056_903_159_594_2).abs() < 1e-15);
        assert!((catalan() - 0.915_965_594_177_219).abs() < 1e-15);
        assert!((dirichlet_beta(1.0) - PI / 4.0).abs() < 1e-15);
        assert!((dirichlet_beta(3.0) - PI.powi(3) / 32.0).abs() < 1e-15);
        assert!((eta(1.0) - LN_2).abs() < 1e-15);
    }

    /// Catalan from a slowly convergent alternating series, averaged
    /// partial sums (Euler transform flavour) as an independent oracle.
    #[test]
    fn catalan_partial_sum_oracle() {
        let n = 200_000;
        let mut s = 0.0;
        for k in 0..n {
            let t = 1.0 / ((2 * k + 1) as f64).powi(2);
            s += if k % 2 == 0 { t } else { -t };
        }
        let next = 1.0 / ((2 * n + 1) as f64).powi(2);
        let avg = s + 0.5 * next; // n even: next term positive
        assert!((catalan() - avg).abs() < 1e-12);
    }

    #[test]
    fn laurent_behaviour_near_one() {
        for e in [1e-3, 1e-5, 1e-7] {
            let s = 1.0 + e;
            let v = zeta(s) - 1.0 / (s - 1.0);
            assert!((v - EULER_GAMMA).abs() < 2.0 * e, "e={e} v={v}");
        }
    }

    #[test]
    fn beta_prime_closed_form() {
        let bp = dirichlet_beta_prime_at_1().value;
        assert!((bp - 0.192_901_316_796_912_4).abs() < 1e-14);
        // central difference of beta itself
        let h = 1e-4;
        let fd = (dirichlet_beta(1.0 + h) - dirichlet_beta(1.0 - h)) / (2.0 * h);
        assert!((fd - bp).abs() < 1e-8);
    }

    #[test]
    fn relative_accuracy_range() {
        // compare against a brute sum with integral tail for s in (1, 10]
        for &s in &[1.5, 2.5, 4.0, 7.0, 10.0] {
            let n = 200_000u64;
            let mut acc = 0.0;
            for k in (1..=n).rev() {
                acc += (k as f64).powf(-s);
            }
            let nf = n as f64;
            // Euler-Maclaurin tail beyond n
            acc += nf.powf(1.0 - s) / (s - 1.0) - 0.5 * nf.powf(-s) + s / 12.0 * nf.powf(-s - 1.0);
            assert!(((zeta(s) - acc) / acc).abs() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn hurwitz_matches_zeta() {
        // sum_{k>=1} k^{-s} with q = 1 equals zeta(s)
        for &s in &[1.5, 2.0, 3.7, 9.0, 40.0, 250.0] {
            let (v, e) = hurwitz_scaled(s, 1, 1.0);
            assert!(((v - zeta(s)) / zeta(s)).abs() < 1e-14, "s={s} v={v}");
            assert!(e < 1e-13);
        }
        // tail: sum_{k>=a} (q/k)^s = q^s (zeta(s) - sum_{k<a} k^{-s})
        let (s, a, q) = (4.0f64, 5u64, 3.0f64);
        let partial: f64 = (1..a).map(|k| (k as f64).powf(-s)).sum();
        let want = q.powf(s) * (zeta(s) - partial);
        assert!(((hurwitz_scaled(s, a, q).0 - want) / want).abs() < 1e-13);
    }

    #[test]
    fn domain() {
        assert!(zeta_dirichlet(0.0).is_err());
        let (z, b) = zeta_dirichlet(2.0).unwrap();
        assert!((z.value - PI * PI / 6.0).abs() < 1e-15);
        assert!((b.value - catalan()).abs() < 1e-16);
        let (z1, b1) = zeta_dirichlet(1.0).unwrap();
        assert!(z1.value.is_infinite());
        assert!((b1.value - PI / 4.0).abs() < 1e-15);
    }
}
