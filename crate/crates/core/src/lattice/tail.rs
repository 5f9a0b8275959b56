//! Integral brackets for discarded lattice tails.
//!
//! With N(r) the number of lattice points in the closed ball of radius r
//! (origin included) and c = sqrt(d)/2 we have V(r - c) <= N(r) <= V(r + c).
//! For radially decreasing phi, writing the tail as a Stieltjes integral and
//! integrating by parts gives
//!
//! ```text
//! sum_{|k|>R} phi(|k|) in [ phi(R)(V(R-c) - N(R)) + w int_R^inf (r-c)^{d-1} phi,
//!                           phi(R)(V(R+c) - N(R)) + w int_R^inf (r+c)^{d-1} phi ]
//! ```
//!
//! where w is the sphere area. `full_sum_bracket_2d` is the square-shell
//! variant over the whole punctured plane lattice.

use super::shells::ball_count;
use crate::error::{Error, Result};
use crate::specfun::{ball_volume, k0, k1, omega};

/// A radially decreasing summand phi(r), r = |k|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailDescriptor {
    /// r^{-a} (1 + mu r^b)^{-p}
    Rational { a: f64, b: f64, p: f64, mu: f64 },
    /// (r0 / r)^s
    Power { s: f64, r0: f64 },
    /// r^power K_order(c r), order in {0, 1}
    BesselK { order: u32, power: u32, c: f64 },
}

impl TailDescriptor {
    pub fn phi(&self, r: f64) -> f64 {
        match *self {
            TailDescriptor::Rational { a, b, p, mu } => r.powf(-a) * (1.0 + mu * r.powf(b)).powf(-p),
            TailDescriptor::Power { s, r0 } => (s * (r0 / r).ln()).exp(),
            TailDescriptor::BesselK { order, power, c } => {
                let k = if order == 0 { k0(c * r) } else { k1(c * r) };
                r.powi(power as i32) * k
            }
        }
    }

    /// Fails unless phi is positive and decreasing on [r, inf).
    pub fn check_monotone(&self, r: f64) -> Result<()> {
        let ok = match *self {
            TailDescriptor::Rational { a, b, p, mu } => {
                // d/dr log phi < 0  <=>  a + mu r^b (a + p b) > 0, increasing in r
                mu > 0.0 && b > 0.0 && p >= 0.0 && a + p * b > 0.0 && a + mu * r.powf(b) * (a + p * b) > 0.0
            }
            TailDescriptor::Power { s, r0 } => s > 0.0 && r0 > 0.0,
            TailDescriptor::BesselK { order, power, c } => c > 0.0 && power <= order && order <= 1,
        };
        if ok && r > 0.0 {
            Ok(())
        } else {
            Err(Error::NotMonotone(format!("{self:?} on [{r}, inf)")))
        }
    }

    /// Bounds (lo, hi) on int_R^inf r^q phi(r) dr.
    pub fn moment(&self, q: u32, r: f64) -> Result<(f64, f64)> {
        let qf = q as f64;
        match *self {
            TailDescriptor::Power { s, r0 } => {
                if s <= qf + 1.0 {
                    return Err(Error::Domain(format!("moment {q} of r^-{s} diverges")));
                }
                let v = (s * (r0 / r).ln() + (qf + 1.0) * r.ln()).exp() / (s - qf - 1.0);
                Ok((v * (1.0 - 1e-15), v * (1.0 + 1e-15)))
            }
            TailDescriptor::Rational { a, b, p, mu } => {
                if a + b * p <= qf + 1.0 {
                    return Err(Error::Domain(format!("moment {q} of {self:?} diverges")));
                }
                let x = 1.0 / (mu * r.powf(b));
                if x <= 0.5 {
                    // (1 + mu r^b)^{-p} = (mu r^b)^{-p} sum_j C(-p, j) x^j
                    let base = mu.powf(-p) * r.powf(qf + 1.0 - a - b * p);
                    let mut coef = 1.0;
                    let mut sum = 0.0;
                    let mut last = f64::INFINITY;
                    for j in 0..400 {
                        let jf = j as f64;
                        if j > 0 {
                            coef *= -(p + jf - 1.0) / jf;
                        }
                        let t = coef * x.powi(j) / (a + b * (p + jf) - qf - 1.0);
                        sum += t;
                        last = t.abs();
                        if last < 1e-18 * sum.abs() {
                            break;
                        }
                    }
                    let v = base * sum;
                    let e = base * last * 2.0 + 1e-15 * v.abs();
                    Ok((v - e, v + e))
                } else {
                    quad_moment(|t| self.phi(t), q, r)
                }
            }
            TailDescriptor::BesselK { order, power, c } => {
                let top = order + 1; // exact: int r^{nu+1} K_nu(c r) = R^{nu+1} K_{nu+1}(cR)/c
                let k = power + q;
                if k == top {
                    let kn = if order == 0 { k1(c * r) } else { k0(c * r) + 2.0 * k1(c * r) / (c * r) };
                    let v = r.powi(top as i32) * kn / c;
                    Ok((v * (1.0 - 1e-14), v * (1.0 + 1e-14)))
                } else if k < top {
                    let (_, hi) = self.moment(q + (top - k), r)?;
                    Ok((0.0, hi / r.powi((top - k) as i32)))
                } else {
                    quad_moment(|t| self.phi(t), q, r)
                }
            }
        }
    }
}

const GL_X: [f64; 5] = [
    0.148_874_338_981_631_22,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_W: [f64; 5] = [
    0.295_524_224_714_752_87,
    0.269_266_719_309_996_35,
    0.219_086_362_515_982_04,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_14,
];

fn gl10(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for i in 0..5 {
        s += GL_W[i] * (f(c - h * GL_X[i]) + f(c + h * GL_X[i]));
    }
    s * h
}

fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, depth: u32, err: &mut f64) -> f64 {
    let m = 0.5 * (a + b);
    let l = gl10(f, a, m);
    let r = gl10(f, m, b);
    let diff = (l + r - whole).abs();
    if depth == 0 || diff <= 1e-15 * (l + r).abs() + 1e-300 {
        *err += diff;
        return l + r;
    }
    adaptive(f, a, m, l, depth - 1, err) + adaptive(f, m, b, r, depth - 1, err)
}

/// Adaptive Gauss-Legendre on [a, b]; returns (value, error estimate).
pub(crate) fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let mut err = 0.0;
    let whole = gl10(&f, a, b);
    let v = adaptive(&f, a, b, whole, 24, &mut err);
    (v, err)
}

/// int_R^inf r^q phi(r) dr via t = R / r on dyadic panels of (0, 1].
fn quad_moment(phi: impl Fn(f64) -> f64, q: u32, r: f64) -> Result<(f64, f64)> {
    let g = |t: f64| {
        let x = r / t;
        x.powi(q as i32) * phi(x) * r / (t * t)
    };
    let mut total = 0.0;
    let mut err = 0.0;
    let mut hi = 1.0;
    for k in 0..200 {
        let lo = 0.5 * hi;
        let (v, e) = integrate(g, lo, hi);
        total += v;
        err += e;
        if k > 4 && v.abs() < 1e-18 * total.abs() {
            break;
        }
        if k == 199 {
            return Err(Error::ToleranceUnreachable("tail moment quadrature did not settle".into()));
        }
        hi = lo;
    }
    let e = err + 1e-14 * total.abs();
    Ok((total - e, total + e))
}

/// Bracket of sum_{|k| > r} phi(|k|) over Z^d given N(r) (origin included).
pub(crate) fn tail_bracket_with_count(d: u32, r: f64, desc: &TailDescriptor, inside: u64) -> Result<(f64, f64)> {
    desc.check_monotone(r)?;
    let c = 0.5 * (d as f64).sqrt();
    if r <= c {
        return Err(Error::Domain(format!("tail radius {r} must exceed {c}")));
    }
    let w = omega(d);
    let vol = ball_volume(d);
    let n = inside as f64;
    let phi_r = desc.phi(r);
    let (lo_w, hi_w) = match d {
        1 => desc.moment(0, r)?,
        2 => {
            let m0 = desc.moment(0, r)?;
            let m1 = desc.moment(1, r)?;
            (m1.0 - c * m0.1, m1.1 + c * m0.1)
        }
        3 => {
            let m0 = desc.moment(0, r)?;
            let m1 = desc.moment(1, r)?;
            let m2 = desc.moment(2, r)?;
            (m2.0 - 2.0 * c * m1.1 + c * c * m0.0, m2.1 + 2.0 * c * m1.1 + c * c * m0.1)
        }
        _ => return Err(Error::Domain(format!("dimension {d} not supported"))),
    };
    let lower = phi_r * (vol * (r - c).powi(d as i32) - n) + w * lo_w;
    let upper = phi_r * (vol * (r + c).powi(d as i32) - n) + w * hi_w;
    Ok((lower.max(0.0), upper))
}

/// Rigorous bracket for sum_{|k| > r} phi(|k|) over Z^d.
pub fn tail_bracket(d: u32, r: f64, desc: &TailDescriptor) -> Result<(f64, f64)> {
    let m = (r * r).floor() as u64;
    tail_bracket_with_count(d, r, desc, ball_count(d, m))
}

/// Square-shell bracket of the full punctured sum over Z^2:
/// I - 4 int_1^inf R - 4 R(1) <= sum' R(|k|) <= I + 4 int_1^inf R + 4R(1) + 4R(sqrt 2),
/// with I the integral of R(|x|) over {max(|x|,|y|) >= 1}.
pub fn full_sum_bracket_2d(desc: &TailDescriptor) -> Result<(f64, f64)> {
    desc.check_monotone(1.0)?;
    let s2 = std::f64::consts::SQRT_2;
    // corner region 1 <= r <= sqrt 2: arc length outside the square is 8 r acos(1/r)
    let (corner, ce) = integrate(|r| 8.0 * r * (1.0 / r).acos() * desc.phi(r), 1.0, s2);
    let far = desc.moment(1, s2)?;
    let tail1 = desc.moment(0, 1.0)?;
    let i_lo = corner - ce + 2.0 * std::f64::consts::PI * far.0;
    let i_hi = corner + ce + 2.0 * std::f64::consts::PI * far.1;
    let r1 = desc.phi(1.0);
    let rs2 = desc.phi(s2);
    Ok((i_lo - 4.0 * tail1.1 - 4.0 * r1, i_hi + 4.0 * tail1.1 + 4.0 * r1 + 4.0 * rs2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn brute_tail_2d(r: f64, rmax: i64, phi: impl Fn(f64) -> f64) -> f64 {
        let mut s = 0.0;
        let r2 = r * r;
        for a in -rmax..=rmax {
            for b in -rmax..=rmax {
                let m = (a * a + b * b) as f64;
                if m > r2 && m <= (rmax * rmax) as f64 {
                    s += phi(m.sqrt());
                }
            }
        }
        s
    }

    #[test]
    fn inverse_fourth_power_tail() {
        let desc = TailDescriptor::Power { s: 4.0, r0: 1.0 };
        let (lo, hi) = tail_bracket(2, 10.0, &desc).unwrap();
        assert!(lo <= hi);
        assert!(lo <= PI / 100.0 * 1.1 && hi >= PI / 100.0 * 0.9);
        // brute force to radius 2000 plus its own bracket
        let direct = brute_tail_2d(10.0, 2000, |r| r.powi(-4));
        let (l2, h2) = tail_bracket(2, 2000.0, &desc).unwrap();
        assert!(direct + l2 >= lo && direct + h2 <= hi);
    }

    #[test]
    fn rational_tail_contains_brute_force() {
        let desc = TailDescriptor::Rational { a: 0.0, b: 2.0, p: 2.0, mu: 1.0 };
        let (lo, hi) = tail_bracket(2, 50.0, &desc).unwrap();
        let direct = brute_tail_2d(50.0, 3000, |r| 1.0 / (1.0 + r * r).powi(2));
        let (l2, h2) = tail_bracket(2, 3000.0, &desc).unwrap();
        assert!(direct + l2 >= lo - 1e-15 && direct + h2 <= hi + 1e-15, "{lo} {hi} {}", direct);
        assert!(hi - lo < 1e-4, "width {}", hi - lo);
    }

    #[test]
    fn bessel_moments_exact() {
        let c = 2.0;
        let desc = TailDescriptor::BesselK { order: 0, power: 0, c };
        let (lo, hi) = desc.moment(1, 1.5).unwrap();
        let (q, _) = quad_moment(|r| k0(c * r), 1, 1.5).unwrap();
        assert!(((lo + hi) / 2.0 - q).abs() < 1e-13 * q);
        let desc1 = TailDescriptor::BesselK { order: 1, power: 1, c };
        let (lo, hi) = desc1.moment(1, 1.5).unwrap();
        let (q, _) = quad_moment(|r| r * k1(c * r), 1, 1.5).unwrap();
        assert!(((lo + hi) / 2.0 - q).abs() < 1e-13 * q);
        let (_, up) = desc1.moment(0, 1.5).unwrap();
        let (q0, _) = quad_moment(|r| r * k1(c * r), 0, 1.5).unwrap();
        assert!(up >= q0);
    }

    #[test]
    fn rational_series_matches_quadrature() {
        let desc = TailDescriptor::Rational { a: 2.0, b: 2.0, p: 1.0, mu: 0.3 };
        for q in 0..3 {
            let (lo, hi) = desc.moment(q, 5.0).unwrap();
            let (ql, qh) = quad_moment(|r| desc.phi(r), q, 5.0).unwrap();
            assert!(((lo + hi) - (ql + qh)).abs() < 1e-12 * (lo + hi).abs(), "q={q}");
        }
    }

    #[test]
    fn one_and_three_dimensions() {
        // 1D: sum_{|k|>R} k^-2 = 2 (zeta(2) - sum_{k<=R} k^-2)
        let desc = TailDescriptor::Power { s: 2.0, r0: 1.0 };
        let (lo, hi) = tail_bracket(1, 10.0, &desc).unwrap();
        let partial: f64 = (1..=10).map(|k| 1.0 / (k * k) as f64).sum();
        let exact = 2.0 * (PI * PI / 6.0 - partial);
        assert!(lo <= exact && exact <= hi);
        // 3D: tail of |k|^-6 beyond 6 against a brute sum with its own bracket
        let desc3 = TailDescriptor::Power { s: 6.0, r0: 1.0 };
        let (lo, hi) = tail_bracket(3, 6.0, &desc3).unwrap();
        let rmax = 60i64;
        let mut s = 0.0;
        for a in -rmax..=rmax {
            for b in -rmax..=rmax {
                for c in -rmax..=rmax {
                    let m = (a * a + b * b + c * c) as f64;
                    if m > 36.0 && m <= (rmax * rmax) as f64 {
                        s += m.powi(-3);
                    }
                }
            }
        }
        let (l2, h2) = tail_bracket(3, rmax as f64, &desc3).unwrap();
        assert!(s + l2 >= lo && s + h2 <= hi);
    }

    #[test]
    fn not_monotone_rejected() {
        let bad = TailDescriptor::Rational { a: -4.0, b: 2.0, p: 2.0, mu: 1e-3 };
        assert!(matches!(tail_bracket(2, 3.0, &bad), Err(Error::NotMonotone(_))));
        let ok = TailDescriptor::Rational { a: -1.0, b: 2.0, p: 2.0, mu: 1.0 };
        let r = tail_bracket(2, 3.0, &ok);
        assert!(r.is_ok(), "{r:?}");
    }

    #[test]
    fn square_bracket_contains_sum() {
        // sum' 1/(1+|k|^2)^2 by brute force with a tail bracket
        let desc = TailDescriptor::Rational { a: 0.0, b: 2.0, p: 2.0, mu: 1.0 };
        let s = brute_tail_2d(0.5, 2000, |r| desc.phi(r));
        let (tl, th) = tail_bracket(2, 2000.0, &desc).unwrap();
        let (lo, hi) = full_sum_bracket_2d(&desc).unwrap();
        assert!(lo <= s + tl && s + th <= hi, "{lo} {s} {hi}");
    }
}
