//! Large-n behaviour of the (d,n) deviation in the scaled variable z:
//! mu = z^{-2n} in 1D, mu = z^{-n} in 2D, and the pointwise n -> infinity
//! limits (regular in 1D, driven by the circle count R2 in 2D).

use crate::algebraic::leading_constant;
use crate::error::{domain, Error, Result};
use crate::lattice::{general_point, next_representable, r2_count, shell_count_2d, CaseDN, PrecisionConfig};
use serde::{Serialize, Serializer};
use std::f64::consts::PI;

/// Order n, possibly the formal limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Order::Finite(n) => s.serialize_u32(*n),
            Order::Infinite => s.serialize_str("inf"),
        }
    }
}

impl std::str::FromStr for Order {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" => Ok(Order::Infinite),
            t => t
                .parse::<u32>()
                .ok()
                .filter(|&n| n > 0)
                .map(Order::Finite)
                .ok_or_else(|| Error::Domain(format!("order must be a positive integer or 'inf', got {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScaledPoint {
    pub z: f64,
    pub value: f64,
    pub n: Order,
    pub d: u32,
}

/// ln(1/mu) for the scaled parameter: 2n ln z in 1D, n ln z in 2D.
fn ln_lambda(d: u32, n: u32, z: f64) -> f64 {
    let k = if d == 1 { 2.0 } else { 1.0 };
    k * n as f64 * z.ln()
}

/// F_{d,n}(z) = Theta_{d,n} - c_d(n) delta^{d/2n} on the scaled curve.
pub fn scaled_deviation(d: u32, n: u32, z: f64, cfg: &PrecisionConfig) -> Result<f64> {
    cfg.validate()?;
    if d != 1 && d != 2 {
        return domain(format!("scaled deviation is defined for d in {{1, 2}}, got {d}"));
    }
    let case = CaseDN::new(d, n)?;
    if !(z > 1.0) || !z.is_finite() {
        return domain(format!("z must be a finite value > 1, got {z}"));
    }
    let ll = ln_lambda(d, n, z);
    if ll > f64::MAX.ln() {
        return domain(format!("z^{} overflows for z = {z}", if d == 1 { 2 * n } else { n }));
    }
    // u = ln(1 + lambda), computed without forming lambda
    let u = ll + (-ll).exp().ln_1p();
    let p = general_point(case, u)?;
    let tol = cfg.tol_for(p.theta).max(1e-13);
    if p.theta_err > tol {
        return Err(Error::ToleranceUnreachable(format!("theta error {:e} at z = {z}", p.theta_err)));
    }
    let c = leading_constant(case)?;
    Ok(p.theta - c * p.delta.powf(d as f64 / (2.0 * n as f64)))
}

fn check_z(z: f64) -> Result<()> {
    if !(z > 1.0) || !z.is_finite() {
        return domain(format!("z must be a finite value > 1, got {z}"));
    }
    Ok(())
}

/// Pointwise 1D limit (delta_inf, theta_inf, F_inf) for non-integer z > 1.
pub fn limit_1d(z: f64) -> Result<(f64, f64, f64)> {
    check_z(z)?;
    if z.fract() == 0.0 {
        return domain(format!("the 1D limit is undefined at integer z = {z}"));
    }
    let l = z.floor();
    let delta = if z <= (l * (l + 1.0)).sqrt() { l } else { z * z / (l + 1.0) };
    let theta = 2.0 * l;
    Ok((delta, theta, (l - delta) / PI))
}

/// Successive sums of two squares l1 <= z < l2.
fn representable_bracket(z: f64) -> (u64, u64) {
    let mut l1 = z.floor() as u64;
    while shell_count_2d(l1) == 0 {
        l1 -= 1;
    }
    (l1, next_representable(l1))
}

/// Pointwise 2D limit (delta_inf, theta_inf, F_inf); z must not be a sum of two squares.
pub fn limit_2d_parts(z: f64) -> Result<(f64, f64, f64)> {
    check_z(z)?;
    if z > 1e15 {
        return domain(format!("z = {z} too large for exact integer bracketing"));
    }
    if z.fract() == 0.0 && shell_count_2d(z as u64) > 0 {
        return domain(format!("the 2D limit is undefined at the representable integer z = {z}"));
    }
    let (l1, l2) = representable_bracket(z);
    let (a, b) = (l1 as f64, l2 as f64);
    let delta = if z <= (a * b).sqrt() { a } else { z * z / b };
    let theta = r2_count(l1) as f64;
    Ok((delta, theta, (theta - PI * delta) / (4.0 * PI * PI)))
}

pub fn limit_2d(z: f64) -> Result<f64> {
    limit_2d_parts(z).map(|t| t.2)
}

/// Running infimum of F_{2,inf} over (1, l] at each representable l <= zmax.
/// The infimum on (l1, l2) is approached as z -> l2 from below.
pub fn limit_2d_infimum_series(zmax: u64) -> Vec<(u64, f64)> {
    let mut out = Vec::new();
    let mut inf = f64::INFINITY;
    let mut l1 = 1u64;
    loop {
        let l2 = next_representable(l1);
        if l2 > zmax {
            break;
        }
        inf = inf.min((r2_count(l1) as f64 - PI * l2 as f64) / (4.0 * PI * PI));
        out.push((l2, inf));
        l1 = l2;
    }
    out
}

/// Interior local minima and maxima of a sampled curve, ignoring wiggles
/// smaller than `floor` on either side.
pub fn local_extrema(zs: &[f64], vs: &[f64], floor: f64) -> (Vec<f64>, Vec<f64>) {
    let (mut mins, mut maxs) = (Vec::new(), Vec::new());
    for i in 1..vs.len().saturating_sub(1) {
        let (a, b, c) = (vs[i - 1], vs[i], vs[i + 1]);
        if b < a - floor && b < c - floor {
            mins.push(zs[i]);
        } else if b > a + floor && b > c + floor {
            maxs.push(zs[i]);
        }
    }
    (mins, maxs)
}

/// One point of the scaled family; `None` where the limit is undefined.
pub fn scaled_point(d: u32, n: Order, z: f64, cfg: &PrecisionConfig) -> Result<Option<ScaledPoint>> {
    let value = match n {
        Order::Finite(k) => Some(scaled_deviation(d, k, z, cfg)?),
        Order::Infinite => {
            check_z(z)?;
            let r = match d {
                1 => limit_1d(z).map(|t| t.2),
                2 => limit_2d(z),
                _ => return domain(format!("limits are defined for d in {{1, 2}}, got {d}")),
            };
            match r {
                Ok(v) => Some(v),
                Err(Error::Domain(_)) => None,
                Err(e) => return Err(e),
            }
        }
    };
    Ok(value.map(|value| ScaledPoint { z, value, n, d }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PrecisionConfig {
        PrecisionConfig::default()
    }

    #[test]
    fn limit_1d_values() {
        assert_eq!(limit_1d(1.2).unwrap().2, 0.0);
        assert!((limit_1d(1.9).unwrap().2 - (1.0 - 3.61 / 2.0) / PI).abs() < 1e-15);
        assert!((limit_1d(1.9).unwrap().2 + 0.2563).abs() < 1e-4);
        assert!((limit_1d(2.0 - 1e-12).unwrap().2 + 1.0 / PI).abs() < 1e-11);
        assert_eq!(limit_1d(3.5).unwrap().1, 6.0);
        assert!(limit_1d(3.0).is_err());
        assert!(limit_1d(0.5).is_err());
    }

    #[test]
    fn delta_inf_continuous() {
        for l in 1..20 {
            let l = l as f64;
            let b = (l * (l + 1.0)).sqrt();
            let below = limit_1d(b).unwrap().0;
            let above = limit_1d(b + 1e-13).unwrap().0;
            assert!((below - above).abs() < 1e-12);
            // across the integer l + 1: z^2/(l+1) -> l+1
            let left = limit_1d(l + 1.0 - 1e-13).unwrap().0;
            let right = limit_1d(l + 1.0 + 1e-13).unwrap().0;
            assert!((left - right).abs() < 1e-11);
        }
    }

    #[test]
    fn limit_2d_values() {
        assert!((limit_2d(1.2).unwrap() - (4.0 - PI) / (4.0 * PI * PI)).abs() < 1e-15);
        assert!((limit_2d(1.2).unwrap() - 0.02174).abs() < 1e-5);
        assert!((limit_2d(1.5).unwrap() - 0.0118).abs() < 1e-4);
        // 3 is not a sum of two squares, so (2, 4) is one bracket
        let (d, t, _) = limit_2d_parts(3.0).unwrap();
        assert_eq!(t, 8.0);
        assert!((d - 2.25).abs() < 1e-15);
        assert!(limit_2d(5.0).is_err());
        assert!(limit_2d(2.0).is_err());
    }

    #[test]
    fn infimum_series_keeps_falling() {
        let s = limit_2d_infimum_series(200);
        let at = |z: u64| s.iter().rev().find(|e| e.0 <= z).unwrap().1;
        assert!(at(200) < at(50));
        assert!(at(50) < at(10));
    }

    #[test]
    fn finite_n_near_limit() {
        let v = scaled_deviation(1, 100, 1.2, &cfg()).unwrap();
        assert!(v.abs() < 0.02, "{v}");
        let v = scaled_deviation(1, 100, 1.9, &cfg()).unwrap();
        assert!((v - limit_1d(1.9).unwrap().2).abs() < 0.03, "{v}");
        assert!(scaled_deviation(3, 4, 1.5, &cfg()).is_err());
        assert!(scaled_deviation(1, 4, 1.0, &cfg()).is_err());
        assert!(scaled_deviation(1, 2000, 10.0, &cfg()).is_err());
    }

    #[test]
    fn convergence_in_n() {
        let zs: Vec<f64> = (0..90).map(|i| 1.05 + 0.1 * i as f64).collect();
        let sup = |n: u32| {
            zs.iter()
                .map(|&z| (scaled_deviation(1, n, z, &cfg()).unwrap() - limit_1d(z).unwrap().2).abs())
                .fold(0.0f64, f64::max)
        };
        let s: Vec<f64> = [10, 25, 50, 100].iter().map(|&n| sup(n)).collect();
        assert!(s.windows(2).all(|w| w[1] < w[0]), "{s:?}");
    }

    #[test]
    fn extrema_2d_sit_at_representables() {
        let zs: Vec<f64> = (0..=1796).map(|i| 1.01 + 0.005 * i as f64).collect();
        let vs: Vec<f64> = zs.iter().map(|&z| scaled_deviation(2, 100, z, &cfg()).unwrap()).collect();
        let (mins, maxs) = local_extrema(&zs, &vs, 1e-12);
        let near = |z: f64| [2.0, 4.0, 5.0, 8.0, 9.0, 10.0].into_iter().find(|r: &f64| (z - r).abs() < 0.35);
        assert!(mins.iter().chain(&maxs).all(|&z| near(z).is_some()), "{mins:?} {maxs:?}");
        let hits: Vec<f64> = mins.iter().map(|&z| near(z).unwrap()).collect();
        assert_eq!(hits, vec![2.0, 4.0, 5.0, 8.0, 9.0, 10.0]);
        // the n = 10 curve goes negative somewhere below z = 10
        assert!(zs.iter().any(|&z| scaled_deviation(2, 10, z, &cfg()).unwrap() < 0.0));
    }

    #[test]
    fn order_parse() {
        assert_eq!("inf".parse::<Order>().unwrap(), Order::Infinite);
        assert_eq!("25".parse::<Order>().unwrap(), Order::Finite(25));
        assert!("0".parse::<Order>().is_err());
    }
}
