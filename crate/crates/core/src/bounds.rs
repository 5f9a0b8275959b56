//! Elementary upper bounds: the H^{1+eps} embedding constant, the A/B loss
//! comparison with its limit alpha, and the mode-splitting bound P(delta).

use crate::error::{domain, Error, Result};
use crate::lattice::{critical_sums, hardy_sum, lattice_zeta, mixed_sum, Method, PrecisionConfig};
use crate::optimize::{golden_min, grid_then_golden, KahanSum};
use crate::specfun::lambert_w0;
use serde::Serialize;
use std::f64::consts::PI;

/// C(eps) = sum' |k|^{-2(1+eps)} / (4 pi^2).
pub fn embedding_constant(eps: f64, _cfg: &PrecisionConfig) -> Result<f64> {
    Ok(hardy_sum(eps)?.value / (4.0 * PI * PI))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ElementaryComparison {
    pub mu: f64,
    /// f(mu)^2 = u_mu(0)^2
    pub a: f64,
    /// inf_eps C(eps) |(-Delta)^{(1+eps)/2} u_mu|^2
    pub b: f64,
    pub eps_argmin: f64,
}

/// A(mu) against B(mu). With u_k = 2 pi / (k^2 (1 + mu k^2)) the seminorm is
/// 4 pi^2 sum' |k|^{-2(1-eps)} (1 + mu k^2)^{-2}, so B = min_eps hardy(eps) * that sum.
pub fn elementary_comparison(mu: f64, cfg: &PrecisionConfig) -> Result<ElementaryComparison> {
    if !(mu > 0.0 && mu <= 0.5) {
        return domain(format!("elementary comparison needs mu in (0, 0.5], got {mu}"));
    }
    let f = if mu < 0.05 {
        critical_sums(mu, Method::Accelerated, cfg)?.f.value
    } else {
        critical_sums(mu, Method::Direct, cfg)?.f.value
    };
    let obj = |le: f64| -> f64 {
        let e = le.exp();
        match (hardy_sum(e), mixed_sum(mu, e)) {
            (Ok(h), Ok(m)) => (h.value * m.value).ln(),
            _ => f64::INFINITY,
        }
    };
    let (a, b) = (1e-4f64.ln(), 0.5f64.ln());
    let xs: Vec<f64> = (0..=48).map(|i| a + (b - a) * i as f64 / 48.0).collect();
    let (le, v) = grid_then_golden(&obj, &xs, 1e-8);
    if !v.is_finite() {
        return Err(Error::ToleranceUnreachable(format!("mixed sums failed at mu = {mu}")));
    }
    Ok(ElementaryComparison { mu, a: f * f, b: v.exp(), eps_argmin: le.exp() })
}

/// alpha = (e^g - 1)/g^2 at g = W(-2 e^{-2}) + 2.
pub fn alpha_constant() -> f64 {
    let g = lambert_w0(-2.0 * (-2.0f64).exp()) + 2.0;
    g.exp_m1() / (g * g)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModeSplit {
    pub delta: f64,
    pub p: f64,
    /// optimal cut radius; 0 means every mode sits in the high part
    pub n_min: f64,
}

/// P(delta) = (1/4 pi^2) min_N (sqrt(S_low(N)) + sqrt(delta S_high(N)))^2 over
/// shell radii N = sqrt(m), S_low = sum'_{|k|<=N} |k|^{-2},
/// S_high = sum_{|k|>N} |k|^{-4}.
pub fn mode_splitting_bound(delta: f64, _cfg: &PrecisionConfig) -> Result<ModeSplit> {
    if !(delta >= 1.0) || !delta.is_finite() {
        return domain(format!("delta must be a finite value >= 1, got {delta}"));
    }
    let z4 = lattice_zeta(2, 4.0)?.value;
    let mut cap = (4.0 * delta * (delta.ln() + 2.0)).ceil().max(64.0) as u64;
    loop {
        if cap > 4_000_000_000 {
            return Err(Error::Resource(format!("mode splitting cap {cap} exceeded for delta = {delta}")));
        }
        let (val, m_best) = scan_cuts(delta, z4, cap);
        if m_best <= cap / 2 {
            return Ok(ModeSplit { delta, p: val / (4.0 * PI * PI), n_min: (m_best as f64).sqrt() });
        }
        cap *= 2;
    }
}

/// Walk m = 0..=cap in blocks, accumulating r2(m)/m and r2(m)/m^2.
fn scan_cuts(delta: f64, z4: f64, cap: u64) -> (f64, u64) {
    let sd = delta.sqrt();
    let mut best = (delta * z4, 0u64); // N < 1
    let mut low = KahanSum::new();
    let mut high_in = KahanSum::new();
    const BLOCK: u64 = 1 << 20;
    let mut counts = vec![0u32; BLOCK as usize];
    let mut lo = 1u64;
    while lo <= cap {
        let hi = (lo + BLOCK - 1).min(cap);
        counts.iter_mut().for_each(|c| *c = 0);
        // first quadrant a >= 1, b >= 0 with weight 4 covers Z^2 \ {0}
        let amax = (hi as f64).sqrt() as u64 + 1;
        for a in 1..=amax {
            let a2 = a * a;
            if a2 > hi {
                break;
            }
            let bmin = if a2 >= lo { 0 } else { ((lo - a2) as f64).sqrt() as u64 };
            let mut b = bmin.saturating_sub(1);
            loop {
                let m = a2 + b * b;
                if m > hi {
                    break;
                }
                if m >= lo {
                    counts[(m - lo) as usize] += 4;
                }
                b += 1;
            }
        }
        for m in lo..=hi {
            let c = counts[(m - lo) as usize];
            if c == 0 {
                continue;
            }
            let mf = m as f64;
            low.add(c as f64 / mf);
            high_in.add(c as f64 / (mf * mf));
            let sh = (z4 - high_in.value()).max(0.0);
            let v = (low.value().sqrt() + sd * sh.sqrt()).powi(2);
            if v < best.0 {
                best = (v, m);
            }
        }
        lo = hi + 1;
    }
    best
}

/// min over eps of C(eps) delta^eps (interpolating H^{1+eps} between H^1 and H^2).
pub fn first_method_bound(delta: f64, cfg: &PrecisionConfig) -> Result<f64> {
    if !(delta > 1.0) {
        return domain(format!("first method bound needs delta > 1, got {delta}"));
    }
    let ld = delta.ln();
    let obj = |le: f64| {
        let e = le.exp();
        embedding_constant(e, cfg).map(|c| c.ln() + e * ld).unwrap_or(f64::INFINITY)
    };
    let (a, b) = (1e-9f64.ln(), 2f64.ln());
    let xs: Vec<f64> = (0..=120).map(|i| a + (b - a) * i as f64 / 120.0).collect();
    let (x0, _) = grid_then_golden(&obj, &xs, 1e-10);
    let (_, v) = golden_min(obj, x0 - 0.2, x0 + 0.2, 1e-12);
    Ok(v.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{theta_model, ThetaModel};
    use crate::lattice::beta_constant;

    fn cfg() -> PrecisionConfig {
        PrecisionConfig::default()
    }

    #[test]
    fn embedding_values() {
        let c = cfg();
        assert!((embedding_constant(1.0, &c).unwrap() - 0.15266).abs() < 1e-5);
        let v = embedding_constant(0.01, &c).unwrap();
        assert!((v - 1.0 / (4.0 * PI * 0.01)).abs() < 3.0);
        assert!(embedding_constant(0.5, &c).unwrap() > embedding_constant(0.6, &c).unwrap());
        assert!(embedding_constant(0.0, &c).is_err());
    }

    #[test]
    fn alpha_value_and_scan() {
        let a = alpha_constant();
        assert!((a - 1.544).abs() < 1e-3);
        let (_, m) = golden_min(|g| g.exp_m1() / (g * g), 0.1, 5.0, 1e-12);
        assert!((a - m).abs() < 1e-12);
    }

    #[test]
    fn comparison_b_above_a() {
        let c = cfg();
        for mu in [0.3, 0.05, 1e-3] {
            let e = elementary_comparison(mu, &c).unwrap();
            assert!(e.b >= e.a, "mu={mu}");
        }
        let e = elementary_comparison(1e-4, &c).unwrap();
        let r = e.a / (PI * PI * (1e4f64).ln().powi(2));
        assert!((0.8..=1.2).contains(&r));
    }

    #[test]
    fn mode_split_small_cases() {
        let c = cfg();
        let p = mode_splitting_bound(1.0, &c).unwrap();
        // at delta = 1 the single split is never worse than Theta
        assert!(p.p >= 1.0 / (PI * PI));
        for d in [2.0, 4.0, 10.0, 100.0] {
            let p = mode_splitting_bound(d, &c).unwrap().p;
            let t = theta_model(ThetaModel::Exact, d, &c).unwrap().theta;
            assert!(p >= t, "delta={d}");
        }
    }

    #[test]
    fn first_method_loses_factor_e() {
        let d: f64 = 1e6;
        let v = first_method_bound(d, &cfg()).unwrap();
        let r = v / (d.ln() / (4.0 * PI));
        assert!((r / std::f64::consts::E - 1.0).abs() < 0.1, "{r}");
        let _ = beta_constant();
    }
}
