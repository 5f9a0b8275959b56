//! The 2D critical triple
//! f = sum' 1/(m(1+mu m)), g = sum' 1/(m(1+mu m)^2), h = sum' 1/(1+mu m)^2,
//! plus the Hardy sum, the finite-part constant beta and the mixed sum.

use super::kummer::{Family, KummerCtx, Lambda};
use super::shells::Shells;
use super::tail::{tail_bracket_with_count, TailDescriptor};
use super::{Method, PrecisionConfig, SumTriple};
use crate::error::{domain, Error, Result};
use crate::specfun::{dirichlet_beta_prime_at_1, k0, k1, ln_gamma, zeta_dirichlet, SpecialValue, EULER_GAMMA};
use serde::Serialize;
use std::f64::consts::{LN_2, PI};

const FA: Family = Family { e0: 2.0, beta: 1.0, p: 1 };
const FB: Family = Family { e0: 3.0, beta: 1.0, p: 2 };
const FC: Family = Family { e0: 2.0, beta: 1.0, p: 2 };

/// beta = pi (2 gamma + 2 ln 2 + 3 ln pi - 4 ln Gamma(1/4)).
pub fn beta_constant() -> SpecialValue {
    let v = PI * (2.0 * EULER_GAMMA + 2.0 * LN_2 + 3.0 * PI.ln() - 4.0 * ln_gamma(0.25));
    SpecialValue::new(v, 4e-15)
}

/// sum' |k|^{-2(1+eps)} = 4 zeta(1+eps) beta_D(1+eps).
pub fn hardy_sum(eps: f64) -> Result<SpecialValue> {
    if !(eps > 0.0) {
        return domain(format!("hardy_sum needs eps > 0, got {eps}"));
    }
    if eps < 1e-6 {
        // Laurent form: 4 (1/e + gamma)(pi/4 + e beta'(1)) + O(e)
        let bp = dirichlet_beta_prime_at_1().value;
        let v = PI / eps + PI * EULER_GAMMA + 4.0 * bp;
        return Ok(SpecialValue::new(v, 40.0 * eps + 1e-15 * v));
    }
    let (z, b) = zeta_dirichlet(1.0 + eps)?;
    let v = 4.0 * z.value * b.value;
    Ok(SpecialValue::new(v, 4.0 * (z.abs_error_bound * b.value + z.value * b.abs_error_bound) + 1e-15 * v))
}

fn direct_critical(mu: f64, cfg: &PrecisionConfig) -> Result<SumTriple> {
    let skip = mu == -1.0;
    let lam = 1.0 / mu;
    let ctx = KummerCtx::new(2, 1.0, Lambda::new(lam))?;
    if ctx.m0() > cfg.max_radius.saturating_mul(cfg.max_radius) {
        return Err(Error::ToleranceUnreachable(format!("mu = {mu:e} needs radius beyond max_radius")));
    }
    let (f, g, h) = if lam > 0.0 {
        let l = lam.ln();
        (ctx.sum(FA, l, skip)?, ctx.sum(FB, 2.0 * l, skip)?, ctx.sum(FC, 2.0 * l, skip)?)
    } else {
        let a = ctx.sum(FA, 0.0, skip)?;
        let b = ctx.sum(FB, 0.0, skip)?;
        let c = ctx.sum(FC, 0.0, skip)?;
        let l2 = lam * lam;
        (
            SpecialValue::new(lam * a.value, lam.abs() * a.abs_error_bound),
            SpecialValue::new(l2 * b.value, l2 * b.abs_error_bound),
            SpecialValue::new(l2 * c.value, l2 * c.abs_error_bound),
        )
    };
    Ok(SumTriple { mu, f, g, h, method: Method::Direct })
}

/// Bessel image sums S0 = sum' K0(c|k|), S1 = sum' |k| K1(c|k|) with errors.
fn image_sums(c: f64, cfg: &PrecisionConfig) -> Result<((f64, f64), (f64, f64))> {
    let x_stop = 50.0;
    let m = ((x_stop / c).powi(2)).ceil().max(2.0);
    if m > cfg.max_bessel_terms as f64 {
        return Err(Error::ToleranceUnreachable(format!(
            "accelerated sum needs {m:e} image shells, cap {}",
            cfg.max_bessel_terms
        )));
    }
    let m = m as u64;
    let sh = Shells::new(2, m)?;
    let (s0, a0) = sh.sum_range(0, m, |q| k0(c * (q as f64).sqrt()));
    let (s1, a1) = sh.sum_range(0, m, |q| {
        let r = (q as f64).sqrt();
        r * k1(c * r)
    });
    let inside = 1 + sh.total();
    let r = (m as f64).sqrt();
    let (l0, h0) = tail_bracket_with_count(2, r, &TailDescriptor::BesselK { order: 0, power: 0, c }, inside)?;
    let (l1, h1) = tail_bracket_with_count(2, r, &TailDescriptor::BesselK { order: 1, power: 1, c }, inside)?;
    Ok((
        (s0 + 0.5 * (l0 + h0), 0.5 * (h0 - l0) + 4e-16 * a0),
        (s1 + 0.5 * (l1 + h1), 0.5 * (h1 - l1) + 4e-16 * a1),
    ))
}

/// Poisson-transformed forms, mu > 0:
/// h = pi/mu - 1 + 2 pi^2 mu^{-3/2} sum' |k| K1(c|k|),
/// f = pi ln(1/mu) + beta + mu - 2 pi sum' K0(c|k|),  c = 2 pi / sqrt(mu),
/// g = f - mu h.
pub fn accelerated_critical(mu: f64, cfg: &PrecisionConfig) -> Result<SumTriple> {
    if !(mu > 0.0) {
        return domain(format!("accelerated sums need mu > 0, got {mu}"));
    }
    let c = 2.0 * PI / mu.sqrt();
    let ((s0, e0), (s1, e1)) = image_sums(c, cfg)?;
    let b = beta_constant();
    let lnm = -mu.ln();
    let eps = f64::EPSILON;
    let fv = PI * lnm + b.value + mu - 2.0 * PI * s0;
    let fe = 2.0 * PI * e0 + b.abs_error_bound + 4.0 * eps * (PI * lnm.abs() + b.value + mu + 2.0 * PI * s0);
    let k = 2.0 * PI * PI * mu.powf(-1.5);
    let hv = PI / mu - 1.0 + k * s1;
    let he = k * e1 + 4.0 * eps * (PI / mu + 1.0 + k * s1);
    let gv = fv - mu * hv;
    let ge = fe + mu * he + 2.0 * eps * (fv.abs() + mu * hv);
    Ok(SumTriple {
        mu,
        f: SpecialValue::new(fv, fe),
        g: SpecialValue::new(gv, ge),
        h: SpecialValue::new(hv, he),
        method: Method::Accelerated,
    })
}

/// Critical triple for mu in (-inf, -1] or (0, inf). At mu = -1 exactly the
/// resonant |k| = 1 shell is left out.
pub fn critical_sums(mu: f64, method: Method, cfg: &PrecisionConfig) -> Result<SumTriple> {
    cfg.validate()?;
    if !mu.is_finite() || mu == 0.0 || (mu > -1.0 && mu < 0.0) {
        return domain(format!("mu = {mu} outside (-inf,-1] U (0,inf)"));
    }
    let t = match method {
        Method::Direct => direct_critical(mu, cfg)?,
        Method::Accelerated => accelerated_critical(mu, cfg)?,
    };
    cfg.check("f", &t.f)?;
    cfg.check("g", &t.g)?;
    cfg.check("h", &t.h)?;
    Ok(t)
}

/// A point of the critical curve with propagated errors.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvePoint {
    /// eps = 1/mu
    pub eps: f64,
    pub mu: f64,
    pub delta: f64,
    /// delta - 1, kept separately for accuracy near the endpoint
    pub delta_m1: f64,
    pub theta: f64,
    pub delta_err: f64,
    pub theta_err: f64,
}

fn ratio_err(a: f64, ea: f64, b: f64, eb: f64) -> f64 {
    (ea / a.abs() + eb / b.abs()) * (a / b).abs()
}

/// Curve point at u = ln(1 + eps), eps = 1/mu in (-1, inf).
pub fn critical_point(u: f64) -> Result<CurvePoint> {
    if !u.is_finite() {
        return domain("curve parameter must be finite");
    }
    let eps = u.exp_m1();
    let mu = 1.0 / eps;
    let four_pi2 = 4.0 * PI * PI;
    if eps < 0.0 {
        let eta = u.exp();
        let ctx = KummerCtx::new(2, 1.0, Lambda::new(eps))?;
        let a = ctx.sum(FA, 0.0, true)?;
        let b = ctx.sum(FB, 0.0, true)?;
        let c = ctx.sum(FC, 0.0, true)?;
        let num = eta * a.value + 4.0;
        let den = eta * eta * b.value + 4.0;
        let theta = num * num / (four_pi2 * den);
        let dm1 = eta * eta * (c.value - b.value) / den;
        let theta_err = theta * (2.0 * eta * a.abs_error_bound / num + eta * eta * b.abs_error_bound / den) + 4e-16 * theta;
        let delta_err = eta * eta * (c.abs_error_bound + b.abs_error_bound) / den + 4e-16 * (1.0 + dm1);
        return Ok(CurvePoint { eps, mu, delta: 1.0 + dm1, delta_m1: dm1, theta, delta_err, theta_err });
    }
    let (fv, fe, gv, ge, hv, he) = if eps <= 1.0 {
        let ctx = KummerCtx::new(2, 1.0, Lambda::new(eps))?;
        let a = ctx.sum(FA, 0.0, false)?;
        let b = ctx.sum(FB, 0.0, false)?;
        let c = ctx.sum(FC, 0.0, false)?;
        (a.value, a.abs_error_bound, b.value, b.abs_error_bound, c.value, c.abs_error_bound)
    } else {
        let t = accelerated_critical(mu, &PrecisionConfig::default())?;
        (t.f.value, t.f.abs_error_bound, t.g.value, t.g.abs_error_bound, t.h.value, t.h.abs_error_bound)
    };
    let theta = fv * fv / (four_pi2 * gv);
    let theta_err = theta * (2.0 * fe / fv + ge / gv) + 4e-16 * theta;
    let delta = hv / gv;
    let dm1 = (hv - gv) / gv;
    let delta_err = ratio_err(hv, he, gv, ge) + 4e-16 * delta;
    Ok(CurvePoint { eps, mu, delta, delta_m1: dm1, theta, delta_err, theta_err })
}

/// sum' 1/(m^{1-eps} (1 + mu m)^2), mu > 0, eps in [0, 1).
pub fn mixed_sum(mu: f64, eps: f64) -> Result<SpecialValue> {
    if !(mu > 0.0) || !(0.0..1.0).contains(&eps) {
        return domain(format!("mixed_sum needs mu > 0 and eps in [0,1), got mu={mu}, eps={eps}"));
    }
    let lam = 1.0 / mu;
    let ctx = KummerCtx::new(2, 1.0, Lambda::new(lam))?;
    ctx.sum(Family { e0: 3.0 - eps, beta: 1.0, p: 2 }, 2.0 * lam.ln(), false)
}
