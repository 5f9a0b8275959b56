//! The (d,n) triple
//! f = sum' 1/(1+mu m^n), g = sum' 1/(1+mu m^n)^2, h = sum' m^n/(1+mu m^n)^2.

use super::critical::CurvePoint;
use super::kummer::{Family, KummerCtx, Lambda};
use super::{CaseDN, Method, PrecisionConfig, SumTriple};
use crate::error::{domain, Error, Result};
use crate::specfun::SpecialValue;

fn families(case: CaseDN) -> (Family, Family, Family) {
    let n = case.n as f64;
    (
        Family { e0: n, beta: n, p: 1 },
        Family { e0: 2.0 * n, beta: n, p: 2 },
        Family { e0: n, beta: n, p: 2 },
    )
}

/// f, g, h at lambda = 1/mu = exp(ln_lambda) > 0, evaluated in log space so
/// that lambda may exceed the f64 range.
pub fn general_sums_ln(case: CaseDN, ln_lambda: f64) -> Result<SumTriple> {
    if !ln_lambda.is_finite() {
        return domain("ln(1/mu) must be finite");
    }
    let (fa, fb, fc) = families(case);
    let ctx = KummerCtx::new(case.d, fa.beta, Lambda::from_ln(ln_lambda, 1.0))?;
    Ok(SumTriple {
        mu: (-ln_lambda).exp(),
        f: ctx.sum(fa, ln_lambda, false)?,
        g: ctx.sum(fb, 2.0 * ln_lambda, false)?,
        h: ctx.sum(fc, 2.0 * ln_lambda, false)?,
        method: Method::Direct,
    })
}

/// (d,n) triple for mu > 0. mu = -1 is accepted as the endpoint flag: the
/// resonant m = 1 shell is dropped and the rest summed.
pub fn general_sums(case: CaseDN, mu: f64, cfg: &PrecisionConfig) -> Result<SumTriple> {
    cfg.validate()?;
    let case = CaseDN::new(case.d, case.n)?;
    let t = if mu == -1.0 {
        let (fa, fb, fc) = families(case);
        let ctx = KummerCtx::new(case.d, fa.beta, Lambda::new(-1.0))?;
        let a = ctx.sum(fa, 0.0, true)?;
        SumTriple {
            mu,
            f: SpecialValue::new(-a.value, a.abs_error_bound),
            g: ctx.sum(fb, 0.0, true)?,
            h: ctx.sum(fc, 0.0, true)?,
            method: Method::Direct,
        }
    } else if mu > 0.0 && mu.is_finite() {
        match general_sums_ln(case, -mu.ln()) {
            Err(Error::Resource(m)) => return Err(Error::ToleranceUnreachable(m)),
            r => r?,
        }
    } else {
        return domain(format!("general_sums needs mu > 0 (or the flag -1), got {mu}"));
    };
    cfg.check("f", &t.f)?;
    cfg.check("g", &t.g)?;
    cfg.check("h", &t.h)?;
    Ok(t)
}

/// Curve point of the (d,n) family at u = ln(1 + eps), eps = 1/mu > -1.
pub fn general_point(case: CaseDN, u: f64) -> Result<CurvePoint> {
    if !u.is_finite() {
        return domain("curve parameter must be finite");
    }
    let (fa, fb, fc) = families(case);
    let tpd = case.two_pi_d();
    let eps = u.exp_m1();
    let mu = 1.0 / eps;
    let shell = 2.0 * case.d as f64;
    if eps < 0.0 {
        let eta = u.exp();
        let ctx = KummerCtx::new(case.d, fa.beta, Lambda::new(eps))?;
        let a = ctx.sum(fa, 0.0, true)?;
        let b = ctx.sum(fb, 0.0, true)?;
        let c = ctx.sum(fc, 0.0, true)?;
        let num = eta * a.value + shell;
        let den = eta * eta * b.value + shell;
        let theta = num * num / (tpd * den);
        let dm1 = eta * eta * (c.value - b.value) / den;
        let theta_err = theta * (2.0 * eta * a.abs_error_bound / num + eta * eta * b.abs_error_bound / den) + 4e-16 * theta;
        let delta_err = eta * eta * (c.abs_error_bound + b.abs_error_bound) / den + 4e-16 * (1.0 + dm1);
        return Ok(CurvePoint { eps, mu, delta: 1.0 + dm1, delta_m1: dm1, theta, delta_err, theta_err });
    }
    // ln eps, stable for both small and huge eps
    let ln_eps = if u > 1.0 { u + (-(-u).exp_m1()).ln() } else { eps.ln() };
    let (sa, sb) = if eps > 1.0 { (ln_eps, 2.0 * ln_eps) } else { (0.0, 0.0) };
    let ctx = KummerCtx::new(case.d, fa.beta, if eps == 0.0 { Lambda::new(0.0) } else { Lambda::from_ln(ln_eps, 1.0) })?;
    let a = ctx.sum(fa, sa, false)?;
    let b = ctx.sum(fb, sb, false)?;
    let c = ctx.sum(fc, sb, false)?;
    let theta = a.value * a.value / (tpd * b.value);
    let theta_err = theta * (2.0 * a.abs_error_bound / a.value + b.abs_error_bound / b.value) + 4e-16 * theta;
    let delta = c.value / b.value;
    let dm1 = (c.value - b.value) / b.value;
    let delta_err = (c.abs_error_bound / c.value + b.abs_error_bound / b.value) * delta + 4e-16 * delta;
    Ok(CurvePoint { eps, mu, delta, delta_m1: dm1, theta, delta_err, theta_err })
}
