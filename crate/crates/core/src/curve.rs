//! The critical 2D extremal curve delta -> Theta(delta), its closed-form
//! approximants, the tangent-sign check and the double-log constant L.

use crate::error::{domain, Error, Result};
use crate::lattice::{beta_constant, critical_point, CaseDN, CurvePoint, PrecisionConfig};
use crate::optimize::{brent_root, golden_min};
use rayon::prelude::*;
use serde::Serialize;
use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaModel {
    Exact,
    Theta0,
    ExpCorrected,
    LoglogAsymptotic,
}

impl std::str::FromStr for ThetaModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ThetaModel::Exact),
            "theta0" => Ok(ThetaModel::Theta0),
            "exp" | "exp_corrected" => Ok(ThetaModel::ExpCorrected),
            "loglog" | "loglog_asymptotic" => Ok(ThetaModel::LoglogAsymptotic),
            _ => Err(Error::Domain(format!("unknown model '{s}'"))),
        }
    }
}

/// One (mu, delta, Theta) point. `case` is None on the critical 2D curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThetaSample {
    pub mu: f64,
    pub delta: f64,
    pub theta: f64,
    pub model: ThetaModel,
    pub case: Option<CaseDN>,
    pub delta_err: f64,
    pub theta_err: f64,
}

impl ThetaSample {
    pub(crate) fn from_point(p: &CurvePoint, model: ThetaModel, case: Option<CaseDN>) -> Self {
        ThetaSample {
            mu: p.mu,
            delta: p.delta,
            theta: p.theta,
            model,
            case,
            delta_err: p.delta_err,
            theta_err: p.theta_err,
        }
    }
}

/// ln(1 + 1/mu) for mu in (-inf, -1) U (0, inf).
fn u_of_mu(mu: f64) -> Result<f64> {
    if mu > 0.0 && mu.is_finite() {
        Ok(if mu < 1e-300 { -mu.ln() } else { (1.0 / mu).ln_1p() })
    } else if mu < -1.0 {
        Ok((1.0 / mu).ln_1p())
    } else {
        domain(format!("mu = {mu} outside (-inf,-1] U (0,inf)"))
    }
}

fn endpoint_sample() -> ThetaSample {
    ThetaSample {
        mu: -1.0,
        delta: 1.0,
        theta: 1.0 / (PI * PI),
        model: ThetaModel::Exact,
        case: None,
        delta_err: 0.0,
        theta_err: 1e-17,
    }
}

/// Exact curve point at mu. mu = -1 is the degenerate endpoint: only the
/// four |k| = 1 modes survive, delta = 1, Theta = 16/(4 pi^2 4) = 1/pi^2.
pub fn theta_point(mu: f64, cfg: &PrecisionConfig) -> Result<ThetaSample> {
    cfg.validate()?;
    if mu == -1.0 {
        return Ok(endpoint_sample());
    }
    let p = critical_point(u_of_mu(mu)?)?;
    check_point(&p, cfg)?;
    let mut s = ThetaSample::from_point(&p, ThetaModel::Exact, None);
    s.mu = mu;
    Ok(s)
}

fn check_point(p: &CurvePoint, cfg: &PrecisionConfig) -> Result<()> {
    if p.theta_err > cfg.tol_for(p.theta) || p.delta_err > cfg.tol_for(p.delta) {
        return Err(Error::ToleranceUnreachable(format!(
            "curve point eps={:e}: errors ({:e}, {:e})",
            p.eps, p.delta_err, p.theta_err
        )));
    }
    Ok(())
}

/// Solve delta(u) = delta for a monotone family of curve points, working on
/// ln(delta - 1) so the endpoint region stays well conditioned.
pub(crate) fn solve_delta(
    point: &dyn Fn(f64) -> Result<CurvePoint>,
    delta: f64,
    root_tol: f64,
) -> Result<CurvePoint> {
    if !(delta > 1.0) || !delta.is_finite() {
        return domain(format!("delta must be > 1 here, got {delta}"));
    }
    let target = (delta - 1.0).ln();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let eval = |u: f64| -> f64 {
        match point(u) {
            Ok(p) => p.delta_m1.ln() - target,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut flo = eval(lo);
    let mut fhi = eval(hi);
    let mut steps = 0;
    while flo > 0.0 && steps < 400 {
        hi = lo;
        fhi = flo;
        lo -= 2.0;
        flo = eval(lo);
        steps += 1;
    }
    while fhi < 0.0 && steps < 400 {
        lo = hi;
        flo = fhi;
        hi += 2.0;
        fhi = eval(hi);
        steps += 1;
    }
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    if !(flo <= 0.0 && fhi >= 0.0) {
        return Err(Error::NoConvergence(format!("could not bracket delta = {delta}")));
    }
    let u = brent_root(&eval, lo, hi, 1e-3 * root_tol, 300)?;
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let p = point(u)?;
    if (p.delta - delta).abs() > root_tol * delta + 2.0 * f64::EPSILON * delta {
        return Err(Error::NoConvergence(format!(
            "delta residual {:e} at delta = {delta}",
            (p.delta - delta).abs()
        )));
    }
    Ok(p)
}

/// The exact curve point with delta(mu) = delta, solved in u = ln(1 + 1/mu).
pub fn exact_point_at(delta: f64, cfg: &PrecisionConfig) -> Result<ThetaSample> {
    cfg.validate()?;
    if delta == 1.0 {
        return Ok(endpoint_sample());
    }
    if !(delta > 1.0) {
        return domain(format!("delta must be >= 1, got {delta}"));
    }
    let p = solve_delta(&critical_point, delta, cfg.root_tol)?;
    Ok(ThetaSample::from_point(&p, ThetaModel::Exact, None))
}

/// mu solving delta(mu) = delta; delta = 1 gives the endpoint mu = -1.
pub fn mu_of_delta(delta: f64, cfg: &PrecisionConfig) -> Result<f64> {
    Ok(exact_point_at(delta, cfg)?.mu)
}

/// (f, g, h) of the closed-form approximant at mu > 0; `exp` adds the
/// leading exponentially small corrections.
fn approx_fgh(mu: f64, exp: bool) -> (f64, f64, f64) {
    let b = beta_constant().value;
    let l = -mu.ln();
    let mut f = PI * l + b + mu;
    let mut g = PI * l + b - PI + 2.0 * mu;
    let mut h = PI / mu - 1.0;
    if exp {
        let e = (-2.0 * PI / mu.sqrt()).exp();
        f -= 4.0 * PI * mu.powf(0.25) * e;
        g -= 4.0 * PI * PI * mu.powf(-0.25) * e;
        h += 4.0 * PI * PI * mu.powf(-1.25) * e;
    }
    (f, g, h)
}

/// Approximant point (delta, Theta) at mu > 0.
pub fn approx_point(mu: f64, exp: bool) -> (f64, f64) {
    let (f, g, h) = approx_fgh(mu, exp);
    (h / g, f * f / (4.0 * PI * PI * g))
}

const APPROX_MU_MIN: f64 = 1e-280;
const APPROX_MU_MAX: f64 = 1.5;

/// Verified monotone range of the approximant delta maps, as
/// (delta at mu_max, delta at mu_min), checked once on a dense log grid.
fn approx_range(exp: bool) -> Result<(f64, f64)> {
    static RANGES: OnceLock<[std::result::Result<(f64, f64), String>; 2]> = OnceLock::new();
    let r = RANGES.get_or_init(|| {
        let check = |exp: bool| {
            let n = 20_000;
            let (a, b) = (APPROX_MU_MIN.ln(), APPROX_MU_MAX.ln());
            let mut prev = f64::INFINITY;
            for i in 0..=n {
                let mu = (a + (b - a) * i as f64 / n as f64).exp();
                let d = approx_point(mu, exp).0;
                if !(d < prev) {
                    return Err(format!("approximant delta map not monotone near mu = {mu:e}"));
                }
                prev = d;
            }
            Ok((approx_point(APPROX_MU_MAX, exp).0, approx_point(APPROX_MU_MIN, exp).0))
        };
        [check(false), check(true)]
    });
    r[exp as usize].clone().map_err(Error::NoConvergence)
}

fn approx_sample(delta: f64, exp: bool, cfg: &PrecisionConfig) -> Result<ThetaSample> {
    let (dlo, dhi) = approx_range(exp)?;
    if !(delta >= dlo && delta <= dhi) {
        return domain(format!("delta = {delta} outside the verified approximant range [{dlo}, {dhi:e}]"));
    }
    let lm = brent_root(
        |lm| approx_point(lm.exp(), exp).0.ln() - delta.ln(),
        APPROX_MU_MIN.ln(),
        APPROX_MU_MAX.ln(),
        1e-3 * cfg.root_tol,
        300,
    )?;
    let mu = lm.exp();
    let (d, t) = approx_point(mu, exp);
    Ok(ThetaSample {
        mu,
        delta: d,
        theta: t,
        model: if exp { ThetaModel::ExpCorrected } else { ThetaModel::Theta0 },
        case: None,
        delta_err: 8.0 * f64::EPSILON * d,
        theta_err: 8.0 * f64::EPSILON * t,
    })
}

/// (1/4 pi)(ln d + ln ln d + (beta+pi)/pi + ln ln d / ln d), d > 1.
pub fn loglog_asymptotic(delta: f64) -> Result<f64> {
    if !(delta > 1.0) {
        return domain(format!("loglog model needs delta > 1, got {delta}"));
    }
    let l = delta.ln();
    let ll = l.ln();
    let b = beta_constant().value;
    Ok((l + ll + (b + PI) / PI + ll / l) / (4.0 * PI))
}

/// Theta(delta) under the chosen model.
pub fn theta_model(model: ThetaModel, delta: f64, cfg: &PrecisionConfig) -> Result<ThetaSample> {
    if !(delta >= 1.0) || !delta.is_finite() {
        return domain(format!("delta must be a finite value >= 1, got {delta}"));
    }
    match model {
        ThetaModel::Exact => exact_point_at(delta, cfg),
        ThetaModel::Theta0 => approx_sample(delta, false, cfg),
        ThetaModel::ExpCorrected => approx_sample(delta, true, cfg),
        ThetaModel::LoglogAsymptotic => Ok(ThetaSample {
            mu: f64::NAN,
            delta,
            theta: loglog_asymptotic(delta)?,
            model,
            case: None,
            delta_err: 0.0,
            theta_err: 8.0 * f64::EPSILON,
        }),
    }
}

/// d_mu Theta * d_eps delta - d_eps Theta * d_mu delta at eps = 0 for the
/// exponentially corrected family, in closed form (L = ln(1/mu)).
pub fn tangent_condition(mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return domain(format!("tangent condition needs mu in (0,1), got {mu}"));
    }
    let b = beta_constant().value;
    let l = -mu.ln();
    let num = (PI * l + b + mu) * (PI * PI * l + PI * b - 2.0 * PI * PI + 5.0 * PI * mu - 2.0 * mu * mu);
    let den = 2.0 * PI * PI * mu.powf(1.5) * (PI * l + b - PI + 2.0 * mu).powi(3);
    Ok(-num / den)
}

/// Theta_0(delta) - Theta(delta) with its error bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Gap {
    pub delta: f64,
    pub gap: f64,
    pub err: f64,
}

pub fn gap(delta: f64, cfg: &PrecisionConfig) -> Result<Gap> {
    let t0 = theta_model(ThetaModel::Theta0, delta, cfg)?;
    let t = theta_model(ThetaModel::Exact, delta, cfg)?;
    // residual in delta feeds through dTheta/ddelta <= 1/(4 pi) / delta-ish; bound generously
    let slope = 1.0 / delta;
    let err = t0.theta_err + t.theta_err + slope * (t.delta_err + cfg.root_tol * delta);
    Ok(Gap { delta, gap: t0.theta - t.theta, err })
}

#[derive(Debug, Clone, Serialize)]
pub struct LConstantReport {
    #[serde(rename = "L")]
    pub l: f64,
    pub delta_star: f64,
    pub mu_star: f64,
    /// (beta + pi)/pi
    pub lower_bound: f64,
    /// max of the objective found on [100, 1e6]
    pub tail_max: f64,
    pub samples: Vec<ThetaSample>,
}

fn l_objective(p: &CurvePoint) -> f64 {
    let ld = p.delta.ln();
    4.0 * PI * p.theta - ld - ld.ln_1p()
}

/// Maximize 4 pi Theta(delta) - ln delta - ln(1 + ln delta) over delta >= 1.
pub fn find_l(cfg: &PrecisionConfig) -> Result<LConstantReport> {
    cfg.validate()?;
    let n = 1000;
    let grid: Vec<f64> = (0..n).map(|i| 1.0 + 99.0 * i as f64 / (n - 1) as f64).collect();
    let samples: Vec<ThetaSample> = grid
        .par_iter()
        .map(|&d| exact_point_at(d, cfg))
        .collect::<Result<Vec<_>>>()?;
    let obj = |s: &ThetaSample| {
        let ld = s.delta.ln();
        4.0 * PI * s.theta - ld - ld.ln_1p()
    };
    let vals: Vec<f64> = samples.iter().map(obj).collect();
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..n {
        let is_local = (i == 0 || vals[i] >= vals[i - 1]) && (i == n - 1 || vals[i] >= vals[i + 1]);
        if !is_local {
            continue;
        }
        // refine in u between the neighbouring grid nodes
        let ua = if i == 0 { -40.0 } else { (1.0 / samples[i - 1].mu).ln_1p() };
        let ub = (1.0 / samples[(i + 1).min(n - 1)].mu).ln_1p();
        let neg = |u: f64| critical_point(u).map(|p| -l_objective(&p)).unwrap_or(f64::INFINITY);
        let (u, v) = golden_min(neg, ua, ub, cfg.maximizer_tol);
        if -v > best.0 {
            let p = critical_point(u)?;
            best = (-v, p.delta, p.mu);
        }
    }
    // tail: delta in [100, 1e6] on a log grid must stay clearly below the max
    let tail: Vec<f64> = (0..=200)
        .into_par_iter()
        .map(|i| {
            let d = 100.0 * 10f64.powf(4.0 * i as f64 / 200.0);
            exact_point_at(d, cfg).map(|s| obj(&s))
        })
        .collect::<Result<Vec<_>>>()?;
    let tail_max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if tail_max >= best.0 {
        return Err(Error::InconclusiveTail(format!("objective reaches {tail_max} beyond delta = 100")));
    }
    let b = beta_constant().value;
    Ok(LConstantReport {
        l: best.0,
        delta_star: best.1,
        mu_star: best.2,
        lower_bound: (b + PI) / PI,
        tail_max,
        samples,
    })
}
