//! Fields on the flat torus [-pi, pi)^d.
//!
//! Conventions. Input coefficients follow u(x) = (2 pi)^{-d/2} sum' u_k e^{ik.x},
//! so L2 norms are plain coefficient sums: |u|^2 = sum'|u_k|^2,
//! |grad u|^2 = sum' k^2 |u_k|^2, |Lap u|^2 = sum' k^4 |u_k|^2.
//! The conditional extremal is synthesised without a prefactor,
//! u_mu(x) = sum' e^{ik.x} / (k^2 (1 + mu k^2)), i.e. u_k = 2 pi / (k^2 (1 + mu k^2))
//! in the input convention, so u_mu(0) = f, |grad u_mu|^2 = 4 pi^2 g and
//! |Lap u_mu|^2 = 4 pi^2 h.
//!
//! Pointwise values avoid the slowly convergent series. With a > 0 and
//! R_a(k) = 6a^3 / (k^2 (k^2+a)(k^2+2a)(k^2+3a)),
//!   1/k^2 = R_a(k) + 3/(k^2+a) - 3/(k^2+2a) + 1/(k^2+3a),
//! and sum_k e^{ik.x}/(k^2+b) = 2 pi sum_j K0(sqrt(b) |x + 2 pi j|).
//! R_a decays like k^-8, so its Fourier sum converges fast; the screened
//! parts are exponentially convergent image sums.

use crate::algebraic::{leading_constant, remainder_constant};
use crate::curve::{find_l, theta_model, ThetaModel};
use crate::error::{domain, Error, Result};
use crate::lattice::{
    critical_sums, tail_bracket, CaseDN, Family, KummerCtx, Lambda, Method, PrecisionConfig, TailDescriptor,
};
use crate::specfun::{k0, SpecialValue, EULER_GAMMA};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{LN_2, PI};
use std::io::Write;
use std::sync::{Mutex, OnceLock};

const TWO_PI: f64 = 2.0 * PI;
/// K0 cutoff argument for image sums; K0(50) ~ 3.4e-23.
const IMAGE_CUT: f64 = 50.0;

fn smooth_coeff(k2: f64, a: f64) -> f64 {
    6.0 * a * a * a / (k2 * (k2 + a) * (k2 + 2.0 * a) * (k2 + 3.0 * a))
}

/// Smallest radius K (power of two times 16) whose R_a tail is below tol.
fn smooth_radius(a: f64, tol: f64, cfg: &PrecisionConfig) -> Result<(u64, f64)> {
    // R_a(r) <= 6a^3 / r^8, a decreasing majorant
    let desc = TailDescriptor::Power { s: 8.0, r0: (6.0 * a * a * a).powf(0.125) };
    let mut k = 16u64;
    loop {
        let (_, hi) = tail_bracket(2, k as f64, &desc)?;
        if hi <= tol {
            return Ok((k, hi));
        }
        k *= 2;
        if k > cfg.max_radius {
            return Err(Error::ToleranceUnreachable(format!(
                "smooth part needs radius > {} for tolerance {tol:e}",
                cfg.max_radius
            )));
        }
    }
}

/// 2 pi sum_i coef_i sum_j K0(sqrt(i a) |x + 2 pi j|), i = 1..3. The j = 0 term at
/// x = 0 is replaced by its limit, valid when the coefficients sum to zero.
fn image_sum(x: f64, y: f64, a: f64, coef: [f64; 3]) -> f64 {
    let rho = IMAGE_CUT / a.sqrt();
    let m = ((rho + PI * 2f64.sqrt()) / TWO_PI).ceil() as i64;
    let s = [a.sqrt(), (2.0 * a).sqrt(), (3.0 * a).sqrt()];
    let mut acc = 0.0;
    for j1 in -m..=m {
        let px = x + TWO_PI * j1 as f64;
        for j2 in -m..=m {
            let py = y + TWO_PI * j2 as f64;
            let r = px.hypot(py);
            if r > rho {
                continue;
            }
            if r == 0.0 {
                // sum c_i (-ln(s_i / 2) - gamma) with sum c_i = 0
                acc -= (0..3).map(|i| coef[i] * s[i].ln()).sum::<f64>();
                continue;
            }
            acc += (0..3).map(|i| coef[i] * k0(s[i] * r)).sum::<f64>();
        }
    }
    TWO_PI * acc
}

/// Bound on the discarded images (each neglected K0 term is below K0(50)).
fn image_err(a: f64) -> f64 {
    let rho = IMAGE_CUT / a.sqrt();
    let n = (rho / PI + 4.0).powi(2);
    1e-21 * n + 1e-15
}

/// sum'_{|k| <= kmax} R_a(k) cos(k.x)
fn smooth_point(x: f64, y: f64, a: f64, kmax: u64) -> f64 {
    let km = kmax as i64;
    let r2 = (kmax * kmax) as i64;
    (-km..=km)
        .into_par_iter()
        .map(|k1| {
            let mut s = 0.0;
            let mut c = 0.0;
            let rest = r2 - k1 * k1;
            let b = (rest as f64).sqrt() as i64;
            for k2 in -b..=b {
                let q = k1 * k1 + k2 * k2;
                if q == 0 || q > r2 {
                    continue;
                }
                let t = smooth_coeff(q as f64, a) * (k1 as f64 * x + k2 as f64 * y).cos() - c;
                let u = s + t;
                c = (u - s) - t;
                s = u;
            }
            s
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

fn reduce(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(TWO_PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// G0(x) = sum' e^{ik.x}/k^2 through the split with a = 1/mu.
pub fn g0_value_at(x: [f64; 2], mu: f64, cfg: &PrecisionConfig) -> Result<SpecialValue> {
    if !(mu > 0.0) || !mu.is_finite() {
        return domain(format!("internal mu must be positive, got {mu}"));
    }
    let (px, py) = (reduce(x[0]), reduce(x[1]));
    if px.hypot(py) < 1e-300 {
        return domain("G0 is singular at x = 0");
    }
    let a = 1.0 / mu;
    let (km, tail) = smooth_radius(a, 0.1 * cfg.target_abs_tol, cfg)?;
    let v = smooth_point(px, py, a, km) + image_sum(px, py, a, [3.0, -3.0, 1.0]) - 11.0 / (6.0 * a);
    Ok(SpecialValue::new(v, tail + image_err(a) + 1e-15 * v.abs()))
}

/// G0 at internal mu = 1.
pub fn g0_value(x: [f64; 2], cfg: &PrecisionConfig) -> Result<f64> {
    g0_value_at(x, 1.0, cfg).map(|v| v.value)
}

/// u_mu(x) = sum' e^{ik.x}/(k^2 (1 + mu k^2)) at one point.
pub fn extremal_value(mu: f64, x: [f64; 2], cfg: &PrecisionConfig) -> Result<SpecialValue> {
    if !(mu > 0.0) || !mu.is_finite() {
        return domain(format!("mu must be positive, got {mu}"));
    }
    let (px, py) = (reduce(x[0]), reduce(x[1]));
    let lam = 1.0 / mu;
    let (km, tail) = smooth_radius(lam, 0.1 * cfg.target_abs_tol, cfg)?;
    let v = smooth_point(px, py, lam, km) + image_sum(px, py, lam, [2.0, -3.0, 1.0]) - 5.0 / (6.0 * lam);
    Ok(SpecialValue::new(v, tail + image_err(lam) + 1e-15 * v.abs()))
}

/// Sampled extremal on the resolution x resolution grid x_p = -pi + 2 pi p / N.
#[derive(Debug, Clone, Serialize)]
pub struct FieldGrid {
    pub resolution: usize,
    /// row-major, values[p * N + q] = u(x_p, x_q)
    pub values: Vec<f64>,
    pub mu: f64,
    pub sup_value: f64,
    pub grad_norm_sq: f64,
    pub lap_norm_sq: f64,
    pub l2_norm_sq: f64,
    /// bound on the pointwise synthesis error
    pub value_err: f64,
}

impl FieldGrid {
    pub fn coord(&self, p: usize) -> f64 {
        grid_coord(p, self.resolution)
    }

    pub fn at(&self, p: usize, q: usize) -> f64 {
        self.values[p * self.resolution + q]
    }

    /// CSV `x,y,value`, row-major, shortest round-trip decimals.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "x,y,value")?;
        let n = self.resolution;
        for p in 0..n {
            for q in 0..n {
                writeln!(w, "{},{},{}", self.coord(p), self.coord(q), self.at(p, q))?;
            }
        }
        Ok(())
    }
}

fn grid_coord(p: usize, n: usize) -> f64 {
    -PI + TWO_PI * p as f64 / n as f64
}

/// In-place 2D inverse DFT (unnormalised, e^{+i}) of an nx x ny row-major array.
fn ifft2(data: &mut [Complex64], nx: usize, ny: usize) {
    let mut planner = FftPlanner::<f64>::new();
    if ny > 1 {
        let f = planner.plan_fft_inverse(ny);
        data.par_chunks_mut(ny).for_each(|row| f.process(row));
    }
    if nx > 1 {
        let f = planner.plan_fft_inverse(nx);
        let mut cols: Vec<Vec<Complex64>> =
            (0..ny).into_par_iter().map(|q| (0..nx).map(|p| data[p * ny + q]).collect()).collect();
        cols.par_iter_mut().for_each(|c| f.process(c));
        for (q, c) in cols.iter().enumerate() {
            for p in 0..nx {
                data[p * ny + q] = c[p];
            }
        }
    }
}

/// Folds coefficients c_k onto an nx x ny grid of x_p = -pi + 2 pi p / n and
/// returns sum_k c_k e^{ik.x} at every node.
fn synthesize(coeffs: impl Iterator<Item = ((i64, i64), Complex64)>, nx: usize, ny: usize) -> Vec<Complex64> {
    let mut bins = vec![Complex64::new(0.0, 0.0); nx * ny];
    for ((k1, k2), c) in coeffs {
        // e^{ik.(-pi,-pi)} = (-1)^{k1+k2}
        let c = if (k1 + k2).rem_euclid(2) == 1 { -c } else { c };
        let b1 = k1.rem_euclid(nx as i64) as usize;
        let b2 = k2.rem_euclid(ny as i64) as usize;
        bins[b1 * ny + b2] += c;
    }
    ifft2(&mut bins, nx, ny);
    bins
}

/// Triple (l2, grad, lap) of L2 norms squared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    pub l2: f64,
    pub grad: f64,
    pub lap: f64,
}

/// Certified norms of u_mu: 4 pi^2 times the lattice sums.
pub fn extremal_norms(mu: f64, cfg: &PrecisionConfig) -> Result<(Norms, f64)> {
    let t = critical_sums(mu, if mu < 0.05 { Method::Accelerated } else { Method::Direct }, cfg)?;
    let lam = 1.0 / mu;
    let ctx = KummerCtx::new(2, 1.0, Lambda::new(lam))?;
    // 1/(m^2 (1 + mu m)^2) = lam^2 m^-4 (1 + lam/m)^-2
    let l2 = ctx.sum(Family { e0: 4.0, beta: 1.0, p: 2 }, 2.0 * lam.ln(), false)?;
    cfg.check("l2 sum", &l2)?;
    let s = 4.0 * PI * PI;
    Ok((Norms { l2: s * l2.value, grad: s * t.g.value, lap: s * t.h.value }, t.f.value))
}

/// Spectral norms of u_mu truncated to |k| <= radius, with brackets on the
/// discarded parts of grad and lap.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TruncatedNorms {
    pub radius: u64,
    pub grad: f64,
    pub lap: f64,
    pub grad_tail: (f64, f64),
    pub lap_tail: (f64, f64),
}

impl TruncatedNorms {
    /// lap/grad with both tails taken at their midpoints.
    pub fn corrected_ratio(&self) -> f64 {
        let g = self.grad + 0.5 * (self.grad_tail.0 + self.grad_tail.1);
        let h = self.lap + 0.5 * (self.lap_tail.0 + self.lap_tail.1);
        h / g
    }
}

pub fn truncated_extremal_norms(mu: f64, radius: u64) -> Result<TruncatedNorms> {
    if !(mu > 0.0) || radius < 2 {
        return domain("need mu > 0 and radius >= 2");
    }
    let s = 4.0 * PI * PI;
    let r2 = radius * radius;
    let (mut g, mut h) = (0.0, 0.0);
    // sum by shells from the outside in for accuracy
    let mut shells: BTreeMap<u64, u64> = BTreeMap::new();
    let ri = radius as i64;
    for k1 in -ri..=ri {
        for k2 in -ri..=ri {
            let q = (k1 * k1 + k2 * k2) as u64;
            if q != 0 && q <= r2 {
                *shells.entry(q).or_default() += 1;
            }
        }
    }
    for (&q, &c) in shells.iter().rev() {
        let m = q as f64;
        let w = 1.0 / (1.0 + mu * m).powi(2);
        g += c as f64 * w / m;
        h += c as f64 * w;
    }
    let gd = TailDescriptor::Rational { a: 2.0, b: 2.0, p: 2.0, mu };
    let hd = TailDescriptor::Rational { a: 0.0, b: 2.0, p: 2.0, mu };
    let gt = tail_bracket(2, radius as f64, &gd)?;
    let ht = tail_bracket(2, radius as f64, &hd)?;
    Ok(TruncatedNorms {
        radius,
        grad: s * g,
        lap: s * h,
        grad_tail: (s * gt.0, s * gt.1),
        lap_tail: (s * ht.0, s * ht.1),
    })
}

/// Sample u_mu on the grid. Values: FFT of the folded smooth part plus image
/// sums evaluated once per symmetry class; norms from certified lattice sums.
pub fn extremal_field(mu: f64, resolution: usize, cfg: &PrecisionConfig) -> Result<FieldGrid> {
    cfg.validate()?;
    if !(mu > 0.0) || !mu.is_finite() {
        return domain(format!("mu must be positive, got {mu}"));
    }
    if resolution < 32 {
        return domain(format!("resolution must be >= 32, got {resolution}"));
    }
    let n = resolution;
    let lam = 1.0 / mu;
    let (km, tail) = smooth_radius(lam, 0.1 * cfg.target_abs_tol, cfg)?;
    let ki = km as i64;
    let r2 = ki * ki;
    let coeffs = (-ki..=ki).flat_map(move |k1| {
        (-ki..=ki).filter_map(move |k2| {
            let q = k1 * k1 + k2 * k2;
            (q != 0 && q <= r2).then(|| ((k1, k2), Complex64::new(smooth_coeff(q as f64, lam), 0.0)))
        })
    });
    let smooth = synthesize(coeffs, n, n);

    // image part is invariant under x -> -x, y -> -y and x <-> y: evaluate per class
    let canon = |p: usize| -> usize {
        if p == 0 || 2 * p >= n {
            p
        } else {
            n - p
        }
    };
    let absx = |p: usize| -> f64 {
        if p == 0 {
            PI
        } else {
            grid_coord(p, n).abs()
        }
    };
    let mut classes: Vec<(usize, usize)> = Vec::new();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let key = |p: usize, q: usize| {
        let (a, b) = (canon(p), canon(q));
        if absx(a) >= absx(b) {
            (a, b)
        } else {
            (b, a)
        }
    };
    for p in 0..n {
        for q in 0..n {
            let k = key(p, q);
            if !index.contains_key(&k) {
                index.insert(k, classes.len());
                classes.push(k);
            }
        }
    }
    let img: Vec<f64> =
        classes.par_iter().map(|&(a, b)| image_sum(absx(a), absx(b), lam, [2.0, -3.0, 1.0])).collect();
    let shift = 5.0 / (6.0 * lam);
    let mut values = vec![0.0; n * n];
    for p in 0..n {
        for q in 0..n {
            values[p * n + q] = smooth[p * n + q].re + img[index[&key(p, q)]] - shift;
        }
    }

    // grid max, then the exact value at the vertex of the separable parabola
    let (imax, &vmax) = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let (p0, q0) = (imax / n, imax % n);
    let h = TWO_PI / n as f64;
    let vtx = |m: f64, c: f64, pl: f64| {
        let den = m - 2.0 * c + pl;
        if den < 0.0 {
            (0.5 * (m - pl) / den).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    };
    let at = |p: usize, q: usize| values[(p % n) * n + (q % n)];
    let dx = vtx(at(p0 + n - 1, q0), vmax, at(p0 + 1, q0));
    let dy = vtx(at(p0, q0 + n - 1), vmax, at(p0, q0 + 1));
    let mut sup = vmax;
    if dx != 0.0 || dy != 0.0 {
        let x = [grid_coord(p0, n) + dx * h, grid_coord(q0, n) + dy * h];
        sup = sup.max(extremal_value(mu, x, cfg)?.value);
    }
    let (norms, _) = extremal_norms(mu, cfg)?;
    Ok(FieldGrid {
        resolution: n,
        values,
        mu,
        sup_value: sup,
        grad_norm_sq: norms.grad,
        lap_norm_sq: norms.lap,
        l2_norm_sq: norms.l2,
        value_err: tail + image_err(lam) + 1e-14 * vmax.abs(),
    })
}

/// Finite Fourier data of a real zero-mean field on T^d, d in {1, 2}
/// (for d = 1 the second index is 0).
#[derive(Debug, Clone, PartialEq)]
pub struct FourierInput {
    pub d: u32,
    pub coefficients: BTreeMap<(i64, i64), Complex64>,
}

impl FourierInput {
    /// Checks k != 0, Hermitian symmetry and finiteness.
    pub fn new(d: u32, coefficients: BTreeMap<(i64, i64), Complex64>) -> Result<Self> {
        if d != 1 && d != 2 {
            return Err(Error::MalformedInput(format!("dimension must be 1 or 2, got {d}")));
        }
        if coefficients.is_empty() {
            return Err(Error::MalformedInput("no modes given".into()));
        }
        let scale = coefficients.values().map(|c| c.norm()).fold(0.0, f64::max);
        for (&(k1, k2), c) in &coefficients {
            if (k1, k2) == (0, 0) {
                return Err(Error::MalformedInput("mode k = 0 present (field must have zero mean)".into()));
            }
            if d == 1 && k2 != 0 {
                return Err(Error::MalformedInput(format!("1D input has second index {k2}")));
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::MalformedInput(format!("non-finite amplitude at ({k1},{k2})")));
            }
            let partner = coefficients.get(&(-k1, -k2)).copied().unwrap_or_default();
            if (partner - c.conj()).norm() > 1e-12 * scale {
                return Err(Error::MalformedInput(format!(
                    "not Hermitian: u({},{}) != conj(u({k1},{k2}))",
                    -k1, -k2
                )));
            }
        }
        Ok(FourierInput { d, coefficients })
    }

    /// Real field from modes given on one side; conjugate partners are added.
    pub fn from_half(d: u32, modes: impl IntoIterator<Item = ((i64, i64), Complex64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, c) in modes {
            if map.insert(k, c).is_some() || map.insert((-k.0, -k.1), c.conj()).is_some() {
                return Err(Error::MalformedInput(format!("mode {k:?} given twice")));
            }
        }
        FourierInput::new(d, map)
    }

    /// Text format: one mode per line, `k1 k2 re im` (or `k re im` in 1D),
    /// `#` starts a comment, duplicate modes are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut d: Option<usize> = None;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::MalformedInput(format!("line {}: {what}: {raw:?}", no + 1));
            let tok: Vec<&str> = line.split_whitespace().collect();
            let dim = match tok.len() {
                3 => 1,
                4 => 2,
                _ => return Err(bad("expected `k1 k2 re im`")),
            };
            if *d.get_or_insert(dim) != dim {
                return Err(bad("mixed 1D and 2D lines"));
            }
            let int = |s: &str| s.parse::<i64>().map_err(|_| bad("bad integer index"));
            let real = |s: &str| s.parse::<f64>().map_err(|_| bad("bad amplitude"));
            let k = if dim == 1 { (int(tok[0])?, 0) } else { (int(tok[0])?, int(tok[1])?) };
            let c = Complex64::new(real(tok[dim])?, real(tok[dim + 1])?);
            if map.insert(k, c).is_some() {
                return Err(bad("duplicate mode"));
            }
        }
        FourierInput::new(d.unwrap_or(2) as u32, map)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::MalformedInput(format!("cannot read {}: {e}", path.display())))?;
        FourierInput::parse(&text)
    }

    fn prefactor(&self) -> f64 {
        TWO_PI.powf(-0.5 * self.d as f64)
    }

    /// sum' |k|^{2s} |u_k|^2
    pub fn power_norm(&self, s: u32) -> f64 {
        self.coefficients
            .iter()
            .map(|(&(a, b), c)| ((a * a + b * b) as f64).powi(s as i32) * c.norm_sqr())
            .sum()
    }

    pub fn norms(&self) -> Norms {
        Norms { l2: self.power_norm(0), grad: self.power_norm(1), lap: self.power_norm(2) }
    }

    /// u, grad u and Hessian at x.
    fn eval_full(&self, x: [f64; 2]) -> (f64, [f64; 2], [f64; 3]) {
        let (mut v, mut g, mut h) = (0.0, [0.0; 2], [0.0; 3]);
        for (&(k1, k2), c) in &self.coefficients {
            let (a, b) = (k1 as f64, k2 as f64);
            let e = Complex64::from_polar(1.0, a * x[0] + b * x[1]) * c;
            v += e.re;
            // d/dx e^{ik.x} = i k e^{ik.x}
            g[0] -= a * e.im;
            g[1] -= b * e.im;
            h[0] -= a * a * e.re;
            h[1] -= a * b * e.re;
            h[2] -= b * b * e.re;
        }
        let s = self.prefactor();
        (s * v, [s * g[0], s * g[1]], [s * h[0], s * h[1], s * h[2]])
    }

    pub fn value_at(&self, x: [f64; 2]) -> f64 {
        self.eval_full(x).0
    }

    /// max |u| and a point where it is attained: grid search, then damped
    /// Newton from the best grid maxima. Only evaluated values are reported,
    /// so the result never exceeds the true sup.
    pub fn sup_abs(&self) -> (f64, [f64; 2]) {
        let kmax = self.coefficients.keys().map(|k| k.0.abs().max(k.1.abs())).max().unwrap_or(1) as usize;
        let n = (8 * kmax).next_power_of_two().max(64);
        let ny = if self.d == 1 { 1 } else { n };
        let s = self.prefactor();
        let vals: Vec<f64> =
            synthesize(self.coefficients.iter().map(|(&k, &c)| (k, c)), n, ny).iter().map(|c| s * c.re.abs()).collect();
        let at = |p: usize, q: usize| vals[(p % n) * ny + (q % ny)];
        let mut cands: Vec<(f64, usize, usize)> = Vec::new();
        for p in 0..n {
            for q in 0..ny {
                let v = at(p, q);
                let mut top = true;
                for (dp, dq) in [(1, 0), (n - 1, 0), (0, 1), (0, ny - 1), (1, 1), (n - 1, ny - 1), (1, ny - 1), (n - 1, 1)] {
                    if (dp == 0 || dq == 0 || ny > 1) && at(p + dp, q + dq) > v {
                        top = false;
                        break;
                    }
                }
                if top {
                    cands.push((v, p, q));
                }
            }
        }
        cands.sort_by(|a, b| b.0.total_cmp(&a.0));
        cands.truncate(8);
        let mut best = (cands[0].0, [grid_coord(cands[0].1, n), if ny > 1 { grid_coord(cands[0].2, n) } else { 0.0 }]);
        let h = TWO_PI / n as f64;
        for &(_, p, q) in &cands {
            let x0 = [grid_coord(p, n), if ny > 1 { grid_coord(q, n) } else { 0.0 }];
            let r = self.refine(x0, h);
            if r.0 > best.0 {
                best = r;
            }
        }
        best
    }

    fn refine(&self, mut x: [f64; 2], h: f64) -> (f64, [f64; 2]) {
        let (v0, ..) = self.eval_full(x);
        let sg = if v0 < 0.0 { -1.0 } else { 1.0 };
        let mut fx = sg * v0;
        for _ in 0..100 {
            let (v, g, hs) = self.eval_full(x);
            let (g, hs) = ([sg * g[0], sg * g[1]], [sg * hs[0], sg * hs[1], sg * hs[2]]);
            let _ = v;
            let det = hs[0] * hs[2] - hs[1] * hs[1];
            let mut step = if hs[0] < 0.0 && det > 1e-12 * (hs[0] * hs[2]).abs() {
                // -H^{-1} g
                [-(hs[2] * g[0] - hs[1] * g[1]) / det, -(-hs[1] * g[0] + hs[0] * g[1]) / det]
            } else if hs[0] < 0.0 && hs[2] == 0.0 && g[1] == 0.0 {
                [-g[0] / hs[0], 0.0]
            } else {
                let gn = g[0].hypot(g[1]);
                if gn == 0.0 {
                    break;
                }
                [h * g[0] / gn, h * g[1] / gn]
            };
            let len = step[0].hypot(step[1]);
            if len > h {
                step = [step[0] * h / len, step[1] * h / len];
            }
            let mut improved = false;
            for _ in 0..40 {
                let y = [x[0] + step[0], x[1] + step[1]];
                let fy = sg * self.value_at(y);
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
                step = [0.5 * step[0], 0.5 * step[1]];
            }
            if !improved || step[0].hypot(step[1]) < 1e-14 {
                break;
            }
        }
        (fx, x)
    }
}

/// The truncated extremal u_mu, |k| <= radius, as input data.
pub fn truncated_extremal_input(mu: f64, radius: i64) -> Result<FourierInput> {
    if !(mu > 0.0) || radius < 1 {
        return domain("need mu > 0 and radius >= 1");
    }
    let mut map = BTreeMap::new();
    for k1 in -radius..=radius {
        for k2 in -radius..=radius {
            let q = k1 * k1 + k2 * k2;
            if q != 0 && q <= radius * radius {
                let m = q as f64;
                map.insert((k1, k2), Complex64::new(TWO_PI / (m * (1.0 + mu * m)), 0.0));
            }
        }
    }
    FourierInput::new(2, map)
}

/// Which inequality to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inequality {
    /// sup|u|^2 <= |grad u|^2 Theta0(delta)
    LogTheta0,
    /// sup|u|^2 <= (1/4pi)|grad u|^2 (ln delta + ln(1 + ln delta) + L)
    LogDoubleLog,
    /// sup|u|^2 <= c |u|^{2-d/n} |(-Lap)^{n/2} u|^{d/n} - K |u|^2
    Algebraic(CaseDN),
}

impl std::str::FromStr for Inequality {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log0" => Ok(Inequality::LogTheta0),
            "loglog" => Ok(Inequality::LogDoubleLog),
            _ => {
                let parts: Vec<&str> = s.split(':').collect();
                match parts.as_slice() {
                    ["alg", d, n] => {
                        let d = d.parse().map_err(|_| Error::Domain(format!("bad dimension in {s:?}")))?;
                        let n = n.parse().map_err(|_| Error::Domain(format!("bad order in {s:?}")))?;
                        Ok(Inequality::Algebraic(CaseDN::new(d, n)?))
                    }
                    _ => Err(Error::Domain(format!("unknown inequality {s:?} (log0, loglog, alg:D:N)"))),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
    pub delta: f64,
}

type CacheKey = (u32, u32, u64, u64);

fn cached(key: CacheKey, compute: impl FnOnce() -> Result<f64>) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = cache.lock().unwrap().get(&key) {
        return Ok(v);
    }
    let v = compute()?;
    cache.lock().unwrap().insert(key, v);
    Ok(v)
}

/// The double-log constant L (computed once per tolerance setting).
pub fn l_constant(cfg: &PrecisionConfig) -> Result<f64> {
    cached((0, 0, cfg.target_abs_tol.to_bits(), cfg.root_tol.to_bits()), || Ok(find_l(cfg)?.l))
}

fn k_constant(case: CaseDN, cfg: &PrecisionConfig) -> Result<f64> {
    cached((case.d, case.n, cfg.target_abs_tol.to_bits(), cfg.root_tol.to_bits()), || {
        Ok(remainder_constant(case, cfg)?.k)
    })
}

pub fn verify_inequality(input: &FourierInput, which: Inequality, cfg: &PrecisionConfig) -> Result<InequalityReport> {
    let nm = input.norms();
    let (sup, _) = input.sup_abs();
    let lhs = sup * sup;
    let (rhs, delta) = match which {
        Inequality::LogTheta0 | Inequality::LogDoubleLog => {
            if input.d != 2 {
                return domain("logarithmic inequalities are stated on the 2D torus");
            }
            let delta = nm.lap / nm.grad;
            let rhs = if which == Inequality::LogTheta0 {
                nm.grad * theta_model(ThetaModel::Theta0, delta, cfg)?.theta
            } else {
                let l = delta.ln();
                nm.grad / (4.0 * PI) * (l + l.ln_1p() + l_constant(cfg)?)
            };
            (rhs, delta)
        }
        Inequality::Algebraic(case) => {
            if case.d != input.d {
                return domain(format!("input is {}D but the inequality is for d = {}", input.d, case.d));
            }
            let p = input.power_norm(case.n);
            let delta = p / nm.l2;
            let r = case.d as f64 / (2.0 * case.n as f64);
            let c = leading_constant(case)?;
            (c * nm.l2 * delta.powf(r) - k_constant(case, cfg)? * nm.l2, delta)
        }
    };
    let margin = rhs - lhs;
    Ok(InequalityReport { lhs, rhs, margin, holds: margin >= -1e-9 * rhs.abs(), delta })
}

/// lim_{x -> 0} G0(x) - 2 pi ln(1/|x|) = beta - 2 pi (gamma - ln 2).
pub fn g0_regular_part_at_origin() -> f64 {
    crate::lattice::beta_constant().value - TWO_PI * (EULER_GAMMA - LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PrecisionConfig {
        PrecisionConfig::default()
    }

    #[test]
    fn g0_anchor_and_independence() {
        let c = cfg();
        let x = [PI, PI];
        let want = -PI * LN_2;
        for mu in [0.5, 1.0, 2.0] {
            let v = g0_value_at(x, mu, &c).unwrap();
            assert!((v.value - want).abs() < 1e-10, "mu={mu}: {}", v.value - want);
        }
        let p = [0.7, -1.9];
        let a = g0_value_at(p, 0.5, &c).unwrap().value;
        let b = g0_value_at(p, 2.0, &c).unwrap().value;
        assert!((a - b).abs() < 1e-10);
        assert!((g0_value([0.3, 1.1], &c).unwrap() - g0_value([1.1, 0.3], &c).unwrap()).abs() < 1e-12);
        assert!(g0_value([0.0, 0.0], &c).is_err());
        assert!(g0_value([TWO_PI, 0.0], &c).is_err());
    }

    #[test]
    fn g0_near_origin() {
        let c = cfg();
        let lim = g0_regular_part_at_origin();
        for (r, tol) in [(1e-2, 1e-3), (1e-3, 1e-5)] {
            let v = g0_value([r, 0.0], &c).unwrap() - TWO_PI * (1.0 / r).ln();
            assert!((v - lim).abs() < tol, "r={r}: {}", v - lim);
        }
    }

    #[test]
    fn extremal_origin_is_f() {
        let c = cfg();
        for mu in [0.12211, 1.0, 0.02] {
            let f = critical_sums(mu, Method::Direct, &c).unwrap().f.value;
            let v = extremal_value(mu, [0.0, 0.0], &c).unwrap().value;
            assert!((v - f).abs() < 1e-10, "mu={mu}");
        }
    }

    #[test]
    fn spike_profile() {
        let mu: f64 = 0.1;
        let c = cfg();
        let rem = |r: f64| {
            extremal_value(mu, [r, 0.0], &c).unwrap().value - TWO_PI * ((1.0 / r).ln() - k0(r / mu.sqrt()))
        };
        let vals: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|&r| rem(r)).collect();
        assert!(vals.iter().all(|v| v.abs() < 10.0));
        assert!((vals[2] - vals[3]).abs() < 1e-3, "{vals:?}");
    }

    #[test]
    fn grid_matches_points_and_symmetry() {
        let c = cfg();
        let mu = 0.12211;
        let g = extremal_field(mu, 64, &c).unwrap();
        let n = 64;
        for (p, q) in [(3, 17), (40, 9), (0, 0), (32, 32)] {
            let v = extremal_value(mu, [g.coord(p), g.coord(q)], &c).unwrap().value;
            assert!((v - g.at(p, q)).abs() < 1e-10, "({p},{q})");
        }
        for p in 0..n {
            for q in 0..n {
                let v = g.at(p, q);
                assert!((v - g.at((n - p) % n, q)).abs() < 1e-10);
                assert!((v - g.at(q, p)).abs() < 1e-10);
            }
        }
        let f = critical_sums(mu, Method::Direct, &c).unwrap().f.value;
        assert_eq!(g.sup_value, g.at(32, 32));
        assert!(g.sup_value <= f + 1e-12);
        assert!((g.lap_norm_sq / g.grad_norm_sq - 3.92888).abs() < 1e-4);
        // the grid mean is the aliased sum over k in N Z^2 \ {0}
        let mean = g.values.iter().sum::<f64>() / (n * n) as f64;
        let r = 300i64;
        let alias: f64 = (-r..=r)
            .flat_map(|a| (-r..=r).map(move |b| (a, b)))
            .filter(|&(a, b)| (a, b) != (0, 0) && a * a + b * b <= r * r)
            .map(|(a, b)| {
                let m = (((a * a + b * b) * (n * n) as i64) as f64).max(1.0);
                1.0 / (m * (1.0 + mu * m))
            })
            .sum::<f64>()
            + PI / (mu * (n as f64).powi(4) * (r * r) as f64);
        assert!((mean - alias).abs() < 1e-11, "{mean} {alias}");
    }

    #[test]
    fn truncated_norms_converge() {
        let mu = 0.12211;
        let t = truncated_extremal_norms(mu, 200).unwrap();
        let (n, _) = extremal_norms(mu, &cfg()).unwrap();
        assert!((t.corrected_ratio() - n.lap / n.grad).abs() < 1e-8 * n.lap / n.grad);
        assert!(t.grad + t.grad_tail.0 <= n.grad * (1.0 + 1e-12));
        assert!(t.grad + t.grad_tail.1 >= n.grad * (1.0 - 1e-12));
    }

    #[test]
    fn parse_and_validate() {
        let ok = "# cos x\n1 0 3.14 0\n-1 0 3.14 0 # partner\n";
        let f = FourierInput::parse(ok).unwrap();
        assert_eq!(f.coefficients.len(), 2);
        assert!(FourierInput::parse("1 0 1 0\n1 0 1 0\n-1 0 1 0").is_err());
        assert!(FourierInput::parse("1 0 1 0").is_err());
        assert!(FourierInput::parse("0 0 1 0").is_err());
        assert!(FourierInput::parse("1 2 1 0.5\n-1 -2 1 0.5").is_err());
        assert!(FourierInput::parse("1 2 1 0.5\n-1 -2 1 -0.5").is_ok());
        assert!(FourierInput::parse("1 1 0\n-1 1 0\n1 2 1 0").is_err());
        let one = FourierInput::parse("2 1 0\n-2 1 0").unwrap();
        assert_eq!(one.d, 1);
    }

    #[test]
    fn cos_x_single_mode() {
        let c = cfg();
        let u = FourierInput::from_half(2, [((1, 0), Complex64::new(PI, 0.0))]).unwrap();
        let nm = u.norms();
        assert!((nm.grad - 2.0 * PI * PI).abs() < 1e-12);
        let (s, _) = u.sup_abs();
        assert!((s - 1.0).abs() < 1e-12);
        let r = verify_inequality(&u, Inequality::LogTheta0, &c).unwrap();
        assert!(r.holds);
        assert!((r.delta - 1.0).abs() < 1e-15);
        let e = verify_inequality(&u, Inequality::Algebraic(CaseDN::new(1, 1).unwrap()), &c);
        assert!(e.is_err());
    }

    #[test]
    fn sup_refines_off_grid() {
        // peak of cos(x) + cos(1.0 (x + y)) style data sits off the grid
        let u = FourierInput::from_half(
            2,
            [((1, 0), Complex64::new(1.0, 0.3)), ((0, 3), Complex64::new(0.2, -0.7)), ((2, 1), Complex64::new(-0.4, 0.1))],
        )
        .unwrap();
        let (s, x) = u.sup_abs();
        let (_, g, _) = u.eval_full(x);
        assert!(g[0].hypot(g[1]) < 1e-8 * s);
        // brute-force check on a fine grid
        let mut m: f64 = 0.0;
        for i in 0..600 {
            for j in 0..600 {
                let p = [-PI + TWO_PI * i as f64 / 600.0, -PI + TWO_PI * j as f64 / 600.0];
                m = m.max(u.value_at(p).abs());
            }
        }
        assert!(s >= m - 1e-14 && s < m + 1e-3);
    }

    #[test]
    fn inequality_parse() {
        assert_eq!("log0".parse::<Inequality>().unwrap(), Inequality::LogTheta0);
        assert_eq!("alg:2:2".parse::<Inequality>().unwrap(), Inequality::Algebraic(CaseDN { d: 2, n: 2 }));
        assert!("alg:2:1".parse::<Inequality>().is_err());
        assert!("foo".parse::<Inequality>().is_err());
    }
}
