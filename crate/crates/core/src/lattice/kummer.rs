//! Kummer-subtracted lattice sums.
//!
//! Sums of the form
//!
//! ```text
//! S * sum' m^{-e0} (1 + lambda m^{-beta})^{-p},   m = |k|^2,
//! ```
//!
//! are split at M0 = max(ceil((4|lambda|)^{1/beta}), 8). Shells m <= M0 are
//! summed directly. Beyond M0 the binomial series in lambda m^{-beta}
//! converges geometrically (ratio <= 1/4) and each power sum is a normalized
//! lattice tail T(s) = sum_{m > M0} r(m) (M0/m)^s: a Hurwitz tail in one
//! dimension, a divisor-sum (hyperbola) split in two, and in three either the
//! lattice zeta value minus the inner partial sum or direct shells to
//! 16-64 M0 plus an integral bracket, whichever carries the smaller error. Everything is assembled in
//! logarithms so that huge lambda or huge prefactors S never overflow.

use super::epstein::lattice_zeta;
use super::shells::{cached_shells, isqrt, Shells};
use std::sync::Arc;
use super::tail::{tail_bracket_with_count, TailDescriptor};
use crate::error::{Error, Result};
use crate::optimize::KahanSum;
use crate::specfun::{alternating_tail_scaled, hurwitz_scaled, SpecialValue};
use std::sync::OnceLock;

/// lambda stored as sign and log-magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambda {
    pub ln_abs: f64,
    /// -1, 0 or +1
    pub sign: f64,
}

impl Lambda {
    pub fn new(x: f64) -> Self {
        if x == 0.0 {
            Lambda { ln_abs: f64::NEG_INFINITY, sign: 0.0 }
        } else {
            Lambda { ln_abs: x.abs().ln(), sign: x.signum() }
        }
    }

    pub fn from_ln(ln_abs: f64, sign: f64) -> Self {
        Lambda { ln_abs, sign }
    }
}

/// Exponents of one summand family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Family {
    pub e0: f64,
    pub beta: f64,
    pub p: u32,
}

/// sum_{m > M} r2(m) (M/m)^s through r2 = 4 (1 * chi_4) and the hyperbola
/// split at sqrt(M); every piece is a positive or alternating tail, so there
/// is no cancellation against a full zeta value.
pub(crate) fn tail2_hyperbola(s: f64, m: u64) -> (f64, f64) {
    let a_max = isqrt(m);
    let mf = m as f64;
    let mut acc = KahanSum::new();
    let mut err = 0.0;
    let mut abs = 0.0;
    for a in 1..=a_max {
        let q = mf / a as f64;
        if a % 2 == 1 {
            let chi = if a % 4 == 1 { 1.0 } else { -1.0 };
            let (h, he) = hurwitz_scaled(s, m / a + 1, q);
            acc.add(chi * h);
            err += he;
            abs += h;
        }
        let (t, te) = alternating_tail_scaled(s, q);
        acc.add(t);
        err += te;
        abs += t.abs();
    }
    let r = (mf).sqrt();
    let (h, he) = hurwitz_scaled(s, a_max + 1, r);
    let (t, te) = alternating_tail_scaled(s, r);
    acc.add(h * t);
    err += he * t.abs() + te * h;
    abs += (h * t).abs();
    let v = 4.0 * acc.value();
    (v, 4.0 * (err + 2e-16 * abs))
}

/// Shared split point and shell tables for families with the same lambda
/// and beta.
pub struct KummerCtx {
    d: u32,
    beta: f64,
    lam: Lambda,
    m0: u64,
    inner: Arc<Shells>,
    outer: OnceLock<Result<Arc<Shells>>>,
}

fn m0_limit(d: u32) -> u64 {
    match d {
        1 => 1_000_000_000_000,
        2 => 40_000_000,
        _ => 30_000,
    }
}

impl KummerCtx {
    pub fn new(d: u32, beta: f64, lam: Lambda) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::Domain(format!("dimension {d} not supported")));
        }
        let m0 = if lam.sign == 0.0 {
            8.0
        } else {
            ((4f64.ln() + lam.ln_abs) / beta).exp().ceil().max(8.0)
        };
        if !(m0 <= m0_limit(d) as f64) {
            return Err(Error::Resource(format!("split point M0 = {m0:e} too large in dimension {d}")));
        }
        let m0 = m0 as u64;
        Ok(KummerCtx { d, beta, lam, m0, inner: cached_shells(d, m0)?, outer: OnceLock::new() })
    }

    pub fn m0(&self) -> u64 {
        self.m0
    }

    /// ln(1 + lambda m^{-beta}); error at a pole.
    fn log1p_lam(&self, m: u64) -> Result<f64> {
        if self.lam.sign == 0.0 {
            return Ok(0.0);
        }
        let lx = self.lam.ln_abs - self.beta * (m as f64).ln();
        if self.lam.sign > 0.0 {
            Ok(if lx > 0.0 { lx + (-lx).exp().ln_1p() } else { lx.exp().ln_1p() })
        } else {
            let x = -lx.exp();
            if x <= -1.0 {
                Err(Error::Domain(format!("summand pole at m = {m}")))
            } else {
                Ok(x.ln_1p())
            }
        }
    }

    fn m1(&self) -> u64 {
        if self.m0 <= 2000 {
            64 * self.m0
        } else {
            16 * self.m0
        }
    }

    fn outer(&self) -> Result<&Shells> {
        self.outer
            .get_or_init(|| cached_shells(self.d, self.m1()))
            .as_ref()
            .map(|a| a.as_ref())
            .map_err(|e| e.clone())
    }

    /// Normalized tail T(s) = sum_{m > M0} r(m) (M0/m)^s with error.
    fn tail_power(&self, s: f64) -> Result<(f64, f64)> {
        let d = self.d;
        let lm0 = (self.m0 as f64).ln();
        if d == 1 {
            let a = isqrt(self.m0) + 1;
            let (v, e) = hurwitz_scaled(2.0 * s, a, (self.m0 as f64).sqrt());
            return Ok((2.0 * v, 2.0 * e));
        }
        let mut best: Option<(f64, f64)> = None;
        let zeta_ok = d == 2 || (s.fract() == 0.0 && s <= 40.0);
        if zeta_ok && s * lm0 < 600.0 {
            let z = lattice_zeta(d, 2.0 * s)?;
            let (p, pabs) = self.inner.sum_range(0, self.m0, |m| (m as f64).powf(-s));
            let scale = (s * lm0).exp();
            let v = scale * (z.value - p);
            let e = scale * (z.abs_error_bound + 4e-16 * (pabs + z.value.abs()));
            if v > 0.0 {
                if e <= 1e-15 * v {
                    return Ok((v, e));
                }
                best = Some((v, e));
            }
        }
        if d == 2 {
            let h = tail2_hyperbola(s, self.m0);
            return Ok(match best {
                Some(b) if b.1 <= h.1 => b,
                _ => h,
            });
        }
        let outer = self.outer()?;
        let m1 = self.m1();
        let ratio = |m: u64| (s * (lm0 - (m as f64).ln())).exp();
        let (direct, dabs) = outer.sum_range(self.m0, m1, ratio);
        let inside = 1 + outer.count_upto(m1);
        let desc = TailDescriptor::Power { s: 2.0 * s, r0: (self.m0 as f64).sqrt() };
        let (lo, hi) = tail_bracket_with_count(d, (m1 as f64).sqrt(), &desc, inside)?;
        let v = direct + 0.5 * (lo + hi);
        let e = 0.5 * (hi - lo) + 4e-16 * dabs;
        match best {
            Some(b) if b.1 <= e => Ok(b),
            _ => Ok((v, e)),
        }
    }

    /// S * sum' m^{-e0} (1 + lambda m^{-beta})^{-p} with S = exp(ln_scale).
    /// With `skip_first` the m = 1 shell is left out.
    pub fn sum(&self, fam: Family, ln_scale: f64, skip_first: bool) -> Result<SpecialValue> {
        assert!(fam.beta == self.beta, "family beta must match the context");
        assert!(fam.p >= 1 && fam.p <= 2, "only p in {{1, 2}} supported");
        if !(2.0 * fam.e0 > self.d as f64) {
            return Err(Error::Domain(format!("sum diverges: 2 e0 = {} <= d = {}", 2.0 * fam.e0, self.d)));
        }
        let p = fam.p as f64;
        // inner shells
        let mut acc = KahanSum::new();
        let mut abs = 0.0;
        let mut n_terms = 0usize;
        for &(m, c) in self.inner.list.iter().take_while(|e| e.0 <= self.m0) {
            n_terms += 1;
            if skip_first && m == 1 {
                continue;
            }
            let l = self.log1p_lam(m)?;
            let t = c as f64 * (ln_scale - fam.e0 * (m as f64).ln() - p * l).exp();
            acc.add(t);
            abs += t;
        }
        let mut err = 4e-16 * abs * (1.0 + (n_terms as f64).log2());
        // binomial tail
        let lm0 = (self.m0 as f64).ln();
        let lx0 = self.lam.ln_abs - self.beta * lm0; // <= ln(1/4)
        let base = ln_scale - fam.e0 * lm0;
        let mut coef_ln = 0.0; // ln C(p + j - 1, j)
        let mut sign = 1.0;
        let jmax = if self.lam.sign == 0.0 { 1 } else { 400 };
        let mut j = 0usize;
        loop {
            let s = fam.e0 + self.beta * j as f64;
            let (t, te) = self.tail_power(s)?;
            let w = if j == 0 { base.exp() } else { (base + coef_ln + j as f64 * lx0).exp() };
            if j == jmax {
                // remainder bound: C_{p,J} x0^J M0^{-e0} T(e0 + beta J)
                let cpj = if fam.p == 1 { 4.0 / 3.0 } else { 16.0 * (j as f64 + 2.0) / 9.0 };
                err += cpj * (base + j as f64 * lx0).exp() * (t + te);
                break;
            }
            acc.add(sign * w * t);
            err += w * te;
            // decide whether the next term (and remainder) is negligible
            let cpj = if fam.p == 1 { 4.0 / 3.0 } else { 16.0 * (j as f64 + 3.0) / 9.0 };
            let next_bound = cpj * (base + (j + 1) as f64 * lx0).exp() * (t + te);
            let total = acc.value().abs();
            if self.lam.sign == 0.0 {
                break;
            }
            if next_bound <= 1e-17 * total || next_bound == 0.0 {
                err += next_bound;
                break;
            }
            j += 1;
            if j > 390 {
                return Err(Error::NoConvergence("binomial tail did not converge".into()));
            }
            coef_ln += ((p + j as f64 - 1.0) / j as f64).ln();
            sign *= -self.lam.sign;
        }
        let v = acc.value();
        Ok(SpecialValue::new(v, err + 2.0 * f64::EPSILON * v.abs()))
    }
}
