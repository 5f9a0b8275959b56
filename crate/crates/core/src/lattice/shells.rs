//! Shell tables (m = |k|^2, number of lattice points on the shell) and
//! two-dimensional counting helpers.

use std::sync::{Arc, Mutex};
use crate::error::{Error, Result};
use crate::optimize::KahanSum;

/// Largest dense table we are willing to allocate.
const DENSE_LIMIT: u64 = 60_000_000;

pub(crate) fn isqrt(m: u64) -> u64 {
    let mut r = (m as f64).sqrt() as u64;
    while r * r > m {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= m {
        r += 1;
    }
    r
}

/// Nonempty shells 1 <= m <= m_max of Z^d, in increasing m.
#[derive(Debug, Clone)]
pub struct Shells {
    pub d: u32,
    pub m_max: u64,
    pub list: Vec<(u64, u64)>,
}

fn dense_2d(m_max: u64, with_origin: bool) -> Vec<u32> {
    let mut c = vec![0u32; m_max as usize + 1];
    if with_origin {
        c[0] = 1;
    }
    // every nonzero point rotates uniquely into {a >= 1, b >= 0}
    let amax = isqrt(m_max);
    for a in 1..=amax {
        let a2 = a * a;
        let bmax = isqrt(m_max - a2);
        for b in 0..=bmax {
            c[(a2 + b * b) as usize] += 4;
        }
    }
    c
}

impl Shells {
    pub fn new(d: u32, m_max: u64) -> Result<Self> {
        let list = match d {
            1 => (1..=isqrt(m_max)).map(|k| (k * k, 2)).collect(),
            2 => {
                if m_max > DENSE_LIMIT {
                    return Err(Error::Resource(format!("2D shell table up to m = {m_max} is too large")));
                }
                dense_2d(m_max, false)
                    .into_iter()
                    .enumerate()
                    .filter(|&(m, c)| m > 0 && c > 0)
                    .map(|(m, c)| (m as u64, c as u64))
                    .collect()
            }
            3 => {
                if m_max > DENSE_LIMIT / 8 {
                    return Err(Error::Resource(format!("3D shell table up to m = {m_max} is too large")));
                }
                let c2 = dense_2d(m_max, true);
                let amax = isqrt(m_max);
                let mut out = Vec::new();
                for m in 1..=m_max {
                    let mut c = c2[m as usize] as u64;
                    for a in 1..=amax.min(isqrt(m)) {
                        c += 2 * c2[(m - a * a) as usize] as u64;
                    }
                    if c > 0 {
                        out.push((m, c));
                    }
                }
                out
            }
            _ => return Err(Error::Domain(format!("dimension {d} not supported"))),
        };
        Ok(Shells { d, m_max, list })
    }

    /// Number of lattice points with 0 < |k|^2 <= m.
    pub fn count_upto(&self, m: u64) -> u64 {
        self.list.iter().take_while(|e| e.0 <= m).map(|e| e.1).sum()
    }

    /// Number of lattice points with 0 < |k|^2 <= m_max.
    pub fn total(&self) -> u64 {
        self.list.iter().map(|&(_, c)| c).sum()
    }

    /// Compensated sum of count * phi(m) over shells with lo < m <= hi.
    pub fn sum_range(&self, lo: u64, hi: u64, mut phi: impl FnMut(u64) -> f64) -> (f64, f64) {
        let start = self.list.partition_point(|&(m, _)| m <= lo);
        let mut acc = KahanSum::new();
        let mut abs = 0.0;
        for &(m, c) in &self.list[start..] {
            if m > hi {
                break;
            }
            let t = c as f64 * phi(m);
            acc.add(t);
            abs += t.abs();
        }
        (acc.value(), abs)
    }
}

/// Number of points of Z^d (origin included) in the closed ball |k|^2 <= m.
pub fn ball_count(d: u32, m: u64) -> u64 {
    match d {
        1 => 2 * isqrt(m) + 1,
        2 => {
            let a = isqrt(m);
            (0..=a).map(|x| if x == 0 { 1 } else { 2 } * (2 * isqrt(m - x * x) + 1)).sum()
        }
        3 => {
            let a = isqrt(m);
            (0..=a).map(|x| if x == 0 { 1 } else { 2 } * ball_count(2, m - x * x)).sum()
        }
        _ => 0,
    }
}

/// R2(m): nonzero points of Z^2 with |k|^2 <= m.
pub fn r2_count(m: u64) -> u64 {
    ball_count(2, m) - 1
}

/// Number of points of Z^2 with |k|^2 = m exactly.
pub fn shell_count_2d(m: u64) -> u64 {
    if m == 0 {
        return 1;
    }
    let mut c = 0;
    let a = isqrt(m);
    for x in 1..=a {
        let r = m - x * x;
        let y = isqrt(r);
        if y * y == r {
            c += 4;
        }
    }
    c
}

/// Least sum of two squares strictly greater than m.
pub fn next_representable(m: u64) -> u64 {
    let mut n = m + 1;
    while shell_count_2d(n) == 0 {
        n += 1;
    }
    n
}

/// sum over 0 < |k| <= n of 1/|k|^2 in Z^2, accumulated shell by shell.
pub fn partial_inverse_square_sum(n: f64, max_radius: u64) -> Result<f64> {
    if !(n >= 1.0) {
        return Err(Error::Domain(format!("partial_inverse_square_sum needs N >= 1, got {n}")));
    }
    if n > max_radius as f64 {
        return Err(Error::Resource(format!("radius {n} exceeds max_radius {max_radius}")));
    }
    let m_max = (n * n).floor() as u64;
    let sh = Shells::new(2, m_max)?;
    Ok(sh.sum_range(0, m_max, |m| 1.0 / m as f64).0)
}


/// Shared tables, reused whenever an existing one reaches far enough.
pub(crate) fn cached_shells(d: u32, m: u64) -> Result<Arc<Shells>> {
    static CACHE: [Mutex<Option<Arc<Shells>>>; 3] = [Mutex::new(None), Mutex::new(None), Mutex::new(None)];
    let limit = match d {
        1 => 0,
        2 => 4_000_000,
        _ => 600_000,
    };
    if m > limit || !(1..=3).contains(&d) {
        return Shells::new(d, m).map(Arc::new);
    }
    let slot = &CACHE[(d - 1) as usize];
    let mut g = slot.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(t) = g.as_ref() {
        if t.m_max >= m {
            return Ok(t.clone());
        }
    }
    let size = m.max(g.as_ref().map_or(0, |t| t.m_max.saturating_mul(2)).min(limit)).max(1024);
    let t = Arc::new(Shells::new(d, size)?);
    *g = Some(t.clone());
    Ok(t)
}
