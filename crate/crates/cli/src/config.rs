//! `key = value` precision config files and delta/z grid specs.

use torus_sobolev::{Error, PrecisionConfig, Result};

/// Applies `key = value` lines on top of `base`. `#` starts a comment.
pub fn apply_config_text(base: PrecisionConfig, text: &str) -> Result<PrecisionConfig> {
    let mut cfg = base;
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Error::MalformedInput(format!("config line {}: {what}: {raw:?}", no + 1));
        let (k, v) = line.split_once('=').ok_or_else(|| bad("expected key = value"))?;
        set_key(&mut cfg, k.trim(), v.trim()).map_err(|_| bad("bad key or value"))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn set_key(cfg: &mut PrecisionConfig, key: &str, value: &str) -> std::result::Result<(), ()> {
    let f = || value.parse::<f64>().map_err(|_| ());
    let u = || value.parse::<f64>().ok().filter(|x| *x >= 0.0 && x.fract() == 0.0).ok_or(());
    match key {
        "target_abs_tol" => cfg.target_abs_tol = f()?,
        "root_tol" => cfg.root_tol = f()?,
        "maximizer_tol" => cfg.maximizer_tol = f()?,
        "max_radius" => cfg.max_radius = u()? as u64,
        "max_bessel_terms" => cfg.max_bessel_terms = u()? as usize,
        _ => return Err(()),
    }
    Ok(())
}

/// `a:b:steps` (linear) or `a:b:steps,log` (geometric), endpoints included.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Domain(format!("grid spec {spec:?}: expected a:b:steps[,log]"));
    let (body, log) = match spec.split_once(',') {
        Some((b, "log")) => (b, true),
        Some(_) => return Err(bad()),
        None => (spec, false),
    };
    let parts: Vec<&str> = body.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() || (log && (a <= 0.0 || b <= 0.0)) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let t = |i: usize| i as f64 / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else if log {
                (a.ln() + (b.ln() - a.ln()) * t(i)).exp()
            } else {
                a + (b - a) * t(i)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1:4:4").unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        let g = parse_grid("1:100:3,log").unwrap();
        assert_eq!(g[0], 1.0);
        assert!((g[1] - 10.0).abs() < 1e-12);
        assert_eq!(g[2], 100.0);
        assert_eq!(parse_grid("2:5:1").unwrap(), vec![2.0]);
        for bad in ["1:4", "1:4:0", "0:4:3,log", "1:4:3,lin", "a:4:3"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn config_text() {
        let c = apply_config_text(PrecisionConfig::default(), "# tol\nroot_tol = 1e-10\nmax_radius=4096 # r\n").unwrap();
        assert_eq!(c.root_tol, 1e-10);
        assert_eq!(c.max_radius, 4096);
        assert!(apply_config_text(PrecisionConfig::default(), "nope = 1").is_err());
        assert!(apply_config_text(PrecisionConfig::default(), "root_tol 1").is_err());
        assert!(apply_config_text(PrecisionConfig::default(), "max_radius = 2").is_err());
    }
}
