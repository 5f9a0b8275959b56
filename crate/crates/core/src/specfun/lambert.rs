//! Lambert W, branches 0 and -1, by Halley iteration.

use super::SpecialValue;
use crate::error::{domain, Result};
use std::f64::consts::E;

// 1/e split into a head and a tail so that x + 1/e is accurate near the
// branch point.
const INV_E_HI: f64 = 0.367_879_441_171_442_33;
const INV_E_LO: f64 = -1.242_875_367_278_836_3e-17;

/// Series of W about the branch point in p = +-sqrt(2(e x + 1)).
fn branch_series(p: f64) -> f64 {
    const C: [f64; 7] = [
        -1.0,
        1.0,
        -1.0 / 3.0,
        11.0 / 72.0,
        -43.0 / 540.0,
        769.0 / 17280.0,
        -221.0 / 8505.0,
    ];
    C.iter().rev().fold(0.0, |acc, c| acc * p + c)
}

fn halley(mut w: f64, x: f64) -> f64 {
    for _ in 0..60 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        if !step.is_finite() {
            break;
        }
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(1e-300) {
            break;
        }
    }
    w
}

fn branch_p(x: f64) -> f64 {
    let t = (x + INV_E_HI) + INV_E_LO;
    (2.0 * E * t.max(0.0)).sqrt()
}

/// Principal branch W0(x), x >= -1/e.
pub fn lambert_w0(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let p = branch_p(x);
    if p < 1e-2 {
        return branch_series(p);
    }
    let w = if x < -0.32 {
        branch_series(p)
    } else if x <= 3.0 {
        x.ln_1p() * (1.0 - 0.25 * x.ln_1p() / (1.0 + x.ln_1p().abs()))
    } else {
        let l1 = x.ln();
        l1 - l1.ln()
    };
    halley(w, x)
}

/// Lower branch W_{-1}(x), -1/e <= x < 0.
pub fn lambert_wm1(x: f64) -> f64 {
    let p = branch_p(x);
    if p < 1e-2 {
        return branch_series(-p);
    }
    let w = if x < -0.25 {
        branch_series(-p)
    } else {
        // log-log expansion near zero
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };
    halley(w, x)
}

/// W on branch 0 or -1 with a residual-derived error bound.
pub fn lambert_w(branch: i32, x: f64) -> Result<SpecialValue> {
    let lo = -(INV_E_HI + INV_E_LO);
    let w = match branch {
        0 if x >= lo => lambert_w0(x),
        -1 if x >= lo && x < 0.0 => lambert_wm1(x),
        0 | -1 => return domain(format!("lambert_w branch {branch} undefined at x = {x}")),
        _ => return domain(format!("lambert_w branch must be 0 or -1, got {branch}")),
    };
    // |dW/dx| = W / (x (1 + W)); near the branch point this blows up, so
    // the bound is taken from the residual where the derivative is tame.
    let resid = (w * w.exp() - x).abs();
    let slope = (1.0 / (w.exp() * (1.0 + w))).abs();
    let err = if slope.is_finite() { (resid * slope).max(4.0 * f64::EPSILON * w.abs()) } else { 1e-8 };
    Ok(SpecialValue::new(w, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_points() {
        assert_eq!(lambert_w0(0.0), 0.0);
        assert!((lambert_w0(E) - 1.0).abs() < 1e-15);
        assert!((lambert_wm1(-1.0 / E) + 1.0).abs() < 1e-7);
        assert!((lambert_w0(-1.0 / E) + 1.0).abs() < 1e-7);
        // known value W0(1) = omega constant
        assert!((lambert_w0(1.0) - 0.567_143_290_409_783_8).abs() < 1e-15);
    }

    #[test]
    fn round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lo = -1.0 / E;
        for _ in 0..1000 {
            // branch 0 on [-1/e, 1e6], log-spread
            let x = if rng.gen_bool(0.5) { rng.gen_range(lo..0.0) } else { 10f64.powf(rng.gen_range(-8.0..6.0)) };
            let w = lambert_w(0, x).unwrap().value;
            assert!((w * w.exp() - x).abs() <= 1e-13 * x.abs().max(1.0), "x={x}");
            assert!(w >= -1.0);
            let y = -10f64.powf(rng.gen_range(-300.0..(-lo).log10()));
            let y = y.max(lo);
            let v = lambert_w(-1, y).unwrap().value;
            assert!((v * v.exp() - y).abs() <= 1e-13 * y.abs().max(1.0), "y={y}");
            assert!(v <= -1.0);
        }
    }

    #[test]
    fn near_branch_point() {
        for k in 1..12 {
            let x = -1.0 / E + 10f64.powi(-k);
            for b in [0, -1] {
                let w = lambert_w(b, x).unwrap().value;
                assert!((w * w.exp() - x).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn domains() {
        assert!(lambert_w(0, -0.5).is_err());
        assert!(lambert_w(-1, 0.1).is_err());
        assert!(lambert_w(-1, 0.0).is_err());
        assert!(lambert_w(1, 0.1).is_err());
    }
}
