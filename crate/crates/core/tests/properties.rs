//! Property checks across module boundaries.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use torus_sobolev::algebraic::{expansion_dn, leading_constant, theta_dn};
use torus_sobolev::curve::{theta_model, ThetaModel};
use torus_sobolev::field::{verify_inequality, FourierInput, Inequality};
use torus_sobolev::largen::limit_1d;
use torus_sobolev::{CaseDN, PrecisionConfig};

fn cfg() -> PrecisionConfig {
    PrecisionConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn theta_increases_and_stays_below_theta0(a in 1.0f64..200.0, b in 1.0f64..200.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-3);
        let c = cfg();
        let t_lo = theta_model(ThetaModel::Exact, lo, &c).unwrap().theta;
        let t_hi = theta_model(ThetaModel::Exact, hi, &c).unwrap().theta;
        prop_assert!(t_hi > t_lo);
        let t0 = theta_model(ThetaModel::Theta0, hi, &c).unwrap().theta;
        prop_assert!(t_hi <= t0 + 1e-12);
    }

    #[test]
    fn one_dim_limit_in_range(z in 1.0001f64..40.0) {
        prop_assume!((z - z.round()).abs() > 1e-9);
        let (_, _, f) = limit_1d(z).unwrap();
        prop_assert!((-1.0 / std::f64::consts::PI..=0.0).contains(&f));
    }

    #[test]
    fn algebraic_theta_below_leading_term(delta in 1.5f64..500.0, n in 2u32..4) {
        let case = CaseDN::new(2, n).unwrap();
        let t = theta_dn(case, delta, &cfg()).unwrap().theta;
        let lead = leading_constant(case).unwrap() * delta.powf(1.0 / n as f64);
        prop_assert!(t < lead);
        prop_assert!(expansion_dn(case, delta).unwrap().is_finite());
    }
}

fn random_input(rng: &mut ChaCha8Rng, modes: usize, kmax: i64) -> FourierInput {
    let mut half: Vec<((i64, i64), Complex64)> = Vec::new();
    while half.len() < modes {
        let k = (rng.gen_range(-kmax..=kmax), rng.gen_range(-kmax..=kmax));
        if k == (0, 0) || half.iter().any(|(m, _)| *m == k || *m == (-k.0, -k.1)) {
            continue;
        }
        let amp = rng.gen_range(0.01..1.0) * (k.0 * k.0 + k.1 * k.1) as f64;
        half.push((k, Complex64::from_polar(1.0 / amp, rng.gen_range(0.0..6.3))));
    }
    FourierInput::from_half(2, half).unwrap()
}

#[test]
fn random_fields_satisfy_all_inequalities() {
    let c = cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..12 {
        let u = random_input(&mut rng, 6, 4);
        let (l2, grad, lap) = { let n = u.norms(); (n.l2, n.grad, n.lap) };
        assert!(grad >= l2 && lap >= grad, "norm ordering");
        for w in [Inequality::LogTheta0, Inequality::LogDoubleLog, Inequality::Algebraic(CaseDN::new(2, 2).unwrap())] {
            let r = verify_inequality(&u, w, &c).unwrap();
            assert!(r.holds && r.delta >= 1.0, "{w:?}: {r:?}");
            assert!(r.lhs > 0.0);
        }
    }
}

#[test]
fn single_mode_sup_is_amplitude() {
    let u = FourierInput::from_half(2, vec![((1, 2), Complex64::new(0.3, 0.4))]).unwrap();
    let (s, _) = u.sup_abs();
    approx::assert_relative_eq!(s, 2.0 * 0.5 / (2.0 * std::f64::consts::PI), max_relative = 1e-10);
}
