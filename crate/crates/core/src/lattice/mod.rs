//! Lattice sums over Z^d \ {0}: shell tables, tail brackets, lattice zeta
//! values, the Kummer-subtracted summation engine, and the concrete sums
//! used by the rest of the crate.

mod critical;
mod epstein;
mod general;
mod kummer;
mod shells;
mod tail;

pub use critical::{
    accelerated_critical, beta_constant, critical_point, critical_sums, hardy_sum, mixed_sum,
    CurvePoint,
};
pub use epstein::lattice_zeta;
pub use general::{general_point, general_sums, general_sums_ln};
pub use kummer::{Family, KummerCtx, Lambda};
pub use shells::{
    ball_count, next_representable, partial_inverse_square_sum, r2_count, shell_count_2d, Shells,
};
pub use tail::{full_sum_bracket_2d, tail_bracket, TailDescriptor};

use crate::error::{Error, Result};
use crate::specfun::SpecialValue;
use serde::Serialize;

/// Tolerances and truncation limits shared by every sum and solve.
#[derive(Debug, Clone, Serialize)]
pub struct PrecisionConfig {
    /// Target absolute error, applied as `target_abs_tol * max(1, |value|)`.
    pub target_abs_tol: f64,
    /// Largest lattice radius any single sum may enumerate.
    pub max_radius: u64,
    /// Largest number of image shells in Bessel-accelerated sums.
    pub max_bessel_terms: usize,
    /// Relative residual tolerance for delta(mu) = delta solves.
    pub root_tol: f64,
    /// Abscissa tolerance for maximizer / minimizer refinement.
    pub maximizer_tol: f64,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig {
            target_abs_tol: 1e-12,
            max_radius: 8192,
            max_bessel_terms: 1 << 20,
            root_tol: 1e-13,
            maximizer_tol: 1e-9,
        }
    }
}

impl PrecisionConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.target_abs_tol > 0.0
            && self.root_tol > 0.0
            && self.maximizer_tol > 0.0
            && self.max_bessel_terms > 0
            && self.max_radius >= 8;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("precision config: tolerances must be > 0 and max_radius >= 8".into()))
        }
    }

    /// Mixed absolute/relative acceptance threshold for a value.
    pub fn tol_for(&self, value: f64) -> f64 {
        self.target_abs_tol * value.abs().max(1.0)
    }

    pub(crate) fn check(&self, what: &str, v: &SpecialValue) -> Result<()> {
        if v.abs_error_bound <= self.tol_for(v.value) {
            Ok(())
        } else {
            Err(Error::ToleranceUnreachable(format!(
                "{what}: error bound {:e} exceeds tolerance {:e}",
                v.abs_error_bound,
                self.tol_for(v.value)
            )))
        }
    }
}

/// Which evaluation route produced a triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Shell-by-shell summation of the summand plus a certified tail.
    Direct,
    /// Poisson-transformed Bessel-K image series.
    Accelerated,
}

/// The three sums f, g, h at one parameter value.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SumTriple {
    pub mu: f64,
    pub f: SpecialValue,
    pub g: SpecialValue,
    pub h: SpecialValue,
    pub method: Method,
}

/// Dimension / order pair with 2n - d > 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CaseDN {
    pub d: u32,
    pub n: u32,
}

impl CaseDN {
    pub fn new(d: u32, n: u32) -> Result<Self> {
        if d == 0 || d > 3 {
            return Err(Error::Domain(format!("dimension {d} not supported (1..=3)")));
        }
        if n == 0 || 2 * n <= d {
            return Err(Error::Inadmissible { d, n });
        }
        Ok(CaseDN { d, n })
    }

    /// (2 pi)^d
    pub fn two_pi_d(&self) -> f64 {
        (2.0 * std::f64::consts::PI).powi(self.d as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissibility() {
        assert!(CaseDN::new(2, 1).is_err());
        assert!(matches!(CaseDN::new(2, 1), Err(Error::Inadmissible { d: 2, n: 1 })));
        assert!(CaseDN::new(1, 1).is_ok());
        assert!(CaseDN::new(3, 2).is_ok());
        assert!(CaseDN::new(3, 1).is_err());
        assert!(matches!(CaseDN::new(4, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn config_validation() {
        assert!(PrecisionConfig::default().validate().is_ok());
        let bad = PrecisionConfig { max_radius: 4, ..Default::default() };
        assert!(bad.validate().is_err());
        let cfg = PrecisionConfig::default();
        assert_eq!(cfg.tol_for(0.5), 1e-12);
        assert_eq!(cfg.tol_for(10.0), 1e-11);
    }
}
