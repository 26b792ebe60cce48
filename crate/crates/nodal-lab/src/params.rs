//! Problem parameters: dimension, subcriticality, boundary condition.

use crate::error::{Error, Result};
use serde::Serialize;

/// Boundary condition for solutions on the unit ball, or the whole-space
/// normalization `w(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bc {
    Dirichlet,
    Neumann,
    WholeSpace,
}

impl std::fmt::Display for Bc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bc::Dirichlet => write!(f, "dirichlet"),
            Bc::Neumann => write!(f, "neumann"),
            Bc::WholeSpace => write!(f, "whole-space"),
        }
    }
}

/// Dimension and exponent data for `-Delta u = |u|^{p-1} u` with
/// `p = (n+2)/(n-2) - eps`.
///
/// `eps` must lie in `(0, 4/(n-2))` so that `p > 1` stays superlinear and
/// subcritical. `eps = 0` (the critical exponent) is admitted only through
/// [`ProblemParams::critical`], as a validation mode: at `eps = 0` the
/// whole-space profile with `w(0) = 1` is known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemParams {
    n: u32,
    eps: f64,
    p: f64,
}

impl ProblemParams {
    /// Subcritical parameters. Requires `n >= 3` and `0 < eps < 4/(n-2)`.
    pub fn new(n: u32, eps: f64) -> Result<Self> {
        Self::validate_dimension(n)?;
        let eps_max = Self::eps_max(n);
        if !eps.is_finite() || eps <= 0.0 || eps >= eps_max {
            return Err(Error::InvalidParams(format!(
                "eps = {eps} outside (0, {eps_max}) for n = {n}"
            )));
        }
        Ok(Self {
            n,
            eps,
            p: Self::critical_exponent(n) - eps,
        })
    }

    /// Critical-exponent parameters (`eps = 0`), for validating the solver
    /// against the closed-form profile `(1 + r^2/(n(n-2)))^{-(n-2)/2}`.
    pub fn critical(n: u32) -> Result<Self> {
        Self::validate_dimension(n)?;
        Ok(Self {
            n,
            eps: 0.0,
            p: Self::critical_exponent(n),
        })
    }

    fn validate_dimension(n: u32) -> Result<()> {
        if n < 3 {
            return Err(Error::InvalidParams(format!("dimension n = {n}, need n >= 3")));
        }
        Ok(())
    }

    /// The critical Sobolev exponent `(n+2)/(n-2)`.
    pub fn critical_exponent(n: u32) -> f64 {
        (n as f64 + 2.0) / (n as f64 - 2.0)
    }

    /// Upper end of the admissible `eps` range: `4/(n-2)`, where `p` reaches 1.
    pub fn eps_max(n: u32) -> f64 {
        4.0 / (n as f64 - 2.0)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Dimension as a float, for arithmetic.
    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The nonlinearity exponent `p = (n+2)/(n-2) - eps`.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// True for the `eps = 0` validation mode.
    pub fn is_critical(&self) -> bool {
        self.eps == 0.0
    }

    /// Closed-form whole-space profile at the critical exponent,
    /// `(1 + r^2/(n(n-2)))^{-(n-2)/2}`, normalized to 1 at the origin.
    /// Defined for any `r >= 0`; positive and strictly decreasing.
    pub fn critical_profile(&self, r: f64) -> f64 {
        let nf = self.nf();
        (1.0 + r * r / (nf * (nf - 2.0))).powf(-(nf - 2.0) / 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_interior_eps() {
        let p = ProblemParams::new(3, 0.5).unwrap();
        assert_eq!(p.n(), 3);
        assert_eq!(p.p(), 5.0 - 0.5);
        assert!(!p.is_critical());
    }

    #[test]
    fn rejects_eps_at_or_beyond_bounds() {
        assert!(ProblemParams::new(3, 0.0).is_err());
        assert!(ProblemParams::new(3, 4.0).is_err());
        assert!(ProblemParams::new(3, 4.1).is_err());
        assert!(ProblemParams::new(5, 4.0 / 3.0).is_err());
        assert!(ProblemParams::new(3, f64::NAN).is_err());
        assert!(ProblemParams::new(3, -0.1).is_err());
    }

    #[test]
    fn rejects_low_dimension() {
        assert!(ProblemParams::new(2, 0.1).is_err());
        assert!(ProblemParams::critical(1).is_err());
    }

    #[test]
    fn critical_mode_has_eps_zero() {
        let p = ProblemParams::critical(4).unwrap();
        assert!(p.is_critical());
        assert_eq!(p.p(), 3.0);
    }

    #[test]
    fn critical_profile_known_values() {
        // n = 3: profile (1 + r^2/3)^{-1/2} gives 2^{-1/2} at r = sqrt(3)
        // and 1/2 at r = 3.
        let p = ProblemParams::critical(3).unwrap();
        assert!((p.critical_profile(3.0_f64.sqrt()) - 0.5_f64.sqrt()).abs() < 1e-15);
        assert!((p.critical_profile(3.0) - 0.5).abs() < 1e-15);
        assert_eq!(p.critical_profile(0.0), 1.0);
    }

    #[test]
    fn eps_max_matches_p_equals_one() {
        for n in 3..10 {
            let eps = ProblemParams::eps_max(n);
            assert!((ProblemParams::critical_exponent(n) - eps - 1.0).abs() < 1e-14);
        }
    }
}
