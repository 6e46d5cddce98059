//! Runtime home for every unpinned constant used by the decomposition,
//! rounding and checking routines.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::poly::{DEFAULT_ENUMERATION_LIMIT, MAX_VARS};

/// Environment variable overriding the default enumeration limit.
pub const ENUMERATION_LIMIT_ENV: &str = "PTFKIT_ENUMERATION_LIMIT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    /// Anti-concentration constant `C0 > 1`.
    pub c0: f64,
    /// `C = C0^2`, kept in sync with `c0`.
    pub c: f64,
    /// Multiplier inside the small-critical-index regularity loss.
    pub c_prime: f64,
    /// Rounding granularity constant `K`.
    pub k_granularity: f64,
    /// Leading factor of the approximator's regularity parameter
    /// `tau = (theta * eps / d)^{8d}`.
    pub theta: f64,
    /// Upper clamp on that regularity parameter; must stay at or below 1/2.
    pub tau_ceiling: f64,
    /// Factor inside the tail-norm condition of a good restriction.
    pub theta_dfn2: f64,
    /// Multiplier on the head-size parameter `alpha`.
    pub alpha_mult: f64,
    /// Exponent multiplier `w` in the `n^d (d/eps)^{w d}` weight bound.
    pub weight_exponent: f64,
    /// Exponent multiplier `a` in the `(1/tau)(d ln(1/tau))^{a d}` depth reference.
    pub depth_exponent: f64,
    /// Rate `b` in the informational tail bound `exp(-b t^{2/d})`.
    pub concentration_const: f64,
    /// Leading constant of the regular anti-concentration bound `O(d tau^{1/8d})`.
    pub anticoncentration_const: f64,
    /// Leading constant of the invariance bound `O(d tau^{1/8d})`.
    pub invariance_const: f64,
    /// Replaces the derived total depth budget when set (0 is allowed and forces
    /// every non-regular root to a Bad leaf).
    pub depth_budget_override: Option<u64>,
    /// Largest `n` for which cube-wide enumeration is performed.
    pub enumeration_limit: usize,
    /// Sample count for Monte Carlo fallbacks.
    pub mc_samples: usize,
    /// Seed for Monte Carlo fallbacks that are not handed an explicit seed.
    pub mc_seed: u64,
}

impl Default for TheoryConstants {
    fn default() -> Self {
        Self {
            c0: 3.0,
            c: 9.0,
            c_prime: 3.0,
            k_granularity: 16.0,
            theta: 20.0,
            tau_ceiling: 0.45,
            theta_dfn2: 1.0,
            alpha_mult: 1.0,
            weight_exponent: 4.0,
            depth_exponent: 10.0,
            concentration_const: 1.0,
            anticoncentration_const: 10.0,
            invariance_const: 10.0,
            depth_budget_override: None,
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
            mc_samples: 100_000,
            mc_seed: 0,
        }
    }
}

impl TheoryConstants {
    /// Defaults, with the enumeration limit taken from the environment if set.
    pub fn from_env() -> Result<Self> {
        let mut k = Self::default();
        if let Ok(v) = std::env::var(ENUMERATION_LIMIT_ENV) {
            k.set("enumeration_limit", &v)?;
        }
        Ok(k)
    }

    pub fn with_c0(mut self, c0: f64) -> Self {
        self.c0 = c0;
        self.c = c0 * c0;
        self
    }

    /// Sets a field by name from its textual value (`--const NAME=VALUE`).
    pub fn set(&mut self, name: &str, value: &str) -> Result<()> {
        let real = || -> Result<f64> {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("constant {name}: '{value}' is not a number")))
        };
        let integer = || -> Result<u64> {
            value
                .trim()
                .parse::<u64>()
                .map_err(|_| invalid(format!("constant {name}: '{value}' is not a nonnegative integer")))
        };
        match name {
            "c0" => *self = self.clone().with_c0(real()?),
            "c" => *self = self.clone().with_c0(real()?.sqrt()),
            "c_prime" => self.c_prime = real()?,
            "k_granularity" | "k" => self.k_granularity = real()?,
            "theta" => self.theta = real()?,
            "tau_ceiling" => self.tau_ceiling = real()?,
            "theta_dfn2" => self.theta_dfn2 = real()?,
            "alpha_mult" => self.alpha_mult = real()?,
            "weight_exponent" | "w" => self.weight_exponent = real()?,
            "depth_exponent" => self.depth_exponent = real()?,
            "concentration_const" => self.concentration_const = real()?,
            "anticoncentration_const" => self.anticoncentration_const = real()?,
            "invariance_const" => self.invariance_const = real()?,
            "depth_budget_override" => {
                self.depth_budget_override = match value.trim() {
                    "none" | "" => None,
                    _ => Some(integer()?),
                }
            }
            "enumeration_limit" => self.enumeration_limit = integer()? as usize,
            "mc_samples" => self.mc_samples = integer()? as usize,
            "mc_seed" => self.mc_seed = integer()?,
            _ => return Err(invalid(format!("unknown constant '{name}'"))),
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let reals = [
            ("c0", self.c0),
            ("c_prime", self.c_prime),
            ("k_granularity", self.k_granularity),
            ("theta", self.theta),
            ("tau_ceiling", self.tau_ceiling),
            ("theta_dfn2", self.theta_dfn2),
            ("alpha_mult", self.alpha_mult),
            ("weight_exponent", self.weight_exponent),
            ("depth_exponent", self.depth_exponent),
            ("concentration_const", self.concentration_const),
            ("anticoncentration_const", self.anticoncentration_const),
            ("invariance_const", self.invariance_const),
        ];
        for (name, v) in reals {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("constant {name} must be positive and finite, got {v}")));
            }
        }
        if self.c0 <= 1.0 {
            return Err(invalid("c0 must exceed 1"));
        }
        if (self.c - self.c0 * self.c0).abs() > 1e-12 * self.c.max(1.0) {
            return Err(invalid("c must equal c0^2"));
        }
        if self.tau_ceiling > 0.5 {
            return Err(invalid("tau_ceiling must not exceed 1/2"));
        }
        if self.enumeration_limit == 0 || self.enumeration_limit > MAX_VARS {
            return Err(invalid(format!("enumeration_limit must lie in [1, {MAX_VARS}]")));
        }
        if self.mc_samples == 0 {
            return Err(invalid("mc_samples must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_consistent() {
        let k = TheoryConstants::default();
        k.validate().unwrap();
        assert!((k.c - k.c0 * k.c0).abs() < 1e-12);
    }

    #[test]
    fn set_by_name() {
        let mut k = TheoryConstants::default();
        k.set("c0", "4").unwrap();
        assert_eq!(k.c, 16.0);
        k.set("c", "25").unwrap();
        assert_eq!(k.c0, 5.0);
        k.set("depth_budget_override", "0").unwrap();
        assert_eq!(k.depth_budget_override, Some(0));
        k.set("depth_budget_override", "none").unwrap();
        assert_eq!(k.depth_budget_override, None);
        assert!(k.set("nope", "1").is_err());
        assert!(k.set("theta", "-1").is_err());
        assert!(k.set("c0", "1").is_err());
        assert!(k.set("tau_ceiling", "0.7").is_err());
    }
}
