use serde::Serialize;

use crate::CliError;

/// Environment variables `G2ROLL_TOL_<NAME>` override the defaults.
pub const ENV_PREFIX: &str = "G2ROLL_TOL_";

/// Acceptance thresholds shared by the commands.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Largest relative residual of any algebraic identity.
    pub algebra: f64,
    /// Largest `‖Φ · DΦ‖` at `ρ = 3`.
    pub phi_annihilation: f64,
    /// Residual a non-flat sample must reach to count as a contrast.
    pub phi_contrast: f64,
    /// Share of samples that must reach `phi_contrast` when `ρ ≠ 3`.
    pub phi_contrast_fraction: f64,
    /// Largest `|A|` accepted as flat at `ρ = 3`.
    pub flatness: f64,
    /// Largest relative error of `r̄` against the closed form.
    pub rbar_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebra: 1e-12,
            phi_annihilation: 1e-10,
            phi_contrast: 0.05,
            phi_contrast_fraction: 0.95,
            flatness: 1e-3,
            rbar_rel: 1e-2,
        }
    }
}

impl Tolerances {
    /// Defaults overridden by the process environment.
    pub fn from_env() -> Result<Self, CliError> {
        Self::default().with_overrides(std::env::vars())
    }

    /// Applies `G2ROLL_TOL_<NAME>=value` pairs, ignoring other keys.
    pub fn with_overrides<I, K, V>(mut self, vars: I) -> Result<Self, CliError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (k, v) in vars {
            let Some(name) = k.as_ref().strip_prefix(ENV_PREFIX) else { continue };
            let slot = match name.to_ascii_lowercase().as_str() {
                "algebra" => &mut self.algebra,
                "phi_annihilation" => &mut self.phi_annihilation,
                "phi_contrast" => &mut self.phi_contrast,
                "phi_contrast_fraction" => &mut self.phi_contrast_fraction,
                "flatness" => &mut self.flatness,
                "rbar_rel" => &mut self.rbar_rel,
                _ => return Err(CliError::Usage(format!("unknown tolerance {}", k.as_ref()))),
            };
            let value: f64 =
                v.as_ref().trim().parse().map_err(|_| CliError::Usage(format!("{} is not a number", k.as_ref())))?;
            if !(value > 0.0 && value.is_finite()) {
                return Err(CliError::Usage(format!("{} must be positive", k.as_ref())));
            }
            *slot = value;
        }
        if self.phi_contrast_fraction > 1.0 {
            return Err(CliError::Usage("phi_contrast_fraction must not exceed 1".into()));
        }
        Ok(self)
    }
}
