//! Numerical tolerance configuration shared by every evaluator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensionless thresholds and solver controls.
///
/// Every residual and margin in the crate is divided by a power of the
/// instance scale (mean squared development edge length) before it is
/// compared against these values, so a single configuration works for
/// octahedra of any size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Bound on normalized equality residuals.
    pub eps_rel: f64,
    /// Half-width of the band around zero in which a strict margin is
    /// reported as marginal instead of passing or failing.
    pub eps_geom: f64,
    /// Largest group-5 ratio spread accepted as affinely equivalent.
    pub alpha_yes: f64,
    /// Smallest group-5 ratio spread rejected as not equivalent.
    pub alpha_no: f64,
    /// Largest relative squared-distance mismatch accepted by the embedder.
    pub eps_embed: f64,
    /// Relative bracket width at which bisection stops.
    pub bisect_rel: f64,
    pub newton_max_iter: usize,
    /// Number of samples used to scan for sign changes.
    pub grid: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_rel: 1e-9,
            eps_geom: 1e-9,
            alpha_yes: 1e-7,
            alpha_no: 1e-4,
            eps_embed: 1e-6,
            bisect_rel: 1e-13,
            newton_max_iter: 50,
            grid: 1024,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidTolerance(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        unit("eps_rel", self.eps_rel)?;
        unit("eps_geom", self.eps_geom)?;
        unit("alpha_yes", self.alpha_yes)?;
        unit("alpha_no", self.alpha_no)?;
        unit("eps_embed", self.eps_embed)?;
        unit("bisect_rel", self.bisect_rel)?;
        if self.alpha_yes >= self.alpha_no {
            return Err(Error::InvalidTolerance(format!(
                "alpha_yes ({}) must be smaller than alpha_no ({})",
                self.alpha_yes, self.alpha_no
            )));
        }
        if self.grid < 8 {
            return Err(Error::InvalidTolerance(format!("grid must be at least 8, got {}", self.grid)));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::InvalidTolerance("newton_max_iter must be positive".into()));
        }
        Ok(())
    }
}
