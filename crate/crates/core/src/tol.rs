//! Numerical tolerance policy shared by all verdict-producing operations.

use serde::{Deserialize, Serialize};

/// Tolerances used throughout the crate. `eps_psd` bounds how negative an
/// eigenvalue may be before a matrix is rejected as non-positive; `eps_eq`
/// bounds entrywise equality checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub eps_psd: f64,
    pub eps_eq: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            eps_psd: 1e-10,
            eps_eq: 1e-9,
        }
    }
}

impl TolerancePolicy {
    pub fn new(eps_psd: f64, eps_eq: f64) -> crate::Result<Self> {
        if eps_psd <= 0.0 || eps_eq <= 0.0 {
            return Err(crate::Error::InvalidInput(
                "tolerances must be strictly positive".into(),
            ));
        }
        Ok(TolerancePolicy { eps_psd, eps_eq })
    }
}
