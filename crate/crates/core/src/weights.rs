//! Eigenvalue weight families.
//!
//! A weight family assigns a strictly positive value to every multi-index in
//! N^d as a product of univariate factors (times a global scale). Both shipped
//! families are nonincreasing in every coordinate, so the largest value sits at
//! the all-ones multi-index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightFamily {
    /// Product weights with univariate factor `gamma_nu * max(1,k)^(-2 alpha)`,
    /// `alpha > 1/2` and optional per-coordinate scales `gamma_nu > 0`
    /// (all ones when omitted).
    Algebraic {
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<Vec<f64>>,
    },
    /// Geometric weights `A * q^((k_1-1) + ... + (k_d-1))` with `A >= 1` and
    /// `q` in `(0,1)`.
    Exponential { a: f64, q: f64 },
}

impl WeightFamily {
    pub fn algebraic(alpha: f64) -> Self {
        WeightFamily::Algebraic { alpha, gamma: None }
    }

    pub fn exponential(a: f64, q: f64) -> Self {
        WeightFamily::Exponential { a, q }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            WeightFamily::Algebraic { alpha, gamma } => {
                if !alpha.is_finite() || *alpha <= 0.5 {
                    return Err(Error::InvalidParameter(format!(
                        "algebraic weights need alpha > 1/2, got {alpha}"
                    )));
                }
                if let Some(g) = gamma {
                    if g.len() != d {
                        return Err(Error::InvalidParameter(format!(
                            "gamma has {} entries, dimension is {d}",
                            g.len()
                        )));
                    }
                    if g.iter().any(|&v| !v.is_finite() || v <= 0.0) {
                        return Err(Error::InvalidParameter(
                            "all coordinate weights gamma must be > 0".into(),
                        ));
                    }
                }
            }
            WeightFamily::Exponential { a, q } => {
                if !a.is_finite() || *a < 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "exponential weights need A >= 1, got {a}"
                    )));
                }
                if !q.is_finite() || *q <= 0.0 || *q >= 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "exponential weights need q in (0,1), got {q}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Univariate factor for coordinate `nu` (0-based) at 1-based index `k`.
    /// Nonincreasing in `k` with maximum at `k = 1`.
    pub fn univariate(&self, nu: usize, k: usize) -> f64 {
        debug_assert!(k >= 1);
        match self {
            WeightFamily::Algebraic { alpha, gamma } => {
                let g = gamma.as_ref().map_or(1.0, |g| g[nu]);
                g * (k.max(1) as f64).powf(-2.0 * alpha)
            }
            WeightFamily::Exponential { q, .. } => q.powi(k as i32 - 1),
        }
    }

    /// Global scale applied on top of the univariate product.
    pub fn scale(&self) -> f64 {
        match self {
            WeightFamily::Algebraic { .. } => 1.0,
            WeightFamily::Exponential { a, .. } => *a,
        }
    }

    /// Product value at a multi-index (1-based coordinates).
    pub fn value(&self, index: &[usize]) -> f64 {
        self.scale()
            * index
                .iter()
                .enumerate()
                .map(|(nu, &k)| self.univariate(nu, k))
                .product::<f64>()
    }
}
