//! Tensor-product orthonormal basis families.
//!
//! Three families are shipped, each orthonormal in the weighted L2 space of its
//! box domain with a constant reference density:
//!
//! * `Fourier` on `[0,1]^d` with uniform density 1: complex exponentials,
//!   frequencies ordered `0, 1, -1, 2, -2, ...` per coordinate.
//! * `Legendre` on `[-1,1]^d` with density `2^-d`: normalized Legendre
//!   polynomials `sqrt(2k-1) P_{k-1}`.
//! * `Cosine` on `[0,1]^d` with uniform density 1: `1, sqrt(2) cos(pi x),
//!   sqrt(2) cos(2 pi x), ...`.
//!
//! The d-variate basis value is always the product of univariate values; flat
//! index 1 is the constant function in every family.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Fourier,
    Legendre,
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisFamily {
    pub kind: BasisKind,
    pub d: usize,
}

impl BasisFamily {
    pub fn new(kind: BasisKind, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension d must be >= 1".into()));
        }
        Ok(Self { kind, d })
    }

    /// Univariate domain (the box domain is this interval to the power d).
    pub fn interval(&self) -> (f64, f64) {
        match self.kind {
            BasisKind::Fourier | BasisKind::Cosine => (0.0, 1.0),
            BasisKind::Legendre => (-1.0, 1.0),
        }
    }

    /// Value of the constant reference density rho_d on the domain.
    pub fn rho(&self) -> f64 {
        match self.kind {
            BasisKind::Fourier | BasisKind::Cosine => 1.0,
            BasisKind::Legendre => 0.5_f64.powi(self.d as i32),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let (lo, hi) = self.interval();
        x.len() == self.d && x.iter().all(|&c| c >= lo && c <= hi)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(format!(
                "{x:?} not in {:?}^{}",
                self.interval(),
                self.d
            )))
        }
    }

    /// Univariate basis value for 1-based index `k`.
    pub fn eval_univariate(&self, k: usize, x: f64) -> Complex64 {
        debug_assert!(k >= 1);
        match self.kind {
            BasisKind::Fourier => {
                let freq = fourier_frequency(k) as f64;
                Complex64::from_polar(1.0, 2.0 * PI * freq * x)
            }
            BasisKind::Legendre => {
                let deg = k - 1;
                let norm = ((2 * k - 1) as f64).sqrt();
                Complex64::new(norm * legendre_poly(deg, x), 0.0)
            }
            BasisKind::Cosine => {
                if k == 1 {
                    Complex64::new(1.0, 0.0)
                } else {
                    let j = (k - 1) as f64;
                    Complex64::new(std::f64::consts::SQRT_2 * (j * PI * x).cos(), 0.0)
                }
            }
        }
    }

    /// d-variate basis value at a multi-index (1-based coordinates).
    pub fn eval_multi(&self, index: &[usize], x: &[f64]) -> Complex64 {
        debug_assert_eq!(index.len(), x.len());
        index
            .iter()
            .zip(x)
            .map(|(&k, &c)| self.eval_univariate(k, c))
            .product()
    }
}

/// Frequency attached to univariate Fourier index k: 0, 1, -1, 2, -2, ...
pub fn fourier_frequency(k: usize) -> i64 {
    if k == 1 {
        0
    } else if k.is_multiple_of(2) {
        (k / 2) as i64
    } else {
        -((k / 2) as i64)
    }
}

/// Legendre polynomial P_n(x) by the three-term recurrence
/// (n+1) P_{n+1}(x) = (2n+1) x P_n(x) - n P_{n-1}(x).
pub fn legendre_poly(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if n == 1 {
        return x;
    }
    let mut p_prev = 1.0;
    let mut p_curr = x;
    for k in 1..n {
        let p_next = ((2 * k + 1) as f64 * x * p_curr - k as f64 * p_prev) / (k + 1) as f64;
        p_prev = p_curr;
        p_curr = p_next;
    }
    p_curr
}
