//! Functions represented by their coefficients against the orthonormal basis.
//!
//! A `CoefficientFunction` stores finitely many coefficients `a_k` on flat
//! indices; norms and projections are exact in coefficient space by
//! orthonormality: the G-norm squared is the plain sum of squared moduli, the
//! F-norm squared weights each term by `1/lambda_k`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralData;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CoefficientFunction {
    /// Flat index (1-based) -> coefficient.
    entries: BTreeMap<usize, Complex64>,
}

impl CoefficientFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Build from (flat index, coefficient) pairs; zero coefficients are kept out.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Complex64)>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (k, a) in pairs {
            if k == 0 {
                return Err(Error::InvalidParameter(
                    "flat indices are 1-based; got 0".into(),
                ));
            }
            if a != Complex64::ZERO {
                entries.insert(k, a);
            }
        }
        Ok(Self { entries })
    }

    /// The single-mode function `a * eta_k`.
    pub fn single_mode(k: usize, a: Complex64) -> Result<Self> {
        Self::from_pairs([(k, a)])
    }

    /// Random function of unit F-norm supported on indices 1..=support, with
    /// coefficients drawn proportional to sqrt(lambda_k) times a standard
    /// normal, then normalized. Requires `support <= spectral.len()`.
    pub fn random_unit_f_norm(
        spectral: &SpectralData,
        support: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if support == 0 || support > spectral.len() {
            return Err(Error::TruncationExceeded {
                needed: support,
                available: spectral.len(),
            });
        }
        let mut entries = BTreeMap::new();
        for k in 1..=support {
            let g = Complex64::new(standard_normal(rng), standard_normal(rng));
            entries.insert(k, g * spectral.lambda(k)?.sqrt());
        }
        let mut f = Self { entries };
        let norm = f.f_norm_sq(spectral)?.sqrt();
        if norm == 0.0 {
            return Err(Error::SamplingFailure(
                "degenerate random coefficient draw".into(),
            ));
        }
        for a in f.entries.values_mut() {
            *a /= norm;
        }
        Ok(f)
    }

    pub fn coefficient(&self, k: usize) -> Complex64 {
        self.entries.get(&k).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.entries.iter().map(|(&k, &a)| (k, a))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest supported flat index (0 for the zero function).
    pub fn max_index(&self) -> usize {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    /// G-norm squared: sum of |a_k|^2.
    pub fn g_norm_sq(&self) -> f64 {
        self.entries.values().map(|a| a.norm_sqr()).sum()
    }

    /// F-norm squared: sum of |a_k|^2 / lambda_k. Errors if the support
    /// exceeds the enumerated spectrum.
    pub fn f_norm_sq(&self, spectral: &SpectralData) -> Result<f64> {
        let mut total = 0.0;
        for (&k, a) in &self.entries {
            total += a.norm_sqr() / spectral.lambda(k)?;
        }
        Ok(total)
    }

    /// Keep coefficients with flat index <= m, zero the rest.
    pub fn truncate(&self, m: usize) -> Self {
        Self {
            entries: self
                .entries
                .range(..=m)
                .map(|(&k, &a)| (k, a))
                .collect(),
        }
    }

    /// G-norm squared of the tail beyond index m (the residual of `truncate`).
    pub fn tail_g_norm_sq(&self, m: usize) -> f64 {
        self.entries
            .range(m + 1..)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// Standard normal draw by Box-Muller from two uniforms.
pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
