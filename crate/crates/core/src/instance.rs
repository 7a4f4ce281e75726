//! Problem instances: a basis family, a weight family, and the enumerated
//! spectrum tying flat indices to multi-indices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisFamily, BasisKind};
use crate::coeff::CoefficientFunction;
use crate::error::{Error, Result};
use crate::spectral::{enumerate_eigenvalues, SpectralData};
use crate::weights::WeightFamily;

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    basis: BasisFamily,
    weights: WeightFamily,
    spectral: SpectralData,
}

impl ProblemInstance {
    pub fn new(kind: BasisKind, weights: WeightFamily, d: usize, m_max: usize) -> Result<Self> {
        let basis = BasisFamily::new(kind, d)?;
        let spectral = enumerate_eigenvalues(&weights, d, m_max)?;
        Ok(Self {
            basis,
            weights,
            spectral,
        })
    }

    pub fn basis(&self) -> &BasisFamily {
        &self.basis
    }

    pub fn weights(&self) -> &WeightFamily {
        &self.weights
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    pub fn d(&self) -> usize {
        self.basis.d
    }

    /// Truncation length of the enumerated spectrum.
    pub fn truncation(&self) -> usize {
        self.spectral.len()
    }

    /// Basis values eta_k(x) for a list of 1-based flat indices.
    pub fn eval_basis(&self, indices: &[usize], x: &[f64]) -> Result<Vec<Complex64>> {
        self.basis.check_point(x)?;
        indices
            .iter()
            .map(|&k| Ok(self.basis.eval_multi(self.spectral.multi_index(k)?, x)))
            .collect()
    }

    /// Single basis value eta_k(x) without a domain check (hot path; callers
    /// pass nodes produced by the sampler).
    pub(crate) fn eval_basis_unchecked(&self, k: usize, x: &[f64]) -> Result<Complex64> {
        Ok(self.basis.eval_multi(self.spectral.multi_index(k)?, x))
    }

    /// Pointwise value of a coefficient function: sum of a_k eta_k(x).
    pub fn eval_function(&self, f: &CoefficientFunction, x: &[f64]) -> Result<Complex64> {
        self.basis.check_point(x)?;
        let mut total = Complex64::ZERO;
        for (k, a) in f.iter() {
            total += a * self.basis.eval_multi(self.spectral.multi_index(k)?, x);
        }
        Ok(total)
    }
}

/// JSON-serializable problem description; `M` is the truncation length of the
/// enumerated spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub basis: BasisConfig,
    pub weights: WeightFamily,
    pub d: usize,
    #[serde(rename = "M")]
    pub m_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisConfig {
    pub kind: BasisKind,
}

impl ProblemConfig {
    pub fn build(&self) -> Result<ProblemInstance> {
        ProblemInstance::new(self.basis.kind, self.weights.clone(), self.d, self.m_max)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("config parse error: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
