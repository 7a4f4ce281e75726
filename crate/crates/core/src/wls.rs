//! Scaled design matrices, the spectral acceptance test with resampling, and
//! the weighted least squares solve.
//!
//! For an n-node sample set X the design matrix L has entries
//! `eta_j(x_i) / sqrt(h_m(x_i))` and `H = (1/n) L^* L` is the empirical Gram
//! matrix of the weighted basis. A sample set is accepted when the spectral
//! deviation `||H - I||` is at most 1/2; the threshold is fixed, not
//! configurable, because the error bounds downstream are tied to it. On an
//! accepted set the approximant coefficients solve the over-determined system
//! `L c = f_tilde` by QR, never through the normal equations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::coeff::CoefficientFunction;
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::sampler::{SampleSet, SamplingDensity};
use crate::stream::StreamId;

/// Acceptance threshold on the spectral deviation of H from the identity.
pub const ACCEPTANCE_THRESHOLD: f64 = 0.5;

/// Default cap on discarded sample sets in the accept loop.
pub const DEFAULT_MAX_RETRIES: u32 = 100;

#[derive(Debug, Clone)]
pub struct DesignMatrices {
    /// n x m weighted design matrix.
    pub l: DMatrix<Complex64>,
    /// m x m empirical Gram matrix (1/n) L^* L.
    pub h: DMatrix<Complex64>,
    /// Spectral norm of H - I.
    pub deviation: f64,
    /// Extreme eigenvalues of H, from the same decomposition as `deviation`.
    h_eig_min: f64,
    h_eig_max: f64,
}

impl DesignMatrices {
    pub fn n(&self) -> usize {
        self.l.nrows()
    }

    pub fn m(&self) -> usize {
        self.l.ncols()
    }

    pub fn h_eig_min(&self) -> f64 {
        self.h_eig_min
    }

    pub fn h_eig_max(&self) -> f64 {
        self.h_eig_max
    }

    pub fn is_accepted(&self) -> bool {
        self.deviation <= ACCEPTANCE_THRESHOLD
    }
}

/// Build the design matrices for a sample set drawn with the same m.
pub fn assemble(instance: &ProblemInstance, m: usize, set: &SampleSet) -> Result<DesignMatrices> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    if set.m != m {
        return Err(Error::ContractViolation(format!(
            "sample set was drawn with m = {}, assembling with m = {m}",
            set.m
        )));
    }
    if set.n < m {
        return Err(Error::InvalidParameter(format!(
            "need n >= m, got n = {} < m = {m}",
            set.n
        )));
    }
    let n = set.n;
    let mut l = DMatrix::zeros(n, m);
    for (i, (x, &h)) in set.nodes.iter().zip(&set.h_values).enumerate() {
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::DegenerateNode(format!(
                "h_m(x^{i}) = {h}; sampler output is corrupt"
            )));
        }
        let scale = 1.0 / h.sqrt();
        for j in 1..=m {
            l[(i, j - 1)] = instance.eval_basis_unchecked(j, x)? * scale;
        }
    }
    let h_mat = l.adjoint() * &l / Complex64::new(n as f64, 0.0);
    let dev = &h_mat - DMatrix::identity(m, m);
    let eig = nalgebra::SymmetricEigen::new(dev);
    let mut deviation = 0.0f64;
    let mut min_shift = f64::INFINITY;
    let mut max_shift = f64::NEG_INFINITY;
    for &e in eig.eigenvalues.iter() {
        deviation = deviation.max(e.abs());
        min_shift = min_shift.min(e);
        max_shift = max_shift.max(e);
    }
    Ok(DesignMatrices {
        l,
        h: h_mat,
        deviation,
        h_eig_min: 1.0 + min_shift,
        h_eig_max: 1.0 + max_shift,
    })
}

/// Draw n-node sample sets until one passes the acceptance test; returns the
/// accepted set and the number of discarded ones. Realizes the conditional
/// distribution given the acceptance event.
pub fn draw_accepted(
    instance: &ProblemInstance,
    m: usize,
    n: usize,
    stream: StreamId,
    max_retries: u32,
) -> Result<(SampleSet, u32)> {
    if n < m {
        return Err(Error::InvalidParameter(format!(
            "need n >= m, got n = {n} < m = {m}"
        )));
    }
    let density = SamplingDensity::new(instance, m)?;
    let mut rng = stream.rng();
    let mut last_deviation = f64::NAN;
    for attempt in 0..=max_retries {
        let set = density.draw_nodes_with(n, stream, &mut rng)?;
        let matrices = assemble(instance, m, &set)?;
        if matrices.is_accepted() {
            return Ok((set, attempt));
        }
        last_deviation = matrices.deviation;
    }
    Err(Error::AcceptanceFailure {
        attempts: max_retries + 1,
        last_deviation,
    })
}

/// Coefficients of the weighted least squares approximant, with diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct WlsModel {
    pub m: usize,
    pub coeffs: Vec<Complex64>,
    /// Accepted spectral deviation of the design used for the solve.
    pub deviation: f64,
    /// Number of sample sets discarded before acceptance (0 when the set was
    /// supplied directly).
    pub retries: u32,
    /// Eigenvalue-ratio bound on the conditioning of H.
    pub condition_proxy: f64,
    /// Relative residual of the normal equations (L^* L) c = L^* f_tilde.
    pub normal_residual: f64,
    /// The accepted sample set the model was fit on.
    pub sample: SampleSet,
}

impl WlsModel {
    /// Approximant as a coefficient function on flat indices 1..=m.
    pub fn as_coefficient_function(&self) -> CoefficientFunction {
        CoefficientFunction::from_pairs(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| (j + 1, c)),
        )
        .expect("indices are positive")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}

/// Solve the weighted least squares problem on an accepted sample set.
/// `samples` holds the raw function values f(x^i).
pub fn solve(
    instance: &ProblemInstance,
    m: usize,
    set: &SampleSet,
    samples: &[Complex64],
) -> Result<WlsModel> {
    if samples.len() != set.n {
        return Err(Error::InvalidParameter(format!(
            "got {} samples for {} nodes",
            samples.len(),
            set.n
        )));
    }
    let matrices = assemble(instance, m, set)?;
    if !matrices.is_accepted() {
        return Err(Error::ContractViolation(format!(
            "sample set not accepted: deviation {} > {ACCEPTANCE_THRESHOLD}",
            matrices.deviation
        )));
    }
    let f_tilde = DVector::from_iterator(
        set.n,
        samples
            .iter()
            .zip(&set.h_values)
            .map(|(&f, &h)| f / Complex64::new(h.sqrt(), 0.0)),
    );

    // Thin QR of L; c = R^{-1} Q^* f_tilde.
    let qr = matrices.l.clone().qr();
    let qtf = qr.q().adjoint() * &f_tilde;
    let coeffs = qr
        .r()
        .solve_upper_triangular(&qtf)
        .ok_or_else(|| Error::ContractViolation("rank-deficient accepted design".into()))?;

    // Diagnostic: relative residual of the normal equations.
    let lstar_f = matrices.l.adjoint() * &f_tilde;
    let lstar_l_c = matrices.l.adjoint() * (&matrices.l * &coeffs);
    let rhs_norm = lstar_f.norm();
    let normal_residual = if rhs_norm > 0.0 {
        (&lstar_l_c - &lstar_f).norm() / rhs_norm
    } else {
        lstar_l_c.norm()
    };

    Ok(WlsModel {
        m,
        coeffs: coeffs.iter().copied().collect(),
        deviation: matrices.deviation,
        retries: 0,
        condition_proxy: matrices.h_eig_max / matrices.h_eig_min,
        normal_residual,
        sample: set.clone(),
    })
}

/// Full pipeline: draw until accepted, evaluate f at the nodes, solve.
pub fn approximate(
    instance: &ProblemInstance,
    m: usize,
    n: usize,
    f: &CoefficientFunction,
    stream: StreamId,
    max_retries: u32,
) -> Result<WlsModel> {
    let (set, retries) = draw_accepted(instance, m, n, stream, max_retries)?;
    let samples = evaluate_at_nodes(instance, f, &set)?;
    let mut model = solve(instance, m, &set, &samples)?;
    model.retries = retries;
    Ok(model)
}

/// f(x^i) for every node of a sample set.
pub fn evaluate_at_nodes(
    instance: &ProblemInstance,
    f: &CoefficientFunction,
    set: &SampleSet,
) -> Result<Vec<Complex64>> {
    set.nodes
        .iter()
        .map(|x| instance.eval_function(f, x))
        .collect()
}

/// Outcome of the inverse-norm bound check `||(L^* L)^{-1}|| <= 2/n`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InverseNormCheck {
    /// Computed norm 1 / (n * lambda_min(H)).
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Check the inverse-norm bound on an accepted design. A failure would
/// falsify the acceptance invariant and must never occur.
pub fn inverse_norm_bound_check(matrices: &DesignMatrices) -> Result<InverseNormCheck> {
    if !matrices.is_accepted() {
        return Err(Error::ContractViolation(format!(
            "inverse-norm check requires deviation <= 1/2, got {}",
            matrices.deviation
        )));
    }
    let n = matrices.n() as f64;
    let value = 1.0 / (n * matrices.h_eig_min);
    let bound = 2.0 / n;
    Ok(InverseNormCheck {
        value,
        bound,
        holds: value <= bound,
    })
}

/// Exact G-norm error of the approximant against a coefficient function:
/// the squared error is `sum_{k<=m} |a_k - c_k|^2 + sum_{k>m} |a_k|^2`.
pub fn g_error_sq(
    instance: &ProblemInstance,
    model: &WlsModel,
    f: &CoefficientFunction,
) -> Result<f64> {
    let truncation = instance.truncation();
    if f.max_index() > truncation {
        return Err(Error::TruncationExceeded {
            needed: f.max_index(),
            available: truncation,
        });
    }
    let mut total = 0.0;
    for (j, &c) in model.coeffs.iter().enumerate() {
        total += (f.coefficient(j + 1) - c).norm_sqr();
    }
    total += f.tail_g_norm_sq(model.m);
    Ok(total)
}

pub fn g_error(
    instance: &ProblemInstance,
    model: &WlsModel,
    f: &CoefficientFunction,
) -> Result<f64> {
    Ok(g_error_sq(instance, model, f)?.sqrt())
}
