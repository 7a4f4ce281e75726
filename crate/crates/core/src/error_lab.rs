//! Monte Carlo experiments: randomized-error estimates against the
//! finite-sample bound, spectral concentration counts, and the
//! exponential-decay check for geometric spectra.
//!
//! Replications are embarrassingly parallel: replication r reads the ChaCha
//! stream (seed, r), results are collected in replication order, and the
//! aggregation uses compensated summation, so every estimate is independent of
//! the worker count.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::SQRT_2;

use crate::coeff::CoefficientFunction;
use crate::complexity::m_of_n;
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::sampler::SamplingDensity;
use crate::stream::{replication_rng, StreamId};
use crate::weights::WeightFamily;
use crate::wls::{self, DEFAULT_MAX_RETRIES};

/// Monte Carlo estimate of the expected squared G-error of the estimator,
/// next to the squared finite-sample bound.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorEstimate {
    pub n: usize,
    pub m: usize,
    pub delta: f64,
    pub r: usize,
    /// Mean of squared errors over replications.
    pub mean_sq: f64,
    /// Standard error of that mean.
    pub std_err: f64,
    /// Squared bound (1 + 4m/n) (1-delta)^{-1} lambda_{m+1}.
    pub bound_sq: f64,
    pub retries_mean: f64,
}

/// Bound on the randomized error: (1 + 4m/n)^{1/2} (1-delta)^{-1/2}
/// sqrt(lambda_{m+1}) with m = m_of_n(n, delta).
pub fn expected_error_bound(instance: &ProblemInstance, n: usize, delta: f64) -> Result<f64> {
    let m = m_of_n(n, delta)?;
    if m == 0 {
        return Err(Error::InvalidParameter(format!(
            "m evaluates to 0 for n = {n}, delta = {delta}; increase n or delta"
        )));
    }
    Ok(bound_sq_for(instance, n, m, delta)?.sqrt())
}

fn bound_sq_for(instance: &ProblemInstance, n: usize, m: usize, delta: f64) -> Result<f64> {
    let lambda_next = instance.spectral().lambda(m + 1)?;
    Ok((1.0 + 4.0 * m as f64 / n as f64) / (1.0 - delta) * lambda_next)
}

/// Run R independent draw/accept/solve pipelines for `f` and aggregate the
/// squared G-errors. `m` is derived from (n, delta).
pub fn randomized_error_mc(
    instance: &ProblemInstance,
    f: &CoefficientFunction,
    n: usize,
    delta: f64,
    r: usize,
    seed: u64,
) -> Result<ErrorEstimate> {
    let m = m_of_n(n, delta)?;
    if m == 0 {
        return Err(Error::InvalidParameter(format!(
            "m evaluates to 0 for n = {n}, delta = {delta}; increase n or delta"
        )));
    }
    let f_norm_sq = f.f_norm_sq(instance.spectral())?;
    if f_norm_sq > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "test functions must lie in the unit ball: got squared norm {f_norm_sq}"
        )));
    }
    let (mean_sq, std_err, retries_mean) = mc_error_sq(instance, f, m, n, r, seed)?;
    Ok(ErrorEstimate {
        n,
        m,
        delta,
        r,
        mean_sq,
        std_err,
        bound_sq: bound_sq_for(instance, n, m, delta)?,
        retries_mean,
    })
}

/// Shared replication loop: (mean of squared errors, standard error, mean retries).
fn mc_error_sq(
    instance: &ProblemInstance,
    f: &CoefficientFunction,
    m: usize,
    n: usize,
    r: usize,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    if r == 0 {
        return Err(Error::InvalidParameter("need at least one replication".into()));
    }
    let outcomes: Result<Vec<(f64, u32)>> = (0..r)
        .into_par_iter()
        .map(|rep| {
            let model = approximate_on_stream(instance, m, n, f, seed, rep as u64)?;
            let err_sq = wls::g_error_sq(instance, &model, f)?;
            Ok((err_sq, model.retries))
        })
        .collect();
    let outcomes = outcomes?;
    let errors: Vec<f64> = outcomes.iter().map(|&(e, _)| e).collect();
    let retries_mean =
        kahan_sum(outcomes.iter().map(|&(_, t)| t as f64)) / r as f64;
    let mean = kahan_sum(errors.iter().copied()) / r as f64;
    let var = if r >= 2 {
        kahan_sum(errors.iter().map(|e| (e - mean) * (e - mean))) / (r as f64 - 1.0)
    } else {
        0.0
    };
    Ok((mean, (var / r as f64).sqrt(), retries_mean))
}

fn approximate_on_stream(
    instance: &ProblemInstance,
    m: usize,
    n: usize,
    f: &CoefficientFunction,
    seed: u64,
    replication: u64,
) -> Result<wls::WlsModel> {
    let stream = StreamId::new(seed, replication);
    wls::approximate(instance, m, n, f, stream, DEFAULT_MAX_RETRIES)
}

/// Empirical tail probability of the spectral deviation against the matrix
/// concentration bound (2n)^{sqrt 2} exp(-n t^2 / (12 m)).
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    pub m: usize,
    pub n: usize,
    pub t: f64,
    pub r: usize,
    /// Fraction of unconditioned draws with deviation > t.
    pub empirical_prob: f64,
    /// min(1, theoretical tail bound); may be vacuous.
    pub bound: f64,
}

pub fn concentration_bound(n: usize, m: usize, t: f64) -> f64 {
    let raw = (2.0 * n as f64).powf(SQRT_2) * (-(n as f64) * t * t / (12.0 * m as f64)).exp();
    raw.min(1.0)
}

/// Draw R unconditioned sample sets and count deviations above t.
pub fn concentration_experiment(
    instance: &ProblemInstance,
    m: usize,
    n: usize,
    t: f64,
    r: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    if !t.is_finite() || t <= 0.0 || t >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "threshold t must lie in (0,1), got {t}"
        )));
    }
    if r == 0 {
        return Err(Error::InvalidParameter("need at least one replication".into()));
    }
    let density = SamplingDensity::new(instance, m)?;
    let exceed: Result<Vec<bool>> = (0..r)
        .into_par_iter()
        .map(|rep| {
            let set = density.draw_nodes(n, StreamId::new(seed, rep as u64))?;
            let matrices = wls::assemble(instance, m, &set)?;
            Ok(matrices.deviation > t)
        })
        .collect();
    let count = exceed?.iter().filter(|&&e| e).count();
    Ok(ConcentrationReport {
        m,
        n,
        t,
        r,
        empirical_prob: count as f64 / r as f64,
        bound: concentration_bound(n, m, t),
    })
}

/// One grid point of the exponential-decay check.
#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub n: usize,
    pub m: usize,
    pub mean_sq: f64,
    pub std_err: f64,
    /// sqrt(mean_sq), the Monte Carlo randomized-error estimate.
    pub rmse: f64,
    /// Internal curve 4 e_wor(m).
    pub bound_inner: f64,
    /// Outer curve 4 A q2^(n / ln 4n) sqrt(lambda_1).
    pub bound_outer: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    /// Weight-family parameters of the geometric spectrum.
    pub weight_a: f64,
    pub weight_q: f64,
    /// Constants (A, q) of the geometric envelope
    /// e_wor(n) <= A q^{n+1} sqrt(lambda_1), derived from the spectrum.
    pub envelope_a: f64,
    pub envelope_q: f64,
    /// q2 = envelope_q^(1 / (48 sqrt 2)).
    pub q2: f64,
    pub delta: f64,
    pub r: usize,
    pub rows: Vec<DecayRow>,
}

impl DecayReport {
    pub fn csv_header() -> &'static str {
        "n,m,mean_sq,std_err,rmse,bound_inner,bound_outer"
    }

    pub fn csv_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{},{}",
                    r.n, r.m, r.mean_sq, r.std_err, r.rmse, r.bound_inner, r.bound_outer
                )
            })
            .collect()
    }
}

/// The fixed failure probability under which the budget split
/// m = floor(n / (48 sqrt(2) ln 4n)) arises.
pub fn decay_delta() -> f64 {
    2.0f64.powf(-SQRT_2)
}

/// Exponential-decay check for a univariate geometric spectrum: at each n the
/// randomized error of the estimator on the worst single-mode function is
/// estimated by Monte Carlo and set against both decay curves. Grid points
/// with m = 0 degenerate to the zero algorithm, whose error on the worst mode
/// is the initial error exactly.
pub fn exp_decay_check(
    instance: &ProblemInstance,
    n_grid: &[usize],
    r: usize,
    seed: u64,
) -> Result<DecayReport> {
    let (weight_a, weight_q) = match instance.weights() {
        WeightFamily::Exponential { a, q } => (*a, *q),
        other => {
            return Err(Error::InvalidParameter(format!(
                "exponential weight family required, got {other:?}"
            )))
        }
    };
    if instance.d() != 1 {
        // For d >= 2 the sorted tensor spectrum decays sub-geometrically in
        // the flat index, so no geometric envelope with q < 1 exists.
        return Err(Error::InvalidParameter(
            "exponential-decay check requires d = 1".into(),
        ));
    }
    if n_grid.is_empty() {
        return Err(Error::InvalidParameter("empty n grid".into()));
    }
    let spectral = instance.spectral();
    let sqrt_lambda1 = spectral.lambdas()[0].sqrt();
    // lambda_{k} = A q^{k-1} gives e_wor(n)/sqrt(lambda_1) = q^{n/2}, so the
    // tightest geometric envelope has q_env = sqrt(q), A_env = 1/sqrt(q).
    let envelope_q = weight_q.sqrt();
    let envelope_a = 1.0 / envelope_q;
    let q2 = envelope_q.powf(1.0 / (48.0 * SQRT_2));
    let delta = decay_delta();

    let mut rows = Vec::with_capacity(n_grid.len());
    for (idx, &n) in n_grid.iter().enumerate() {
        let m = m_of_n(n, delta)?;
        let (mean_sq, std_err) = if m == 0 {
            // Zero algorithm: the worst unit-ball single mode is
            // sqrt(lambda_1) eta_1 and its error is exactly the initial error.
            (spectral.lambdas()[0], 0.0)
        } else {
            let mode = m + 1;
            let f = CoefficientFunction::single_mode(
                mode,
                Complex64::new(spectral.lambda(mode)?.sqrt(), 0.0),
            )?;
            let sub_seed = crate::stream::experiment_seed(seed, idx as u64);
            let (mean_sq, std_err, _) = mc_error_sq(instance, &f, m, n, r, sub_seed)?;
            (mean_sq, std_err)
        };
        let bound_inner = 4.0 * spectral.worst_case_error(m)?;
        let bound_outer =
            4.0 * envelope_a * q2.powf(n as f64 / (4.0 * n as f64).ln()) * sqrt_lambda1;
        rows.push(DecayRow {
            n,
            m,
            mean_sq,
            std_err,
            rmse: mean_sq.sqrt(),
            bound_inner,
            bound_outer,
        });
    }
    Ok(DecayReport {
        weight_a,
        weight_q,
        envelope_a,
        envelope_q,
        q2,
        delta,
        r,
        rows,
    })
}

/// Entrywise comparison of the averaged empirical Gram matrix against the
/// identity, which is its exact expectation under the mixture measure.
#[derive(Debug, Clone, Serialize)]
pub struct MixtureMeanCheck {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    /// Largest |mean - I| over entries and real/imaginary parts, in units of
    /// the matching empirical standard error.
    pub max_sigma: f64,
    pub holds_at_4_sigma: bool,
}

/// Average the Gram matrix over R unconditioned draws and test that the mean
/// is the identity entrywise at the four-standard-error level.
pub fn mixture_mean_check(
    instance: &ProblemInstance,
    m: usize,
    n: usize,
    r: usize,
    seed: u64,
) -> Result<MixtureMeanCheck> {
    if r < 2 {
        return Err(Error::InvalidParameter("need at least two replications".into()));
    }
    let density = SamplingDensity::new(instance, m)?;
    let gram_list: Result<Vec<nalgebra::DMatrix<Complex64>>> = (0..r)
        .into_par_iter()
        .map(|rep| {
            let set = density.draw_nodes(n, StreamId::new(seed, rep as u64))?;
            Ok(wls::assemble(instance, m, &set)?.h)
        })
        .collect();
    let gram_list = gram_list?;
    let mut max_sigma = 0.0f64;
    for row in 0..m {
        for col in 0..m {
            let re: Vec<f64> = gram_list.iter().map(|h| h[(row, col)].re).collect();
            let im: Vec<f64> = gram_list.iter().map(|h| h[(row, col)].im).collect();
            let expect_re = if row == col { 1.0 } else { 0.0 };
            for (values, expect) in [(re, expect_re), (im, 0.0)] {
                let mean = kahan_sum(values.iter().copied()) / r as f64;
                let var = kahan_sum(values.iter().map(|v| (v - mean) * (v - mean)))
                    / (r as f64 - 1.0);
                let se = (var / r as f64).sqrt();
                let dev = (mean - expect).abs();
                if se > 0.0 {
                    max_sigma = max_sigma.max(dev / se);
                } else if dev > 0.0 {
                    max_sigma = f64::INFINITY;
                }
            }
        }
    }
    Ok(MixtureMeanCheck {
        m,
        n,
        r,
        max_sigma,
        holds_at_4_sigma: max_sigma <= 4.0,
    })
}

/// Battery of near-extremal test functions for error experiments: unit-norm
/// modes at and around the truncation index plus one random unit-norm
/// function.
pub fn test_battery(
    instance: &ProblemInstance,
    m: usize,
    seed: u64,
) -> Result<Vec<(String, CoefficientFunction)>> {
    let spectral = instance.spectral();
    let m_max = spectral.len();
    let mut indices: Vec<usize> = [1, m, m + 1, m + 2, 2 * m, m_max]
        .into_iter()
        .filter(|&k| k >= 1 && k <= m_max)
        .collect();
    indices.sort_unstable();
    indices.dedup();
    let mut battery = Vec::with_capacity(indices.len() + 1);
    for k in indices {
        let f = CoefficientFunction::single_mode(
            k,
            Complex64::new(spectral.lambda(k)?.sqrt(), 0.0),
        )?;
        battery.push((format!("mode_{k}"), f));
    }
    let mut rng = replication_rng(seed, u64::MAX);
    battery.push((
        "random".to_string(),
        CoefficientFunction::random_unit_f_norm(spectral, m_max, &mut rng)?,
    ));
    Ok(battery)
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}
