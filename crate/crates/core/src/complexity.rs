//! Information complexity from eigenvalues, and the transfer bounds from
//! worst-case complexity with general linear information to randomized
//! complexity with standard information.

use serde::{Serialize, Serializer};
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::spectral::SpectralData;

/// Error criterion: absolute (target eps) or normalized (target eps times the
/// initial error sqrt(lambda_1)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Abs,
    Nor,
}

impl Criterion {
    pub fn cri(&self, spectral: &SpectralData) -> f64 {
        match self {
            Criterion::Abs => 1.0,
            Criterion::Nor => spectral.lambdas()[0].sqrt(),
        }
    }
}

/// A complexity count, or a marker that the enumerated spectrum was too short
/// to resolve it. The marker is a first-class table entry, not an error:
/// grids legitimately cross the known spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Count {
    Finite(u64),
    Exceeded,
}

impl Count {
    pub fn finite(&self) -> Option<u64> {
        match self {
            Count::Finite(v) => Some(*v),
            Count::Exceeded => None,
        }
    }

    pub fn map(&self, f: impl FnOnce(u64) -> u64) -> Count {
        match self {
            Count::Finite(v) => Count::Finite(f(*v)),
            Count::Exceeded => Count::Exceeded,
        }
    }

    pub fn csv(&self) -> String {
        match self {
            Count::Finite(v) => v.to_string(),
            Count::Exceeded => "inf".to_string(),
        }
    }
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Count::Finite(v) => serializer.serialize_u64(*v),
            Count::Exceeded => serializer.serialize_str("inf"),
        }
    }
}

/// Truncation index m attached to a node budget n at failure probability
/// delta: floor(n / (48 (sqrt(2) ln(2n) - ln(delta)))). May return 0;
/// downstream operations reject that.
pub fn m_of_n(n: usize, delta: f64) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    check_delta(delta)?;
    let denom = 48.0 * (SQRT_2 * (2.0 * n as f64).ln() - delta.ln());
    Ok((n as f64 / denom).floor() as usize)
}

/// Prefactor A_delta = (1 + 1/(12 ln(1/delta)))^{1/2} (1-delta)^{-1/2}.
pub fn error_prefactor(delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let ln_inv = -delta.ln();
    Ok(((1.0 + 1.0 / (12.0 * ln_inv)) / (1.0 - delta)).sqrt())
}

fn check_delta(delta: f64) -> Result<()> {
    if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0,1), got {delta}"
        )));
    }
    Ok(())
}

/// delta < 1/e, needed wherever ln ln(1/delta) appears.
fn check_small_delta(delta: f64) -> Result<()> {
    check_delta(delta)?;
    if delta >= (-1.0f64).exp() {
        return Err(Error::InvalidParameter(format!(
            "delta must be < 1/e = {:.6}, got {delta}",
            (-1.0f64).exp()
        )));
    }
    Ok(())
}

/// Smallest n with sqrt(lambda_{n+1}) <= eps * CRI, by binary search over the
/// sorted sequence.
pub fn n_wor(spectral: &SpectralData, eps: f64, criterion: Criterion) -> Result<Count> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive and finite, got {eps}"
        )));
    }
    let target = eps * criterion.cri(spectral);
    let lambdas = spectral.lambdas();
    // The predicate sqrt(lambda) > target holds on a prefix.
    let split = lambdas.partition_point(|&l| l.sqrt() > target);
    if split == lambdas.len() {
        Ok(Count::Exceeded)
    } else {
        Ok(Count::Finite(split as u64))
    }
}

fn ln_192_sqrt_2() -> f64 {
    (192.0 * SQRT_2).ln()
}

fn ln_48() -> f64 {
    48.0f64.ln()
}

/// Transfer bound 96 sqrt(2) (x+1) (ln(x+1) + ln(192 sqrt(2))), ceiled;
/// x is the worst-case complexity at accuracy eps/4.
pub fn log_transfer_bound(n_wor_quarter: u64) -> u64 {
    let x1 = n_wor_quarter as f64 + 1.0;
    (96.0 * SQRT_2 * x1 * (x1.ln() + ln_192_sqrt_2())).ceil() as u64
}

/// Transfer bound 48 (4 (ln 48 + ln ln(1/delta) + ln(x+1)) + ln(1/delta)) (x+1),
/// ceiled; x is the worst-case complexity at accuracy eps/A_delta. Requires
/// delta < 1/e.
pub fn scaled_log_transfer_bound(n_wor_scaled: u64, delta: f64) -> Result<u64> {
    check_small_delta(delta)?;
    let ln_inv = -delta.ln();
    let x1 = n_wor_scaled as f64 + 1.0;
    let v = 48.0 * (4.0 * (ln_48() + ln_inv.ln() + x1.ln()) + ln_inv) * x1;
    Ok(v.ceil() as u64)
}

/// sup over x >= 1 of 96 sqrt(2) (ln x + ln(192 sqrt(2))) / x^omega, in closed
/// form: the maximum of (a + ln x) / x^omega sits at x = exp(1/omega - a),
/// clamped to x >= 1.
pub fn power_transfer_constant(omega: f64) -> Result<f64> {
    check_omega(omega)?;
    Ok(96.0 * SQRT_2 * sup_log_over_power(ln_192_sqrt_2(), omega))
}

/// Same supremum for the scaled_log_transfer_bound numerator
/// 48 (4 (ln 48 + ln ln(1/delta) + ln x) + ln(1/delta)) / x^omega.
pub fn scaled_power_transfer_constant(omega: f64, delta: f64) -> Result<f64> {
    check_omega(omega)?;
    check_small_delta(delta)?;
    let ln_inv = -delta.ln();
    // Numerator = 192 (ln x + b) with b as below.
    let b = (4.0 * (ln_48() + ln_inv.ln()) + ln_inv) / 4.0;
    Ok(192.0 * sup_log_over_power(b, omega))
}

/// sup over x >= 1 of (a + ln x) / x^omega for a, omega > 0.
fn sup_log_over_power(a: f64, omega: f64) -> f64 {
    if 1.0 / omega <= a {
        // Stationary point below 1: decreasing on [1, inf).
        a
    } else {
        (a * omega - 1.0).exp() / omega
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "omega must be positive and finite, got {omega}"
        )));
    }
    Ok(())
}

/// Polynomial-form transfer bound C_omega (x+1)^{1+omega}, ceiled.
pub fn power_transfer_bound(n_wor_quarter: u64, omega: f64) -> Result<u64> {
    let c = power_transfer_constant(omega)?;
    Ok((c * (n_wor_quarter as f64 + 1.0).powf(1.0 + omega)).ceil() as u64)
}

/// Polynomial-form transfer bound C_{omega,delta} (x+1)^{1+omega}, ceiled.
pub fn scaled_power_transfer_bound(n_wor_scaled: u64, omega: f64, delta: f64) -> Result<u64> {
    let c = scaled_power_transfer_constant(omega, delta)?;
    Ok((c * (n_wor_scaled as f64 + 1.0).powf(1.0 + omega)).ceil() as u64)
}

/// Parameters shared by every row of a complexity table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComplexityParams {
    pub criterion: Criterion,
    pub delta: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexityRow {
    pub eps: f64,
    pub d: usize,
    pub n_wor: Count,
    pub bound_log: Count,
    pub bound_log_scaled: Count,
    pub bound_power: Count,
    pub bound_power_scaled: Count,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexityTable {
    pub params: ComplexityParams,
    pub rows: Vec<ComplexityRow>,
}

impl ComplexityTable {
    pub fn csv_header() -> &'static str {
        "eps,d,n_wor,bound_log,bound_log_scaled,bound_power,bound_power_scaled"
    }

    pub fn csv_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{},{}",
                    r.eps,
                    r.d,
                    r.n_wor.csv(),
                    r.bound_log.csv(),
                    r.bound_log_scaled.csv(),
                    r.bound_power.csv(),
                    r.bound_power_scaled.csv()
                )
            })
            .collect()
    }
}

/// One table row for a spectrum at dimension d. Requires delta < 1/e (for the
/// scaled bounds) and omega > 0.
pub fn complexity_row(
    spectral: &SpectralData,
    d: usize,
    eps: f64,
    params: &ComplexityParams,
) -> Result<ComplexityRow> {
    let base = n_wor(spectral, eps, params.criterion)?;
    let quarter = n_wor(spectral, eps / 4.0, params.criterion)?;
    let scaled = n_wor(spectral, eps / error_prefactor(params.delta)?, params.criterion)?;
    let b14 = quarter.map(log_transfer_bound);
    let b17 = match quarter {
        Count::Finite(x) => Count::Finite(power_transfer_bound(x, params.omega)?),
        Count::Exceeded => Count::Exceeded,
    };
    let b15 = match scaled {
        Count::Finite(x) => Count::Finite(scaled_log_transfer_bound(x, params.delta)?),
        Count::Exceeded => Count::Exceeded,
    };
    let b18 = match scaled {
        Count::Finite(x) => Count::Finite(scaled_power_transfer_bound(x, params.omega, params.delta)?),
        Count::Exceeded => Count::Exceeded,
    };
    Ok(ComplexityRow {
        eps,
        d,
        n_wor: base,
        bound_log: b14,
        bound_log_scaled: b15,
        bound_power: b17,
        bound_power_scaled: b18,
    })
}
