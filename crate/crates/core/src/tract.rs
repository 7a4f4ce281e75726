//! Numeric tractability diagnostics.
//!
//! The tractability notions are asymptotic statements about the growth of the
//! information complexity in (1/eps, d); a finite grid can never prove one.
//! This module fits each notion's defining shape to complexity counts on a
//! grid and reports a three-valued verdict, with "inconclusive" as the honest
//! default.

use serde::Serialize;

use crate::complexity::{complexity_row, ComplexityParams, ComplexityTable, Count};
use crate::error::{Error, Result};
use crate::spectral::{enumerate_eigenvalues, SpectralData};
use crate::weights::WeightFamily;

/// A d-indexed family of eigenvalue sequences.
pub trait EigenvalueFamily {
    fn spectral(&self, d: usize, m_max: usize) -> Result<SpectralData>;
}

/// The product-weight families of the library.
impl EigenvalueFamily for WeightFamily {
    fn spectral(&self, d: usize, m_max: usize) -> Result<SpectralData> {
        enumerate_eigenvalues(self, d, m_max)
    }
}

/// Complexity counts for every (eps, d) grid cell.
pub fn probe_grid(
    family: &dyn EigenvalueFamily,
    d_grid: &[usize],
    eps_grid: &[f64],
    params: &ComplexityParams,
    m_max: usize,
) -> Result<ComplexityTable> {
    if d_grid.is_empty() || eps_grid.is_empty() {
        return Err(Error::InvalidParameter("empty probe grid".into()));
    }
    let mut rows = Vec::with_capacity(d_grid.len() * eps_grid.len());
    for &d in d_grid {
        let spectral = family.spectral(d, m_max)?;
        for &eps in eps_grid {
            rows.push(complexity_row(&spectral, d, eps, params)?);
        }
    }
    Ok(ComplexityTable {
        params: *params,
        rows,
    })
}

/// ALG notions read growth against 1/eps, EXP notions against 1 + ln(1/eps).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Alg,
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NotionKind {
    /// n <= C z^p with z the accuracy scale.
    Spt,
    /// n <= C d^q z^p.
    Pt,
    /// n <= C exp(t (1 + ln d)(1 + ln z)).
    Qpt,
    /// ln n / (z^s + d^t) -> 0 for fixed (s, t).
    StWt { s: f64, t: f64 },
    /// (s, t) = (1, 1).
    Wt,
    /// StWt for all positive (s, t); probed on {0.5, 1, 2}^2.
    Uwt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Notion {
    pub mode: Mode,
    pub kind: NotionKind,
}

impl Notion {
    pub fn label(&self) -> String {
        let mode = match self.mode {
            Mode::Alg => "ALG",
            Mode::Exp => "EXP",
        };
        let kind = match self.kind {
            NotionKind::Spt => "SPT".to_string(),
            NotionKind::Pt => "PT".to_string(),
            NotionKind::Qpt => "QPT".to_string(),
            NotionKind::StWt { s, t } => format!("({s},{t})-WT"),
            NotionKind::Wt => "WT".to_string(),
            NotionKind::Uwt => "UWT".to_string(),
        };
        format!("{mode}-{kind}")
    }

    /// The twelve standard notions for one mode pair each.
    pub fn all() -> Vec<Notion> {
        let mut out = Vec::new();
        for mode in [Mode::Alg, Mode::Exp] {
            for kind in [
                NotionKind::Spt,
                NotionKind::Pt,
                NotionKind::Qpt,
                NotionKind::Uwt,
                NotionKind::Wt,
                NotionKind::StWt { s: 2.0, t: 2.0 },
            ] {
                out.push(Notion { mode, kind });
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairVerdict {
    pub alpha: f64,
    pub beta: f64,
    pub verdict: Verdict,
    pub decay_slope: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TractabilityReport {
    pub notion: String,
    /// Named exponents fitted to the notion's defining inequality.
    pub exponents: Vec<(String, f64)>,
    /// RMS residual of the log-scale fit.
    pub residual: f64,
    pub verdict: Verdict,
    pub d_grid: Vec<usize>,
    pub eps_grid: Vec<f64>,
    /// Per-pair detail for the uniform notion, which quantifies over (s, t).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<PairVerdict>>,
}

/// Residual gates for the bounded-form fits, in log units: a fit within
/// e^0.35 of every count is called consistent, one off by more than a factor
/// e is inconsistent.
const RESIDUAL_CONSISTENT: f64 = 0.35;
const RESIDUAL_INCONSISTENT: f64 = 1.0;

/// Fit the notion's shape to the finite table and judge it.
pub fn classify(table: &ComplexityTable, notion: Notion) -> Result<TractabilityReport> {
    let points = finite_points(table, notion.mode)?;
    let d_grid = sorted_dedup(points.iter().map(|p| p.d));
    let eps_grid = {
        let mut v: Vec<f64> = points.iter().map(|p| p.eps).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let degenerate = d_grid.len() < 2 || eps_grid.len() < 2;

    let report = |exponents: Vec<(String, f64)>, residual: f64, verdict: Verdict, pairs| {
        TractabilityReport {
            notion: notion.label(),
            exponents,
            residual,
            verdict: if degenerate { Verdict::Inconclusive } else { verdict },
            d_grid: d_grid.clone(),
            eps_grid: eps_grid.clone(),
            pairs,
        }
    };

    match notion.kind {
        NotionKind::Spt => {
            let fit = least_squares_fit(&points, &[|p: &Point| p.z]);
            let verdict = bounded_verdict(&fit);
            Ok(report(
                vec![("p".into(), fit.slopes[0])],
                fit.rms_residual,
                verdict,
                None,
            ))
        }
        NotionKind::Pt => {
            let fit = least_squares_fit(
                &points,
                &[|p: &Point| p.z, |p: &Point| (p.d as f64).ln()],
            );
            let verdict = bounded_verdict(&fit);
            Ok(report(
                vec![("p".into(), fit.slopes[0]), ("q".into(), fit.slopes[1])],
                fit.rms_residual,
                verdict,
                None,
            ))
        }
        NotionKind::Qpt => {
            let fit = least_squares_fit(
                &points,
                &[|p: &Point| (1.0 + (p.d as f64).ln()) * (1.0 + p.z)],
            );
            let verdict = bounded_verdict(&fit);
            Ok(report(
                vec![("t".into(), fit.slopes[0])],
                fit.rms_residual,
                verdict,
                None,
            ))
        }
        NotionKind::Wt => {
            let limit = limit_verdict(&points, 1.0, 1.0, notion.mode);
            Ok(report(
                vec![("decay_slope".into(), limit.decay_slope)],
                limit.residual,
                limit.verdict,
                None,
            ))
        }
        NotionKind::StWt { s, t } => {
            let limit = limit_verdict(&points, s, t, notion.mode);
            Ok(report(
                vec![("decay_slope".into(), limit.decay_slope)],
                limit.residual,
                limit.verdict,
                None,
            ))
        }
        NotionKind::Uwt => {
            let probe_set = [0.5, 1.0, 2.0];
            let mut pairs = Vec::new();
            let mut verdict = Verdict::Consistent;
            let mut worst_slope = f64::NEG_INFINITY;
            for &alpha in &probe_set {
                for &beta in &probe_set {
                    let limit = limit_verdict(&points, alpha, beta, notion.mode);
                    worst_slope = worst_slope.max(limit.decay_slope);
                    verdict = combine_uwt(verdict, limit.verdict);
                    pairs.push(PairVerdict {
                        alpha,
                        beta,
                        verdict: limit.verdict,
                        decay_slope: limit.decay_slope,
                    });
                }
            }
            Ok(report(
                vec![("worst_decay_slope".into(), worst_slope)],
                0.0,
                verdict,
                Some(pairs),
            ))
        }
    }
}

fn combine_uwt(acc: Verdict, v: Verdict) -> Verdict {
    use Verdict::*;
    match (acc, v) {
        (Inconsistent, _) | (_, Inconsistent) => Inconsistent,
        (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
        _ => Consistent,
    }
}

struct Point {
    eps: f64,
    d: usize,
    /// ln(max(n, 1)).
    ln_n: f64,
    /// Log accuracy scale of the bounded fits: ln(1/eps) for ALG,
    /// ln(1 + ln(1/eps)) for EXP.
    z: f64,
}

fn z_scale(mode: Mode, eps: f64) -> f64 {
    let inv = (1.0 / eps).ln();
    match mode {
        Mode::Alg => inv,
        Mode::Exp => (1.0 + inv).ln(),
    }
}

/// Accuracy argument of the limit-notion denominators: 1/eps for ALG,
/// 1 + ln(1/eps) for EXP.
fn limit_scale(mode: Mode, eps: f64) -> f64 {
    match mode {
        Mode::Alg => 1.0 / eps,
        Mode::Exp => 1.0 + (1.0 / eps).ln(),
    }
}

fn finite_points(table: &ComplexityTable, mode: Mode) -> Result<Vec<Point>> {
    table
        .rows
        .iter()
        .map(|row| match row.n_wor {
            Count::Finite(n) => Ok(Point {
                eps: row.eps,
                d: row.d,
                ln_n: (n.max(1) as f64).ln(),
                z: z_scale(mode, row.eps),
            }),
            Count::Exceeded => Err(Error::InvalidParameter(format!(
                "complexity table holds a truncation marker at eps = {}, d = {}; enlarge M",
                row.eps, row.d
            ))),
        })
        .collect()
}

struct Fit {
    slopes: Vec<f64>,
    rms_residual: f64,
    max_residual: f64,
}

/// Ordinary least squares of ln n on an intercept plus the given regressors.
fn least_squares_fit(points: &[Point], regressors: &[fn(&Point) -> f64]) -> Fit {
    let rows = points.len();
    let cols = regressors.len() + 1;
    let mut a = nalgebra::DMatrix::zeros(rows, cols);
    let mut y = nalgebra::DVector::zeros(rows);
    for (i, p) in points.iter().enumerate() {
        a[(i, 0)] = 1.0;
        for (j, reg) in regressors.iter().enumerate() {
            a[(i, j + 1)] = reg(p);
        }
        y[i] = p.ln_n;
    }
    let svd = a.clone().svd(true, true);
    let beta = svd.solve(&y, 1e-12).expect("least squares solve");
    let resid = &a * &beta - &y;
    let rms = (resid.norm_squared() / rows as f64).sqrt();
    let max = resid.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Fit {
        slopes: beta.iter().skip(1).copied().collect(),
        rms_residual: rms,
        max_residual: max,
    }
}

fn bounded_verdict(fit: &Fit) -> Verdict {
    // Envelope constants always exist on a finite grid; the judgement is
    // whether the fitted shape explains the counts and the exponents are
    // admissible (non-negative up to fit noise).
    if fit.slopes.iter().any(|&s| s < -0.05) {
        return Verdict::Inconsistent;
    }
    if fit.rms_residual <= RESIDUAL_CONSISTENT && fit.max_residual <= 2.0 * RESIDUAL_CONSISTENT {
        Verdict::Consistent
    } else if fit.rms_residual > RESIDUAL_INCONSISTENT {
        Verdict::Inconsistent
    } else {
        Verdict::Inconclusive
    }
}

struct LimitOutcome {
    verdict: Verdict,
    decay_slope: f64,
    residual: f64,
}

/// Judge a vanishing-ratio notion: r = ln n / (scale^s + d^t) must head to 0
/// as scale + d grows. The fitted slope of ln r against the log-denominator
/// is the decay rate; a clearly negative slope (or a uniformly tiny far
/// half) reads as consistent, a flat-or-growing ratio that stays large reads
/// as inconsistent.
fn limit_verdict(points: &[Point], s: f64, t: f64, mode: Mode) -> LimitOutcome {
    let mut ratios: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            let denom = limit_scale(mode, p.eps).powf(s) + (p.d as f64).powf(t);
            (denom, p.ln_n / denom)
        })
        .collect();
    ratios.sort_by(|a, b| a.0.total_cmp(&b.0));
    let half = ratios.len() / 2;
    let near_max = ratios[..half]
        .iter()
        .fold(0.0f64, |m, &(_, r)| m.max(r));
    let far_max = ratios[half..]
        .iter()
        .fold(0.0f64, |m, &(_, r)| m.max(r));

    // Slope of ln r on ln denom over points with positive ratio.
    let logs: Vec<(f64, f64)> = ratios
        .iter()
        .filter(|&&(_, r)| r > 0.0)
        .map(|&(d, r)| (d.ln(), r.ln()))
        .collect();
    let (decay_slope, residual) = if logs.len() >= 2 {
        slope_fit(&logs)
    } else {
        (0.0, 0.0)
    };

    let verdict = if far_max <= 0.05 || (decay_slope <= -0.15 && far_max < near_max) {
        Verdict::Consistent
    } else if far_max > 0.2 && decay_slope >= -0.02 {
        Verdict::Inconsistent
    } else {
        Verdict::Inconclusive
    };
    LimitOutcome {
        verdict,
        decay_slope,
        residual,
    }
}

/// Simple univariate regression returning (slope, rms residual).
fn slope_fit(pairs: &[(f64, f64)]) -> (f64, f64) {
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return (0.0, 0.0);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pairs
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    (slope, (rss / n).sqrt())
}

fn sorted_dedup(values: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = values.collect();
    v.sort_unstable();
    v.dedup();
    v
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferRow {
    pub eps: f64,
    pub d: usize,
    pub n_wor: Count,
    pub bound_log: Count,
    pub bound_log_scaled: Count,
    pub bound_power: Count,
    pub bound_power_scaled: Count,
    /// ln(bound) / ln(n_wor) per bound, defined when both sides exceed 1.
    pub ratio_log: Option<f64>,
    pub ratio_log_scaled: Option<f64>,
    pub ratio_power: Option<f64>,
    pub ratio_power_scaled: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferReport {
    pub delta: f64,
    pub omega: f64,
    pub rows: Vec<TransferRow>,
}

impl TransferReport {
    pub fn csv_header() -> &'static str {
        "eps,d,n_wor,bound_log,bound_log_scaled,bound_power,bound_power_scaled,ratio_log,ratio_log_scaled,ratio_power,ratio_power_scaled"
    }

    pub fn csv_rows(&self) -> Vec<String> {
        fn opt(v: Option<f64>) -> String {
            v.map_or_else(|| "nan".to_string(), |x| x.to_string())
        }
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    r.eps,
                    r.d,
                    r.n_wor.csv(),
                    r.bound_log.csv(),
                    r.bound_log_scaled.csv(),
                    r.bound_power.csv(),
                    r.bound_power_scaled.csv(),
                    opt(r.ratio_log),
                    opt(r.ratio_log_scaled),
                    opt(r.ratio_power),
                    opt(r.ratio_power_scaled),
                )
            })
            .collect()
    }
}

/// Side-by-side view of the worst-case counts and their transfer bounds; the
/// log ratios illustrate how the standard-information bounds preserve each
/// notion's growth shape.
pub fn transfer_report(table: &ComplexityTable) -> TransferReport {
    let ratio = |bound: Count, n: Count| -> Option<f64> {
        match (bound, n) {
            (Count::Finite(b), Count::Finite(n)) if b > 1 && n > 1 => {
                Some((b as f64).ln() / (n as f64).ln())
            }
            _ => None,
        }
    };
    let rows = table
        .rows
        .iter()
        .map(|r| TransferRow {
            eps: r.eps,
            d: r.d,
            n_wor: r.n_wor,
            bound_log: r.bound_log,
            bound_log_scaled: r.bound_log_scaled,
            bound_power: r.bound_power,
            bound_power_scaled: r.bound_power_scaled,
            ratio_log: ratio(r.bound_log, r.n_wor),
            ratio_log_scaled: ratio(r.bound_log_scaled, r.n_wor),
            ratio_power: ratio(r.bound_power, r.n_wor),
            ratio_power_scaled: ratio(r.bound_power_scaled, r.n_wor),
        })
        .collect();
    TransferReport {
        delta: table.params.delta,
        omega: table.params.omega,
        rows,
    }
}
