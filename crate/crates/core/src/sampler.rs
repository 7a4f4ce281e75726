//! Node sampling from the Christoffel-type mixture density.
//!
//! The sampling density is `omega_m(x) = h_m(x) rho(x)` with
//! `h_m(x) = (1/m) sum_{j<=m} |eta_j(x)|^2`. Because each `|eta_j|^2 rho`
//! integrates to one, `omega_m` is an equal-weight mixture of m product
//! densities, so a node is drawn by picking a mixture component uniformly and
//! then sampling each coordinate from the matching univariate density:
//! inverse CDF for the Fourier and Cosine components, envelope rejection for
//! the Legendre components.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisFamily, BasisKind};
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::quadrature::tensor_integrate;
use crate::stream::StreamId;

/// Attempt cap for the univariate rejection sampler.
const REJECTION_CAP: u64 = 1_000_000;

/// Tolerance of the monotone bisection used for inverse-CDF draws.
const BISECTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct SamplingDensity<'a> {
    instance: &'a ProblemInstance,
    m: usize,
}

impl<'a> SamplingDensity<'a> {
    pub fn new(instance: &'a ProblemInstance, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("mixture size m must be >= 1".into()));
        }
        if m > instance.truncation() {
            return Err(Error::TruncationExceeded {
                needed: m,
                available: instance.truncation(),
            });
        }
        Ok(Self { instance, m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// h_m(x) = (1/m) sum_{j<=m} |eta_j(x)|^2, without a domain check.
    pub(crate) fn h_value_unchecked(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for j in 1..=self.m {
            let v = self
                .instance
                .eval_basis_unchecked(j, x)
                .expect("m <= truncation checked at construction");
            total += v.norm_sqr();
        }
        total / self.m as f64
    }

    pub fn h_value(&self, x: &[f64]) -> Result<f64> {
        self.instance.basis().check_point(x)?;
        Ok(self.h_value_unchecked(x))
    }

    /// omega_m(x) = h_m(x) rho(x).
    pub fn density_eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.h_value(x)? * self.instance.basis().rho())
    }

    /// Quadrature check that omega_m integrates to one (d <= 3).
    pub fn validate(&self, points_per_axis: usize) -> Result<DensityCheck> {
        let basis = self.instance.basis();
        let integral = match basis.kind {
            // Unit modulus makes omega identically rho; the integral is exact.
            BasisKind::Fourier => 1.0,
            _ => {
                let rho = basis.rho();
                tensor_integrate(basis, points_per_axis, |x| {
                    self.h_value_unchecked(x) * rho
                })?
            }
        };
        Ok(DensityCheck {
            integral,
            deviation: (integral - 1.0).abs(),
        })
    }

    /// Draw n iid nodes from the mixture and cache h at each node.
    pub fn draw_nodes(&self, n: usize, stream: StreamId) -> Result<SampleSet> {
        let mut rng = stream.rng();
        self.draw_nodes_with(n, stream, &mut rng)
    }

    /// Draw from an already positioned rng. The accept/resample loop uses this
    /// so that successive draws continue one keystream instead of restarting it.
    pub(crate) fn draw_nodes_with(
        &self,
        n: usize,
        stream: StreamId,
        rng: &mut rand_chacha::ChaCha8Rng,
    ) -> Result<SampleSet> {
        if n == 0 {
            return Err(Error::InvalidParameter("node count n must be >= 1".into()));
        }
        let d = self.instance.d();
        let mut nodes = Vec::with_capacity(n);
        let mut h_values = Vec::with_capacity(n);
        for _ in 0..n {
            let j = rng.gen_range(1..=self.m);
            let component = self.instance.spectral().multi_index(j)?.to_vec();
            let mut x = vec![0.0; d];
            for (nu, &k) in component.iter().enumerate() {
                x[nu] = draw_component_coordinate(self.instance.basis(), k, rng)?;
            }
            let h = self.h_value_unchecked(&x);
            if !h.is_finite() || h <= 0.0 {
                return Err(Error::DegenerateNode(format!(
                    "h_m = {h} at drawn node {x:?}"
                )));
            }
            nodes.push(x);
            h_values.push(h);
        }
        Ok(SampleSet {
            m: self.m,
            n,
            stream,
            nodes,
            h_values,
        })
    }
}

/// Report of the unit-integral check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DensityCheck {
    pub integral: f64,
    pub deviation: f64,
}

/// n iid nodes from the mixture measure, with h_m cached at each node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub m: usize,
    pub n: usize,
    pub stream: StreamId,
    pub nodes: Vec<Vec<f64>>,
    pub h_values: Vec<f64>,
}

impl SampleSet {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sample set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("sample set parse error: {e}")))
    }
}

/// Draw one coordinate from the univariate density |eta_k|^2 rho_1.
fn draw_component_coordinate(
    basis: &BasisFamily,
    k: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    match basis.kind {
        // |eta_k| = 1: the component density is uniform on [0,1].
        BasisKind::Fourier => Ok(rng.gen::<f64>()),
        BasisKind::Cosine => {
            if k == 1 {
                Ok(rng.gen::<f64>())
            } else {
                // CDF of 2 cos^2(j pi t): F(x) = x + sin(2 pi j x) / (2 pi j).
                let j = (k - 1) as f64;
                let u = rng.gen::<f64>();
                Ok(bisect_cdf(
                    |x| x + (2.0 * std::f64::consts::PI * j * x).sin() / (2.0 * std::f64::consts::PI * j),
                    u,
                ))
            }
        }
        BasisKind::Legendre => {
            // Density (2k-1)/2 P_{k-1}^2(x) on [-1,1]; envelope is its sup
            // (2k-1)/2, so a uniform proposal is accepted with probability
            // P_{k-1}^2(x) <= 1.
            let deg = k - 1;
            for _ in 0..REJECTION_CAP {
                let x = -1.0 + 2.0 * rng.gen::<f64>();
                let p = crate::basis::legendre_poly(deg, x);
                if rng.gen::<f64>() <= p * p {
                    return Ok(x);
                }
            }
            Err(Error::SamplingFailure(format!(
                "rejection cap {REJECTION_CAP} hit for Legendre component of degree {deg}"
            )))
        }
    }
}

/// Solve F(x) = u on [0,1] for a nondecreasing F with F(0)=0, F(1)=1.
fn bisect_cdf(cdf: impl Fn(f64) -> f64, u: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
