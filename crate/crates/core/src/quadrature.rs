//! Gauss-Legendre quadrature, used for density validation and as an
//! independent oracle in tests.

use crate::basis::BasisFamily;
use crate::error::{Error, Result};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
/// Nodes by Newton iteration from the Chebyshev-angle initial guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // Newton starts at descending Chebyshev angles; flip to ascending nodes.
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// (P_n(x), P_n'(x)) via the recurrence and the derivative identity
/// P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1).
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let p_next = ((2 * k + 1) as f64 * x * p - k as f64 * p_prev) / (k + 1) as f64;
        p_prev = p;
        p = p_next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Per-axis rule mapped onto the basis domain interval.
pub fn axis_rule(basis: &BasisFamily, points: usize) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = basis.interval();
    let (t, w) = gauss_legendre(points);
    let scale = 0.5 * (hi - lo);
    let shift = 0.5 * (hi + lo);
    (
        t.iter().map(|&v| scale * v + shift).collect(),
        w.iter().map(|&v| scale * v).collect(),
    )
}

/// Tensor-product integral of `f` over the basis domain, `points` nodes per
/// axis. Cost grows as points^d; callers restrict to small d.
pub fn tensor_integrate(
    basis: &BasisFamily,
    points: usize,
    mut f: impl FnMut(&[f64]) -> f64,
) -> Result<f64> {
    let d = basis.d;
    if d > 3 {
        return Err(Error::InvalidParameter(format!(
            "tensor quadrature supports d <= 3, got {d}"
        )));
    }
    let (nodes, weights) = axis_rule(basis, points);
    let mut total = 0.0;
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    loop {
        let mut w = 1.0;
        for nu in 0..d {
            x[nu] = nodes[idx[nu]];
            w *= weights[idx[nu]];
        }
        total += w * f(&x);
        // Odometer over the index grid.
        let mut nu = d;
        loop {
            if nu == 0 {
                return Ok(total);
            }
            nu -= 1;
            idx[nu] += 1;
            if idx[nu] < points {
                break;
            }
            idx[nu] = 0;
        }
    }
}
