//! Fixed-order Gauss-Legendre rules with adaptive panel subdivision.
//!
//! All contour integrals in this crate reduce to integrals of analytic
//! (vector-valued) integrands over straight segments, so a fixed-order rule
//! per panel plus bisection until two refinement levels agree is both simple
//! and fast. Nodes are generated by Newton iteration on the Legendre
//! recurrence at construction time.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    /// Nodes on [-1, 1], symmetric about zero.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 2, "quadrature order must be at least 2");
        let n = order;
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x.abs();
            nodes[n - 1 - i] = x.abs();
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// One-panel rule for vector integrand over the segment [a, b].
    fn panel(
        &self,
        a: Complex64,
        b: Complex64,
        dim: usize,
        f: &mut dyn FnMut(Complex64, &mut [Complex64]),
    ) -> Vec<Complex64> {
        let mid = (a + b) * 0.5;
        let half = (b - a) * 0.5;
        let mut acc = vec![Complex64::new(0.0, 0.0); dim];
        let mut val = vec![Complex64::new(0.0, 0.0); dim];
        for (&x, &w) in self.nodes.iter().zip(self.weights.iter()) {
            let z = mid + half * x;
            for v in val.iter_mut() {
                *v = Complex64::new(0.0, 0.0);
            }
            f(z, &mut val);
            for (aa, &vv) in acc.iter_mut().zip(val.iter()) {
                *aa += vv * w;
            }
        }
        for aa in acc.iter_mut() {
            *aa *= half;
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[derive(Debug, Clone)]
pub struct QuadOpts {
    pub order: usize,
    /// Componentwise refinement target: panels split until
    /// `|I_coarse - I_fine| <= tol * (1 + |I_fine|)`.
    pub tol: f64,
    pub max_depth: usize,
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts { order: 32, tol: 1e-11, max_depth: 36 }
    }
}

/// Adaptive integral of a vector integrand over the straight segment [a, b].
pub fn integrate_segment_vec(
    rule: &GaussLegendre,
    opts: &QuadOpts,
    a: Complex64,
    b: Complex64,
    dim: usize,
    f: &mut dyn FnMut(Complex64, &mut [Complex64]),
) -> Result<Vec<Complex64>> {
    let coarse = rule.panel(a, b, dim, f);
    refine(rule, opts, a, b, dim, f, coarse, 0)
}

fn refine(
    rule: &GaussLegendre,
    opts: &QuadOpts,
    a: Complex64,
    b: Complex64,
    dim: usize,
    f: &mut dyn FnMut(Complex64, &mut [Complex64]),
    coarse: Vec<Complex64>,
    depth: usize,
) -> Result<Vec<Complex64>> {
    let mid = (a + b) * 0.5;
    let left = rule.panel(a, mid, dim, f);
    let right = rule.panel(mid, b, dim, f);
    let fine: Vec<Complex64> = left.iter().zip(right.iter()).map(|(l, r)| l + r).collect();
    let ok = coarse
        .iter()
        .zip(fine.iter())
        .all(|(c, fv)| (c - fv).norm() <= opts.tol * (1.0 + fv.norm()));
    if ok {
        return Ok(fine);
    }
    if depth >= opts.max_depth {
        return Err(Error::QuadratureStall(format!(
            "depth {} on segment [{}, {}]",
            depth, a, b
        )));
    }
    let l = refine(rule, opts, a, mid, dim, f, left, depth + 1)?;
    let r = refine(rule, opts, mid, b, dim, f, right, depth + 1)?;
    Ok(l.iter().zip(r.iter()).map(|(x, y)| x + y).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_integrate_polynomials_exactly() {
        let rule = GaussLegendre::new(8);
        // order-8 rule is exact through degree 15
        let mut f = |z: Complex64, out: &mut [Complex64]| {
            out[0] = z.powi(15) + z.powi(4) * 3.0;
        };
        let got = integrate_segment_vec(
            &rule,
            &QuadOpts::default(),
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0),
            1,
            &mut f,
        )
        .unwrap();
        // odd power integrates to zero, 3 z^4 to 6/5
        assert!((got[0] - Complex64::new(1.2, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn weights_sum_to_two() {
        for order in [2usize, 5, 16, 32, 64] {
            let rule = GaussLegendre::new(order);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-12, "order {} sum {}", order, s);
            for w in &rule.nodes {
                assert!(w.abs() < 1.0);
            }
        }
    }

    #[test]
    fn adaptive_handles_near_singular_endpoint() {
        // integral of 1/sqrt(z) on [eps, 1] along the real axis
        let rule = GaussLegendre::new(32);
        let mut f = |z: Complex64, out: &mut [Complex64]| {
            out[0] = z.sqrt().inv();
        };
        let eps = 1e-6;
        let got = integrate_segment_vec(
            &rule,
            &QuadOpts::default(),
            Complex64::new(eps, 0.0),
            Complex64::new(1.0, 0.0),
            1,
            &mut f,
        )
        .unwrap();
        let exact = 2.0 * (1.0 - eps.sqrt());
        assert!((got[0].re - exact).abs() < 1e-9);
        assert!(got[0].im.abs() < 1e-12);
    }

    #[test]
    fn complex_circle_winding_number() {
        // sum over polygon chords of dz/z around the unit circle = 2 pi i
        let rule = GaussLegendre::new(32);
        let n = 16;
        let mut total = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let a = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
            let b =
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k + 1) as f64 / n as f64);
            let mut f = |z: Complex64, out: &mut [Complex64]| {
                out[0] = z.inv();
            };
            total += integrate_segment_vec(&rule, &QuadOpts::default(), a, b, 1, &mut f).unwrap()[0];
        }
        assert!((total - Complex64::new(0.0, 2.0 * std::f64::consts::PI)).norm() < 1e-10);
    }
}
