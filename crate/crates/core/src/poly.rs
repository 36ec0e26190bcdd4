//! Dense univariate polynomials over the complex numbers.
//!
//! Coefficients are stored in ascending degree order, `coeffs[k]` multiplying
//! `z^k`. The zero polynomial is the single coefficient `[0]`. Root finding
//! uses the Aberth-Ehrlich simultaneous iteration with a Newton polish, and
//! the coefficient-splitting solve used by the descent is a dense Sylvester
//! system.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const ROOT_RESIDUAL_TOL: f64 = 1e-10;
const SYLVESTER_RESULTANT_TOL: f64 = 1e-10;
const SYLVESTER_RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    /// Build from ascending coefficients, trimming exact zeros at the top.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut c = coeffs;
        while c.len() > 1 && c.last().map_or(false, |v| v.norm() == 0.0) {
            c.pop();
        }
        if c.is_empty() {
            c.push(Complex64::new(0.0, 0.0));
        }
        Poly { coeffs: c }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![Complex64::new(0.0, 0.0)] }
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    /// Monic times `lead`: `lead * prod_k (z - roots[k])`.
    pub fn from_roots(lead: Complex64, roots: &[Complex64]) -> Self {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            coeffs = next;
        }
        for c in coeffs.iter_mut() {
            *c *= lead;
        }
        Poly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Poly {
        if self.degree() == 0 {
            return Poly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Poly::new(coeffs)
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// All roots, repeated by multiplicity, sorted by (Re, Im).
    ///
    /// Residual contract: every returned root satisfies
    /// `|p(r)| <= 1e-10 * max|coeff| * (1 + |r|)^deg`.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let n = self.degree();
        if self.is_zero() {
            return Err(Error::NonConvergence("zero polynomial has no root set".into()));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let lead = self.leading();
        if n == 1 {
            return Ok(vec![-self.coeffs[0] / lead]);
        }

        let monic: Vec<Complex64> = self.coeffs.iter().map(|&c| c / lead).collect();
        let cauchy = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.77;
                Complex64::from_polar(0.5 * cauchy, theta)
            })
            .collect();
        let p = Poly::new(monic);

        let mut converged = false;
        for _ in 0..600 {
            let mut max_step = 0.0f64;
            let snapshot = z.clone();
            for k in 0..n {
                let (pv, dv) = p.eval_with_derivative(snapshot[k]);
                if !pv.is_finite() || !dv.is_finite() {
                    return Err(Error::NonConvergence("non-finite iterate".into()));
                }
                let newton = if dv.norm() == 0.0 {
                    Complex64::new(1e-8 * (1.0 + snapshot[k].norm()), 0.0)
                } else {
                    pv / dv
                };
                let mut repulsion = Complex64::new(0.0, 0.0);
                for (j, &other) in snapshot.iter().enumerate() {
                    if j != k {
                        let d = snapshot[k] - other;
                        if d.norm() > 0.0 {
                            repulsion += Complex64::new(1.0, 0.0) / d;
                        }
                    }
                }
                let denom = Complex64::new(1.0, 0.0) - newton * repulsion;
                let step = if denom.norm() < 1e-300 { newton } else { newton / denom };
                z[k] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[k].norm()));
            }
            if max_step < 1e-14 {
                converged = true;
                break;
            }
        }
        let _ = converged;

        // Newton polish sharpens simple roots; skipped where p' is tiny
        // (clustered roots) to avoid bouncing.
        for zk in z.iter_mut() {
            for _ in 0..3 {
                let (pv, dv) = p.eval_with_derivative(*zk);
                if dv.norm() < 1e-12 * (1.0 + pv.norm()) {
                    break;
                }
                let step = pv / dv;
                if !step.is_finite() || step.norm() > 0.5 * (1.0 + zk.norm()) {
                    break;
                }
                *zk -= step;
            }
        }

        let scale = self.max_coeff();
        for &r in &z {
            let bound = ROOT_RESIDUAL_TOL * scale * (1.0 + r.norm()).powi(n as i32);
            if self.eval(r).norm() > bound {
                return Err(Error::NonConvergence(format!(
                    "root residual {:.3e} exceeds bound {:.3e} at {}",
                    self.eval(r).norm(),
                    bound,
                    r
                )));
            }
        }
        z.sort_by(crate::geom::lex_cmp);
        Ok(z)
    }
}

impl std::ops::Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        Poly::new(coeffs)
    }
}

impl std::ops::Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect();
        Poly::new(coeffs)
    }
}

impl std::ops::Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::new(coeffs)
    }
}

/// Split `fdot = sdot * delta + (1/2) s * ddot` for the unknown corrections
/// `(sdot, ddot)` with `deg sdot <= deg s - 1` and `deg ddot <= deg delta - 1`.
///
/// The square system is the Sylvester matrix of `(delta, s/2)`; it is singular
/// exactly when `s` and `delta` share a root, reported as
/// [`Error::SingularSylvester`] when the relative resultant drops below 1e-10.
/// The returned pair satisfies the defining identity with coefficient residual
/// at most `1e-12 * ||fdot||`.
pub fn sylvester_split(s: &Poly, delta: &Poly, fdot: &Poly) -> Result<(Poly, Poly)> {
    let l = s.degree();
    let m = delta.degree();
    let n = l + m;
    if fdot.is_zero() {
        return Ok((Poly::zero(), Poly::zero()));
    }
    if fdot.degree() > n.max(1) - 1 {
        return Err(Error::SingularSylvester(format!(
            "correction degree {} exceeds capacity {}",
            fdot.degree(),
            n as i64 - 1
        )));
    }
    if n == 0 {
        return Ok((Poly::zero(), Poly::zero()));
    }

    let mut mat = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..l {
        for (i, &c) in delta.coeffs().iter().enumerate() {
            mat[(j + i, j)] = c;
        }
    }
    for j in 0..m {
        for (i, &c) in s.coeffs().iter().enumerate() {
            mat[(j + i, l + j)] = c * 0.5;
        }
    }

    let mut hadamard = 1.0f64;
    for j in 0..n {
        hadamard *= mat.column(j).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    }
    let lu = mat.clone().lu();
    let det = lu.determinant();
    if hadamard == 0.0 || det.norm() < SYLVESTER_RESULTANT_TOL * hadamard {
        return Err(Error::SingularSylvester(format!(
            "relative resultant {:.3e}",
            if hadamard == 0.0 { 0.0 } else { det.norm() / hadamard }
        )));
    }

    let mut rhs = DVector::<Complex64>::zeros(n);
    for (i, &c) in fdot.coeffs().iter().enumerate() {
        rhs[i] = c;
    }
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSylvester("LU solve failed".into()))?;

    let sdot = Poly::new(sol.iter().take(l).copied().collect::<Vec<_>>());
    let ddot = Poly::new(sol.iter().skip(l).copied().collect::<Vec<_>>());

    let recomposed = &(&sdot * delta) + &(&s.scale(Complex64::new(0.5, 0.0)) * &ddot);
    let residual = (&recomposed - fdot).coeff_norm();
    if residual > SYLVESTER_RESIDUAL_TOL * fdot.coeff_norm() {
        return Err(Error::SingularSylvester(format!(
            "split residual {:.3e} above tolerance",
            residual
        )));
    }
    Ok((sdot, ddot))
}

/// Residual of a candidate split, for post-hoc verification.
pub fn sylvester_residual(s: &Poly, delta: &Poly, sdot: &Poly, ddot: &Poly, fdot: &Poly) -> f64 {
    let recomposed = &(sdot * delta) + &(&s.scale(Complex64::new(0.5, 0.0)) * ddot);
    (&recomposed - fdot).coeff_norm()
}
