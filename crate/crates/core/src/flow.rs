//! Flows of 2-homogeneous S^1-invariant Hamiltonians on C^{d+1}.
//!
//! A Hamiltonian is a finite sum of terms
//! `Re(c z^alpha conj(z)^beta) * (K(z)/pi)^(1 - (|alpha|+|beta|)/2)`
//! with `sum_j q_j (alpha_j - beta_j) = 0`. Each term is positively
//! 2-homogeneous and invariant under the weighted circle action. On the
//! weighted sphere the normalizing factor is 1, so the restriction is the
//! polynomial itself.
//!
//! The flow solves `dz/ds = -i grad H(z)`; with this sign a Hamiltonian equal
//! to the constant c on the sphere generates `rho(-c s / pi)`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GfhError, Result};
use crate::linalg::{j_matrix, rho, to_complex, to_real};
use crate::weights::{moment_map, Weights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantMonomial {
    pub re: f64,
    pub im: f64,
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
}

impl InvariantMonomial {
    fn coeff(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    fn degree(&self) -> u32 {
        self.alpha.iter().sum::<u32>() + self.beta.iter().sum::<u32>()
    }

    fn eval(&self, z: &[Complex64], skip: Option<(usize, bool)>) -> Complex64 {
        match skip {
            Some(d) => self.derivative(z, &[d]),
            None => self.derivative(z, &[]),
        }
    }

    /// `z^alpha conj(z)^beta` differentiated once per entry of `wrt`, where
    /// `(j, false)` is `d/dz_j` and `(j, true)` is `d/dconj(z_j)`.
    fn derivative(&self, z: &[Complex64], wrt: &[(usize, bool)]) -> Complex64 {
        let mut v = self.coeff();
        for (j, zj) in z.iter().enumerate() {
            let (mut a, mut b) = (self.alpha[j], self.beta[j]);
            for &(k, conj) in wrt {
                if k != j {
                    continue;
                }
                let e = if conj { &mut b } else { &mut a };
                if *e == 0 {
                    return Complex64::new(0.0, 0.0);
                }
                v *= *e as f64;
                *e -= 1;
            }
            if a > 0 {
                v *= zj.powu(a);
            }
            if b > 0 {
                v *= zj.conj().powu(b);
            }
        }
        v
    }

    /// Real Hessian of `Re(c z^alpha conj(z)^beta)` in interleaved coordinates.
    fn real_hessian(&self, z: &[Complex64]) -> DMatrix<f64> {
        let n = z.len();
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        let i = Complex64::new(0.0, 1.0);
        for j in 0..n {
            for k in j..n {
                let zz = self.derivative(z, &[(j, false), (k, false)]);
                let zb = self.derivative(z, &[(j, false), (k, true)]);
                let bz = self.derivative(z, &[(j, true), (k, false)]);
                let bb = self.derivative(z, &[(j, true), (k, true)]);
                let xx = (zz + zb + bz + bb).re;
                let xy = (i * (zz - zb + bz - bb)).re;
                let yx = (i * (zz + zb - bz - bb)).re;
                let yy = -(zz - zb - bz + bb).re;
                for (r, c, v) in [(0, 0, xx), (0, 1, xy), (1, 0, yx), (1, 1, yy)] {
                    h[(2 * j + r, 2 * k + c)] = v;
                    h[(2 * k + c, 2 * j + r)] = v;
                }
            }
        }
        h
    }
}

/// A 2-homogeneous S^1-invariant Hamiltonian given by invariant monomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantHamiltonian {
    weights: Weights,
    terms: Vec<InvariantMonomial>,
}

impl InvariantHamiltonian {
    pub fn new(weights: Weights, terms: Vec<InvariantMonomial>) -> Result<Self> {
        for (i, t) in terms.iter().enumerate() {
            if t.alpha.len() != weights.len() || t.beta.len() != weights.len() {
                return Err(GfhError::Scene(format!("term {i}: exponent vectors must have length {}", weights.len())));
            }
            let charge: i64 = weights
                .as_slice()
                .iter()
                .zip(t.alpha.iter().zip(&t.beta))
                .map(|(&q, (&a, &b))| q as i64 * (a as i64 - b as i64))
                .sum();
            if charge != 0 {
                return Err(GfhError::InvariantViolation(format!(
                    "term {i} has circle charge {charge}; it is not S^1-invariant"
                )));
            }
        }
        Ok(Self { weights, terms })
    }

    /// H = pi sum_j c_j q_j |z_j|^2, generating the diagonal rotation
    /// `z_j -> exp(-2 i pi c_j q_j s) z_j`.
    pub fn rotation(weights: &Weights, c: &[f64]) -> Result<Self> {
        let n = weights.len();
        let terms = c
            .iter()
            .enumerate()
            .map(|(j, &cj)| {
                let mut e = vec![0; n];
                e[j] = 1;
                InvariantMonomial { re: PI * cj * weights.get(j) as f64, im: 0.0, alpha: e.clone(), beta: e }
            })
            .collect();
        Self::new(weights.clone(), terms)
    }

    /// Constant c on the weighted sphere.
    pub fn constant(weights: &Weights, c: f64) -> Self {
        let n = weights.len();
        Self {
            weights: weights.clone(),
            terms: vec![InvariantMonomial { re: c, im: 0.0, alpha: vec![0; n], beta: vec![0; n] }],
        }
    }

    pub fn zero(weights: &Weights) -> Self {
        Self { weights: weights.clone(), terms: Vec::new() }
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn terms(&self) -> &[InvariantMonomial] {
        &self.terms
    }

    pub fn scaled(&self, s: f64) -> Self {
        let terms = self.terms.iter().map(|t| InvariantMonomial { re: t.re * s, im: t.im * s, ..t.clone() }).collect();
        Self { weights: self.weights.clone(), terms }
    }

    pub fn value(&self, z: &[Complex64]) -> f64 {
        let kn = moment_map(&self.weights, z) / PI;
        self.terms
            .iter()
            .map(|t| {
                let e = 1.0 - t.degree() as f64 / 2.0;
                t.eval(z, None).re * kn.powf(e)
            })
            .sum()
    }

    /// Gradient in complex notation: the vector `dH/dx_j + i dH/dy_j`.
    pub fn gradient(&self, z: &[Complex64]) -> Vec<Complex64> {
        let n = z.len();
        let kn = moment_map(&self.weights, z) / PI;
        let mut g = vec![Complex64::new(0.0, 0.0); n];
        for t in &self.terms {
            let e = 1.0 - t.degree() as f64 / 2.0;
            let s = kn.powf(e);
            let m = t.eval(z, None).re;
            let ds = if e != 0.0 { e * kn.powf(e - 1.0) } else { 0.0 };
            for j in 0..n {
                let dz = t.eval(z, Some((j, false)));
                let dzb = t.eval(z, Some((j, true)));
                let grad_re = dzb + dz.conj();
                let grad_s = z[j] * (2.0 * self.weights.get(j) as f64 * ds);
                g[j] += grad_re * s + grad_s * m;
            }
        }
        g
    }

    pub fn gradient_real(&self, x: &DVector<f64>) -> DVector<f64> {
        to_real(&self.gradient(&to_complex(x)))
    }

    /// Exact real Hessian: each term is `f g` with `f = Re(c z^alpha conj(z)^beta)`
    /// and `g = kn^e` for `kn = K/pi`.
    pub fn hessian_real(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = x.len();
        let z = to_complex(x);
        let kn = moment_map(&self.weights, &z) / PI;
        let dkn = DVector::from_iterator(n, (0..n).map(|i| 2.0 * self.weights.get(i / 2) as f64 * x[i]));
        let mut out = DMatrix::zeros(n, n);
        for t in &self.terms {
            let e = 1.0 - t.degree() as f64 / 2.0;
            let hf = t.real_hessian(&z);
            if e == 0.0 {
                out += hf;
                continue;
            }
            let f = t.derivative(&z, &[]).re;
            let mut df = DVector::zeros(n);
            for j in 0..n / 2 {
                let dz = t.derivative(&z, &[(j, false)]);
                let dzb = t.derivative(&z, &[(j, true)]);
                df[2 * j] = (dz + dzb).re;
                df[2 * j + 1] = (Complex64::new(0.0, 1.0) * (dz - dzb)).re;
            }
            let g = kn.powf(e);
            let dg = &dkn * (e * kn.powf(e - 1.0));
            let mut hg = &dkn * dkn.transpose() * (e * (e - 1.0) * kn.powf(e - 2.0));
            for i in 0..n {
                hg[(i, i)] += e * kn.powf(e - 1.0) * 2.0 * self.weights.get(i / 2) as f64;
            }
            out += hf * g + &df * dg.transpose() + &dg * df.transpose() + hg * f;
        }
        out
    }

    /// Upper bound for `sup |H|` on the weighted sphere `sum q_j |z_j|^2 = 1`:
    /// each monomial is bounded by its maximum of `prod |z_j|^{e_j}`, attained
    /// at `|z_j|^2 = e_j / (q_j sum e)`.
    pub fn sup_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let e: Vec<f64> = t.alpha.iter().zip(&t.beta).map(|(a, b)| (a + b) as f64).collect();
                let total: f64 = e.iter().sum();
                let peak: f64 = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &ej)| ej > 0.0)
                    .map(|(j, &ej)| (ej / (self.weights.get(j) as f64 * total)).powf(ej / 2.0))
                    .product();
                t.coeff().norm() * peak
            })
            .sum()
    }

    /// If H is a diagonal rotation plus a constant, the per-coordinate
    /// values `h(e_j)` on the sphere.
    pub fn axis_values(&self) -> Option<Vec<f64>> {
        let n = self.weights.len();
        let mut vals = vec![0.0; n];
        for t in &self.terms {
            let deg = t.degree();
            if deg == 0 {
                vals.iter_mut().for_each(|v| *v += t.re);
            } else if deg == 2 && t.alpha == t.beta {
                let j = t.alpha.iter().position(|&a| a == 1)?;
                // |z_j|^2 = 1/q_j at the axis point of the sphere.
                vals[j] += t.re / self.weights.get(j) as f64;
            } else {
                return None;
            }
        }
        Some(vals)
    }

    /// Max deviation from 2-homogeneity and circle invariance at random
    /// probes.
    pub fn invariance_residual<R: Rng>(&self, rng: &mut R, probes: usize) -> f64 {
        let n = self.weights.len();
        let mut worst: f64 = 0.0;
        for _ in 0..probes {
            let z: Vec<Complex64> =
                (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let h = self.value(&z);
            let lam: f64 = rng.random_range(0.3..3.0);
            let zl: Vec<Complex64> = z.iter().map(|c| c * lam).collect();
            let t: f64 = rng.random_range(0.0..1.0);
            let zr = self.weights.rotate(t, &z);
            let scale = h.abs().max(1.0);
            worst = worst
                .max((self.value(&zl) - lam * lam * h).abs() / (lam * lam * scale))
                .max((self.value(&zr) - h).abs() / scale);
        }
        worst
    }
}

/// Time slice of an autonomous invariant flow, integrated with classic RK4
/// at a fixed step count calibrated at construction.
#[derive(Debug, Clone)]
pub struct FlowFactor {
    ham: Arc<InvariantHamiltonian>,
    duration: f64,
    steps: usize,
}

/// Richardson tolerance used when calibrating step counts.
pub const FLOW_TOLERANCE: f64 = 1e-10;
const MAX_STEPS: usize = 1 << 16;

impl FlowFactor {
    pub fn new(ham: Arc<InvariantHamiltonian>, duration: f64) -> Result<Self> {
        let mut rng = crate::rng(0x5eed);
        let res = ham.invariance_residual(&mut rng, 8);
        if res > 1e-8 {
            return Err(GfhError::InvariantViolation(format!("Hamiltonian fails homogeneity/invariance by {res:.2e}")));
        }
        let mut f = Self { ham, duration, steps: 4 };
        f.calibrate(FLOW_TOLERANCE)?;
        Ok(f)
    }

    pub fn hamiltonian(&self) -> &Arc<InvariantHamiltonian> {
        &self.ham
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn weights(&self) -> &Weights {
        self.ham.weights()
    }

    pub fn inverse(&self) -> Self {
        Self { ham: self.ham.clone(), duration: -self.duration, steps: self.steps }
    }

    fn probes(&self) -> Vec<DVector<f64>> {
        let w = self.ham.weights();
        let mut rng = crate::rng(0xf10);
        (0..6)
            .map(|_| {
                let z: Vec<Complex64> = (0..w.len())
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                let k = moment_map(w, &z);
                to_real(&z) * (PI / k).sqrt()
            })
            .collect()
    }

    fn calibrate(&mut self, tol: f64) -> Result<()> {
        if self.duration == 0.0 || self.ham.terms().is_empty() {
            self.steps = 1;
            return Ok(());
        }
        let probes = self.probes();
        let mut steps = ((self.duration.abs() * 16.0).ceil() as usize).max(4);
        loop {
            let worst = probes
                .iter()
                .map(|x| (self.integrate(x, steps) - self.integrate(x, 2 * steps)).amax())
                .fold(0.0, f64::max);
            if worst < tol {
                self.steps = 2 * steps;
                return Ok(());
            }
            steps *= 2;
            if steps > MAX_STEPS {
                return Err(GfhError::Accuracy(format!(
                    "flow refinement did not converge (residual {worst:.2e} at {steps} steps)"
                )));
            }
        }
    }

    fn field(&self, x: &DVector<f64>) -> DVector<f64> {
        let g = self.ham.gradient_real(x);
        let mut out = DVector::zeros(x.len());
        // -J g: (gx, gy) -> (gy, -gx)
        for k in 0..x.len() / 2 {
            out[2 * k] = g[2 * k + 1];
            out[2 * k + 1] = -g[2 * k];
        }
        out
    }

    fn integrate(&self, x: &DVector<f64>, steps: usize) -> DVector<f64> {
        let h = self.duration / steps as f64;
        let mut y = x.clone();
        for _ in 0..steps {
            let k1 = self.field(&y);
            let k2 = self.field(&(&y + &k1 * (h / 2.0)));
            let k3 = self.field(&(&y + &k2 * (h / 2.0)));
            let k4 = self.field(&(&y + &k3 * h));
            y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        y
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        if self.duration == 0.0 || self.ham.terms().is_empty() {
            return x.clone();
        }
        self.integrate(x, self.steps)
    }

    /// Image and Jacobian, from the variational equation
    /// `dM/ds = -J Hess H(z(s)) M` integrated alongside the flow.
    pub fn apply_with_jacobian(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n = x.len();
        if self.duration == 0.0 || self.ham.terms().is_empty() {
            return (x.clone(), DMatrix::identity(n, n));
        }
        let mj = -j_matrix(n / 2);
        let rhs = |y: &DVector<f64>, m: &DMatrix<f64>| -> (DVector<f64>, DMatrix<f64>) {
            (self.field(y), &mj * self.ham.hessian_real(y) * m)
        };
        let h = self.duration / self.steps as f64;
        let mut y = x.clone();
        let mut m = DMatrix::identity(n, n);
        for _ in 0..self.steps {
            let (a1, b1) = rhs(&y, &m);
            let (a2, b2) = rhs(&(&y + &a1 * (h / 2.0)), &(&m + &b1 * (h / 2.0)));
            let (a3, b3) = rhs(&(&y + &a2 * (h / 2.0)), &(&m + &b2 * (h / 2.0)));
            let (a4, b4) = rhs(&(&y + &a3 * h), &(&m + &b3 * h));
            y += (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0);
            m += (b1 + b2 * 2.0 + b3 * 2.0 + b4) * (h / 6.0);
        }
        (y, m)
    }

    /// Change of the output when the step count is doubled.
    pub fn resolution_residual(&self, x: &DVector<f64>) -> f64 {
        (self.integrate(x, self.steps) - self.integrate(x, 2 * self.steps)).amax()
    }
}

/// Splits the time-one flow of H into `slices` equal factors.
pub fn flow_slices(ham: &Arc<InvariantHamiltonian>, slices: usize) -> Result<Vec<FlowFactor>> {
    if slices == 0 {
        return Err(GfhError::Scene("at least one slice is required".into()));
    }
    let f = FlowFactor::new(ham.clone(), 1.0 / slices as f64)?;
    Ok(vec![f; slices])
}

/// Composite evaluator for a sequence of flow factors.
#[derive(Debug, Clone)]
pub struct FlowMap {
    factors: Vec<FlowFactor>,
}

/// Builds the composite evaluator and checks that it resolves the flow and
/// commutes with the circle action to 1e-7.
pub fn integrate_flow(factors: Vec<FlowFactor>) -> Result<FlowMap> {
    let map = FlowMap { factors };
    if let Some(f) = map.factors.first() {
        let w = f.weights().clone();
        let mut rng = crate::rng(0xe0);
        for _ in 0..4 {
            let z: Vec<Complex64> = (0..w.len())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let x = to_real(&z) * (PI / moment_map(&w, &z)).sqrt();
            let t: f64 = rng.random_range(0.0..1.0);
            let r = rho(&w, t);
            let res = (map.apply(&(&r * &x)) - &r * map.apply(&x)).amax();
            if res > 1e-7 {
                return Err(GfhError::Accuracy(format!("equivariance residual {res:.2e}")));
            }
            let mut y = x.clone();
            for f in &map.factors {
                let r = f.resolution_residual(&y);
                if r > 1e-7 {
                    return Err(GfhError::Accuracy(format!("flow resolution residual {r:.2e}")));
                }
                y = f.apply(&y);
            }
        }
    }
    Ok(map)
}

impl FlowMap {
    pub fn factors(&self) -> &[FlowFactor] {
        &self.factors
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.factors.iter().fold(x.clone(), |y, f| f.apply(&y))
    }

    pub fn apply_with_jacobian(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n = x.len();
        let mut y = x.clone();
        let mut m = DMatrix::identity(n, n);
        for f in &self.factors {
            let (y2, j) = f.apply_with_jacobian(&y);
            m = j * m;
            y = y2;
        }
        (y, m)
    }
}
