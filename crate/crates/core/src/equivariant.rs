//! Equivariant symplectic maps and their generating functions.
//!
//! A small factor `S` (no eigenvalue near -1) has the elementary generating
//! function `f(w) = 1/2 w^T B w` with `B = 2J(I - S)(I + S)^{-1}`, which is the
//! unique quadratic form with `grad f((z + Sz)/2) = J(z - Sz)`. A tuple of
//! factors is assembled into
//! `F(v_1..v_n) = sum_k f_k((v_k + v_{k+1})/2) + 1/2 <v_k, J v_{k+1}>`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{GfhError, Result};
use crate::flow::FlowFactor;
use crate::linalg::{
    commutator_residual, generator_commutator_residual, j_matrix, realify, rho, rho_generator, symmetric_eigenvalues,
    symmetrize, symmetry_residual, symplectic_residual,
};
use crate::weights::{is_prime, Weights};

/// Minimal angular distance (radians) of the spectrum of a factor from -1.
pub const SMALLNESS_ANGLE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct EquivariantLinearMap {
    matrix: DMatrix<f64>,
    weights: Weights,
}

impl EquivariantLinearMap {
    pub fn new(matrix: DMatrix<f64>, weights: Weights) -> Result<Self> {
        let n = weights.real_dim();
        if matrix.shape() != (n, n) {
            return Err(GfhError::Structural(format!("matrix is {:?}, expected {n}x{n}", matrix.shape())));
        }
        let sr = symplectic_residual(&matrix);
        if sr > 1e-10 {
            return Err(GfhError::InvariantViolation(format!("map is not symplectic (residual {sr:.2e})")));
        }
        let cr = commutator_residual(&matrix, &rho_generator(&weights));
        if cr > 1e-10 {
            return Err(GfhError::InvariantViolation(format!(
                "map does not commute with the circle action (residual {cr:.2e})"
            )));
        }
        Ok(Self { matrix, weights })
    }

    pub(crate) fn new_unchecked(matrix: DMatrix<f64>, weights: Weights) -> Self {
        Self { matrix, weights }
    }

    pub fn from_complex(weights: Weights, a: &DMatrix<Complex64>) -> Result<Self> {
        Self::new(realify(a), weights)
    }

    pub fn identity(weights: &Weights) -> Self {
        let n = weights.real_dim();
        Self { matrix: DMatrix::identity(n, n), weights: weights.clone() }
    }

    /// `delta_t = rho_q(-t)`.
    pub fn delta(weights: &Weights, t: f64) -> Self {
        Self { matrix: rho(weights, -t), weights: weights.clone() }
    }

    /// `diag(exp(2 i pi a_j))`.
    pub fn rotation(weights: &Weights, a: &[f64]) -> Result<Self> {
        if a.len() != weights.len() {
            return Err(GfhError::Structural("one rotation fraction per coordinate is required".into()));
        }
        let angles: Vec<f64> = a.iter().map(|x| 2.0 * PI * x).collect();
        Ok(Self { matrix: crate::linalg::diag_rotation(&angles), weights: weights.clone() })
    }

    /// Random unitary map preserving the weight blocks, obtained as the
    /// Cayley transform of `i H` with H Hermitian with entries of size
    /// `scale`.
    pub fn random<R: Rng>(weights: &Weights, scale: f64, rng: &mut R) -> Self {
        let n = weights.len();
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                if weights.get(i) != weights.get(j) {
                    continue;
                }
                if i == j {
                    h[(i, i)] = Complex64::new(rng.random_range(-1.0..1.0) * scale, 0.0);
                } else {
                    let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
                    h[(i, j)] = c;
                    h[(j, i)] = c.conj();
                }
            }
        }
        let ih = h * Complex64::new(0.0, 0.5);
        let id = DMatrix::<Complex64>::identity(n, n);
        let u = (&id - &ih).try_inverse().expect("I - iH/2 is invertible") * (&id + &ih);
        Self { matrix: realify(&u), weights: weights.clone() }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    /// Inverse via `M^{-1} = -J M^T J`.
    pub fn inverse(&self) -> Self {
        let j = j_matrix(self.weights.len());
        Self { matrix: -(&j * self.matrix.transpose() * &j), weights: self.weights.clone() }
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix * &other.matrix, weights: self.weights.clone() }
    }

    /// Smallest distance from -1 of the complex eigenvalues.
    pub fn distance_from_minus_one(&self) -> f64 {
        distance_from_minus_one(&self.matrix)
    }
}

pub fn distance_from_minus_one(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|l| (l + Complex64::new(1.0, 0.0)).norm()).fold(f64::INFINITY, f64::min)
}

fn smallness_bound() -> f64 {
    2.0 * (SMALLNESS_ANGLE / 2.0).sin()
}

/// Real symmetric form `x -> 1/2 x^T H x`, optionally flagged invariant under
/// the diagonal action of an acting weight tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    matrix: DMatrix<f64>,
    acting: Option<Weights>,
}

impl QuadraticForm {
    pub fn new(matrix: DMatrix<f64>, acting: Option<Weights>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(GfhError::Structural("quadratic form needs a nonempty square matrix".into()));
        }
        let scale = matrix.amax().max(1.0);
        let sr = symmetry_residual(&matrix);
        if sr > 1e-12 * scale {
            return Err(GfhError::Structural(format!("matrix is not symmetric (residual {sr:.2e})")));
        }
        let matrix = if sr == 0.0 { matrix } else { symmetrize(&matrix) };
        if let Some(w) = &acting {
            if w.real_dim() != matrix.nrows() {
                return Err(GfhError::Structural("acting weights do not match the dimension".into()));
            }
            let cr = generator_commutator_residual(&matrix, w);
            if cr > 1e-10 * scale {
                return Err(GfhError::InvariantViolation(format!("form is not S^1-invariant (residual {cr:.2e})")));
            }
        }
        Ok(Self { matrix, acting })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn acting_weights(&self) -> Option<&Weights> {
        self.acting.as_ref()
    }

    pub fn is_invariant(&self) -> bool {
        self.acting.is_some()
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.matrix * x))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        symmetric_eigenvalues(&self.matrix)
    }
}

/// Hessian `B = 2J(I - S)(I + S)^{-1}` of the elementary generating function.
pub fn cayley_hessian(s: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = s.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let inv = (&id + s).try_inverse()?;
    let j = j_matrix(n / 2);
    Some(symmetrize(&(j * 2.0 * (&id - s) * inv)))
}

/// Elementary generating function of a small equivariant factor.
pub fn cayley_gf(s: &EquivariantLinearMap) -> Result<QuadraticForm> {
    cayley_gf_indexed(s, 0)
}

fn cayley_gf_indexed(s: &EquivariantLinearMap, index: usize) -> Result<QuadraticForm> {
    let dist = s.distance_from_minus_one();
    if dist < smallness_bound() {
        return Err(GfhError::FactorTooLarge { index, distance: dist });
    }
    let b = cayley_hessian(s.matrix()).ok_or(GfhError::FactorTooLarge { index, distance: dist })?;
    QuadraticForm::new(b, Some(s.weights().clone()))
}

/// Inverse relation `S = (B + 2J)^{-1}(2J - B)`.
pub fn regenerate(f: &QuadraticForm) -> Result<DMatrix<f64>> {
    let b = f.matrix();
    let j2 = j_matrix(b.nrows() / 2) * 2.0;
    let inv = (b + &j2).try_inverse().ok_or_else(|| GfhError::Structural("form does not generate a map".into()))?;
    Ok(inv * (j2 - b))
}

/// One factor of a tuple.
#[derive(Debug, Clone)]
pub enum Factor {
    Linear(EquivariantLinearMap),
    Flow(FlowFactor),
}

impl Factor {
    pub fn is_linear(&self) -> bool {
        matches!(self, Factor::Linear(_))
    }

    pub fn weights(&self) -> &Weights {
        match self {
            Factor::Linear(m) => m.weights(),
            Factor::Flow(f) => f.weights(),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            Factor::Linear(m) => Factor::Linear(m.inverse()),
            Factor::Flow(f) => Factor::Flow(f.inverse()),
        }
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Factor::Linear(m) => m.matrix() * x,
            Factor::Flow(f) => f.apply(x),
        }
    }

    pub fn apply_with_jacobian(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        match self {
            Factor::Linear(m) => (m.matrix() * x, m.matrix().clone()),
            Factor::Flow(f) => f.apply_with_jacobian(x),
        }
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        match (self, other) {
            (Factor::Linear(a), Factor::Linear(b)) => (a.matrix() - b.matrix()).amax() <= tol,
            (Factor::Flow(a), Factor::Flow(b)) => {
                a.hamiltonian() == b.hamiltonian() && (a.duration() - b.duration()).abs() <= tol
            }
            _ => false,
        }
    }
}

impl From<EquivariantLinearMap> for Factor {
    fn from(m: EquivariantLinearMap) -> Self {
        Factor::Linear(m)
    }
}

/// Ordered tuple of small factors.
#[derive(Debug, Clone)]
pub struct GFTuple {
    weights: Weights,
    factors: Vec<Factor>,
}

impl GFTuple {
    pub fn new(weights: Weights, factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(GfhError::Structural("a tuple needs at least one factor".into()));
        }
        for (i, f) in factors.iter().enumerate() {
            if f.weights() != &weights {
                return Err(GfhError::Structural(format!("factor {i} has different weights")));
            }
            if let Factor::Linear(m) = f {
                let dist = m.distance_from_minus_one();
                if dist < smallness_bound() {
                    return Err(GfhError::FactorTooLarge { index: i, distance: dist });
                }
            }
        }
        Ok(Self { weights, factors })
    }

    pub fn from_linear(weights: Weights, maps: Vec<EquivariantLinearMap>) -> Result<Self> {
        Self::new(weights, maps.into_iter().map(Factor::Linear).collect())
    }

    /// The tuple `(eps, ..., eps)` of n identities.
    pub fn identity(weights: &Weights, n: usize) -> Self {
        let f = Factor::Linear(EquivariantLinearMap::identity(weights));
        Self { weights: weights.clone(), factors: vec![f; n.max(1)] }
    }

    /// Splits a linear map into `n` equal factors using a principal
    /// logarithm on each weight block; fails if the map has -1 as eigenvalue.
    pub fn split_linear(map: &EquivariantLinearMap, n: usize) -> Result<Self> {
        let root = linear_root(map, n)?;
        Self::from_linear(map.weights().clone(), vec![root; n])
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_linear(&self) -> bool {
        self.factors.iter().all(Factor::is_linear)
    }

    pub fn linear_factors(&self) -> Option<Vec<&EquivariantLinearMap>> {
        self.factors
            .iter()
            .map(|f| match f {
                Factor::Linear(m) => Some(m),
                Factor::Flow(_) => None,
            })
            .collect()
    }

    /// Matrix of the composed map (last factor applied last).
    pub fn composed_matrix(&self) -> Option<DMatrix<f64>> {
        let fs = self.linear_factors()?;
        let n = self.weights.real_dim();
        Some(fs.iter().fold(DMatrix::identity(n, n), |acc, m| m.matrix() * acc))
    }

    pub fn composed_map(&self) -> Option<EquivariantLinearMap> {
        self.composed_matrix().map(|m| EquivariantLinearMap::new_unchecked(m, self.weights.clone()))
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.factors.iter().fold(x.clone(), |y, f| f.apply(&y))
    }

    /// Orbit points `z_1 = x, z_{k+1} = factor_k(z_k)` and factor Jacobians.
    pub fn orbit_with_jacobians(&self, x: &DVector<f64>) -> (Vec<DVector<f64>>, Vec<DMatrix<f64>>) {
        let mut pts = Vec::with_capacity(self.len() + 1);
        let mut jacs = Vec::with_capacity(self.len());
        pts.push(x.clone());
        for f in &self.factors {
            let (y, j) = f.apply_with_jacobian(pts.last().unwrap());
            pts.push(y);
            jacs.push(j);
        }
        (pts, jacs)
    }

    pub fn inverse(&self) -> Self {
        Self { weights: self.weights.clone(), factors: self.factors.iter().rev().map(Factor::inverse).collect() }
    }

    /// `(self, eps, other)`.
    pub fn concat_eps(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.push(Factor::Linear(EquivariantLinearMap::identity(&self.weights)));
        factors.extend(other.factors.iter().cloned());
        Self { weights: self.weights.clone(), factors }
    }

    /// Plain concatenation `(self, other)`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self { weights: self.weights.clone(), factors }
    }

    pub fn power(&self, p: usize) -> Self {
        let mut factors = Vec::with_capacity(self.len() * p);
        for _ in 0..p.max(1) {
            factors.extend(self.factors.iter().cloned());
        }
        Self { weights: self.weights.clone(), factors }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.len() == other.len() && self.factors.iter().zip(&other.factors).all(|(a, b)| a.approx_eq(b, tol))
    }
}

/// n-th root of an equivariant unitary map through its complex Schur form.
fn linear_root(map: &EquivariantLinearMap, n: usize) -> Result<EquivariantLinearMap> {
    let a = crate::linalg::complexify(map.matrix());
    let schur = a.clone().schur();
    let (q, t) = schur.unpack();
    let dim = t.nrows();
    let mut log_t = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        let l = t[(i, i)];
        if (l + Complex64::new(1.0, 0.0)).norm() < 1e-9 {
            return Err(GfhError::Unsupported("map has eigenvalue -1; pass explicit factors".into()));
        }
        log_t[(i, i)] = l.ln();
    }
    // A unitary map has a diagonal Schur form up to rounding.
    let off = (0..dim)
        .flat_map(|i| (0..dim).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| t[(i, j)].norm())
        .fold(0.0, f64::max);
    if off > 1e-8 {
        return Err(GfhError::Unsupported("only unitary maps can be split automatically".into()));
    }
    let mut diag = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        diag[(i, i)] = (log_t[(i, i)] / n as f64).exp();
    }
    let root = &q * diag * q.adjoint();
    EquivariantLinearMap::from_complex(map.weights().clone(), &root)
}

/// Assembles `1/2 x^T H x = F(x)` from factor Hessians `B_k`.
pub fn assemble_hessian(bs: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n = bs.len();
    let d = bs[0].nrows();
    let mut h = DMatrix::zeros(n * d, n * d);
    let j = j_matrix(d / 2);
    for (k, b) in bs.iter().enumerate() {
        let k1 = (k + 1) % n;
        let q = b * 0.25;
        for (r, c) in [(k, k), (k, k1), (k1, k), (k1, k1)] {
            let mut blk = h.view_mut((r * d, c * d), (d, d));
            blk += &q;
        }
        if n > 1 {
            let mut blk = h.view_mut((k * d, k1 * d), (d, d));
            blk += &j * 0.5;
            let mut blk = h.view_mut((k1 * d, k * d), (d, d));
            blk -= &j * 0.5;
        }
    }
    // Symmetric by construction: B_k is symmetric and J is antisymmetric.
    h
}

/// Cayley Hessians of a list of factor matrices, naming the first offender.
pub fn factor_hessians(mats: &[&DMatrix<f64>]) -> Result<Vec<DMatrix<f64>>> {
    mats.iter()
        .enumerate()
        .map(|(i, s)| {
            let dist = distance_from_minus_one(s);
            if dist < smallness_bound() {
                return Err(GfhError::FactorTooLarge { index: i, distance: dist });
            }
            cayley_hessian(s).ok_or(GfhError::FactorTooLarge { index: i, distance: dist })
        })
        .collect()
}

/// The quadratic generating function `F_sigma` of a linear tuple.
pub fn assemble_f(t: &GFTuple) -> Result<QuadraticForm> {
    let fs = t.linear_factors().ok_or_else(|| GfhError::Unsupported("assemble_F needs a linear tuple".into()))?;
    let mats: Vec<&DMatrix<f64>> = fs.iter().map(|m| m.matrix()).collect();
    let bs = factor_hessians(&mats)?;
    QuadraticForm::new(assemble_hessian(&bs), Some(t.weights().repeat(t.len())))
}

/// Odd C^1 cutoff: identity on `[-m-1/4, m+1/4]`, constant `m+1/2` beyond
/// `m+3/4`, monotone quadratic blend in between.
pub fn chi(m: usize, x: f64) -> f64 {
    let mf = m as f64;
    let a = x.abs();
    let y = if a <= mf + 0.25 {
        a
    } else if a >= mf + 0.75 {
        mf + 0.5
    } else {
        let s = (a - mf - 0.25) / 0.5;
        mf + 0.25 + s / 2.0 - s * s / 4.0
    };
    y.copysign(x)
}

/// Tuple of `m * n0` factors generating `rho_q(-t)`, for `|t| < m + 1`.
pub fn delta_family(w: &Weights, m: usize, t: f64) -> Result<GFTuple> {
    if m == 0 {
        return Err(GfhError::OutOfRange { what: "m", value: 0.0, bound: 1.0 });
    }
    if t.abs() >= m as f64 + 1.0 {
        return Err(GfhError::OutOfRange { what: "t", value: t, bound: m as f64 + 1.0 });
    }
    Ok(GFTuple { weights: w.clone(), factors: delta_factors(w, m, t) })
}

fn delta_factors(w: &Weights, m: usize, t: f64) -> Vec<Factor> {
    let n0 = w.n0();
    if m == 1 {
        let f = Factor::Linear(EquivariantLinearMap::delta(w, t / n0 as f64));
        return vec![f; n0];
    }
    let c = chi(m - 1, t);
    let mut fs = delta_factors(w, m - 1, c);
    fs.extend(delta_factors(w, 1, t - c));
    fs
}

/// `sigma_{m,t} = (sigma, delta^{(m)}_t)` for `|t| <= m`.
pub fn sigma_family(s: &GFTuple, m: usize, t: f64) -> Result<GFTuple> {
    if t.abs() > m as f64 {
        return Err(GfhError::OutOfRange { what: "t", value: t, bound: m as f64 });
    }
    // n0 is even, so the family has odd length exactly when sigma does; an
    // even-length assembly carries a spurious kernel.
    if s.len().is_multiple_of(2) {
        return Err(GfhError::Structural(format!("tuple length {} must be odd", s.len())));
    }
    Ok(s.concat(&delta_family(s.weights(), m, t)?))
}

/// Splits `Q` on `base (+) fiber` into its base part `a - b c^{-1} b^T` and
/// the fiber block `c`.
pub fn normalize_quadratic_gf(q: &QuadraticForm, base_dim: usize) -> Result<(QuadraticForm, QuadraticForm)> {
    let n = q.dim();
    if base_dim == 0 || base_dim >= n {
        return Err(GfhError::Structural("base dimension must be strictly between 0 and dim".into()));
    }
    let h = q.matrix();
    let a = h.view((0, 0), (base_dim, base_dim)).into_owned();
    let b = h.view((0, base_dim), (base_dim, n - base_dim)).into_owned();
    let c = h.view((base_dim, base_dim), (n - base_dim, n - base_dim)).into_owned();
    let ev = symmetric_eigenvalues(&c);
    let big = ev.iter().fold(1.0_f64, |m, e| m.max(e.abs()));
    if ev.iter().any(|e| e.abs() <= 1e-10 * big) {
        return Err(GfhError::NotElementary);
    }
    let cinv = c.clone().try_inverse().ok_or(GfhError::NotElementary)?;
    let base = symmetrize(&(a - &b * cinv * b.transpose()));
    let (wb, wf) = match q.acting_weights() {
        Some(w) if base_dim.is_multiple_of(2) => {
            let s = w.as_slice();
            let k = base_dim / 2;
            (Some(Weights::new(s[..k].to_vec())?), Some(Weights::new(s[k..].to_vec())?))
        }
        _ => (None, None),
    };
    Ok((QuadraticForm::new(base, wb)?, QuadraticForm::new(c, wf)?))
}

/// Max absolute residual of the change-of-variables identity
/// `F_{s^p}(v, rho(r/p)v, ...) = p [F_s(u) + f_{delta_{r/p}}(u_1)]` over
/// random probes.
pub fn smith_change_of_variables<R: Rng>(s: &GFTuple, p: u32, r: i64, probes: usize, rng: &mut R) -> Result<f64> {
    let w = s.weights();
    if p < 3 || !is_prime(p as u64) {
        return Err(GfhError::OutOfRange { what: "p (odd prime)", value: p as f64, bound: 3.0 });
    }
    if w.as_slice().iter().any(|&q| q % p == 0) {
        return Err(GfhError::FieldGate { field: format!("f{p}"), weights: w.as_slice().to_vec() });
    }
    if s.len().is_multiple_of(2) {
        return Err(GfhError::Structural("the identity needs a tuple of odd length".into()));
    }
    let r = r.rem_euclid(p as i64);
    let big = assemble_f(&s.power(p as usize))?;
    let small = assemble_f(s)?;
    let frac = r as f64 / p as f64;
    let fdelta = cayley_gf(&EquivariantLinearMap::delta(w, frac))?;
    let d = w.real_dim();
    let n = s.len();
    let rot = rho(&w.repeat(n), frac);
    let rot1 = rho(w, frac);
    let id = DMatrix::<f64>::identity(d, d);
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let v = DVector::from_fn(n * d, |_, _| rng.random_range(-1.0..1.0));
        let mut x = DVector::zeros(n * d * p as usize);
        let mut blk = v.clone();
        for k in 0..p as usize {
            x.rows_mut(k * n * d, n * d).copy_from(&blk);
            blk = &rot * blk;
        }
        let lhs = big.value(&x);
        let v1 = v.rows(0, d).into_owned();
        let shift = (&id - &rot1) * &v1 * 0.5;
        let mut u = v.clone();
        for k in 1..=n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let mut seg = u.rows_mut((k - 1) * d, d);
            seg += &shift * sign;
        }
        let u1 = u.rows(0, d).into_owned();
        let rhs = p as f64 * (small.value(&u) + fdelta.value(&u1));
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::diag_rotation;

    fn w(q: &[u32]) -> Weights {
        Weights::new(q.to_vec()).unwrap()
    }

    #[test]
    fn delta_generating_function_is_tangent_form() {
        let q = w(&[1, 2, 3]);
        let t = 0.07;
        let f = cayley_gf(&EquivariantLinearMap::delta(&q, t)).unwrap();
        let x: DVector<f64> = DVector::from_vec(vec![0.3, -0.2, 0.5, 0.1, -0.4, 0.25]);
        let expect: f64 = (0..3)
            .map(|j| {
                let qj = q.get(j) as f64;
                -(qj * PI * t).tan() * (x[2 * j].powi(2) + x[2 * j + 1].powi(2))
            })
            .sum();
        assert!((f.value(&x) - expect).abs() < 1e-12);
    }

    #[test]
    fn identity_has_zero_form() {
        let q = w(&[2, 5]);
        let f = cayley_gf(&EquivariantLinearMap::identity(&q)).unwrap();
        assert_eq!(f.matrix().amax(), 0.0);
    }

    #[test]
    fn large_factor_is_rejected() {
        let q = w(&[1, 1]);
        let m = EquivariantLinearMap::rotation(&q, &[0.5, 0.1]).unwrap();
        assert!(matches!(cayley_gf(&m), Err(GfhError::FactorTooLarge { .. })));
    }

    #[test]
    fn gradient_relation_holds() {
        // grad f((z + Sz)/2) = J(z - Sz)
        let q = w(&[1, 1, 2]);
        let mut rng = crate::rng(11);
        let s = EquivariantLinearMap::random(&q, 0.4, &mut rng);
        let f = cayley_gf(&s).unwrap();
        let z = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
        let sz = s.matrix() * &z;
        let lhs = f.matrix() * ((&z + &sz) * 0.5);
        let rhs = j_matrix(3) * (&z - &sz);
        assert!((lhs - rhs).amax() < 1e-12);
    }

    #[test]
    fn chi_plateaus_and_monotonicity() {
        for m in 1..4 {
            let mf = m as f64;
            assert_eq!(chi(m, mf + 0.2), mf + 0.2);
            assert_eq!(chi(m, -mf - 0.9), -mf - 0.5);
            let mut prev = chi(m, 0.0);
            for i in 1..2000 {
                let x = i as f64 * 0.003;
                let y = chi(m, x);
                assert!(y >= prev);
                prev = y;
            }
            // C^1 at the joins.
            let e = 1e-7;
            for a in [mf + 0.25, mf + 0.75] {
                let l = (chi(m, a) - chi(m, a - e)) / e;
                let r = (chi(m, a + e) - chi(m, a)) / e;
                assert!((l - r).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn delta_family_generates_rotation() {
        let q = w(&[1, 2]);
        for (m, t) in [(1, 0.9), (2, 1.7), (3, -2.4)] {
            let d = delta_family(&q, m, t).unwrap();
            assert_eq!(d.len(), m * q.n0());
            let c = d.composed_matrix().unwrap();
            assert!((c - rho(&q, -t)).amax() < 1e-12);
        }
        assert!(delta_family(&q, 1, 2.0).is_err());
    }

    #[test]
    fn delta_family_compatibility() {
        let q = w(&[1, 2]);
        let t = 0.8;
        let big = delta_family(&q, 2, t).unwrap();
        let small = delta_family(&q, 1, t).unwrap().concat(&GFTuple::identity(&q, q.n0()));
        assert!(big.approx_eq(&small, 0.0));
    }

    #[test]
    fn assembled_delta_tuple_kernel() {
        let q = w(&[1, 1]);
        let t = delta_family(&q, 1, 0.0).unwrap().concat(&GFTuple::identity(&q, 1));
        let f = assemble_f(&t).unwrap();
        let zero = f.eigenvalues().iter().filter(|e| e.abs() < 1e-9).count();
        assert_eq!(zero, 2 * q.len());
    }

    #[test]
    fn tuple_algebra() {
        let q = w(&[1, 2]);
        let mut rng = crate::rng(5);
        let maps: Vec<_> = (0..3).map(|_| EquivariantLinearMap::random(&q, 0.5, &mut rng)).collect();
        let s = GFTuple::from_linear(q.clone(), maps).unwrap();
        assert!(s.inverse().inverse().approx_eq(&s, 1e-14));
        assert!(s.power(1).approx_eq(&s, 0.0));
        let phi = s.composed_matrix().unwrap();
        let p3 = s.power(3).composed_matrix().unwrap();
        assert!((p3 - &phi * &phi * &phi).amax() < 1e-10);
        let inv = s.inverse().composed_matrix().unwrap();
        assert!((inv * phi - DMatrix::identity(4, 4)).amax() < 1e-12);
        assert_eq!(s.concat_eps(&s).len(), 7);
    }

    #[test]
    fn split_linear_recomposes() {
        let q = w(&[1, 1, 2]);
        let mut rng = crate::rng(8);
        let m = EquivariantLinearMap::random(&q, 1.5, &mut rng);
        let t = GFTuple::split_linear(&m, 5).unwrap();
        assert!((t.composed_matrix().unwrap() - m.matrix()).amax() < 1e-10);
    }

    #[test]
    fn block_diagonal_normalization_is_identity() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, -2.0]);
        let c = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, -1.0]);
        let q = QuadraticForm::new(crate::linalg::block_diag(&[a.clone(), c.clone()]), None).unwrap();
        let (b, r) = normalize_quadratic_gf(&q, 2).unwrap();
        assert!((b.matrix() - a).amax() < 1e-14);
        assert!((r.matrix() - c).amax() < 1e-14);
    }

    #[test]
    fn singular_fiber_is_not_elementary() {
        let q = QuadraticForm::new(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0])), None).unwrap();
        assert!(matches!(normalize_quadratic_gf(&q, 1), Err(GfhError::NotElementary)));
    }

    #[test]
    fn smith_identity_trivial_shift() {
        let q = w(&[1, 2]);
        let mut rng = crate::rng(2);
        let maps: Vec<_> = (0..3).map(|_| EquivariantLinearMap::random(&q, 0.4, &mut rng)).collect();
        let s = GFTuple::from_linear(q, maps).unwrap();
        assert!(smith_change_of_variables(&s, 5, 0, 5, &mut rng).unwrap() < 1e-12);
        assert!(smith_change_of_variables(&s, 5, 2, 5, &mut rng).unwrap() < 1e-8);
        assert!(smith_change_of_variables(&s, 3, 1, 1, &mut rng).is_ok());
        let q3 = w(&[1, 3]);
        let s3 = GFTuple::identity(&q3, 1);
        assert!(matches!(smith_change_of_variables(&s3, 3, 1, 1, &mut rng), Err(GfhError::FieldGate { .. })));
    }

    #[test]
    fn diag_rotation_is_equivariant() {
        let q = w(&[1, 3]);
        let m = EquivariantLinearMap::new(diag_rotation(&[0.2, -0.4]), q).unwrap();
        assert!(cayley_gf(&m).unwrap().is_invariant());
    }
}
