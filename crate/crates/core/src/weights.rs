//! Arithmetic and topology of weighted projective spaces CP(q).
//!
//! Complex vectors are `Complex64` slices of length d+1. The circle action is
//! `rho(t) z = (exp(2 i pi q_j t) z_j)`, the moment map is
//! `K(z) = pi * sum q_j |z_j|^2`, and the weighted sphere is `K^{-1}(pi)`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GfhError, Result};

/// Tuple of positive weights q = (q_0, ..., q_d).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Weights {
    q: Vec<u32>,
    total: u32,
}

impl Weights {
    pub fn new(q: Vec<u32>) -> Result<Self> {
        if q.is_empty() {
            return Err(GfhError::InvalidWeights("empty weight tuple".into()));
        }
        if let Some(j) = q.iter().position(|&w| w == 0) {
            return Err(GfhError::InvalidWeights(format!("weight q_{j} is zero")));
        }
        let total = q.iter().sum();
        Ok(Self { q, total })
    }

    /// Complex dimension d of CP(q).
    pub fn dim(&self) -> usize {
        self.q.len() - 1
    }

    /// Number of homogeneous coordinates, d + 1.
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// |q| = sum of the weights.
    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.q
    }

    pub fn get(&self, j: usize) -> u32 {
        self.q[j]
    }

    pub fn max(&self) -> u32 {
        *self.q.iter().max().unwrap()
    }

    pub fn lcm(&self) -> u64 {
        self.q.iter().fold(1u64, |acc, &w| lcm(acc, w as u64))
    }

    /// Real dimension 2(d+1) of the ambient space.
    pub fn real_dim(&self) -> usize {
        2 * self.q.len()
    }

    /// Smallest even integer n0 >= 4 max q_j, the length of the unit
    /// rotation tuple.
    pub fn n0(&self) -> usize {
        let n = 4 * self.max() as usize;
        n + n % 2
    }

    /// The concatenated weight tuple q^n, acting diagonally on (C^{d+1})^n.
    pub fn repeat(&self, n: usize) -> Weights {
        let q: Vec<u32> = (0..n).flat_map(|_| self.q.iter().copied()).collect();
        Weights::new(q).expect("repetition of valid weights")
    }

    /// Weighted circle action applied to a complex vector.
    pub fn rotate(&self, t: f64, z: &[Complex64]) -> Vec<Complex64> {
        z.iter()
            .zip(self.q.iter().cycle())
            .map(|(zj, &qj)| zj * Complex64::from_polar(1.0, 2.0 * PI * qj as f64 * t))
            .collect()
    }
}

impl TryFrom<Vec<u32>> for Weights {
    type Error = GfhError;
    fn try_from(q: Vec<u32>) -> Result<Self> {
        Weights::new(q)
    }
}

impl From<Weights> for Vec<u32> {
    fn from(w: Weights) -> Self {
        w.q
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, q) in self.q.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{q}")?;
        }
        write!(f, ")")
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= p {
        if p.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// Coefficient field for homology: Q or F_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoefficientField {
    Rationals,
    Prime(u32),
}

impl CoefficientField {
    /// F_p for a prime p < 2^31.
    pub fn prime(p: u32) -> Result<Self> {
        if p >= 1 << 31 || !is_prime(p as u64) {
            return Err(GfhError::InvalidWeights(format!("{p} is not a prime below 2^31")));
        }
        Ok(CoefficientField::Prime(p))
    }

    pub fn characteristic(&self) -> u32 {
        match self {
            CoefficientField::Rationals => 0,
            CoefficientField::Prime(p) => *p,
        }
    }

    /// Parses `q` or `f<p>` (case-insensitive).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let lower = s.to_ascii_lowercase();
        if lower == "q" {
            return Ok(CoefficientField::Rationals);
        }
        if let Some(rest) = lower.strip_prefix('f') {
            if let Ok(p) = rest.parse::<u32>() {
                return Self::prime(p);
            }
        }
        Err(GfhError::Scene(format!("cannot parse coefficient field '{s}' (expected q or f<p>)")))
    }

    /// The field validated against a weight tuple.
    pub fn checked(self, w: &Weights) -> Result<Self> {
        if validate_field(w, self) {
            Ok(self)
        } else {
            Err(GfhError::FieldGate { field: self.to_string(), weights: w.as_slice().to_vec() })
        }
    }
}

impl fmt::Display for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientField::Rationals => write!(f, "q"),
            CoefficientField::Prime(p) => write!(f, "f{p}"),
        }
    }
}

impl Serialize for CoefficientField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CoefficientField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CoefficientField::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// True iff the field is Q or its characteristic divides no weight.
pub fn validate_field(w: &Weights, f: CoefficientField) -> bool {
    match f {
        CoefficientField::Rationals => true,
        CoefficientField::Prime(p) => w.as_slice().iter().all(|&q| q % p != 0),
    }
}

/// Order of the stabilizer in S^1 of a lift: gcd of the weights at the
/// nonzero coordinates. Coordinates below `rel_tol * max|z_j|` count as zero.
pub fn isotropy_order_tol(w: &Weights, z: &[Complex64], rel_tol: f64) -> Result<u32> {
    check_len(w, z)?;
    let scale = z.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(GfhError::InvalidPoint("zero or non-finite vector".into()));
    }
    let g = z
        .iter()
        .zip(w.as_slice())
        .filter(|(c, _)| c.norm() > rel_tol * scale)
        .fold(0u64, |acc, (_, &q)| gcd(acc, q as u64));
    Ok(g as u32)
}

pub fn isotropy_order(w: &Weights, z: &[Complex64]) -> Result<u32> {
    isotropy_order_tol(w, z, 1e-9)
}

/// Graded ranks of H_*(CP(q); F) in degrees 0..=2d: rank one in even degrees.
pub fn betti_profile(w: &Weights, f: CoefficientField) -> Result<Vec<u32>> {
    f.checked(w)?;
    Ok((0..=2 * w.dim()).map(|k| u32::from(k % 2 == 0)).collect())
}

/// K_q(z) = pi * sum q_j |z_j|^2.
pub fn moment_map(w: &Weights, z: &[Complex64]) -> f64 {
    PI * z.iter().zip(w.as_slice().iter().cycle()).map(|(c, &q)| q as f64 * c.norm_sqr()).sum::<f64>()
}

/// Coordinate-wise power map CP^d -> CP(q), z_j -> z_j^{q_j}.
pub fn kawasaki_map(w: &Weights, p: &[Complex64]) -> Result<WeightedPoint> {
    check_len(w, p)?;
    let coords: Vec<Complex64> = p.iter().zip(w.as_slice()).map(|(z, &q)| z.powu(q)).collect();
    WeightedPoint::new(coords, w.clone())
}

fn check_len(w: &Weights, z: &[Complex64]) -> Result<()> {
    if z.len() != w.len() {
        return Err(GfhError::InvalidPoint(format!("expected {} coordinates, got {}", w.len(), z.len())));
    }
    Ok(())
}

/// A point of CP(q) given by homogeneous coordinates.
///
/// Two coordinate vectors name the same point when one is carried to the
/// other by a weighted positive scaling `z_j -> r^{q_j} z_j` composed with
/// the circle action.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoint {
    coords: Vec<Complex64>,
    weights: Weights,
}

impl WeightedPoint {
    pub fn new(coords: Vec<Complex64>, weights: Weights) -> Result<Self> {
        check_len(&weights, &coords)?;
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(GfhError::InvalidPoint("non-finite coordinate".into()));
        }
        if coords.iter().all(|c| c.norm() == 0.0) {
            return Err(GfhError::InvalidPoint("all coordinates vanish".into()));
        }
        Ok(Self { coords, weights })
    }

    /// The j-th coordinate point e_j.
    pub fn axis(weights: &Weights, j: usize) -> Self {
        let mut coords = vec![Complex64::new(0.0, 0.0); weights.len()];
        coords[j] = Complex64::new(1.0, 0.0);
        Self { coords, weights: weights.clone() }
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn order(&self) -> u32 {
        isotropy_order(&self.weights, &self.coords).expect("point is nonzero")
    }

    /// Representative on the weighted sphere, reached by weighted positive
    /// scaling.
    pub fn sphere_representative(&self) -> Vec<Complex64> {
        let w = &self.weights;
        let k = |r: f64| -> f64 {
            self.coords
                .iter()
                .zip(w.as_slice())
                .map(|(c, &q)| q as f64 * r.powi(2 * q as i32) * c.norm_sqr())
                .sum::<f64>()
        };
        // k is increasing in r; bracket the root of k(r) = 1 in log scale.
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        while k(lo.exp()) > 1.0 {
            lo *= 2.0;
        }
        while k(hi.exp()) < 1.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if k(mid.exp()) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        let r = (0.5 * (lo + hi)).exp();
        self.coords.iter().zip(w.as_slice()).map(|(c, &q)| c * r.powi(q as i32)).collect()
    }

    /// Distance between the circle orbits of the sphere representatives.
    pub fn orbit_distance(&self, other: &WeightedPoint) -> f64 {
        let a = self.sphere_representative();
        let b = other.sphere_representative();
        circle_orbit_distance(&self.weights, &a, &b).0
    }

    pub fn same_orbit(&self, other: &WeightedPoint, tol: f64) -> bool {
        self.weights == other.weights && self.orbit_distance(other) < tol
    }
}

/// min over t of |rho(t) a - b|, returned with the minimizing t in [0,1).
///
/// Grid search on 64 lcm(q) nodes followed by Newton refinement of the
/// trigonometric polynomial Re sum conj(b_j) a_j exp(2 i pi q_j t).
pub fn circle_orbit_distance(w: &Weights, a: &[Complex64], b: &[Complex64]) -> (f64, f64) {
    let c: Vec<(f64, Complex64)> = a
        .iter()
        .zip(b)
        .zip(w.as_slice().iter().cycle())
        .map(|((aj, bj), &q)| (2.0 * PI * q as f64, bj.conj() * aj))
        .collect();
    let g = |t: f64| -> (f64, f64, f64) {
        let mut v = 0.0;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for &(om, cj) in &c {
            let e = cj * Complex64::from_polar(1.0, om * t);
            v += e.re;
            d1 += (e * Complex64::new(0.0, om)).re;
            d2 -= om * om * e.re;
        }
        (v, d1, d2)
    };
    let n = (64 * w.lcm()).max(64) as usize;
    let mut cand: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let t = i as f64 / n as f64;
            (g(t).0, t)
        })
        .collect();
    cand.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    let dist = |t: f64| -> f64 { w.rotate(t, a).iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt() };
    let mut best = (f64::INFINITY, 0.0);
    for &(_, t0) in cand.iter().take(4) {
        let mut t = t0;
        for _ in 0..30 {
            let (_, d1, d2) = g(t);
            if d2 >= 0.0 {
                break;
            }
            let step = d1 / d2;
            t -= step.clamp(-0.5 / n as f64, 0.5 / n as f64);
            if step.abs() < 1e-16 {
                break;
            }
        }
        let d = dist(t);
        if d < best.0 {
            best = (d, t.rem_euclid(1.0));
        }
    }
    best
}
