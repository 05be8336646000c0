//! Fixed points of `rho_q(-t) Phi`, their action lattices, and the local
//! data (Hessian, reduced linearization) at a critical orbit.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::equivariant::{
    assemble_hessian, factor_hessians, sigma_family, EquivariantLinearMap, GFTuple, QuadraticForm,
};
use crate::error::{GfhError, Result};
use crate::flow::InvariantHamiltonian;
use crate::index::{morse_index_tol, IndexReport};
use crate::linalg::{complexify, orthogonal_complement, rho, rho_generator, to_complex, to_real};
use crate::weights::{isotropy_order_tol, moment_map, WeightedPoint, Weights};

/// A fixed orbit of the map on CP(q) with its action lattice
/// `base_action + Z / ord`, `base_action` in `[0, 1/ord)`.
#[derive(Debug, Clone)]
pub struct FixedOrbit {
    pub point: WeightedPoint,
    /// Lift on the weighted sphere.
    pub lift: DVector<f64>,
    pub base_action: f64,
    pub ord: u32,
}

impl FixedOrbit {
    /// Actions in `[lo, hi]`.
    pub fn actions_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let step = 1.0 / self.ord as f64;
        let k0 = ((lo - self.base_action) / step).ceil() as i64;
        let k1 = ((hi - self.base_action) / step).floor() as i64;
        (k0..=k1).map(|k| self.base_action + k as f64 * step).collect()
    }

    /// Representatives of the action lattice in `[0, 1)`.
    pub fn period_actions(&self) -> Vec<f64> {
        (0..self.ord).map(|k| self.base_action + k as f64 / self.ord as f64).collect()
    }
}

/// A fixed point together with one of its action values.
#[derive(Debug, Clone)]
pub struct CappedFixedPoint {
    pub orbit: usize,
    pub point: WeightedPoint,
    pub lift: DVector<f64>,
    pub action: f64,
    pub ord: u32,
    pub nondegenerate: Option<bool>,
    pub hessian: Option<QuadraticForm>,
    pub index: Option<IndexReport>,
}

#[derive(Debug, Clone)]
pub struct ActionSpectrum {
    pub weights: Weights,
    pub window: f64,
    pub orbits: Vec<FixedOrbit>,
    pub warnings: Vec<String>,
}

impl ActionSpectrum {
    /// All capped points with actions in `[-window, window]`.
    pub fn entries(&self) -> Vec<CappedFixedPoint> {
        let mut out = Vec::new();
        for (i, o) in self.orbits.iter().enumerate() {
            for a in o.actions_in(-self.window, self.window) {
                out.push(CappedFixedPoint {
                    orbit: i,
                    point: o.point.clone(),
                    lift: o.lift.clone(),
                    action: a,
                    ord: o.ord,
                    nondegenerate: None,
                    hessian: None,
                    index: None,
                });
            }
        }
        out.sort_by(|a, b| a.action.partial_cmp(&b.action).unwrap());
        out
    }

    /// Distinct spectral values in `[0, 1)`, sorted.
    pub fn period_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.orbits.iter().flat_map(FixedOrbit::period_actions).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        v
    }

    pub fn ord_sum(&self) -> u32 {
        self.orbits.iter().map(|o| o.ord).sum()
    }
}

/// One complex eigenline of a linear map: base spectral value `a / w` with
/// `exp(2 i pi a)` the eigenvalue on a weight-`w` block.
#[derive(Debug, Clone)]
pub struct Eigenline {
    pub weight: u32,
    pub base_action: f64,
    pub vector: Vec<Complex64>,
}

/// Eigenlines of an equivariant linear map, block by block.
pub fn eigenlines(phi: &EquivariantLinearMap) -> Vec<Eigenline> {
    let w = phi.weights();
    let a = complexify(phi.matrix());
    let mut weights: Vec<u32> = w.as_slice().to_vec();
    weights.sort_unstable();
    weights.dedup();
    let mut out = Vec::new();
    for wt in weights {
        let idx: Vec<usize> = (0..w.len()).filter(|&j| w.get(j) == wt).collect();
        let blk = DMatrix::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])]);
        let (q, t) = blk.schur().unpack();
        for k in 0..idx.len() {
            let lam = t[(k, k)];
            let frac = (lam.arg() / (2.0 * PI)).rem_euclid(1.0);
            let frac = if frac >= 1.0 - 1e-15 { 0.0 } else { frac };
            let mut v = vec![Complex64::new(0.0, 0.0); w.len()];
            for (i, &j) in idx.iter().enumerate() {
                v[j] = q[(i, k)];
            }
            out.push(Eigenline { weight: wt, base_action: frac / wt as f64, vector: v });
        }
    }
    out
}

/// Spectral values of a linear map in `[lo, hi]` counted with complex
/// multiplicity (one per eigenline and lattice point).
pub fn linear_spectral_values(phi: &EquivariantLinearMap, lo: f64, hi: f64) -> Vec<f64> {
    let mut v = Vec::new();
    for l in eigenlines(phi) {
        let step = 1.0 / l.weight as f64;
        let k0 = ((lo - l.base_action) / step).ceil() as i64;
        let k1 = ((hi - l.base_action) / step).floor() as i64;
        v.extend((k0..=k1).map(|k| l.base_action + k as f64 * step));
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Isolated fixed points of a linear equivariant map with actions in
/// `[-window, window]`.
pub fn fixed_points_linear(phi: &EquivariantLinearMap, window: f64) -> Result<ActionSpectrum> {
    let w = phi.weights();
    let lines = eigenlines(phi);
    // Two eigenlines sharing an action value span a fixed projective line.
    let lattice =
        |l: &Eigenline| -> Vec<f64> { (0..l.weight).map(|k| l.base_action + k as f64 / l.weight as f64).collect() };
    for (i, a) in lines.iter().enumerate() {
        for b in &lines[i + 1..] {
            for x in lattice(a) {
                for y in lattice(b) {
                    let d = (x - y).abs();
                    if d.min(1.0 - d) < 1e-9 {
                        return Err(GfhError::NonIsolated { action: x, dimension: 2 });
                    }
                }
            }
        }
    }
    let mut orbits = Vec::new();
    for l in lines {
        let point = WeightedPoint::new(l.vector.clone(), w.clone())?;
        let lift = to_real(&point.sphere_representative());
        let ord = isotropy_order_tol(w, &l.vector, 1e-9)?;
        orbits.push(FixedOrbit { point, lift, base_action: l.base_action.rem_euclid(1.0 / ord as f64), ord });
    }
    Ok(ActionSpectrum { weights: w.clone(), window, orbits, warnings: Vec::new() })
}

/// Smallest singular value of `rho(-t) Phi - I`.
pub fn scan_functional(phi: &DMatrix<f64>, w: &Weights, t: f64) -> f64 {
    let n = phi.nrows();
    let m = rho(w, -t) * phi - DMatrix::<f64>::identity(n, n);
    m.singular_values().min()
}

/// Zeros of the scan functional in `[lo, hi]`: grid of step `1/(8 lcm q)`
/// followed by golden-section refinement to 1e-10.
pub fn scan_spectral_values(phi: &EquivariantLinearMap, lo: f64, hi: f64) -> Vec<f64> {
    let w = phi.weights();
    let m = phi.matrix();
    let step = 1.0 / (8.0 * w.lcm() as f64);
    let n = ((hi - lo) / step).ceil() as usize;
    let grid: Vec<(f64, f64)> = (0..=n)
        .map(|i| {
            let t = lo + i as f64 * step;
            (t, scan_functional(m, w, t))
        })
        .collect();
    let mut out: Vec<f64> = Vec::new();
    for i in 0..grid.len() {
        let left = if i > 0 { grid[i - 1].1 } else { f64::INFINITY };
        let right = if i + 1 < grid.len() { grid[i + 1].1 } else { f64::INFINITY };
        if grid[i].1 > left || grid[i].1 > right {
            continue;
        }
        let (mut a, mut b) = (grid[i].0 - step, grid[i].0 + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        while b - a > 1e-11 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if scan_functional(m, w, c) < scan_functional(m, w, d) {
                b = d;
            } else {
                a = c;
            }
        }
        let t = 0.5 * (a + b);
        if scan_functional(m, w, t) < 1e-7
            && t >= lo - 1e-12
            && t <= hi + 1e-12
            && out.last().is_none_or(|&l| (t - l).abs() > 1e-8)
        {
            out.push(t);
        }
    }
    out
}

/// Anything that evaluates a map of C^{d+1} with its Jacobian.
pub trait MapEvaluator {
    fn weights(&self) -> &Weights;
    fn eval(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>);
    /// The image alone; override when it is cheaper than `eval`.
    fn image(&self, x: &DVector<f64>) -> DVector<f64> {
        self.eval(x).0
    }
}

impl MapEvaluator for GFTuple {
    fn weights(&self) -> &Weights {
        GFTuple::weights(self)
    }

    fn eval(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let (pts, jacs) = self.orbit_with_jacobians(x);
        let n = x.len();
        let j = jacs.iter().fold(DMatrix::identity(n, n), |acc, m| m * acc);
        (pts.last().unwrap().clone(), j)
    }

    fn image(&self, x: &DVector<f64>) -> DVector<f64> {
        self.apply(x)
    }
}

/// Seeds on the weighted sphere: moduli on a simplex grid with `res`
/// subdivisions and phases on a grid of `phases` values per coordinate after
/// the first.
pub fn seed_grid(w: &Weights, res: usize, phases: usize) -> Vec<DVector<f64>> {
    let n = w.len();
    let mut moduli: Vec<Vec<usize>> = Vec::new();
    fn comp(rest: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(rest);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=rest {
            cur.push(k);
            comp(rest - k, slots - 1, cur, out);
            cur.pop();
        }
    }
    comp(res, n, &mut Vec::new(), &mut moduli);
    let mut seeds = Vec::new();
    for m in moduli {
        let support: Vec<usize> = (0..n).filter(|&j| m[j] > 0).collect();
        let free = support.len().saturating_sub(1);
        let combos = phases.pow(free as u32).max(1);
        for c in 0..combos {
            let mut z = vec![Complex64::new(0.0, 0.0); n];
            let mut code = c;
            for (s, &j) in support.iter().enumerate() {
                let phase = if s == 0 {
                    0.0
                } else {
                    let p = code % phases;
                    code /= phases;
                    2.0 * PI * (p as f64 + 0.5) / phases as f64
                };
                let r2 = m[j] as f64 / (res as f64 * w.get(j) as f64);
                z[j] = Complex64::from_polar(r2.sqrt(), phase);
            }
            seeds.push(to_real(&z));
        }
    }
    seeds
}

/// Newton shooting for `rho(-t) Phi(z) = z` on the weighted sphere.
///
/// Unknowns `(z, t)`; equations: the fixed-point residual, `K(z) = pi`, and a
/// phase gauge orthogonal to the circle orbit of the seed. Solutions are
/// deduplicated by orbit equality.
pub fn fixed_points_newton<M: MapEvaluator>(phi: &M, window: f64, seeds: &[DVector<f64>]) -> Result<ActionSpectrum> {
    let w = phi.weights().clone();
    let mut orbits: Vec<FixedOrbit> = Vec::new();
    let mut warnings = Vec::new();
    for (si, x0) in seeds.iter().enumerate() {
        match newton_from_seed(phi, x0) {
            Some((x, t)) => {
                let z = to_complex(&x);
                let ord = isotropy_order_tol(&w, &z, 1e-6)?;
                let point = WeightedPoint::new(z, w.clone())?;
                let base = t.rem_euclid(1.0 / ord as f64);
                let dup = orbits.iter().any(|o| o.ord == ord && o.point.orbit_distance(&point) < 1e-6);
                if !dup {
                    orbits.push(FixedOrbit { point, lift: x, base_action: base, ord });
                }
            }
            None => {
                let y = phi.image(x0);
                let (scan, t) = best_phase(&w, &y, x0);
                if scan < 1e-3 {
                    warnings.push(format!(
                        "possible missed orbit: Newton diverged from seed {si} with scan value {scan:.1e} near t = {t:.4}"
                    ));
                }
            }
        }
    }
    orbits.sort_by(|a, b| a.base_action.partial_cmp(&b.base_action).unwrap());
    Ok(ActionSpectrum { weights: w, window, orbits, warnings })
}

fn best_phase(w: &Weights, y: &DVector<f64>, x: &DVector<f64>) -> (f64, f64) {
    let (d, t) = crate::weights::circle_orbit_distance(w, &to_complex(y), &to_complex(x));
    (d, -t)
}

fn newton_from_seed<M: MapEvaluator>(phi: &M, x0: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let w = phi.weights();
    let n = x0.len();
    let g = rho_generator(w);
    let qdiag: Vec<f64> = w.as_slice().iter().flat_map(|&q| [q as f64, q as f64]).collect();
    let y0 = phi.image(x0);
    let (_, mut t) = best_phase(w, &y0, x0);
    let mut x = x0.clone();
    let gauge = &g * x0;
    // The Jacobian of the map is reused while the residual keeps shrinking
    // fast; it is the expensive part of an iteration.
    let mut jac: Option<DMatrix<f64>> = None;
    let mut last = f64::INFINITY;
    let mut best = f64::INFINITY;
    let mut best_at = 0;
    for it in 0..80 {
        let y = match &jac {
            Some(_) => phi.image(&x),
            None => {
                let (y, j) = phi.eval(&x);
                jac = Some(j);
                y
            }
        };
        let r = rho(w, -t);
        let ry = &r * &y;
        let mut res = DVector::zeros(n + 2);
        res.rows_mut(0, n).copy_from(&(&ry - &x));
        res[n] = moment_map(w, &to_complex(&x)) / PI - 1.0;
        res[n + 1] = (&x - x0).dot(&gauge);
        let norm = res.amax();
        if !norm.is_finite() {
            return None;
        }
        if norm < 1e-12 {
            return Some((x, t));
        }
        if norm < 0.5 * best {
            best = norm;
            best_at = it;
        } else if it - best_at > 12 {
            return None;
        }
        if norm > 0.25 * last {
            // Slow progress: refresh the Jacobian and redo this step.
            let (_, j) = phi.eval(&x);
            jac = Some(j);
        }
        last = norm;
        let jm_map = jac.as_ref().unwrap();
        let mut jm = DMatrix::zeros(n + 2, n + 1);
        jm.view_mut((0, 0), (n, n)).copy_from(&(&r * jm_map - DMatrix::<f64>::identity(n, n)));
        jm.view_mut((0, n), (n, 1)).copy_from(&(&g * &ry * (-2.0 * PI)));
        for i in 0..n {
            jm[(n, i)] = 2.0 * qdiag[i] * x[i];
            jm[(n + 1, i)] = gauge[i];
        }
        let svd = jm.svd(true, true);
        let step = svd.solve(&res, 1e-12).ok()?;
        let scale = step.amax();
        let damp = if scale > 0.3 { 0.3 / scale } else { 1.0 };
        for i in 0..n {
            x[i] -= damp * step[i];
        }
        t -= damp * step[n];
        if norm < 1e-10 && scale < 1e-13 {
            return Some((x, t));
        }
    }
    None
}

/// Hessian of `F_{sigma_{m,t}}` at the critical orbit through `lift` with
/// action `t`: each factor's generating function is replaced by the Cayley
/// form of its Jacobian along the orbit.
pub fn hessian_at_orbit(s: &GFTuple, m: usize, lift: &DVector<f64>, t: f64) -> Result<QuadraticForm> {
    let fam = sigma_family(s, m, t)?;
    let (pts, jacs) = fam.orbit_with_jacobians(lift);
    let closure = (pts.last().unwrap() - lift).amax();
    if closure > 1e-7 {
        return Err(GfhError::Accuracy(format!("point is not a fixed point at action {t} (closure {closure:.2e})")));
    }
    let refs: Vec<&DMatrix<f64>> = jacs.iter().collect();
    let bs = factor_hessians(&refs)?;
    let acting = if s.is_linear() { Some(s.weights().repeat(fam.len())) } else { None };
    QuadraticForm::new(assemble_hessian(&bs), acting)
}

/// Relative tolerance for kernels of Hessians at critical orbits.
pub const ORBIT_KERNEL_TOL: f64 = 1e-7;

/// Index data and the degree `ind - (n - 1)(d + 1)` at a critical orbit.
pub fn orbit_index(s: &GFTuple, m: usize, lift: &DVector<f64>, t: f64) -> Result<(QuadraticForm, IndexReport, i64)> {
    let h = hessian_at_orbit(s, m, lift, t)?;
    let rep = morse_index_tol(&h, ORBIT_KERNEL_TOL)?;
    let n = s.len() + m * s.weights().n0();
    let deg = rep.real_index as i64 - (n as i64 - 1) * s.weights().len() as i64;
    Ok((h, rep, deg))
}

/// Linearization `rho(-t) dPhi(z)` induced on the tangent space of CP(q):
/// the quotient of the sphere tangent by the circle direction.
pub fn reduced_linearization(w: &Weights, lift: &DVector<f64>, dphi: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let l = rho(w, -t) * dphi;
    let qz = DVector::from_fn(lift.len(), |i, _| w.get(i / 2) as f64 * lift[i]);
    let gz = rho_generator(w) * lift;
    let basis = orthogonal_complement(&DMatrix::from_columns(&[qz, gz]));
    basis.transpose() * l * &basis
}

pub fn reduced_eigenvalues(w: &Weights, lift: &DVector<f64>, dphi: &DMatrix<f64>, t: f64) -> Vec<Complex64> {
    reduced_linearization(w, lift, dphi, t).complex_eigenvalues().iter().copied().collect()
}

/// The k-th iterate is admissible when no eigenvalue other than 1 is a k-th
/// root of unity.
pub fn admissible(k: u32, eigenvalues: &[Complex64]) -> bool {
    let one = Complex64::new(1.0, 0.0);
    eigenvalues.iter().filter(|l| (*l - one).norm() > 1e-9).all(|l| (l.powu(k) - one).norm() > 1e-9)
}

/// True when 1 is not an eigenvalue of the reduced linearization.
pub fn nondegenerate(eigenvalues: &[Complex64], tol: f64) -> bool {
    let one = Complex64::new(1.0, 0.0);
    eigenvalues.iter().all(|l| (l - one).norm() > tol)
}

/// Compares the integral action of a rotation flow, evaluated with constant
/// cappings at the axis points, with the lift characterization computed from
/// the integrated time-one map. Returns the max residual.
pub fn verify_action_consistency(ham: &InvariantHamiltonian) -> Result<f64> {
    let w = ham.weights();
    let h = ham
        .axis_values()
        .ok_or_else(|| GfhError::Unsupported("action cross-check needs a diagonal rotation flow".into()))?;
    let flow = crate::flow::FlowFactor::new(std::sync::Arc::new(ham.clone()), 1.0)?;
    let mut worst: f64 = 0.0;
    for j in 0..w.len() {
        let e = to_real(&WeightedPoint::axis(w, j).sphere_representative());
        let (y, _) = flow.apply_with_jacobian(&e);
        // Lift: rho(-t) y = e on the j-th coordinate, t in base + Z/q_j.
        let zj = Complex64::new(y[2 * j], y[2 * j + 1]) / Complex64::new(e[2 * j], e[2 * j + 1]);
        let qj = w.get(j) as f64;
        let base = (zj.arg() / (2.0 * PI)).rem_euclid(1.0) / qj;
        // Constant capping: the symplectic area term vanishes and the
        // Hamiltonian term is h(e_j) for the whole unit time.
        let action = -h[j] / PI;
        // Distance of the integral action from the lattice base + Z/q_j.
        let k = ((action - base) * qj).round();
        worst = worst.max((action - base - k / qj).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{FlowFactor, InvariantMonomial};
    use std::sync::Arc;

    fn w(q: &[u32]) -> Weights {
        Weights::new(q.to_vec()).unwrap()
    }

    #[test]
    fn rotation_lattice() {
        let q = w(&[1, 2]);
        let phi = EquivariantLinearMap::rotation(&q, &[1.0 / 3.0, 1.0 / 5.0]).unwrap();
        let s = fixed_points_linear(&phi, 2.0).unwrap();
        assert_eq!(s.orbits.len(), 2);
        let e0 = s.orbits.iter().find(|o| o.ord == 1).unwrap();
        let e1 = s.orbits.iter().find(|o| o.ord == 2).unwrap();
        assert!((e0.base_action - 1.0 / 3.0).abs() < 1e-12);
        assert!((e1.base_action - 0.1).abs() < 1e-12);
        let vals = s.period_values();
        let expect = [0.1, 1.0 / 3.0, 0.6];
        for (a, b) in vals.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(s.ord_sum(), 3);
        assert_eq!(e1.actions_in(-1.0, 1.0).len(), 4);
    }

    #[test]
    fn identity_is_non_isolated() {
        let q = w(&[1, 1]);
        assert!(matches!(
            fixed_points_linear(&EquivariantLinearMap::identity(&q), 1.0),
            Err(GfhError::NonIsolated { .. })
        ));
    }

    #[test]
    fn scan_agrees_with_eigenlines() {
        let q = w(&[1, 2]);
        let mut rng = crate::rng(4);
        let phi = EquivariantLinearMap::random(&q, 0.9, &mut rng);
        let scanned = scan_spectral_values(&phi, -1.05, 1.05);
        let direct = linear_spectral_values(&phi, -1.05, 1.05);
        assert_eq!(scanned.len(), direct.len());
        for (a, b) in scanned.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn newton_reproduces_linear_spectrum() {
        let q = w(&[1, 2]);
        let phi = EquivariantLinearMap::rotation(&q, &[0.13, 0.29]).unwrap();
        let tuple = GFTuple::split_linear(&phi, 3).unwrap();
        let seeds = seed_grid(&q, 4, 3);
        let newton = fixed_points_newton(&tuple, 1.0, &seeds).unwrap();
        let linear = fixed_points_linear(&phi, 1.0).unwrap();
        assert_eq!(newton.orbits.len(), linear.orbits.len());
        for o in &linear.orbits {
            let m = newton.orbits.iter().find(|p| p.point.orbit_distance(&o.point) < 1e-8).expect("orbit found");
            assert_eq!(m.ord, o.ord);
            assert!((m.base_action - o.base_action).abs() < 1e-8);
        }
    }

    #[test]
    fn rotation_hessian_kernel() {
        let q = w(&[1, 2]);
        let phi = EquivariantLinearMap::rotation(&q, &[0.13, 0.29]).unwrap();
        let tuple = GFTuple::split_linear(&phi, 3).unwrap();
        let spec = fixed_points_linear(&phi, 1.0).unwrap();
        for c in spec.entries() {
            if c.action.abs() > 1.0 {
                continue;
            }
            let (_, rep, _) = orbit_index(&tuple, 1, &c.lift, c.action).unwrap();
            assert_eq!(rep.nullity, 2);
        }
    }

    #[test]
    fn admissibility() {
        let l = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!(!admissible(3, &[l, l.conj()]));
        assert!(admissible(2, &[l, l.conj()]));
        assert!(admissible(7, &[Complex64::new(1.0, 0.0); 4]));
        let irr = Complex64::from_polar(1.0, 2.0 * PI * 2f64.sqrt());
        assert!((1..=100).all(|k| admissible(k, &[irr, irr.conj()])));
    }

    #[test]
    fn action_consistency_for_rotations() {
        let q = w(&[1, 2]);
        let h = InvariantHamiltonian::rotation(&q, &[0.13, -0.21]).unwrap();
        assert!(verify_action_consistency(&h).unwrap() < 1e-10);
        assert!(verify_action_consistency(&InvariantHamiltonian::zero(&q)).unwrap() < 1e-12);
        let c = InvariantHamiltonian::constant(&q, 0.4);
        assert!(verify_action_consistency(&c).unwrap() < 1e-10);
        let bad = InvariantHamiltonian::new(
            q.clone(),
            vec![InvariantMonomial { re: 1.0, im: 0.0, alpha: vec![2, 0], beta: vec![0, 1] }],
        )
        .unwrap();
        assert!(matches!(verify_action_consistency(&bad), Err(GfhError::Unsupported(_))));
    }

    #[test]
    fn nondegeneracy_matches_hessian_kernel() {
        let q = w(&[1, 2]);
        let ham = Arc::new(InvariantHamiltonian::rotation(&q, &[0.07, 0.02]).unwrap());
        let f = FlowFactor::new(ham, 1.0 / 3.0).unwrap();
        let tuple = GFTuple::new(q.clone(), vec![crate::equivariant::Factor::Flow(f); 3]).unwrap();
        for j in 0..2 {
            let e = to_real(&WeightedPoint::axis(&q, j).sphere_representative());
            let (_, dphi) = tuple.eval(&e);
            let t = -[0.07, 0.02][j];
            let ev = reduced_eigenvalues(&q, &e, &dphi, t);
            let (_, rep, _) = orbit_index(&tuple, 1, &e, t).unwrap();
            assert_eq!(nondegenerate(&ev, 1e-6), rep.nullity == 2);
        }
    }
}
