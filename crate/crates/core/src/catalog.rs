//! Ready-made tuples and complexes used by the CLI, the tests and the
//! documentation.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::engine::StabilityReference;
use crate::equivariant::{EquivariantLinearMap, Factor, GFTuple};
use crate::error::Result;
use crate::flow::{flow_slices, InvariantHamiltonian, InvariantMonomial};
use crate::linalg::to_real;
use crate::persistence::FilteredComplex;
use crate::weights::Weights;

/// Parameters of the perturbed rotation on CP(1,2).
#[derive(Debug, Clone, Copy)]
pub struct PerturbedParams {
    /// Quartic coupling of `|z_0|^2 |z_1|^2`.
    pub a: f64,
    /// Rotation speed of `|z_1|^2`.
    pub c: f64,
    /// Resonant term `Re(z_0^2 conj z_1)`.
    pub eta: f64,
    pub slices: usize,
    /// Apply the resonant term as a separate final factor instead of adding
    /// it to the Hamiltonian. This breaks resonant circles of every winding.
    pub kick: bool,
}

impl Default for PerturbedParams {
    fn default() -> Self {
        Self { a: 0.05, c: 0.01, eta: 0.01, slices: 3, kick: false }
    }
}

/// `H = 2 pi C |z_1|^2 + 2 pi A |z_0|^2 |z_1|^2 + pi eta Re(z_0^2 conj z_1)`,
/// homogenized to degree 2, on CP(1,2). Its time-one map has four fixed
/// orbits: one near `[1:0]`, the orbifold point `[0:1]` of order 2, and
/// two orbits created by the resonant term.
pub fn perturbed_hamiltonian(p: PerturbedParams) -> Result<InvariantHamiltonian> {
    let mut terms = twist_terms(p);
    terms.push(resonant_term(p.eta));
    InvariantHamiltonian::new(Weights::new(vec![1, 2])?, terms)
}

fn mono(re: f64, alpha: [u32; 2], beta: [u32; 2]) -> InvariantMonomial {
    InvariantMonomial { re, im: 0.0, alpha: alpha.to_vec(), beta: beta.to_vec() }
}

fn twist_terms(p: PerturbedParams) -> Vec<InvariantMonomial> {
    let tau = 2.0 * std::f64::consts::PI;
    vec![mono(tau * p.c, [0, 1], [0, 1]), mono(tau * p.a, [1, 1], [1, 1])]
}

fn resonant_term(eta: f64) -> InvariantMonomial {
    mono(std::f64::consts::PI * eta, [2, 0], [0, 1])
}

pub fn perturbed_cp12(p: PerturbedParams) -> Result<GFTuple> {
    let w = Weights::new(vec![1, 2])?;
    let factors = if p.kick {
        let twist = Arc::new(InvariantHamiltonian::new(w.clone(), twist_terms(p))?);
        let kick = Arc::new(InvariantHamiltonian::new(w.clone(), vec![resonant_term(p.eta)])?);
        let mut fs = flow_slices(&twist, p.slices.max(2) - 1)?;
        fs.extend(flow_slices(&kick, 1)?);
        fs
    } else {
        flow_slices(&Arc::new(perturbed_hamiltonian(p)?), p.slices)?
    };
    GFTuple::new(w, factors.into_iter().map(Factor::Flow).collect())
}

/// The scene used for the Smith checks: the twist puts its winding-one
/// resonance at `|z_0|^2 = 0.85`, close enough to `[1:0]` that the pair it
/// creates stays separated from the orbifold point in action.
pub fn smith_scene() -> PerturbedParams {
    PerturbedParams { a: 0.035, c: 0.4755, eta: 0.002, slices: 5, kick: true }
}

/// Radius of the circle `|z_0|^2 = u` on which the relative angle of `z_0^2`
/// and `z_1` turns an integer number of times, if that happens for `u` in
/// `[0, 1]`.
pub fn resonance_modulus(p: PerturbedParams) -> Option<f64> {
    let turns = |u: f64| 2.0 * p.c + 2.0 * p.a * (2.0 * u - 1.0);
    let (lo, hi) = (turns(0.0).min(turns(1.0)), turns(0.0).max(turns(1.0)));
    let k = lo.ceil();
    (k <= hi && p.a != 0.0).then(|| ((k - 2.0 * p.c) / (2.0 * p.a) + 1.0) / 2.0)
}

/// Newton seeds on a band of `|z_0|^2` around the resonance with `phases`
/// angles each; the generic seed grid is too coarse to land near both orbits
/// of the resonant pair.
pub fn resonance_seeds(p: PerturbedParams, phases: usize) -> Vec<DVector<f64>> {
    let Some(u0) = resonance_modulus(p) else { return Vec::new() };
    let mut out = Vec::new();
    for k in 0..16 {
        let u = (u0 - 0.25 + 0.4 * k as f64 / 15.0).clamp(0.02, 0.995);
        for j in 0..phases {
            let th = std::f64::consts::TAU * j as f64 / phases as f64;
            let z1 = Complex64::from_polar(((1.0 - u) / 2.0).sqrt(), th);
            out.push(to_real(&[Complex64::new(u.sqrt(), 0.0), z1]));
        }
    }
    out
}

/// The rotation generated by the quadratic part `2 pi C |z_1|^2`, with the
/// Hofer radius `sup |H - G| / pi` of the remaining terms.
pub fn perturbed_reference(p: PerturbedParams) -> Result<StabilityReference> {
    let w = Weights::new(vec![1, 2])?;
    let rest = |terms: Vec<InvariantMonomial>| InvariantHamiltonian::new(w.clone(), terms).map(|h| h.sup_bound());
    let twist = twist_terms(p).split_off(1);
    let radius = (rest(twist)? + rest(vec![resonant_term(p.eta)])?) / std::f64::consts::PI;
    StabilityReference::new(rotation(&w, &[0.0, -2.0 * p.c])?, radius)
}

/// Rotation `z_j -> e^{2 pi i a_j} z_j` along the straight path
/// `s -> diag(e^{2 pi i s a_j})`, cut into an odd number of steps of at most
/// a quarter turn. The path matters: spectral invariants see the homotopy
/// class of the lift, not only the end map.
pub fn rotation(w: &Weights, a: &[f64]) -> Result<GFTuple> {
    let top = a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut n = ((4.0 * top).ceil() as usize).max(3);
    if n.is_multiple_of(2) {
        n += 1;
    }
    let step: Vec<f64> = a.iter().map(|x| x / n as f64).collect();
    let f = EquivariantLinearMap::rotation(w, &step)?;
    GFTuple::from_linear(w.clone(), vec![f; n])
}

/// Torsion coefficient of [`torsion_complex`].
pub const TORSION: i64 = 30;

/// Periodic complex on CP(1,1) with a `Z/30` torsion class: over Q the
/// generators pair as (x, w), (y, u); over F_p with `p | 30` they pair as
/// (x, y), (w, u). Two cycles in degrees 0 and 2 carry the total homology.
/// Copies `j = lo..hi` are shifted by j in action and `4j` in degree.
pub fn torsion_complex(lo: i64, hi: i64) -> FilteredComplex {
    let mut cx = FilteredComplex::new();
    for j in lo..hi {
        let (s, g) = (j as f64, 4 * j);
        cx.add_cell(g, s + 0.05, vec![]);
        let x = cx.add_cell(g + 1, s + 0.1, vec![]);
        let y = cx.add_cell(g + 2, s + 0.3, vec![(x, TORSION)]);
        let w = cx.add_cell(g + 2, s + 0.5, vec![(x, 1)]);
        cx.add_cell(g + 3, s + 0.7, vec![(y, 1), (w, -TORSION)]);
        cx.add_cell(g + 2, s + 0.9, vec![]);
    }
    cx
}
