//! Eigenvalue counting for quadratic forms and the T family
//! `T_{m,t} = F_{(eps, delta^{(m)}_t)}`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::equivariant::{assemble_f, sigma_family, GFTuple, QuadraticForm};
use crate::error::{GfhError, Result};
use crate::weights::Weights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexReport {
    pub real_index: usize,
    pub nullity: usize,
    /// Half the real index, for invariant forms.
    pub complex_index: Option<usize>,
}

/// Relative zero tolerance used when counting eigenvalues.
pub const ZERO_TOL: f64 = 1e-9;

pub fn morse_index(q: &QuadraticForm) -> Result<IndexReport> {
    morse_index_tol(q, ZERO_TOL)
}

/// Eigenvalues below `-tol * max(1, |lambda|_max)` are negative, those within
/// that band are zero.
pub fn morse_index_tol(q: &QuadraticForm, rel_tol: f64) -> Result<IndexReport> {
    let ev = q.eigenvalues();
    let scale = ev.iter().fold(1.0_f64, |m, e| m.max(e.abs()));
    let tol = rel_tol * scale;
    let real_index = ev.iter().filter(|&&e| e < -tol).count();
    let nullity = ev.iter().filter(|&&e| e.abs() <= tol).count();
    let complex_index = if q.is_invariant() {
        if real_index % 2 != 0 {
            return Err(GfhError::InvariantViolation(format!("invariant form has odd negative index {real_index}")));
        }
        Some(real_index / 2)
    } else {
        None
    };
    Ok(IndexReport { real_index, nullity, complex_index })
}

/// `T_{m,t}`: generating function of `(eps, delta^{(m)}_t)`.
pub fn t_family(w: &Weights, m: usize, t: f64) -> Result<QuadraticForm> {
    assemble_f(&sigma_family(&GFTuple::identity(w, 1), m, t)?)
}

pub fn floor_sum(w: &Weights, t: f64) -> i64 {
    w.as_slice().iter().map(|&q| (q as f64 * t).floor() as i64).sum()
}

/// True when some `q_j t` is within `tol` of an integer.
pub fn is_t_spectral(w: &Weights, t: f64, tol: f64) -> bool {
    w.as_slice().iter().any(|&q| {
        let x = q as f64 * t;
        (x - x.round()).abs() <= tol
    })
}

/// `(ind T_{m,t} - ind T_{m,0^+}) - 2 sum_j floor(q_j t)`, where the index
/// just above 0 is `ind T_{m,0} + null T_{m,0}`. Zero when the formula holds.
pub fn index_formula_check(w: &Weights, m: usize, t: f64) -> Result<i64> {
    if is_t_spectral(w, t, 1e-9) {
        return Err(GfhError::SpectralParameter { t });
    }
    let at_t = morse_index(&t_family(w, m, t)?)?;
    if at_t.nullity != 0 {
        return Err(GfhError::SpectralParameter { t });
    }
    let at_0 = morse_index(&t_family(w, m, 0.0)?)?;
    let diff = at_t.real_index as i64 - (at_0.real_index + at_0.nullity) as i64;
    Ok(diff - 2 * floor_sum(w, t))
}

/// Ranks of the shifted homology of `{Q <= 0}` projectivized: the profile of
/// `CP^{ci - 1}` moved down by `(n - 1)(d + 1)`.
pub fn sublevel_homology(q: &QuadraticForm, n: usize, d: usize) -> Result<BTreeMap<i64, u32>> {
    let r = morse_index(q)?;
    if r.nullity != 0 {
        return Err(GfhError::SpectralParameter { t: f64::NAN });
    }
    let ci =
        r.complex_index.ok_or_else(|| GfhError::Unsupported("sublevel homology needs an invariant form".into()))?;
    Ok(profile_degrees(ci, n, d).map(|k| (k, 1)).collect())
}

/// Degrees occupied by a sublevel set of complex index `ci`.
pub fn profile_degrees(ci: usize, n: usize, d: usize) -> impl Iterator<Item = i64> {
    let shift = ((n as i64) - 1) * (d as i64 + 1);
    (0..ci as i64).map(move |k| 2 * k - shift)
}

/// Top occupied degree `2(ci - 1) - (n - 1)(d + 1)`.
pub fn top_degree(ci: usize, n: usize, d: usize) -> i64 {
    2 * (ci as i64 - 1) - (n as i64 - 1) * (d as i64 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn w(q: &[u32]) -> Weights {
        Weights::new(q.to_vec()).unwrap()
    }

    #[test]
    fn simple_counts() {
        let z = QuadraticForm::new(DMatrix::zeros(4, 4), Some(w(&[1, 1]))).unwrap();
        assert_eq!(morse_index(&z).unwrap(), IndexReport { real_index: 0, nullity: 4, complex_index: Some(0) });
        let d = QuadraticForm::new(DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -1.0, 1.0])), None).unwrap();
        let r = morse_index(&d).unwrap();
        assert_eq!((r.real_index, r.nullity), (2, 0));
    }

    #[test]
    fn t_family_at_zero() {
        let q = w(&[1, 1]);
        let r = morse_index(&t_family(&q, 1, 0.0).unwrap()).unwrap();
        assert_eq!((r.real_index, r.nullity), (8, 4));
    }

    #[test]
    fn index_formula_examples() {
        assert_eq!(index_formula_check(&w(&[1, 2]), 1, 0.3).unwrap(), 0);
        assert_eq!(index_formula_check(&w(&[1, 2]), 1, 0.6).unwrap(), 0);
        assert_eq!(index_formula_check(&w(&[2, 3]), 1, 0.9).unwrap(), 0);
        assert_eq!(index_formula_check(&w(&[1, 2]), 2, -1.3).unwrap(), 0);
        assert!(matches!(index_formula_check(&w(&[1, 2]), 1, 0.5), Err(GfhError::SpectralParameter { .. })));
    }

    #[test]
    fn negative_definite_profile() {
        let q = w(&[1, 2]);
        let f = QuadraticForm::new(-DMatrix::identity(4, 4), Some(q)).unwrap();
        let h = sublevel_homology(&f, 1, 1).unwrap();
        assert_eq!(h.keys().copied().collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn t_family_top_degree() {
        let q = w(&[1, 2]);
        for t in [0.1, 0.6, 0.9, 1.4, -0.3] {
            let f = t_family(&q, 2, t).unwrap();
            let n = 1 + 2 * q.n0();
            let ci = morse_index(&f).unwrap().complex_index.unwrap();
            assert_eq!(top_degree(ci, n, 1), 2 * (1 + floor_sum(&q, t)));
            let h = sublevel_homology(&f, n, 1).unwrap();
            assert_eq!(*h.keys().last().unwrap(), top_degree(ci, n, 1));
        }
    }
}
