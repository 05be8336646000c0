//! Filtered chain complexes with integer boundary coefficients and their
//! reduction over a coefficient field.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::field::{Field, PrimeField, Rationals};
use crate::error::{GfhError, Result};
use crate::weights::CoefficientField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub degree: i64,
    pub filtration: f64,
}

/// Cells with a sparse integer boundary; `boundary[j]` lists `(face, coeff)`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FilteredComplex {
    cells: Vec<Cell>,
    boundary: Vec<Vec<(usize, i64)>>,
}

/// A bar `[birth, death)` of the plain (non-periodic) barcode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub birth: f64,
    pub death: Option<f64>,
    pub degree: i64,
}

impl Bar {
    pub fn contains(&self, t: f64) -> bool {
        self.birth <= t && self.death.is_none_or(|d| t < d)
    }
}

impl FilteredComplex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a cell and returns its index. Faces must already exist.
    pub fn add_cell(&mut self, degree: i64, filtration: f64, boundary: Vec<(usize, i64)>) -> usize {
        self.cells.push(Cell { degree, filtration });
        self.boundary.push(boundary);
        self.cells.len() - 1
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn boundary(&self, j: usize) -> &[(usize, i64)] {
        &self.boundary[j]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Checks degrees, filtration monotonicity and `d^2 = 0` over Z.
    pub fn validate(&self) -> Result<()> {
        for (j, col) in self.boundary.iter().enumerate() {
            let c = self.cells[j];
            for &(i, v) in col {
                if i >= self.cells.len() {
                    return Err(GfhError::Structural(format!("cell {j} has unknown face {i}")));
                }
                let f = self.cells[i];
                if v != 0 && f.degree != c.degree - 1 {
                    return Err(GfhError::Structural(format!(
                        "face {i} of cell {j} has degree {} instead of {}",
                        f.degree,
                        c.degree - 1
                    )));
                }
                if v != 0 && f.filtration > c.filtration {
                    return Err(GfhError::Structural(format!(
                        "face {i} of cell {j} enters later ({} > {})",
                        f.filtration, c.filtration
                    )));
                }
            }
            let mut dd: HashMap<usize, i128> = HashMap::new();
            for &(i, v) in col {
                for &(k, w) in &self.boundary[i] {
                    *dd.entry(k).or_default() += v as i128 * w as i128;
                }
            }
            if let Some((k, _)) = dd.iter().find(|(_, &v)| v != 0) {
                return Err(GfhError::Structural(format!("boundary of boundary of cell {j} is nonzero at cell {k}")));
            }
        }
        Ok(())
    }

    /// Cell order used by the reduction: (filtration, degree, insertion).
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.cells.len()).collect();
        idx.sort_by(|&a, &b| {
            let (ca, cb) = (self.cells[a], self.cells[b]);
            ca.filtration.partial_cmp(&cb.filtration).unwrap().then(ca.degree.cmp(&cb.degree)).then(a.cmp(&b))
        });
        idx
    }
}

/// Persistence pairs and bars of a filtered complex over a field.
pub fn reduce(cx: &FilteredComplex, field: CoefficientField) -> Result<Vec<Bar>> {
    cx.validate()?;
    match field {
        CoefficientField::Rationals => Ok(reduce_with(cx, &Rationals)),
        CoefficientField::Prime(p) => Ok(reduce_with(cx, &PrimeField::new(p))),
    }
}

/// Standard column reduction with clearing: columns are processed from the
/// top degree down, and a column whose cell was already used as a pivot is
/// known to reduce to zero and skipped.
fn reduce_with<F: Field>(cx: &FilteredComplex, f: &F) -> Vec<Bar> {
    let order = cx.order();
    let n = order.len();
    let mut pos = vec![0usize; n];
    for (p, &c) in order.iter().enumerate() {
        pos[c] = p;
    }
    // Columns in filtration order, rows as positions; sorted ascending.
    let mut cols: Vec<Vec<(usize, F::E)>> = order
        .iter()
        .map(|&c| {
            let mut acc: HashMap<usize, i64> = HashMap::new();
            for &(i, v) in cx.boundary(c) {
                *acc.entry(pos[i]).or_default() += v;
            }
            let mut col: Vec<(usize, F::E)> =
                acc.into_iter().map(|(r, v)| (r, f.embed(v))).filter(|(_, v)| !f.is_zero(v)).collect();
            col.sort_by_key(|e| e.0);
            col
        })
        .collect();
    let degree = |p: usize| cx.cells()[order[p]].degree;
    let mut degrees: Vec<i64> = (0..n).map(degree).collect();
    degrees.sort_unstable();
    degrees.dedup();
    let mut pivot_of: HashMap<usize, usize> = HashMap::new();
    let mut cleared = vec![false; n];
    let mut paired = vec![false; n];
    for &d in degrees.iter().rev() {
        for j in (0..n).filter(|&j| degree(j) == d) {
            if cleared[j] {
                cols[j].clear();
                continue;
            }
            while let Some((low, lv)) = cols[j].last().cloned() {
                let Some(&k) = pivot_of.get(&low) else { break };
                let kv = cols[k].last().unwrap().1.clone();
                let factor = f.div(&lv, &kv);
                let other = cols[k].clone();
                cols[j] = axpy(f, &cols[j], &factor, &other);
            }
            if let Some((low, _)) = cols[j].last() {
                pivot_of.insert(*low, j);
                cleared[*low] = true;
                paired[*low] = true;
                paired[j] = true;
            }
        }
    }
    let mut bars = Vec::new();
    for (&low, &j) in &pivot_of {
        let (b, dth) = (cx.cells()[order[low]].filtration, cx.cells()[order[j]].filtration);
        if dth > b {
            bars.push(Bar { birth: b, death: Some(dth), degree: degree(low) });
        }
    }
    for p in 0..n {
        if !paired[p] {
            bars.push(Bar { birth: cx.cells()[order[p]].filtration, death: None, degree: degree(p) });
        }
    }
    bars.sort_by(|a, b| {
        a.degree
            .cmp(&b.degree)
            .then(a.birth.partial_cmp(&b.birth).unwrap())
            .then(a.death.unwrap_or(f64::INFINITY).partial_cmp(&b.death.unwrap_or(f64::INFINITY)).unwrap())
    });
    bars
}

/// `a - factor * b` for sorted sparse columns.
fn axpy<F: Field>(f: &F, a: &[(usize, F::E)], factor: &F::E, b: &[(usize, F::E)]) -> Vec<(usize, F::E)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            let zero = f.zero();
            out.push((b[j].0, f.sub(&zero, &f.mul(factor, &b[j].1))));
            j += 1;
        } else {
            let v = f.sub(&a[i].1, &f.mul(factor, &b[j].1));
            if !f.is_zero(&v) {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Number of bars of the given degree alive at t.
pub fn bars_alive(bars: &[Bar], degree: i64, t: f64) -> usize {
    bars.iter().filter(|b| b.degree == degree && b.contains(t)).count()
}
