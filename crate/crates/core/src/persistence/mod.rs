//! Persistence over Q and F_p: filtered complexes, reduction, periodic
//! barcodes and field comparisons.

pub mod barcode;
pub mod complex;
pub mod field;

use serde::Serialize;

pub use barcode::{periodicize, BarcodeStatistics, FiniteBar, InfiniteBar, PeriodicBarcode};
pub use complex::{reduce, Bar, Cell, FilteredComplex};

use crate::error::Result;
use crate::weights::{validate_field, CoefficientField, Weights};

#[derive(Debug, Clone, Serialize)]
pub struct FieldResult {
    pub field: CoefficientField,
    pub beta_tot: f64,
    pub agrees_with_q: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldComparison {
    pub rationals: f64,
    pub primes: Vec<FieldResult>,
    /// Primes skipped because they divide a weight.
    pub skipped: Vec<u32>,
    /// Smallest tested prime from which every larger tested prime agrees
    /// with Q.
    pub threshold: Option<u32>,
}

/// Reduces one periodic window complex over Q and each valid prime, and
/// compares total bar lengths.
pub fn compare_fields(
    cx: &FilteredComplex,
    weights: &Weights,
    lo: f64,
    hi: f64,
    primes: &[u32],
) -> Result<FieldComparison> {
    let total = weights.total();
    let run = |f: CoefficientField| -> Result<PeriodicBarcode> { periodicize(&reduce(cx, f)?, total, f, lo, hi) };
    let q = run(CoefficientField::Rationals)?;
    let bq = q.statistics().beta_tot;
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    let mut sorted = primes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for p in sorted {
        let f = CoefficientField::prime(p)?;
        if !validate_field(weights, f) {
            skipped.push(p);
            continue;
        }
        let b = run(f)?;
        let bt = b.statistics().beta_tot;
        results.push(FieldResult {
            field: f,
            beta_tot: bt,
            agrees_with_q: b.finite == q.finite && b.infinite == q.infinite,
        });
    }
    let threshold = results
        .iter()
        .rposition(|r| !r.agrees_with_q)
        .map_or(results.first(), |i| results.get(i + 1))
        .map(|r| r.field.characteristic());
    Ok(FieldComparison { rationals: bq, primes: results, skipped, threshold })
}
