//! Z-periodic barcodes: orbit representatives under
//! `(a, b, k) -> (a + 1, b + 1, k + 2|q|)` and their statistics.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::complex::Bar;
use crate::error::{GfhError, Result};
use crate::weights::CoefficientField;

pub const SCHEMA_VERSION: u32 = 1;

/// Tolerance for matching translated endpoints.
pub const PERIOD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteBar {
    pub birth: f64,
    pub death: f64,
    pub degree: i64,
}

impl FiniteBar {
    pub fn length(&self) -> f64 {
        self.death - self.birth
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfiniteBar {
    pub birth: f64,
    pub degree: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicBarcode {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub total_weight: u32,
    pub field: CoefficientField,
    pub finite: Vec<FiniteBar>,
    pub infinite: Vec<InfiniteBar>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarcodeStatistics {
    /// Number of finite orbit representatives.
    pub k: usize,
    pub beta_max: f64,
    pub beta_tot: f64,
    /// Homology count `|q| + 2K`.
    pub n: u64,
}

impl PeriodicBarcode {
    /// Validates representatives: births in [0, 1), positive lengths, even
    /// infinite degrees, and exactly `|q|` infinite orbits.
    pub fn new(
        total_weight: u32,
        field: CoefficientField,
        mut finite: Vec<FiniteBar>,
        mut infinite: Vec<InfiniteBar>,
    ) -> Result<Self> {
        for b in &finite {
            if !(0.0..1.0).contains(&b.birth) {
                return Err(GfhError::Structural(format!("finite representative born at {} outside [0,1)", b.birth)));
            }
            if b.death <= b.birth || !b.death.is_finite() {
                return Err(GfhError::Structural(format!("bar ({}, {}) has no positive length", b.birth, b.death)));
            }
        }
        for b in &infinite {
            if !(0.0..1.0).contains(&b.birth) {
                return Err(GfhError::Structural(format!("infinite representative born at {} outside [0,1)", b.birth)));
            }
            if b.degree % 2 != 0 {
                return Err(GfhError::TheoremViolation(format!("infinite bar in odd degree {}", b.degree)));
            }
        }
        if infinite.len() != total_weight as usize {
            return Err(GfhError::TheoremViolation(format!(
                "{} infinite orbits instead of |q| = {total_weight}",
                infinite.len()
            )));
        }
        sort_finite(&mut finite);
        infinite.sort_by(|a, b| a.birth.partial_cmp(&b.birth).unwrap().then(a.degree.cmp(&b.degree)));
        Ok(Self { schema_version: SCHEMA_VERSION, total_weight, field, finite, infinite })
    }

    pub fn shift(&self) -> i64 {
        2 * self.total_weight as i64
    }

    pub fn statistics(&self) -> BarcodeStatistics {
        let lengths = self.finite.iter().map(FiniteBar::length);
        BarcodeStatistics {
            k: self.finite.len(),
            beta_max: lengths.clone().fold(0.0, f64::max),
            beta_tot: lengths.sum(),
            n: self.total_weight as u64 + 2 * self.finite.len() as u64,
        }
    }

    /// All bars (translates included) meeting `[lo, hi]`.
    pub fn expand(&self, lo: f64, hi: f64) -> Vec<Bar> {
        let mut out = Vec::new();
        let s = self.shift();
        for b in &self.finite {
            let j0 = (lo - b.death).floor() as i64;
            let j1 = (hi - b.birth).ceil() as i64;
            for j in j0..=j1 {
                let (x, y) = (b.birth + j as f64, b.death + j as f64);
                if y >= lo && x <= hi {
                    out.push(Bar { birth: x, death: Some(y), degree: b.degree + s * j });
                }
            }
        }
        for b in &self.infinite {
            let j0 = (lo - b.birth).floor() as i64 - 1;
            let j1 = (hi - b.birth).ceil() as i64;
            for j in j0..=j1 {
                let x = b.birth + j as f64;
                if x <= hi {
                    out.push(Bar { birth: x, death: None, degree: b.degree + s * j });
                }
            }
        }
        out
    }

    /// Endpoints in `(s, t]` whose partner endpoint lies outside, over all
    /// translates. Endpoints at s or t are rejected.
    pub fn window_dim(&self, s: f64, t: f64) -> Result<u64> {
        if s >= t {
            return Err(GfhError::OutOfRange { what: "window start", value: s, bound: t });
        }
        let eps = 1e-12;
        let hits = |x: f64| -> Result<()> {
            for e in [s, t] {
                let k = (e - x).round();
                if (e - x - k).abs() <= eps {
                    return Err(GfhError::EndpointCollision { value: e });
                }
            }
            Ok(())
        };
        let inside = |x: f64| x > s && x <= t;
        let mut count = 0u64;
        for b in &self.finite {
            hits(b.birth)?;
            hits(b.death)?;
            let j0 = (s - b.death).floor() as i64 - 1;
            let j1 = (t - b.birth).ceil() as i64 + 1;
            for j in j0..=j1 {
                let (x, y) = (b.birth + j as f64, b.death + j as f64);
                if inside(x) != inside(y) {
                    count += 1;
                }
            }
        }
        for b in &self.infinite {
            hits(b.birth)?;
            let j0 = (s - b.birth).floor() as i64 - 1;
            let j1 = (t - b.birth).ceil() as i64 + 1;
            count += (j0..=j1).filter(|&j| inside(b.birth + j as f64)).count() as u64;
        }
        Ok(count)
    }

    /// `int_0^1 window_dim(a + x, a + x + n) dx`, computed exactly from the
    /// breakpoints of the piecewise-constant integrand.
    pub fn window_integral(&self, a: f64, n: u32) -> Result<f64> {
        let stats = self.statistics();
        if stats.k > 0 && n as f64 <= stats.beta_max {
            return Err(GfhError::Unsupported(format!(
                "window length {n} does not exceed the longest bar {}",
                stats.beta_max
            )));
        }
        let mut cuts = vec![0.0, 1.0];
        let ends = self.finite.iter().flat_map(|b| [b.birth, b.death]).chain(self.infinite.iter().map(|b| b.birth));
        for e in ends {
            for off in [a, a + n as f64] {
                let x = (e - off).rem_euclid(1.0);
                if x > 0.0 && x < 1.0 {
                    cuts.push(x);
                }
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (l, r) = (w[0], w[1]);
            if r - l < 1e-13 {
                continue;
            }
            let mid = 0.5 * (l + r);
            total += (r - l) * self.window_dim(a + mid, a + mid + n as f64)? as f64;
        }
        Ok(total)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: PeriodicBarcode = serde_json::from_str(s)?;
        Self::new(raw.total_weight, raw.field, raw.finite, raw.infinite)
    }

    /// Flat CSV: `kind,birth,death,degree` with an empty death for
    /// infinite representatives.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,birth,death,degree\n");
        for b in &self.finite {
            let _ = writeln!(out, "finite,{},{},{}", b.birth, b.death, b.degree);
        }
        for b in &self.infinite {
            let _ = writeln!(out, "infinite,{},,{}", b.birth, b.degree);
        }
        out
    }
}

fn sort_finite(v: &mut [FiniteBar]) {
    v.sort_by(|a, b| {
        a.birth
            .partial_cmp(&b.birth)
            .unwrap()
            .then(a.degree.cmp(&b.degree))
            .then(a.death.partial_cmp(&b.death).unwrap())
    });
}

/// Folds the bars of a window computation on `[lo, hi]` into orbit
/// representatives.
///
/// Only bars born in the interior `[lo + 1, hi - 1)` are used; their
/// translates by every integer keeping them in the interior must be present
/// (to `PERIOD_TOL`), otherwise a periodicity violation lists the unmatched
/// bars. A wrong infinite-orbit count is a theorem violation.
pub fn periodicize(
    bars: &[Bar],
    total_weight: u32,
    field: CoefficientField,
    lo: f64,
    hi: f64,
) -> Result<PeriodicBarcode> {
    let (a, b) = (lo + 1.0, hi - 1.0);
    if b - a < 1.0 {
        return Err(GfhError::OutOfRange { what: "window length", value: hi - lo, bound: 3.0 });
    }
    let s = 2 * total_weight as i64;
    let j_lo = a.ceil() as i64;
    let j_hi = (b.floor() as i64) - 1;
    if j_hi < j_lo {
        return Err(GfhError::OutOfRange { what: "window length", value: hi - lo, bound: 4.0 });
    }
    // Normalized bars per full period [j, j+1) inside the interior.
    let mut periods: Vec<Vec<(f64, Option<f64>, i64)>> = Vec::new();
    for j in j_lo..=j_hi {
        let jf = j as f64;
        let mut v: Vec<(f64, Option<f64>, i64)> = bars
            .iter()
            .filter(|x| x.birth >= jf && x.birth < jf + 1.0)
            .map(|x| (x.birth - jf, x.death.map(|d| d - jf), x.degree - s * j))
            .collect();
        v.sort_by(|p, q| {
            p.2.cmp(&q.2)
                .then(p.0.partial_cmp(&q.0).unwrap())
                .then(p.1.unwrap_or(f64::INFINITY).partial_cmp(&q.1.unwrap_or(f64::INFINITY)).unwrap())
        });
        periods.push(v);
    }
    let reference = &periods[0];
    let mut unmatched = Vec::new();
    for (k, p) in periods.iter().enumerate().skip(1) {
        let same = p.len() == reference.len()
            && p.iter().zip(reference).all(|(x, y)| {
                x.2 == y.2
                    && (x.0 - y.0).abs() < PERIOD_TOL
                    && match (x.1, y.1) {
                        (Some(u), Some(v)) => (u - v).abs() < PERIOD_TOL,
                        (None, None) => true,
                        _ => false,
                    }
            });
        if !same {
            let j = j_lo + k as i64;
            unmatched.push(format!("period [{j}, {}): {:?} vs {:?}", j + 1, p, reference));
        }
    }
    if !unmatched.is_empty() {
        return Err(GfhError::Periodicity(unmatched.join("; ")));
    }
    let mut finite = Vec::new();
    let mut infinite = Vec::new();
    for &(x, y, d) in reference {
        match y {
            Some(y) => finite.push(FiniteBar { birth: x, death: y, degree: d }),
            None => infinite.push(InfiniteBar { birth: x, degree: d }),
        }
    }
    PeriodicBarcode::new(total_weight, field, finite, infinite)
}
