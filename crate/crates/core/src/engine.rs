//! Persistence of the sublevel family `{F_{sigma_{m,t}} <= 0}` and the
//! verdicts built on it.
//!
//! Two engines produce periodic barcodes. The linear engine counts
//! eigenvalues of the assembled quadratic form between consecutive spectral
//! values. The Morse engine takes nondegenerate critical orbits, grades them
//! by the index of the Hessian of the generating function, and resolves the
//! differential by enumerating pairings that are compatible with the known
//! total homology (one generator in each even degree).

use serde::Serialize;
use serde_json::json;

use crate::equivariant::{assemble_f, sigma_family, GFTuple};
use crate::error::{GfhError, Result};
use crate::index::{morse_index, top_degree};
use crate::persistence::{periodicize, reduce, Bar, FilteredComplex, PeriodicBarcode};
use crate::spectrum::{fixed_points_newton, linear_spectral_values, orbit_index, seed_grid, ActionSpectrum};
use crate::weights::{validate_field, CoefficientField, Weights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Linear,
    Morse,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Resolution {
    Exact,
    Bounded { candidates: Vec<PeriodicBarcode>, beta_tot: (f64, f64) },
}

impl Resolution {
    pub fn is_exact(&self) -> bool {
        matches!(self, Resolution::Exact)
    }
}

/// A graded generator of the Morse complex: one capped critical orbit with
/// action in `[0, 1)`.
#[derive(Debug, Clone, Serialize)]
pub struct GeneratorCell {
    pub orbit: usize,
    pub action: f64,
    pub degree: i64,
    pub ord: u32,
    pub real_index: usize,
    pub nullity: usize,
}

#[derive(Debug, Clone)]
pub struct EngineOutput {
    pub weights: Weights,
    pub field: CoefficientField,
    pub window: usize,
    pub engine: EngineKind,
    pub spectrum: Option<ActionSpectrum>,
    /// Spectral values in `[0, 1)` with multiplicity.
    pub spectral_values: Vec<f64>,
    pub cells: Vec<GeneratorCell>,
    pub barcode: PeriodicBarcode,
    pub resolution: Resolution,
    /// Constraints used to select the pairing.
    pub constraints: Vec<String>,
    pub diagnostics: Vec<String>,
}

impl EngineOutput {
    pub fn invariants(&self) -> Result<SpectralInvariants> {
        spectral_invariants(self)
    }
}

/// Default window: reps live in `[0, 1)`, and the periodicity check needs
/// two full periods away from the window edges.
pub const DEFAULT_WINDOW: usize = 2;

/// A linear tuple whose spectral invariants are within `radius` of those of
/// the tuple under study. Spectral invariants are 1-Lipschitz for the Hofer
/// distance measured in action units (`sup |H - G| / pi` per unit time), so
/// any pairing whose invariants leave this band is impossible.
#[derive(Debug, Clone)]
pub struct StabilityReference {
    pub tuple: GFTuple,
    pub radius: f64,
}

impl StabilityReference {
    pub fn new(tuple: GFTuple, radius: f64) -> Result<Self> {
        if !tuple.is_linear() {
            return Err(GfhError::Unsupported("a stability reference must be a linear tuple".into()));
        }
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(GfhError::OutOfRange { what: "stability radius", value: radius, bound: 0.0 });
        }
        Ok(Self { tuple, radius })
    }

    /// Reference for the p-th iterate.
    pub fn power(&self, p: usize) -> Self {
        Self { tuple: self.tuple.power(p), radius: self.radius * p as f64 }
    }

    pub fn invariants(&self, m: usize) -> Result<SpectralInvariants> {
        linear_engine(&self.tuple, m, CoefficientField::Rationals)?.invariants()
    }
}

#[derive(Debug, Clone)]
pub struct EngineOptions {
    pub window: usize,
    pub field: CoefficientField,
    pub seeds: SeedOptions,
    pub reference: Option<StabilityReference>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            field: CoefficientField::Rationals,
            seeds: SeedOptions::default(),
            reference: None,
        }
    }
}

impl EngineOptions {
    pub fn with_field(&self, field: CoefficientField) -> Self {
        Self { field, ..self.clone() }
    }
}

fn checked_field(w: &Weights, field: CoefficientField) -> Result<CoefficientField> {
    field.checked(w)
}

/// Exact persistence of a linear tuple.
pub fn linear_engine(s: &GFTuple, m: usize, field: CoefficientField) -> Result<EngineOutput> {
    let w = s.weights().clone();
    let field = checked_field(&w, field)?;
    if m < 2 {
        return Err(GfhError::OutOfRange { what: "window", value: m as f64, bound: 2.0 });
    }
    let phi = s.composed_map().ok_or_else(|| GfhError::Unsupported("linear engine needs a linear tuple".into()))?;
    let mf = m as f64;
    let mut values = linear_spectral_values(&phi, -mf, mf);
    values.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    // Values on the window edge would put a sample on a spectral value.
    values.retain(|v| v.abs() < mf - 1e-9);
    let mut samples = Vec::with_capacity(values.len() + 1);
    for (i, v) in values.iter().enumerate() {
        let prev = if i == 0 { -mf } else { values[i - 1] };
        samples.push(0.5 * (prev + v));
    }
    samples.push(0.5 * (values.last().copied().unwrap_or(-mf) + mf));
    let n = s.len() + m * w.n0();
    let d = w.dim();
    let mut tops = Vec::with_capacity(samples.len());
    for &t in &samples {
        let f = assemble_f(&sigma_family(s, m, t)?)?;
        let r = morse_index(&f)?;
        if r.nullity != 0 {
            return Err(GfhError::SpectralParameter { t });
        }
        tops.push(top_degree(r.complex_index.unwrap_or(0), n, d));
    }
    let mut bars = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        let (before, after) = (tops[i], tops[i + 1]);
        if after < before {
            return Err(GfhError::TheoremViolation(format!(
                "sublevel index decreases across t = {v} ({before} -> {after})"
            )));
        }
        let mult = linear_spectral_values(&phi, v - 1e-9, v + 1e-9).len() as i64;
        if after - before != 2 * mult {
            diagnostics
                .push(format!("index jump {} at t = {v} differs from twice the multiplicity {mult}", after - before));
        }
        let mut k = before + 2;
        while k <= after {
            bars.push(Bar { birth: v, death: None, degree: k });
            k += 2;
        }
    }
    let barcode = periodicize(&bars, w.total(), field, -mf, mf)?;
    let spectral_values = linear_spectral_values(&phi, 0.0, 1.0 - 1e-12);
    let spectrum = crate::spectrum::fixed_points_linear(&phi, mf).ok();
    Ok(EngineOutput {
        weights: w,
        field,
        window: m,
        engine: EngineKind::Linear,
        spectrum,
        spectral_values,
        cells: Vec::new(),
        barcode,
        resolution: Resolution::Exact,
        constraints: vec!["eigenvalue count".into()],
        diagnostics,
    })
}

/// Grades every capped orbit with action in `[0, 1)` by the Hessian index.
pub fn grade_orbits(s: &GFTuple, spectrum: &ActionSpectrum, m: usize) -> Result<Vec<GeneratorCell>> {
    let total = s.weights().total() as i64;
    let mut cells = Vec::new();
    for (i, o) in spectrum.orbits.iter().enumerate() {
        for t in o.period_actions() {
            let (_, rep, deg) = orbit_index(s, m, &o.lift, t)?;
            if rep.nullity != 2 {
                return Err(GfhError::Degenerate { action: t, kernel: rep.nullity });
            }
            if t + 1.0 <= m as f64 {
                let (_, r1, d1) = orbit_index(s, m, &o.lift, t + 1.0)?;
                if r1.nullity != 2 || d1 != deg + 2 * total {
                    return Err(GfhError::Periodicity(format!(
                        "orbit {i}: degree {deg} at t = {t:.6} but {d1} at t + 1"
                    )));
                }
            }
            cells.push(GeneratorCell {
                orbit: i,
                action: t,
                degree: deg,
                ord: o.ord,
                real_index: rep.real_index,
                nullity: rep.nullity,
            });
        }
    }
    cells.sort_by(|a, b| a.action.partial_cmp(&b.action).unwrap().then(a.degree.cmp(&b.degree)));
    Ok(cells)
}

/// A pairing `(x, y, j)`: the translate of y by j kills x.
pub type Pairing = Vec<(usize, usize, i64)>;

const MAX_CANDIDATES: usize = 1000;

/// All pairings of one-period generators whose unpaired generators sit in
/// even degrees, one in each residue class mod `2|q|`.
pub fn candidate_pairings(cells: &[GeneratorCell], total_weight: u32) -> Result<Vec<Pairing>> {
    let s = 2 * total_weight as i64;
    let n = cells.len();
    let mut edges: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); n];
    for (x, cx) in cells.iter().enumerate() {
        for (y, cy) in cells.iter().enumerate() {
            let diff = cx.degree + 1 - cy.degree;
            if x == y || diff.rem_euclid(s) != 0 {
                continue;
            }
            let j = diff / s;
            if cy.action + j as f64 > cx.action + 1e-12 {
                edges[x.min(y)].push((x, y, j));
            }
        }
    }
    let mut out = Vec::new();
    let mut used = vec![false; n];
    let mut cur = Vec::new();
    let mut explored = 0usize;
    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        cells: &[GeneratorCell],
        edges: &[Vec<(usize, usize, i64)>],
        used: &mut [bool],
        cur: &mut Pairing,
        out: &mut Vec<Pairing>,
        explored: &mut usize,
        s: i64,
        total: usize,
    ) -> Result<()> {
        *explored += 1;
        if *explored > 1_000_000 {
            return Err(GfhError::Matching("pairing search exceeded its budget".into()));
        }
        if i == cells.len() {
            let free: Vec<i64> = (0..cells.len()).filter(|&k| !used[k]).map(|k| cells[k].degree).collect();
            if free.len() != total || free.iter().any(|d| d % 2 != 0) {
                return Ok(());
            }
            let mut res: Vec<i64> = free.iter().map(|d| d.rem_euclid(s)).collect();
            res.sort_unstable();
            res.dedup();
            if res.len() == total {
                out.push(cur.clone());
                if out.len() > MAX_CANDIDATES {
                    return Err(GfhError::Matching(format!("more than {MAX_CANDIDATES} consistent pairings")));
                }
            }
            return Ok(());
        }
        if used[i] {
            return rec(i + 1, cells, edges, used, cur, out, explored, s, total);
        }
        rec(i + 1, cells, edges, used, cur, out, explored, s, total)?;
        for &(x, y, j) in &edges[i] {
            let other = if x == i { y } else { x };
            if used[other] {
                continue;
            }
            used[i] = true;
            used[other] = true;
            cur.push((x, y, j));
            rec(i + 1, cells, edges, used, cur, out, explored, s, total)?;
            cur.pop();
            used[i] = false;
            used[other] = false;
        }
        Ok(())
    }
    rec(0, cells, &edges, &mut used, &mut cur, &mut out, &mut explored, s, total_weight as usize)?;
    Ok(out)
}

/// Window complex on `[-m, m]` generated by all translates of the cells,
/// with the differential given by a pairing.
pub fn morse_complex(cells: &[GeneratorCell], pairing: &Pairing, total_weight: u32, m: usize) -> FilteredComplex {
    let s = 2 * total_weight as i64;
    let mf = m as f64;
    let mut cx = FilteredComplex::new();
    let mut index = std::collections::HashMap::new();
    let mut entries: Vec<(f64, i64, usize, i64)> = Vec::new();
    for (c, cell) in cells.iter().enumerate() {
        let j0 = (-mf - cell.action).ceil() as i64;
        let j1 = (mf - cell.action).floor() as i64;
        for j in j0..=j1 {
            entries.push((cell.action + j as f64, cell.degree + s * j, c, j));
        }
    }
    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let killer: std::collections::HashMap<usize, (usize, i64)> = pairing.iter().map(|&(x, y, j)| (y, (x, j))).collect();
    for (t, deg, c, j) in entries {
        let mut bd = Vec::new();
        if let Some(&(x, jp)) = killer.get(&c) {
            // copy j of y kills copy j - jp of x
            if let Some(&face) = index.get(&(x, j - jp)) {
                bd.push((face, 1));
            }
        }
        let id = cx.add_cell(deg, t, bd);
        index.insert((c, j), id);
    }
    cx
}

/// Resolves graded generators into a periodic barcode. Returns the
/// resolution, the selected (or first) barcode and the constraints used.
pub fn resolve_morse(
    cells: &[GeneratorCell],
    weights: &Weights,
    field: CoefficientField,
    m: usize,
    reference: Option<&StabilityReference>,
) -> Result<(Resolution, PeriodicBarcode, Vec<String>)> {
    let total = weights.total();
    let sum = cells.len() as u32;
    if sum % 2 != total % 2 {
        return Err(GfhError::Matching(format!(
            "{sum} generators per period but the count must have the parity of |q| = {total}; an orbit is missing"
        )));
    }
    let pairings = candidate_pairings(cells, total)?;
    if pairings.is_empty() {
        return Err(GfhError::Matching(
            "no pairing of the critical orbits is compatible with the total homology; an orbit may be missing or degenerate"
                .into(),
        ));
    }
    let mut constraints = vec![format!("total homology ({} candidate pairings)", pairings.len())];
    let mut barcodes = Vec::new();
    for p in &pairings {
        let cx = morse_complex(cells, p, total, m);
        let bars = reduce(&cx, field)?;
        barcodes.push(periodicize(&bars, total, field, -(m as f64), m as f64)?);
    }
    if let Some(r) = reference.filter(|_| barcodes.len() > 1) {
        let target = r.invariants(m)?;
        let before = barcodes.len();
        barcodes.retain(|b| {
            invariants_from_barcode(b, weights.dim(), &[])
                .map(|inv| (0..total as i64).all(|k| (inv.get(k) - target.get(k)).abs() <= r.radius + 1e-9))
                .unwrap_or(false)
        });
        if barcodes.is_empty() {
            return Err(GfhError::Matching(format!(
                "no candidate pairing has spectral invariants within {:.4} of the reference",
                r.radius
            )));
        }
        constraints.push(format!(
            "Hofer stability within {:.4} of the reference ({} of {before} candidates kept)",
            r.radius,
            barcodes.len()
        ));
    }
    if barcodes.len() == 1 {
        Ok((Resolution::Exact, barcodes.pop().unwrap(), constraints))
    } else {
        let bt: Vec<f64> = barcodes.iter().map(|b| b.statistics().beta_tot).collect();
        let lo = bt.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = bt.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let first = barcodes[0].clone();
        Ok((Resolution::Bounded { candidates: barcodes, beta_tot: (lo, hi) }, first, constraints))
    }
}

/// Persistence from nondegenerate critical orbits.
pub fn morse_engine(
    s: &GFTuple,
    spectrum: &ActionSpectrum,
    m: usize,
    field: CoefficientField,
    reference: Option<&StabilityReference>,
) -> Result<EngineOutput> {
    let w = s.weights().clone();
    let field = checked_field(&w, field)?;
    if m < 2 {
        return Err(GfhError::OutOfRange { what: "window", value: m as f64, bound: 2.0 });
    }
    let cells = grade_orbits(s, spectrum, m)?;
    let (resolution, barcode, constraints) = resolve_morse(&cells, &w, field, m, reference)?;
    let mut spectral_values: Vec<f64> = cells.iter().map(|c| c.action).collect();
    spectral_values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(EngineOutput {
        weights: w,
        field,
        window: m,
        engine: EngineKind::Morse,
        spectrum: Some(spectrum.clone()),
        spectral_values,
        cells,
        barcode,
        resolution,
        constraints,
        diagnostics: spectrum.warnings.clone(),
    })
}

/// Seed resolution used by [`run_engine`] for nonlinear tuples.
#[derive(Debug, Clone, Copy)]
pub struct SeedOptions {
    pub moduli: usize,
    pub phases: usize,
}

impl Default for SeedOptions {
    fn default() -> Self {
        Self { moduli: 6, phases: 6 }
    }
}

/// Linear engine for linear tuples; Newton shooting plus the Morse engine
/// otherwise. `extra_seeds` are tried before the grid.
pub fn run_engine(s: &GFTuple, opts: &EngineOptions, extra_seeds: &[nalgebra::DVector<f64>]) -> Result<EngineOutput> {
    let m = opts.window;
    if s.is_linear() {
        return linear_engine(s, m, opts.field);
    }
    let mut all = extra_seeds.to_vec();
    all.extend(seed_grid(s.weights(), opts.seeds.moduli, opts.seeds.phases));
    let spectrum = fixed_points_newton(s, m as f64, &all)?;
    morse_engine(s, &spectrum, m, opts.field, opts.reference.as_ref())
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralInvariants {
    pub total_weight: u32,
    pub dim: usize,
    /// `c_k` for `k = 0..|q|`; other indices follow from `c_{k+|q|} = c_k + 1`.
    pub c: Vec<f64>,
    pub nondecreasing: bool,
    /// Largest distance of a `c_k` from the action spectrum.
    pub action_residual: f64,
    /// Indices k with `c_k = c_{k+1}`: infinitely many fixed points at that
    /// action.
    pub infinitely_many_fixed_points: Vec<i64>,
    /// Some `d + 1` consecutive `c_k` coincide.
    pub identity: bool,
}

impl SpectralInvariants {
    pub fn get(&self, k: i64) -> f64 {
        let t = self.total_weight as i64;
        self.c[k.rem_euclid(t) as usize] + k.div_euclid(t) as f64
    }
}

/// `c_k` read off the infinite orbit representatives, anchored by degree:
/// the bar in degree `2k` is born at `c_k`.
pub fn spectral_invariants(e: &EngineOutput) -> Result<SpectralInvariants> {
    if !e.resolution.is_exact() {
        return Err(GfhError::Unsupported("spectral invariants need an exact resolution".into()));
    }
    invariants_from_barcode(&e.barcode, e.weights.dim(), &e.spectral_values)
}

/// Invariants of a periodic barcode; `spectral_values` (in `[0, 1)`) feed
/// the action residual and may be empty.
pub fn invariants_from_barcode(
    barcode: &PeriodicBarcode,
    dim: usize,
    spectral_values: &[f64],
) -> Result<SpectralInvariants> {
    let t = barcode.total_weight as i64;
    let mut c: Vec<Option<f64>> = vec![None; t as usize];
    for b in &barcode.infinite {
        let k = b.degree / 2;
        let j = k.div_euclid(t);
        let k0 = k.rem_euclid(t) as usize;
        if c[k0].is_some() {
            return Err(GfhError::TheoremViolation(format!("two infinite orbits in degree class {}", 2 * k0)));
        }
        c[k0] = Some(b.birth - j as f64);
    }
    let c: Vec<f64> = c
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            v.ok_or_else(|| GfhError::TheoremViolation(format!("no infinite orbit in degree class {}", 2 * k)))
        })
        .collect::<Result<_>>()?;
    let mut inv = SpectralInvariants {
        total_weight: t as u32,
        dim,
        c,
        nondecreasing: true,
        action_residual: 0.0,
        infinitely_many_fixed_points: Vec::new(),
        identity: false,
    };
    let d = dim as i64;
    for k in 0..t {
        let (a, b) = (inv.get(k), inv.get(k + 1));
        if b < a - 1e-12 {
            inv.nondecreasing = false;
        }
        if (b - a).abs() < 1e-9 {
            inv.infinitely_many_fixed_points.push(k);
        }
        if (inv.get(k + d) - a).abs() < 1e-9 && d >= 0 {
            inv.identity = inv.identity || (k..k + d).all(|i| (inv.get(i + 1) - inv.get(i)).abs() < 1e-9);
        }
    }
    inv.action_residual = inv
        .c
        .iter()
        .map(|&ck| {
            let r = ck.rem_euclid(1.0);
            spectral_values
                .iter()
                .map(|&v| {
                    let d = (r - v).abs();
                    d.min(1.0 - d)
                })
                .fold(if spectral_values.is_empty() { 0.0 } else { f64::INFINITY }, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Undecided,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub check: String,
    pub inputs: serde_json::Value,
    pub status: Status,
    pub residuals: serde_json::Value,
    pub artifacts: Vec<String>,
}

impl Verdict {
    pub fn new(check: &str, inputs: serde_json::Value, pass: bool, residuals: serde_json::Value) -> Self {
        Self {
            check: check.into(),
            inputs,
            status: if pass { Status::Pass } else { Status::Fail },
            residuals,
            artifacts: Vec::new(),
        }
    }

    /// A check that could not be decided, with the reason as its residual.
    pub fn undecided(check: &str, inputs: serde_json::Value, reason: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            inputs,
            status: Status::Undecided,
            residuals: json!({ "reason": reason.into() }),
            artifacts: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Sum of isotropy orders over fixed orbits is at least `|q|`; for
/// nondegenerate outputs it also equals the homology count `|q| + 2K`.
pub fn verify_fortune_weinstein(e: &EngineOutput) -> Verdict {
    let total = e.weights.total() as u64;
    let ords: Option<u64> = e.spectrum.as_ref().map(|s| s.ord_sum() as u64);
    let n = e.barcode.statistics().n;
    let nondegenerate = e.engine == EngineKind::Morse || e.spectrum.is_some();
    let pass = match ords {
        Some(o) => o >= total && (!nondegenerate || !e.resolution.is_exact() || o == n),
        None => false,
    };
    let mut v = Verdict::new(
        "fortune_weinstein",
        json!({"weights": e.weights.as_slice(), "field": e.field.to_string()}),
        pass,
        json!({"ord_sum": ords, "total_weight": total, "homology_count": n}),
    );
    if ords.is_none() {
        v.status = Status::Undecided;
    }
    v
}

/// Alarm when an exact output has a finite bar of length at least 1.
pub fn verify_beta_max(b: &PeriodicBarcode) -> Result<Verdict> {
    let st = b.statistics();
    if st.beta_max >= 1.0 {
        return Err(GfhError::TheoremViolation(format!("beta_max = {} is not below 1", st.beta_max)));
    }
    Ok(Verdict::new("beta_max", json!({"total_weight": b.total_weight}), true, json!({"beta_max": st.beta_max})))
}

/// `N = |q| + 2K` from the barcode against the per-orbit count.
pub fn homology_count(e: &EngineOutput) -> Result<HomologyCount> {
    let spectrum = e
        .spectrum
        .as_ref()
        .ok_or_else(|| GfhError::Unsupported("homology count needs isolated fixed points".into()))?;
    let per_orbit: Vec<u32> = spectrum.orbits.iter().map(|o| o.ord).collect();
    let n: u64 = per_orbit.iter().map(|&o| o as u64).sum();
    let st = e.barcode.statistics();
    Ok(HomologyCount { per_orbit, n, barcode_n: st.n, consistent: n == st.n })
}

#[derive(Debug, Clone, Serialize)]
pub struct HomologyCount {
    pub per_orbit: Vec<u32>,
    pub n: u64,
    pub barcode_n: u64,
    pub consistent: bool,
}

/// `max_k |c_k(sigma^{-1}) + c_{d-k}(sigma)|` over a fundamental range.
pub fn verify_duality(s: &GFTuple, opts: &EngineOptions) -> Result<f64> {
    let inv_opts = EngineOptions {
        reference: opts.reference.as_ref().map(|r| StabilityReference { tuple: r.tuple.inverse(), radius: r.radius }),
        ..opts.clone()
    };
    let a = run_engine(s, opts, &[])?.invariants()?;
    let b = run_engine(&s.inverse(), &inv_opts, &[])?.invariants()?;
    let d = s.weights().dim() as i64;
    Ok((0..s.weights().total() as i64).map(|k| (b.get(k) + a.get(d - k)).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize)]
pub struct SubadditivityReport {
    pub violations: Vec<(i64, i64, f64)>,
    pub min_slack: f64,
}

/// `c_{k+l-d}((s, eps, s')) <= c_k(s) + c_l(s')` for k, l in a fundamental
/// range.
pub fn verify_subadditivity(s: &GFTuple, s2: &GFTuple, opts: &EngineOptions) -> Result<SubadditivityReport> {
    let opts = EngineOptions { reference: None, ..opts.clone() };
    let a = run_engine(s, &opts, &[])?.invariants()?;
    let b = run_engine(s2, &opts, &[])?.invariants()?;
    let ab = run_engine(&s.concat_eps(s2), &opts, &[])?.invariants()?;
    let d = s.weights().dim() as i64;
    let t = s.weights().total() as i64;
    let mut rep = SubadditivityReport { violations: Vec::new(), min_slack: f64::INFINITY };
    for k in 0..t {
        for l in 0..t {
            let slack = a.get(k) + b.get(l) - ab.get(k + l - d);
            rep.min_slack = rep.min_slack.min(slack);
            if slack < -1e-9 {
                rep.violations.push((k, l, slack));
            }
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, Serialize)]
pub struct SmithReport {
    pub p: u32,
    pub a: f64,
    pub b: f64,
    pub lhs: u64,
    pub per_r: Vec<u64>,
    pub rhs: u64,
    pub holds: bool,
    /// For each r: actions of sigma in `(a + r/p, b + r/p]` and the matching
    /// actions `p s - r` of the iterate, which lie on the fixed set `P_r`.
    pub fixed_sets: Vec<(u32, Vec<f64>, Vec<f64>)>,
}

/// Barcodes of sigma and sigma^p over F_p.
/// The reference of `opts`, if any, is raised to the p-th power for the
/// iterate.
pub fn smith_barcodes(
    s: &GFTuple,
    p: u32,
    opts: &EngineOptions,
    extra_seeds: &[nalgebra::DVector<f64>],
) -> Result<(EngineOutput, EngineOutput)> {
    let field = CoefficientField::prime(p)?;
    if !validate_field(s.weights(), field) {
        return Err(GfhError::FieldGate { field: field.to_string(), weights: s.weights().as_slice().to_vec() });
    }
    let opts = opts.with_field(field);
    let base = run_engine(s, &opts, extra_seeds)?;
    let iter_opts = EngineOptions { reference: opts.reference.as_ref().map(|r| r.power(p as usize)), ..opts.clone() };
    let sp = s.power(p as usize);
    if sp.is_linear() {
        return Ok((base, linear_engine(&sp, opts.window, field)?));
    }
    let mut seeds: Vec<_> = base.spectrum.iter().flat_map(|x| x.orbits.iter().map(|o| o.lift.clone())).collect();
    seeds.extend(seed_grid(s.weights(), opts.seeds.moduli, opts.seeds.phases));
    let first = fixed_points_newton(&sp, opts.window as f64, &seeds)?;
    // Points of period p come in sigma-orbits of p fixed points of the
    // iterate; seeding with the sigma-images completes them.
    let mut seeds: Vec<_> = Vec::new();
    for o in &first.orbits {
        let mut x = o.lift.clone();
        seeds.push(x.clone());
        for _ in 1..p {
            x = s.apply(&x);
            seeds.push(x.clone());
        }
    }
    let spectrum = fixed_points_newton(&sp, opts.window as f64, &seeds)?;
    let iter = morse_engine(&sp, &spectrum, opts.window, field, iter_opts.reference.as_ref())?;
    Ok((base, iter))
}

/// `dim G^{(pa,pb)}(sigma^p) >= sum_r dim G^{(a+r/p, b+r/p)}(sigma)` over F_p.
pub fn smith_dims_check(base: &EngineOutput, iter: &EngineOutput, p: u32, a: f64, b: f64) -> Result<SmithReport> {
    let pf = p as f64;
    let lhs = iter.barcode.window_dim(pf * a, pf * b)?;
    let mut per_r = Vec::new();
    let mut fixed_sets = Vec::new();
    for r in 0..p {
        let (lo, hi) = (a + r as f64 / pf, b + r as f64 / pf);
        per_r.push(base.barcode.window_dim(lo, hi)?);
        let mut acts = Vec::new();
        let j0 = lo.floor() as i64 - 1;
        let j1 = hi.ceil() as i64 + 1;
        for &v in &base.spectral_values {
            for j in j0..=j1 {
                let x = v + j as f64;
                if x > lo && x <= hi {
                    acts.push(x);
                }
            }
        }
        acts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let lifted = acts.iter().map(|x| pf * x - r as f64).collect();
        fixed_sets.push((r, acts, lifted));
    }
    let rhs = per_r.iter().sum();
    Ok(SmithReport { p, a, b, lhs, per_r, rhs, holds: lhs >= rhs, fixed_sets })
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaTotSmith {
    pub p: u32,
    pub iterate: (f64, f64),
    pub base: (f64, f64),
    pub status: Status,
    pub conditional: bool,
    pub slack: f64,
}

fn beta_range(e: &EngineOutput) -> (f64, f64) {
    match &e.resolution {
        Resolution::Exact => {
            let b = e.barcode.statistics().beta_tot;
            (b, b)
        }
        Resolution::Bounded { beta_tot, .. } => *beta_tot,
    }
}

/// `beta_tot(sigma^p; F_p) >= p beta_tot(sigma; F_p)`, on conservative ends
/// of any bounded resolution.
pub fn betatot_smith_check(base: &EngineOutput, iter: &EngineOutput, p: u32) -> BetaTotSmith {
    betatot_smith_from_ranges(
        beta_range(base),
        beta_range(iter),
        p,
        !(base.resolution.is_exact() && iter.resolution.is_exact()),
    )
}

pub fn betatot_smith_from_ranges(base: (f64, f64), iterate: (f64, f64), p: u32, conditional: bool) -> BetaTotSmith {
    let pf = p as f64;
    let tol = 1e-9;
    let status = if iterate.0 + tol >= pf * base.1 {
        Status::Pass
    } else if iterate.1 + tol < pf * base.0 {
        Status::Fail
    } else {
        Status::Undecided
    };
    BetaTotSmith { p, iterate, base, status, conditional, slack: iterate.0 - pf * base.1 }
}

/// Orbit representatives at window m and m + 1 agree.
pub fn window_stability(a: &PeriodicBarcode, b: &PeriodicBarcode) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() < 1e-8;
    a.finite.len() == b.finite.len()
        && a.infinite.len() == b.infinite.len()
        && a.finite
            .iter()
            .zip(&b.finite)
            .all(|(x, y)| x.degree == y.degree && close(x.birth, y.birth) && close(x.death, y.death))
        && a.infinite.iter().zip(&b.infinite).all(|(x, y)| x.degree == y.degree && close(x.birth, y.birth))
}

/// Per-orbit local count at an iterate: the Hessian of the iterated tuple
/// at the iterated orbit has the orbit kernel only.
pub fn iterate_local_counts(s: &GFTuple, spectrum: &ActionSpectrum, k: usize, m: usize) -> Result<Vec<(u32, usize)>> {
    let sk = s.power(k);
    let mut out = Vec::new();
    for o in &spectrum.orbits {
        let t = k as f64 * o.base_action;
        let t = t - t.floor();
        let (_, rep, _) = orbit_index(&sk, m, &o.lift, t)?;
        out.push((o.ord, rep.nullity));
    }
    Ok(out)
}
