//! Documents written by the command-line front end: spectrum tables,
//! barcodes, invariants and verdict reports. Everything here is
//! deterministic for a given scene.

use serde::Serialize;
use serde_json::{json, Value};

use crate::engine::{
    betatot_smith_check, homology_count, invariants_from_barcode, linear_engine, run_engine, smith_barcodes,
    smith_dims_check, verify_beta_max, verify_duality, verify_fortune_weinstein, verify_subadditivity,
    window_stability, EngineKind, EngineOptions, EngineOutput, Resolution, SpectralInvariants, Status, Verdict,
};
use crate::equivariant::{smith_change_of_variables, EquivariantLinearMap, GFTuple};
use crate::error::{GfhError, Result};
use crate::persistence::barcode::SCHEMA_VERSION;
use crate::persistence::{BarcodeStatistics, PeriodicBarcode};
use crate::scene::Scene;
use crate::spectrum::{fixed_points_linear, orbit_index, ActionSpectrum};
use crate::weights::CoefficientField;

/// One engine run on a scene.
pub struct SceneRun {
    pub scene: Scene,
    pub tuple: GFTuple,
    pub options: EngineOptions,
    pub output: EngineOutput,
}

pub fn run_scene(scene: &Scene, field: CoefficientField) -> Result<SceneRun> {
    let tuple = scene.tuple()?;
    let options = scene.engine_options(field)?;
    let output = run_engine(&tuple, &options, &scene.extra_seeds())?;
    Ok(SceneRun { scene: scene.clone(), tuple, options, output })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub orbit: usize,
    /// Sphere representative as `[re, im]` pairs.
    pub point: Vec<[f64; 2]>,
    pub ord: u32,
    /// Actions in `[0, 1)`.
    pub actions: Vec<f64>,
    pub degrees: Vec<i64>,
    pub real_index: Vec<usize>,
    pub nondegenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumTable {
    pub schema_version: u32,
    pub weights: Vec<u32>,
    pub engine: EngineKind,
    pub ord_sum: u32,
    pub orbits: Vec<SpectrumRow>,
    pub warnings: Vec<String>,
}

/// Fixed orbits with their actions in one period and the index data there.
/// Non-isolated fixed points are an error.
pub fn spectrum_table(run: &SceneRun) -> Result<SpectrumTable> {
    let m = run.options.window;
    let spectrum: ActionSpectrum = match (&run.output.spectrum, run.output.engine) {
        (Some(s), EngineKind::Morse) => s.clone(),
        _ => {
            let phi = run.tuple.composed_map().ok_or_else(|| GfhError::Unsupported("no fixed-point data".into()))?;
            fixed_points_linear(&phi, m as f64)?
        }
    };
    let mut rows = Vec::new();
    for (i, o) in spectrum.orbits.iter().enumerate() {
        let actions = o.period_actions();
        let (mut degrees, mut real_index, mut nondegenerate) = (Vec::new(), Vec::new(), true);
        for &a in &actions {
            let cell = run.output.cells.iter().find(|c| c.orbit == i && (c.action - a).abs() < 1e-9);
            let (deg, idx, null) = match cell {
                Some(c) => (c.degree, c.real_index, c.nullity),
                None => {
                    let (_, rep, deg) = orbit_index(&run.tuple, m, &o.lift, a)?;
                    (deg, rep.real_index, rep.nullity)
                }
            };
            degrees.push(deg);
            real_index.push(idx);
            nondegenerate &= null == 2;
        }
        let point = o.point.sphere_representative().iter().map(|z| [z.re, z.im]).collect();
        rows.push(SpectrumRow { orbit: i, point, ord: o.ord, actions, degrees, real_index, nondegenerate });
    }
    Ok(SpectrumTable {
        schema_version: SCHEMA_VERSION,
        weights: run.scene.weights.clone(),
        engine: run.output.engine,
        ord_sum: spectrum.ord_sum(),
        orbits: rows,
        warnings: spectrum.warnings.clone(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BarcodeDocument {
    pub schema_version: u32,
    pub weights: Vec<u32>,
    pub engine: EngineKind,
    pub resolution: Value,
    pub barcode: PeriodicBarcode,
    pub statistics: BarcodeStatistics,
    pub constraints: Vec<String>,
    pub diagnostics: Vec<String>,
}

pub fn barcode_document(run: &SceneRun) -> BarcodeDocument {
    let e = &run.output;
    let resolution = match &e.resolution {
        Resolution::Exact => json!({ "kind": "exact" }),
        Resolution::Bounded { candidates, beta_tot } => json!({
            "kind": "bounded",
            "candidates": candidates,
            "beta_tot": [beta_tot.0, beta_tot.1],
        }),
    };
    BarcodeDocument {
        schema_version: SCHEMA_VERSION,
        weights: run.scene.weights.clone(),
        engine: e.engine,
        resolution,
        barcode: e.barcode.clone(),
        statistics: e.barcode.statistics(),
        constraints: e.constraints.clone(),
        diagnostics: e.diagnostics.clone(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantsDocument {
    pub schema_version: u32,
    pub weights: Vec<u32>,
    pub field: CoefficientField,
    pub invariants: SpectralInvariants,
    /// `(k, c_k)` for `k` in `[-|q|, 2|q|)`.
    pub sequence: Vec<(i64, f64)>,
}

pub fn invariants_document(run: &SceneRun) -> Result<InvariantsDocument> {
    let inv = run.output.invariants()?;
    let t = inv.total_weight as i64;
    Ok(InvariantsDocument {
        schema_version: SCHEMA_VERSION,
        weights: run.scene.weights.clone(),
        field: run.output.field,
        sequence: (-t..2 * t).map(|k| (k, inv.get(k))).collect(),
        invariants: inv,
    })
}

/// Names accepted by `--checks`.
pub const CHECKS: [&str; 11] = [
    "fortune_weinstein",
    "spectral",
    "duality",
    "subadditivity",
    "beta_max",
    "count",
    "smith",
    "betatot_smith",
    "change_of_variables",
    "window",
    "random_linear",
];

/// Checks run when none are requested.
pub const DEFAULT_CHECKS: [&str; 10] = [
    "fortune_weinstein",
    "spectral",
    "duality",
    "subadditivity",
    "beta_max",
    "count",
    "smith",
    "betatot_smith",
    "change_of_variables",
    "window",
];

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub weights: Vec<u32>,
    pub verdicts: Vec<Verdict>,
    pub failed: usize,
    pub undecided: usize,
}

impl VerifyReport {
    fn new(weights: Vec<u32>, verdicts: Vec<Verdict>) -> Self {
        let count = |s: Status| verdicts.iter().filter(|v| v.status == s).count();
        Self {
            schema_version: SCHEMA_VERSION,
            weights,
            failed: count(Status::Fail),
            undecided: count(Status::Undecided),
            verdicts,
        }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

pub fn parse_checks(list: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for c in list.split(',').map(str::trim).filter(|c| !c.is_empty()) {
        if c == "all" {
            out.extend(CHECKS.iter().map(|s| s.to_string()));
        } else if CHECKS.contains(&c) {
            out.push(c.to_string());
        } else {
            return Err(GfhError::Scene(format!("unknown check '{c}'")));
        }
    }
    out.dedup();
    Ok(out)
}

/// Theorem alarms propagate; any other failure of an auxiliary computation
/// makes the verdict undecided.
fn settle(check: &str, inputs: Value, r: Result<Verdict>) -> Result<Verdict> {
    match r {
        Ok(v) => Ok(v),
        Err(e) if e.is_alarm() => Err(e),
        Err(e) => Ok(Verdict::undecided(check, inputs, format!("{} ({})", e, e.reason()))),
    }
}

/// Fixed windows for the Smith dimension check, shifted slightly when an
/// endpoint lands on a bar endpoint.
const SMITH_WINDOWS: [(f64, f64); 5] =
    [(0.0137, 0.4711), (0.2371, 0.9133), (-0.3119, 0.5417), (0.0517, 1.0517), (0.6131, 1.3379)];

fn spectral_verdict(e: &EngineOutput) -> Result<Verdict> {
    let inputs = json!({ "field": e.field.to_string(), "engine": e.engine });
    if !e.resolution.is_exact() {
        return Ok(Verdict::undecided("spectral", inputs, "resolution is bounded"));
    }
    let inv = e.invariants()?;
    let t = inv.total_weight as i64;
    let shift = (-2 * t..2 * t).map(|k| (inv.get(k + t) - inv.get(k) - 1.0).abs()).fold(0.0, f64::max);
    // The same identity read from the expanded barcode.
    let bars = e.barcode.expand(-(e.window as f64), e.window as f64);
    let mut expanded: f64 = 0.0;
    for b in bars.iter().filter(|b| b.death.is_none()) {
        if let Some(c) = bars.iter().find(|c| c.death.is_none() && c.degree == b.degree + 2 * t) {
            expanded = expanded.max((c.birth - b.birth - 1.0).abs());
        }
    }
    let distinct = {
        let mut v: Vec<f64> = inv.c.iter().map(|c| c.rem_euclid(1.0)).collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        v.len()
    };
    let pass =
        inv.nondecreasing && shift < 1e-12 && expanded < 1e-12 && inv.action_residual < 1e-8 && distinct <= t as usize;
    Ok(Verdict::new(
        "spectral",
        inputs,
        pass,
        json!({
            "c": inv.c,
            "nondecreasing": inv.nondecreasing,
            "period_shift": shift,
            "expanded_shift": expanded,
            "action_residual": inv.action_residual,
            "distinct_mod_1": distinct,
            "infinitely_many_fixed_points": inv.infinitely_many_fixed_points,
            "identity": inv.identity,
        }),
    ))
}

fn count_verdict(e: &EngineOutput) -> Result<Verdict> {
    let inputs = json!({ "field": e.field.to_string() });
    if !e.resolution.is_exact() {
        return Ok(Verdict::undecided("count", inputs, "resolution is bounded"));
    }
    let h = homology_count(e)?;
    let st = e.barcode.statistics();
    let pass = h.consistent && st.n == e.weights.total() as u64 + 2 * st.k as u64;
    Ok(Verdict::new(
        "count",
        inputs,
        pass,
        json!({ "per_orbit": h.per_orbit, "n": h.n, "barcode_n": h.barcode_n, "k": st.k }),
    ))
}

fn beta_max_verdict(e: &EngineOutput) -> Result<Verdict> {
    match &e.resolution {
        Resolution::Exact => verify_beta_max(&e.barcode),
        Resolution::Bounded { .. } => {
            Ok(Verdict::undecided("beta_max", json!({ "field": e.field.to_string() }), "resolution is bounded"))
        }
    }
}

fn smith_verdicts(scene: &Scene, s: &GFTuple, opts: &EngineOptions, checks: &[String]) -> Result<Vec<Verdict>> {
    let want_dims = checks.iter().any(|c| c == "smith");
    let want_beta = checks.iter().any(|c| c == "betatot_smith");
    let mut out = Vec::new();
    if !(want_dims || want_beta) {
        return Ok(out);
    }
    if scene.primes.is_empty() {
        for c in ["smith", "betatot_smith"].into_iter().filter(|c| checks.iter().any(|x| x == c)) {
            out.push(Verdict::undecided(c, json!({}), "the scene lists no primes"));
        }
        return Ok(out);
    }
    for &p in &scene.primes {
        let inputs = json!({ "p": p });
        let (base, iter) = match smith_barcodes(s, p, opts, &scene.extra_seeds()) {
            Ok(x) => x,
            Err(e) if e.is_alarm() => return Err(e),
            Err(e) => {
                for c in ["smith", "betatot_smith"].into_iter().filter(|c| checks.iter().any(|x| x == c)) {
                    out.push(Verdict::undecided(c, inputs.clone(), format!("{e}")));
                }
                continue;
            }
        };
        if want_dims {
            out.push(settle("smith", inputs.clone(), smith_dims_verdict(&base, &iter, p))?);
        }
        if want_beta {
            let b = betatot_smith_check(&base, &iter, p);
            let mut v =
                Verdict::new("betatot_smith", inputs.clone(), b.status == Status::Pass, serde_json::to_value(&b)?);
            v.status = b.status;
            out.push(v);
        }
    }
    Ok(out)
}

fn smith_dims_verdict(base: &EngineOutput, iter: &EngineOutput, p: u32) -> Result<Verdict> {
    if !(base.resolution.is_exact() && iter.resolution.is_exact()) {
        return Ok(Verdict::undecided("smith", json!({ "p": p }), "a resolution is bounded"));
    }
    let mut reports = Vec::new();
    for &(a, b) in &SMITH_WINDOWS {
        let mut last = None;
        for k in 0..8 {
            let off = 0.00173 * k as f64;
            match smith_dims_check(base, iter, p, a + off, b + off) {
                Ok(r) => {
                    last = Some(Ok(r));
                    break;
                }
                Err(e @ GfhError::EndpointCollision { .. }) => last = Some(Err(e)),
                Err(e) => return Err(e),
            }
        }
        reports.push(last.unwrap()?);
    }
    let holds = reports.iter().all(|r| r.holds);
    Ok(Verdict::new(
        "smith",
        json!({ "p": p, "windows": reports.iter().map(|r| [r.a, r.b]).collect::<Vec<_>>() }),
        holds,
        serde_json::to_value(&reports)?,
    ))
}

fn change_of_variables_verdict(scene: &Scene, s: &GFTuple, opts: &EngineOptions, seed: u64) -> Result<Verdict> {
    let linear = if s.is_linear() { Some(s.clone()) } else { opts.reference.as_ref().map(|r| r.tuple.clone()) };
    let Some(t) = linear else {
        return Ok(Verdict::undecided("change_of_variables", json!({}), "needs a linear tuple or reference"));
    };
    let w = s.weights();
    let primes: Vec<u32> = if scene.primes.is_empty() {
        [3, 5, 7].into_iter().filter(|&p| w.as_slice().iter().all(|&q| q % p != 0)).collect()
    } else {
        scene.primes.clone()
    };
    let mut rng = crate::rng(seed);
    let mut worst: f64 = 0.0;
    for &p in &primes {
        for r in 0..p as i64 {
            worst = worst.max(smith_change_of_variables(&t, p, r, 4, &mut rng)?);
        }
    }
    Ok(Verdict::new(
        "change_of_variables",
        json!({ "primes": primes, "tuple": if s.is_linear() { "scene" } else { "reference" } }),
        worst < 1e-8,
        json!({ "max_residual": worst }),
    ))
}

fn random_linear_verdict(scene: &Scene, seed: u64) -> Result<Verdict> {
    let w = scene.weights()?;
    let mut rng = crate::rng(seed);
    let (mut fw, mut spectral, mut duality) = (0usize, 0usize, 0.0f64);
    let trials = 20;
    for _ in 0..trials {
        let map = EquivariantLinearMap::random(&w, 0.8, &mut rng);
        let s = GFTuple::split_linear(&map, 3)?;
        let e = linear_engine(&s, scene.window, CoefficientField::Rationals)?;
        let ords = fixed_points_linear(&map, scene.window as f64)?.ord_sum();
        if verify_fortune_weinstein(&e).passed() && ords == w.total() {
            fw += 1;
        }
        if spectral_verdict(&e)?.passed() {
            spectral += 1;
        }
        duality = duality.max(verify_duality(&s, &EngineOptions { window: scene.window, ..Default::default() })?);
    }
    Ok(Verdict::new(
        "random_linear",
        json!({ "seed": seed, "trials": trials }),
        fw == trials && spectral == trials && duality < 1e-8,
        json!({ "fortune_weinstein_equal": fw, "spectral_pass": spectral, "duality_residual": duality }),
    ))
}

/// Runs the requested checks on a scene over each of its fields.
pub fn verify_scene(scene: &Scene, checks: &[String], seed: u64) -> Result<VerifyReport> {
    let has = |c: &str| checks.iter().any(|x| x == c);
    let mut verdicts = Vec::new();
    let mut first: Option<SceneRun> = None;
    for &field in &scene.fields {
        let run = run_scene(scene, field)?;
        let e = &run.output;
        if has("fortune_weinstein") {
            verdicts.push(verify_fortune_weinstein(e));
        }
        if has("spectral") {
            verdicts.push(spectral_verdict(e)?);
        }
        if has("beta_max") {
            verdicts.push(beta_max_verdict(e)?);
        }
        if has("count") {
            verdicts.push(count_verdict(e)?);
        }
        if first.is_none() {
            first = Some(run);
        }
    }
    let run = first.expect("scenes have at least one field");
    let (s, opts) = (&run.tuple, &run.options);
    if has("duality") {
        let inputs = json!({ "field": opts.field.to_string() });
        let r = verify_duality(s, opts)
            .map(|d| Verdict::new("duality", inputs.clone(), d < 1e-8, json!({ "max_residual": d })));
        verdicts.push(settle("duality", inputs, r)?);
    }
    if has("subadditivity") {
        let inputs = json!({ "pair": "(s, eps, s)" });
        if s.is_linear() {
            let r = verify_subadditivity(s, s, opts).map(|rep| {
                Verdict::new(
                    "subadditivity",
                    inputs.clone(),
                    rep.violations.is_empty(),
                    serde_json::to_value(&rep).unwrap(),
                )
            });
            verdicts.push(settle("subadditivity", inputs, r)?);
        } else {
            verdicts.push(Verdict::undecided("subadditivity", inputs, "checked on linear tuples only"));
        }
    }
    if has("window") {
        let inputs = json!({ "windows": [opts.window, opts.window + 1] });
        let wider = EngineOptions { window: opts.window + 1, ..opts.clone() };
        let r = run_engine(s, &wider, &scene.extra_seeds()).map(|e2| {
            let same = window_stability(&run.output.barcode, &e2.barcode);
            let exact = run.output.resolution.is_exact() && e2.resolution.is_exact();
            let mut v = Verdict::new("window", inputs.clone(), same, json!({ "agree": same }));
            if !exact {
                v.status = Status::Undecided;
            }
            v
        });
        verdicts.push(settle("window", inputs, r)?);
    }
    verdicts.extend(smith_verdicts(scene, s, opts, checks)?);
    if has("change_of_variables") {
        let r = change_of_variables_verdict(scene, s, opts, seed);
        verdicts.push(settle("change_of_variables", json!({}), r)?);
    }
    if has("random_linear") {
        verdicts.push(random_linear_verdict(scene, seed)?);
    }
    Ok(VerifyReport::new(scene.weights.clone(), verdicts))
}

/// Checks that only need a barcode: the alarm on `beta_max`, the homology
/// count and the structure of the invariants read off the infinite bars.
pub fn verify_barcode(b: &PeriodicBarcode) -> Result<VerifyReport> {
    let mut verdicts = vec![verify_beta_max(b)?];
    let st = b.statistics();
    verdicts.push(Verdict::new(
        "count",
        json!({ "total_weight": b.total_weight }),
        st.n == b.total_weight as u64 + 2 * st.k as u64 && b.infinite.len() == b.total_weight as usize,
        json!({ "n": st.n, "k": st.k }),
    ));
    let inv = invariants_from_barcode(b, 0, &[])?;
    verdicts.push(Verdict::new(
        "spectral",
        json!({ "total_weight": b.total_weight }),
        inv.nondecreasing,
        json!({ "c": inv.c, "nondecreasing": inv.nondecreasing }),
    ));
    Ok(VerifyReport::new(Vec::new(), verdicts))
}

/// Reads either a bare barcode or a barcode document written by
/// [`barcode_document`].
pub fn parse_barcode(text: &str) -> Result<PeriodicBarcode> {
    let v: Value = serde_json::from_str(text)?;
    let inner = v.get("barcode").cloned().unwrap_or(v);
    PeriodicBarcode::from_json(&serde_json::to_string(&inner)?)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}
