//! Acceptance criteria 1 to 11, one `[PRIMARY]` line each.
//!
//! Runs without the libtest harness so the lines always reach stdout. The
//! expected values come from closed forms computed here (floor sums,
//! eigen-angle actions, endpoint counts, brute-force ranks, the designed
//! torsion), not from the code under test.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::Rng;

use gfh_core::catalog;
use gfh_core::engine::{
    betatot_smith_check, homology_count, linear_engine, smith_barcodes, smith_dims_check, verify_beta_max,
    EngineOutput, Status,
};
use gfh_core::equivariant::{smith_change_of_variables, EquivariantLinearMap, GFTuple};
use gfh_core::index::{morse_index, t_family};
use gfh_core::persistence::complex::bars_alive;
use gfh_core::persistence::{compare_fields, reduce, FilteredComplex, FiniteBar, InfiniteBar, PeriodicBarcode};
use gfh_core::report::{self, SceneRun};
use gfh_core::scene::Scene;
use gfh_core::spectrum::{fixed_points_linear, linear_spectral_values};
use gfh_core::weights::{CoefficientField, Weights};
use gfh_core::GfhError;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s(e: GfhError) -> String {
    format!("{}: {e}", e.reason())
}

fn scenes_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenes")
}

fn load(name: &str) -> Scene {
    Scene::load(&scenes_dir().join(name)).expect("bundled scene")
}

fn linear_scenes() -> Vec<Scene> {
    vec![load("rotation_cp12.toml"), load("rotation_cp111.toml")]
}

/// The perturbed scene is expensive; criteria 2, 8 and 9 reuse its run.
fn perturbed_run() -> &'static Result<SceneRun, String> {
    static RUN: OnceLock<Result<SceneRun, String>> = OnceLock::new();
    RUN.get_or_init(|| {
        let s = load("perturbed_cp12.toml");
        report::run_scene(&s, CoefficientField::Rationals).map_err(e2s)
    })
}

fn all_weights(max_entry: u32, max_len: usize) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = vec![vec![]];
    let mut all = Vec::new();
    for _ in 0..max_len {
        out = out
            .iter()
            .flat_map(|v| {
                (1..=max_entry).map(move |q| {
                    let mut w = v.clone();
                    w.push(q);
                    w
                })
            })
            .collect();
        all.extend(out.iter().cloned());
    }
    all
}

fn random_tuple<R: Rng>(w: &Weights, rng: &mut R) -> (EquivariantLinearMap, GFTuple) {
    let map = EquivariantLinearMap::random(w, 0.8, rng);
    let s = GFTuple::split_linear(&map, 3).expect("split");
    (map, s)
}

/// Distance from x to the nearest point of `values + Z`.
fn dist_mod_1(x: f64, values: &[f64]) -> f64 {
    values
        .iter()
        .map(|v| {
            let d = (x - v).rem_euclid(1.0);
            d.min(1.0 - d)
        })
        .fold(f64::INFINITY, f64::min)
}

// 1. ind T_{m,t} - ind T_{m,0+} = 2 sum floor(q_j t).
fn index_formula() -> Outcome {
    let mut checked = 0usize;
    for q in all_weights(4, 4) {
        let w = Weights::new(q.clone()).map_err(e2s)?;
        for m in 1..=2 {
            let at0 = morse_index(&t_family(&w, m, 0.0).map_err(e2s)?).map_err(e2s)?;
            let base = (at0.real_index + at0.nullity) as i64;
            for i in 0..64 {
                // The family is defined for |t| <= m.
                let t = m as f64 * (-1.0 + 2.0 * (i as f64 + 0.5) / 64.0);
                if q.iter().any(|&qj| {
                    let x = qj as f64 * t;
                    (x - x.round()).abs() < 1e-9
                }) {
                    continue;
                }
                let r = morse_index(&t_family(&w, m, t).map_err(e2s)?).map_err(e2s)?;
                let floors: i64 = q.iter().map(|&qj| (qj as f64 * t).floor() as i64).sum();
                ensure(r.nullity == 0 && r.real_index as i64 - base == 2 * floors, || {
                    format!("q = {q:?}, m = {m}, t = {t}: index {} vs base {base} + 2*{floors}", r.real_index)
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (q, m, t) points exact"))
}

fn fw_weights() -> Vec<Weights> {
    [vec![1, 1], vec![1, 2], vec![1, 1, 1], vec![1, 2, 3], vec![2, 3], vec![1, 1, 2]]
        .into_iter()
        .map(|q| Weights::new(q).unwrap())
        .collect()
}

// 2. Sum of isotropy orders equals |q| for generic linear maps, at least
// |q| on every bundled scene.
fn fortune_weinstein() -> Outcome {
    let mut rng = gfh_core::rng(2);
    let ws = fw_weights();
    for i in 0..50 {
        let w = &ws[i % ws.len()];
        let (map, s) = random_tuple(w, &mut rng);
        let ords = fixed_points_linear(&map, 2.0).map_err(e2s)?.ord_sum();
        // Generic: one fixed orbit per eigenline, of order its weight.
        ensure(ords == w.total(), || format!("trial {i}, q = {:?}: sum ord {ords}", w.as_slice()))?;
        let e = linear_engine(&s, 2, CoefficientField::Rationals).map_err(e2s)?;
        let n = e.barcode.statistics().n;
        ensure(n == w.total() as u64, || format!("trial {i}: barcode count {n}"))?;
    }
    let mut seen = Vec::new();
    for s in linear_scenes().into_iter().chain([load("identity_cp1.toml")]) {
        let run = report::run_scene(&s, s.fields[0]).map_err(e2s)?;
        let total = s.weights().map_err(e2s)?.total();
        match &run.output.spectrum {
            Some(sp) => {
                ensure(sp.ord_sum() >= total, || format!("{:?}: sum ord {} < {total}", s.weights, sp.ord_sum()))?;
                seen.push(format!("{}", sp.ord_sum()));
            }
            // Fixed points are not isolated: infinitely many.
            None => seen.push("inf".into()),
        }
    }
    let run = perturbed_run().as_ref().map_err(|e| e.clone())?;
    let sp = run.output.spectrum.as_ref().ok_or("perturbed scene has no isolated spectrum")?;
    ensure(sp.ord_sum() >= 3, || format!("perturbed: sum ord {}", sp.ord_sum()))?;
    seen.push(format!("{}", sp.ord_sum()));
    Ok(format!("50 generic maps with equality; scenes: sum ord {}", seen.join(", ")))
}

fn check_spectral(e: &EngineOutput, actions: &[f64]) -> Result<(), String> {
    let inv = e.invariants().map_err(e2s)?;
    let t = e.weights.total() as i64;
    ensure(inv.c.windows(2).all(|p| p[0] <= p[1]), || format!("c not nondecreasing: {:?}", inv.c))?;
    // Periodicity read straight from the barcode: degree 2k + 2|q| is born
    // exactly one later than degree 2k.
    let bars = e.barcode.expand(-2.0, 3.0);
    for b in bars.iter().filter(|b| b.death.is_none() && b.birth < 1.5) {
        let c = bars
            .iter()
            .find(|c| c.death.is_none() && c.degree == b.degree + 2 * t)
            .ok_or_else(|| format!("no partner for degree {}", b.degree))?;
        // Translates are computed as birth + j, so only rounding separates them.
        ensure((c.birth - b.birth - 1.0).abs() < 1e-12, || {
            format!("shift {} at degree {}", c.birth - b.birth, b.degree)
        })?;
    }
    for k in -t..2 * t {
        let c = inv.get(k);
        ensure(dist_mod_1(c, actions) < 1e-8, || format!("c_{k} = {c} is not an action"))?;
    }
    Ok(())
}

// 3. Spectral invariants of every linear-engine output.
fn spectral_structure() -> Outcome {
    let mut n = 0;
    for s in linear_scenes() {
        let map = s.tuple().map_err(e2s)?.composed_map().ok_or("linear scene")?;
        let actions = linear_spectral_values(&map, 0.0, 1.0);
        for &f in &s.fields {
            let run = report::run_scene(&s, f).map_err(e2s)?;
            check_spectral(&run.output, &actions).map_err(|m| format!("{:?} {f}: {m}", s.weights))?;
            n += 1;
        }
    }
    let mut rng = gfh_core::rng(3);
    for (i, w) in fw_weights().iter().cycle().take(30).enumerate() {
        let (map, s) = random_tuple(w, &mut rng);
        let actions = linear_spectral_values(&map, 0.0, 1.0);
        let e = linear_engine(&s, 2, CoefficientField::Rationals).map_err(e2s)?;
        check_spectral(&e, &actions).map_err(|m| format!("random {i}: {m}"))?;
        n += 1;
    }
    Ok(format!("{n} outputs"))
}

fn small_weights() -> Vec<Weights> {
    [vec![1], vec![1, 1], vec![1, 2], vec![1, 1, 1], vec![1, 2, 3], vec![1, 1, 2]]
        .into_iter()
        .map(|q| Weights::new(q).unwrap())
        .collect()
}

// 4. c_k(s^-1) = -c_{d-k}(s).
fn duality() -> Outcome {
    let mut rng = gfh_core::rng(4);
    let mut worst: f64 = 0.0;
    for w in small_weights().iter().cycle().take(20) {
        let (_, s) = random_tuple(w, &mut rng);
        let a = linear_engine(&s, 2, CoefficientField::Rationals).map_err(e2s)?.invariants().map_err(e2s)?;
        let b = linear_engine(&s.inverse(), 2, CoefficientField::Rationals).map_err(e2s)?.invariants().map_err(e2s)?;
        let d = w.dim() as i64;
        for k in 0..w.total() as i64 {
            worst = worst.max((b.get(k) + a.get(d - k)).abs());
        }
    }
    ensure(worst < 1e-8, || format!("max residual {worst:e}"))?;
    Ok(format!("20 tuples, max residual {worst:.1e}"))
}

// 5. c_{k+l-d}(s s') <= c_k(s) + c_l(s').
fn subadditivity() -> Outcome {
    let mut rng = gfh_core::rng(5);
    let mut min_slack = f64::INFINITY;
    for (i, w) in small_weights().iter().cycle().take(20).enumerate() {
        let (_, s) = random_tuple(w, &mut rng);
        let (_, s2) = random_tuple(w, &mut rng);
        let inv = |t: &GFTuple| linear_engine(t, 2, CoefficientField::Rationals).and_then(|e| e.invariants());
        let (a, b, ab) = (inv(&s).map_err(e2s)?, inv(&s2).map_err(e2s)?, inv(&s.concat_eps(&s2)).map_err(e2s)?);
        let (d, t) = (w.dim() as i64, w.total() as i64);
        for k in 0..t {
            for l in 0..t {
                let slack = a.get(k) + b.get(l) - ab.get(k + l - d);
                min_slack = min_slack.min(slack);
                ensure(slack >= -1e-9, || format!("pair {i}: (k, l) = ({k}, {l}) violated by {slack:e}"))?;
            }
        }
    }
    Ok(format!("20 pairs, 0 violations, min slack {min_slack:.3e}"))
}

/// Rank of an integer matrix modulo a prime, by plain Gaussian elimination.
fn rank_mod(p: i64, rows: usize, cols: usize, entries: &[(usize, usize, i64)]) -> usize {
    let mut m = vec![vec![0i64; cols]; rows];
    for &(r, c, v) in entries {
        m[r][c] = (m[r][c] + v).rem_euclid(p);
    }
    let inv = |a: i64| {
        let (mut r, mut b, mut e) = (1i64, a, p - 2);
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    };
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, piv);
        let f = inv(m[rank][c]);
        for x in m[rank].iter_mut() {
            *x = *x * f % p;
        }
        for r in 0..rows {
            if r != rank && m[r][c] != 0 {
                let g = m[r][c];
                let pivot = m[rank].clone();
                for (x, y) in m[r].iter_mut().zip(&pivot) {
                    *x = (*x - g * y).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Betti number of the sublevel complex `{filtration <= t}` in degree k.
fn brute_betti(cx: &FilteredComplex, k: i64, t: f64, p: Option<i64>) -> usize {
    let alive: Vec<usize> = (0..cx.len()).filter(|&j| cx.cells()[j].filtration <= t).collect();
    let of = |deg: i64| -> Vec<usize> { alive.iter().copied().filter(|&j| cx.cells()[j].degree == deg).collect() };
    let rank_of = |deg: i64| -> usize {
        let cols = of(deg);
        let rows = of(deg - 1);
        let mut entries = Vec::new();
        for (ci, &c) in cols.iter().enumerate() {
            for &(face, v) in cx.boundary(c) {
                if let Some(ri) = rows.iter().position(|&r| r == face) {
                    entries.push((ri, ci, v));
                }
            }
        }
        match p {
            Some(p) => rank_mod(p, rows.len(), cols.len(), &entries),
            // Over Q: two large primes; both can only underestimate.
            None => rank_mod(1_000_003, rows.len(), cols.len(), &entries).max(rank_mod(
                998_244_353,
                rows.len(),
                cols.len(),
                &entries,
            )),
        }
    };
    of(k).len() - rank_of(k) - rank_of(k + 1)
}

/// Random filtered simplicial complex on a few vertices, with extra cells
/// whose boundary is a multiple of a vertex to create torsion.
fn random_complex<R: Rng>(rng: &mut R) -> FilteredComplex {
    use std::collections::BTreeMap;
    let mut cx = FilteredComplex::new();
    let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let nv = rng.random_range(4..9);
    let cap = rng.random_range(20..=200);
    let mut value = |rng: &mut R, base: f64| base + rng.random_range(0.0..1.0);
    fn add<R: Rng>(
        s: &[usize],
        cx: &mut FilteredComplex,
        index: &mut BTreeMap<Vec<usize>, usize>,
        rng: &mut R,
        value: &mut impl FnMut(&mut R, f64) -> f64,
    ) -> usize {
        if let Some(&j) = index.get(s) {
            return j;
        }
        let mut boundary = Vec::new();
        let mut base: f64 = 0.0;
        if s.len() > 1 {
            for i in 0..s.len() {
                let mut face = s.to_vec();
                face.remove(i);
                let f = add(&face, cx, index, rng, value);
                base = base.max(cx.cells()[f].filtration);
                boundary.push((f, if i % 2 == 0 { 1 } else { -1 }));
            }
        }
        let j = cx.add_cell(s.len() as i64 - 1, value(rng, base), boundary);
        index.insert(s.to_vec(), j);
        j
    }
    while cx.len() < cap {
        let dim = rng.random_range(0..4usize);
        let mut s: Vec<usize> = (0..nv).collect();
        for i in (1..nv).rev() {
            s.swap(i, rng.random_range(0..=i));
        }
        s.truncate(dim + 1);
        s.sort_unstable();
        if cx.len() + (1 << (dim + 1)) > cap + 1 {
            break;
        }
        add(&s, &mut cx, &mut index, rng, &mut value);
        if rng.random_range(0..10) == 0 {
            let verts: Vec<usize> = index.iter().filter(|(k, _)| k.len() == 1).map(|(_, &j)| j).collect();
            let v = verts[rng.random_range(0..verts.len())];
            let c = [2, 3, 5, 6, 15][rng.random_range(0..5)];
            let f = value(rng, cx.cells()[v].filtration);
            cx.add_cell(1, f, vec![(v, c)]);
        }
    }
    cx
}

// 6. Barcode ranks against brute-force sublevel homology.
fn persistence_ranks() -> Outcome {
    let mut rng = gfh_core::rng(6);
    let fields = [
        (CoefficientField::Rationals, None),
        (CoefficientField::Prime(3), Some(3)),
        (CoefficientField::Prime(5), Some(5)),
    ];
    let mut cells = 0;
    for i in 0..50 {
        let cx = random_complex(&mut rng);
        cx.validate().map_err(e2s)?;
        cells += cx.len();
        let top = cx.cells().iter().map(|c| c.filtration).fold(0.0, f64::max);
        let ts: Vec<f64> = (0..10).map(|_| rng.random_range(0.0..top + 0.5)).collect();
        for (f, p) in fields {
            let bars = reduce(&cx, f).map_err(e2s)?;
            for &t in &ts {
                for k in 0..=3 {
                    let got = bars_alive(&bars, k, t);
                    let want = brute_betti(&cx, k, t, p);
                    ensure(got == want, || {
                        format!("complex {i} over {f}, degree {k}, t = {t}: {got} bars vs rank {want}")
                    })?;
                }
            }
        }
    }
    Ok(format!("50 complexes, {cells} cells, Q/F3/F5 x 10 levels"))
}

fn random_barcode<R: Rng>(rng: &mut R, total: u32) -> PeriodicBarcode {
    let k = rng.random_range(0..6);
    let finite = (0..k)
        .map(|_| {
            let birth = rng.random_range(0.0..1.0);
            FiniteBar { birth, death: birth + rng.random_range(0.01..0.99), degree: rng.random_range(-4..8) }
        })
        .collect();
    let infinite =
        (0..total).map(|j| InfiniteBar { birth: rng.random_range(0.0..1.0), degree: 2 * j as i64 }).collect();
    PeriodicBarcode::new(total, CoefficientField::Rationals, finite, infinite).unwrap()
}

// 7. int_0^1 dim G^{(a+x, a+x+n)} dx = n|q| + 2 beta_tot.
fn betatot_integral() -> Outcome {
    let mut rng = gfh_core::rng(7);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let total = rng.random_range(1..5);
        let b = random_barcode(&mut rng, total);
        let n = 1 + (i % 3) as u32;
        let a = rng.random_range(-1.0..1.0);
        let lhs = b.window_integral(a, n).map_err(e2s)?;
        let rhs = n as f64 * total as f64 + 2.0 * b.statistics().beta_tot;
        worst = worst.max((lhs - rhs).abs());
        ensure((lhs - rhs).abs() < 1e-6, || format!("barcode {i}, n = {n}: {lhs} vs {rhs}"))?;
        // Crude midpoint rule as a sanity check on the exact integrator.
        let m = 2000;
        let mut riemann = 0.0;
        for j in 0..m {
            let x = a + (j as f64 + 0.5) / m as f64;
            riemann += b.window_dim(x, x + n as f64).map_err(e2s)? as f64 / m as f64;
        }
        ensure((riemann - rhs).abs() < 0.05, || format!("barcode {i}: midpoint {riemann} vs {rhs}"))?;
    }
    Ok(format!("50 barcodes, max gap {worst:.1e}"))
}

// 8. N = |q| + 2K.
fn homology_count_formula() -> Outcome {
    let mut rng = gfh_core::rng(8);
    for i in 0..50 {
        let total = rng.random_range(1..5);
        let b = random_barcode(&mut rng, total);
        // Endpoints per period: one per infinite orbit, two per finite one.
        let ends = b
            .expand(0.0, 3.0)
            .iter()
            .map(|x| (0.0..1.0).contains(&x.birth) as u64 * (1 + x.death.is_some() as u64))
            .sum::<u64>();
        ensure(b.statistics().n == ends, || format!("synthetic {i}: N = {} vs {ends} endpoints", b.statistics().n))?;
    }
    let mut exact = 0;
    let mut outputs: Vec<EngineOutput> = Vec::new();
    for s in linear_scenes() {
        for &f in &s.fields {
            outputs.push(report::run_scene(&s, f).map_err(e2s)?.output);
        }
    }
    let mut rng = gfh_core::rng(80);
    for w in fw_weights().iter().cycle().take(12) {
        outputs.push(linear_engine(&random_tuple(w, &mut rng).1, 2, CoefficientField::Rationals).map_err(e2s)?);
    }
    outputs.push(perturbed_run().as_ref().map_err(|e| e.clone())?.output.clone());
    for e in outputs.iter().filter(|e| e.resolution.is_exact()) {
        let h = homology_count(e).map_err(e2s)?;
        let st = e.barcode.statistics();
        ensure(h.n == e.weights.total() as u64 + 2 * st.k as u64, || {
            format!("q = {:?}: sum ord {} vs |q| + 2K = {}", e.weights.as_slice(), h.n, st.n)
        })?;
        exact += 1;
    }
    Ok(format!("50 synthetic, {exact} exact engine outputs"))
}

// 9. beta_max < 1, and an injected long bar raises the alarm.
fn beta_max() -> Outcome {
    let mut n = 0;
    for s in linear_scenes() {
        for &f in &s.fields {
            let e = report::run_scene(&s, f).map_err(e2s)?.output;
            verify_beta_max(&e.barcode).map_err(e2s)?;
            n += 1;
        }
    }
    let e = &perturbed_run().as_ref().map_err(|e| e.clone())?.output;
    ensure(e.resolution.is_exact(), || "perturbed scene is not exact".into())?;
    let bm = e.barcode.statistics().beta_max;
    verify_beta_max(&e.barcode).map_err(e2s)?;
    n += 1;

    let bad = PeriodicBarcode::new(
        1,
        CoefficientField::Rationals,
        vec![FiniteBar { birth: 0.1, death: 1.2, degree: 1 }],
        vec![InfiniteBar { birth: 0.0, degree: 0 }],
    )
    .unwrap();
    ensure(matches!(verify_beta_max(&bad), Err(GfhError::TheoremViolation(_))), || {
        "library missed the violation".into()
    })?;
    ensure(matches!(report::verify_barcode(&bad), Err(e) if e.code() == 3), || "replay missed the violation".into())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("bad.json");
    std::fs::write(&path, bad.to_json().map_err(e2s)?).map_err(|e| e.to_string())?;
    let out = Command::new(env!("CARGO_BIN_EXE_gfh"))
        .args(["verify", "--barcode"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(3), || format!("cli exit {:?}", out.status.code()))?;
    Ok(format!("{n} exact outputs (perturbed beta_max {bm:.6}); alarm fires with exit 3"))
}

// 10. Smith dimension and beta_tot inequalities, change of variables.
fn smith() -> Outcome {
    let mut lines = Vec::new();
    let mut worst_cov: f64 = 0.0;
    let mut rng = gfh_core::rng(10);
    for s in linear_scenes() {
        let rep = report::verify_scene(&s, &["smith".into(), "betatot_smith".into()], 0).map_err(e2s)?;
        for v in &rep.verdicts {
            ensure(v.status == Status::Pass, || format!("{:?}: {} {:?} {}", s.weights, v.check, v.status, v.inputs))?;
        }
        let t = s.tuple().map_err(e2s)?;
        for &p in &s.primes {
            for r in 0..p as i64 {
                worst_cov = worst_cov.max(smith_change_of_variables(&t, p, r, 4, &mut rng).map_err(e2s)?);
            }
        }
        lines.push(format!("{:?} p = {:?}", s.weights, s.primes));
    }

    let scene = load("perturbed_cp12.toml");
    let base_run = perturbed_run().as_ref().map_err(|e| e.clone())?;
    ensure(base_run.output.resolution.is_exact(), || "perturbed base is bounded".into())?;
    let k = base_run.output.barcode.statistics().k;
    ensure(k >= 1, || "perturbed base has no finite bar".into())?;
    let opts = &base_run.options;
    for p in [3u32, 5, 7] {
        let (base, iter) = smith_barcodes(&base_run.tuple, p, opts, &scene.extra_seeds()).map_err(e2s)?;
        ensure(base.resolution.is_exact() && iter.resolution.is_exact(), || format!("p = {p}: bounded resolution"))?;
        for (a, b) in [(0.0137, 0.4711), (0.2371, 0.9133), (-0.3119, 0.5417), (0.0517, 1.0517), (0.6131, 1.3379)] {
            let r = smith_dims_check(&base, &iter, p, a, b).map_err(e2s)?;
            ensure(r.holds, || format!("p = {p}, window ({a}, {b}): {} > {}", r.lhs, r.rhs))?;
        }
        let bt = betatot_smith_check(&base, &iter, p);
        ensure(bt.status == Status::Pass, || format!("p = {p}: beta_tot {bt:?}"))?;
        let reference = opts.reference.as_ref().ok_or("perturbed scene needs its reference")?;
        for r in 0..p as i64 {
            worst_cov = worst_cov.max(smith_change_of_variables(&reference.tuple, p, r, 4, &mut rng).map_err(e2s)?);
        }
    }
    lines.push(format!("perturbed CP(1,2) exact, K = {k}, p = 3, 5, 7"));
    ensure(worst_cov < 1e-8, || format!("change of variables residual {worst_cov:e}"))?;
    Ok(format!("{}; change of variables {worst_cov:.1e}", lines.join("; ")))
}

// 11. Torsion 30: F_p differs from Q exactly for p | 30.
fn universal_coefficients() -> Outcome {
    let w = Weights::new(vec![1, 1]).unwrap();
    let primes = [2, 3, 5, 7, 11, 13, 17, 31];
    let cmp = compare_fields(&catalog::torsion_complex(-3, 4), &w, -3.0, 4.0, &primes).map_err(e2s)?;
    for r in &cmp.primes {
        let p = r.field.characteristic();
        let designed = 30 % p != 0;
        ensure(r.agrees_with_q == designed, || format!("F_{p}: agrees {} but designed {designed}", r.agrees_with_q))?;
    }
    ensure(cmp.threshold == Some(7), || format!("threshold {:?}", cmp.threshold))?;
    let tested: Vec<u32> = cmp.primes.iter().map(|r| r.field.characteristic()).collect();
    Ok(format!("tested {tested:?}; differs below 7, agrees from 7"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("index formula", index_formula, Duration::from_secs(60)),
        ("Fortune-Weinstein count", fortune_weinstein, Duration::from_secs(30)),
        ("spectral structure", spectral_structure, Duration::from_secs(30)),
        ("duality", duality, Duration::MAX),
        ("subadditivity", subadditivity, Duration::MAX),
        ("persistence reduction", persistence_ranks, Duration::from_secs(60)),
        ("beta_tot integral", betatot_integral, Duration::MAX),
        ("N = |q| + 2K", homology_count_formula, Duration::MAX),
        ("beta_max < 1", beta_max, Duration::MAX),
        ("Smith inequalities", smith, Duration::from_secs(300)),
        ("universal coefficients", universal_coefficients, Duration::MAX),
    ];
    // Criterion 10 needs the perturbed run; time it up front so the shared
    // computation is not billed to whichever criterion touches it first.
    // Optional criterion numbers on the command line select a subset.
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |i: usize| only.is_empty() || only.contains(&(i + 1));
    let needs_perturbed = [2, 8, 9, 10].iter().any(|&c| wanted(c - 1));
    let warm = Instant::now();
    if needs_perturbed {
        let _ = perturbed_run();
    }
    let warm = warm.elapsed();
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        if !wanted(i) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let mut took = start.elapsed();
        if i == 9 {
            took += warm;
        }
        let outcome = match outcome {
            Ok(msg) if took > *limit => Err(format!("{msg}; over the {}s budget", limit.as_secs())),
            o => o,
        };
        let (tag, detail) = match &outcome {
            Ok(m) => ("PASS", m),
            Err(m) => ("FAIL", m),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!("[PRIMARY] criterion {:>2} {name}: {tag} ({detail}) [{:.1}s]", i + 1, took.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
