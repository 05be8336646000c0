//! Property tests over random inputs.

use proptest::prelude::*;

use gfh_core::engine::linear_engine;
use gfh_core::equivariant::{cayley_gf, regenerate, EquivariantLinearMap, GFTuple};
use gfh_core::index::{floor_sum, morse_index, t_family};
use gfh_core::persistence::complex::bars_alive;
use gfh_core::persistence::{reduce, FilteredComplex, FiniteBar, InfiniteBar, PeriodicBarcode};
use gfh_core::scene::Scene;
use gfh_core::weights::{isotropy_order, CoefficientField, Weights};
use num_complex::Complex64;

fn weights() -> impl Strategy<Value = Vec<u32>> {
    proptest::collection::vec(1u32..=3, 1..=3)
}

fn barcode() -> impl Strategy<Value = PeriodicBarcode> {
    (1u32..4)
        .prop_flat_map(|t| {
            (
                Just(t),
                proptest::collection::vec((0.0..1.0f64, 0.001..0.999f64, -3i64..6), 0..5),
                proptest::collection::vec(0.0..1.0f64, t as usize),
            )
        })
        .prop_map(|(t, fin, inf)| {
            let finite = fin.into_iter().map(|(b, l, d)| FiniteBar { birth: b, death: b + l, degree: d }).collect();
            let infinite =
                inf.into_iter().enumerate().map(|(j, b)| InfiniteBar { birth: b, degree: 2 * j as i64 }).collect();
            PeriodicBarcode::new(t, CoefficientField::Rationals, finite, infinite).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn barcode_json_round_trip(b in barcode()) {
        let back = PeriodicBarcode::from_json(&b.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, b);
    }

    #[test]
    fn window_integral_matches_closed_form(b in barcode(), a in -2.0..2.0f64, n in 1u32..=3) {
        let lhs = b.window_integral(a, n).unwrap();
        let rhs = n as f64 * b.total_weight as f64 + 2.0 * b.statistics().beta_tot;
        prop_assert!((lhs - rhs).abs() < 1e-9, "{} vs {}", lhs, rhs);
    }

    /// Alternating count of live bars equals the Euler characteristic of the
    /// sublevel set, over every field.
    #[test]
    fn euler_characteristic_of_sublevels(
        fil in proptest::collection::vec(0.0..1.0f64, 3..12),
        t in 0.0..2.0f64,
        p in prop::sample::select(vec![0u32, 2, 3, 7]),
    ) {
        // A path of vertices and edges with the given values, every edge
        // entering after its endpoints.
        let mut cx = FilteredComplex::new();
        let mut prev: Option<(usize, f64)> = None;
        for &f in &fil {
            let v = cx.add_cell(0, f, vec![]);
            if let Some((u, fu)) = prev {
                cx.add_cell(1, f.max(fu) + 0.5, vec![(u, -1), (v, 1)]);
            }
            prev = Some((v, f));
        }
        let field = if p == 0 { CoefficientField::Rationals } else { CoefficientField::Prime(p) };
        let bars = reduce(&cx, field).unwrap();
        let chi_bars = bars_alive(&bars, 0, t) as i64 - bars_alive(&bars, 1, t) as i64;
        let chi_cells: i64 = cx.cells().iter().filter(|c| c.filtration <= t).map(|c| if c.degree == 0 { 1 } else { -1 }).sum();
        prop_assert_eq!(chi_bars, chi_cells);
        // A path is connected once every cell is in.
        prop_assert_eq!(bars_alive(&bars, 0, 10.0), 1);
    }

    #[test]
    fn cayley_round_trip(q in weights(), seed in any::<u64>()) {
        let w = Weights::new(q).unwrap();
        let map = EquivariantLinearMap::random(&w, 0.05, &mut gfh_core::rng(seed));
        let back = regenerate(&cayley_gf(&map).unwrap()).unwrap();
        prop_assert!((back - map.matrix()).amax() < 1e-10);
    }

    #[test]
    fn index_jumps_by_floor_sums(q in weights(), t in -0.99..0.99f64) {
        let w = Weights::new(q.clone()).unwrap();
        prop_assume!(q.iter().all(|&x| { let y = x as f64 * t; (y - y.round()).abs() > 1e-6 }));
        let at0 = morse_index(&t_family(&w, 1, 0.0).unwrap()).unwrap();
        let at = morse_index(&t_family(&w, 1, t).unwrap()).unwrap();
        prop_assert_eq!(at.real_index as i64 - (at0.real_index + at0.nullity) as i64, 2 * floor_sum(&w, t));
    }

    #[test]
    fn linear_invariants_are_periodic_and_dual(q in weights(), seed in any::<u64>()) {
        let w = Weights::new(q).unwrap();
        let map = EquivariantLinearMap::random(&w, 0.8, &mut gfh_core::rng(seed));
        let s = GFTuple::split_linear(&map, 3).unwrap();
        let a = linear_engine(&s, 2, CoefficientField::Rationals).unwrap().invariants().unwrap();
        let b = linear_engine(&s.inverse(), 2, CoefficientField::Rationals).unwrap().invariants().unwrap();
        let (t, d) = (w.total() as i64, w.dim() as i64);
        prop_assert!(a.nondecreasing);
        for k in -t..t {
            prop_assert!(a.get(k) <= a.get(k + 1) + 1e-12);
            prop_assert!((a.get(k + t) - a.get(k) - 1.0).abs() < 1e-12);
            prop_assert!((b.get(k) + a.get(d - k)).abs() < 1e-8);
        }
    }

    #[test]
    fn isotropy_is_gcd_of_supported_weights(q in weights(), mask in 1u32..8) {
        let w = Weights::new(q.clone()).unwrap();
        let z: Vec<Complex64> = (0..q.len()).map(|j| if mask >> j & 1 == 1 { Complex64::new(0.6, 0.3) } else { Complex64::new(0.0, 0.0) }).collect();
        prop_assume!(z.iter().any(|c| c.norm() > 0.0));
        let g = q.iter().zip(&z).filter(|(_, c)| c.norm() > 0.0).fold(0u32, |g, (&x, _)| gcd(g, x));
        prop_assert_eq!(isotropy_order(&w, &z).unwrap(), g);
        // The order does not change along the circle action.
        let moved = w.rotate(0.37, &z);
        prop_assert_eq!(isotropy_order(&w, &moved).unwrap(), g);
    }

    #[test]
    fn rotation_scene_toml_round_trip(q in weights(), angles in proptest::collection::vec(-1.5..1.5f64, 3), window in 2usize..4) {
        let text = format!(
            "weights = {:?}\nwindow = {window}\n[hamiltonian]\nkind = \"rotation\"\nangles = {:?}\n",
            q,
            &angles[..q.len()]
        );
        let s = Scene::parse(&text).unwrap();
        let again = Scene::parse(&s.to_toml().unwrap()).unwrap();
        prop_assert_eq!(again.to_toml().unwrap(), s.to_toml().unwrap());
        prop_assert_eq!(again.window, window);
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
