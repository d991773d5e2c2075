mod common;

use common::{arb_path, busy_market, noise};
use proptest::prelude::*;
use stochdim_core::io::{read_paths, write_paths};
use stochdim_core::{
    dissect_path, integrate_dissected, integrate_schedule, reassemble, refine_resets, reset_levels, simulate,
    validate_path, wealth_process, HoldingsSchedule, NamedRule, PiecewisePath, ResetSequence, Stop, Strategy,
};

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

fn refinement(path: &PiecewisePath, picks: &[usize]) -> ResetSequence {
    let last = path.grid().last_index();
    let extra: Vec<f64> = picks.iter().map(|&i| path.grid().time(i % last)).collect();
    refine_resets(&path.minimal_resets(), &extra, path).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gains_do_not_depend_on_reset_sequence(path in arb_path(), seed in any::<u64>(), picks in prop::collection::vec(0usize..64, 0..8)) {
        let h = noise(seed).schedule(&path).unwrap();
        let direct = integrate_schedule(&h, &path).unwrap();
        for resets in [path.minimal_resets(), path.stored_resets(), refinement(&path, &picks)] {
            let via = integrate_dissected(&h, &path, &resets).unwrap();
            prop_assert!(close(direct.values(), via.values(), 1e-9));
        }
    }

    #[test]
    fn dissection_reassembles(path in arb_path(), picks in prop::collection::vec(0usize..64, 0..8)) {
        let resets = refinement(&path, &picks);
        let pieces = dissect_path(&path, &resets).unwrap();
        let back = reassemble(path.initial(), &pieces);
        let dense = path.dense().values;
        prop_assert_eq!(back.len(), dense.len());
        for (a, b) in back.iter().zip(&dense) {
            prop_assert_eq!(a.dim(), b.dim());
            prop_assert!(close(a.as_slice(), b.as_slice(), 1e-12));
        }
        // every piece has constant dimension and vanishes up to its start
        for p in &pieces {
            prop_assert!(p.values.iter().all(|v| v.dim() == p.n));
            prop_assert!(p.values[..=p.start].iter().all(|v| v.is_zero()));
        }
    }

    #[test]
    fn integral_is_linear(path in arb_path(), s1 in any::<u64>(), s2 in any::<u64>(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let h = noise(s1).schedule(&path).unwrap();
        let g = noise(s2).schedule(&path).unwrap();
        let combined = Strategy::linear(a, noise(s1), b, noise(s2)).schedule(&path).unwrap();
        let lhs = integrate_schedule(&combined, &path).unwrap();
        let gh = integrate_schedule(&h, &path).unwrap();
        let gg = integrate_schedule(&g, &path).unwrap();
        let rhs: Vec<f64> = gh.values().iter().zip(gg.values()).map(|(x, y)| a * x + b * y).collect();
        prop_assert!(close(lhs.values(), &rhs, 1e-11));
    }

    #[test]
    fn stopping_commutes_with_integration(path in arb_path(), seed in any::<u64>(), pick in 0usize..64) {
        let alpha_idx = pick % path.grid().len();
        let alpha = path.grid().time(alpha_idx);
        let h = noise(seed).schedule(&path).unwrap();
        let stopped_gains = integrate_schedule(&h, &path).unwrap().stop_at(alpha).unwrap();
        let stopped_path = path.stop_at(alpha).unwrap();
        let h_on_stopped = noise(seed).schedule(&stopped_path).unwrap();
        let via_path = integrate_schedule(&h_on_stopped, &stopped_path).unwrap();
        let via_integrand = integrate_schedule(&h.restricted_to(alpha_idx), &path).unwrap();
        prop_assert_eq!(stopped_gains.values(), via_integrand.values());
        prop_assert!(close(stopped_gains.values(), via_path.values(), 1e-12));
    }

    #[test]
    fn nonnegative_wealth_is_a_cone(seed in any::<u64>(), a in 0.0..5.0f64, b in 0.0..5.0f64) {
        // long-only holdings in positive assets with v = cost of the position
        let spec = busy_market(seed, 3, 20);
        for sc in simulate(&spec).unwrap() {
            let p = &sc.path;
            let bh = Strategy::named(NamedRule::BuyHold);
            let one = Strategy::named(NamedRule::ConstantShare { asset: 0, shares: 1.0 });
            let v1 = wealth_process(50.0, &bh.schedule(p).unwrap(), p).unwrap();
            let v2 = wealth_process(20.0, &one.schedule(p).unwrap(), p).unwrap();
            let combo = HoldingsSchedule::combine(a, &bh.schedule(p).unwrap(), b, &one.schedule(p).unwrap()).unwrap();
            let v = wealth_process(a * 50.0 + b * 20.0, &combo, p).unwrap();
            let expect: Vec<f64> = v1.values().values().iter().zip(v2.values().values()).map(|(x, y)| a * x + b * y).collect();
            prop_assert!(close(v.values().values(), &expect, 1e-11));
            if v1.is_nonnegative() && v2.is_nonnegative() {
                prop_assert!(v.min() >= -1e-9 * (1.0 + expect.iter().fold(0.0f64, |m, x| m.max(x.abs()))));
            }
        }
    }

    #[test]
    fn csv_round_trip_is_exact(path in arb_path(), id in any::<u64>()) {
        let bytes = write_paths(Vec::new(), [(id, &path)]).unwrap();
        let back = read_paths(bytes.as_slice()).unwrap();
        prop_assert_eq!(back, vec![(id, path)]);
    }
}

#[test]
fn generated_paths_validate_and_conserve_wealth() {
    let spec = busy_market(9, 300, 50);
    for sc in simulate(&spec).unwrap() {
        let p = &sc.path;
        assert!(validate_path(&p.to_record()).is_empty());
        // every applied event is a reset time unless a same-time event undoes it
        for e in sc.events.iter().filter(|e| e.applied) {
            let i = p.grid().locate(e.time).unwrap();
            let group = sc.events.iter().filter(|o| o.applied && o.time == e.time).count();
            assert!(group > 1 || p.piece_starting_at(i).is_some(), "event at {} is not a reset", e.time);
        }
        let h = Strategy::named(NamedRule::EqualWeight).schedule(p).unwrap();
        for level in reset_levels(&h, p, &p.stored_resets()).unwrap() {
            assert_eq!(level.before, level.after);
        }
    }
}

#[test]
fn ensembles_are_pure_functions_of_the_spec() {
    let spec = busy_market(5, 40, 30);
    let a = simulate(&spec).unwrap();
    let b = simulate(&spec).unwrap();
    assert_eq!(a, b);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let c = pool.install(|| simulate(&spec).unwrap());
    assert_eq!(a, c);
}
