use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qw_core::certify::{explicit_decomposition, simplex_grid};
use qw_core::lp::{
    aggregate, c_gamma_min_lp, choi_objective, extreme_points, feasible_polytope, hyperplane_polytope,
    product_distribution,
};
use qw_core::sampling::random_product_state;
use qw_core::states::{ppt_state, ppt_threshold_numeric, PptFamilyParams};
use qw_core::witness::{choi_witness, ChoiParams};
use qw_core::ChoiType;

#[test]
fn extreme_points_are_realized_and_feasible() {
    for d in 2..=5 {
        for kind in [ChoiType::First, ChoiType::Second] {
            let box_lp = feasible_polytope(d).unwrap();
            for ep in extreme_points(d, kind).unwrap() {
                let realized = aggregate(&product_distribution(&ep.alpha, &ep.beta, d).unwrap(), kind);
                assert!(
                    realized.p.iter().zip(&ep.point.p).all(|(x, y)| (x - y).abs() < 1e-12),
                    "{kind} d={d}: {:?} vs {:?}",
                    realized.p,
                    ep.point
                );
                assert!(box_lp.is_feasible(&ep.point.p, 1e-12));
            }
        }
    }
}

#[test]
fn lp_value_bounds_product_overlaps() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in 3..=5 {
        let points = extreme_points(d, ChoiType::First).unwrap();
        for _ in 0..40 {
            let df = d as f64;
            let mut a = vec![rng.random_range(1.0..df - 1.0)];
            a.extend((1..d).map(|_| rng.random_range(0.0..df)));
            let p = ChoiParams::first(&a).unwrap();
            let c = choi_objective(&p).unwrap();
            let value = |x: &[f64]| x.iter().zip(&c).map(|(x, w)| x * w).sum::<f64>();
            let (lp_min, _) = c_gamma_min_lp(&p).unwrap();
            for ep in &points {
                assert!(lp_min <= value(&ep.point.p) + 1e-12, "d={d} a={a:?}");
            }
            for _ in 0..50 {
                let (alpha, beta) = random_product_state(d, &mut rng);
                let agg = aggregate(&product_distribution(&alpha, &beta, d).unwrap(), ChoiType::First);
                assert!(lp_min <= value(&agg.p) + 1e-12, "d={d} a={a:?}");
            }
        }
    }
}

#[test]
fn hyperplane_set_cuts_off_a_realized_point() {
    // |0⟩|0⟩ aggregates to ((d-1)/d) e_1 for the first type.
    let points = extreme_points(3, ChoiType::First).unwrap();
    let lp = hyperplane_polytope(3).unwrap();
    assert!(points.iter().any(|ep| !lp.is_feasible(&ep.point.p, 1e-12)));
    assert!(points.iter().all(|ep| feasible_polytope(3).unwrap().is_feasible(&ep.point.p, 1e-12)));
}

#[test]
fn decomposable_witnesses_never_detect_ppt_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    for d in [3, 4] {
        for _ in 0..30 {
            let a: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..d as f64)).collect();
            let p = ChoiParams::first(&a).unwrap();
            if explicit_decomposition(&p).is_err() {
                continue;
            }
            checked += 1;
            let w = choi_witness(&p).unwrap();
            for mu in simplex_grid(d - 1, 6) {
                let t = ppt_threshold_numeric(d, &mu, ChoiType::First, 1e-12).unwrap().p;
                for p_mix in [0.0, 0.5 * t, t] {
                    let rho = ppt_state(&PptFamilyParams::new(d, p_mix, mu.clone(), ChoiType::First).unwrap());
                    let value = w.trace_product(&rho).re;
                    assert!(value > -1e-9, "a={a:?} mu={mu:?} p={p_mix}: {value}");
                }
            }
        }
    }
    assert!(checked > 10, "only {checked} decomposable draws");
}
